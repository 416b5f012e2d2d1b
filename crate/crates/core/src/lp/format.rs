use std::fmt::Write;

use super::{LinearProgram, Relation, Scalar, Sense};

fn term(out: &mut String, first: &mut bool, coef: f64, name: &str) {
    if coef == 0.0 {
        return;
    }
    let sign = if coef < 0.0 { '-' } else { '+' };
    if *first {
        if coef < 0.0 {
            out.push_str(" -");
        }
    } else {
        let _ = write!(out, " {sign}");
    }
    let _ = write!(out, " {} {}", coef.abs(), name);
    *first = false;
}

/// Renders the program in CPLEX LP text format for external solvers.
pub fn to_lp_format<T: Scalar>(lp: &LinearProgram<T>, comment: &str) -> String {
    let mut out = String::new();
    for line in comment.lines() {
        let _ = writeln!(out, "\\ {line}");
    }
    out.push_str(match lp.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    let mut first = true;
    for (j, c) in lp.objective.iter().enumerate() {
        term(&mut out, &mut first, c.to_f64(), &lp.names[j]);
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for (i, c) in lp.constraints.iter().enumerate() {
        let _ = write!(out, " c{i}:");
        let mut first = true;
        for (j, a) in &c.coeffs {
            term(&mut out, &mut first, a.to_f64(), &lp.names[*j]);
        }
        if first {
            out.push_str(" 0 ");
            out.push_str(&lp.names[0]);
        }
        let rel = match c.rel {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {rel} {}", c.rhs.to_f64());
    }
    out.push_str("Bounds\n");
    for (j, ub) in lp.upper.iter().enumerate() {
        match ub {
            Some(u) => {
                let _ = writeln!(out, " 0 <= {} <= {}", lp.names[j], u.to_f64());
            }
            None => {
                let _ = writeln!(out, " {} >= 0", lp.names[j]);
            }
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_sections() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![0.0, 1.0]);
        lp.names = vec!["w_0_1".into(), "y_0".into()];
        lp.upper = vec![Some(1.0), Some(1.0)];
        lp.constrain(vec![(0, 1.0), (1, 1.0)], Relation::Ge, 1.0);
        lp.constrain(vec![(0, -1.0), (1, 1.0)], Relation::Ge, -1.0);
        let text = to_lp_format(&lp, "test");
        assert_eq!(
            text,
            "\\ test\nMinimize\n obj: 1 y_0\nSubject To\n c0: 1 w_0_1 + 1 y_0 >= 1\n \
             c1: - 1 w_0_1 + 1 y_0 >= -1\nBounds\n 0 <= w_0_1 <= 1\n 0 <= y_0 <= 1\nEnd\n"
        );
    }
}
