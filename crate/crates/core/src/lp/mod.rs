//! Dense two-phase bounded-variable simplex with Bland's rule.
//!
//! All variables are non-negative, optionally bounded above. The same code
//! runs over `f64` and over exact rationals.

mod format;
mod scalar;

pub use format::to_lp_format;
pub use scalar::{rational, Scalar, F64_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint<T> {
    pub coeffs: Vec<(usize, T)>,
    pub rel: Relation,
    pub rhs: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    pub sense: Sense,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    /// Upper bound per variable; lower bounds are all zero.
    pub upper: Vec<Option<T>>,
    pub names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T> LpOutcome<T> {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(sense: Sense, objective: Vec<T>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            constraints: Vec::new(),
            upper: vec![None; n],
            names: (0..n).map(|i| format!("x{i}")).collect(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<(usize, T)>, rel: Relation, rhs: T) {
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn solve(&self) -> LpOutcome<T> {
        match self.feasible_basis() {
            Some(basis) => basis.solve(self.sense, &self.objective),
            None => LpOutcome::Infeasible,
        }
    }

    /// Runs phase one only; `None` when the constraints are infeasible. The
    /// result can be reoptimised for many objectives over the same region.
    pub fn feasible_basis(&self) -> Option<FeasibleBasis<T>> {
        let mut tableau = Tableau::build(self)?;
        tableau.phase_one().then_some(FeasibleBasis { tableau })
    }
}

/// A feasible tableau for a fixed constraint set.
#[derive(Clone, Debug)]
pub struct FeasibleBasis<T> {
    tableau: Tableau<T>,
}

impl<T: Scalar> FeasibleBasis<T> {
    pub fn solve(&self, sense: Sense, objective: &[T]) -> LpOutcome<T> {
        self.clone().reoptimize(sense, objective)
    }

    /// Like [`FeasibleBasis::solve`], but starts from and keeps the basis
    /// left by the previous call.
    pub fn reoptimize(&mut self, sense: Sense, objective: &[T]) -> LpOutcome<T> {
        let minimize_obj: Vec<T> = match sense {
            Sense::Minimize => objective.to_vec(),
            Sense::Maximize => objective.iter().map(Scalar::neg).collect(),
        };
        match self.tableau.phase_two(&minimize_obj) {
            LpOutcome::Optimal { x, value } => {
                let value = match sense {
                    Sense::Minimize => value,
                    Sense::Maximize => value.neg(),
                };
                LpOutcome::Optimal { x, value }
            }
            other => other,
        }
    }
}

/// Bounded-variable tableau: upper bounds are not rows. Nonbasic columns
/// sit at zero or at their upper bound; `value` holds the basic values.
#[derive(Clone, Debug)]
struct Tableau<T> {
    rows: Vec<Vec<T>>,
    value: Vec<T>,
    basis: Vec<usize>,
    upper: Vec<Option<T>>,
    at_upper: Vec<bool>,
    /// Reduced costs for the current phase.
    reduced: Vec<T>,
    n_orig: usize,
    artificial_from: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Moved { degenerate: bool },
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_RUN: usize = 50;

impl<T: Scalar> Tableau<T> {
    /// `None` when a variable has a negative upper bound.
    fn build(lp: &LinearProgram<T>) -> Option<Self> {
        let n = lp.n_vars();
        if lp.upper.iter().flatten().any(Scalar::is_neg) {
            return None;
        }
        // (dense coefficients, relation, rhs) with rhs >= 0
        let mut rows: Vec<(Vec<T>, Relation, T)> = Vec::new();
        for c in &lp.constraints {
            let mut dense = vec![T::zero(); n];
            for (j, a) in &c.coeffs {
                dense[*j] = dense[*j].add(a);
            }
            if c.rhs.is_neg() {
                let flipped = match c.rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                rows.push((
                    dense.iter().map(Scalar::neg).collect(),
                    flipped,
                    c.rhs.neg(),
                ));
            } else {
                rows.push((dense, c.rel, c.rhs.clone()));
            }
        }

        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let artificial_from = n + n_slack;
        let n_cols = artificial_from + n_art;
        let mut table = Vec::with_capacity(rows.len());
        let mut value = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut s, mut a) = (n, artificial_from);
        for (coeffs, rel, rhs) in rows {
            let mut row = coeffs;
            row.resize(n_cols, T::zero());
            match rel {
                Relation::Le => {
                    row[s] = T::one();
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = T::one().neg();
                    s += 1;
                    row[a] = T::one();
                    basis.push(a);
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = T::one();
                    basis.push(a);
                    a += 1;
                }
            }
            value.push(rhs);
            table.push(row);
        }
        let mut upper = lp.upper.clone();
        upper.resize(n_cols, None);
        Some(Tableau {
            rows: table,
            value,
            basis,
            upper,
            at_upper: vec![false; n_cols],
            reduced: Vec::new(),
            n_orig: n,
            artificial_from,
        })
    }

    fn n_cols(&self) -> usize {
        self.upper.len()
    }

    fn set_costs(&mut self, cost: &[T]) {
        let mut d = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if cost[b].is_zero() {
                continue;
            }
            for (dj, a) in d.iter_mut().zip(row) {
                if !a.is_zero() {
                    *dj = dj.sub(&cost[b].mul(a));
                }
            }
        }
        self.reduced = d;
    }

    /// Makes column `c` basic in row `r`. Basic values are left to the
    /// caller.
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.div(&p);
        }
        let pivot_row = self.rows[r].clone();
        let nonzero: Vec<usize> = (0..pivot_row.len())
            .filter(|&k| !pivot_row[k].is_zero())
            .collect();
        let eliminate = |row: &mut Vec<T>| {
            let f = row[c].clone();
            for &k in &nonzero {
                row[k] = row[k].sub(&f.mul(&pivot_row[k]));
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                eliminate(row);
            }
        }
        if !self.reduced.is_empty() && !self.reduced[c].is_zero() {
            eliminate(&mut self.reduced);
        }
        self.basis[r] = c;
    }

    fn current(&self, j: usize) -> T {
        if self.at_upper[j] {
            self.upper[j].clone().unwrap_or_else(T::zero)
        } else {
            T::zero()
        }
    }

    /// One Bland step over columns `< col_limit`.
    /// Improvement rate of moving nonbasic `j` off its bound, if positive.
    fn gain(&self, j: usize) -> Option<T> {
        let r = &self.reduced[j];
        if self.at_upper[j] {
            r.is_pos().then(|| r.clone())
        } else {
            r.is_neg().then(|| r.neg())
        }
    }

    /// One pivot or bound flip. Largest-gain pricing unless `bland`, which
    /// takes the lowest eligible index and cannot cycle.
    fn step(&mut self, col_limit: usize, is_basic: &mut [bool], bland: bool) -> Step {
        let mut entering: Option<(usize, T)> = None;
        for j in (0..col_limit).filter(|&j| !is_basic[j]) {
            if let Some(g) = self.gain(j) {
                if entering
                    .as_ref()
                    .is_none_or(|(_, best)| g.sub(best).is_pos())
                {
                    entering = Some((j, g));
                }
                if bland {
                    break;
                }
            }
        }
        let Some((j, _)) = entering else {
            return Step::Optimal;
        };
        let increase = !self.at_upper[j];
        // basic i moves by -sigma * a_ij * theta
        let mut best: Option<(T, Option<usize>, bool)> =
            self.upper[j].clone().map(|u| (u, None, false));
        for i in 0..self.rows.len() {
            let a = if increase {
                self.rows[i][j].clone()
            } else {
                self.rows[i][j].neg()
            };
            let (limit, to_upper) = if a.is_pos() {
                (self.value[i].div(&a), false)
            } else if a.is_neg() {
                match &self.upper[self.basis[i]] {
                    Some(u) => (u.sub(&self.value[i]).div(&a.neg()), true),
                    None => continue,
                }
            } else {
                continue;
            };
            let better = match &best {
                None => true,
                Some((bt, bi, _)) => {
                    limit.sub(bt).is_neg()
                        || !limit.sub(bt).is_pos()
                            && bi.is_some_and(|bi| self.basis[i] < self.basis[bi])
                }
            };
            if better {
                best = Some((limit, Some(i), to_upper));
            }
        }
        let Some((theta, leaving, to_upper)) = best else {
            return Step::Unbounded;
        };
        let theta = if theta.is_neg() { T::zero() } else { theta };
        let degenerate = theta.is_zero();
        let shift = if increase { theta.clone() } else { theta.neg() };
        for i in 0..self.rows.len() {
            if !self.rows[i][j].is_zero() {
                self.value[i] = self.value[i].sub(&self.rows[i][j].mul(&shift));
            }
        }
        match leaving {
            None => self.at_upper[j] = !self.at_upper[j],
            Some(r) => {
                let entering_value = self.current(j).add(&shift);
                let out = self.basis[r];
                self.at_upper[out] = to_upper;
                self.at_upper[j] = false;
                is_basic[out] = false;
                is_basic[j] = true;
                self.pivot(r, j);
                self.value[r] = entering_value;
            }
        }
        Step::Moved { degenerate }
    }

    /// Returns false if unbounded.
    fn optimize(&mut self, cost: &[T], col_limit: usize) -> bool {
        self.set_costs(cost);
        let mut is_basic = vec![false; self.n_cols()];
        for &b in &self.basis {
            is_basic[b] = true;
        }
        let mut run = 0;
        loop {
            match self.step(col_limit, &mut is_basic, run >= DEGENERATE_RUN) {
                Step::Optimal => return true,
                Step::Unbounded => return false,
                Step::Moved { degenerate: true } => run += 1,
                Step::Moved { degenerate: false } => run = 0,
            }
        }
    }

    /// Minimises the artificial sum, then drives zero-level artificials out
    /// of the basis. False when the constraints are infeasible.
    fn phase_one(&mut self) -> bool {
        let n_cols = self.n_cols();
        let mut phase1 = vec![T::zero(); n_cols];
        for c in phase1.iter_mut().skip(self.artificial_from) {
            *c = T::one();
        }
        self.optimize(&phase1, n_cols);
        let infeasibility = self
            .basis
            .iter()
            .zip(&self.value)
            .filter(|(&b, _)| b >= self.artificial_from)
            .fold(T::zero(), |acc, (_, v)| acc.add(v));
        if infeasibility.is_pos() {
            return false;
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        self.reduced.clear();
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.artificial_from {
                match (0..self.artificial_from).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(j) => {
                        let v = self.current(j);
                        self.at_upper[j] = false;
                        self.pivot(i, j);
                        self.value[i] = v;
                        i += 1;
                    }
                    None => {
                        self.rows.remove(i);
                        self.value.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        true
    }

    fn phase_two(&mut self, objective: &[T]) -> LpOutcome<T> {
        let mut cost = vec![T::zero(); self.n_cols()];
        cost[..self.n_orig].clone_from_slice(objective);
        if !self.optimize(&cost, self.artificial_from) {
            return LpOutcome::Unbounded;
        }
        let mut x: Vec<T> = (0..self.n_orig).map(|j| self.current(j)).collect();
        for (v, &b) in self.value.iter().zip(&self.basis) {
            if b < self.n_orig {
                x[b] = v.clone();
            }
        }
        let value = objective
            .iter()
            .zip(&x)
            .fold(T::zero(), |acc, (c, v)| acc.add(&c.mul(v)));
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn textbook_max() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let mut lp = LinearProgram::new(Sense::Maximize, vec![3.0, 5.0]);
        lp.constrain(vec![(0, 1.0)], Relation::Le, 4.0);
        lp.constrain(vec![(1, 2.0)], Relation::Le, 12.0);
        lp.constrain(vec![(0, 3.0), (1, 2.0)], Relation::Le, 18.0);
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert!((value - 36.0).abs() < 1e-9);
                assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.upper[0] = Some(1.0);
        lp.constrain(vec![(0, 1.0)], Relation::Ge, 2.0);
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 0.0]);
        lp.constrain(vec![(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn exact_equalities_with_redundancy() {
        // x + y = 1 twice, y + z = 1, min x + z  ->  0 at y = 1
        let r = |n| rational(n, 1);
        let mut lp = LinearProgram::new(Sense::Minimize, vec![r(1), r(0), r(1)]);
        lp.constrain(vec![(0, r(1)), (1, r(1))], Relation::Eq, r(1));
        lp.constrain(vec![(0, r(1)), (1, r(1))], Relation::Eq, r(1));
        lp.constrain(vec![(1, r(1)), (2, r(1))], Relation::Eq, r(1));
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, r(0));
                assert_eq!(x[1], r(1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_rhs_is_normalised() {
        // -x <= -2 with x <= 3, min x -> 2
        let mut lp: LinearProgram<BigRational> =
            LinearProgram::new(Sense::Minimize, vec![rational(1, 1)]);
        lp.upper[0] = Some(rational(3, 1));
        lp.constrain(vec![(0, rational(-1, 1))], Relation::Le, rational(-2, 1));
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rational(2, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn upper_bounds_without_rows() {
        // max x + 2y, x + y <= 3, x - y >= -0.5, x <= 1, y <= 1 -> 3 at (1, 1)
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 2.0]);
        lp.upper = vec![Some(1.0), Some(1.0)];
        lp.constrain(vec![(0, 1.0), (1, 1.0)], Relation::Le, 3.0);
        lp.constrain(vec![(0, 1.0), (1, -1.0)], Relation::Ge, -0.5);
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert!((value - 3.0).abs() < 1e-9, "{value}");
                assert_eq!(x, vec![1.0, 1.0]);
            }
            other => panic!("{other:?}"),
        }
        // min x subject to x + y >= 1.5 with y <= 1: x leaves its bound at 0.5
        let r = |n, d| rational(n, d);
        let mut lp = LinearProgram::new(Sense::Minimize, vec![r(1, 1), r(0, 1)]);
        lp.upper = vec![Some(r(1, 1)), Some(r(1, 1))];
        lp.constrain(vec![(0, r(1, 1)), (1, r(1, 1))], Relation::Ge, r(3, 2));
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, r(1, 2));
                assert_eq!(x, vec![r(1, 2), r(1, 1)]);
            }
            other => panic!("{other:?}"),
        }
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.upper[0] = Some(-1.0);
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
    }
}
