//! The relaxed weight polytope built from matching statistics and the
//! objective `Σ_{E4} (w a) ln(w a) + Σ_{E3} (w a) ln(p_e w a)`, `a = n/K`.
//!
//! The objective is convex, so its maximum over the polytope sits at a
//! vertex. Small instances enumerate vertices; larger ones climb from many
//! LP vertices by successive linearisation, which only ever moves between
//! vertices and never decreases the objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linalg::solve_dense;
use crate::error::{Error, Result};
use crate::lp::{to_lp_format, FeasibleBasis, LinearProgram, LpOutcome, Relation, Sense};
use crate::regularity::{EdgeClass, QuotientGraph};

/// Instances with at most this many unknowns are maximised by vertex
/// enumeration.
pub const VERTEX_ENUMERATION_LIMIT: usize = 12;

const BOUND_TOL: f64 = 1e-9;
const VALUE_TOL: f64 = 1e-12;
/// Weights are clipped here before taking logarithms in the gradient.
const GRADIENT_FLOOR: f64 = 1e-12;
const MAX_ASCENT_STEPS: usize = 200;
/// Random LP directions used by [`maximize_objective`] on large instances.
const DEFAULT_RANDOM_STARTS: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopeVar {
    pub i: usize,
    pub j: usize,
    pub class: EdgeClass,
    /// Pair density, used inside the logarithm for E3 pairs.
    pub p: f64,
    pub upper: f64,
}

/// `lower ≤ Σ_{v ∈ vars} w_v ≤ upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopeRow {
    pub vertex: usize,
    pub vars: Vec<usize>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polytope2 {
    pub vars: Vec<PolytopeVar>,
    pub rows: Vec<PolytopeRow>,
    /// `n / K`.
    pub scale: f64,
    pub eps: f64,
    pub feasible: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    VertexEnumeration,
    MultistartAscent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveResult {
    pub s: f64,
    pub w: Vec<f64>,
    pub method: Method,
    /// The value is the exact maximum.
    pub certified: bool,
    /// Vertices (enumeration) or ascent starts examined.
    pub examined: usize,
}

impl Polytope2 {
    /// Checks indices and bounds, then decides feasibility by LP.
    pub fn new(
        vars: Vec<PolytopeVar>,
        rows: Vec<PolytopeRow>,
        scale: f64,
        eps: f64,
    ) -> Result<Self> {
        if let Some(v) = vars.iter().find(|v| !(0.0..=1.0).contains(&v.upper)) {
            return Err(Error::invalid(format!(
                "bound {} on pair ({}, {}) is outside [0, 1]",
                v.upper, v.i, v.j
            )));
        }
        if rows.iter().flat_map(|r| &r.vars).any(|&v| v >= vars.len()) {
            return Err(Error::invalid("row refers to an unknown variable"));
        }
        if !(scale > 0.0) {
            return Err(Error::invalid(format!(
                "scale n/K = {scale} must be positive"
            )));
        }
        let mut out = Polytope2 {
            vars,
            rows,
            scale,
            eps,
            feasible: false,
        };
        out.feasible = out
            .lp(Sense::Maximize, vec![0.0; out.h()])
            .solve()
            .is_feasible();
        Ok(out)
    }

    pub fn h(&self) -> usize {
        self.vars.len()
    }

    pub fn lp(&self, sense: Sense, objective: Vec<f64>) -> LinearProgram<f64> {
        let mut lp = LinearProgram::new(sense, objective);
        lp.names = self
            .vars
            .iter()
            .map(|v| format!("w_{}_{}", v.i, v.j))
            .collect();
        lp.upper = self.vars.iter().map(|v| Some(v.upper)).collect();
        for row in &self.rows {
            let coeffs: Vec<(usize, f64)> = row.vars.iter().map(|&v| (v, 1.0)).collect();
            if row.lower > 0.0 {
                lp.constrain(coeffs.clone(), Relation::Ge, row.lower);
            }
            lp.constrain(coeffs, Relation::Le, row.upper);
        }
        lp
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        w.len() == self.h()
            && w.iter()
                .zip(&self.vars)
                .all(|(&x, v)| x >= -BOUND_TOL && x <= v.upper + BOUND_TOL)
            && self.rows.iter().all(|r| {
                let s: f64 = r.vars.iter().map(|&v| w[v]).sum();
                s >= r.lower - BOUND_TOL && s <= r.upper + BOUND_TOL
            })
    }

    /// Feasibility LP in CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        let comment = format!(
            "weight polytope: {} pairs, {} rows, n/K = {}, eps = {}",
            self.h(),
            self.rows.len(),
            self.scale,
            self.eps
        );
        to_lp_format(&self.lp(Sense::Maximize, vec![0.0; self.h()]), &comment)
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let a = self.scale;
        self.vars
            .iter()
            .zip(w)
            .map(|(v, &x)| {
                let x = x.max(GRADIENT_FLOOR);
                match v.class {
                    EdgeClass::E4 => a * ((a * x).ln() + 1.0),
                    EdgeClass::E3 => a * ((v.p * a * x).ln() + 1.0),
                    EdgeClass::E1 | EdgeClass::E2 => 0.0,
                }
            })
            .collect()
    }

    fn clamp(&self, mut w: Vec<f64>) -> Vec<f64> {
        for (x, v) in w.iter_mut().zip(&self.vars) {
            *x = x.clamp(0.0, v.upper);
        }
        w
    }
}

/// Unknowns for every pair of positive density: E1 pairs bounded by their
/// matching ratio `r_ij`, the rest by 1. For every part `i`,
/// `1 − r_i − √ε ≤ Σ_{j≠i} w(ij) ≤ 1`.
pub fn feasible_region(h: &QuotientGraph, eps: f64) -> Result<Polytope2> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::invalid(format!("eps = {eps} is not in [0, 1)")));
    }
    let mut vars = Vec::new();
    let mut rows: Vec<PolytopeRow> = (0..h.k)
        .map(|i| PolytopeRow {
            vertex: i,
            vars: Vec::new(),
            lower: 1.0 - h.r_vertex[i] - eps.sqrt(),
            upper: 1.0,
        })
        .collect();
    for pair in h.pairs.iter().filter(|p| p.density > 0.0) {
        let upper = match pair.class {
            EdgeClass::E1 => pair.r.unwrap_or(0.0).clamp(0.0, 1.0),
            _ => 1.0,
        };
        rows[pair.i].vars.push(vars.len());
        rows[pair.j].vars.push(vars.len());
        vars.push(PolytopeVar {
            i: pair.i,
            j: pair.j,
            class: pair.class,
            p: pair.density,
            upper,
        });
    }
    Polytope2::new(vars, rows, h.n as f64 / h.k as f64, eps)
}

/// The objective at `w`, with `0 · ln 0 = 0`.
pub fn objective_value(p: &Polytope2, w: &[f64]) -> f64 {
    let a = p.scale;
    p.vars
        .iter()
        .zip(w)
        .map(|(v, &x)| {
            let y = a * x;
            if y <= 0.0 {
                return 0.0;
            }
            match v.class {
                EdgeClass::E4 => y * y.ln(),
                EdgeClass::E3 => y * (v.p * y).ln(),
                EdgeClass::E1 | EdgeClass::E2 => 0.0,
            }
        })
        .sum()
}

/// `a < b` lexicographically, ignoring differences below the tolerance.
fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > VALUE_TOL {
            return x < y;
        }
    }
    false
}

/// Keeps the larger objective; among equal values, the lexicographically
/// smaller point.
fn better(value: f64, w: &[f64], best: &Option<(f64, Vec<f64>)>) -> bool {
    match best {
        None => true,
        Some((bv, bw)) => value > bv + VALUE_TOL || (value >= bv - VALUE_TOL && lex_less(w, bw)),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Lower,
    Upper,
    Free,
}

struct Enumerator<'a> {
    p: &'a Polytope2,
    slots: Vec<Slot>,
    best: Option<(f64, Vec<f64>)>,
    examined: usize,
}

impl Enumerator<'_> {
    /// Every row can still meet its bounds given the slots fixed so far.
    fn partially_feasible(&self, assigned: usize) -> bool {
        self.p.rows.iter().all(|r| {
            let (mut lo, mut hi) = (0.0, 0.0);
            for &v in &r.vars {
                let ub = self.p.vars[v].upper;
                match (v < assigned).then(|| self.slots[v]) {
                    Some(Slot::Lower) => {}
                    Some(Slot::Upper) => {
                        lo += ub;
                        hi += ub;
                    }
                    Some(Slot::Free) | None => hi += ub,
                }
            }
            hi >= r.lower - BOUND_TOL && lo <= r.upper + BOUND_TOL
        })
    }

    fn dfs(&mut self, idx: usize, free: usize) {
        if idx == self.p.h() {
            self.resolve();
            return;
        }
        let open = self.p.vars[idx].upper > BOUND_TOL;
        for slot in [Slot::Lower, Slot::Upper, Slot::Free] {
            if slot != Slot::Lower && !open {
                continue;
            }
            if slot == Slot::Free && free >= self.p.rows.len() {
                continue;
            }
            self.slots[idx] = slot;
            if self.partially_feasible(idx + 1) {
                self.dfs(idx + 1, free + usize::from(slot == Slot::Free));
            }
        }
    }

    /// Determines the free unknowns from every choice of tight rows.
    fn resolve(&mut self) {
        let base: Vec<f64> = self
            .slots
            .iter()
            .zip(&self.p.vars)
            .map(|(s, v)| if *s == Slot::Upper { v.upper } else { 0.0 })
            .collect();
        let free: Vec<usize> = (0..self.p.h())
            .filter(|&v| self.slots[v] == Slot::Free)
            .collect();
        if free.is_empty() {
            self.consider(base);
            return;
        }
        let candidates: Vec<usize> = (0..self.p.rows.len())
            .filter(|&r| self.p.rows[r].vars.iter().any(|v| free.contains(v)))
            .collect();
        let f = free.len();
        if candidates.len() < f {
            return;
        }
        for chosen in combinations(candidates.len(), f) {
            let rows: Vec<&PolytopeRow> = chosen
                .iter()
                .map(|&c| &self.p.rows[candidates[c]])
                .collect();
            let matrix: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    free.iter()
                        .map(|v| f64::from(u8::from(r.vars.contains(v))))
                        .collect()
                })
                .collect();
            let fixed: Vec<f64> = rows
                .iter()
                .map(|r| r.vars.iter().map(|&v| base[v]).sum())
                .collect();
            for sides in 0..1u32 << f {
                let rhs: Vec<f64> = rows
                    .iter()
                    .zip(&fixed)
                    .enumerate()
                    .map(|(k, (r, s))| {
                        let bound = if sides >> k & 1 == 1 {
                            r.upper
                        } else {
                            r.lower
                        };
                        bound - s
                    })
                    .collect();
                let Some(x) = solve_dense(matrix.clone(), rhs) else {
                    break;
                };
                let mut w = base.clone();
                for (&v, value) in free.iter().zip(x) {
                    w[v] = value;
                }
                if self.p.contains(&w) {
                    self.consider(self.p.clamp(w));
                }
            }
        }
    }

    fn consider(&mut self, w: Vec<f64>) {
        if !self.p.contains(&w) {
            return;
        }
        self.examined += 1;
        let value = objective_value(self.p, &w);
        if better(value, &w, &self.best) {
            self.best = Some((value, w));
        }
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(c.clone());
        let Some(i) = (0..k).rev().find(|&i| c[i] != i + n - k) else {
            return out;
        };
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

fn require_feasible(p: &Polytope2) -> Result<()> {
    if p.feasible {
        Ok(())
    } else {
        Err(Error::Infeasible("the weight polytope is empty".into()))
    }
}

/// Exact maximum over all vertices. Refuses more than
/// [`VERTEX_ENUMERATION_LIMIT`] unknowns.
pub fn vertex_enumeration(p: &Polytope2) -> Result<ObjectiveResult> {
    require_feasible(p)?;
    if p.h() > VERTEX_ENUMERATION_LIMIT {
        return Err(Error::ResourceLimit {
            what: "vertex enumeration unknowns",
            actual: p.h(),
            limit: VERTEX_ENUMERATION_LIMIT,
        });
    }
    let mut e = Enumerator {
        p,
        slots: vec![Slot::Lower; p.h()],
        best: None,
        examined: 0,
    };
    e.dfs(0, 0);
    let (s, w) = e
        .best
        .ok_or_else(|| Error::Infeasible("no vertex found in a feasible polytope".into()))?;
    Ok(ObjectiveResult {
        s,
        w,
        method: Method::VertexEnumeration,
        certified: true,
        examined: e.examined,
    })
}

fn lp_vertex(p: &Polytope2, basis: &mut FeasibleBasis<f64>, direction: &[f64]) -> Option<Vec<f64>> {
    match basis.reoptimize(Sense::Maximize, direction) {
        LpOutcome::Optimal { x, .. } => Some(p.clamp(x)),
        _ => None,
    }
}

/// Successive linearisation: move to the LP vertex maximising the gradient
/// until the objective stops increasing.
fn ascend(p: &Polytope2, basis: &mut FeasibleBasis<f64>, mut w: Vec<f64>) -> (f64, Vec<f64>) {
    let mut value = objective_value(p, &w);
    for _ in 0..MAX_ASCENT_STEPS {
        let Some(next) = lp_vertex(p, basis, &p.gradient(&w)) else {
            break;
        };
        let next_value = objective_value(p, &next);
        if next_value <= value + VALUE_TOL {
            break;
        }
        w = next;
        value = next_value;
    }
    (value, w)
}

/// Ascent from LP vertices in `random_starts` seeded random directions,
/// both directions along every unknown that carries objective weight, and
/// both directions along every row sum. Certified only when no unknown
/// carries weight, so that the objective is identically zero.
pub fn multistart_ascent(
    p: &Polytope2,
    seed: u64,
    random_starts: usize,
) -> Result<ObjectiveResult> {
    require_feasible(p)?;
    let h = p.h();
    let mut basis = p
        .lp(Sense::Maximize, vec![0.0; h])
        .feasible_basis()
        .ok_or_else(|| Error::Infeasible("no LP vertex found".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut directions: Vec<Vec<f64>> = (0..random_starts)
        .map(|_| (0..h).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    let weighted: Vec<usize> = (0..h)
        .filter(|&v| matches!(p.vars[v].class, EdgeClass::E3 | EdgeClass::E4))
        .collect();
    if weighted.is_empty() {
        // the objective vanishes on the whole polytope
        let w = lp_vertex(p, &mut basis, &vec![0.0; h])
            .ok_or_else(|| Error::Infeasible("no LP vertex found".into()))?;
        return Ok(ObjectiveResult {
            s: 0.0,
            w,
            method: Method::MultistartAscent,
            certified: true,
            examined: 1,
        });
    }
    for sign in [1.0, -1.0] {
        for &v in &weighted {
            let mut d = vec![0.0; h];
            d[v] = sign;
            directions.push(d);
        }
        for r in &p.rows {
            let mut d = vec![0.0; h];
            for &v in &r.vars {
                d[v] = sign;
            }
            directions.push(d);
        }
    }
    let results: Vec<(f64, Vec<f64>)> = directions
        .into_par_iter()
        .filter_map(|d| {
            let mut basis = basis.clone();
            let start = lp_vertex(p, &mut basis, &d)?;
            Some(ascend(p, &mut basis, start))
        })
        .collect();
    let examined = results.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (value, w) in results {
        if better(value, &w, &best) {
            best = Some((value, w));
        }
    }
    let (s, w) = best.ok_or_else(|| Error::Infeasible("no LP vertex found".into()))?;
    Ok(ObjectiveResult {
        s,
        w,
        method: Method::MultistartAscent,
        certified: false,
        examined,
    })
}

/// Vertex enumeration when small enough, seeded multi-start ascent
/// otherwise.
pub fn maximize_objective(p: &Polytope2, seed: u64) -> Result<ObjectiveResult> {
    if p.h() <= VERTEX_ENUMERATION_LIMIT {
        vertex_enumeration(p)
    } else {
        multistart_ascent(p, seed, DEFAULT_RANDOM_STARTS)
    }
}

/// `(1 − 4√ε) s`.
pub fn thm13_lower_bound(p: &Polytope2, seed: u64) -> Result<f64> {
    Ok((1.0 - 4.0 * p.eps.sqrt()) * maximize_objective(p, seed)?.s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(i: usize, j: usize, class: EdgeClass, p: f64, upper: f64) -> PolytopeVar {
        PolytopeVar {
            i,
            j,
            class,
            p,
            upper,
        }
    }

    fn row(vertex: usize, vars: Vec<usize>, lower: f64) -> PolytopeRow {
        PolytopeRow {
            vertex,
            vars,
            lower,
            upper: 1.0,
        }
    }

    #[test]
    fn single_dense_edge() {
        let a = 50.0;
        let p = Polytope2::new(
            vec![var(0, 1, EdgeClass::E4, 0.5, 1.0)],
            vec![row(0, vec![0], 0.0), row(1, vec![0], 0.0)],
            a,
            0.01,
        )
        .unwrap();
        let r = maximize_objective(&p, 0).unwrap();
        assert!(r.certified);
        assert!((r.s - a * a.ln()).abs() < 1e-9);
        assert_eq!(r.w, vec![1.0]);
    }

    #[test]
    fn two_dense_edges_reach_the_corner() {
        // w1 + w2 >= 1 on vertex 0 only; vertices 1, 2 unconstrained
        let p = Polytope2::new(
            vec![
                var(0, 1, EdgeClass::E4, 0.9, 1.0),
                var(0, 2, EdgeClass::E4, 0.9, 1.0),
            ],
            vec![PolytopeRow {
                vertex: 0,
                vars: vec![0, 1],
                lower: 1.0,
                upper: 2.0,
            }],
            20.0,
            0.01,
        )
        .unwrap();
        let r = vertex_enumeration(&p).unwrap();
        assert_eq!(r.w, vec![1.0, 1.0]);
        let m = multistart_ascent(&p, 1, 8).unwrap();
        assert!((m.s - r.s).abs() < 1e-9);
        assert!(!m.certified);
    }

    #[test]
    fn sparse_class_can_be_negative() {
        let (a, pe) = (100.0, 0.001);
        let p = Polytope2::new(
            vec![var(0, 1, EdgeClass::E3, pe, 1.0)],
            vec![row(0, vec![0], 0.5), row(1, vec![0], 0.5)],
            a,
            0.01,
        )
        .unwrap();
        let at_half = objective_value(&p, &[0.5]);
        assert!((at_half - 50.0 * (pe * 50.0).ln()).abs() < 1e-9);
        assert!(at_half < 0.0);
        // best is the smallest feasible weight
        let r = vertex_enumeration(&p).unwrap();
        assert!((r.w[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn continuity_at_zero() {
        let p = Polytope2::new(
            vec![
                var(0, 1, EdgeClass::E4, 1.0, 1.0),
                var(1, 2, EdgeClass::E3, 0.2, 1.0),
            ],
            vec![],
            1000.0,
            0.01,
        )
        .unwrap();
        assert_eq!(objective_value(&p, &[0.0, 0.0]), 0.0);
        assert!(objective_value(&p, &[1e-12, 1e-12]).abs() <= 1e-9 * p.scale);
    }

    #[test]
    fn infeasible_and_bad_input() {
        let p = Polytope2::new(
            vec![var(0, 1, EdgeClass::E1, 0.3, 0.2)],
            vec![row(0, vec![0], 0.9)],
            10.0,
            0.01,
        )
        .unwrap();
        assert!(!p.feasible);
        assert!(matches!(
            maximize_objective(&p, 0),
            Err(Error::Infeasible(_))
        ));
        assert!(
            Polytope2::new(vec![var(0, 1, EdgeClass::E4, 1.0, 1.5)], vec![], 1.0, 0.01).is_err()
        );
    }

    #[test]
    fn empty_polytope_has_zero_objective() {
        let p = Polytope2::new(vec![], vec![row(0, vec![], -0.5)], 10.0, 0.01).unwrap();
        let r = maximize_objective(&p, 0).unwrap();
        assert_eq!((r.s, r.w.len()), (0.0, 0));
    }

    #[test]
    fn subsets() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(2, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn lp_text_export() {
        let p = Polytope2::new(
            vec![var(0, 1, EdgeClass::E4, 1.0, 0.5)],
            vec![row(0, vec![0], 0.25)],
            4.0,
            0.01,
        )
        .unwrap();
        let text = p.to_lp_format();
        assert!(text.contains(" c0: 1 w_0_1 >= 0.25\n"));
        assert!(text.contains(" 0 <= w_0_1 <= 0.5\n"));
    }
}
