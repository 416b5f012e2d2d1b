//! Linear systems and programs on the quotient graph: the weight system
//! `Σ_j w(ij) = 1`, its error LP, the relaxed polytope with matching
//! statistics, and the entropy-like objective maximised over it.

mod linalg;
mod polytope;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::lp::{LinearProgram, LpOutcome, Relation, Scalar, Sense};
use crate::regularity::QuotientGraph;

pub use polytope::{
    feasible_region, maximize_objective, multistart_ascent, objective_value, thm13_lower_bound,
    vertex_enumeration, Method, ObjectiveResult, Polytope2, PolytopeRow, PolytopeVar,
    VERTEX_ENUMERATION_LIMIT,
};

/// Quotients with at most this many vertices are solved in exact rational
/// arithmetic.
pub const EXACT_LIMIT: usize = 8;

/// Largest grid the free-variable discretisation will produce.
pub const GRID_LIMIT: usize = 1 << 20;

/// Tolerance for residuals and box membership of floating-point solutions.
pub const SOLUTION_TOL: f64 = 1e-9;

/// `Σ_j w(ij) = 1` for every quotient vertex `i`, one unknown per pair of
/// positive density. A diagonal unknown `w(ii)` appears once in row `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientSystem {
    pub m: usize,
    /// Unknowns as `(i, j)` with `i <= j`, sorted.
    pub vars: Vec<(usize, usize)>,
}

impl QuotientSystem {
    pub fn new(m: usize, vars: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut vars: Vec<(usize, usize)> = vars
            .into_iter()
            .map(|(i, j)| (i.min(j), i.max(j)))
            .collect();
        if let Some(&(i, j)) = vars.iter().find(|&&(_, j)| j >= m) {
            return Err(Error::invalid(format!(
                "pair ({i}, {j}) is outside {m} vertices"
            )));
        }
        vars.sort_unstable();
        vars.dedup();
        Ok(QuotientSystem { m, vars })
    }

    /// Off-diagonal unknowns only, one per edge of `h`.
    pub fn from_graph(h: &Graph) -> Self {
        QuotientSystem {
            m: h.n(),
            vars: h.edges().collect(),
        }
    }

    /// One unknown per non-zero entry of the symmetric matrix `p`.
    pub fn from_densities(p: &[Vec<f64>]) -> Self {
        let m = p.len();
        let vars = (0..m)
            .flat_map(|i| (i..m).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i][j] != 0.0)
            .collect();
        QuotientSystem { m, vars }
    }

    pub fn from_quotient(q: &QuotientGraph) -> Self {
        Self::from_densities(&q.p)
    }

    pub fn h(&self) -> usize {
        self.vars.len()
    }

    /// The 0/1 matrix `A`, one row per quotient vertex.
    pub fn matrix(&self) -> Vec<Vec<i64>> {
        let mut a = vec![vec![0; self.h()]; self.m];
        for (c, &(i, j)) in self.vars.iter().enumerate() {
            a[i][c] = 1;
            a[j][c] = 1;
        }
        a
    }

    fn rows(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.m];
        for (c, &(i, j)) in self.vars.iter().enumerate() {
            rows[i].push(c);
            if j != i {
                rows[j].push(c);
            }
        }
        rows
    }

    fn row_sums(&self, w: &[f64]) -> Vec<f64> {
        self.rows()
            .iter()
            .map(|row| row.iter().map(|&c| w[c]).sum())
            .collect()
    }

    /// `max_i |1 − Σ_j w(ij)|`.
    pub fn residual(&self, w: &[f64]) -> f64 {
        self.row_sums(w)
            .iter()
            .map(|s| (1.0 - s).abs())
            .fold(0.0, f64::max)
    }

    pub fn names(&self) -> Vec<String> {
        self.vars
            .iter()
            .map(|(i, j)| format!("w_{i}_{j}"))
            .collect()
    }

    /// `A w = 1` inside the unit box, with the given objective.
    fn box_system<T: Scalar>(&self, sense: Sense, objective: Vec<T>) -> LinearProgram<T> {
        let mut lp = LinearProgram::new(sense, objective);
        lp.names = self.names();
        lp.upper = vec![Some(T::one()); self.h()];
        for row in self.rows() {
            lp.constrain(
                row.into_iter().map(|c| (c, T::one())).collect(),
                Relation::Eq,
                T::one(),
            );
        }
        lp
    }

    /// The error LP in block form: unknowns `(x, y)`, constraints
    /// `A x + y ≥ 1` and `−A x + y ≥ −1`, `0 ≤ x ≤ 1`, `y ≥ 0`,
    /// minimising `Σ y`.
    pub fn er_lp<T: Scalar>(&self) -> LinearProgram<T> {
        let h = self.h();
        let mut objective = vec![T::zero(); h];
        objective.extend((0..self.m).map(|_| T::one()));
        let mut lp = LinearProgram::new(Sense::Minimize, objective);
        lp.names = self.names();
        lp.names.extend((0..self.m).map(|i| format!("y_{i}")));
        for u in lp.upper.iter_mut().take(h) {
            *u = Some(T::one());
        }
        for (i, row) in self.rows().into_iter().enumerate() {
            let plus: Vec<(usize, T)> = row.iter().map(|&c| (c, T::one())).collect();
            let minus: Vec<(usize, T)> = row.iter().map(|&c| (c, T::one().neg())).collect();
            let y = (h + i, T::one());
            lp.constrain(
                plus.into_iter().chain([y.clone()]).collect(),
                Relation::Ge,
                T::one(),
            );
            lp.constrain(
                minus.into_iter().chain([y]).collect(),
                Relation::Ge,
                T::one().neg(),
            );
        }
        lp
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SolutionClass {
    Infeasible,
    Unique {
        w: Vec<f64>,
    },
    /// `particular + Σ t_k basis[k]`; `free` lists the unknowns that
    /// parametrise the solution set (one per basis vector).
    Infinite {
        particular: Vec<f64>,
        basis: Vec<Vec<f64>>,
        free: Vec<usize>,
    },
}

impl SolutionClass {
    pub fn kind(&self) -> &'static str {
        match self {
            SolutionClass::Infeasible => "infeasible",
            SolutionClass::Unique { .. } => "unique",
            SolutionClass::Infinite { .. } => "infinite",
        }
    }
}

fn optimal_point<T: Scalar>(outcome: LpOutcome<T>) -> Option<(Vec<f64>, T)> {
    match outcome {
        LpOutcome::Optimal { x, value } => Some((x.iter().map(Scalar::to_f64).collect(), value)),
        _ => None,
    }
}

/// Solutions of `A w = 1` in the box: a feasible point, and the vertices
/// minimising and maximising each unknown together with whether every
/// unknown is pinned.
fn box_extremes<T: Scalar>(sys: &QuotientSystem) -> Option<(Vec<f64>, Vec<Vec<f64>>, bool)> {
    let h = sys.h();
    let (first, _) = optimal_point(
        sys.box_system::<T>(Sense::Minimize, vec![T::zero(); h])
            .solve(),
    )?;
    let mut points = Vec::with_capacity(2 * h);
    let mut pinned = true;
    for c in 0..h {
        let mut unit = vec![T::zero(); h];
        unit[c] = T::one();
        let (lo_point, lo) = optimal_point(sys.box_system(Sense::Minimize, unit.clone()).solve())?;
        let (hi_point, hi) = optimal_point(sys.box_system(Sense::Maximize, unit).solve())?;
        pinned &= !hi.sub(&lo).is_pos();
        points.push(lo_point);
        points.push(hi_point);
    }
    Some((first, points, pinned))
}

/// Decides whether `A w = 1` has no, exactly one, or infinitely many
/// solutions in `[0, 1]^h`.
pub fn classify_system(sys: &QuotientSystem) -> SolutionClass {
    let extremes = if sys.m <= EXACT_LIMIT {
        box_extremes::<BigRational>(sys)
    } else {
        box_extremes::<f64>(sys)
    };
    let Some((first, points, pinned)) = extremes else {
        return SolutionClass::Infeasible;
    };
    let reduced = linalg::rref(&sys.matrix(), &vec![1; sys.m]);
    if reduced.rank() == sys.h() || pinned {
        return SolutionClass::Unique { w: first };
    }
    let h = sys.h();
    let mut particular = vec![0.0; h];
    for p in &points {
        for (acc, v) in particular.iter_mut().zip(p) {
            *acc += v / points.len() as f64;
        }
    }
    let basis = reduced
        .null_space()
        .iter()
        .map(|v| v.iter().map(linalg::to_f64).collect())
        .collect();
    SolutionClass::Infinite {
        particular,
        basis,
        free: reduced.free_columns(),
    }
}

/// `Er(H) = min_{w ∈ [0,1]^h} Σ_i |1 − Σ_j w(ij)|`, exactly for small
/// quotients.
pub fn er_value(sys: &QuotientSystem) -> f64 {
    fn solve<T: Scalar>(sys: &QuotientSystem) -> f64 {
        match sys.er_lp::<T>().solve() {
            LpOutcome::Optimal { value, .. } => value.to_f64(),
            // w = 0, y = 1 is always feasible and Σ y ≥ 0
            other => unreachable!("error LP cannot be {other:?}"),
        }
    }
    if sys.m <= EXACT_LIMIT {
        solve::<BigRational>(sys)
    } else {
        solve::<f64>(sys)
    }
}

/// `Σ_i |1 − Σ_j w(ij)|` at the given weights.
pub fn er_value_of(sys: &QuotientSystem, w: &[f64]) -> Result<f64> {
    if w.len() != sys.h() {
        return Err(Error::invalid(format!(
            "expected {} weights, got {}",
            sys.h(),
            w.len()
        )));
    }
    Ok(sys.row_sums(w).iter().map(|s| (1.0 - s).abs()).sum())
}

/// Solutions obtained by putting every free unknown on the grid
/// `{0, √ε, 2√ε, …}` (up to `⌊1/√ε⌋ √ε`), solving for the rest, and keeping
/// the points inside the box.
pub fn case3_grid(sys: &QuotientSystem, eps: f64) -> Result<Vec<Vec<f64>>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps = {eps} is not in (0, 1)")));
    }
    let reduced = linalg::rref(&sys.matrix(), &vec![1; sys.m]);
    if reduced.inconsistent {
        return Ok(Vec::new());
    }
    let step = eps.sqrt();
    let levels = (1.0 / step + 1e-9).floor() as usize + 1;
    let free = reduced.free_columns();
    let total = (0..free.len()).try_fold(1usize, |acc, _| acc.checked_mul(levels));
    match total {
        Some(t) if t <= GRID_LIMIT => {}
        _ => {
            return Err(Error::ResourceLimit {
                what: "free-variable grid size",
                actual: total.unwrap_or(usize::MAX),
                limit: GRID_LIMIT,
            })
        }
    }
    let mut out = Vec::new();
    let mut digits = vec![0usize; free.len()];
    loop {
        let values: Vec<(usize, f64)> = free
            .iter()
            .zip(&digits)
            .map(|(&c, &d)| (c, d as f64 * step))
            .collect();
        let w = reduced.solve_with(&values);
        if w.iter()
            .all(|&v| (-SOLUTION_TOL..=1.0 + SOLUTION_TOL).contains(&v))
        {
            out.push(w.into_iter().map(|v| v.clamp(0.0, 1.0)).collect());
        }
        // odometer increment
        let mut k = 0;
        while k < digits.len() {
            digits[k] += 1;
            if digits[k] < levels {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
        if k == digits.len() {
            break;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Thm12Bounds {
    /// The weight system has no solution in the box.
    NoMatching,
    Bounds {
        lower: f64,
        upper: f64,
    },
}

/// `((1 − 4√ε)(m/2) n ln n, (1 + 7√ε)(m/2) n ln n)` for a generalized
/// quasirandom graph with `m` parts of `n` vertices, or
/// [`Thm12Bounds::NoMatching`] when the weight system is infeasible.
pub fn thm12_bounds(sys: &QuotientSystem, n: usize, eps: f64) -> Result<Thm12Bounds> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::invalid(format!("eps = {eps} is not in [0, 1)")));
    }
    if n < 2 {
        return Err(Error::invalid("parts need at least two vertices"));
    }
    if classify_system(sys) == SolutionClass::Infeasible {
        return Ok(Thm12Bounds::NoMatching);
    }
    let base = sys.m as f64 / 2.0 * n as f64 * (n as f64).ln();
    let r = eps.sqrt();
    Ok(Thm12Bounds::Bounds {
        lower: (1.0 - 4.0 * r) * base,
        upper: (1.0 + 7.0 * r) * base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_solves(sys: &QuotientSystem, w: &[f64]) {
        assert!(sys.residual(w) <= SOLUTION_TOL, "{w:?}");
        assert!(w
            .iter()
            .all(|&v| (-SOLUTION_TOL..=1.0 + SOLUTION_TOL).contains(&v)));
    }

    #[test]
    fn trichotomy() {
        let edge = QuotientSystem::from_graph(&Graph::path(2));
        let path = QuotientSystem::from_graph(&Graph::path(3));
        let square = QuotientSystem::from_graph(&Graph::cycle(4));
        assert_eq!(
            classify_system(&edge),
            SolutionClass::Unique { w: vec![1.0] }
        );
        assert_eq!(classify_system(&path), SolutionClass::Infeasible);
        match classify_system(&square) {
            SolutionClass::Infinite {
                particular,
                basis,
                free,
            } => {
                assert_eq!(free.len(), 1);
                assert_eq!(basis.len(), 1);
                assert!(particular.iter().all(|&v| (v - 0.5).abs() < 1e-12));
                assert_solves(&square, &particular);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn diagonal_unknowns_count_once() {
        // w00 + w01 = 1 and w01 + w11 = 1: a segment of solutions
        let sys = QuotientSystem::new(2, [(0, 0), (0, 1), (1, 1)]).unwrap();
        assert_eq!(sys.matrix(), vec![vec![1, 1, 0], vec![0, 1, 1]]);
        assert_eq!(classify_system(&sys).kind(), "infinite");
        // a loop alone satisfies its row
        let lone = QuotientSystem::new(1, [(0, 0)]).unwrap();
        assert_eq!(
            classify_system(&lone),
            SolutionClass::Unique { w: vec![1.0] }
        );
        // with a pendant vertex the loop is forced to 1 and the edge to 0
        let forced = QuotientSystem::new(3, [(0, 0), (0, 1), (1, 2)]).unwrap();
        assert_eq!(
            classify_system(&forced),
            SolutionClass::Unique {
                w: vec![1.0, 0.0, 1.0]
            }
        );
    }

    #[test]
    fn error_values() {
        let edge = QuotientSystem::from_graph(&Graph::path(2));
        let path = QuotientSystem::from_graph(&Graph::path(3));
        let triangle = QuotientSystem::from_graph(&Graph::complete(3));
        assert_eq!(er_value(&edge), 0.0);
        assert_eq!(er_value(&path), 1.0);
        assert_eq!(er_value(&triangle), 0.0);
        assert_eq!(er_value_of(&triangle, &[0.5; 3]).unwrap(), 0.0);
        assert_eq!(er_value_of(&path, &[1.0, 1.0]).unwrap(), 1.0);
        assert!(er_value_of(&path, &[1.0]).is_err());
    }

    #[test]
    fn empty_quotient_vertex_costs_one() {
        let sys = QuotientSystem::new(2, []).unwrap();
        assert_eq!(er_value(&sys), 2.0);
        assert_eq!(classify_system(&sys), SolutionClass::Infeasible);
    }

    #[test]
    fn float_path_agrees_with_exact() {
        let cycle = QuotientSystem::from_graph(&Graph::cycle(9));
        let path = QuotientSystem::from_graph(&Graph::path(9));
        assert_eq!(classify_system(&cycle).kind(), "unique");
        assert!((er_value(&path) - 1.0).abs() < 1e-9);
        assert!(er_value(&cycle).abs() < 1e-9);
    }

    #[test]
    fn grid_on_four_cycle() {
        let square = QuotientSystem::from_graph(&Graph::cycle(4));
        let points = case3_grid(&square, 0.04).unwrap();
        assert_eq!(points.len(), 6);
        for w in &points {
            assert_solves(&square, w);
        }
        let path = QuotientSystem::from_graph(&Graph::path(3));
        assert!(case3_grid(&path, 0.04).unwrap().is_empty());
    }

    #[test]
    fn closed_form_bounds() {
        let path = QuotientSystem::from_graph(&Graph::path(3));
        assert_eq!(
            thm12_bounds(&path, 100, 0.01).unwrap(),
            Thm12Bounds::NoMatching
        );
        let edge = QuotientSystem::from_graph(&Graph::path(2));
        let base = 100.0 * 100f64.ln();
        match thm12_bounds(&edge, 100, 0.01).unwrap() {
            Thm12Bounds::Bounds { lower, upper } => {
                assert!((lower - 0.6 * base).abs() < 1e-9);
                assert!((upper - 1.7 * base).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            thm12_bounds(&edge, 100, 0.0).unwrap(),
            Thm12Bounds::Bounds {
                lower: base,
                upper: base
            }
        );
    }
}
