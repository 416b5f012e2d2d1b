use num_rational::BigRational;
use num_traits::{One, Zero};

/// Reduced row echelon form over the rationals.
pub(crate) struct Rref {
    /// Non-zero rows only; `rows[r]` has a leading one in `pivots[r]`.
    pub rows: Vec<Vec<BigRational>>,
    pub rhs: Vec<BigRational>,
    pub pivots: Vec<usize>,
    pub cols: usize,
    /// A zero row with non-zero right-hand side was found.
    pub inconsistent: bool,
}

pub(crate) fn rref(matrix: &[Vec<i64>], rhs: &[i64]) -> Rref {
    let cols = matrix.first().map_or(0, Vec::len);
    let mut rows: Vec<Vec<BigRational>> = matrix
        .iter()
        .map(|r| {
            r.iter()
                .map(|&v| BigRational::from_integer(v.into()))
                .collect()
        })
        .collect();
    let mut b: Vec<BigRational> = rhs
        .iter()
        .map(|&v| BigRational::from_integer(v.into()))
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        b.swap(r, p);
        let lead = rows[r][c].clone();
        for v in rows[r].iter_mut() {
            *v /= &lead;
        }
        b[r] /= &lead;
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for k in 0..cols {
                    let delta = &f * &rows[r][k];
                    rows[i][k] -= delta;
                }
                let delta = &f * &b[r];
                b[i] -= delta;
            }
        }
        pivots.push(c);
        r += 1;
    }
    let inconsistent = b[r..].iter().any(|v| !v.is_zero());
    rows.truncate(r);
    b.truncate(r);
    Rref {
        rows,
        rhs: b,
        pivots,
        cols,
        inconsistent,
    }
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.cols)
            .filter(|c| !self.pivots.contains(c))
            .collect()
    }

    /// One null-space vector per free column: that column set to one, the
    /// other free columns zero.
    pub fn null_space(&self) -> Vec<Vec<BigRational>> {
        self.free_columns()
            .into_iter()
            .map(|f| {
                let mut v = vec![BigRational::zero(); self.cols];
                v[f] = BigRational::one();
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    v[p] = -row[f].clone();
                }
                v
            })
            .collect()
    }

    /// Pivot values once the free columns are fixed.
    pub fn solve_with(&self, free_values: &[(usize, f64)]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for &(c, v) in free_values {
            out[c] = v;
        }
        for ((row, rhs), &p) in self.rows.iter().zip(&self.rhs).zip(&self.pivots) {
            let mut value = to_f64(rhs);
            for &(c, v) in free_values {
                value -= to_f64(&row[c]) * v;
            }
            out[p] = value;
        }
        out
    }
}

pub(crate) fn to_f64(x: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}

/// Solves a small dense square system by partial pivoting; `None` when
/// (numerically) singular.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[i][k] -= f * a[c][k];
                }
                b[i] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}
