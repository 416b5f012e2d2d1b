//! Deciding whether a pair `(X, Y)` is ε-regular.
//!
//! For a fixed `X'` the `Y'` of a given size that pushes `d(X', Y')`
//! furthest from `d(X, Y)` is a prefix of `Y` sorted by degree into `X'`
//! (largest or smallest degrees). Enumerating every `X'` on parts of at most
//! [`EXHAUSTIVE_LIMIT`] vertices therefore decides regularity exactly.
//!
//! Larger pairs get an alternating witness search seeded from degree and
//! neighbourhood sets. If it finds nothing, the pair is reported regular
//! together with the parameter a second-moment bound can prove: with
//! `B = A − d J`, every `X', Y'` satisfies
//! `|e(X',Y') − d|X'||Y'|| ≤ sqrt(S |Y'|)` where `S = Σ_{x,x'} |(B Bᵀ)_{xx'}|`.

use super::{CertifyMode, PairReport, Verdict, Witness, DEVIATION_TOL};
use crate::error::{Error, Result};
use crate::graph::{cross_edges, Graph, VertexSet};

/// Both parts at most this large → exhaustive certification.
pub const EXHAUSTIVE_LIMIT: usize = 16;

/// Seeds per side drawn from the most degree-deviant vertices.
const NEIGHBOURHOOD_SEEDS: usize = 8;
const MAX_ALTERNATIONS: usize = 16;

/// `ceil(eps · len)`, at least 1 and at most `len`.
pub fn min_witness_size(len: usize, eps: f64) -> usize {
    ((eps * len as f64 - DEVIATION_TOL).ceil().max(1.0) as usize).min(len)
}

/// Certifies the pair `(x, y)`. The report carries indices `(0, 1)`;
/// callers working with a partition overwrite them.
pub fn certify_pair(g: &Graph, x: &VertexSet, y: &VertexSet, eps: f64) -> Result<PairReport> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("eps = {eps} is not in (0, 1]")));
    }
    if x.is_empty() || y.is_empty() {
        return Err(Error::invalid("cannot certify a pair with an empty part"));
    }
    if !x.is_disjoint(y) {
        return Err(Error::invalid("cannot certify overlapping parts"));
    }
    let (a, b) = (x.len(), y.len());
    let density = cross_edges(g, x.as_slice(), y.as_slice()) as f64 / (a * b) as f64;
    let adj = BiAdjacency::new(g, x.as_slice(), y.as_slice());
    let mut report = PairReport {
        i: 0,
        j: 1,
        density,
        verdict: Verdict::Regular,
        witness: None,
        mode: CertifyMode::Exhaustive,
        effective_eps: eps,
        certified: true,
    };
    let found = if a <= EXHAUSTIVE_LIMIT && b <= EXHAUSTIVE_LIMIT {
        exhaustive(&adj, density, eps)
    } else {
        report.mode = CertifyMode::Heuristic;
        heuristic(&adj, density, eps)
    };
    match found {
        Some(c) if c.dev >= eps - DEVIATION_TOL => {
            report.verdict = Verdict::Irregular;
            report.witness = Some(Witness {
                x: c.x.iter().map(|&i| x.as_slice()[i]).collect(),
                y: c.y.iter().map(|&j| y.as_slice()[j]).collect(),
                density: c.density,
            });
        }
        _ if report.mode == CertifyMode::Heuristic => {
            let eta = adj.second_moment_parameter(density);
            report.effective_eps = eta;
            report.certified = eta < eps;
        }
        _ => {}
    }
    Ok(report)
}

/// Adjacency between `X` (indices `0..a`) and `Y` (indices `0..b`) as
/// bitsets in both directions.
struct BiAdjacency {
    a: usize,
    b: usize,
    wx: usize,
    wy: usize,
    /// Row `i` is the neighbourhood of `x_i` in `Y`.
    x_rows: Vec<u64>,
    /// Row `j` is the neighbourhood of `y_j` in `X`.
    y_rows: Vec<u64>,
}

fn words(len: usize) -> usize {
    len.div_ceil(64)
}

fn set_bit(row: &mut [u64], i: usize) {
    row[i / 64] |= 1 << (i % 64);
}

fn bitset(len: usize, members: &[usize]) -> Vec<u64> {
    let mut out = vec![0; words(len)];
    for &i in members {
        set_bit(&mut out, i);
    }
    out
}

fn and_count(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(p, q)| (p & q).count_ones()).sum()
}

impl BiAdjacency {
    fn new(g: &Graph, x: &[usize], y: &[usize]) -> Self {
        let (a, b) = (x.len(), y.len());
        let (wx, wy) = (words(b), words(a));
        let mut y_index = vec![u32::MAX; g.n()];
        for (j, &v) in y.iter().enumerate() {
            y_index[v] = j as u32;
        }
        let mut x_rows = vec![0u64; a * wx];
        let mut y_rows = vec![0u64; b * wy];
        for (i, &u) in x.iter().enumerate() {
            for &v in g.neighbors(u) {
                let j = y_index[v as usize];
                if j != u32::MAX {
                    let j = j as usize;
                    set_bit(&mut x_rows[i * wx..(i + 1) * wx], j);
                    set_bit(&mut y_rows[j * wy..(j + 1) * wy], i);
                }
            }
        }
        BiAdjacency {
            a,
            b,
            wx,
            wy,
            x_rows,
            y_rows,
        }
    }

    fn x_row(&self, i: usize) -> &[u64] {
        &self.x_rows[i * self.wx..(i + 1) * self.wx]
    }

    fn y_row(&self, j: usize) -> &[u64] {
        &self.y_rows[j * self.wy..(j + 1) * self.wy]
    }

    fn x_degrees_into(&self, y_set: &[u64]) -> Vec<u32> {
        (0..self.a)
            .map(|i| and_count(self.x_row(i), y_set))
            .collect()
    }

    fn y_degrees_into(&self, x_set: &[u64]) -> Vec<u32> {
        (0..self.b)
            .map(|j| and_count(self.y_row(j), x_set))
            .collect()
    }

    /// `(S / |Y|)^{1/2} / |X|` raised to `2/5`, minimised over both
    /// orientations: the pair is η-regular for every η above this value.
    fn second_moment_parameter(&self, d: f64) -> f64 {
        let sx = second_moment(self.a, self.b, d, |i| self.x_row(i));
        let sy = second_moment(self.b, self.a, d, |j| self.y_row(j));
        let cx = (sx / self.b as f64).sqrt() / self.a as f64;
        let cy = (sy / self.a as f64).sqrt() / self.b as f64;
        cx.min(cy).powf(0.4).min(1.0)
    }
}

/// `Σ_{u,u'} |codeg(u,u') − d deg(u) − d deg(u') + d² m|` over the `len`
/// rows, each a neighbourhood inside a side of size `m`.
fn second_moment<'a>(len: usize, m: usize, d: f64, row: impl Fn(usize) -> &'a [u64]) -> f64 {
    let deg: Vec<f64> = (0..len)
        .map(|i| row(i).iter().map(|w| w.count_ones()).sum::<u32>() as f64)
        .collect();
    let base = d * d * m as f64;
    let mut s = 0.0;
    for i in 0..len {
        s += (deg[i] - 2.0 * d * deg[i] + base).abs();
        for k in i + 1..len {
            let codeg = and_count(row(i), row(k)) as f64;
            s += 2.0 * (codeg - d * deg[i] - d * deg[k] + base).abs();
        }
    }
    s
}

struct Candidate {
    dev: f64,
    density: f64,
    x: Vec<usize>,
    y: Vec<usize>,
}

/// Best subset of one side given each member's degree into a fixed subset
/// of size `other` on the opposite side: a top or bottom degree prefix of
/// size at least `min`. Returns `(deviation, density, members)`.
fn best_prefix(degrees: &[u32], other: usize, min: usize, d: f64) -> (f64, f64, Vec<usize>) {
    let len = degrees.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&p, &q| degrees[q].cmp(&degrees[p]).then(p.cmp(&q)));
    let mut prefix = vec![0u64; len + 1];
    for (k, &i) in order.iter().enumerate() {
        prefix[k + 1] = prefix[k] + degrees[i] as u64;
    }
    let total = prefix[len];
    let mut best = (-1.0, 0.0, 0, true);
    // Top-prefix averages fall and bottom-prefix averages rise with k, so
    // the extreme deviations sit at k = min or k = len.
    for k in [min, len] {
        let scale = (k * other) as f64;
        let top = prefix[k] as f64 / scale;
        let bottom = (total - prefix[len - k]) as f64 / scale;
        for (dens, is_top) in [(top, true), (bottom, false)] {
            let dev = (dens - d).abs();
            if dev > best.0 {
                best = (dev, dens, k, is_top);
            }
        }
    }
    let (dev, dens, k, is_top) = best;
    let mut chosen = if is_top {
        order[..k].to_vec()
    } else {
        order[len - k..].to_vec()
    };
    chosen.sort_unstable();
    (dev, dens, chosen)
}

fn exhaustive(adj: &BiAdjacency, d: f64, eps: f64) -> Option<Candidate> {
    // Enumerate subsets of the smaller side; rows of the other side become
    // small masks over it.
    let swap = adj.b < adj.a;
    let (s, t) = if swap { (adj.b, adj.a) } else { (adj.a, adj.b) };
    let rows: Vec<u32> = (0..t)
        .map(|k| {
            let row = if swap { adj.x_row(k) } else { adj.y_row(k) };
            row.first().copied().unwrap_or(0) as u32
        })
        .collect();
    let (min_s, min_t) = (min_witness_size(s, eps), min_witness_size(t, eps));
    // cols[i]: neighbours of s-side vertex i as a mask over the t side
    let mut cols = vec![0u32; s];
    for (k, row) in rows.iter().enumerate() {
        for (i, col) in cols.iter_mut().enumerate() {
            *col |= (row >> i & 1) << k;
        }
    }

    let mut best: Option<(f64, Candidate)> = None;
    // Gray-code walk over subsets of the s side, keeping each t vertex's
    // degree into the subset and a histogram of those degrees.
    let mut degrees = vec![0u32; t];
    let mut hist = [0u8; EXHAUSTIVE_LIMIT + 1];
    hist[0] = t as u8;
    let (mut size, mut total) = (0usize, 0u32);
    for step in 1u32..(1 << s) {
        let flip = step.trailing_zeros() as usize;
        let mask = step ^ (step >> 1);
        let added = mask >> flip & 1 == 1;
        let mut nb = cols[flip];
        while nb != 0 {
            let k = nb.trailing_zeros() as usize;
            nb &= nb - 1;
            hist[degrees[k] as usize] -= 1;
            if added {
                degrees[k] += 1;
            } else {
                degrees[k] -= 1;
            }
            hist[degrees[k] as usize] += 1;
        }
        let moved = cols[flip].count_ones();
        if added {
            size += 1;
            total += moved;
        } else {
            size -= 1;
            total -= moved;
        }
        if size < min_s {
            continue;
        }
        let (high, low) = (
            extreme_sum(&hist, size, min_t, true),
            extreme_sum(&hist, size, min_t, false),
        );
        // same candidates and tie rule as best_prefix
        let (mut dev, mut len) = (-1.0, 0);
        for (k, top, bottom) in [(min_t, high, low), (t, total, total)] {
            let scale = (k * size) as f64;
            for sum in [top, bottom] {
                let gap = (sum as f64 / scale - d).abs();
                if gap > dev {
                    (dev, len) = (gap, k);
                }
            }
        }
        if dev < eps - DEVIATION_TOL {
            continue;
        }
        let score = (size * len) as f64 * dev * dev;
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            let (dev, density, chosen) = best_prefix(&degrees, size, min_t, d);
            let subset: Vec<usize> = (0..s).filter(|i| mask >> i & 1 == 1).collect();
            let (x, y) = if swap {
                (chosen, subset)
            } else {
                (subset, chosen)
            };
            best = Some((score, Candidate { dev, density, x, y }));
        }
    }
    best.map(|(_, c)| c)
}

/// Sum of the `k` largest (or smallest) degrees given a histogram of
/// degrees `0..=max`.
fn extreme_sum(hist: &[u8], max: usize, k: usize, largest: bool) -> u32 {
    let (mut left, mut sum) = (k as u32, 0);
    let mut visit = |deg: usize| {
        let take = left.min(hist[deg] as u32);
        sum += take * deg as u32;
        left -= take;
        left == 0
    };
    if largest {
        for deg in (0..=max).rev() {
            if visit(deg) {
                break;
            }
        }
    } else {
        for deg in 0..=max {
            if visit(deg) {
                break;
            }
        }
    }
    sum
}

fn heuristic(adj: &BiAdjacency, d: f64, eps: f64) -> Option<Candidate> {
    let (a, b) = (adj.a, adj.b);
    let (min_x, min_y) = (min_witness_size(a, eps), min_witness_size(b, eps));
    let full_x = bitset(a, &(0..a).collect::<Vec<_>>());
    let full_y = bitset(b, &(0..b).collect::<Vec<_>>());
    let x_deg = adj.x_degrees_into(&full_y);
    let y_deg = adj.y_degrees_into(&full_x);

    let (mut x_seeds, y_from_x) = seeds(&x_deg, b, min_x, min_y, d, |v| adj.x_row(v));
    let (mut y_seeds, x_from_y) = seeds(&y_deg, a, min_y, min_x, d, |v| adj.y_row(v));
    x_seeds.extend(x_from_y);
    y_seeds.extend(y_from_x);

    let mut best: Option<Candidate> = None;
    let mut consider = |c: Candidate| {
        if best.as_ref().is_none_or(|b| c.dev > b.dev) {
            best = Some(c);
        }
    };
    for seed in x_seeds {
        consider(alternate(adj, d, min_x, min_y, Side::X(seed)));
    }
    for seed in y_seeds {
        consider(alternate(adj, d, min_x, min_y, Side::Y(seed)));
    }
    best
}

/// Seeds for one side from its degrees into the other side (of size
/// `other`): the top and bottom degree prefixes, plus the neighbourhoods and
/// non-neighbourhoods of its most deviant vertices, which seed the other
/// side. Returns `(same side, other side)`.
fn seeds<'a>(
    deg: &[u32],
    other: usize,
    min: usize,
    min_other: usize,
    d: f64,
    row: impl Fn(usize) -> &'a [u64],
) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let len = deg.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&p, &q| deg[q].cmp(&deg[p]).then(p.cmp(&q)));
    let same = vec![order[..min].to_vec(), order[len - min..].to_vec()];
    let mean = d * other as f64;
    order.sort_by(|&p, &q| {
        let dp = (deg[p] as f64 - mean).abs();
        let dq = (deg[q] as f64 - mean).abs();
        dq.total_cmp(&dp).then(p.cmp(&q))
    });
    order.truncate(NEIGHBOURHOOD_SEEDS);
    let mut across = Vec::new();
    for v in order {
        let r = row(v);
        let (inside, outside): (Vec<usize>, Vec<usize>) =
            (0..other).partition(|&k| r[k / 64] >> (k % 64) & 1 == 1);
        across.extend(
            [inside, outside]
                .into_iter()
                .filter(|s| s.len() >= min_other),
        );
    }
    (same, across)
}

enum Side {
    X(Vec<usize>),
    Y(Vec<usize>),
}

/// Alternately re-optimises one side against the other until the deviation
/// stops growing.
fn alternate(adj: &BiAdjacency, d: f64, min_x: usize, min_y: usize, start: Side) -> Candidate {
    let (a, b) = (adj.a, adj.b);
    let mut x = match start {
        Side::X(x) => x,
        Side::Y(y) => {
            let (_, _, x) = best_prefix(&adj.x_degrees_into(&bitset(b, &y)), y.len(), min_x, d);
            x
        }
    };
    let mut best = Candidate {
        dev: -1.0,
        density: 0.0,
        x: Vec::new(),
        y: Vec::new(),
    };
    for _ in 0..MAX_ALTERNATIONS {
        let (_, _, y) = best_prefix(&adj.y_degrees_into(&bitset(a, &x)), x.len(), min_y, d);
        let (dev, density, next_x) =
            best_prefix(&adj.x_degrees_into(&bitset(b, &y)), y.len(), min_x, d);
        if dev <= best.dev + DEVIATION_TOL {
            break;
        }
        best = Candidate {
            dev,
            density,
            x: next_x.clone(),
            y,
        };
        x = next_x;
    }
    best
}
