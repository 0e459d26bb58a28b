//! Finite modulation sets and their covering numbers.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Sorted, duplicate-free set of frequencies in `[-1/2, 1/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSet {
    points: Vec<f64>,
    origin_gap: f64,
}

impl LambdaSet {
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if let Some(bad) = points
            .iter()
            .find(|p| !p.is_finite() || p.abs() > 0.5)
        {
            return Err(Error::param("lambda", format!("{bad} outside [-1/2, 1/2]")));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let origin_gap = points.iter().map(|p| p.abs()).fold(0.5, f64::min);
        Ok(Self { points, origin_gap })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest `ε` with `Λ ∩ (-ε, ε) = ∅` (capped at 1/2).
    pub fn origin_gap(&self) -> f64 {
        self.origin_gap
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        for p in &self.points {
            writeln!(out, "{p}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut pts = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            pts.push(t.parse::<f64>().map_err(|e| Error::Parse {
                line: i + 1,
                reason: e.to_string(),
            })?);
        }
        Self::new(pts)
    }
}

/// Fewest intervals of length `< δ` needed to cover `Λ`.
///
/// Greedy sweep: open a cover at the leftmost uncovered point `p`; it takes
/// every later point `q` with `q - p < δ`. For points on a line this is optimal.
pub fn covering_number(lambda: &LambdaSet, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param("delta", format!("{delta} not in (0, 1]")));
    }
    let mut count = 0;
    let mut start = f64::NEG_INFINITY;
    for &p in &lambda.points {
        if !(p - start < delta) {
            count += 1;
            start = p;
        }
    }
    Ok(count)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverReport {
    /// Probed scales, ascending.
    pub deltas: Vec<f64>,
    pub counts: Vec<usize>,
    /// Least-squares slope of `log N(δ)` against `log(1/δ)`, clamped at 0.
    pub fitted_dimension: f64,
    /// `(d, max_δ N(δ) δ^d)` over the probed scales.
    pub c_d_at: Vec<(f64, f64)>,
}

impl CoverReport {
    pub fn c_d(&self, d: f64) -> f64 {
        c_d_over(&self.deltas, &self.counts, d)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::from("delta,count\n");
        for (d, c) in self.deltas.iter().zip(&self.counts) {
            s.push_str(&format!("{d},{c}\n"));
        }
        s
    }
}

fn c_d_over(deltas: &[f64], counts: &[usize], d: f64) -> f64 {
    deltas
        .iter()
        .zip(counts)
        .map(|(&delta, &n)| n as f64 * delta.powf(d))
        .fold(0.0, f64::max)
}

/// Covering counts over `scales` with a fitted growth exponent. This is a
/// finite-range fit, not the Minkowski dimension itself.
pub fn dimension_profile(
    lambda: &LambdaSet,
    scales: &[f64],
    candidates: &[f64],
) -> Result<CoverReport> {
    if scales.len() < 3 {
        return Err(Error::param("scales", "need at least 3 scales"));
    }
    let mut deltas = scales.to_vec();
    deltas.sort_by(f64::total_cmp);
    let counts = deltas
        .iter()
        .map(|&d| covering_number(lambda, d))
        .collect::<Result<Vec<_>>>()?;
    let degenerate = counts.windows(2).all(|w| w[0] == w[1]);
    let fitted_dimension = if degenerate {
        0.0
    } else {
        let (xs, ys): (Vec<f64>, Vec<f64>) = deltas
            .iter()
            .zip(&counts)
            .filter(|(_, &n)| n > 0)
            .map(|(&d, &n)| ((1.0 / d).ln(), (n as f64).ln()))
            .unzip();
        crate::ls_slope(&xs, &ys).unwrap_or(0.0).max(0.0)
    };
    let c_d_at = candidates
        .iter()
        .map(|&d| (d, c_d_over(&deltas, &counts, d)))
        .collect();
    Ok(CoverReport {
        deltas,
        counts,
        fitted_dimension,
        c_d_at,
    })
}

/// `{offset + ratio^j : 1 <= j <= count}`; dimension 0.
pub fn make_lacunary(count: usize, ratio: f64, offset: f64) -> Result<LambdaSet> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::param("ratio", format!("{ratio} not in (0, 1)")));
    }
    if count == 0 {
        return Err(Error::param("count", "must be positive"));
    }
    let pts = (1..=count as i32).map(|j| offset + ratio.powi(j)).collect();
    LambdaSet::new(pts)
}

/// Endpoints of the kept intervals after `level` middle-cut steps of
/// `base`, keeping the outer `ratio` fraction on each side. Dimension
/// `log 2 / log(1/ratio)`.
pub fn make_cantor(level: u32, ratio: f64, base: (f64, f64)) -> Result<LambdaSet> {
    if !(ratio > 0.0 && ratio < 0.5) {
        return Err(Error::param("ratio", format!("{ratio} not in (0, 1/2)")));
    }
    if level > 24 {
        return Err(Error::param("level", "at most 24"));
    }
    let (a, b) = base;
    if !(a < b) {
        return Err(Error::param("base_interval", "need a < b"));
    }
    let mut intervals = vec![(a, b)];
    for _ in 0..level {
        let mut next = Vec::with_capacity(2 * intervals.len());
        for &(x, y) in &intervals {
            let len = ratio * (y - x);
            next.push((x, x + len));
            next.push((y - len, y));
        }
        intervals = next;
    }
    let pts = intervals.iter().flat_map(|&(x, y)| [x, y]).collect();
    LambdaSet::new(pts)
}

/// `count` equispaced points filling `[origin_gap, 1/2]`; dimension 1.
pub fn make_arithmetic_grid(count: usize, origin_gap: f64) -> Result<LambdaSet> {
    if count == 0 {
        return Err(Error::param("count", "must be positive"));
    }
    if !(0.0..=0.5).contains(&origin_gap) {
        return Err(Error::param("origin_gap", format!("{origin_gap} not in [0, 1/2]")));
    }
    if count == 1 {
        return LambdaSet::new(vec![origin_gap]);
    }
    let last = (count - 1) as f64;
    LambdaSet::new(
        (0..count)
            .map(|i| origin_gap + (0.5 - origin_gap) * (i as f64 / last))
            .map(|x| x.min(0.5))
            .collect(),
    )
}
