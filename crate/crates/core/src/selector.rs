//! Random selector sequences and the sequences derived from them.
//!
//! A path holds independent selectors `X_m ~ Bernoulli(m^-α)` for
//! `1 <= m <= N`, their partial sums `S_m`, the expected partial sums
//! `W_m = Σ_{n<=m} n^-α` and the centred selectors `Y_m = X_m - σ_m`.
//! Negative indices follow the odd extension `S_{-m} = -S_m`,
//! `W_{-m} = -W_m`, while `X` and `Y` are read at `|m|`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectorParams {
    alpha: f64,
    length: usize,
    seed: u64,
    stream: u64,
}

impl SelectorParams {
    pub fn new(alpha: f64, length: usize, seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param("alpha", format!("{alpha} not in (0, 1)")));
        }
        if length == 0 {
            return Err(Error::param("length", "must be at least 1"));
        }
        Ok(Self {
            alpha,
            length,
            seed,
            stream: 0,
        })
    }

    /// Same parameters, drawing from random stream `stream` of the seed.
    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn length(&self) -> usize {
        self.length
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn stream(&self) -> u64 {
        self.stream
    }
}

/// Selection probability `σ_m = m^-α`.
#[inline]
pub fn sigma(alpha: f64, m: usize) -> f64 {
    (m as f64).powf(-alpha)
}

/// Running Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `W_1, …, W_n` with compensated summation; index 0 holds `W_0 = 0`.
pub fn expected_sums(alpha: f64, n: usize) -> Vec<f64> {
    let mut acc = CompensatedSum::default();
    let mut w = Vec::with_capacity(n + 1);
    w.push(0.0);
    for m in 1..=n {
        acc.add(sigma(alpha, m));
        w.push(acc.value());
    }
    w
}

/// One realization of the selector process. Vectors are 1-based; slot 0
/// holds the empty-sum value.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorPath {
    params: SelectorParams,
    sigma: Vec<f64>,
    x: Vec<u8>,
    s: Vec<i64>,
    w: Vec<f64>,
}

/// Draws `X_1..X_N` from the stream selected by `params`.
pub fn sample_path(params: SelectorParams) -> SelectorPath {
    let mut rng = rng::stream(params.seed, params.stream);
    let n = params.length;
    let mut x = Vec::with_capacity(n + 1);
    x.push(0);
    for m in 1..=n {
        let u: f64 = rng.gen();
        x.push(u8::from(u < sigma(params.alpha, m)));
    }
    SelectorPath::assemble(params, None, x)
}

/// `count` independent paths: path `i` uses stream `i` of `params.seed`.
pub fn sample_ensemble(params: SelectorParams, count: usize) -> Vec<SelectorPath> {
    use rayon::prelude::*;
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_path(params.with_stream(i)))
        .collect()
}

impl SelectorPath {
    fn assemble(params: SelectorParams, sigma_override: Option<Vec<f64>>, x: Vec<u8>) -> Self {
        let n = x.len() - 1;
        let sigma = match sigma_override {
            Some(s) => s,
            None => std::iter::once(0.0)
                .chain((1..=n).map(|m| sigma(params.alpha, m)))
                .collect(),
        };
        let mut s = Vec::with_capacity(n + 1);
        s.push(0i64);
        for m in 1..=n {
            s.push(s[m - 1] + i64::from(x[m]));
        }
        let mut acc = CompensatedSum::default();
        let mut w = Vec::with_capacity(n + 1);
        w.push(0.0);
        for &sg in &sigma[1..] {
            acc.add(sg);
            w.push(acc.value());
        }
        Self {
            params,
            sigma,
            x,
            s,
            w,
        }
    }

    /// Deterministic path with the given selectors (`xs[0]` is `X_1`) and the
    /// usual probabilities `m^-α`.
    pub fn from_selectors(alpha: f64, xs: &[u8]) -> Result<Self> {
        let params = SelectorParams::new(alpha, xs.len(), 0)?;
        if xs.iter().any(|&v| v > 1) {
            return Err(Error::param("x", "selectors must be 0 or 1"));
        }
        let x = std::iter::once(0).chain(xs.iter().copied()).collect();
        Ok(Self::assemble(params, None, x))
    }

    /// Test double with injected probabilities; `W` is built from `sigmas`,
    /// so `x == sigmas` gives `Y ≡ 0`.
    pub fn with_probabilities(alpha: f64, xs: &[u8], sigmas: &[f64]) -> Result<Self> {
        if xs.len() != sigmas.len() {
            return Err(Error::param("sigma", "length differs from selectors"));
        }
        if sigmas.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::param("sigma", "probabilities must lie in [0, 1]"));
        }
        let params = SelectorParams::new(alpha, xs.len(), 0)?;
        let x = std::iter::once(0).chain(xs.iter().copied()).collect();
        let sg = std::iter::once(0.0).chain(sigmas.iter().copied()).collect();
        Ok(Self::assemble(params, Some(sg), x))
    }

    pub fn params(&self) -> &SelectorParams {
        &self.params
    }
    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }
    pub fn len(&self) -> usize {
        self.x.len() - 1
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn idx(&self, m: i64) -> usize {
        let k = m.unsigned_abs() as usize;
        assert!(k <= self.len(), "index {m} outside path of length {}", self.len());
        k
    }

    /// `X_{|m|}`; zero at `m = 0`.
    #[inline]
    pub fn x(&self, m: i64) -> u8 {
        self.x[self.idx(m)]
    }
    /// `σ_{|m|}`.
    #[inline]
    pub fn sigma(&self, m: i64) -> f64 {
        self.sigma[self.idx(m)]
    }
    /// `S_m`, odd in `m`.
    #[inline]
    pub fn s(&self, m: i64) -> i64 {
        m.signum() * self.s[self.idx(m)]
    }
    /// `W_m`, odd in `m`.
    #[inline]
    pub fn w(&self, m: i64) -> f64 {
        m.signum() as f64 * self.w[self.idx(m)]
    }
    /// `Y_{|m|} = X_{|m|} - σ_{|m|}`.
    #[inline]
    pub fn y(&self, m: i64) -> f64 {
        let k = self.idx(m);
        f64::from(self.x[k]) - self.sigma[k]
    }

    /// Selectors `X_1..X_N`.
    pub fn selectors(&self) -> &[u8] {
        &self.x[1..]
    }
    /// Partial sums `S_0..S_N`.
    pub fn partial_sums(&self) -> &[i64] {
        &self.s
    }
    /// Expected sums `W_0..W_N`.
    pub fn expected_sums(&self) -> &[f64] {
        &self.w
    }
    pub fn total(&self) -> i64 {
        self.s[self.len()]
    }

    /// Text table with one row `m,x,s,w` per index.
    pub fn write_table<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::new();
        writeln!(buf, "# selector path").unwrap();
        writeln!(buf, "# alpha={}", self.params.alpha).unwrap();
        writeln!(buf, "# seed={}", self.params.seed).unwrap();
        writeln!(buf, "# stream={}", self.params.stream).unwrap();
        writeln!(buf, "m,x,s,w").unwrap();
        for m in 1..=self.len() {
            writeln!(buf, "{},{},{},{}", m, self.x[m], self.s[m], self.w[m]).unwrap();
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    /// Reads a table written by [`write_table`](Self::write_table). The `s`
    /// and `w` columns are checked against values recomputed from `x`.
    pub fn read_table<R: BufRead>(input: R) -> Result<Self> {
        let mut alpha = None;
        let mut seed = 0;
        let mut stream = 0;
        let mut rows: Vec<(u8, i64, f64)> = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            let lineno = i + 1;
            let perr = |reason: String| Error::Parse {
                line: lineno,
                reason,
            };
            if line.is_empty() || line == "m,x,s,w" {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.trim().split_once('=') {
                    let v = v.trim();
                    match k.trim() {
                        "alpha" => alpha = Some(v.parse::<f64>().map_err(|e| perr(e.to_string()))?),
                        "seed" => seed = v.parse().map_err(|e: std::num::ParseIntError| perr(e.to_string()))?,
                        "stream" => stream = v.parse().map_err(|e: std::num::ParseIntError| perr(e.to_string()))?,
                        _ => {}
                    }
                }
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(perr(format!("expected 4 columns, found {}", cols.len())));
            }
            let m: usize = cols[0].parse().map_err(|e: std::num::ParseIntError| perr(e.to_string()))?;
            if m != rows.len() + 1 {
                return Err(perr(format!("expected index {}, found {m}", rows.len() + 1)));
            }
            let x: u8 = cols[1].parse().map_err(|e: std::num::ParseIntError| perr(e.to_string()))?;
            let s: i64 = cols[2].parse().map_err(|e: std::num::ParseIntError| perr(e.to_string()))?;
            let w: f64 = cols[3].parse().map_err(|e: std::num::ParseFloatError| perr(e.to_string()))?;
            rows.push((x, s, w));
        }
        let alpha = alpha.ok_or_else(|| Error::Parse {
            line: 0,
            reason: "missing `# alpha=` header".into(),
        })?;
        let xs: Vec<u8> = rows.iter().map(|r| r.0).collect();
        let mut path = Self::from_selectors(alpha, &xs)?;
        path.params = SelectorParams::new(alpha, xs.len(), seed)?.with_stream(stream);
        for (i, &(_, s, w)) in rows.iter().enumerate() {
            let m = i + 1;
            if path.s[m] != s {
                return Err(Error::Parse {
                    line: m,
                    reason: format!("s column {s} disagrees with recomputed {}", path.s[m]),
                });
            }
            if (path.w[m] - w).abs() > 1e-9 * w.abs().max(1.0) {
                return Err(Error::Parse {
                    line: m,
                    reason: format!("w column {w} disagrees with recomputed {}", path.w[m]),
                });
            }
        }
        Ok(path)
    }
}

/// Which value was assigned to `a_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum A0Convention {
    /// `a_1 = 1`, so `a_0 = 0` and the block `(a_0, a_1]` is `{1}`.
    ZeroWhenFirstHit,
    /// `a_1 > 1` (only possible for injected test doubles), `a_0 = 1`.
    OneWhenLateHit,
}

/// First hitting times `a_j = min{m >= 1 : S_m = j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingTimes {
    a: Vec<usize>,
    a0_convention: A0Convention,
}

impl HittingTimes {
    /// `a_j` for `0 <= j <= max_level()`.
    pub fn get(&self, j: usize) -> usize {
        self.a[j]
    }
    pub fn as_slice(&self) -> &[usize] {
        &self.a
    }
    pub fn max_level(&self) -> usize {
        self.a.len() - 1
    }
    pub fn a0_convention(&self) -> A0Convention {
        self.a0_convention
    }
}

pub fn hitting_times(path: &SelectorPath) -> HittingTimes {
    let mut a = vec![0usize];
    for m in 1..=path.len() {
        if path.x[m] == 1 {
            a.push(m);
        }
    }
    let a0_convention = if a.len() > 1 && a[1] > 1 {
        a[0] = 1;
        A0Convention::OneWhenLateHit
    } else {
        A0Convention::ZeroWhenFirstHit
    };
    HittingTimes { a, a0_convention }
}

/// Deterministic approximation `p_j = ⌊C_α j^{1/(1-α)}⌋` of the hitting times.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicSkeleton {
    alpha: f64,
    c_alpha: f64,
    p: Vec<u64>,
    r: Vec<u64>,
    threshold: usize,
}

impl DeterministicSkeleton {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn c_alpha(&self) -> f64 {
        self.c_alpha
    }
    /// `p_j` for `0 <= j <= j_max`, with `p_0 = 0`.
    pub fn p(&self, j: usize) -> u64 {
        self.p[j]
    }
    /// `r_j = p_j - p_{j-1}` for `1 <= j <= j_max`; slot 0 is unused.
    pub fn r(&self, j: usize) -> u64 {
        self.r[j]
    }
    pub fn j_max(&self) -> usize {
        self.p.len() - 1
    }
    /// Smallest `j_0` with `r_j >= 1` for every `j_0 <= j <= j_max`.
    pub fn threshold(&self) -> usize {
        self.threshold
    }
}

/// Exponent `1/(1-α)` as an integer `d` when `α = 1 - 1/d`.
fn integral_exponent(alpha: f64) -> Option<u32> {
    let e = 1.0 / (1.0 - alpha);
    let d = e.round();
    ((e - d).abs() < 1e-9 && (1.0..=64.0).contains(&d)).then_some(d as u32)
}

pub fn skeleton(alpha: f64, j_max: usize) -> Result<DeterministicSkeleton> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("{alpha} not in (0, 1)")));
    }
    if j_max == 0 {
        return Err(Error::param("j_max", "must be at least 1"));
    }
    let exponent = 1.0 / (1.0 - alpha);
    let c_alpha = (1.0 - alpha).powf(exponent);
    let mut p = Vec::with_capacity(j_max + 1);
    p.push(0u64);
    match integral_exponent(alpha) {
        // α = 1 - 1/d: C_α = d^{-d}, so p_j = ⌊j^d / d^d⌋ exactly.
        Some(d) => {
            let denom = u128::from(d).checked_pow(d).ok_or_else(|| Error::Overflow {
                what: format!("{d}^{d}"),
            })?;
            for j in 1..=j_max {
                let num = (j as u128).checked_pow(d).ok_or_else(|| Error::Overflow {
                    what: format!("p_{j} = floor({j}^{d}/{d}^{d})"),
                })?;
                let v = u64::try_from(num / denom).map_err(|_| Error::Overflow {
                    what: format!("p_{j}"),
                })?;
                p.push(v);
            }
        }
        None => {
            for j in 1..=j_max {
                let v = c_alpha * (j as f64).powf(exponent);
                if !v.is_finite() || v >= u64::MAX as f64 {
                    return Err(Error::Overflow {
                        what: format!("p_{j}"),
                    });
                }
                // Absorb last-ulp error when the product lands on an integer.
                let nearest = v.round();
                let fl = if (v - nearest).abs() <= 4.0 * f64::EPSILON * v.max(1.0) {
                    nearest
                } else {
                    v.floor()
                };
                p.push(fl as u64);
            }
        }
    }
    let mut r = vec![0u64; j_max + 1];
    for j in 1..=j_max {
        r[j] = p[j] - p[j - 1];
    }
    let mut threshold = j_max + 1;
    for j in (1..=j_max).rev() {
        if r[j] >= 1 {
            threshold = j;
        } else {
            break;
        }
    }
    Ok(DeterministicSkeleton {
        alpha,
        c_alpha,
        p,
        r,
        threshold,
    })
}

/// `max_m |S_m - W_m| m^{-(ε + (1-α)/2)}` for each path of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub epsilon: f64,
    pub exponent: f64,
    pub statistics: Vec<f64>,
}

impl ConcentrationReport {
    pub fn fraction_exceeding(&self, threshold: f64) -> f64 {
        if self.statistics.is_empty() {
            return 0.0;
        }
        let n = self.statistics.iter().filter(|&&s| s > threshold).count();
        n as f64 / self.statistics.len() as f64
    }

    /// Empirical quantile by nearest rank, `q` in `[0, 1]`.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut v = self.statistics.clone();
        v.sort_by(f64::total_cmp);
        if v.is_empty() {
            return f64::NAN;
        }
        let idx = ((q.clamp(0.0, 1.0) * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
        v[idx]
    }
}

pub fn concentration_statistic(path: &SelectorPath, epsilon: f64) -> f64 {
    let exponent = epsilon + (1.0 - path.alpha()) / 2.0;
    (1..=path.len())
        .map(|m| (path.s[m] as f64 - path.w[m]).abs() * (m as f64).powf(-exponent))
        .fold(0.0, f64::max)
}

pub fn concentration_report(paths: &[SelectorPath], epsilon: f64) -> Result<ConcentrationReport> {
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon", "must be positive"));
    }
    if let Some(first) = paths.first() {
        if paths
            .iter()
            .any(|p| p.alpha() != first.alpha() || p.len() != first.len())
        {
            return Err(Error::param("paths", "alpha and length must agree across the ensemble"));
        }
    }
    use rayon::prelude::*;
    let statistics = paths
        .par_iter()
        .map(|p| concentration_statistic(p, epsilon))
        .collect();
    let exponent = epsilon + paths.first().map_or(0.0, |p| (1.0 - p.alpha()) / 2.0);
    Ok(ConcentrationReport {
        epsilon,
        exponent,
        statistics,
    })
}
