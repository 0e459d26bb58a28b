//! Block coefficients `A_j(λ)`: sums of `e(λm)/m` over the stretch of `m`
//! between consecutive hitting times, and the checks built on them.

use num_complex::Complex64;

use super::{hardy_littlewood_max_on, maximal_over};
use crate::error::{Error, Result};
use crate::lambda::LambdaSet;
use crate::selector::{hitting_times, DeterministicSkeleton, HittingTimes, SelectorPath};
use crate::signal::Signal;
use crate::spectrum::dirichlet;

#[derive(Debug, Clone, Copy)]
pub enum AjSource<'a> {
    /// Block boundaries are the hitting times `a_j` of a sampled path.
    Random(&'a HittingTimes),
    /// Block boundaries are the skeleton values `p_j`.
    Skeleton(&'a DeterministicSkeleton),
}

impl AjSource<'_> {
    fn boundary(&self, j: usize) -> u64 {
        match self {
            AjSource::Random(h) => h.get(j) as u64,
            AjSource::Skeleton(s) => s.p(j),
        }
    }

    fn levels(&self) -> usize {
        match self {
            AjSource::Random(h) => h.max_level(),
            AjSource::Skeleton(s) => s.j_max(),
        }
    }

    fn is_random(&self) -> bool {
        matches!(self, AjSource::Random(_))
    }
}

/// Which stretch of `m` makes up block `j`, given boundaries `b_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockConvention {
    /// `b_{j-1} < m <= b_j` (for `j = 1`, `1 <= m <= b_1`). These are exactly
    /// the `m` with `S_{m-1} + 1 = j` when `b` are hitting times.
    Regrouped,
    /// `b_{j-1} <= m <= b_j - 1`, skipping `m = 0`.
    AsPrinted,
}

impl BlockConvention {
    /// Inclusive `(lo, hi)`; empty when `lo > hi`.
    fn block(self, prev: u64, cur: u64, j: usize) -> (u64, u64) {
        match self {
            BlockConvention::Regrouped if j == 1 => (1, cur),
            BlockConvention::Regrouped => (prev + 1, cur),
            BlockConvention::AsPrinted => (prev.max(1), cur.saturating_sub(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AjCoefficients {
    pub lambda: f64,
    /// True when built from hitting times, false for the skeleton.
    pub random: bool,
    pub convention: BlockConvention,
    /// `coeffs[j]` for `1 <= j <= j_max`; slot 0 is zero.
    pub coeffs: Vec<Complex64>,
    /// Inclusive `m` range of each block, slot 0 unused.
    pub blocks: Vec<(u64, u64)>,
}

impl AjCoefficients {
    pub fn get(&self, j: usize) -> Complex64 {
        self.coeffs[j]
    }
    pub fn j_max(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// `e(λ p)` with `λ p` reduced mod 1 before rounding loses the fraction.
fn e_times(lambda: f64, p: u64) -> Complex64 {
    let pf = p as f64;
    let prod = lambda * pf;
    let err = lambda.mul_add(pf, -prod);
    crate::e((prod - prod.round()) + err)
}

fn block_sum(lambda: f64, lo: u64, hi: u64) -> Complex64 {
    (lo..=hi).map(|m| e_times(lambda, m) / m as f64).sum()
}

pub fn aj_coefficients(
    source: AjSource,
    lambda: f64,
    j_max: usize,
    convention: BlockConvention,
) -> Result<AjCoefficients> {
    if j_max > source.levels() {
        return Err(Error::param(
            "j_max",
            format!("{j_max} exceeds the {} available levels", source.levels()),
        ));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0)];
    let mut blocks = vec![(0, 0)];
    for j in 1..=j_max {
        let (lo, hi) = convention.block(source.boundary(j - 1), source.boundary(j), j);
        coeffs.push(block_sum(lambda, lo, hi));
        blocks.push((lo, hi));
    }
    Ok(AjCoefficients {
        lambda,
        random: source.is_random(),
        convention,
        coeffs,
        blocks,
    })
}

/// Largest pointwise gap between
/// `Σ_{m=1}^{M} e(λm)/m (f(x - S_{m-1} - 1) - f(x + S_{m-1} + 1))` and
/// `Σ_{j=1}^{S_M} A_j(λ) (f(x - j) - f(x + j))` with regrouped blocks.
///
/// The two agree exactly only when `M` closes a block, i.e. `X_M = 1`;
/// otherwise the unmatched coefficient mass is reported as an error.
pub fn aj_identity_check(path: &SelectorPath, lambda: f64, f: &Signal, m_max: usize) -> Result<f64> {
    if m_max == 0 || m_max > path.len() {
        return Err(Error::param("m_max", format!("{m_max} not in 1..={}", path.len())));
    }
    let ht = hitting_times(path);
    let levels = path.s(m_max as i64) as usize;
    if path.x(m_max as i64) == 0 {
        let last = if levels == 0 { 0 } else { ht.get(levels) };
        let tail_mass = (last + 1..=m_max).map(|m| 1.0 / m as f64).sum();
        return Err(Error::TruncationMismatch { m_max, tail_mass });
    }
    let a = aj_coefficients(AjSource::Random(&ht), lambda, levels, BlockConvention::Regrouped)?;
    let reach = levels as i64;
    let mut taps = Signal::zeros(-reach, 2 * levels + 1);
    for j in 1..=levels {
        taps.add_at(j as i64, a.get(j));
        taps.add_at(-(j as i64), -a.get(j));
    }
    let rhs = f.convolve(&taps);

    let mut worst = 0.0f64;
    for x in rhs.offset()..rhs.end() {
        let lhs: Complex64 = (1..=m_max as i64)
            .map(|m| {
                let s = path.s(m - 1) + 1;
                crate::e(lambda * m as f64) / m as f64 * (f.get(x - s) - f.get(x + s))
            })
            .sum();
        worst = worst.max((lhs - rhs.get(x)).norm());
    }
    Ok(worst)
}

/// Gap between `A_j(λ)` on skeleton blocks and `e(p_j λ) D_{r_j}(-λ) / p_{j-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonFit {
    pub lambda: f64,
    pub js: Vec<usize>,
    pub diffs: Vec<f64>,
    /// `diffs[i] · j^{1 + 1/(1-α)}`.
    pub scaled: Vec<f64>,
    /// Smallest `C` with `diff <= C j^{-1-1/(1-α)}` on every probed `j`.
    pub constant: f64,
    /// Indices skipped because `p_{j-1} = 0`.
    pub skipped: Vec<usize>,
}

/// Uses the [`BlockConvention::AsPrinted`] blocks `[p_{j-1}, p_j - 1]`, which
/// the Dirichlet form approximates term by term.
pub fn skeleton_approximation(
    skel: &DeterministicSkeleton,
    lambda: f64,
    j_lo: usize,
    j_hi: usize,
) -> Result<SkeletonFit> {
    if j_lo < 1 || j_hi < j_lo || j_hi > skel.j_max() {
        return Err(Error::param(
            "j_range",
            format!("{j_lo}..={j_hi} not within 1..={}", skel.j_max()),
        ));
    }
    let power = 1.0 + 1.0 / (1.0 - skel.alpha());
    let mut fit = SkeletonFit {
        lambda,
        js: Vec::new(),
        diffs: Vec::new(),
        scaled: Vec::new(),
        constant: 0.0,
        skipped: Vec::new(),
    };
    for j in j_lo..=j_hi {
        let prev = skel.p(j - 1);
        if prev == 0 {
            fit.skipped.push(j);
            continue;
        }
        let (lo, hi) = BlockConvention::AsPrinted.block(prev, skel.p(j), j);
        let exact = block_sum(lambda, lo, hi);
        let approx = e_times(lambda, skel.p(j)) * dirichlet(skel.r(j), -lambda) / prev as f64;
        let diff = (exact - approx).norm();
        let scaled = diff * (j as f64).powf(power);
        fit.js.push(j);
        fit.diffs.push(diff);
        fit.scaled.push(scaled);
        fit.constant = fit.constant.max(scaled);
    }
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma43Report {
    pub epsilon: f64,
    /// Smallest `K` with `LHS(x) <= K log(1/ε) Mf(x)` at every position.
    pub constant: f64,
    pub log_factor: f64,
    /// Largest `j` that entered any sum.
    pub j_max: usize,
    pub lambdas: usize,
    pub lhs: Signal,
    pub maximal: Signal,
}

/// Count of `j` with `1 < j < |λ|^{-α/(1-α)}`, as the largest such `j`.
fn j_limit(lambda: f64, gamma: f64) -> usize {
    let bound = lambda.abs().powf(-gamma);
    let c = bound.ceil();
    (c as usize).saturating_sub(1).max(1)
}

/// Sup over `ε < |λ| < 1/2` (a grid of `grid_points` midpoints on each side)
/// of `|Σ_{1<j<|λ|^{-α/(1-α)}} e(λ p_j)/j (f(x+j) - f(x-j))|`, compared with
/// `log(1/ε) Mf(x)`.
pub fn lemma43_bound_check(
    skel: &DeterministicSkeleton,
    epsilon: f64,
    f: &Signal,
    grid_points: usize,
) -> Result<Lemma43Report> {
    if !(epsilon > 0.0 && epsilon <= 0.25) {
        return Err(Error::param("epsilon", format!("{epsilon} not in (0, 1/4]")));
    }
    if grid_points == 0 {
        return Err(Error::param("grid_points", "must be positive"));
    }
    let gamma = skel.alpha() / (1.0 - skel.alpha());
    let j_max = j_limit(epsilon, gamma);
    if j_max > skel.j_max() {
        return Err(Error::param(
            "skeleton",
            format!("needs p_j up to j = {j_max}, have {}", skel.j_max()),
        ));
    }
    let mut pts = Vec::with_capacity(2 * grid_points);
    for i in 0..grid_points {
        let l = epsilon + (0.5 - epsilon) * (i as f64 + 0.5) / grid_points as f64;
        pts.push(l);
        pts.push(-l);
    }
    let lambda = LambdaSet::new(pts)?;
    let reach = j_max as i64;
    let kernel = |l: f64| {
        let mut k = Signal::zeros(-reach, 2 * j_max + 1);
        for j in 2..=j_limit(l, gamma) {
            let c = e_times(l, skel.p(j)) / j as f64;
            k.add_at(-(j as i64), c);
            k.add_at(j as i64, -c);
        }
        k
    };
    let lhs = maximal_over(&lambda, |l| f.convolve(&kernel(l)))?.values;
    let maximal = hardy_littlewood_max_on(f, lhs.offset(), lhs.len());
    let log_factor = (1.0 / epsilon).ln();
    let constant = lhs
        .values()
        .iter()
        .zip(maximal.values())
        .filter(|(_, m)| m.re > 0.0)
        .map(|(v, m)| v.re / (log_factor * m.re))
        .fold(0.0, f64::max);
    Ok(Lemma43Report {
        epsilon,
        constant,
        log_factor,
        j_max,
        lambdas: lambda.len(),
        lhs,
        maximal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::selector::{sample_path, skeleton, SelectorParams};
    use rand::Rng;

    fn random_signal(seed: u64, offset: i64, len: usize) -> Signal {
        let mut r = rng::stream(seed, 4);
        Signal::new(
            offset,
            (0..len)
                .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    #[test]
    fn all_on_path_has_single_term_blocks() {
        let p = SelectorPath::from_selectors(0.5, &[1; 12]).unwrap();
        let h = hitting_times(&p);
        for conv in [BlockConvention::Regrouped] {
            let a = aj_coefficients(AjSource::Random(&h), 0.3, 12, conv).unwrap();
            for j in 1..=12 {
                let want = crate::e(0.3 * j as f64) / j as f64;
                assert!((a.get(j) - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn blocks_partition_positive_integers() {
        let p = sample_path(SelectorParams::new(0.5, 2000, 3).unwrap());
        let h = hitting_times(&p);
        let a = aj_coefficients(AjSource::Random(&h), 0.1, h.max_level(), BlockConvention::Regrouped)
            .unwrap();
        let mut next = 1;
        for &(lo, hi) in &a.blocks[1..] {
            assert_eq!(lo, next);
            assert!(hi >= lo);
            next = hi + 1;
        }
        for j in 1..=h.max_level() {
            let (lo, hi) = a.blocks[j];
            for m in lo..=hi {
                assert_eq!(p.s(m as i64 - 1) + 1, j as i64);
            }
        }
    }

    #[test]
    fn identity_is_exact_on_closed_blocks() {
        let p = sample_path(SelectorParams::new(0.5, 600, 21).unwrap());
        let h = hitting_times(&p);
        let f = random_signal(1, -8, 16);
        let m = h.get(h.max_level());
        assert!(aj_identity_check(&p, 0.37, &f, m).unwrap() < 1e-12);
        let open = (1..=600).rev().find(|&m| p.x(m as i64) == 0).unwrap();
        assert!(matches!(
            aj_identity_check(&p, 0.37, &f, open),
            Err(Error::TruncationMismatch { .. })
        ));
    }

    #[test]
    fn skeleton_blocks_as_printed() {
        let s = skeleton(2.0 / 3.0, 10).unwrap();
        let a = aj_coefficients(AjSource::Skeleton(&s), 0.0, 10, BlockConvention::AsPrinted).unwrap();
        // p = 0,0,0,1,2,4,8,12,18,27,37
        assert_eq!(a.blocks[4], (1, 1));
        assert_eq!(a.blocks[6], (4, 7));
        let want: f64 = (4..=7).map(|m| 1.0 / m as f64).sum();
        assert!((a.get(6).re - want).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_form_error_decays() {
        let s = skeleton(2.0 / 3.0, 200).unwrap();
        let fit = skeleton_approximation(&s, 0.3, 2, 200).unwrap();
        assert_eq!(fit.skipped, vec![2, 3]);
        assert!(fit.constant.is_finite() && fit.constant > 0.0);
        // The gap itself shrinks with j.
        let early = fit.diffs[..10].iter().cloned().fold(0.0, f64::max);
        let late = fit.diffs[fit.diffs.len() - 10..].iter().cloned().fold(0.0, f64::max);
        assert!(late < early);
    }

    #[test]
    fn lemma43_delta_and_crude_bounds() {
        let s = skeleton(2.0 / 3.0, 300).unwrap();
        let eps = 1.0 / 16.0;
        let rep = lemma43_bound_check(&s, eps, &Signal::delta(0), 16).unwrap();
        for (x, v) in rep.lhs.iter() {
            if x != 0 {
                assert!(v.re <= 2.0 / x.abs() as f64 + 1e-15);
                assert!(v.re <= 2.0 * (x.abs() + 1) as f64 / x.abs() as f64 * rep.maximal.get(x).re);
            }
        }
        let f = random_signal(2, -20, 40);
        let rep = lemma43_bound_check(&s, eps, &f, 16).unwrap();
        let harmonic: f64 = (1..=rep.j_max).map(|j| 1.0 / j as f64).sum();
        assert!(rep.lhs.norm_inf() <= 2.0 * f.norm_inf() * harmonic);
        assert!(rep.constant > 0.0 && rep.constant.is_finite());
        assert!(lemma43_bound_check(&s, 0.3, &f, 4).is_err());
        assert!(lemma43_bound_check(&skeleton(2.0 / 3.0, 50).unwrap(), 1e-3, &f, 4).is_err());
    }

    #[test]
    fn reduced_phase_is_accurate() {
        let p = 2_485_513_600u64;
        let l = 0.1234567;
        let exact = crate::e((l * 2_485_513_600.0f64) % 1.0);
        assert!((e_times(l, p) - exact).norm() < 1e-6);
        assert!((e_times(0.5, 3) + 1.0).norm() < 1e-15);
    }
}
