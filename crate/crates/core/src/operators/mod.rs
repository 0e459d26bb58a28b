//! Modulated singular operators on finite signals.
//!
//! Every operator here is, for a fixed modulation `λ`, a convolution with a
//! finitely supported kernel. [`ModulatedKernelSpec::taps`] builds that kernel
//! and [`eval_single_lambda`] applies it; maximal operators take a pointwise
//! maximum over a finite [`LambdaSet`].
//!
//! Two families are covered. The t-family sums over `0 < |m| <= M` with shift
//! `x - m`; the c-family sums over `0 < m <= M` with the antisymmetric pair of
//! shifts `f(x - s) - f(x + s)`, where `s` is `S_m` or `S_{m-1} + 1`.

pub mod aj;
pub mod blocks;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lambda::LambdaSet;
use crate::selector::SelectorPath;
use crate::signal::Signal;

pub use aj::{
    aj_coefficients, aj_identity_check, lemma43_bound_check, skeleton_approximation, AjCoefficients,
    AjSource, BlockConvention, Lemma43Report, SkeletonFit,
};
pub use blocks::{block_p_k, block_q_k};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `e(λm)/m`.
    Carleson,
    /// `c_α e(λm)/m` with `c_α = 1 - α`.
    TermR0,
    /// `X_{|m|} e(λm) / S_m`.
    TFull,
    /// `sgn(m) (σ/W - c_α/|m|) e(λm)`.
    TermR1,
    /// `sgn(m) Y/W e(λm)`.
    TermR2,
    /// `sgn(m) X (1/S - 1/W) e(λm)`.
    TermR3,
    /// `X_m e(λm) / S_m` at shift `S_m`.
    CFull,
    /// `X_m (1/S_m - 1/W_m) e(λm)` at shift `S_m`.
    TermC1,
    /// `(σ_m/W_m - c_α/m) e(λm)` at shift `S_{m-1} + 1`.
    TermC2,
    /// `Y_m/W_m e(λm)` at shift `S_{m-1} + 1`.
    TermC3,
    /// `c_α/m e(λm)` at shift `S_{m-1} + 1`.
    TermC4,
}

impl KernelKind {
    pub const ALL: [KernelKind; 11] = [
        KernelKind::Carleson,
        KernelKind::TermR0,
        KernelKind::TFull,
        KernelKind::TermR1,
        KernelKind::TermR2,
        KernelKind::TermR3,
        KernelKind::CFull,
        KernelKind::TermC1,
        KernelKind::TermC2,
        KernelKind::TermC3,
        KernelKind::TermC4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Carleson => "carleson",
            KernelKind::TermR0 => "term_R0",
            KernelKind::TFull => "t_full",
            KernelKind::TermR1 => "term_R1",
            KernelKind::TermR2 => "term_R2",
            KernelKind::TermR3 => "term_R3",
            KernelKind::CFull => "c_full",
            KernelKind::TermC1 => "term_C1",
            KernelKind::TermC2 => "term_C2",
            KernelKind::TermC3 => "term_C3",
            KernelKind::TermC4 => "term_C4",
        }
    }

    pub fn is_c_family(self) -> bool {
        matches!(
            self,
            KernelKind::CFull
                | KernelKind::TermC1
                | KernelKind::TermC2
                | KernelKind::TermC3
                | KernelKind::TermC4
        )
    }

    pub fn needs_path(self) -> bool {
        !matches!(self, KernelKind::Carleson | KernelKind::TermR0)
    }
}

/// A kernel of the given kind truncated to `|m| <= truncation`, optionally
/// restricted to the dyadic block `2^k <= |m| < 2^{k+1}`.
#[derive(Debug, Clone, Copy)]
pub struct ModulatedKernelSpec<'a> {
    kind: KernelKind,
    alpha: f64,
    path: Option<&'a SelectorPath>,
    block: Option<u32>,
    truncation: usize,
}

impl<'a> ModulatedKernelSpec<'a> {
    /// Kernel that needs no selector path.
    pub fn deterministic(kind: KernelKind, alpha: f64, truncation: usize) -> Result<Self> {
        if kind.needs_path() {
            return Err(Error::MissingPath { kind: kind.name() });
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param("alpha", format!("{alpha} not in (0, 1)")));
        }
        Self::checked(kind, alpha, None, truncation)
    }

    pub fn on_path(kind: KernelKind, path: &'a SelectorPath, truncation: usize) -> Result<Self> {
        if truncation > path.len() {
            return Err(Error::param(
                "truncation",
                format!("{truncation} exceeds path length {}", path.len()),
            ));
        }
        Self::checked(kind, path.alpha(), Some(path), truncation)
    }

    fn checked(
        kind: KernelKind,
        alpha: f64,
        path: Option<&'a SelectorPath>,
        truncation: usize,
    ) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::param("truncation", "must be at least 1"));
        }
        Ok(Self {
            kind,
            alpha,
            path,
            block: None,
            truncation,
        })
    }

    /// Restricts to `2^k <= |m| < 2^{k+1}`; the block must fit under the
    /// truncation.
    pub fn with_block(mut self, k: u32) -> Result<Self> {
        let needed = (1usize << (k + 1)) - 1;
        if k >= 62 || needed > self.truncation {
            return Err(Error::BlockOutOfRange {
                k,
                needed,
                available: self.truncation,
            });
        }
        self.block = Some(k);
        Ok(self)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn path(&self) -> Option<&'a SelectorPath> {
        self.path
    }
    pub fn block(&self) -> Option<u32> {
        self.block
    }
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn c_alpha(&self) -> f64 {
        1.0 - self.alpha
    }

    /// Positive indices `m` carried by the kernel.
    pub fn index_range(&self) -> std::ops::RangeInclusive<usize> {
        match self.block {
            None => 1..=self.truncation,
            Some(k) => (1usize << k)..=((1usize << (k + 1)) - 1),
        }
    }

    fn path_ref(&self) -> &'a SelectorPath {
        self.path.expect("path presence checked at construction")
    }

    /// Real coefficient multiplying `e(λm)` for `m > 0`. The t-family is odd
    /// in `m`, so `-m` carries the negative of this.
    pub fn coefficient(&self, m: usize) -> f64 {
        let c = self.c_alpha();
        let mf = m as f64;
        let i = m as i64;
        match self.kind {
            KernelKind::Carleson => 1.0 / mf,
            KernelKind::TermR0 | KernelKind::TermC4 => c / mf,
            KernelKind::TFull | KernelKind::CFull => {
                let p = self.path_ref();
                if p.x(i) == 0 {
                    0.0
                } else {
                    let s = p.s(i);
                    assert!(s >= 1, "X_m = 1 forces S_m >= 1");
                    1.0 / s as f64
                }
            }
            KernelKind::TermR1 | KernelKind::TermC2 => {
                let p = self.path_ref();
                p.sigma(i) / p.w(i) - c / mf
            }
            KernelKind::TermR2 | KernelKind::TermC3 => {
                let p = self.path_ref();
                p.y(i) / p.w(i)
            }
            KernelKind::TermR3 | KernelKind::TermC1 => {
                let p = self.path_ref();
                if p.x(i) == 0 {
                    0.0
                } else {
                    1.0 / p.s(i) as f64 - 1.0 / p.w(i)
                }
            }
        }
    }

    /// Shift `s` of the c-family term `f(x - s) - f(x + s)` at `m > 0`.
    pub fn shift(&self, m: usize) -> i64 {
        let p = self.path_ref();
        let i = m as i64;
        match self.kind {
            KernelKind::CFull | KernelKind::TermC1 => p.s(i),
            _ => p.s(i - 1) + 1,
        }
    }

    /// Half-width of the kernel window.
    fn reach(&self) -> i64 {
        let hi = *self.index_range().end();
        if self.kind.is_c_family() {
            let p = self.path_ref();
            p.s(hi as i64 - 1) + 1
        } else {
            hi as i64
        }
    }

    /// Kernel `K` with `T_λ f = K ∗ f`, stored on `[-reach, reach]`.
    pub fn taps(&self, lambda: f64) -> Signal {
        let reach = self.reach();
        let mut k = Signal::zeros(-reach, (2 * reach + 1) as usize);
        for m in self.index_range() {
            let a = self.coefficient(m);
            if a == 0.0 {
                continue;
            }
            let mi = m as i64;
            if self.kind.is_c_family() {
                let v = crate::e(lambda * m as f64) * a;
                let s = self.shift(m);
                k.add_at(s, v);
                k.add_at(-s, -v);
            } else {
                k.add_at(mi, crate::e(lambda * m as f64) * a);
                k.add_at(-mi, -crate::e(-lambda * m as f64) * a);
            }
        }
        k
    }

    /// Kernel with each summand weighted by its index `m`: the taps of
    /// `∂_λ T_λ / (2πi)`.
    pub fn derivative_taps(&self, lambda: f64) -> Signal {
        let reach = self.reach();
        let mut k = Signal::zeros(-reach, (2 * reach + 1) as usize);
        for m in self.index_range() {
            let a = self.coefficient(m) * m as f64;
            if a == 0.0 {
                continue;
            }
            let mi = m as i64;
            if self.kind.is_c_family() {
                let v = crate::e(lambda * m as f64) * a;
                let s = self.shift(m);
                k.add_at(s, v);
                k.add_at(-s, -v);
            } else {
                // (-m) · (-a) e(-λm)
                k.add_at(mi, crate::e(lambda * m as f64) * a);
                k.add_at(-mi, crate::e(-lambda * m as f64) * a);
            }
        }
        k
    }

    /// One summand of the sum defining `T_λ f(x)`. For the t-family `m` runs
    /// over nonzero integers; for the c-family over positive integers.
    pub fn summand(&self, m: i64, lambda: f64, f: &Signal, x: i64) -> Complex64 {
        let k = m.unsigned_abs() as usize;
        if m == 0 || !self.index_range().contains(&k) {
            return Complex64::new(0.0, 0.0);
        }
        let a = self.coefficient(k) * m.signum() as f64;
        let phase = crate::e(lambda * m as f64);
        if self.kind.is_c_family() {
            assert!(m > 0, "c-family summands are indexed by m > 0");
            let s = self.shift(k);
            phase * a * (f.get(x - s) - f.get(x + s))
        } else {
            phase * a * f.get(x - m)
        }
    }

    /// `ℓ¹` mass of the kernel over `truncation < m <= horizon` (both signs
    /// or both shifts), i.e. what the truncation drops up to `horizon`.
    pub fn tail_mass(&self, horizon: usize) -> Result<f64> {
        if let Some(p) = self.path {
            if horizon > p.len() {
                return Err(Error::param(
                    "horizon",
                    format!("{horizon} exceeds path length {}", p.len()),
                ));
            }
        }
        let wide = Self {
            truncation: horizon.max(self.truncation),
            block: None,
            ..*self
        };
        let (lo, hi) = match self.block {
            Some(_) => return Ok(0.0),
            None => (self.truncation + 1, horizon),
        };
        Ok((lo..=hi).map(|m| 2.0 * wide.coefficient(m).abs()).sum())
    }
}

/// `T_λ f` for one modulation, on the full output window.
pub fn eval_single_lambda(spec: &ModulatedKernelSpec, lambda: f64, f: &Signal) -> Signal {
    f.convolve(&spec.taps(lambda))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximalResult {
    /// Pointwise maximum of `|T_λ f|`, real valued.
    pub values: Signal,
    /// Maximizing `λ` at each position of `values`; the first in `Λ` order on
    /// ties.
    pub argmax: Vec<f64>,
}

impl MaximalResult {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.values().iter().map(|v| v.re).collect()
    }
}

/// `max_{λ∈Λ} |eval(λ)|` pointwise. All evaluations must share a window.
pub fn maximal_over<F>(lambda: &LambdaSet, eval: F) -> Result<MaximalResult>
where
    F: Fn(f64) -> Signal + Sync,
{
    if lambda.is_empty() {
        return Err(Error::EmptyLambda);
    }
    let outputs: Vec<Signal> = lambda.points().par_iter().map(|&l| eval(l)).collect();
    let first = &outputs[0];
    let mut values = first.abs();
    let mut argmax = vec![lambda.points()[0]; first.len()];
    for (out, &l) in outputs.iter().zip(lambda.points()).skip(1) {
        assert_eq!(
            (out.offset(), out.len()),
            (first.offset(), first.len()),
            "evaluations must share an output window"
        );
        for (i, v) in out.values().iter().enumerate() {
            let a = v.norm();
            if a > values.values()[i].re {
                values.values_mut()[i] = Complex64::new(a, 0.0);
                argmax[i] = l;
            }
        }
    }
    Ok(MaximalResult { values, argmax })
}

pub fn eval_maximal(
    spec: &ModulatedKernelSpec,
    lambda: &LambdaSet,
    f: &Signal,
) -> Result<MaximalResult> {
    maximal_over(lambda, |l| eval_single_lambda(spec, l, f))
}

/// Discrete Hardy–Littlewood maximal function on the support window of `f`.
pub fn hardy_littlewood_max(f: &Signal) -> Signal {
    match f.support() {
        None => Signal::zeros(f.offset(), 0),
        Some((a, b)) => hardy_littlewood_max_on(f, a, (b - a + 1) as usize),
    }
}

/// `Mf(x) = max_{I ∋ x} |I|^{-1} Σ_I |f|` for `x` in `[start, start + len)`.
///
/// Optimal intervals never leave the support hull `[a, b]` except to reach
/// `x` itself, so inside the hull all `O(n²)` intervals are scanned once and
/// outside it only intervals ending at `x` are needed.
pub fn hardy_littlewood_max_on(f: &Signal, start: i64, len: usize) -> Signal {
    let mut out = Signal::zeros(start, len);
    let Some((a, b)) = f.support() else {
        return out;
    };
    let n = (b - a + 1) as usize;
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + f.get(a + i as i64).norm();
    }
    let avg = |l: usize, r: usize| (prefix[r + 1] - prefix[l]) / (r - l + 1) as f64;

    let lo = start.max(a);
    let hi = (start + len as i64 - 1).min(b);
    if lo <= hi {
        // inside[x] = max over l <= x <= r of avg(l, r)
        let mut inside: Vec<f64> = (0..n).map(|i| f.get(a + i as i64).norm()).collect();
        let mut suffix = vec![0.0f64; n];
        for l in 0..n {
            let mut best = f64::NEG_INFINITY;
            for r in (l..n).rev() {
                best = best.max(avg(l, r));
                suffix[r] = best;
            }
            for x in l..n {
                if suffix[x] > inside[x] {
                    inside[x] = suffix[x];
                }
            }
        }
        for x in lo..=hi {
            out.values_mut()[(x - start) as usize] = Complex64::new(inside[(x - a) as usize], 0.0);
        }
    }
    for x in start..start + len as i64 {
        let v = if x < a {
            (0..n)
                .map(|r| prefix[r + 1] / (a + r as i64 - x + 1) as f64)
                .fold(0.0, f64::max)
        } else if x > b {
            (0..n)
                .map(|l| (prefix[n] - prefix[l]) / (x - a - l as i64 + 1) as f64)
                .fold(0.0, f64::max)
        } else {
            continue;
        };
        out.values_mut()[(x - start) as usize] = Complex64::new(v, 0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selector::{sample_path, SelectorParams};
    use crate::{lambda, rng};
    use proptest::prelude::*;
    use rand::Rng;

    fn random_signal(seed: u64, offset: i64, len: usize) -> Signal {
        let mut r = rng::stream(seed, 9);
        Signal::new(
            offset,
            (0..len)
                .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    /// Independent evaluator: loops over output positions and every summand.
    fn naive(spec: &ModulatedKernelSpec, lambda: f64, f: &Signal, x: i64) -> Complex64 {
        let m_hi = spec.truncation() as i64;
        let lo = if spec.kind().is_c_family() { 1 } else { -m_hi };
        (lo..=m_hi).map(|m| spec.summand(m, lambda, f, x)).sum()
    }

    /// Mf by brute force over every interval within a generous window.
    fn hl_brute(f: &Signal, x: i64, lo: i64, hi: i64) -> f64 {
        let mut best = 0.0f64;
        for l in lo..=x {
            for r in x..=hi {
                let s: f64 = (l..=r).map(|n| f.get(n).norm()).sum();
                best = best.max(s / (r - l + 1) as f64);
            }
        }
        best
    }

    #[test]
    fn carleson_on_delta() {
        let spec = ModulatedKernelSpec::deterministic(KernelKind::Carleson, 0.5, 64).unwrap();
        let out = eval_single_lambda(&spec, 0.3, &Signal::delta(0));
        for n in -64..=64i64 {
            let want = if n == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                crate::e(0.3 * n as f64) / n as f64
            };
            assert!((out.get(n) - want).norm() < 1e-15);
        }
        let lam = LambdaSet::new(vec![-0.4, 0.1, 0.2, 0.45]).unwrap();
        let max = eval_maximal(&spec, &lam, &Signal::delta(0)).unwrap();
        for n in -64..=64i64 {
            let want = if n == 0 { 0.0 } else { 1.0 / n.abs() as f64 };
            assert!((max.values.get(n).re - want).abs() < 1e-15);
        }
    }

    #[test]
    fn full_path_reduces_to_carleson() {
        let p = SelectorPath::from_selectors(0.5, &[1; 40]).unwrap();
        let t = ModulatedKernelSpec::on_path(KernelKind::TFull, &p, 40).unwrap();
        let c = ModulatedKernelSpec::deterministic(KernelKind::Carleson, 0.5, 40).unwrap();
        let f = random_signal(1, -5, 12);
        let a = eval_single_lambda(&t, 0.17, &f);
        let b = eval_single_lambda(&c, 0.17, &f);
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn matches_naive_loop() {
        let p = sample_path(SelectorParams::new(0.5, 1 << 12, 11).unwrap());
        let f = random_signal(2, -30, 64);
        for kind in KernelKind::ALL {
            let spec = if kind.needs_path() {
                ModulatedKernelSpec::on_path(kind, &p, 1 << 12).unwrap()
            } else {
                ModulatedKernelSpec::deterministic(kind, 0.5, 1 << 12).unwrap()
            };
            let out = eval_single_lambda(&spec, 0.2137, &f);
            let xs = [out.offset(), -30, 0, 17, 500, out.end() - 1];
            for &x in &xs {
                let d = (out.get(x) - naive(&spec, 0.2137, &f, x)).norm();
                assert!(d < 1e-10, "{} at {x}: {d}", kind.name());
            }
        }
    }

    #[test]
    fn decompositions_sum_exactly() {
        let p = sample_path(SelectorParams::new(2.0 / 3.0, 1024, 5).unwrap());
        let f = random_signal(3, -20, 40);
        let spec = |k| ModulatedKernelSpec::on_path(k, &p, 1024).unwrap();
        let r0 = ModulatedKernelSpec::deterministic(KernelKind::TermR0, p.alpha(), 1024).unwrap();
        let t_terms = [r0, spec(KernelKind::TermR1), spec(KernelKind::TermR2), spec(KernelKind::TermR3)];
        let c_terms = [KernelKind::TermC1, KernelKind::TermC2, KernelKind::TermC3, KernelKind::TermC4]
            .map(spec);
        let (t, c) = (spec(KernelKind::TFull), spec(KernelKind::CFull));
        for m in [-1024i64, -7, -1, 1, 2, 3, 99, 1024] {
            for x in [-3i64, 0, 10, 40] {
                let lhs = t.summand(m, 0.31, &f, x);
                let rhs: Complex64 = t_terms.iter().map(|s| s.summand(m, 0.31, &f, x)).sum();
                assert!((lhs - rhs).norm() < 1e-12);
                if m > 0 {
                    let lhs = c.summand(m, 0.31, &f, x);
                    let rhs: Complex64 = c_terms.iter().map(|s| s.summand(m, 0.31, &f, x)).sum();
                    assert!((lhs - rhs).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn block_and_tail() {
        let p = sample_path(SelectorParams::new(0.5, 256, 1).unwrap());
        let spec = ModulatedKernelSpec::on_path(KernelKind::TermR2, &p, 255)
            .unwrap()
            .with_block(6)
            .unwrap();
        assert_eq!(spec.index_range(), 64..=127);
        let k = spec.taps(0.0);
        assert_eq!(k.get(63), Complex64::new(0.0, 0.0));
        assert!((k.get(64).re - p.y(64) / p.w(64)).abs() < 1e-15);
        assert!((k.get(-64).re + p.y(64) / p.w(64)).abs() < 1e-15);
        assert!(spec.with_block(7).is_ok());
        assert!(spec.with_block(8).is_err());

        let c = ModulatedKernelSpec::deterministic(KernelKind::Carleson, 0.5, 10).unwrap();
        let want: f64 = (11..=20).map(|m| 2.0 / m as f64).sum();
        assert!((c.tail_mass(20).unwrap() - want).abs() < 1e-15);
        let t = ModulatedKernelSpec::on_path(KernelKind::TFull, &p, 100).unwrap();
        assert!(t.tail_mass(300).is_err());
    }

    #[test]
    fn kinds_validated() {
        assert!(matches!(
            ModulatedKernelSpec::deterministic(KernelKind::TFull, 0.5, 8),
            Err(Error::MissingPath { .. })
        ));
        let p = SelectorPath::from_selectors(0.5, &[1, 0, 1]).unwrap();
        assert!(ModulatedKernelSpec::on_path(KernelKind::CFull, &p, 4).is_err());
        assert!(eval_maximal(
            &ModulatedKernelSpec::on_path(KernelKind::CFull, &p, 3).unwrap(),
            &LambdaSet::new(vec![]).unwrap(),
            &Signal::delta(0)
        )
        .is_err());
    }

    #[test]
    fn hardy_littlewood_examples() {
        let m = hardy_littlewood_max_on(&Signal::delta(0), -10, 21);
        for x in -10..=10i64 {
            assert!((m.get(x).re - 1.0 / (x.abs() + 1) as f64).abs() < 1e-15);
        }
        let c = Signal::from_real(3, &[2.0; 9]);
        assert!(hardy_littlewood_max(&c).values().iter().all(|v| (v.re - 2.0).abs() < 1e-15));
    }

    #[test]
    fn hardy_littlewood_brute_force() {
        let f = Signal::from_real(-3, &[0.0, 1.0, -4.0, 0.0, 0.5, 2.0, 0.0, 0.0, 3.0]);
        let m = hardy_littlewood_max_on(&f, -12, 30);
        for x in -12..18i64 {
            let b = hl_brute(&f, x, -14, 20);
            assert!((m.get(x).re - b).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn maximal_singleton_and_argmax() {
        let f = random_signal(4, 0, 20);
        let spec = ModulatedKernelSpec::deterministic(KernelKind::Carleson, 0.5, 30).unwrap();
        let one = LambdaSet::new(vec![0.25]).unwrap();
        let max = eval_maximal(&spec, &one, &f).unwrap();
        let single = eval_single_lambda(&spec, 0.25, &f).abs();
        assert_eq!(max.values, single);
        let many = lambda::make_arithmetic_grid(5, 0.1).unwrap();
        let max = eval_maximal(&spec, &many, &f).unwrap();
        for (i, (n, v)) in max.values.iter().enumerate() {
            let at = eval_single_lambda(&spec, max.argmax[i], &f).get(n).norm();
            assert!((at - v.re).abs() < 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn maximal_monotone_in_lambda(seed in any::<u64>(), pts in proptest::collection::vec(-0.5f64..0.5, 1..6),
                                      extra in proptest::collection::vec(-0.5f64..0.5, 1..4)) {
            let f = random_signal(seed, -4, 16);
            let spec = ModulatedKernelSpec::deterministic(KernelKind::Carleson, 0.5, 24).unwrap();
            let small = LambdaSet::new(pts.clone()).unwrap();
            let big = LambdaSet::new(pts.into_iter().chain(extra).collect()).unwrap();
            let a = eval_maximal(&spec, &small, &f).unwrap();
            let b = eval_maximal(&spec, &big, &f).unwrap();
            for (x, y) in a.values.values().iter().zip(b.values.values()) {
                prop_assert!(x.re <= y.re);
            }
        }

        #[test]
        fn hardy_littlewood_dominates(vals in proptest::collection::vec(-3.0f64..3.0, 1..40)) {
            let f = Signal::from_real(-7, &vals);
            let m = hardy_littlewood_max_on(&f, -10, vals.len() + 6);
            for (x, v) in m.iter() {
                prop_assert!(v.re + 1e-15 >= f.get(x).norm());
            }
        }
    }
}
