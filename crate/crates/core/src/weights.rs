//! Weights on a window of ℤ, their Muckenhoupt and reverse Hölder
//! characteristics, and weighted operator-norm estimates.
//!
//! Characteristics are maxima over all subintervals of the window up to a
//! length cap, so they are lower bounds for the suprema over all intervals.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::test_signal;
use crate::rng;
use crate::signal::Signal;

/// Default cap on interval length for characteristic scans.
pub const DEFAULT_MAX_INTERVAL: usize = 1 << 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    offset: i64,
    values: Vec<f64>,
}

impl Weight {
    pub fn new(offset: i64, values: Vec<f64>) -> Result<Self> {
        if let Some((i, &v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonPositiveWeight {
                position: offset + i as i64,
                value: v,
            });
        }
        if values.is_empty() {
            return Err(Error::param("weight", "empty window"));
        }
        Ok(Self { offset, values })
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn get(&self, n: i64) -> Option<f64> {
        let i = n - self.offset;
        (i >= 0 && (i as usize) < self.values.len()).then(|| self.values[i as usize])
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.offset, self.values.iter().map(|v| v * c).collect())
    }

    /// `‖f‖_{ℓ^p(w)} = (Σ_{n in window} |f(n)|^p w(n))^{1/p}`.
    pub fn norm(&self, f: &Signal, p: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, w)| f.get(self.offset + i as i64).norm().powf(p) * w)
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// `w(n) = (1 + |n|)^γ` on `[-half, half]`.
pub fn power_weight(gamma: f64, half: i64) -> Result<Weight> {
    if half < 0 {
        return Err(Error::param("half", "must be nonnegative"));
    }
    Weight::new(
        -half,
        (-half..=half).map(|n| (1.0 + n.abs() as f64).powf(gamma)).collect(),
    )
}

fn prefix(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut p = vec![0.0];
    let mut acc = 0.0;
    for v in values {
        acc += v;
        p.push(acc);
    }
    p
}

/// Max over intervals `[a, a + len)` with `1 <= len <= max_len` of
/// `ratio(mean_1, mean_2)`.
fn scan(a: &[f64], b: &[f64], max_len: usize, ratio: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
    let n = a.len() - 1;
    (0..n)
        .into_par_iter()
        .map(|s| {
            let mut best = 0.0f64;
            for len in 1..=max_len.min(n - s) {
                let e = s + len;
                let l = len as f64;
                best = best.max(ratio((a[e] - a[s]) / l, (b[e] - b[s]) / l));
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// `[w]_{A_p} = max_Q ⟨w⟩_Q ⟨w^{-1/(p-1)}⟩_Q^{p-1}`.
pub fn ap_characteristic(w: &Weight, p: f64, max_len: usize) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::param("p", format!("{p} must exceed 1")));
    }
    let dual = -1.0 / (p - 1.0);
    let a = prefix(w.values.iter().copied());
    let b = prefix(w.values.iter().map(|v| v.powf(dual)));
    Ok(scan(&a, &b, max_len.max(1), |mw, md| mw * md.powf(p - 1.0)))
}

/// `[w]_{RH_p} = max_Q ⟨w^p⟩_Q^{1/p} / ⟨w⟩_Q`.
pub fn rh_characteristic(w: &Weight, p: f64, max_len: usize) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::param("p", format!("{p} must be at least 1")));
    }
    let a = prefix(w.values.iter().map(|v| v.powf(p)));
    let b = prefix(w.values.iter().copied());
    Ok(scan(&a, &b, max_len.max(1), |mp, m1| mp.powf(1.0 / p) / m1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedReport {
    pub p: f64,
    pub r: f64,
    /// `‖Tf‖_{ℓ^p(w)} / ‖f‖_{ℓ^p(w)}` per trial, both norms over the window.
    pub ratios: Vec<f64>,
    /// Largest ratio: a lower bound for the weighted operator norm.
    pub estimate: f64,
    /// `[w]_{A_{p/r}}` over the probed intervals.
    pub ap: f64,
    /// `[w]_{RH_s}` with `s = r / (r - p(r-1))`.
    pub rh: f64,
}

/// Monte Carlo lower estimate of `‖T : ℓ^p(w) → ℓ^p(w)‖`.
///
/// Test signals live on the weight window and `Tf` is measured only there,
/// which can only lower the ratio. Trial `i` draws from stream `i` of `seed`.
pub fn weighted_bound_check<T>(
    t_eval: T,
    w: &Weight,
    p: f64,
    r: f64,
    trials: usize,
    seed: u64,
) -> Result<WeightedReport>
where
    T: Fn(&Signal) -> Signal + Sync,
{
    if !(1.0..2.0).contains(&r) {
        return Err(Error::param("r", format!("{r} not in [1, 2)")));
    }
    let r_dual = if r == 1.0 { f64::INFINITY } else { r / (r - 1.0) };
    if !(p > r && p < r_dual) {
        return Err(Error::param("p", format!("{p} not in ({r}, {r_dual})")));
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be positive"));
    }
    let ratios: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut g = rng::stream(seed, i);
            let f = test_signal(i as usize, &mut g, w.offset(), w.len());
            w.norm(&t_eval(&f), p) / w.norm(&f, p)
        })
        .collect();
    let estimate = ratios.iter().copied().fold(0.0, f64::max);
    let s = r / (r - p * (r - 1.0));
    Ok(WeightedReport {
        p,
        r,
        ap: ap_characteristic(w, p / r, DEFAULT_MAX_INTERVAL)?,
        rh: rh_characteristic(w, s, DEFAULT_MAX_INTERVAL)?,
        ratios,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive oracle: recomputes every interval average from scratch.
    fn ap_brute(w: &[f64], p: f64) -> f64 {
        let mut best = 0.0f64;
        for s in 0..w.len() {
            for e in s + 1..=w.len() {
                let q = &w[s..e];
                let l = q.len() as f64;
                let m = q.iter().sum::<f64>() / l;
                let d = q.iter().map(|v| v.powf(-1.0 / (p - 1.0))).sum::<f64>() / l;
                best = best.max(m * d.powf(p - 1.0));
            }
        }
        best
    }

    fn rh_brute(w: &[f64], p: f64) -> f64 {
        let mut best = 0.0f64;
        for s in 0..w.len() {
            for e in s + 1..=w.len() {
                let q = &w[s..e];
                let l = q.len() as f64;
                let mp = q.iter().map(|v| v.powf(p)).sum::<f64>() / l;
                let m = q.iter().sum::<f64>() / l;
                best = best.max(mp.powf(1.0 / p) / m);
            }
        }
        best
    }

    #[test]
    fn constant_weight() {
        let w = Weight::new(0, vec![1.0; 64]).unwrap();
        for p in [1.5, 2.0, 3.0] {
            assert_eq!(ap_characteristic(&w, p, 64).unwrap(), 1.0);
            assert_eq!(rh_characteristic(&w, p, 64).unwrap(), 1.0);
        }
    }

    #[test]
    fn step_weight_matches_enumeration() {
        let vals: Vec<f64> = (0..512).map(|i| if i < 256 { 2.0 } else { 1.0 }).collect();
        let w = Weight::new(-256, vals.clone()).unwrap();
        for p in [1.5, 2.0, 4.0] {
            let a = ap_characteristic(&w, p, 512).unwrap();
            let b = ap_brute(&vals, p);
            assert!((a - b).abs() < 1e-12 * b, "{a} vs {b}");
            let a = rh_characteristic(&w, p, 512).unwrap();
            let b = rh_brute(&vals, p);
            assert!((a - b).abs() < 1e-12 * b);
        }
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(matches!(
            Weight::new(5, vec![1.0, 0.0]),
            Err(Error::NonPositiveWeight { position: 6, .. })
        ));
        assert!(Weight::new(0, vec![1.0, -2.0]).is_err());
        assert!(Weight::new(0, vec![f64::NAN]).is_err());
    }

    #[test]
    fn identity_ratio_is_one() {
        let w = power_weight(0.0, 64).unwrap();
        let rep = weighted_bound_check(|f: &Signal| f.clone(), &w, 2.0, 1.5, 6, 1).unwrap();
        assert!(rep.ratios.iter().all(|r| (r - 1.0).abs() < 1e-14));
        assert_eq!(rep.ap, 1.0);
        assert_eq!(rep.rh, 1.0);
        assert!(weighted_bound_check(|f: &Signal| f.clone(), &w, 4.0, 1.5, 6, 1).is_err());
    }

    #[test]
    fn ratio_invariant_under_scaling() {
        let w = power_weight(0.3, 128).unwrap();
        let shift = |f: &Signal| f.convolve(&Signal::from_real(-2, &[0.5, 0.0, 0.0, 0.0, 0.5]));
        let a = weighted_bound_check(shift, &w, 2.0, 1.0, 8, 3).unwrap();
        let b = weighted_bound_check(shift, &w.scaled(7.5).unwrap(), 2.0, 1.0, 8, 3).unwrap();
        for (x, y) in a.ratios.iter().zip(&b.ratios) {
            assert!((x - y).abs() < 1e-12 * x);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn ap_at_least_one(vals in proptest::collection::vec(0.01f64..100.0, 1..60), p in 1.1f64..4.0) {
            let w = Weight::new(0, vals).unwrap();
            prop_assert!(ap_characteristic(&w, p, 64).unwrap() >= 1.0 - 1e-12);
            prop_assert!(rh_characteristic(&w, p, 64).unwrap() >= 1.0 - 1e-12);
        }
    }
}
