use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::selector::SelectorPath;

/// Minimum ensemble size for a tail experiment.
pub const MIN_TAIL_SAMPLES: usize = 100;

fn block(path: &SelectorPath, k: u32) -> Result<std::ops::Range<i64>> {
    let hi = 1usize.checked_shl(k + 1).filter(|_| k < 62).unwrap_or(usize::MAX);
    if hi > path.len() {
        return Err(Error::BlockOutOfRange {
            k,
            needed: hi,
            available: path.len(),
        });
    }
    Ok((1i64 << k)..(hi as i64))
}

/// `[Σ_{2^k <= m < 2^{k+1}} σ_m / W_m²]^{1/2}`.
pub fn square_function(path: &SelectorPath, k: u32) -> Result<f64> {
    Ok(block(path, k)?
        .map(|m| path.sigma(m) / path.w(m).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Rows `(k, square function, square function · 2^{k(1-α)/2})`. The last
/// column is the constant needed at that `k`.
pub fn square_function_table(path: &SelectorPath, ks: std::ops::RangeInclusive<u32>) -> Result<Vec<(u32, f64, f64)>> {
    let alpha = path.alpha();
    ks.map(|k| {
        let sf = square_function(path, k)?;
        Ok((k, sf, sf * (f64::from(k) * (1.0 - alpha) / 2.0).exp2()))
    })
    .collect()
}

/// `M(λ, θ) = Σ_{2^k <= m < 2^{k+1}} Y_m e(λm + θ(S_{m-1} + 1)) / W_m`.
fn martingale(path: &SelectorPath, k: u32, lambda: f64, theta: f64) -> Result<Complex64> {
    Ok(block(path, k)?
        .map(|m| {
            let s = path.s(m - 1) + 1;
            crate::e(lambda * m as f64 + theta * s as f64) * (path.y(m) / path.w(m))
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailExperiment {
    pub k: u32,
    pub samples: usize,
    pub lambda: f64,
    pub theta: f64,
    /// Square function of the block; thresholds are multiples of it.
    pub scale: f64,
    pub thresholds: Vec<f64>,
    /// Fraction of samples with `|M| > t · scale`, per threshold.
    pub exceedance: Vec<f64>,
    /// `c` of the least-squares envelope `exp(-c t²)` over thresholds with
    /// nonzero exceedance; `None` if there are none.
    pub envelope: Option<f64>,
    pub magnitudes: Vec<f64>,
}

impl TailExperiment {
    pub fn exceedance_at(&self, t: f64) -> f64 {
        self.magnitudes.iter().filter(|&&m| m > t * self.scale).count() as f64 / self.samples as f64
    }

    pub fn to_table(&self) -> String {
        let mut s = String::from("t,exceedance\n");
        for (t, e) in self.thresholds.iter().zip(&self.exceedance) {
            s += &format!("{t},{e:.6}\n");
        }
        s
    }
}

/// Samples `M(λ, θ)` once per path and tabulates its tail against the
/// square function of the first path.
pub fn subgaussian_tail(
    paths: &[SelectorPath],
    k: u32,
    lambda: f64,
    theta: f64,
    thresholds: &[f64],
) -> Result<TailExperiment> {
    if paths.len() < MIN_TAIL_SAMPLES {
        return Err(Error::param(
            "paths",
            format!("need at least {MIN_TAIL_SAMPLES}, got {}", paths.len()),
        ));
    }
    let mut thresholds = thresholds.to_vec();
    thresholds.sort_by(f64::total_cmp);
    let scale = square_function(&paths[0], k)?;
    let magnitudes = paths
        .par_iter()
        .map(|p| martingale(p, k, lambda, theta).map(|z| z.norm()))
        .collect::<Result<Vec<f64>>>()?;
    let mut exp = TailExperiment {
        k,
        samples: paths.len(),
        lambda,
        theta,
        scale,
        thresholds,
        exceedance: Vec::new(),
        envelope: None,
        magnitudes,
    };
    exp.exceedance = exp.thresholds.iter().map(|&t| exp.exceedance_at(t)).collect();
    // -ln P(t) ≈ c t², fitted through the origin.
    let (num, den) = exp
        .thresholds
        .iter()
        .zip(&exp.exceedance)
        .filter(|(t, &e)| e > 0.0 && **t > 0.0)
        .fold((0.0, 0.0), |(n, d), (t, e)| (n + -e.ln() * t * t, d + t.powi(4)));
    exp.envelope = (den > 0.0).then(|| num / den);
    Ok(exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selector::{sample_ensemble, SelectorParams};

    #[test]
    fn zero_variance_is_a_step() {
        let xs = vec![1u8; 64];
        let p = SelectorPath::with_probabilities(0.5, &xs, &vec![1.0; 64]).unwrap();
        let paths = vec![p; 100];
        let exp = subgaussian_tail(&paths, 4, 0.1, 0.2, &[0.0, 0.5, 1.0]).unwrap();
        assert!(exp.magnitudes.iter().all(|&m| m == 0.0));
        assert_eq!(exp.exceedance, vec![0.0, 0.0, 0.0]);
        assert!(subgaussian_tail(&paths[..50], 4, 0.1, 0.2, &[1.0]).is_err());
    }

    #[test]
    fn square_function_by_hand() {
        let p = SelectorPath::from_selectors(0.5, &[1, 0, 1, 1, 0, 0, 1, 0]).unwrap();
        let want: f64 = (4..8).map(|m: i64| (m as f64).powf(-0.5) / p.w(m).powi(2)).sum::<f64>().sqrt();
        assert!((square_function(&p, 2).unwrap() - want).abs() < 1e-15);
        assert!(square_function(&p, 3).is_err());
    }

    #[test]
    fn exceedance_monotone() {
        let paths = sample_ensemble(SelectorParams::new(2.0 / 3.0, 1 << 9, 3).unwrap(), 200);
        let ts: Vec<f64> = (0..12).map(|i| i as f64 * 0.5).collect();
        let exp = subgaussian_tail(&paths, 7, 0.3, 0.1, &ts).unwrap();
        for w in exp.exceedance.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(exp.exceedance_at(3.0) < 0.05);
        assert!(exp.envelope.unwrap() > 0.0);
    }
}
