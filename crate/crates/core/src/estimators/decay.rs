use crate::error::{Error, Result};
use crate::lambda::LambdaSet;
use crate::operators::blocks::block_spec;
use crate::operators::eval_maximal;
use crate::selector::SelectorPath;
use crate::spectrum::{certified_supnorm, FrequencyGrid};

use super::opnorm_estimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockFamily {
    P,
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayOptions {
    pub grid_exponent: u32,
    /// Monte Carlo trials per path and `k`; zero skips the lower bound.
    pub trials: usize,
    /// Test signals live on `[0, signal_len)`.
    pub signal_len: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub k: u32,
    /// Geometric mean over paths of the certified sup over `θ` and `λ ∈ Λ` of
    /// the block multiplier.
    pub symbol_bound: f64,
    /// Same for the multiplier with summands weighted by `m`.
    pub derivative_bound: f64,
    /// Geometric mean over paths of the maximal-operator Monte Carlo ratio.
    pub mc_lower: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub family: BlockFamily,
    pub rows: Vec<DecayRow>,
    /// Least-squares slopes of `log2` of each column against `k`.
    pub symbol_slope: Option<f64>,
    pub derivative_slope: Option<f64>,
    pub mc_slope: Option<f64>,
    /// Set when some bound is zero so no logarithmic fit exists.
    pub degenerate: bool,
}

impl DecayFit {
    pub fn to_table(&self) -> String {
        let mut s = String::from("k,symbol_bound,derivative_bound,mc_lower\n");
        for r in &self.rows {
            let mc = r.mc_lower.map(|v| format!("{v:.12e}")).unwrap_or_default();
            s += &format!("{},{:.12e},{:.12e},{}\n", r.k, r.symbol_bound, r.derivative_bound, mc);
        }
        s
    }
}

fn geometric_mean(xs: &[f64]) -> f64 {
    if xs.contains(&0.0) {
        return 0.0;
    }
    (xs.iter().map(|x| x.log2()).sum::<f64>() / xs.len() as f64).exp2()
}

fn slope(ks: &[f64], vals: &[f64]) -> Option<f64> {
    if vals.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let ys: Vec<f64> = vals.iter().map(|v| v.log2()).collect();
    crate::ls_slope(ks, &ys)
}

/// Per-`k` multiplier bounds for `P_k` or `Q_k` over a batch of paths, and
/// the slopes of their `log2` against `k`.
pub fn block_decay_fit(
    paths: &[SelectorPath],
    lambda: &LambdaSet,
    k_range: std::ops::RangeInclusive<u32>,
    family: BlockFamily,
    opts: DecayOptions,
) -> Result<DecayFit> {
    if k_range.clone().count() < 3 {
        return Err(Error::param("k_range", "needs at least 3 values"));
    }
    if paths.is_empty() {
        return Err(Error::param("paths", "empty batch"));
    }
    if lambda.is_empty() {
        return Err(Error::EmptyLambda);
    }
    let grid = FrequencyGrid::with_exponent(opts.grid_exponent)?;
    // P_k multipliers are translates of one another in θ, so one λ suffices.
    let lambdas: &[f64] = match family {
        BlockFamily::P => &lambda.points()[..1],
        BlockFamily::Q => lambda.points(),
    };
    let q = family == BlockFamily::Q;
    let mut rows = Vec::new();
    for k in k_range {
        let mut sym = Vec::with_capacity(paths.len());
        let mut der = Vec::with_capacity(paths.len());
        let mut mc = Vec::with_capacity(paths.len());
        for (pi, path) in paths.iter().enumerate() {
            let spec = block_spec(path, k, q)?;
            let (mut s, mut d) = (0.0f64, 0.0f64);
            for &l in lambdas {
                s = s.max(certified_supnorm(&spec.taps(l), grid).upper);
                d = d.max(certified_supnorm(&spec.derivative_taps(l), grid).upper);
            }
            sym.push(s);
            der.push(d);
            if opts.trials > 0 {
                let seed = opts.seed ^ ((pi as u64) << 32 | u64::from(k));
                let est = opnorm_estimate(
                    |f| eval_maximal(&spec, lambda, f).expect("nonempty Λ").values,
                    2.0,
                    0,
                    opts.signal_len,
                    opts.trials,
                    seed,
                )?;
                mc.push(est.lower_bound);
            }
        }
        rows.push(DecayRow {
            k,
            symbol_bound: geometric_mean(&sym),
            derivative_bound: geometric_mean(&der),
            mc_lower: (opts.trials > 0).then(|| geometric_mean(&mc)),
        });
    }
    let ks: Vec<f64> = rows.iter().map(|r| f64::from(r.k)).collect();
    let col = |f: fn(&DecayRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let symbol_slope = slope(&ks, &col(|r| r.symbol_bound));
    let derivative_slope = slope(&ks, &col(|r| r.derivative_bound));
    let mc_slope = if opts.trials > 0 {
        slope(&ks, &col(|r| r.mc_lower.unwrap_or(0.0)))
    } else {
        None
    };
    let degenerate = symbol_slope.is_none() || derivative_slope.is_none();
    Ok(DecayFit {
        family,
        rows,
        symbol_slope,
        derivative_slope,
        mc_slope,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selector::{sample_ensemble, SelectorParams};

    fn opts(trials: usize) -> DecayOptions {
        DecayOptions {
            grid_exponent: 12,
            trials,
            signal_len: 64,
            seed: 1,
        }
    }

    #[test]
    fn zero_variance_is_degenerate() {
        let xs = vec![1u8; 256];
        let p = SelectorPath::with_probabilities(0.5, &xs, &vec![1.0; 256]).unwrap();
        let lam = LambdaSet::new(vec![0.25]).unwrap();
        let fit = block_decay_fit(&[p], &lam, 3..=6, BlockFamily::P, opts(0)).unwrap();
        assert!(fit.degenerate);
        assert!(fit.rows.iter().all(|r| r.symbol_bound == 0.0 && r.mc_lower.is_none()));
    }

    #[test]
    fn symbol_dominates_single_lambda_mc() {
        let paths = sample_ensemble(SelectorParams::new(0.5, 1 << 9, 4).unwrap(), 2);
        let lam = LambdaSet::new(vec![0.1]).unwrap();
        for fam in [BlockFamily::P, BlockFamily::Q] {
            let fit = block_decay_fit(&paths, &lam, 3..=7, fam, opts(6)).unwrap();
            assert!(!fit.degenerate);
            for r in &fit.rows {
                assert!(r.mc_lower.unwrap() <= r.symbol_bound * (1.0 + 1e-12));
            }
            assert!(fit.to_table().lines().count() == 6);
        }
    }

    #[test]
    fn needs_three_k() {
        let paths = sample_ensemble(SelectorParams::new(0.5, 256, 4).unwrap(), 1);
        let lam = LambdaSet::new(vec![0.1]).unwrap();
        assert!(block_decay_fit(&paths, &lam, 3..=4, BlockFamily::P, opts(0)).is_err());
        assert!(block_decay_fit(&paths, &lam, 3..=7, BlockFamily::P, opts(0)).is_ok());
        assert!(block_decay_fit(&paths, &lam, 3..=8, BlockFamily::P, opts(0)).is_err());
    }
}
