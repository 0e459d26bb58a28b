//! Empirical estimates: operator norms from random test signals, dyadic
//! block decay, the Sobolev-type maximal inequality, and sub-Gaussian tails.

mod decay;
mod sobolev;
mod tails;

pub use decay::{block_decay_fit, BlockFamily, DecayFit, DecayOptions, DecayRow};
pub use sobolev::{sobolev_check, ModulatedFamily, SobolevReport};
pub use tails::{square_function, square_function_table, subgaussian_tail, TailExperiment};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::signal::Signal;

/// Test signal number `index` on `[offset, offset + len)`. Profiles cycle
/// with `index mod 3`: complex Gaussian noise, a few random spikes, and a
/// modulated indicator of a random subinterval.
pub fn test_signal(index: usize, rng: &mut StreamRng, offset: i64, len: usize) -> Signal {
    assert!(len > 0);
    let mut v = vec![Complex64::new(0.0, 0.0); len];
    match index % 3 {
        0 => {
            for z in &mut v {
                *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
        }
        1 => {
            let spikes = rng.gen_range(1..=4.min(len));
            for _ in 0..spikes {
                let i = rng.gen_range(0..len);
                v[i] += crate::e(rng.gen::<f64>()) * rng.gen_range(0.5..2.0);
            }
        }
        _ => {
            let a = rng.gen_range(0..len);
            let b = rng.gen_range(a..len);
            let theta: f64 = rng.gen_range(-0.5..0.5);
            for (i, z) in v.iter_mut().enumerate().take(b + 1).skip(a) {
                *z = crate::e(theta * (offset + i as i64) as f64);
            }
        }
    }
    Signal::new(offset, v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub p: f64,
    /// Best ratio `‖op f‖_p / ‖f‖_p` found.
    pub lower_bound: f64,
    /// Certified multiplier bound, when one is available.
    pub symbol_upper: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Ratio of every trial, in trial order.
    pub ratios: Vec<f64>,
}

/// Random-search lower bound for `‖op : ℓ^p → ℓ^p‖`. Trial `i` draws its test
/// signal from stream `i` of `seed`, so adding trials never lowers the result.
pub fn opnorm_estimate<T>(op: T, p: f64, offset: i64, len: usize, trials: usize, seed: u64) -> Result<NormEstimate>
where
    T: Fn(&Signal) -> Signal + Sync,
{
    if trials == 0 {
        return Err(Error::param("trials", "must be positive"));
    }
    if !(p >= 1.0) {
        return Err(Error::param("p", "must be at least 1"));
    }
    if len == 0 {
        return Err(Error::param("window", "must be nonempty"));
    }
    let ratios: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut g = rng::stream(seed, i);
            let f = test_signal(i as usize, &mut g, offset, len);
            op(&f).norm(p) / f.norm(p)
        })
        .collect();
    Ok(NormEstimate {
        p,
        lower_bound: ratios.iter().copied().fold(0.0, f64::max),
        symbol_upper: None,
        trials,
        seed,
        ratios,
    })
}
