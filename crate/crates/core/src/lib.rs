//! Numerical workbench for random discrete Carleson operators.
//!
//! The crate samples random selector sequences, evaluates the modulated
//! singular operators built on them (together with their term-by-term
//! decompositions), and runs the supporting experiments: multiplier sup-norm
//! decay, martingale tail bounds, sparse domination certificates, weighted
//! norm estimates and Minkowski-dimension covering counts.
//!
//! Everything is deterministic given a seed. Random streams come from
//! [`rng::stream`], a ChaCha8 generator indexed by `(seed, stream)`.

// Range checks are written `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod harness;
pub mod lambda;
pub mod operators;
pub mod rng;
pub mod selector;
pub mod signal;
pub mod sparse;
pub mod spectrum;
pub mod weights;

pub use error::{Error, Result};
pub use lambda::LambdaSet;
pub use selector::{SelectorParams, SelectorPath};
pub use signal::Signal;

use num_complex::Complex64;

/// `e(t) = exp(2πi t)`, with `t` reduced mod 1 before the trig call.
#[inline]
pub fn e(t: f64) -> Complex64 {
    let frac = t - t.round();
    Complex64::from_polar(1.0, std::f64::consts::TAU * frac)
}

/// Least-squares slope of `ys` against `xs`. `None` if fewer than two points
/// or the abscissae are all equal.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for i in 0..n {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}
