use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lambda::LambdaSet;
use crate::operators::maximal_over;
use crate::signal::Signal;
use crate::spectrum::{certified_supnorm, FrequencyGrid};

/// `T_λ f = K_λ ∗ f` with `K_λ(n) = amplitude · e(λn) φ(n)`, where `φ` is a
/// Gaussian bump of width `width`, cut at `|n| <= radius` and normalized to
/// unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulatedFamily {
    pub width: f64,
    pub radius: i64,
    pub amplitude: f64,
}

impl ModulatedFamily {
    pub fn new(width: f64, radius: i64) -> Result<Self> {
        if !(width > 0.0) || radius < 0 {
            return Err(Error::param("width", "width must be positive and radius nonnegative"));
        }
        Ok(Self {
            width,
            radius,
            amplitude: 1.0,
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            amplitude: self.amplitude * c,
            ..self.clone()
        }
    }

    fn bump(&self) -> Vec<f64> {
        let raw: Vec<f64> = (-self.radius..=self.radius)
            .map(|n| (-(n as f64).powi(2) / (2.0 * self.width * self.width)).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|v| self.amplitude * v / total).collect()
    }

    pub fn kernel(&self, lambda: f64) -> Signal {
        let phi = self.bump();
        Signal::new(
            -self.radius,
            phi.iter()
                .zip(-self.radius..)
                .map(|(v, n)| crate::e(lambda * n as f64) * *v)
                .collect(),
        )
    }

    /// Taps of `∂_λ K_λ`, i.e. `2πi n K_λ(n)`.
    pub fn derivative_kernel(&self, lambda: f64) -> Signal {
        let k = self.kernel(lambda);
        Signal::new(
            k.offset(),
            k.iter()
                .map(|(n, v)| v * Complex64::new(0.0, std::f64::consts::TAU * n as f64))
                .collect(),
        )
    }

    pub fn apply(&self, lambda: f64, f: &Signal) -> Signal {
        f.convolve(&self.kernel(lambda))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SobolevReport {
    /// Certified `sup_λ ‖T_λ‖`.
    pub a: f64,
    /// Certified `sup_λ ‖∂_λ T_λ‖`.
    pub big_a: f64,
    pub d: f64,
    pub c_d: f64,
    /// `C_d^{1/2} (a + a^{1-d/2} A^{d/2})`.
    pub bound_factor: f64,
    /// `‖sup_Λ |T_λ f|‖_2 / (bound_factor ‖f‖_2)` per input.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Checks `‖sup_Λ |T_λ f|‖_2 <= slack · C_d^{1/2} (a + a^{1-d/2} A^{d/2}) ‖f‖_2`.
///
/// The multiplier of `T_λ` is a translate of that of `T_0`, so `a` and `A`
/// are certified sup-norms of the `λ = 0` kernels.
pub fn sobolev_check(
    family: &ModulatedFamily,
    lambda: &LambdaSet,
    d: f64,
    c_d: f64,
    fs: &[Signal],
    grid: FrequencyGrid,
    slack: f64,
) -> Result<SobolevReport> {
    if !(0.0..1.0).contains(&d) {
        return Err(Error::param("d", format!("{d} not in [0, 1)")));
    }
    if !(c_d > 0.0 && c_d.is_finite()) {
        return Err(Error::param("c_d", "must be positive and finite"));
    }
    let a = certified_supnorm(&family.kernel(0.0), grid).upper;
    let big_a = certified_supnorm(&family.derivative_kernel(0.0), grid).upper;
    let bound_factor = c_d.sqrt() * (a + a.powf(1.0 - d / 2.0) * big_a.powf(d / 2.0));
    let mut ratios = Vec::with_capacity(fs.len());
    for f in fs {
        let lhs = maximal_over(lambda, |l| family.apply(l, f))?.values.norm(2.0);
        let n = f.norm(2.0);
        ratios.push(if n == 0.0 { 0.0 } else { lhs / (bound_factor * n) });
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(SobolevReport {
        a,
        big_a,
        d,
        c_d,
        bound_factor,
        ratios,
        max_ratio,
        slack,
        holds: max_ratio <= slack,
    })
}
