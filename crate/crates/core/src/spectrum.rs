//! Fourier transforms on a uniform frequency grid, certified sup-norms, and
//! the Dirichlet kernel.
//!
//! The transform is `F f(β) = Σ_n f(n) e(-β n)` sampled at
//! `β_g = g/G - 1/2`. Sup-norms over the continuum are always reported as
//! certified upper bounds: grid maximum plus a padding derived from a bound
//! on the derivative between nodes.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrequencyGrid {
    resolution: usize,
}

impl FrequencyGrid {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::param("resolution", "must be positive"));
        }
        Ok(Self { resolution })
    }

    pub fn with_exponent(exponent: u32) -> Result<Self> {
        if exponent > 30 {
            return Err(Error::param("grid_exponent", "at most 30"));
        }
        Self::new(1 << exponent)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn node(&self, g: usize) -> f64 {
        g as f64 / self.resolution as f64 - 0.5
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.resolution).map(|g| self.node(g))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
    /// Bound on `|d/dβ F f|`, so that the padded maximum bounds the sup.
    pub lipschitz_bound: f64,
}

impl SpectrumSample {
    pub fn grid_max(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn lipschitz(f: &Signal) -> f64 {
    TAU * f.iter().map(|(n, v)| n.unsigned_abs() as f64 * v.norm()).sum::<f64>()
}

/// `e(-β_g n)` with the phase `g n / G - n / 2` reduced in integers.
fn grid_phase(g: usize, n: i64, resolution: usize) -> Complex64 {
    let gn = (g as i128 * n as i128).rem_euclid(resolution as i128) as f64 / resolution as f64;
    let half = if n.rem_euclid(2) == 1 { 0.5 } else { 0.0 };
    crate::e(-(gn - half))
}

/// Reference transform by direct summation, `O(len · G)`.
pub fn dft(f: &Signal, grid: FrequencyGrid) -> SpectrumSample {
    let g_count = grid.resolution;
    let values = (0..g_count)
        .map(|g| {
            f.iter()
                .map(|(n, v)| v * grid_phase(g, n, g_count))
                .sum::<Complex64>()
        })
        .collect();
    SpectrumSample {
        grid,
        values,
        lipschitz_bound: lipschitz(f),
    }
}

/// Same values as [`dft`] through a length-`G` FFT; `G` must be a power of two.
pub fn dft_fast(f: &Signal, grid: FrequencyGrid) -> Result<SpectrumSample> {
    let g_count = grid.resolution;
    if !g_count.is_power_of_two() {
        return Err(Error::param("resolution", "fast transform needs a power of two"));
    }
    // Σ_n f(n) e(-(g/G - 1/2) n) = Σ_r [Σ_{n≡r} (-1)^n f(n)] e(-g r / G)
    let mut folded = vec![Complex64::new(0.0, 0.0); g_count];
    for (n, v) in f.iter() {
        let r = n.rem_euclid(g_count as i64) as usize;
        folded[r] += if n.rem_euclid(2) == 1 { -v } else { v };
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(g_count).process(&mut folded);
    Ok(SpectrumSample {
        grid,
        values: folded,
        lipschitz_bound: lipschitz(f),
    })
}

fn transform(f: &Signal, grid: FrequencyGrid) -> SpectrumSample {
    if grid.resolution.is_power_of_two() {
        dft_fast(f, grid).expect("power of two checked")
    } else {
        dft(f, grid)
    }
}

/// `max_g |F f(β_g)| + L / (2G)`, an upper bound for the continuum sup.
pub fn padded_supnorm(s: &SpectrumSample) -> f64 {
    s.grid_max() + s.lipschitz_bound / (2.0 * s.grid.resolution as f64)
}

/// Sup-norm bounds for one transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupBound {
    pub grid_max: f64,
    /// Certified bound; never below the true sup.
    pub upper: f64,
}

/// Certified sup of `|F f|` using a second-order Taylor padding.
///
/// Around each node, `|F(β)| <= |F(β_g)| + |F'(β_g)| h + sup|F''| h²/2` with
/// `h = 1/(2G)`. `F'` is sampled on the same grid and
/// `sup|F''| <= 4π² Σ n² |f(n)|`. The signal is first recentred on its
/// support midpoint, which leaves `|F|` unchanged and shrinks both
/// derivatives. The result is also capped by the first-order padding.
pub fn certified_supnorm(f: &Signal, grid: FrequencyGrid) -> SupBound {
    let centred = match f.support() {
        None => return SupBound { grid_max: 0.0, upper: 0.0 },
        Some((a, b)) => {
            let t = f.trimmed();
            let mid = a + (b - a) / 2;
            Signal::new(t.offset() - mid, t.values().to_vec())
        }
    };
    let base = transform(&centred, grid);
    let moment = Signal::new(
        centred.offset(),
        centred
            .iter()
            .map(|(n, v)| v * n as f64)
            .collect(),
    );
    let deriv = transform(&moment, grid);
    let h = 1.0 / (2.0 * grid.resolution as f64);
    let curvature = 4.0 * PI * PI
        * centred
            .iter()
            .map(|(n, v)| (n as f64).powi(2) * v.norm())
            .sum::<f64>();
    let taylor = base
        .values
        .iter()
        .zip(&deriv.values)
        .map(|(v, d)| v.norm() + TAU * d.norm() * h)
        .fold(0.0, f64::max)
        + curvature * h * h / 2.0;
    let grid_max = base.grid_max();
    SupBound {
        grid_max,
        upper: taylor.min(padded_supnorm(&base)),
    }
}

/// `D_n(θ) = Σ_{m=1}^n e(θ m)`.
pub fn dirichlet(n: u64, theta: f64) -> Complex64 {
    let t = theta - theta.round();
    let nf = n as f64;
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let phase = crate::e((nf + 1.0) * t / 2.0);
    if (PI * nf * t).abs() < 1e-6 {
        // sin(πnt)/sin(πt) = n (1 - π²t²(n²-1)/6 + O(t⁴ n⁴))
        let ratio = nf * (1.0 - PI * PI * t * t * (nf * nf - 1.0) / 6.0);
        return phase * ratio;
    }
    phase * ((PI * nf * t).sin() / (PI * t).sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_signal(seed: u64, offset: i64, len: usize) -> Signal {
        let mut r = rng::stream(seed, 0);
        Signal::new(
            offset,
            (0..len)
                .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    /// Term-by-term `n + Σ_{m=1}^n (e(θm) - 1)`, with `θ` reduced mod 1 and
    /// `e(x) - 1 = (-2 sin²(πx), sin(2πx))` so small phases are not lost.
    fn dirichlet_sum(n: u64, theta: f64) -> Complex64 {
        let t = theta - theta.round();
        let excess: Complex64 = (1..=n)
            .map(|m| {
                let mf = m as f64;
                let prod = t * mf;
                let x = (prod - prod.round()) + t.mul_add(mf, -prod);
                Complex64::new(-2.0 * (PI * x).sin().powi(2), (TAU * x).sin())
            })
            .sum();
        excess + n as f64
    }

    #[test]
    fn delta_spectra() {
        let grid = FrequencyGrid::new(37).unwrap();
        let s = dft(&Signal::delta(0), grid);
        assert!(s.values.iter().all(|v| (v - 1.0).norm() < 1e-15));
        let s = dft(&Signal::delta(1), grid);
        assert!(s.values.iter().all(|v| (v.norm() - 1.0).abs() < 1e-14));
        assert_eq!(s.lipschitz_bound, TAU);
    }

    #[test]
    fn grid_parseval() {
        let f = random_signal(3, -10, 40);
        let grid = FrequencyGrid::new(40).unwrap();
        let s = dft(&f, grid);
        let lhs = s.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / 40.0;
        let rhs = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn convolution_theorem() {
        let f = random_signal(1, -20, 64);
        let g = random_signal(2, 5, 64);
        let grid = FrequencyGrid::new(4096).unwrap();
        let fg = dft(&f.convolve_direct(&g), grid);
        let (sf, sg) = (dft(&f, grid), dft(&g, grid));
        for i in 0..4096 {
            assert!((fg.values[i] - sf.values[i] * sg.values[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn fast_matches_direct() {
        let f = random_signal(4, -300, 200);
        for &gexp in &[4u32, 8, 11] {
            let grid = FrequencyGrid::with_exponent(gexp).unwrap();
            let a = dft(&f, grid);
            let b = dft_fast(&f, grid).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).norm() < 1e-9);
            }
        }
        assert!(dft_fast(&f, FrequencyGrid::new(100).unwrap()).is_err());
    }

    #[test]
    fn padded_bounds() {
        let grid = FrequencyGrid::new(64).unwrap();
        let c = Signal::from_real(0, &[2.5]);
        let s = dft(&c, grid);
        assert!((padded_supnorm(&s) - 2.5).abs() < 1e-14);
        let d = Signal::delta(3);
        let s = dft(&d, grid);
        let p = padded_supnorm(&s);
        assert!(p >= 1.0 && p <= 1.0 + s.lipschitz_bound / 128.0 + 1e-12);
    }

    #[test]
    fn padded_close_to_dense_grid() {
        let raw = random_signal(8, -16, 33);
        let l1: f64 = raw.values().iter().map(|v| v.norm()).sum();
        let f = Signal::new(-16, raw.values().iter().map(|v| v / l1).collect());
        let coarse = dft_fast(&f, FrequencyGrid::with_exponent(16).unwrap()).unwrap();
        let dense = dft_fast(&f, FrequencyGrid::with_exponent(20).unwrap()).unwrap();
        let p = padded_supnorm(&coarse);
        assert!(p >= dense.grid_max());
        assert!(p - dense.grid_max() < 1e-3);

        let g = random_signal(8, 0, 33);
        let dense = dft_fast(&g, FrequencyGrid::with_exponent(20).unwrap()).unwrap();
        let coarse = dft_fast(&g, FrequencyGrid::with_exponent(16).unwrap()).unwrap();
        let cert = certified_supnorm(&g, FrequencyGrid::with_exponent(16).unwrap());
        assert!(cert.upper >= dense.grid_max());
        assert!(cert.upper <= padded_supnorm(&coarse) + 1e-15);
        assert!(cert.upper - dense.grid_max() < 1e-3);
    }

    #[test]
    fn dirichlet_special_values() {
        assert!((dirichlet(5, 0.0) - 5.0).norm() < 1e-15);
        assert!((dirichlet(5, 3.0) - 5.0).norm() < 1e-12);
        assert_eq!(dirichlet(0, 0.3), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn dirichlet_matches_summation() {
        let mut r = rng::stream(77, 0);
        for _ in 0..100 {
            let theta: f64 = r.gen_range(-2.0..2.0);
            let n: u64 = r.gen_range(1..=10_000);
            let d = dirichlet(n, theta);
            let s = dirichlet_sum(n, theta);
            assert!((d - s).norm() < 1e-10, "n={n} theta={theta}");
        }
        // Near-integer arguments go through the series branch.
        for &theta in &[1e-13, -3e-10, 2.0 + 1e-11] {
            for &n in &[1u64, 17, 9999] {
                let (d, s) = (dirichlet(n, theta), dirichlet_sum(n, theta));
                assert!((d - s).norm() < 1e-10, "n={n} theta={theta} {d} {s}");
            }
        }
    }

    #[test]
    fn dirichlet_bounds() {
        // Direct-summation oracle over n <= 100 and small |θ|.
        for n in 1..=100u64 {
            for i in 1..=200 {
                let theta = i as f64 * 5e-6;
                let s = dirichlet_sum(n, theta);
                let nf = n as f64;
                // |D_n - n| <= Σ |e(θm) - 1| <= π n (n+1) |θ|.
                assert!((s - nf).norm() <= PI * nf * (nf + 1.0) * theta + 1e-12);
                assert!(s.norm() <= 1.0 / (2.0 * theta) + 1e-9);
            }
        }
        for i in 1..=500 {
            let theta = i as f64 / 1000.0;
            for n in [1u64, 2, 7, 50, 100] {
                assert!(dirichlet(n, theta).norm() <= 1.0 / (2.0 * theta) + 1e-9);
            }
        }
    }

    #[test]
    fn quadratic_bound_without_the_n_plus_one_fails_at_n1() {
        // |D_1(θ) - 1| = 2 sin(π|θ|) ≈ 2π|θ| > π|θ| for small θ ≠ 0.
        let theta = 1e-3;
        let lhs = (dirichlet(1, theta) - 1.0).norm();
        assert!(lhs > PI * theta);
        assert!((lhs - 2.0 * (PI * theta).sin()).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn padding_monotone_in_resolution(seed in any::<u64>(), len in 1usize..40, gexp in 6u32..12) {
            let f = random_signal(seed, -5, len);
            let g1 = FrequencyGrid::with_exponent(gexp).unwrap();
            let g2 = FrequencyGrid::with_exponent(gexp + 1).unwrap();
            let s1 = dft_fast(&f, g1).unwrap();
            let s2 = dft_fast(&f, g2).unwrap();
            let tol = s1.lipschitz_bound / (4.0 * g1.resolution() as f64) + 1e-12;
            prop_assert!(padded_supnorm(&s2) <= padded_supnorm(&s1) + tol);
            prop_assert!(s2.grid_max() <= padded_supnorm(&s1) + 1e-12);
            let c1 = certified_supnorm(&f, g1);
            prop_assert!(s2.grid_max() <= c1.upper + 1e-12);
        }
    }
}
