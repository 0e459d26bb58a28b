//! Dyadic block maximal operators.
//!
//! `P_k f = sup_Λ |Σ_{2^k <= |m| < 2^{k+1}} Y_m e(λm)/W_m f(x - m)|` and
//! `Q_k f = sup_Λ |Σ_{2^k <= m < 2^{k+1}} Y_m e(λm)/W_m (f(x - S_{m-1} - 1) - f(x + S_{m-1} + 1))|`.

use super::{eval_maximal, KernelKind, ModulatedKernelSpec};
use crate::error::{Error, Result};
use crate::lambda::LambdaSet;
use crate::selector::SelectorPath;
use crate::signal::Signal;

/// Description of the single-`λ` kernel behind `P_k` or `Q_k`.
pub fn block_spec(path: &SelectorPath, k: u32, q: bool) -> Result<ModulatedKernelSpec<'_>> {
    let needed = 1usize.checked_shl(k + 1).unwrap_or(usize::MAX);
    if k >= 62 || needed > path.len() {
        return Err(Error::BlockOutOfRange {
            k,
            needed,
            available: path.len(),
        });
    }
    let kind = if q { KernelKind::TermC3 } else { KernelKind::TermR2 };
    ModulatedKernelSpec::on_path(kind, path, needed - 1)?.with_block(k)
}

pub fn block_p_k(path: &SelectorPath, lambda: &LambdaSet, k: u32, f: &Signal) -> Result<Signal> {
    let spec = block_spec(path, k, false)?;
    Ok(eval_maximal(&spec, lambda, f)?.values)
}

pub fn block_q_k(path: &SelectorPath, lambda: &LambdaSet, k: u32, f: &Signal) -> Result<Signal> {
    let spec = block_spec(path, k, true)?;
    Ok(eval_maximal(&spec, lambda, f)?.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::selector::{sample_path, SelectorParams};
    use num_complex::Complex64;
    use rand::Rng;

    #[test]
    fn zero_variance_path_gives_zero() {
        let xs = vec![1u8; 64];
        let p = SelectorPath::with_probabilities(0.5, &xs, &vec![1.0; 64]).unwrap();
        let lam = LambdaSet::new(vec![0.1, 0.3]).unwrap();
        let f = Signal::from_real(-3, &[1.0, 2.0, -1.0]);
        for k in 1..=4 {
            assert_eq!(block_p_k(&p, &lam, k, &f).unwrap().norm_inf(), 0.0);
            assert_eq!(block_q_k(&p, &lam, k, &f).unwrap().norm_inf(), 0.0);
        }
    }

    #[test]
    fn delta_input_reads_off_coefficients() {
        let p = sample_path(SelectorParams::new(0.5, 64, 3).unwrap());
        let lam = LambdaSet::new(vec![0.2]).unwrap();
        let out = block_p_k(&p, &lam, 3, &Signal::delta(0)).unwrap();
        for n in -20i64..=20 {
            let want = if (8..16).contains(&n.abs()) {
                (p.y(n) / p.w(n.abs())).abs()
            } else {
                0.0
            };
            assert!((out.get(n).re - want).abs() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn l1_contraction() {
        let p = sample_path(SelectorParams::new(0.5, 1 << 9, 8).unwrap());
        let lam = LambdaSet::new(vec![-0.3, 0.05, 0.4]).unwrap();
        let mut r = rng::stream(1, 1);
        for k in 2..=7 {
            let f = Signal::new(
                -10,
                (0..30)
                    .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
                    .collect(),
            );
            let mass: f64 = ((1i64 << k)..(1i64 << (k + 1)))
                .map(|m| 2.0 * p.y(m).abs() / p.w(m))
                .sum();
            let pk = block_p_k(&p, &lam, k, &f).unwrap();
            assert!(pk.norm(1.0) <= mass * f.norm(1.0) + 1e-12);
            let qk = block_q_k(&p, &lam, k, &f).unwrap();
            assert!(qk.norm(1.0) <= mass * f.norm(1.0) + 1e-12);
        }
    }

    #[test]
    fn block_must_fit_path() {
        let p = sample_path(SelectorParams::new(0.5, 100, 3).unwrap());
        let lam = LambdaSet::new(vec![0.2]).unwrap();
        assert!(matches!(
            block_p_k(&p, &lam, 6, &Signal::delta(0)),
            Err(Error::BlockOutOfRange { k: 6, needed: 128, available: 100 })
        ));
        assert!(block_q_k(&p, &lam, 5, &Signal::delta(0)).is_ok());
    }
}
