use crate::error::{Error, Result};
use crate::estimators::{
    block_decay_fit, square_function_table, subgaussian_tail, test_signal, BlockFamily, DecayOptions,
    ModulatedFamily, sobolev_check,
};
use crate::lambda::{dimension_profile, LambdaSet};
use crate::operators::{
    aj_identity_check, eval_maximal, hardy_littlewood_max_on, lemma43_bound_check, skeleton_approximation,
    KernelKind, ModulatedKernelSpec,
};
use crate::rng;
use crate::selector::{concentration_report, hitting_times, sample_ensemble, skeleton, SelectorParams, SelectorPath};
use crate::signal::Signal;
use crate::sparse::{sparse_certificate, verify_sparse};
use crate::spectrum::FrequencyGrid;
use crate::weights::{ap_characteristic, power_weight, rh_characteristic, weighted_bound_check, DEFAULT_MAX_INTERVAL};

use super::{Experiment, ExperimentConfig, Relation, Report};

// Stream families, so that different uses of one seed never share draws.
const SIGNALS: u64 = 0x5349_474e;
const PAIRS: u64 = 0x5041_4952;

fn bad(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn e12(x: f64) -> String {
    format!("{x:.12e}")
}

fn ensemble(cfg: &ExperimentConfig, count: usize) -> Result<Vec<SelectorPath>> {
    let params = SelectorParams::new(cfg.alpha, 1usize << cfg.m_max_exponent, cfg.seed)?;
    Ok(sample_ensemble(params, count))
}

fn window_signal(cfg: &ExperimentConfig, index: usize, family: u64) -> Signal {
    let half = 1i64 << cfg.window_exponent;
    let mut g = rng::stream(cfg.seed ^ family, index as u64);
    test_signal(index, &mut g, -half, 2 * half as usize)
}

fn carleson(cfg: &ExperimentConfig) -> Result<ModulatedKernelSpec<'static>> {
    ModulatedKernelSpec::deterministic(KernelKind::Carleson, cfg.alpha, 1usize << cfg.m_max_exponent)
}

type Operator<'a> = &'a (dyn Fn(&Signal) -> Signal + Sync);

fn ratio_spread(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

pub(super) fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let lambda = cfg.lambda_spec.build()?;
    match cfg.experiment {
        Experiment::CarlesonDelta => carleson_delta(cfg, &lambda),
        Experiment::PkDecay => decay(cfg, &lambda, BlockFamily::P),
        Experiment::QkDecay => decay(cfg, &lambda, BlockFamily::Q),
        Experiment::Concentration => concentration(cfg),
        Experiment::AjApprox => aj_approx(cfg, &lambda),
        Experiment::SparseCert => sparse_cert(cfg, &lambda),
        Experiment::Weights => weights(cfg, &lambda),
        Experiment::Sobolev => sobolev(cfg, &lambda),
        Experiment::Tails => tails(cfg, &lambda),
        Experiment::Lemma43 => lemma43(cfg),
    }
}

fn carleson_delta(cfg: &ExperimentConfig, lambda: &LambdaSet) -> Result<Report> {
    if lambda.len() > 16 {
        return Err(bad("lambda_spec", format!("{} points, at most 16", lambda.len())));
    }
    if cfg.m_max_exponent < cfg.window_exponent {
        return Err(bad("m_max_exponent", "must be at least window_exponent"));
    }
    let res = eval_maximal(&carleson(cfg)?, lambda, &Signal::delta(0))?;
    let half = 1i64 << cfg.window_exponent;
    let mut rep = Report::new(&["n", "value", "expected", "abs_error"]);
    let mut worst = 0.0f64;
    for n in -half..=half {
        let value = res.values.get(n).norm();
        let expected = if n == 0 { 0.0 } else { 1.0 / n.unsigned_abs() as f64 };
        let err = (value - expected).abs();
        worst = worst.max(err);
        rep.row(&[n.to_string(), e12(value), e12(expected), e12(err)]);
    }
    rep.metric("lambda_points", lambda.len());
    rep.check("max_abs_error", worst, Relation::Below, 1e-12);
    Ok(rep)
}

fn decay(cfg: &ExperimentConfig, lambda: &LambdaSet, family: BlockFamily) -> Result<Report> {
    if cfg.k_max + 1 > cfg.m_max_exponent {
        return Err(bad("k_max", format!("blocks up to 2^(k_max+1) need m_max_exponent >= {}", cfg.k_max + 1)));
    }
    let paths = ensemble(cfg, cfg.paths)?;
    let opts = DecayOptions {
        grid_exponent: cfg.grid_exponent,
        trials: cfg.trials,
        signal_len: 1usize << cfg.window_exponent,
        seed: cfg.seed,
    };
    let fit = block_decay_fit(&paths, lambda, cfg.k_min..=cfg.k_max, family, opts)?;
    let slope = |s: Option<f64>| s.unwrap_or(f64::NAN);
    let mut rep;
    match family {
        BlockFamily::P => {
            rep = Report::new(&["k", "symbol_bound", "derivative_bound", "mc_lower"]);
            for r in &fit.rows {
                rep.row(&[r.k.to_string(), e12(r.symbol_bound), e12(r.derivative_bound), r.mc_lower.map(e12).unwrap_or_default()]);
            }
        }
        BlockFamily::Q => {
            rep = Report::new(&["k", "symbol_bound", "derivative_bound", "mc_lower", "square_function", "scaled"]);
            let sf = square_function_table(&paths[0], cfg.k_min..=cfg.k_max)?;
            for (r, (_, s, scaled)) in fit.rows.iter().zip(&sf) {
                rep.row(&[
                    r.k.to_string(),
                    e12(r.symbol_bound),
                    e12(r.derivative_bound),
                    r.mc_lower.map(e12).unwrap_or_default(),
                    e12(*s),
                    e12(*scaled),
                ]);
            }
            let scaled: Vec<f64> = sf.iter().map(|r| r.2).collect();
            let c = scaled.iter().copied().fold(0.0, f64::max);
            rep.metric("square_function_constant", c);
            rep.check("square_function_constant_spread", ratio_spread(&scaled), Relation::AtMost, 2.0);
        }
    }
    rep.metric("symbol_slope", slope(fit.symbol_slope));
    rep.metric("derivative_slope", slope(fit.derivative_slope));
    rep.metric("mc_slope", slope(fit.mc_slope));
    if family == BlockFamily::P {
        rep.check("symbol_slope", slope(fit.symbol_slope), Relation::AtMost, -0.10);
        rep.check("derivative_slope", slope(fit.derivative_slope), Relation::AtLeast, 0.55);
    }
    Ok(rep)
}

fn concentration(cfg: &ExperimentConfig) -> Result<Report> {
    let paths = ensemble(cfg, cfg.paths)?;
    let report = concentration_report(&paths, cfg.epsilon)?;
    let mut rep = Report::new(&["path", "statistic"]);
    for (i, s) in report.statistics.iter().enumerate() {
        rep.row(&[i.to_string(), e12(*s)]);
    }
    rep.metric("exponent", report.exponent);
    rep.metric("median", report.quantile(0.5));
    rep.check("fraction_above_10", report.fraction_exceeding(10.0), Relation::AtMost, 0.05);
    Ok(rep)
}

fn aj_approx(cfg: &ExperimentConfig, lambda: &LambdaSet) -> Result<Report> {
    const J_HI: usize = 200;
    let skel = skeleton(cfg.alpha, J_HI)?;
    let mut rep = Report::new(&["lambda", "j", "diff", "scaled"]);
    let mut constant = 0.0f64;
    for &l in lambda.points() {
        let fit = skeleton_approximation(&skel, l, 2, J_HI)?;
        for ((j, d), s) in fit.js.iter().zip(&fit.diffs).zip(&fit.scaled) {
            rep.row(&[l.to_string(), j.to_string(), e12(*d), e12(*s)]);
        }
        constant = constant.max(fit.constant);
    }
    let mut residual = 0.0f64;
    for (i, path) in ensemble(cfg, cfg.paths)?.iter().enumerate() {
        let ht = hitting_times(path);
        if ht.max_level() == 0 {
            continue;
        }
        let m = ht.get(ht.max_level());
        let f = window_signal(cfg, i, SIGNALS);
        for &l in lambda.points() {
            residual = residual.max(aj_identity_check(path, l, &f, m)?);
        }
    }
    rep.metric("identity_residual", residual);
    rep.check("skeleton_constant", constant, Relation::Below, 100.0);
    rep.check("identity_residual", residual, Relation::AtMost, 1e-10);
    Ok(rep)
}

fn sparse_cert(cfg: &ExperimentConfig, lambda: &LambdaSet) -> Result<Report> {
    let n = 1usize << cfg.window_exponent;
    let spec = carleson(cfg)?;
    let hl = |h: &Signal| hardy_littlewood_max_on(h, 0, n);
    let cm = |h: &Signal| eval_maximal(&spec, lambda, h).expect("nonempty set").values;
    let ops: [(&str, Operator); 2] = [("hardy-littlewood", &hl), ("carleson", &cm)];
    let mut rep = Report::new(&["operator", "pair", "intervals", "pairing", "form", "constant", "valid"]);
    for (name, op) in ops {
        let mut ks = Vec::with_capacity(cfg.trials);
        let mut invalid = 0usize;
        for i in 0..cfg.trials {
            let mut a = rng::stream(cfg.seed ^ PAIRS, 2 * i as u64);
            let mut b = rng::stream(cfg.seed ^ PAIRS, 2 * i as u64 + 1);
            // Gaussian-profile magnitudes: positive and supported on the whole window.
            let f = test_signal(0, &mut a, 0, n).abs();
            let g = test_signal(0, &mut b, 0, n).abs();
            let c = sparse_certificate(op, &f, &g, cfg.r)?;
            let valid = verify_sparse(&c.collection).is_valid() && !c.truncated;
            invalid += usize::from(!valid);
            ks.push(c.constant);
            rep.row(&[
                name.to_string(),
                i.to_string(),
                c.collection.len().to_string(),
                e12(c.pairing),
                e12(c.form),
                e12(c.constant),
                valid.to_string(),
            ]);
        }
        let finite = ks.iter().all(|k| k.is_finite());
        rep.check(&format!("{name}_invalid"), invalid as f64, Relation::AtMost, 0.0);
        rep.check(&format!("{name}_infinite"), f64::from(u8::from(!finite)), Relation::AtMost, 0.0);
        rep.check(&format!("{name}_constant_spread"), ratio_spread(&ks), Relation::AtMost, 2.0);
    }
    Ok(rep)
}

fn weights(cfg: &ExperimentConfig, lambda: &LambdaSet) -> Result<Report> {
    let half = 1i64 << cfg.window_exponent;
    let w = power_weight(cfg.gamma, half)?;
    let spec = carleson(cfg)?;
    let op = |h: &Signal| eval_maximal(&spec, lambda, h).expect("nonempty set").values;
    let report = weighted_bound_check(op, &w, cfg.p, cfg.r, cfg.trials, cfg.seed)?;
    let mut rep = Report::new(&["trial", "ratio"]);
    for (i, r) in report.ratios.iter().enumerate() {
        rep.row(&[i.to_string(), e12(*r)]);
    }
    // Stability: the best ratio of each half of the trials against the whole.
    let mid = report.ratios.len() / 2;
    let best = |xs: &[f64]| xs.iter().copied().fold(0.0, f64::max);
    let halves = [best(&report.ratios[..mid]), best(&report.ratios[mid..])];
    let stability = halves.iter().map(|h| h / report.estimate).fold(f64::INFINITY, f64::min);
    let unit = power_weight(0.0, half)?;
    let unit_ap = ap_characteristic(&unit, cfg.p / cfg.r, DEFAULT_MAX_INTERVAL)?;
    let unit_rh = rh_characteristic(&unit, cfg.p, DEFAULT_MAX_INTERVAL)?;
    rep.metric("ap", report.ap);
    rep.metric("rh", report.rh);
    rep.metric("estimate", report.estimate);
    rep.metric("first_half_estimate", halves[0]);
    rep.metric("second_half_estimate", halves[1]);
    rep.check("ap", report.ap, Relation::Below, f64::INFINITY);
    rep.check("rh", report.rh, Relation::Below, f64::INFINITY);
    rep.check("half_over_full", stability, Relation::AtLeast, 0.5);
    rep.check("unit_ap_error", (unit_ap - 1.0).abs(), Relation::AtMost, 0.0);
    rep.check("unit_rh_error", (unit_rh - 1.0).abs(), Relation::AtMost, 0.0);
    Ok(rep)
}

fn sobolev(cfg: &ExperimentConfig, lambda: &LambdaSet) -> Result<Report> {
    let family = ModulatedFamily::new(8.0, 48)?;
    let scales: Vec<f64> = (1..=12).map(|j| (-f64::from(j)).exp2()).collect();
    let prof = dimension_profile(lambda, &scales, &[cfg.d])?;
    let c_d = prof.c_d(cfg.d);
    let fs: Vec<Signal> = (0..cfg.trials).map(|i| window_signal(cfg, i, SIGNALS)).collect();
    let grid = FrequencyGrid::with_exponent(cfg.grid_exponent)?;
    let report = sobolev_check(&family, lambda, cfg.d, c_d, &fs, grid, 10.0)?;
    let mut rep = Report::new(&["trial", "ratio"]);
    for (i, r) in report.ratios.iter().enumerate() {
        rep.row(&[i.to_string(), e12(*r)]);
    }
    rep.metric("fitted_dimension", prof.fitted_dimension);
    rep.metric("c_d", c_d);
    rep.metric("a", report.a);
    rep.metric("big_a", report.big_a);
    rep.metric("bound_factor", report.bound_factor);
    rep.check("max_ratio", report.max_ratio, Relation::AtMost, report.slack);
    Ok(rep)
}

fn tails(cfg: &ExperimentConfig, lambda: &LambdaSet) -> Result<Report> {
    if cfg.k + 1 > cfg.m_max_exponent {
        return Err(bad("k", format!("block needs m_max_exponent >= {}", cfg.k + 1)));
    }
    let paths = ensemble(cfg, cfg.paths)?;
    let thresholds: Vec<f64> = (0..=24).map(|i| f64::from(i) * 0.25).collect();
    let exp = subgaussian_tail(&paths, cfg.k, lambda.points()[0], cfg.theta, &thresholds)?;
    let mut rep = Report::new(&["t", "exceedance"]);
    for (t, e) in exp.thresholds.iter().zip(&exp.exceedance) {
        rep.row(&[t.to_string(), e.to_string()]);
    }
    rep.metric("scale", exp.scale);
    rep.metric("lambda", exp.lambda);
    rep.metric("envelope", exp.envelope.unwrap_or(f64::NAN));
    rep.check("exceedance_at_3", exp.exceedance_at(3.0), Relation::Below, 0.05);
    Ok(rep)
}

fn lemma43(cfg: &ExperimentConfig) -> Result<Report> {
    let epsilons: [f64; 3] = [0.25, 1.0 / 16.0, 1.0 / 64.0];
    let gamma = cfg.alpha / (1.0 - cfg.alpha);
    let j_needed = epsilons[2].powf(-gamma).ceil() as usize + 1;
    let skel = skeleton(cfg.alpha, j_needed)?;
    let f = window_signal(cfg, 0, SIGNALS);
    let mut rep = Report::new(&["epsilon", "log_factor", "constant", "growth", "j_max"]);
    let mut growth = Vec::new();
    for &eps in &epsilons {
        let r = lemma43_bound_check(&skel, eps, &f, cfg.grid_points)?;
        // Unnormalized sup of LHS / Mf.
        let g = r.constant * r.log_factor;
        growth.push(g);
        rep.row(&[eps.to_string(), e12(r.log_factor), e12(r.constant), e12(g), r.j_max.to_string()]);
    }
    rep.check("growth_ratio", growth[2] / growth[0], Relation::AtMost, 4.0 * 1.2);
    Ok(rep)
}
