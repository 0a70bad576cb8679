//! Built-in verification suite.
//!
//! Nine numbered checks cover the library's contract end to end: the
//! bandwidth-correction recursions against the balance-equation residual, the
//! kernel/projection agreement, the spectral identity of the kernel estimator,
//! two Monte Carlo slope reproductions, the regime partition, the estimator
//! sanity invariants, and numeric/asymptotic bandwidth coherence. The
//! `deconv verify` subcommand and the acceptance test target both run these.

use std::time::Instant;

use crate::estimators::{
    default_xgrid, kernel_deconv, kernel_spectrum, projection_deconv, KernelConfig,
    ProjectionConfig,
};
use crate::models::{sample_pair, symmetric_uniform_grid, NoiseModel, SignalModel};
use crate::rates::{
    alpha, bias_coefficients, bias_dominant_bandwidth, classify_regime, equal_xi,
    log_risk_bound, numeric_bandwidth, optimal_bandwidth, variance_coefficients,
    variance_dominant_bandwidth, verify_equation_residual, BandwidthKind, BandwidthRule,
    ProblemParams, Regime, RiskKind,
};
use crate::risk::{fit_loglog, run_experiment, EstimatorChoice, ExperimentConfig, GridSpec};
use crate::spectral::{ecf_at, FreqGrid};
use num_complex::Complex64;

/// Outcome of one verification check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

impl CheckOutcome {
    /// One status line, `PASS`/`FAIL` first so tables scan easily.
    pub fn line(&self) -> String {
        format!(
            "{} {:<24} {:>7.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.seconds,
            self.details
        )
    }
}

/// All check ids, in numbered order.
pub const ALL_CHECKS: [&str; 9] = [
    "recursion-bias",
    "recursion-variance",
    "equivalence",
    "fourier-identity",
    "rate-ordinary",
    "rate-supersmooth",
    "regime-partition",
    "estimator-sanity",
    "bandwidth-coherence",
];

/// Named subsets. `fast` skips the three multi-second checks.
pub fn suite(name: &str) -> Option<Vec<&'static str>> {
    match name {
        "all" => Some(ALL_CHECKS.to_vec()),
        "fast" => Some(vec![
            "recursion-bias",
            "recursion-variance",
            "fourier-identity",
            "regime-partition",
            "estimator-sanity",
            "bandwidth-coherence",
        ]),
        "recursion" => Some(vec!["recursion-bias", "recursion-variance"]),
        "estimators" => Some(vec!["equivalence", "fourier-identity", "estimator-sanity"]),
        "rates" => Some(vec!["rate-ordinary", "rate-supersmooth"]),
        "partition" => Some(vec!["regime-partition"]),
        "bandwidth" => Some(vec!["bandwidth-coherence"]),
        _ => None,
    }
}

pub fn run_check(id: &str) -> Option<CheckOutcome> {
    let start = Instant::now();
    let (title, budget, result): (&'static str, f64, Result<String, String>) = match id {
        "recursion-bias" => (
            "bias-side coefficient recursion",
            1.0,
            check_recursion_bias(),
        ),
        "recursion-variance" => (
            "variance-side mirrored recursion",
            1.0,
            check_recursion_variance(),
        ),
        "equivalence" => ("kernel vs projection estimates", 30.0, check_equivalence()),
        "fourier-identity" => (
            "kernel estimator spectral identity",
            10.0,
            check_fourier_identity(),
        ),
        "rate-ordinary" => (
            "ordinary-smooth MISE slope",
            600.0,
            check_rate_ordinary(),
        ),
        "rate-supersmooth" => (
            "supersmooth MISE slope",
            900.0,
            check_rate_supersmooth(),
        ),
        "regime-partition" => ("regime partition", 1.0, check_regime_partition()),
        "estimator-sanity" => ("estimator invariants", 60.0, check_estimator_sanity()),
        "bandwidth-coherence" => (
            "numeric vs asymptotic bandwidth",
            10.0,
            check_bandwidth_coherence(),
        ),
        _ => return None,
    };
    let seconds = start.elapsed().as_secs_f64();
    let (passed, details) = match result {
        Ok(d) => {
            if seconds <= budget {
                (true, d)
            } else {
                (false, format!("{d}; exceeded {budget:.0}s budget"))
            }
        }
        Err(d) => (false, d),
    };
    Some(CheckOutcome {
        id: ALL_CHECKS.iter().find(|c| **c == id).copied().unwrap_or("unknown"),
        title,
        passed,
        details,
        seconds,
    })
}

const PROBES: [f64; 3] = [1e6, 1e9, 1e12];

/// Shared residual criterion for both recursion checks. `h_of` maps
/// (n, coefficient-slice) to the candidate bandwidth. Tolerance is
/// `10 (ln n)^{(k+2) ratio - (k+1)}`, the order of the first uncancelled term,
/// and the full coefficient vector must beat its one-shorter truncation at the
/// largest probe.
fn residual_criterion(
    p: &ProblemParams,
    ratio: f64,
    coeffs: &[f64],
    h_of: impl Fn(f64, &[f64]) -> crate::error::Result<f64>,
) -> Result<f64, String> {
    let k = coeffs.len() - 1;
    let mut worst = 0.0f64;
    for n in PROBES {
        let h = h_of(n, coeffs).map_err(|e| e.to_string())?;
        let res = verify_equation_residual(h, n, p).abs();
        let tol = 10.0 * n.ln().powf((k as f64 + 2.0) * ratio - (k as f64 + 1.0));
        if res > tol {
            return Err(format!("|residual| {res:.3} > {tol:.3} at n = {n:.0e}"));
        }
        worst = worst.max(res / tol * 10.0);
    }
    let n = PROBES[2];
    let full = verify_equation_residual(h_of(n, coeffs).unwrap(), n, p).abs();
    let trunc =
        verify_equation_residual(h_of(n, &coeffs[..k]).map_err(|e| e.to_string())?, n, p).abs();
    if full >= trunc {
        return Err(format!(
            "full vector residual {full:.3} does not beat truncated {trunc:.3}"
        ));
    }
    Ok(worst)
}

fn check_recursion_bias() -> Result<String, String> {
    // (lambda, a, b, k) sets; embedded with s = 2, r = 2 lambda, delta = gamma = 0.
    let sets = [(0.4, 1.0, 1.0, 0usize), (0.6, 0.5, 1.0, 1), (0.75, 1.0, 0.5, 2)];
    let mut notes = Vec::new();
    for (lambda, a, b, k) in sets {
        let coeffs = bias_coefficients(lambda, a, b, k).map_err(|e| e.to_string())?;
        let anchor = -2.0 * a / (2.0 * b).powf(lambda);
        if coeffs[0] != anchor {
            return Err(format!("b_0 = {} is not exactly {anchor}", coeffs[0]));
        }
        let s = 2.0;
        let p = ProblemParams::from_exponents(0.0, lambda * s, a, 0.0, s, b, RiskKind::Mise);
        let al = alpha(&p);
        let worst = residual_criterion(&p, lambda, &coeffs, |n, c| {
            bias_dominant_bandwidth(n, al, s, b, lambda, c)
        })
        .map_err(|e| format!("(lambda={lambda}, k={k}): {e}"))?;
        notes.push(format!("k={k}: worst residual ratio {worst:.2}/10"));
    }
    Ok(notes.join("; "))
}

fn check_recursion_variance() -> Result<String, String> {
    // (mu, a, b, k) sets; embedded with r = 2, s = 2 mu, delta = gamma = 0.
    let sets = [(0.5, 1.0, 1.0, 0usize), (0.7, 1.0, 1.0, 1)];
    let mut notes = Vec::new();
    for (mu, a, b, k) in sets {
        let coeffs = variance_coefficients(mu, a, b, k).map_err(|e| e.to_string())?;
        let anchor = -2.0 * b / (2.0 * a).powf(mu);
        if coeffs[0] != anchor {
            return Err(format!("d_0 = {} is not exactly {anchor}", coeffs[0]));
        }
        let r = 2.0;
        let p = ProblemParams::from_exponents(0.0, r, a, 0.0, mu * r, b, RiskKind::Mise);
        let al = alpha(&p);
        let worst = residual_criterion(&p, mu, &coeffs, |n, c| {
            variance_dominant_bandwidth(n, al, r, a, mu, c)
        })
        .map_err(|e| format!("(mu={mu}, k={k}): {e}"))?;
        notes.push(format!("k={k}: worst residual ratio {worst:.2}/10"));
    }
    Ok(notes.join("; "))
}

fn check_equivalence() -> Result<String, String> {
    let signal = SignalModel::gaussian(1.0).unwrap();
    let l_m = 2.0;
    let h = 1.0 / (std::f64::consts::PI * l_m);
    let k_n = 4096;
    let xgrid = symmetric_uniform_grid(5.0, 1001);
    let mut notes = Vec::new();
    for noise in [NoiseModel::identity(), NoiseModel::laplace(1.0).unwrap()] {
        let y = sample_pair(&signal, &noise, 2000, 0x5eed_cafe)
            .map_err(|e| e.to_string())?
            .y;
        let kernel = kernel_deconv(&y, &KernelConfig { h }, &noise, &xgrid)
            .map_err(|e| e.to_string())?;
        let proj = projection_deconv(&y, &ProjectionConfig { l_m, k_n }, &noise, &xgrid)
            .map_err(|e| e.to_string())?;
        let sup = kernel
            .values
            .iter()
            .zip(&proj.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if sup > 1e-3 {
            return Err(format!("{} noise: sup difference {sup:.2e} > 1e-3", noise.name()));
        }
        notes.push(format!("{}: sup {sup:.1e}", noise.name()));
    }
    Ok(notes.join("; "))
}

fn check_fourier_identity() -> Result<String, String> {
    let signal = SignalModel::gaussian(1.0).unwrap();
    let noise = NoiseModel::laplace(1.0).unwrap();
    let h = 0.4;
    let mut worst = 0.0f64;
    for seed in [11u64, 22, 33, 44, 55] {
        let y = sample_pair(&signal, &noise, 400, seed)
            .map_err(|e| e.to_string())?
            .y;
        // Grid extends past the cutoff so the zero region is exercised too.
        let grid = FreqGrid::auto(2.0 / h, 5.0, 4096).map_err(|e| e.to_string())?;
        let spec = kernel_spectrum(&y, h, &noise, &grid).map_err(|e| e.to_string())?;
        for (t, v) in grid.nodes().iter().zip(&spec.values) {
            let want = if t.abs() <= 1.0 / h {
                ecf_at(&y, *t) / noise.cf(*t)
            } else {
                Complex64::new(0.0, 0.0)
            };
            let dev = (v - want).norm();
            if dev > 1e-8 {
                return Err(format!("seed {seed}, t = {t:.4}: deviation {dev:.2e} > 1e-8"));
            }
            worst = worst.max(dev);
        }
    }
    Ok(format!("5 seeds, worst deviation {worst:.1e}"))
}

fn check_rate_ordinary() -> Result<String, String> {
    // Laplace noise (gamma = 2) and Laplace signal (delta = 1.49): the MISE
    // slope over n should match -2 delta / (2 delta + 2 gamma + 1) = -0.374.
    let cfg = ExperimentConfig {
        signal: SignalModel::laplace(1.0).unwrap(),
        noise: NoiseModel::laplace(1.0).unwrap(),
        estimator: EstimatorChoice::Kernel,
        bandwidth: BandwidthRule::Numeric,
        n_grid: vec![250, 500, 1000, 2000, 4000],
        reps: 100,
        seed: 0xdeca_f001,
        risk: RiskKind::Mise,
        mse_point: 0.0,
        grid: GridSpec::Auto { points: 1024 },
    };
    let report = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let ns: Vec<f64> = report.rows.iter().map(|r| r.n as f64).collect();
    let risks: Vec<f64> = report.rows.iter().map(|r| r.risk_mean).collect();
    let fit = fit_loglog(&ns, &risks).map_err(|e| e.to_string())?;
    let want = -2.0 * 1.49 / (2.0 * 1.49 + 2.0 * 2.0 + 1.0);
    let err = (fit.slope - want).abs();
    if err > 0.15 {
        return Err(format!("slope {:.3} vs {want:.3} (err {err:.3} > 0.15)", fit.slope));
    }
    Ok(format!("slope {:.3} vs {want:.3} (r^2 {:.3})", fit.slope, fit.r_squared))
}

fn check_rate_supersmooth() -> Result<String, String> {
    // Gaussian signal through Gaussian noise (a = b = 1/2, r = s = 2):
    // after removing (ln n)^{-xi}, the slope over n should be -a/(a+b) = -1/2.
    let signal = SignalModel::gaussian(1.0).unwrap();
    let noise = NoiseModel::gaussian(1.0).unwrap();
    let cfg = ExperimentConfig {
        signal,
        noise,
        estimator: EstimatorChoice::Kernel,
        bandwidth: BandwidthRule::Numeric,
        n_grid: vec![500, 1000, 2000, 4000, 8000],
        reps: 100,
        seed: 0xdeca_f002,
        risk: RiskKind::Mise,
        mse_point: 0.0,
        grid: GridSpec::Auto { points: 1024 },
    };
    let p = ProblemParams::new(signal.smoothness, noise.smoothness, RiskKind::Mise);
    let xi = equal_xi(&p);
    let report = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let ns: Vec<f64> = report.rows.iter().map(|r| r.n as f64).collect();
    let adjusted: Vec<f64> = report
        .rows
        .iter()
        .map(|r| r.risk_mean * (r.n as f64).ln().powf(xi))
        .collect();
    let fit = fit_loglog(&ns, &adjusted).map_err(|e| e.to_string())?;
    let want = -0.5;
    let err = (fit.slope - want).abs();
    if err > 0.2 {
        return Err(format!("slope {:.3} vs {want:.3} (err {err:.3} > 0.2)", fit.slope));
    }
    Ok(format!(
        "xi = {xi:.3}; adjusted slope {:.3} vs {want:.1} (r^2 {:.3})",
        fit.slope, fit.r_squared
    ))
}

fn check_regime_partition() -> Result<String, String> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(314159);
    let mut cells = [0usize; 6];
    for _ in 0..10_000 {
        // Mix exact zeros in so every cell is reachable.
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 {
            if rng.random::<f64>() < 0.2 {
                0.0
            } else {
                rng.random::<f64>() * 5.0
            }
        };
        let r = draw(&mut rng);
        let s = draw(&mut rng);
        let p = ProblemParams::from_exponents(1.0, r, 0.7, 1.0, s, 0.9, RiskKind::Mise);
        let idx = match classify_regime(&p) {
            Regime::OrdinaryOrdinary => 0,
            Regime::OrdinarySuper => 1,
            Regime::SuperOrdinary => 2,
            Regime::Equal { .. } => 3,
            Regime::BiasDominant { lambda, k, .. } => {
                let (kf, k1) = (k as f64, k as f64 + 1.0);
                if !(lambda > kf / k1 && lambda <= k1 / (k1 + 1.0)) {
                    return Err(format!("lambda {lambda} escaped interval k={k}"));
                }
                4
            }
            Regime::VarianceDominant { mu, k, .. } => {
                let (kf, k1) = (k as f64, k as f64 + 1.0);
                if !(mu > kf / k1 && mu <= k1 / (k1 + 1.0)) {
                    return Err(format!("mu {mu} escaped interval k={k}"));
                }
                5
            }
        };
        cells[idx] += 1;
    }
    if cells.iter().any(|&c| c == 0) {
        return Err(format!("some cell never hit: {cells:?}"));
    }
    // Boundary ratios 1/2, 2/3, 3/4 must land on k = 0, 1, 2.
    for (r, s, want_k) in [(1.0, 2.0, 0usize), (2.0, 3.0, 1), (3.0, 4.0, 2)] {
        let p = ProblemParams::from_exponents(0.0, r, 1.0, 0.0, s, 1.0, RiskKind::Mise);
        match classify_regime(&p) {
            Regime::BiasDominant { k, .. } if k == want_k => {}
            other => return Err(format!("(r={r}, s={s}) gave {other:?}, want k={want_k}")),
        }
        let p = ProblemParams::from_exponents(0.0, s, 1.0, 0.0, r, 1.0, RiskKind::Mise);
        match classify_regime(&p) {
            Regime::VarianceDominant { k, .. } if k == want_k => {}
            other => return Err(format!("(r={s}, s={r}) gave {other:?}, want k={want_k}")),
        }
    }
    Ok(format!("10^4 pairs partitioned; cell counts {cells:?}"))
}

fn check_estimator_sanity() -> Result<String, String> {
    let signals = [
        SignalModel::gaussian(1.0).unwrap(),
        SignalModel::laplace(1.0).unwrap(),
        SignalModel::gaussian_mixture(1.0).unwrap(),
    ];
    let noises = [
        NoiseModel::identity(),
        NoiseModel::laplace(1.0).unwrap(),
        NoiseModel::gaussian(0.5).unwrap(),
    ];
    let n = 1000;
    let mut configs = 0;
    let mut worst_mass: f64 = 1.0;
    for signal in &signals {
        for noise in &noises {
            let p = ProblemParams::new(signal.smoothness, noise.smoothness, RiskKind::Mise);
            let h = numeric_bandwidth(n as f64, &p);
            let y = sample_pair(signal, noise, n, 0xab5_u64 + configs as u64)
                .map_err(|e| e.to_string())?
                .y;
            let xgrid = default_xgrid(signal.support_hint, 4.0 * h + 2.0, 2048);
            let est = kernel_deconv(&y, &KernelConfig { h }, noise, &xgrid)
                .map_err(|e| e.to_string())?;
            let tag = format!("{}+{}", signal.name(), noise.name());

            let mass = est.mass();
            if !(0.98..=1.02).contains(&mass) {
                return Err(format!("{tag}: mass {mass:.4} outside [0.98, 1.02]"));
            }
            worst_mass = if (worst_mass - 1.0).abs() < (mass - 1.0).abs() {
                mass
            } else {
                worst_mass
            };

            if est.meta.imag_residue > 1e-8 {
                return Err(format!("{tag}: imaginary residue {:.2e}", est.meta.imag_residue));
            }

            // Shift equivariance.
            let c = 0.6180339887;
            let y_shift: Vec<f64> = y.iter().map(|v| v + c).collect();
            let grid_shift: Vec<f64> = xgrid.iter().map(|v| v + c).collect();
            let shifted = kernel_deconv(&y_shift, &KernelConfig { h }, noise, &grid_shift)
                .map_err(|e| e.to_string())?;
            let sup = est
                .values
                .iter()
                .zip(&shifted.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if sup > 1e-8 {
                return Err(format!("{tag}: shift equivariance violated by {sup:.2e}"));
            }

            // Linearity in the sample.
            let (ya, yb) = y.split_at(n * 3 / 5);
            let ea = kernel_deconv(ya, &KernelConfig { h }, noise, &xgrid)
                .map_err(|e| e.to_string())?;
            let eb = kernel_deconv(yb, &KernelConfig { h }, noise, &xgrid)
                .map_err(|e| e.to_string())?;
            let (pw, qw) = (ya.len() as f64, yb.len() as f64);
            let sup = est
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    (v - (pw * ea.values[i] + qw * eb.values[i]) / (pw + qw)).abs()
                })
                .fold(0.0, f64::max);
            if sup > 1e-10 {
                return Err(format!("{tag}: sample linearity violated by {sup:.2e}"));
            }
            configs += 1;
        }
    }
    // One projection configuration through the same checks.
    let signal = &signals[1];
    let noise = &noises[0];
    let y = sample_pair(signal, noise, n, 0xf00d).map_err(|e| e.to_string())?.y;
    let xgrid = default_xgrid(signal.support_hint, 2.0, 2048);
    let est = projection_deconv(&y, &ProjectionConfig { l_m: 2.0, k_n: n }, noise, &xgrid)
        .map_err(|e| e.to_string())?;
    let mass = est.mass();
    if !(0.98..=1.02).contains(&mass) {
        return Err(format!("projection mass {mass:.4} outside [0.98, 1.02]"));
    }
    if est.meta.imag_residue > 1e-8 {
        return Err(format!("projection imaginary residue {:.2e}", est.meta.imag_residue));
    }
    configs += 1;
    Ok(format!("{configs} configs; worst mass {worst_mass:.4}"))
}

fn check_bandwidth_coherence() -> Result<String, String> {
    // Equal-regime parameter sets: (a, b, s, delta, gamma).
    let sets = [
        (0.5, 0.5, 2.0, 0.0, 0.0),
        (1.0, 0.5, 1.0, 0.5, 0.0),
        (0.5, 1.0, 2.0, 1.0, 0.5),
    ];
    let n = 1e8;
    let mut notes = Vec::new();
    for (a, b, s, delta, gamma) in sets {
        let p = ProblemParams::from_exponents(delta, s, a, gamma, s, b, RiskKind::Mise);
        let h_num = optimal_bandwidth(n, &p, BandwidthKind::Numeric).map_err(|e| e.to_string())?;
        let h_asy =
            optimal_bandwidth(n, &p, BandwidthKind::Asymptotic).map_err(|e| e.to_string())?;
        let ratio = h_num / h_asy;
        if !(0.8..=1.25).contains(&ratio) {
            return Err(format!(
                "(a={a}, b={b}, s={s}): ratio {ratio:.3} outside [0.8, 1.25]"
            ));
        }
        notes.push(format!("ratio {ratio:.3}"));
    }
    // Numeric argmin against an exhaustive scan.
    let p = ProblemParams::from_exponents(0.0, 2.0, 0.5, 0.0, 2.0, 0.5, RiskKind::Mise);
    let h = numeric_bandwidth(1e4, &p);
    let mut best = (f64::INFINITY, 0.0);
    let m = 100_000;
    for i in 0..m {
        let hh = 10f64.powf(-3.0 + 4.0 * i as f64 / (m - 1) as f64);
        let v = log_risk_bound(hh, 1e4, &p);
        if v < best.0 {
            best = (v, hh);
        }
    }
    let rel = (h - best.1).abs() / best.1;
    if rel > 0.01 {
        return Err(format!("argmin off exhaustive scan by {rel:.4} > 1%"));
    }
    Ok(format!("{}; argmin within {rel:.2e} of scan", notes.join(", ")))
}
