//! Risk bounds, regime classification, optimal bandwidths, and theoretical
//! convergence rates.
//!
//! The risk of both estimators is governed by a bias term
//! `h^{2 delta} exp(-2a/h^r)` and a variance term
//! `(h^{s-1-2 gamma}/n) exp(2b/h^s)`. Balancing them reduces to
//!
//! ```text
//! exp(2b/h^s + 2a/h^r) * h^alpha = n        (up to constants)
//! ```
//!
//! whose solution depends on how the signal exponent `r` compares with the
//! noise exponent `s`. When both are positive and different, the optimal
//! bandwidth carries a series of correction coefficients obtained by a
//! recursion that cancels the balance equation order by order in powers of
//! `ln n`; [`verify_equation_residual`] measures how well a candidate
//! bandwidth satisfies the equation and is the arbiter for those recursions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{NoiseSmoothness, SignalSmoothness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskKind {
    Mise,
    Mse,
}

/// Everything the rate theory needs: signal smoothness `(delta, r, a)`, noise
/// smoothness `(gamma, s, b)`, and which risk is being tracked.
#[derive(Debug, Clone, Copy)]
pub struct ProblemParams {
    pub signal: SignalSmoothness,
    pub noise: NoiseSmoothness,
    pub risk: RiskKind,
}

impl ProblemParams {
    pub fn new(signal: SignalSmoothness, noise: NoiseSmoothness, risk: RiskKind) -> Self {
        Self { signal, noise, risk }
    }

    /// Convenience constructor from bare exponents (class radius and sandwich
    /// constants play no role in rates).
    pub fn from_exponents(
        delta: f64,
        r: f64,
        a: f64,
        gamma: f64,
        s: f64,
        b: f64,
        risk: RiskKind,
    ) -> Self {
        Self {
            signal: SignalSmoothness { delta, r, a, l: 1.0 },
            noise: NoiseSmoothness { gamma, s, b, k0: 1.0, k1: 1.0 },
            risk,
        }
    }
}

/// The balance-equation exponent: `r - 2 delta - 2 gamma - 1` for the
/// integrated risk, `-2 delta - 2 gamma + (s-1)_+` for the pointwise risk.
pub fn alpha(p: &ProblemParams) -> f64 {
    let (delta, gamma) = (p.signal.delta, p.noise.gamma);
    match p.risk {
        RiskKind::Mise => p.signal.r - 2.0 * delta - 2.0 * gamma - 1.0,
        RiskKind::Mse => -2.0 * delta - 2.0 * gamma + (p.noise.s - 1.0).max(0.0),
    }
}

/// `2c / h^e`, with the `e = 0` convention that the term is the constant `2c`.
fn exp_term(c: f64, h: f64, e: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else if e == 0.0 {
        2.0 * c
    } else {
        2.0 * c / h.powf(e)
    }
}

/// `ln` of the risk-bound order expression (implicit constant 1), assembled in
/// log space so supersmooth terms cannot overflow.
pub fn log_risk_bound(h: f64, n: f64, p: &ProblemParams) -> f64 {
    let (delta, r, a) = (p.signal.delta, p.signal.r, p.signal.a);
    let (gamma, s, b) = (p.noise.gamma, p.noise.s, p.noise.b);
    let ln_h = h.ln();
    let (ln_bias, ln_var) = match p.risk {
        RiskKind::Mise => (
            2.0 * delta * ln_h - exp_term(a, h, r),
            (s - 1.0 - 2.0 * gamma) * ln_h - n.ln() + exp_term(b, h, s),
        ),
        RiskKind::Mse => (
            (2.0 * delta + r - 1.0) * ln_h - exp_term(a, h, r),
            ((s - 1.0) * ln_h).min(0.0) + (s - 1.0 - 2.0 * gamma) * ln_h - n.ln()
                + exp_term(b, h, s),
        ),
    };
    log_add_exp(ln_bias, ln_var)
}

/// Risk-bound order expression; saturates to infinity instead of overflowing.
pub fn risk_bound(h: f64, n: f64, p: &ProblemParams) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
    }
    let l = log_risk_bound(h, n, p);
    Ok(if l > 709.0 { f64::INFINITY } else { l.exp() })
}

fn log_add_exp(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// Rate regime over the smoothness exponents `(r, s)`.
///
/// `BiasDominant` covers `0 < r < s` (the bias exponential governs),
/// `VarianceDominant` covers `r > s > 0`. Both carry the interval index `k`
/// with `ratio` in `(k/(k+1), (k+1)/(k+2)]` and the correction coefficients of
/// that order.
#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    OrdinaryOrdinary,
    OrdinarySuper,
    SuperOrdinary,
    Equal { xi: f64 },
    BiasDominant { lambda: f64, k: usize, coeffs: Vec<f64> },
    VarianceDominant { mu: f64, k: usize, coeffs: Vec<f64> },
}

impl Regime {
    pub fn cell_name(&self) -> &'static str {
        match self {
            Regime::OrdinaryOrdinary => "ordinary/ordinary",
            Regime::OrdinarySuper => "ordinary/supersmooth",
            Regime::SuperOrdinary => "supersmooth/ordinary",
            Regime::Equal { .. } => "equal-exponents",
            Regime::BiasDominant { .. } => "bias-dominant",
            Regime::VarianceDominant { .. } => "variance-dominant",
        }
    }

    pub fn k(&self) -> Option<usize> {
        match self {
            Regime::BiasDominant { k, .. } | Regime::VarianceDominant { k, .. } => Some(*k),
            _ => None,
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        match self {
            Regime::BiasDominant { coeffs, .. } | Regime::VarianceDominant { coeffs, .. } => {
                coeffs
            }
            _ => &[],
        }
    }

    /// The ordinary/ordinary cell has no closed-form optimal bandwidth here;
    /// every other cell does.
    pub fn has_asymptotic_bandwidth(&self) -> bool {
        !matches!(self, Regime::OrdinaryOrdinary)
    }
}

/// Index `k` such that `ratio` lies in `(k/(k+1), (k+1)/(k+2)]`, for
/// `ratio` in `(0, 1)`. The right endpoint belongs to the interval.
pub fn interval_index(ratio: f64) -> usize {
    debug_assert!(ratio > 0.0 && ratio < 1.0);
    let t = ratio / (1.0 - ratio);
    let f = t.floor();
    if t == f {
        // ratio = m/(m+1) exactly: the left-open boundary pushes down to k = m-1.
        (f as usize).saturating_sub(1)
    } else {
        f as usize
    }
}

/// Equal-exponent log correction `xi = [2 delta b + (s - 2 gamma - 1) a] / [(a+b) s]`.
pub fn equal_xi(p: &ProblemParams) -> f64 {
    let (delta, a) = (p.signal.delta, p.signal.a);
    let (gamma, s, b) = (p.noise.gamma, p.noise.s, p.noise.b);
    (2.0 * delta * b + (s - 2.0 * gamma - 1.0) * a) / ((a + b) * s)
}

/// Classifies `(r, s)` into its rate cell and fills the cell's data.
///
/// A declared exponent with zero amplitude (`r > 0` with `a = 0`, or `s > 0`
/// with `b = 0`) carries no exponential decay, so it classifies as ordinary
/// smooth; the supersmooth formulas collapse to the same rates there.
pub fn classify_regime(p: &ProblemParams) -> Regime {
    let (r, a) = (p.signal.r, p.signal.a);
    let (s, b) = (p.noise.s, p.noise.b);
    match (r > 0.0 && a > 0.0, s > 0.0 && b > 0.0) {
        (false, false) => Regime::OrdinaryOrdinary,
        (false, true) => Regime::OrdinarySuper,
        (true, false) => Regime::SuperOrdinary,
        (true, true) => {
            if r == s {
                Regime::Equal { xi: equal_xi(p) }
            } else if r < s {
                let lambda = r / s;
                let k = interval_index(lambda);
                let coeffs = bias_coefficients(lambda, a, b, k)
                    .expect("valid lambda in (0,1) with b > 0");
                Regime::BiasDominant { lambda, k, coeffs }
            } else {
                let mu = s / r;
                let k = interval_index(mu);
                let coeffs = variance_coefficients(mu, a, b, k)
                    .expect("valid mu in (0,1) with a > 0");
                Regime::VarianceDominant { mu, k, coeffs }
            }
        }
    }
}

/// Falling-factorial binomial coefficient `x (x-1) ... (x-j+1) / j!`.
fn falling_binomial(x: f64, j: usize) -> f64 {
    let mut num = 1.0;
    let mut den = 1.0;
    for m in 0..j {
        num *= x - m as f64;
        den *= (m + 1) as f64;
    }
    num / den
}

/// Sum over ordered compositions `p_1 + ... + p_j = i` (positive parts) of
/// `v[p_1 - 1] * ... * v[p_j - 1]`.
fn composition_sum(i: usize, j: usize, v: &[f64]) -> f64 {
    if j == 1 {
        return v[i - 1];
    }
    let mut acc = 0.0;
    for p in 1..=(i - j + 1) {
        acc += v[p - 1] * composition_sum(i - p, j - 1, v);
    }
    acc
}

/// Shared correction recursion. With `c` the base amplitude, the coefficients
/// solve, order by order,
/// `v_i + c * sum_{j=1}^{i} binom(ratio, j) * comp_j(i) = 0`, starting from
/// `v_0 = -c`. Any truncation order `k` is accepted: shorter vectors cancel
/// fewer orders and leave a correspondingly larger equation residual.
fn correction_coefficients(ratio: f64, c: f64, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; k + 1];
    v[0] = -c;
    for i in 1..=k {
        let mut s = 0.0;
        for j in 1..=i {
            s += falling_binomial(ratio, j) * composition_sum(i, j, &v);
        }
        v[i] = -c * s;
    }
    v
}

/// Bias-dominant correction coefficients `b_0 ..= b_k` for `lambda = r/s`,
/// anchored at `b_0 = -2a / (2b)^lambda`.
pub fn bias_coefficients(lambda: f64, a: f64, b: f64, k: usize) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must lie in (0, 1), got {lambda}"
        )));
    }
    if !(b > 0.0) || a < 0.0 {
        return Err(Error::InvalidParameter("need b > 0 and a >= 0".into()));
    }
    Ok(correction_coefficients(lambda, 2.0 * a / (2.0 * b).powf(lambda), k))
}

/// Variance-dominant correction coefficients `d_0 ..= d_k` for `mu = s/r`:
/// the same recursion with the roles of `(a, r)` and `(b, s)` exchanged, so
/// `d_0 = -2b / (2a)^mu`. Correctness is pinned by the equation-residual
/// check rather than a printed formula.
pub fn variance_coefficients(mu: f64, a: f64, b: f64, k: usize) -> Result<Vec<f64>> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidParameter(format!("mu must lie in (0, 1), got {mu}")));
    }
    if !(a > 0.0) || b < 0.0 {
        return Err(Error::InvalidParameter("need a > 0 and b >= 0".into()));
    }
    Ok(correction_coefficients(mu, 2.0 * b / (2.0 * a).powf(mu), k))
}

/// Bias-dominant optimal bandwidth
/// `(2b)^{1/s} [ln n + (alpha/s) ln ln n + sum coeffs_i (ln n)^{(i+1)lambda - i}]^{-1/s}`.
/// Accepts any coefficient vector, including truncations.
pub fn bias_dominant_bandwidth(
    n: f64,
    alpha: f64,
    s: f64,
    b: f64,
    lambda: f64,
    coeffs: &[f64],
) -> Result<f64> {
    bracketed_bandwidth(n, alpha, s, 2.0 * b, lambda, coeffs)
}

/// Variance-dominant optimal bandwidth, mirrored:
/// `(2a)^{1/r} [ln n + (alpha/r) ln ln n + sum coeffs_i (ln n)^{(i+1)mu - i}]^{-1/r}`.
pub fn variance_dominant_bandwidth(
    n: f64,
    alpha: f64,
    r: f64,
    a: f64,
    mu: f64,
    coeffs: &[f64],
) -> Result<f64> {
    bracketed_bandwidth(n, alpha, r, 2.0 * a, mu, coeffs)
}

fn bracketed_bandwidth(
    n: f64,
    alpha: f64,
    exponent: f64,
    base: f64,
    ratio: f64,
    coeffs: &[f64],
) -> Result<f64> {
    let ln_n = n.ln();
    let mut bracket = ln_n + (alpha / exponent) * ln_n.ln();
    for (i, c) in coeffs.iter().enumerate() {
        let p = (i as f64 + 1.0) * ratio - i as f64;
        bracket += c * ln_n.powf(p);
    }
    if bracket <= 0.0 {
        return Err(Error::InfeasibleBandwidth { bracket, n });
    }
    Ok(base.powf(1.0 / exponent) * bracket.powf(-1.0 / exponent))
}

/// Which bandwidth rule to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandwidthKind {
    Numeric,
    Asymptotic,
}

/// A bandwidth selection rule: the numeric minimizer of the risk bound, the
/// regime's closed-form expression, or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum BandwidthRule {
    Numeric,
    Asymptotic,
    Fixed(f64),
}

impl BandwidthRule {
    pub fn h_star(&self, n: f64, p: &ProblemParams) -> Result<f64> {
        match self {
            BandwidthRule::Numeric => Ok(numeric_bandwidth(n, p)),
            BandwidthRule::Asymptotic => optimal_bandwidth(n, p, BandwidthKind::Asymptotic),
            BandwidthRule::Fixed(h) => {
                if *h > 0.0 {
                    Ok(*h)
                } else {
                    Err(Error::InvalidParameter(format!("fixed bandwidth must be positive, got {h}")))
                }
            }
        }
    }

    pub fn description(&self) -> String {
        match self {
            BandwidthRule::Numeric => "argmin of the risk bound (grid + golden section)".into(),
            BandwidthRule::Asymptotic => "closed-form optimal bandwidth for the regime".into(),
            BandwidthRule::Fixed(h) => format!("fixed h = {h}"),
        }
    }
}

/// Optimal bandwidth for sample size `n`.
///
/// `Numeric` scans 2000 log-spaced bandwidths and polishes the best bracket by
/// golden section. `Asymptotic` evaluates the regime's closed form; the
/// ordinary/ordinary cell has none and silently falls back to the numeric
/// answer (flagged via [`Regime::has_asymptotic_bandwidth`]).
pub fn optimal_bandwidth(n: f64, p: &ProblemParams, kind: BandwidthKind) -> Result<f64> {
    if !(n >= 3.0) {
        return Err(Error::InvalidParameter(format!("need n >= 3, got {n}")));
    }
    match kind {
        BandwidthKind::Numeric => Ok(numeric_bandwidth(n, p)),
        BandwidthKind::Asymptotic => {
            let al = alpha(p);
            let (a, b) = (p.signal.a, p.noise.b);
            let (r, s) = (p.signal.r, p.noise.s);
            match classify_regime(p) {
                Regime::OrdinaryOrdinary => Ok(numeric_bandwidth(n, p)),
                Regime::OrdinarySuper => bias_dominant_bandwidth(n, al, s, b, 0.5, &[]),
                Regime::SuperOrdinary => variance_dominant_bandwidth(n, al, r, a, 0.5, &[]),
                Regime::Equal { .. } => {
                    let ln_n = n.ln();
                    let bracket = ln_n + (al / s) * ln_n.ln();
                    if bracket <= 0.0 {
                        return Err(Error::InfeasibleBandwidth { bracket, n });
                    }
                    Ok((2.0 * a + 2.0 * b).powf(1.0 / s) * bracket.powf(-1.0 / s))
                }
                Regime::BiasDominant { lambda, coeffs, .. } => {
                    bias_dominant_bandwidth(n, al, s, b, lambda, &coeffs)
                }
                Regime::VarianceDominant { mu, coeffs, .. } => {
                    variance_dominant_bandwidth(n, al, r, a, mu, &coeffs)
                }
            }
        }
    }
}

/// Numeric bandwidth: coarse log-spaced scan refined by golden section, with
/// one bracket widening if the minimum sits on an edge.
pub fn numeric_bandwidth(n: f64, p: &ProblemParams) -> f64 {
    let (s, b) = (p.noise.s, p.noise.b);
    let mut h_lo = if s > 0.0 && b > 0.0 {
        (2.0 * b / n.ln()).powf(1.0 / s) / 10.0
    } else {
        1.0 / n
    };
    let mut h_hi = 10.0f64;
    let f = |h: f64| log_risk_bound(h, n, p);
    for attempt in 0..2 {
        let (u_lo, u_hi) = (h_lo.ln(), h_hi.ln());
        let m = 2000;
        let mut best = (f64::INFINITY, 0usize);
        for i in 0..m {
            let u = u_lo + (u_hi - u_lo) * i as f64 / (m - 1) as f64;
            let v = f(u.exp());
            if v < best.0 {
                best = (v, i);
            }
        }
        if (best.1 == 0 || best.1 == m - 1) && attempt == 0 {
            h_lo /= 10.0;
            h_hi *= 10.0;
            continue;
        }
        let du = (u_hi - u_lo) / (m - 1) as f64;
        let lo = u_lo + du * best.1.saturating_sub(1) as f64;
        let hi = u_lo + du * (best.1 + 1).min(m - 1) as f64;
        return golden_section(|u| f(u.exp()), lo, hi).exp();
    }
    unreachable!("the widened scan always returns");
}

/// Golden-section minimization on `[lo, hi]` to near machine precision.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..120 {
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Log-space residual of the balance equation:
/// `ln[exp(2b/h^s + 2a/h^r) h^alpha] - ln n`.
pub fn verify_equation_residual(h: f64, n: f64, p: &ProblemParams) -> f64 {
    let t_b = exp_term(p.noise.b, h, p.noise.s);
    let t_a = exp_term(p.signal.a, h, p.signal.r);
    t_b + t_a + alpha(p) * h.ln() - n.ln()
}

/// Theoretical rate of convergence (implicit constant 1) for the regime.
pub fn theoretical_rate(n: f64, p: &ProblemParams) -> f64 {
    log_theoretical_rate(n, p).exp()
}

/// `ln` of [`theoretical_rate`].
pub fn log_theoretical_rate(n: f64, p: &ProblemParams) -> f64 {
    let (delta, r, a) = (p.signal.delta, p.signal.r, p.signal.a);
    let (gamma, s, b) = (p.noise.gamma, p.noise.s, p.noise.b);
    let ln_n = n.ln();
    let lln = ln_n.ln();
    match classify_regime(p) {
        Regime::OrdinaryOrdinary => match p.risk {
            RiskKind::Mise => -2.0 * delta / (2.0 * delta + 2.0 * gamma + 1.0) * ln_n,
            RiskKind::Mse => (1.0 - 2.0 * delta) / (2.0 * delta + 2.0 * gamma) * ln_n,
        },
        Regime::OrdinarySuper => match p.risk {
            RiskKind::Mise => -2.0 * delta / s * lln,
            RiskKind::Mse => (1.0 - 2.0 * delta) / s * lln,
        },
        Regime::SuperOrdinary => (2.0 * gamma + 1.0) / r * lln - ln_n,
        Regime::Equal { xi } => {
            let power = -a / (a + b) * ln_n;
            match p.risk {
                RiskKind::Mise => power - xi * lln,
                RiskKind::Mse => {
                    power + (-xi + (1.0 - s).max(0.0) * b / ((a + b) * s)) * lln
                }
            }
        }
        Regime::BiasDominant { lambda, coeffs, .. } => {
            let corr: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * ln_n.powf((i as f64 + 1.0) * lambda - i as f64))
                .sum();
            match p.risk {
                RiskKind::Mise => -2.0 * delta / s * lln + corr,
                RiskKind::Mse => (-2.0 * delta - r + 1.0) / s * lln + corr,
            }
        }
        Regime::VarianceDominant { mu, coeffs, .. } => {
            let corr: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * ln_n.powf((i as f64 + 1.0) * mu - i as f64))
                .sum();
            let log_power = match p.risk {
                RiskKind::Mise => (1.0 + 2.0 * gamma - s) / r,
                RiskKind::Mse => (1.0 + 2.0 * gamma - s - (s - 1.0).max(0.0)) / r,
            };
            log_power * lln - ln_n - corr
        }
    }
}
