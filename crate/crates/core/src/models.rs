//! Catalog of noise and signal distributions with exact characteristic functions.
//!
//! Every model carries closed-form `cf` and `log_abs_cf` evaluators, a seeded
//! sampler, and its smoothness parameters: polynomial decay exponent `gamma`
//! and exponential decay `(s, b)` for noise, Sobolev exponent `delta` and
//! exponential decay `(r, a)` for signals. The decay parameters drive the
//! bandwidth and rate machinery in [`crate::rates`]; the membership reports
//! here verify numerically that each model matches what it declares.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Noise-side decay parameters: `|f*(t)|` is sandwiched between
/// `k0 (t^2+1)^{-gamma/2} exp(-b |t|^s)` and the same envelope with `k1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSmoothness {
    pub gamma: f64,
    pub s: f64,
    pub b: f64,
    pub k0: f64,
    pub k1: f64,
}

impl NoiseSmoothness {
    pub fn new(gamma: f64, s: f64, b: f64, k0: f64, k1: f64) -> Result<Self> {
        let sm = Self { gamma, s, b, k0, k1 };
        sm.validate(true)?;
        Ok(sm)
    }

    /// `strict` additionally requires `gamma > 0` when `s = 0`; the degenerate
    /// identity noise is the one catalog model exempt from that rule.
    pub fn validate(&self, strict: bool) -> Result<()> {
        if self.s < 0.0 || self.b < 0.0 {
            return Err(Error::InvalidParameter("s and b must be >= 0".into()));
        }
        if strict && self.s == 0.0 && self.gamma <= 0.0 {
            return Err(Error::InvalidParameter(
                "gamma must be > 0 when s = 0".into(),
            ));
        }
        if !(self.k0 > 0.0 && self.k1 >= self.k0) {
            return Err(Error::InvalidParameter("need 0 < k0 <= k1".into()));
        }
        Ok(())
    }

    /// log of the decay envelope `(t^2+1)^{-gamma/2} exp(-b |t|^s)`.
    pub fn log_envelope(&self, t: f64) -> f64 {
        let poly = -0.5 * self.gamma * (t * t + 1.0).ln();
        let exp = if self.s == 0.0 { -self.b } else { -self.b * t.abs().powf(self.s) };
        poly + exp
    }
}

/// Signal-side decay parameters. Membership in the smoothness class means
/// `integral of |g*(t)|^2 (t^2+1)^delta exp(2 a |t|^r) dt <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSmoothness {
    pub delta: f64,
    pub r: f64,
    pub a: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

impl SignalSmoothness {
    pub fn new(delta: f64, r: f64, a: f64, l: f64) -> Result<Self> {
        let sm = Self { delta, r, a, l };
        sm.validate()?;
        Ok(sm)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 0.0 || self.a < 0.0 {
            return Err(Error::InvalidParameter("r and a must be >= 0".into()));
        }
        if self.r == 0.0 && self.delta <= 0.5 {
            return Err(Error::InvalidParameter(
                "delta must be > 1/2 when r = 0".into(),
            ));
        }
        if !(self.l > 0.0) {
            return Err(Error::InvalidParameter("L must be > 0".into()));
        }
        Ok(())
    }
}

/// The open class boundary for the Laplace signal is `delta < 3/2`; we record
/// the boundary value minus this documented margin.
pub const LAPLACE_DELTA_MARGIN: f64 = 0.01;

/// Mixture component centers sit at `+- MIXTURE_SEPARATION * scale`.
pub const MIXTURE_SEPARATION: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NoiseKind {
    Gaussian,
    Laplace,
    Cauchy,
    Identity,
}

/// A noise distribution with exact characteristic function and sampler.
///
/// The characteristic function never vanishes, which is what makes the
/// deconvolution division well defined. `identity` is a degenerate test-only
/// model (`eps = 0`, `f* = 1`, no density) that flows through the same
/// formulas unchanged.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    kind: NoiseKind,
    scale: f64,
    pub smoothness: NoiseSmoothness,
    pub test_only: bool,
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        check_scale(sigma)?;
        Ok(Self {
            kind: NoiseKind::Gaussian,
            scale: sigma,
            smoothness: NoiseSmoothness::new(0.0, 2.0, sigma * sigma / 2.0, 1.0, 1.0)?,
            test_only: false,
        })
    }

    /// Laplace with density `exp(-|x|/sigma) / (2 sigma)`, cf `1/(1 + sigma^2 t^2)`.
    pub fn laplace(sigma: f64) -> Result<Self> {
        check_scale(sigma)?;
        let inv2 = 1.0 / (sigma * sigma);
        // |f*| / (t^2+1)^{-1} = (1+t^2)/(1+sigma^2 t^2) ranges between 1 and 1/sigma^2.
        let (k0, k1) = (inv2.min(1.0), inv2.max(1.0));
        Ok(Self {
            kind: NoiseKind::Laplace,
            scale: sigma,
            smoothness: NoiseSmoothness::new(2.0, 0.0, 0.0, k0, k1)?,
            test_only: false,
        })
    }

    pub fn cauchy(sigma: f64) -> Result<Self> {
        check_scale(sigma)?;
        Ok(Self {
            kind: NoiseKind::Cauchy,
            scale: sigma,
            smoothness: NoiseSmoothness::new(0.0, 1.0, sigma, 1.0, 1.0)?,
            test_only: false,
        })
    }

    /// Degenerate no-noise model: `eps = 0`, `f* = 1`. Useful as a control in
    /// tests because deconvolution reduces to plain density estimation.
    pub fn identity() -> Self {
        Self {
            kind: NoiseKind::Identity,
            scale: 1.0,
            smoothness: NoiseSmoothness {
                gamma: 0.0,
                s: 0.0,
                b: 0.0,
                k0: 1.0,
                k1: 1.0,
            },
            test_only: true,
        }
    }

    pub fn from_name(name: &str, scale: f64) -> Result<Self> {
        match name {
            "gaussian" => Self::gaussian(scale),
            "laplace" => Self::laplace(scale),
            "cauchy" => Self::cauchy(scale),
            "identity" => Ok(Self::identity()),
            _ => Err(Error::UnknownModel(name.into())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Laplace => "laplace",
            NoiseKind::Cauchy => "cauchy",
            NoiseKind::Identity => "identity",
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same model with the declared decay parameters replaced; the membership
    /// report is how a mismatch gets detected.
    pub fn with_smoothness(mut self, sm: NoiseSmoothness) -> Self {
        self.smoothness = sm;
        self
    }

    pub fn cf(&self, t: f64) -> Complex64 {
        Complex64::new(self.log_abs_cf(t).exp(), 0.0)
    }

    /// `ln |f*(t)|` in closed form; stays finite where the cf itself would
    /// underflow f64.
    pub fn log_abs_cf(&self, t: f64) -> f64 {
        let s = self.scale;
        match self.kind {
            NoiseKind::Gaussian => -0.5 * s * s * t * t,
            NoiseKind::Laplace => -(1.0 + s * s * t * t).ln(),
            NoiseKind::Cauchy => -s * t.abs(),
            NoiseKind::Identity => 0.0,
        }
    }

    pub fn density(&self, x: f64) -> Option<f64> {
        let s = self.scale;
        match self.kind {
            NoiseKind::Gaussian => Some(gaussian_pdf(x, 0.0, s)),
            NoiseKind::Laplace => Some((-x.abs() / s).exp() / (2.0 * s)),
            NoiseKind::Cauchy => Some(s / (std::f64::consts::PI * (x * x + s * s))),
            NoiseKind::Identity => None,
        }
    }

    pub fn sample_into<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        match self.kind {
            NoiseKind::Gaussian => {
                let d = Normal::new(0.0, self.scale).expect("valid scale");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            NoiseKind::Laplace => (0..n).map(|_| laplace_draw(self.scale, rng)).collect(),
            NoiseKind::Cauchy => {
                let d = Cauchy::new(0.0, self.scale).expect("valid scale");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            NoiseKind::Identity => vec![0.0; n],
        }
    }

    /// Grid for the envelope report, covering `[-50, 50]`.
    pub fn default_envelope_grid(&self) -> Vec<f64> {
        symmetric_uniform_grid(50.0, 2001)
    }

    /// Verifies `k0 <= |f*(t)| / envelope(t) <= k1` over `tgrid`, in log space
    /// so supersmooth tails do not underflow.
    pub fn envelope_report(&self, tgrid: &[f64]) -> EnvelopeReport {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &t in tgrid {
            let ratio = (self.log_abs_cf(t) - self.smoothness.log_envelope(t)).exp();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        let tol = 1e-9;
        EnvelopeReport {
            ok: lo >= self.smoothness.k0 * (1.0 - tol) && hi <= self.smoothness.k1 * (1.0 + tol),
            worst_ratio_low: lo,
            worst_ratio_high: hi,
        }
    }

    pub fn to_descriptor(&self) -> NoiseDescriptor {
        NoiseDescriptor {
            name: self.name().into(),
            scale: self.scale,
            smoothness: self.smoothness,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SignalKind {
    Gaussian,
    Laplace,
    Cauchy,
    GaussianMixture,
}

/// A target density with exact characteristic function, density, and sampler.
#[derive(Debug, Clone, Copy)]
pub struct SignalModel {
    kind: SignalKind,
    scale: f64,
    pub smoothness: SignalSmoothness,
    /// Interval holding all but at most 1e-6 of the probability mass.
    pub support_hint: (f64, f64),
}

impl SignalModel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        check_scale(sigma)?;
        let mut m = Self {
            kind: SignalKind::Gaussian,
            scale: sigma,
            smoothness: SignalSmoothness {
                delta: 0.0,
                r: 2.0,
                // Boundary value of the class scale: the integral is finite
                // exactly for a < sigma^2/2, and we record the supremum.
                a: sigma * sigma / 2.0,
                l: 1.0,
            },
            support_hint: (-8.0 * sigma, 8.0 * sigma),
        };
        m.smoothness.l = m.default_class_bound();
        Ok(m)
    }

    pub fn laplace(sigma: f64) -> Result<Self> {
        check_scale(sigma)?;
        let mut m = Self {
            kind: SignalKind::Laplace,
            scale: sigma,
            smoothness: SignalSmoothness {
                delta: 1.5 - LAPLACE_DELTA_MARGIN,
                r: 0.0,
                a: 0.0,
                l: 1.0,
            },
            support_hint: (-15.0 * sigma, 15.0 * sigma),
        };
        m.smoothness.l = m.default_class_bound();
        Ok(m)
    }

    pub fn cauchy(sigma: f64) -> Result<Self> {
        check_scale(sigma)?;
        let mut m = Self {
            kind: SignalKind::Cauchy,
            scale: sigma,
            smoothness: SignalSmoothness {
                delta: 0.0,
                r: 1.0,
                a: sigma,
                l: 1.0,
            },
            // Heavy tails: P(|X| > T) ~ 2 sigma / (pi T).
            support_hint: (-7e5 * sigma, 7e5 * sigma),
        };
        m.smoothness.l = m.default_class_bound();
        Ok(m)
    }

    /// Even two-component normal mixture with centers `+- 1.5 sigma` and common
    /// component width `sigma`; both components share (r, a), so the recorded
    /// class parameters equal the single Gaussian's.
    pub fn gaussian_mixture(sigma: f64) -> Result<Self> {
        check_scale(sigma)?;
        let c = MIXTURE_SEPARATION * sigma;
        let mut m = Self {
            kind: SignalKind::GaussianMixture,
            scale: sigma,
            smoothness: SignalSmoothness {
                delta: 0.0,
                r: 2.0,
                a: sigma * sigma / 2.0,
                l: 1.0,
            },
            support_hint: (-c - 8.0 * sigma, c + 8.0 * sigma),
        };
        m.smoothness.l = m.default_class_bound();
        Ok(m)
    }

    pub fn from_name(name: &str, scale: f64) -> Result<Self> {
        match name {
            "gaussian" => Self::gaussian(scale),
            "laplace" => Self::laplace(scale),
            "cauchy" => Self::cauchy(scale),
            "gaussian_mixture" => Self::gaussian_mixture(scale),
            _ => Err(Error::UnknownModel(name.into())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SignalKind::Gaussian => "gaussian",
            SignalKind::Laplace => "laplace",
            SignalKind::Cauchy => "cauchy",
            SignalKind::GaussianMixture => "gaussian_mixture",
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_smoothness(mut self, sm: SignalSmoothness) -> Self {
        self.smoothness = sm;
        self
    }

    pub fn cf(&self, t: f64) -> Complex64 {
        let s = self.scale;
        let re = match self.kind {
            SignalKind::Gaussian => (-0.5 * s * s * t * t).exp(),
            SignalKind::Laplace => 1.0 / (1.0 + s * s * t * t),
            SignalKind::Cauchy => (-s * t.abs()).exp(),
            SignalKind::GaussianMixture => {
                (MIXTURE_SEPARATION * s * t).cos() * (-0.5 * s * s * t * t).exp()
            }
        };
        Complex64::new(re, 0.0)
    }

    pub fn log_abs_cf(&self, t: f64) -> f64 {
        let s = self.scale;
        match self.kind {
            SignalKind::Gaussian => -0.5 * s * s * t * t,
            SignalKind::Laplace => -(1.0 + s * s * t * t).ln(),
            SignalKind::Cauchy => -s * t.abs(),
            SignalKind::GaussianMixture => {
                (MIXTURE_SEPARATION * s * t).cos().abs().ln() - 0.5 * s * s * t * t
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        let s = self.scale;
        match self.kind {
            SignalKind::Gaussian => gaussian_pdf(x, 0.0, s),
            SignalKind::Laplace => (-x.abs() / s).exp() / (2.0 * s),
            SignalKind::Cauchy => s / (std::f64::consts::PI * (x * x + s * s)),
            SignalKind::GaussianMixture => {
                let c = MIXTURE_SEPARATION * s;
                0.5 * gaussian_pdf(x, -c, s) + 0.5 * gaussian_pdf(x, c, s)
            }
        }
    }

    pub fn sample_into<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let s = self.scale;
        match self.kind {
            SignalKind::Gaussian => {
                let d = Normal::new(0.0, s).expect("valid scale");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            SignalKind::Laplace => (0..n).map(|_| laplace_draw(s, rng)).collect(),
            SignalKind::Cauchy => {
                let d = Cauchy::new(0.0, s).expect("valid scale");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            SignalKind::GaussianMixture => {
                let c = MIXTURE_SEPARATION * s;
                let d = Normal::new(0.0, s).expect("valid scale");
                (0..n)
                    .map(|_| {
                        let center = if rng.random::<bool>() { c } else { -c };
                        center + d.sample(rng)
                    })
                    .collect()
            }
        }
    }

    /// Symmetric grid covering the region where `|g*| > 1e-12`. Polynomially
    /// decaying cfs need a log-graded grid to reach that far while still
    /// resolving the origin.
    pub fn default_smoothness_grid(&self) -> Vec<f64> {
        let s = self.scale;
        match self.kind {
            SignalKind::Gaussian | SignalKind::GaussianMixture => {
                symmetric_uniform_grid(8.0 / s, 4001)
            }
            SignalKind::Cauchy => symmetric_uniform_grid(28.0 / s, 4001),
            SignalKind::Laplace => symmetric_graded_grid(1e-3, 1e6 / s, 1.001),
        }
    }

    /// Trapezoid estimate of the class integral
    /// `integral |g*|^2 (t^2+1)^delta exp(2 a |t|^r) dt`; `ok` iff it stays
    /// within the declared bound `L`. Integrand evaluated in log space.
    pub fn smoothness_report(&self, tgrid: &[f64]) -> SmoothnessReport {
        let est = self.class_integral(tgrid);
        SmoothnessReport {
            integral_estimate: est,
            ok: est <= self.smoothness.l,
        }
    }

    fn class_integral(&self, tgrid: &[f64]) -> f64 {
        let sm = &self.smoothness;
        let f = |t: f64| {
            let log_term = 2.0 * self.log_abs_cf(t)
                + sm.delta * (t * t + 1.0).ln()
                + if sm.r == 0.0 { 2.0 * sm.a } else { 2.0 * sm.a * t.abs().powf(sm.r) };
            log_term.exp()
        };
        trapezoid(tgrid, f)
    }

    /// `L` defaults to 10x the class integral on the default grid; it is
    /// carried for membership checks only and never enters estimation.
    fn default_class_bound(&self) -> f64 {
        let grid = self.default_smoothness_grid();
        let mut probe = *self;
        probe.smoothness.l = 1.0;
        10.0 * probe.class_integral(&grid)
    }

    pub fn to_descriptor(&self) -> SignalDescriptor {
        SignalDescriptor {
            name: self.name().into(),
            scale: self.scale,
            smoothness: self.smoothness,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnvelopeReport {
    pub ok: bool,
    pub worst_ratio_low: f64,
    pub worst_ratio_high: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SmoothnessReport {
    pub integral_estimate: f64,
    pub ok: bool,
}

/// JSON descriptor with the wire field names
/// `{"name", "scale", "smoothness": {"gamma", "s", "b", "k0", "k1"}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseDescriptor {
    pub name: String,
    pub scale: f64,
    pub smoothness: NoiseSmoothness,
}

/// JSON descriptor with the wire field names
/// `{"name", "scale", "smoothness": {"delta", "r", "a", "L"}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalDescriptor {
    pub name: String,
    pub scale: f64,
    pub smoothness: SignalSmoothness,
}

/// One draw of the observation model `Y = X + eps`.
#[derive(Debug, Clone)]
pub struct SamplePair {
    pub x: Vec<f64>,
    pub eps: Vec<f64>,
    pub y: Vec<f64>,
}

/// Samples `n` observations. The X-stream and eps-stream are independent
/// sub-streams of one seeded generator, so a given seed reproduces the same
/// prefix for any `n`.
pub fn sample_pair(
    signal: &SignalModel,
    noise: &NoiseModel,
    n: usize,
    seed: u64,
) -> Result<SamplePair> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng_x = ChaCha8Rng::seed_from_u64(seed);
    rng_x.set_stream(0);
    let mut rng_e = ChaCha8Rng::seed_from_u64(seed);
    rng_e.set_stream(1);
    let x = signal.sample_into(n, &mut rng_x);
    let eps = noise.sample_into(n, &mut rng_e);
    let y = x.iter().zip(&eps).map(|(a, b)| a + b).collect();
    Ok(SamplePair { x, eps, y })
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveScale(scale))
    }
}

fn gaussian_pdf(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

fn laplace_draw<R: Rng>(scale: f64, rng: &mut R) -> f64 {
    let v = rng.random::<f64>() - 0.5;
    let m = (1.0 - 2.0 * v.abs()).max(f64::MIN_POSITIVE);
    -scale * v.signum() * m.ln()
}

/// Uniform symmetric grid on `[-t_max, t_max]` with an odd point count, so 0
/// is a node and every node has its exact negative in the grid.
pub fn symmetric_uniform_grid(t_max: f64, n_points: usize) -> Vec<f64> {
    let n = if n_points % 2 == 0 { n_points + 1 } else { n_points };
    let half = n / 2;
    let dt = t_max / half as f64;
    let mut grid = vec![0.0; n];
    for i in 0..half {
        let t = t_max - i as f64 * dt;
        grid[i] = -t;
        grid[n - 1 - i] = t;
    }
    grid
}

/// Symmetric grid that is geometric from `t_min` out to `t_max` plus the
/// origin; suits integrands that need both resolution near 0 and long reach.
pub fn symmetric_graded_grid(t_min: f64, t_max: f64, ratio: f64) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min && ratio > 1.0);
    let mut pos = vec![t_min];
    while *pos.last().unwrap() < t_max {
        let next = pos.last().unwrap() * ratio;
        pos.push(next.min(t_max));
    }
    let mut grid = Vec::with_capacity(2 * pos.len() + 1);
    grid.extend(pos.iter().rev().map(|t| -t));
    grid.push(0.0);
    grid.extend(pos.iter());
    grid
}

/// Trapezoid rule on a (possibly non-uniform) sorted grid.
pub fn trapezoid(grid: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    let mut prev_t = grid[0];
    let mut prev_v = f(prev_t);
    for &t in &grid[1..] {
        let v = f(t);
        acc += 0.5 * (t - prev_t) * (v + prev_v);
        prev_t = t;
        prev_v = v;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_noise_cf_matches_analytic_form() {
        let m = NoiseModel::gaussian(1.0).unwrap();
        assert!((m.cf(1.0).re - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(m.cf(0.0).re, 1.0);
        let sm = m.smoothness;
        assert_eq!((sm.s, sm.b, sm.gamma), (2.0, 0.5, 0.0));
    }

    #[test]
    fn laplace_noise_declares_polynomial_decay() {
        let m = NoiseModel::laplace(1.0).unwrap();
        let sm = m.smoothness;
        assert_eq!((sm.s, sm.b, sm.gamma), (0.0, 0.0, 2.0));
        assert_eq!((sm.k0, sm.k1), (1.0, 1.0));
        assert!((m.cf(2.0).re - 0.2).abs() < 1e-15);
    }

    #[test]
    fn identity_noise_cf_is_one_everywhere() {
        let m = NoiseModel::identity();
        for t in [-40.0, -1.0, 0.0, 3.5, 100.0] {
            assert_eq!(m.cf(t).re, 1.0);
        }
        assert!(m.test_only);
    }

    #[test]
    fn unknown_model_and_bad_scale_are_rejected() {
        assert!(NoiseModel::from_name("uniform", 1.0).is_err());
        assert!(NoiseModel::from_name("gaussian", 0.0).is_err());
        assert!(SignalModel::from_name("beta", 1.0).is_err());
        assert!(SignalModel::from_name("gaussian", -2.0).is_err());
    }

    #[test]
    fn signal_cf_and_density_values() {
        let c = SignalModel::cauchy(1.0).unwrap();
        assert!((c.cf(2.0).re - (-2.0f64).exp()).abs() < 1e-15);
        let l = SignalModel::laplace(1.0).unwrap();
        assert_eq!(l.density(0.0), 0.5);
        assert!((l.smoothness.delta - 1.49).abs() < 1e-12);
        let g = SignalModel::gaussian(1.0).unwrap();
        assert_eq!((g.smoothness.r, g.smoothness.a), (2.0, 0.5));
    }

    #[test]
    fn envelope_report_accepts_all_builtins() {
        for m in [
            NoiseModel::gaussian(1.0).unwrap(),
            NoiseModel::gaussian(2.0).unwrap(),
            NoiseModel::laplace(1.0).unwrap(),
            NoiseModel::laplace(0.5).unwrap(),
            NoiseModel::cauchy(1.0).unwrap(),
            NoiseModel::identity(),
        ] {
            let rep = m.envelope_report(&m.default_envelope_grid());
            assert!(
                rep.ok,
                "{} sigma={} failed: low={} high={}",
                m.name(),
                m.scale(),
                rep.worst_ratio_low,
                rep.worst_ratio_high
            );
        }
    }

    #[test]
    fn envelope_report_rejects_wrong_gamma() {
        let m = NoiseModel::laplace(1.0).unwrap();
        let wrong = m.with_smoothness(NoiseSmoothness {
            gamma: 1.0,
            ..m.smoothness
        });
        let rep = wrong.envelope_report(&wrong.default_envelope_grid());
        assert!(!rep.ok, "ratio drifts like (t^2+1)^{{-1/2}}, got {rep:?}");
    }

    #[test]
    fn smoothness_report_accepts_all_builtins() {
        for m in [
            SignalModel::gaussian(1.0).unwrap(),
            SignalModel::laplace(1.0).unwrap(),
            SignalModel::cauchy(1.0).unwrap(),
            SignalModel::gaussian_mixture(1.0).unwrap(),
        ] {
            let rep = m.smoothness_report(&m.default_smoothness_grid());
            assert!(rep.ok, "{} failed: {rep:?}", m.name());
        }
    }

    #[test]
    fn laplace_class_integral_is_finite_below_the_boundary() {
        // Integrand (1+t^2)^{delta-2} with delta = 1.49 integrates to ~26;
        // well under an L of 100.
        let m = SignalModel::laplace(1.0).unwrap();
        let m = m.with_smoothness(SignalSmoothness {
            delta: 1.49,
            r: 0.0,
            a: 0.0,
            l: 100.0,
        });
        let rep = m.smoothness_report(&m.default_smoothness_grid());
        assert!(rep.ok);
        assert!(rep.integral_estimate > 10.0 && rep.integral_estimate < 50.0);
    }

    #[test]
    fn laplace_class_integral_diverges_at_delta_two() {
        // Integrand becomes (1+t^2)^0 = 1: the estimate grows linearly with
        // the grid reach instead of converging.
        let m = SignalModel::laplace(1.0).unwrap().with_smoothness(SignalSmoothness {
            delta: 2.0,
            r: 0.0,
            a: 0.0,
            l: 1000.0,
        });
        let g1 = symmetric_graded_grid(1e-3, 1e4, 1.001);
        let g2 = symmetric_graded_grid(1e-3, 2e4, 1.001);
        let e1 = m.smoothness_report(&g1).integral_estimate;
        let e2 = m.smoothness_report(&g2).integral_estimate;
        assert!(e2 > 1.8 * e1, "doubling the reach should double the integral");
        let wide = m.smoothness_report(&m.default_smoothness_grid());
        assert!(!wide.ok);
    }

    #[test]
    fn gaussian_class_integral_with_interior_a_matches_quadrature() {
        // a = 1/4 < 1/2: integral of exp(-t^2) exp(t^2/2) = sqrt(2 pi).
        let m = SignalModel::gaussian(1.0).unwrap().with_smoothness(SignalSmoothness {
            delta: 0.0,
            r: 2.0,
            a: 0.25,
            l: 10.0,
        });
        let rep = m.smoothness_report(&symmetric_uniform_grid(12.0, 8001));
        let expected = (2.0 * std::f64::consts::PI).sqrt();
        assert!((rep.integral_estimate - expected).abs() < 1e-6);
        assert!(rep.ok);
    }

    #[test]
    fn sample_pair_identity_noise_returns_x_exactly() {
        let sig = SignalModel::gaussian(1.0).unwrap();
        let p = sample_pair(&sig, &NoiseModel::identity(), 100, 7).unwrap();
        assert_eq!(p.x, p.y);
        assert!(p.eps.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn sample_pair_is_deterministic_and_prefix_stable() {
        let sig = SignalModel::laplace(1.0).unwrap();
        let noise = NoiseModel::gaussian(0.5).unwrap();
        let a = sample_pair(&sig, &noise, 50, 42).unwrap();
        let b = sample_pair(&sig, &noise, 50, 42).unwrap();
        assert_eq!(a.y, b.y);
        let longer = sample_pair(&sig, &noise, 80, 42).unwrap();
        assert_eq!(&longer.y[..50], &a.y[..]);
        assert!(sample_pair(&sig, &noise, 0, 1).is_err());
    }

    #[test]
    fn sample_pair_moments_match_convolution() {
        let sig = SignalModel::gaussian(1.0).unwrap();
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let n = 100_000;
        let p = sample_pair(&sig, &noise, n, 2024).unwrap();
        let mean = p.y.iter().sum::<f64>() / n as f64;
        let var = p.y.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (n - 1) as f64;
        // Var(Y) = 1 + 1 = 2; the spread of the sample variance here is ~0.009.
        assert!((var - 2.0).abs() < 0.1, "var = {var}");
        let se_mean = (2.0 / n as f64).sqrt();
        assert!(mean.abs() < 4.0 * se_mean, "mean = {mean}");
    }

    #[test]
    fn descriptor_json_uses_fixed_field_names() {
        let noise = NoiseModel::laplace(1.0).unwrap();
        let j = serde_json::to_value(noise.to_descriptor()).unwrap();
        for key in ["gamma", "s", "b", "k0", "k1"] {
            assert!(j["smoothness"].get(key).is_some(), "missing {key}");
        }
        let sig = SignalModel::gaussian(2.0).unwrap();
        let j = serde_json::to_value(sig.to_descriptor()).unwrap();
        for key in ["delta", "r", "a", "L"] {
            assert!(j["smoothness"].get(key).is_some(), "missing {key}");
        }
        let back: SignalDescriptor = serde_json::from_value(j).unwrap();
        assert_eq!(back.name, "gaussian");
        assert_eq!(back.smoothness.a, 2.0);
    }
}
