//! The two deconvolution estimators.
//!
//! The kernel estimator `(1/nh) sum K((x - Y_i)/h)` is computed in the Fourier
//! domain: its transform is exactly `ecf(t) 1_{|t| <= 1/h} / f*(t)`, so one
//! inverse grid transform evaluates it everywhere at once. The direct
//! convolution form stays available in tests as an oracle.
//!
//! The projection estimator expands the same spectral information in the
//! band-limited sinc basis `phi_{m,j}(x) = sqrt(L_m) phi(L_m x - j)`,
//! `phi(u) = sin(pi u)/(pi u)`, with coefficients obtained by quadrature over
//! the basis band `[-pi L_m, pi L_m]`. With `h = 1/(pi L_m)` and a generous
//! coefficient cutoff the two estimators agree up to truncation error.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::NoiseModel;
use crate::spectral::{
    ecf, guard_band, inverse_fourier_grid_detailed, FreqGrid, SpectrumValues, MIN_FREQ_POINTS,
};

/// Kernel estimator configuration: the bandwidth.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelConfig {
    pub h: f64,
}

/// Projection estimator configuration: resolution `L_m` and coefficient
/// cutoff `|j| <= k_n`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProjectionConfig {
    pub l_m: f64,
    pub k_n: usize,
}

impl ProjectionConfig {
    /// Default coefficient cutoff: `k_n = n`. The growth rate is not pinned by
    /// theory here; the truncation-stability tests guard the choice.
    pub fn default_k_n(n: usize) -> usize {
        n.max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Kernel,
    Projection,
}

/// Provenance carried alongside the estimated values.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateMeta {
    pub estimator: EstimatorKind,
    pub n: usize,
    pub noise: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_n: Option<usize>,
    /// Imaginary residue discarded when the estimate was made real.
    pub imag_residue: f64,
}

/// A density estimate on an x-grid. Values may dip below zero; band-limiting
/// permits small negativity and the risk accounting works on the raw values.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    pub xgrid: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: EstimateMeta,
}

impl DensityEstimate {
    /// Trapezoid mass over the estimate's own grid.
    pub fn mass(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.xgrid.len() {
            acc += 0.5 * (self.xgrid[i] - self.xgrid[i - 1]) * (self.values[i] + self.values[i - 1]);
        }
        acc
    }

    /// Linear interpolation inside the grid.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        let (lo, hi) = (self.xgrid[0], *self.xgrid.last().unwrap());
        if x < lo || x > hi {
            return Err(Error::GridCoverage {
                got_lo: lo,
                got_hi: hi,
                need_lo: x,
                need_hi: x,
            });
        }
        let idx = match self.xgrid.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => return Ok(self.values[i]),
            Err(i) => i,
        };
        let (x0, x1) = (self.xgrid[idx - 1], self.xgrid[idx]);
        let w = (x - x0) / (x1 - x0);
        Ok(self.values[idx - 1] * (1.0 - w) + self.values[idx] * w)
    }

    /// Optional post-processing: clamp negative values to zero.
    pub fn clip_nonnegative(mut self) -> Self {
        for v in &mut self.values {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        self
    }

    /// CSV with header `x,ghat`, 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,ghat\n");
        for (x, v) in self.xgrid.iter().zip(&self.values) {
            out.push_str(&format!("{x:.16e},{v:.16e}\n"));
        }
        out
    }
}

/// Uniform grid with `n` points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && b > a);
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + i as f64 * step).collect()
}

/// Default evaluation grid: the signal's support hint widened by `widen` on
/// both sides (use `4h` or `4/(pi L_m)` to cover kernel spill-over).
pub fn default_xgrid(support_hint: (f64, f64), widen: f64, points: usize) -> Vec<f64> {
    linspace(support_hint.0 - widen, support_hint.1 + widen, points)
}

/// Spectrum of the kernel estimate on an arbitrary frequency grid:
/// `ecf(t) / f*(t)` inside the cutoff `|t| <= 1/h`, zero outside.
pub fn kernel_spectrum(
    sample: &[f64],
    h: f64,
    noise: &NoiseModel,
    grid: &FreqGrid,
) -> Result<SpectrumValues> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
    }
    let cutoff = 1.0 / h;
    guard_band(noise, cutoff.min(grid.t_max()), h)?;
    let mut spec = ecf(sample, grid)?;
    let band = cutoff * (1.0 + 1e-12);
    for (t, v) in grid.nodes().iter().zip(spec.values.iter_mut()) {
        if t.abs() <= band {
            *v /= noise.cf(*t);
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    Ok(spec)
}

/// Fourier-cutoff kernel deconvolution estimator on `xgrid`.
pub fn kernel_deconv(
    sample: &[f64],
    cfg: &KernelConfig,
    noise: &NoiseModel,
    xgrid: &[f64],
) -> Result<DensityEstimate> {
    let x_absmax = xgrid.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let grid = FreqGrid::auto(1.0 / cfg.h, x_absmax, MIN_FREQ_POINTS)?;
    let spec = kernel_spectrum(sample, cfg.h, noise, &grid)?;
    let (values, residue) = inverse_fourier_grid_detailed(&spec, xgrid)?;
    Ok(DensityEstimate {
        xgrid: xgrid.to_vec(),
        values,
        meta: EstimateMeta {
            estimator: EstimatorKind::Kernel,
            n: sample.len(),
            noise: noise.name().into(),
            h: Some(cfg.h),
            l_m: None,
            k_n: None,
            imag_residue: residue,
        },
    })
}

/// `phi(u) = sin(pi u)/(pi u)`.
pub fn sinc_basis(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0
    } else {
        (std::f64::consts::PI * u).sin() / (std::f64::consts::PI * u)
    }
}

fn projection_quadrature_grid(l_m: f64, k_n: usize) -> Result<FreqGrid> {
    // Fastest oscillation in the coefficient integral is e^{-i k_n t / L_m};
    // 8 nodes per period keeps the trapezoid error well under the truncation
    // error of the expansion itself.
    let min_pts = (8 * k_n.max(1)).next_power_of_two().max(MIN_FREQ_POINTS);
    FreqGrid::auto(std::f64::consts::PI * l_m, k_n as f64 / l_m, min_pts)
}

/// All projection coefficients for `|j| <= k_n`, plus the worst imaginary
/// residue dropped when making them real. Index `j` lives at `j + k_n`.
pub fn projection_coefficients(
    sample: &[f64],
    l_m: f64,
    k_n: usize,
    noise: &NoiseModel,
) -> Result<(Vec<f64>, f64)> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(l_m > 0.0) {
        return Err(Error::InvalidParameter(format!("L_m must be positive, got {l_m}")));
    }
    let grid = projection_quadrature_grid(l_m, k_n)?;
    let band = std::f64::consts::PI * l_m;
    guard_band(noise, band, 1.0 / band)?;
    let spec = ecf(sample, &grid)?;
    // Shared integrand ecf(t)/f*(t) with trapezoid end weights folded in.
    let nodes = grid.nodes();
    let n_nodes = nodes.len();
    let weighted: Vec<Complex64> = spec
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = if i == 0 || i == n_nodes - 1 { 0.5 } else { 1.0 };
            w * v / noise.cf(nodes[i])
        })
        .collect();
    let dt = grid.spacing();
    let scale = dt / (2.0 * std::f64::consts::PI * l_m.sqrt());
    let raw: Vec<Complex64> = (0..=2 * k_n)
        .into_par_iter()
        .map(|idx| {
            let j = idx as i64 - k_n as i64;
            let freq = -(j as f64) / l_m;
            let step = Complex64::from_polar(1.0, freq * dt);
            let mut phase = Complex64::from_polar(1.0, freq * nodes[0]);
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, g) in weighted.iter().enumerate() {
                // Resync the phase recurrence now and then to stop drift.
                if i % 1024 == 0 {
                    phase = Complex64::from_polar(1.0, freq * nodes[i]);
                }
                acc += g * phase;
                phase *= step;
            }
            acc * scale
        })
        .collect();
    let max_re = raw.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let residue = raw.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / (1.0 + max_re);
    Ok((raw.into_iter().map(|v| v.re).collect(), residue))
}

/// Single projection coefficient `a_{m,j}`.
pub fn projection_coefficient(
    sample: &[f64],
    l_m: f64,
    j: i64,
    noise: &NoiseModel,
) -> Result<f64> {
    let k = j.unsigned_abs() as usize;
    let (coeffs, _) = projection_coefficients(sample, l_m, k, noise)?;
    Ok(coeffs[(j + k as i64) as usize])
}

/// Synthesis `sum_{|j| <= k_n} c_j phi_{m,j}(x)` on `xgrid`. `coeffs` holds
/// `j = -k_n ..= k_n` in order.
pub fn synthesize_projection(coeffs: &[f64], l_m: f64, xgrid: &[f64]) -> Vec<f64> {
    assert!(coeffs.len() % 2 == 1, "coefficients must cover j = -k..=k");
    let k_n = (coeffs.len() - 1) / 2;
    let root = l_m.sqrt();
    xgrid
        .par_iter()
        .map(|&x| {
            let u0 = l_m * x;
            // sin(pi(u0 - j)) = (-1)^j sin(pi u0): one sine per x, then a
            // division per coefficient.
            let s = (std::f64::consts::PI * u0).sin();
            let mut acc = 0.0;
            for (idx, c) in coeffs.iter().enumerate() {
                let j = idx as i64 - k_n as i64;
                let u = u0 - j as f64;
                let phi = if u.abs() < 1e-8 {
                    1.0
                } else {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    sign * s / (std::f64::consts::PI * u)
                };
                acc += c * phi;
            }
            acc * root
        })
        .collect()
}

/// Sinc-projection deconvolution estimator on `xgrid`.
pub fn projection_deconv(
    sample: &[f64],
    cfg: &ProjectionConfig,
    noise: &NoiseModel,
    xgrid: &[f64],
) -> Result<DensityEstimate> {
    let (coeffs, residue) = projection_coefficients(sample, cfg.l_m, cfg.k_n, noise)?;
    let values = synthesize_projection(&coeffs, cfg.l_m, xgrid);
    Ok(DensityEstimate {
        xgrid: xgrid.to_vec(),
        values,
        meta: EstimateMeta {
            estimator: EstimatorKind::Projection,
            n: sample.len(),
            noise: noise.name().into(),
            h: None,
            l_m: Some(cfg.l_m),
            k_n: Some(cfg.k_n),
            imag_residue: residue,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{sample_pair, symmetric_uniform_grid, NoiseModel, SignalModel};

    fn ise_against(est: &DensityEstimate, truth: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 1..est.xgrid.len() {
            let d0 = est.values[i - 1] - truth(est.xgrid[i - 1]);
            let d1 = est.values[i] - truth(est.xgrid[i]);
            acc += 0.5 * (est.xgrid[i] - est.xgrid[i - 1]) * (d0 * d0 + d1 * d1);
        }
        acc
    }

    #[test]
    fn kernel_single_point_identity_noise() {
        let est = kernel_deconv(
            &[0.0],
            &KernelConfig { h: 1.0 },
            &NoiseModel::identity(),
            &symmetric_uniform_grid(5.0, 101),
        )
        .unwrap();
        let at_zero = est.value_at(0.0).unwrap();
        assert!((at_zero - 1.0 / std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn kernel_matches_direct_convolution_sum() {
        // With identity noise K(u) = sin(u)/(pi u); the direct sum is the oracle.
        let sig = SignalModel::gaussian(1.0).unwrap();
        let y = sample_pair(&sig, &NoiseModel::identity(), 25, 99).unwrap().y;
        let h = 0.7;
        let xgrid = symmetric_uniform_grid(6.0, 201);
        let est = kernel_deconv(&y, &KernelConfig { h }, &NoiseModel::identity(), &xgrid).unwrap();
        for (x, v) in xgrid.iter().zip(&est.values) {
            let direct: f64 = y
                .iter()
                .map(|yi| {
                    let u = (x - yi) / h;
                    if u.abs() < 1e-12 {
                        1.0 / std::f64::consts::PI
                    } else {
                        u.sin() / (std::f64::consts::PI * u)
                    }
                })
                .sum::<f64>()
                / (y.len() as f64 * h);
            assert!((v - direct).abs() < 1e-6, "x={x}: {v} vs {direct}");
        }
    }

    #[test]
    fn kernel_recovers_gaussian_through_gaussian_noise() {
        let sig = SignalModel::gaussian(1.0).unwrap();
        let noise = NoiseModel::gaussian(0.5).unwrap();
        let y = sample_pair(&sig, &noise, 2000, 4242).unwrap().y;
        let xgrid = default_xgrid(sig.support_hint, 4.0 * 0.45, 1024);
        let est = kernel_deconv(&y, &KernelConfig { h: 0.45 }, &noise, &xgrid).unwrap();
        let ise = ise_against(&est, |x| sig.density(x));
        assert!(ise < 0.05, "ise = {ise}");
        assert!(est.mass() > 0.9 && est.mass() < 1.1, "mass = {}", est.mass());
    }

    #[test]
    fn kernel_propagates_bandwidth_guard() {
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let r = kernel_deconv(&[0.1], &KernelConfig { h: 0.01 }, &noise, &[0.0, 1.0]);
        assert!(matches!(r, Err(Error::BandwidthTooSmall { .. })));
        let r = kernel_deconv(&[], &KernelConfig { h: 0.5 }, &noise, &[0.0, 1.0]);
        assert!(matches!(r, Err(Error::EmptySample)));
    }

    #[test]
    fn projection_coefficient_identity_noise_equals_basis_average() {
        // With f* = 1 the defining integral inverts to (1/n) sum phi_{m,j}(Y_i).
        let sig = SignalModel::gaussian(1.0).unwrap();
        let y = sample_pair(&sig, &NoiseModel::identity(), 50, 5).unwrap().y;
        let l_m = 1.5;
        for j in [-3i64, 0, 5] {
            let got = projection_coefficient(&y, l_m, j, &NoiseModel::identity()).unwrap();
            let want: f64 = y
                .iter()
                .map(|&yi| l_m.sqrt() * sinc_basis(l_m * yi - j as f64))
                .sum::<f64>()
                / y.len() as f64;
            assert!((got - want).abs() < 1e-6, "j={j}: {got} vs {want}");
        }
    }

    #[test]
    fn projection_coefficient_point_mass_at_zero() {
        let got = projection_coefficient(&[0.0], 1.0, 0, &NoiseModel::identity()).unwrap();
        assert!((got - 1.0).abs() < 1e-9);
    }

    #[test]
    fn projection_coefficients_are_real() {
        let sig = SignalModel::laplace(1.0).unwrap();
        let noise = NoiseModel::laplace(1.0).unwrap();
        let y = sample_pair(&sig, &noise, 200, 17).unwrap().y;
        let (_, residue) = projection_coefficients(&y, 2.0, 128, &noise).unwrap();
        assert!(residue < 1e-10, "residue = {residue}");
    }

    #[test]
    fn zero_coefficients_synthesize_to_zero() {
        let xgrid = symmetric_uniform_grid(3.0, 51);
        let values = synthesize_projection(&vec![0.0; 65], 2.0, &xgrid);
        assert!(values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn synthesis_interpolates_shannon_samples() {
        // At x = j / L_m only the j-th basis function is nonzero.
        let l_m = 2.0;
        let mut coeffs = vec![0.0; 9];
        coeffs[4 + 1] = 0.3; // j = 1
        let values = synthesize_projection(&coeffs, l_m, &[0.5, 0.0]);
        assert!((values[0] - 0.3 * l_m.sqrt()).abs() < 1e-12);
        assert!(values[1].abs() < 1e-12);
    }

    #[test]
    fn projection_tracks_kernel_estimate() {
        // Same band: h = 1/(pi L_m); truncation at k_n = 512 is plenty at n = 200.
        let sig = SignalModel::gaussian(1.0).unwrap();
        let y = sample_pair(&sig, &NoiseModel::identity(), 200, 31).unwrap().y;
        let l_m = 2.0;
        let h = 1.0 / (std::f64::consts::PI * l_m);
        let xgrid = symmetric_uniform_grid(5.0, 301);
        let kernel =
            kernel_deconv(&y, &KernelConfig { h }, &NoiseModel::identity(), &xgrid).unwrap();
        let proj = projection_deconv(
            &y,
            &ProjectionConfig { l_m, k_n: 512 },
            &NoiseModel::identity(),
            &xgrid,
        )
        .unwrap();
        let sup = kernel
            .values
            .iter()
            .zip(&proj.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-3, "sup diff {sup}");
    }

    #[test]
    fn projection_recovers_laplace_density() {
        let sig = SignalModel::laplace(1.0).unwrap();
        let y = sample_pair(&sig, &NoiseModel::identity(), 2000, 77).unwrap().y;
        let xgrid = symmetric_uniform_grid(16.0, 1025);
        let est = projection_deconv(
            &y,
            &ProjectionConfig { l_m: 2.0, k_n: 64 },
            &NoiseModel::identity(),
            &xgrid,
        )
        .unwrap();
        let ise = ise_against(&est, |x| sig.density(x));
        assert!(ise < 0.05, "ise = {ise}");
    }

    #[test]
    fn doubling_the_coefficient_cutoff_changes_nothing() {
        // Unit-scale version with identity noise; the acceptance-scale
        // configuration is covered in the integration invariants.
        let sig = SignalModel::gaussian(1.0).unwrap();
        let noise = NoiseModel::identity();
        let y = sample_pair(&sig, &noise, 300, 13).unwrap().y;
        let xgrid = symmetric_uniform_grid(5.0, 201);
        let base = projection_deconv(&y, &ProjectionConfig { l_m: 2.0, k_n: 600 }, &noise, &xgrid)
            .unwrap();
        let doubled =
            projection_deconv(&y, &ProjectionConfig { l_m: 2.0, k_n: 1200 }, &noise, &xgrid)
                .unwrap();
        let sup = base
            .values
            .iter()
            .zip(&doubled.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-4, "sup diff {sup}");
    }

    #[test]
    fn kernel_estimate_spectrum_identity() {
        use rand::SeedableRng;
        let sig = SignalModel::gaussian(1.0).unwrap();
        let noise = NoiseModel::laplace(1.0).unwrap();
        let mut seeds = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2 {
            let seed = rand::RngCore::next_u64(&mut seeds);
            let y = sample_pair(&sig, &noise, 400, seed).unwrap().y;
            let h = 0.4;
            let wide = FreqGrid::auto(2.0 / h, 5.0, 4096).unwrap();
            let spec = kernel_spectrum(&y, h, &noise, &wide).unwrap();
            for (t, v) in wide.nodes().iter().zip(&spec.values) {
                let want = if t.abs() <= 1.0 / h {
                    crate::spectral::ecf_at(&y, *t) / noise.cf(*t)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((v - want).norm() < 1e-8, "t={t}");
            }
        }
    }

    #[test]
    fn shift_equivariance_and_linearity() {
        let sig = SignalModel::gaussian(1.0).unwrap();
        let noise = NoiseModel::laplace(1.0).unwrap();
        let y = sample_pair(&sig, &noise, 500, 8).unwrap().y;
        let h = 0.35;
        let xgrid = symmetric_uniform_grid(5.0, 129);

        let base = kernel_deconv(&y, &KernelConfig { h }, &noise, &xgrid).unwrap();
        let c = 0.7;
        let shifted_sample: Vec<f64> = y.iter().map(|v| v + c).collect();
        let shifted_grid: Vec<f64> = xgrid.iter().map(|v| v + c).collect();
        let shifted =
            kernel_deconv(&shifted_sample, &KernelConfig { h }, &noise, &shifted_grid).unwrap();
        let sup = base
            .values
            .iter()
            .zip(&shifted.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-8, "shift equivariance violated by {sup}");

        let (a_part, b_part) = y.split_at(300);
        let est_a = kernel_deconv(a_part, &KernelConfig { h }, &noise, &xgrid).unwrap();
        let est_b = kernel_deconv(b_part, &KernelConfig { h }, &noise, &xgrid).unwrap();
        let (p, q) = (a_part.len() as f64, b_part.len() as f64);
        let sup = base
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let mix = (p * est_a.values[i] + q * est_b.values[i]) / (p + q);
                (v - mix).abs()
            })
            .fold(0.0, f64::max);
        assert!(sup < 1e-10, "linearity violated by {sup}");
    }

    #[test]
    fn csv_round_trip() {
        let est = DensityEstimate {
            xgrid: vec![-1.0, 0.0, 1.0],
            values: vec![0.1, 0.5, 0.1],
            meta: EstimateMeta {
                estimator: EstimatorKind::Kernel,
                n: 3,
                noise: "identity".into(),
                h: Some(0.5),
                l_m: None,
                k_n: None,
                imag_residue: 0.0,
            },
        };
        let csv = est.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,ghat"));
        for (line, (x, v)) in lines.zip(est.xgrid.iter().zip(&est.values)) {
            let mut parts = line.split(',');
            let px: f64 = parts.next().unwrap().parse().unwrap();
            let pv: f64 = parts.next().unwrap().parse().unwrap();
            assert_eq!(px, *x);
            assert_eq!(pv, *v);
        }
    }
}
