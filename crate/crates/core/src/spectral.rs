//! Numerical Fourier machinery.
//!
//! Convention: the forward transform of `u` is `u*(x) = integral e^{ixt} u(t) dt`,
//! so the inverse used throughout is `(1/2pi) integral e^{-ixt} u*(t) dt`.
//! All inverse transforms are trapezoid sums over a uniform symmetric
//! frequency grid; Hermitian-symmetric inputs make the results real up to
//! rounding, and the imaginary residue is asserted small before being dropped.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::NoiseModel;

/// Hard ceiling on `1/|f*|` before a bandwidth is declared infeasible.
/// Leaves headroom below f64::MAX so downstream arithmetic cannot overflow.
pub const OVERFLOW_GUARD: f64 = 1e280;

/// Relative tolerance for the Hermitian-symmetry precondition and for the
/// imaginary residue dropped after an inverse transform.
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Default minimum number of frequency nodes for automatically sized grids.
pub const MIN_FREQ_POINTS: usize = 4096;

/// Uniform symmetric frequency grid on `[-t_max, t_max]`.
///
/// Nodes are mirrored around 0 so every node's exact negative is also a node
/// (the count is even, so 0 itself is not included).
#[derive(Debug, Clone)]
pub struct FreqGrid {
    t_max: f64,
    nodes: Vec<f64>,
}

impl FreqGrid {
    /// `n_points` must be a power of two, at least 256.
    pub fn new(t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_max must be positive, got {t_max}"
            )));
        }
        if n_points < 256 || !n_points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "n_points must be a power of two >= 256, got {n_points}"
            )));
        }
        let dt = 2.0 * t_max / (n_points - 1) as f64;
        let mut nodes = vec![0.0; n_points];
        for i in 0..n_points / 2 {
            let t = t_max - i as f64 * dt;
            nodes[i] = -t;
            nodes[n_points - 1 - i] = t;
        }
        Ok(Self { t_max, nodes })
    }

    /// Smallest power-of-two grid whose spacing resolves `e^{ixt}` over
    /// `|x| <= x_absmax`, i.e. `dt <= pi / x_absmax`, floored at `min_points`.
    pub fn auto(t_max: f64, x_absmax: f64, min_points: usize) -> Result<Self> {
        let needed = if x_absmax > 0.0 {
            (2.0 * t_max * x_absmax / std::f64::consts::PI).ceil() as usize + 1
        } else {
            0
        };
        let n = needed.max(min_points).max(256).next_power_of_two();
        Self::new(t_max, n)
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.t_max / (self.nodes.len() - 1) as f64
    }
}

/// Complex values aligned with a frequency grid.
#[derive(Debug, Clone)]
pub struct SpectrumValues {
    pub grid: FreqGrid,
    pub values: Vec<Complex64>,
}

impl SpectrumValues {
    pub fn from_fn(grid: FreqGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self { grid, values }
    }

    /// Largest deviation `|v(t) - conj(v(-t))|` over mirror pairs, relative to
    /// `1 + max |v|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.values.len();
        let max_abs = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for i in 0..n / 2 {
            let d = (self.values[i] - self.values[n - 1 - i].conj()).norm();
            worst = worst.max(d);
        }
        worst / (1.0 + max_abs)
    }

    fn check_hermitian(&self) -> Result<()> {
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            Err(Error::SymmetryViolation {
                deviation: dev,
                tolerance: HERMITIAN_TOL,
            })
        } else {
            Ok(())
        }
    }

    /// Two-column-per-part debug dump: `t,re,im` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im\n");
        for (t, v) in self.grid.nodes().iter().zip(&self.values) {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", t, v.re, v.im));
        }
        out
    }
}

/// Empirical characteristic function `(1/n) sum_j e^{i t Y_j}` at one point.
pub fn ecf_at(sample: &[f64], t: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &y in sample {
        acc += Complex64::from_polar(1.0, t * y);
    }
    acc / sample.len() as f64
}

/// Empirical characteristic function on a grid, by direct summation.
///
/// Nodes are evaluated in parallel but each node's sum runs in a fixed order,
/// so the result is independent of the thread count.
pub fn ecf(sample: &[f64], grid: &FreqGrid) -> Result<SpectrumValues> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let values: Vec<Complex64> = grid
        .nodes()
        .par_iter()
        .map(|&t| ecf_at(sample, t))
        .collect();
    Ok(SpectrumValues {
        grid: grid.clone(),
        values,
    })
}

/// `(1/2pi) integral e^{-ixt} spec(t) dt` by trapezoid quadrature, evaluated at
/// each grid point of `xgrid`. Requires a Hermitian-symmetric spectrum; the
/// imaginary residue is checked against [`HERMITIAN_TOL`] and discarded.
pub fn inverse_fourier_grid(spec: &SpectrumValues, xgrid: &[f64]) -> Result<Vec<f64>> {
    inverse_fourier_grid_detailed(spec, xgrid).map(|(v, _)| v)
}

/// Same as [`inverse_fourier_grid`] but also reports the imaginary residue
/// that was dropped (relative to `1 + max |result|`).
pub fn inverse_fourier_grid_detailed(
    spec: &SpectrumValues,
    xgrid: &[f64],
) -> Result<(Vec<f64>, f64)> {
    spec.check_hermitian()?;
    let nodes = spec.grid.nodes();
    let dt = spec.grid.spacing();
    let n = nodes.len();
    let scale = dt / (2.0 * std::f64::consts::PI);
    let complex: Vec<Complex64> = xgrid
        .par_iter()
        .map(|&x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, (&t, v)) in nodes.iter().zip(&spec.values).enumerate() {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                acc += w * v * Complex64::from_polar(1.0, -x * t);
            }
            acc * scale
        })
        .collect();
    let max_re = complex.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let max_im = complex.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let residue = max_im / (1.0 + max_re);
    if residue > HERMITIAN_TOL {
        return Err(Error::ImaginaryResidue {
            residue,
            tolerance: HERMITIAN_TOL,
        });
    }
    Ok((complex.into_iter().map(|v| v.re).collect(), residue))
}

/// Largest `ln(1/|f*(t)|)` over the symmetric grid of `[-t_max, t_max]`.
pub fn max_log_inverse_cf(noise: &NoiseModel, t_max: f64) -> f64 {
    // |f*| is even for every catalog noise; scan [0, t_max].
    let steps = 4096;
    (0..=steps)
        .map(|i| -noise.log_abs_cf(t_max * i as f64 / steps as f64))
        .fold(0.0, f64::max)
}

/// Errors out when `1/|f*|` exceeds [`OVERFLOW_GUARD`] anywhere in the band
/// `[-cutoff, cutoff]`; the error names the smallest feasible bandwidth.
pub fn guard_band(noise: &NoiseModel, cutoff: f64, h: f64) -> Result<()> {
    if max_log_inverse_cf(noise, cutoff) < OVERFLOW_GUARD.ln() {
        Ok(())
    } else {
        Err(Error::BandwidthTooSmall {
            h,
            noise: noise.name().into(),
            min_feasible: min_feasible_bandwidth(noise),
        })
    }
}

/// Smallest `h` whose band `[-1/h, 1/h]` passes the overflow guard, from the
/// declared envelope; `None` when every practical bandwidth is feasible.
pub fn min_feasible_bandwidth(noise: &NoiseModel) -> Option<f64> {
    let limit = OVERFLOW_GUARD.ln();
    let log_inv_env = |t: f64| -noise.smoothness.log_envelope(t) - noise.smoothness.k0.ln();
    if log_inv_env(1e9) <= limit {
        return None;
    }
    let (mut lo, mut hi) = (1e-6, 1e9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_inv_env(mid) > limit {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(1.0 / lo)
}

/// Deconvolution kernel `K` evaluated on `xgrid`: the inverse transform of
/// `1_{|u| <= 1} / f*(u/h)`. With identity noise this is `sin(x)/(pi x)`.
pub fn deconvolution_kernel(h: f64, noise: &NoiseModel, xgrid: &[f64]) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
    }
    guard_band(noise, 1.0 / h, h)?;
    let x_absmax = xgrid.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    // The integrand does not vanish at the cutoff, so the trapezoid error is
    // O(dt^2 * x); 8192 points keep it below 1e-7 out to |x| = 50.
    let grid = FreqGrid::auto(1.0, x_absmax, 8192)?;
    let spec = SpectrumValues::from_fn(grid, |u| {
        let f = noise.cf(u / h);
        Complex64::new(1.0, 0.0) / f
    });
    inverse_fourier_grid(&spec, xgrid)
}
