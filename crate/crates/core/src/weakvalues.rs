//! Weak values of momentum.
//!
//! All estimators are ratios of a current density to a probability density:
//!
//! * configuration space: `p_W^j(x) = J^j(x)/|Ψ(x)|²` with `J^j = Im(Ψ* ∂_jΨ)`,
//! * physical space: `p_W^{j,k}(x)`, the current `J^j` and the density both
//!   integrated over every axis except `k`, with `x_k = x`,
//! * identical particles: `p̃_W(x) = N⁻² Σ_{j,k} p_W^{j,k}(x)`.
//!
//! Points where the denominator falls below [`MASK_RELATIVE`] times its
//! maximum are masked and carry `NaN`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Fourier, GridSpec};
use crate::observables::trapezoid_weights;
use crate::state::WaveFunction;

/// Mask threshold relative to the largest denominator density.
pub const MASK_RELATIVE: f64 = 1e-12;

/// Largest antisymmetry residual accepted by [`weak_identical`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Which estimator a [`WeakValueField`] holds. Axes are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakValueKind {
    Single,
    Pair { j: usize, k: usize },
    Identical,
}

impl fmt::Display for WeakValueKind {
    /// Labels use one-based particle numbers (`pair(1,2)`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeakValueKind::Single => write!(f, "single"),
            WeakValueKind::Pair { j, k } => write!(f, "pair({},{})", j + 1, k + 1),
            WeakValueKind::Identical => write!(f, "identical"),
        }
    }
}

/// A weak-value estimate over the physical axis.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakValueField {
    /// One value per grid position; `NaN` where masked.
    pub values: Vec<f64>,
    /// `true` where the denominator is large enough for a valid value.
    pub mask: Vec<bool>,
    pub kind: WeakValueKind,
    pub time: f64,
}

impl WeakValueField {
    /// Value at the grid sample nearest `x`, `None` if masked.
    pub fn value_at(&self, grid: &GridSpec, x: f64) -> Option<f64> {
        let i = grid.nearest_index(x);
        self.mask[i].then(|| self.values[i])
    }

    pub fn masked_fraction(&self) -> f64 {
        self.mask.iter().filter(|m| !**m).count() as f64 / self.mask.len() as f64
    }

    /// `Σ w(x) f(x) dx` over unmasked points.
    pub fn weighted_integral(&self, weights: &[f64], dx: f64) -> f64 {
        self.values
            .iter()
            .zip(weights)
            .zip(&self.mask)
            .filter(|(_, m)| **m)
            .map(|((v, w), _)| v * w)
            .sum::<f64>()
            * dx
    }

    /// `max − min` over unmasked points.
    pub fn spread(&self) -> f64 {
        let valid = self.values.iter().zip(&self.mask).filter(|(_, m)| **m).map(|(v, _)| *v);
        let (lo, hi) = valid.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if lo > hi {
            0.0
        } else {
            hi - lo
        }
    }

    /// Largest difference to `other` over points unmasked in both.
    pub fn max_difference(&self, other: &WeakValueField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(self.mask.iter().zip(&other.mask))
            .filter(|(_, (a, b))| **a && **b)
            .map(|((x, y), _)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// A configuration-space weak value `p_W^j(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigWeakValue {
    pub point: Vec<f64>,
    pub axis: usize,
    pub value: f64,
}

fn currents(grid: &GridSpec, fourier: &mut Fourier, amplitudes: &[Complex64], axis: usize) -> Vec<f64> {
    let mut d = amplitudes.to_vec();
    grid::derivative_in_place(grid, fourier, &mut d, axis);
    amplitudes.iter().zip(&d).map(|(a, b)| (a.conj() * b).im).collect()
}

/// `J^j(x) = Im(Ψ* ∂_jΨ)` on the configuration grid.
pub fn current_density_axis(psi: &WaveFunction, axis: usize) -> Result<Vec<f64>> {
    let grid = psi.grid();
    grid.check_axis(axis)?;
    Ok(currents(grid, &mut Fourier::for_grid(grid), psi.amplitudes(), axis))
}

/// `p_W^j` at the grid point nearest to `point`, computed as `J^j/|Ψ|²`
/// and checked against `Re(⟨x|p̂_j|Ψ⟩/⟨x|Ψ⟩)`.
pub fn weak_config(psi: &WaveFunction, axis: usize, point: &[f64]) -> Result<ConfigWeakValue> {
    let grid = psi.grid();
    grid.check_axis(axis)?;
    if point.len() != grid.n_particles() {
        return Err(Error::invalid(format!(
            "point has {} coordinates for {} particles",
            point.len(),
            grid.n_particles()
        )));
    }
    let indices: Vec<usize> = point.iter().map(|&x| grid.nearest_index(x)).collect();
    let flat = grid.ravel(&indices);
    let amplitudes = psi.amplitudes();
    let density = amplitudes[flat].norm_sqr();
    let threshold = MASK_RELATIVE * amplitudes.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    if !(density >= threshold) || density == 0.0 {
        return Err(Error::NodePoint { density, threshold });
    }
    let d = grid::spectral_derivative(grid, amplitudes, axis)?;
    let psi_x = amplitudes[flat];
    let by_current = (psi_x.conj() * d[flat]).im / density;
    let by_ratio = (Complex64::new(0.0, -1.0) * d[flat] / psi_x).re;
    if (by_current - by_ratio).abs() > 1e-8 * (1.0 + by_current.abs()) {
        return Err(Error::NonConvergence(format!(
            "weak value routes disagree: {by_current} vs {by_ratio}"
        )));
    }
    Ok(ConfigWeakValue {
        point: indices.iter().map(|&i| grid.positions()[i]).collect(),
        axis,
        value: by_current,
    })
}

fn ratio_field(numerator: &[f64], denominator: &[f64], kind: WeakValueKind, time: f64) -> WeakValueField {
    let threshold = MASK_RELATIVE * denominator.iter().fold(0.0_f64, |m, &v| m.max(v));
    let mask: Vec<bool> = denominator.iter().map(|&d| d >= threshold && d > 0.0).collect();
    let values = numerator
        .iter()
        .zip(denominator)
        .zip(&mask)
        .map(|((n, d), &ok)| if ok { n / d } else { f64::NAN })
        .collect();
    WeakValueField { values, mask, kind, time }
}

/// Single-particle weak value `p_W(x) = J(x)/|ψ(x)|²` of an `N = 1` state.
pub fn weak_single(psi: &WaveFunction) -> Result<WeakValueField> {
    if psi.n_particles() != 1 {
        return Err(Error::invalid("single-particle weak value needs N = 1"));
    }
    let current = current_density_axis(psi, 0)?;
    Ok(ratio_field(&current, &psi.density(), WeakValueKind::Single, psi.time()))
}

/// Physical-space weak value `p_W^{j,k}(x)`.
pub fn weak_pair(psi: &WaveFunction, j: usize, k: usize) -> Result<WeakValueField> {
    let grid = psi.grid();
    grid.check_axis(j)?;
    grid.check_axis(k)?;
    let current = current_density_axis(psi, j)?;
    let numerator = grid.reduce_to_axis(&current, k);
    let denominator = grid.reduce_to_axis(&psi.density(), k);
    Ok(ratio_field(&numerator, &denominator, WeakValueKind::Pair { j, k }, psi.time()))
}

/// `p_W^{j,k}` for fixed `j` and every `k`, from a single derivative.
pub fn weak_pair_row(psi: &WaveFunction, j: usize) -> Result<Vec<WeakValueField>> {
    let grid = psi.grid();
    grid.check_axis(j)?;
    let current = current_density_axis(psi, j)?;
    let density = psi.density();
    Ok((0..grid.n_particles())
        .map(|k| {
            let numerator = grid.reduce_to_axis(&current, k);
            let denominator = grid.reduce_to_axis(&density, k);
            ratio_field(&numerator, &denominator, WeakValueKind::Pair { j, k }, psi.time())
        })
        .collect())
}

/// Every `p_W^{j,k}`, indexed `[j][k]`, with one derivative per axis.
pub fn weak_pair_all(psi: &WaveFunction) -> Result<Vec<Vec<WeakValueField>>> {
    let grid = psi.grid();
    let n = grid.n_particles();
    let mut fourier = Fourier::for_grid(grid);
    let density = psi.density();
    let denominators: Vec<Vec<f64>> = (0..n).map(|k| grid.reduce_to_axis(&density, k)).collect();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let current = currents(grid, &mut fourier, psi.amplitudes(), j);
        out.push(
            (0..n)
                .map(|k| {
                    let numerator = grid.reduce_to_axis(&current, k);
                    ratio_field(&numerator, &denominators[k], WeakValueKind::Pair { j, k }, psi.time())
                })
                .collect(),
        );
    }
    Ok(out)
}

fn combine(fields: &[(&WeakValueField, f64)], time: f64) -> WeakValueField {
    let len = fields[0].0.values.len();
    let mask: Vec<bool> = (0..len).map(|i| fields.iter().all(|(f, _)| f.mask[i])).collect();
    let values = (0..len)
        .map(|i| {
            if mask[i] {
                fields.iter().map(|(f, w)| w * f.values[i]).sum()
            } else {
                f64::NAN
            }
        })
        .collect();
    WeakValueField { values, mask, kind: WeakValueKind::Identical, time }
}

fn check_antisymmetric(psi: &WaveFunction) -> Result<()> {
    let residual = psi.max_antisymmetry_residual();
    if residual > SYMMETRY_TOLERANCE {
        return Err(Error::SymmetryViolated { residual });
    }
    Ok(())
}

/// Identical-particle weak value `p̃_W = (p_W^{1,1} + (N−1) p_W^{1,2}) / N`,
/// which equals the full `N⁻² Σ_{j,k} p_W^{j,k}` on antisymmetric states.
pub fn weak_identical(psi: &WaveFunction) -> Result<WeakValueField> {
    check_antisymmetric(psi)?;
    let n = psi.n_particles();
    let diagonal = weak_pair(psi, 0, 0)?;
    if n == 1 {
        return Ok(WeakValueField { kind: WeakValueKind::Identical, ..diagonal });
    }
    let off = weak_pair(psi, 0, 1)?;
    let nf = n as f64;
    Ok(combine(&[(&diagonal, 1.0 / nf), (&off, (nf - 1.0) / nf)], psi.time()))
}

/// `N⁻² Σ_{j,k} p_W^{j,k}` from all `N²` fields; no symmetry assumed.
pub fn weak_identical_exhaustive(psi: &WaveFunction) -> Result<WeakValueField> {
    let all = weak_pair_all(psi)?;
    let w = 1.0 / (psi.n_particles() * psi.n_particles()) as f64;
    let terms: Vec<(&WeakValueField, f64)> = all.iter().flatten().map(|f| (f, w)).collect();
    Ok(combine(&terms, psi.time()))
}

/// Largest violation of the exchange relations among `p_W^{j,k}` fields
/// (`[j][k]` layout): equal diagonals, `p^{j,k} = p^{k,j}` and
/// `p^{j,k} = p^{l,k}` for `j, l ≠ k`.
pub fn exchange_relation_gap(fields: &[Vec<WeakValueField>]) -> f64 {
    let n = fields.len();
    let mut gap = 0.0_f64;
    for j in 0..n {
        gap = gap.max(fields[j][j].max_difference(&fields[0][0]));
        for k in 0..n {
            if j == k {
                continue;
            }
            gap = gap.max(fields[j][k].max_difference(&fields[k][j]));
            for l in 0..n {
                if l != k {
                    gap = gap.max(fields[j][k].max_difference(&fields[l][k]));
                }
            }
        }
    }
    gap
}

/// Trapezoidal mean of a weak-value series over `[t − T/2, t + T/2]`.
/// Non-finite (masked) samples are dropped and the remaining weights
/// renormalized.
pub fn time_average(times: &[f64], values: &[f64], t: f64, window: f64) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::invalid("times and values differ in length"));
    }
    if !(window >= 0.0) {
        return Err(Error::invalid(format!("window must be >= 0, got {window}")));
    }
    let weights = trapezoid_weights(times, t - window / 2.0, t + window / 2.0)?;
    let valid: Vec<(usize, f64)> = weights.into_iter().filter(|&(i, _)| values[i].is_finite()).collect();
    let total: f64 = valid.iter().map(|w| w.1).sum();
    if valid.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if total == 0.0 {
        return Ok(valid.iter().map(|&(i, _)| values[i]).sum::<f64>() / valid.len() as f64);
    }
    Ok(valid.iter().map(|&(i, w)| w * values[i]).sum::<f64>() / total)
}
