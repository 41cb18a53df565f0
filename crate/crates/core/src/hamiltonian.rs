//! Diagonal potential of the trapped few-body Hamiltonian.
//!
//! `V(x) = Σ_j [ω²x_j²/2 + d(x_j)] + Σ_{k<j} 1/√((x_j−x_k)² + α²)`
//!
//! The one-body parts (trap and disorder) are kept as 1D profiles shared by
//! every axis; the pair Coulomb term and the total are full tensors. The
//! kinetic energy is diagonal in momentum space and lives in the propagator.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Identifier of the disorder amplitude generator, recorded in outputs.
pub const DISORDER_GENERATOR_ID: &str = "chacha8/standard-normal";

/// Speckle-like disorder `d(x) ∝ Σ_k a_k exp(−4(x−g_k)²/σ_D²)` over every
/// grid point `g_k`, normalized so that `Σ d² dx = γ_D²`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderField {
    pub amplitudes: Vec<f64>,
    pub strength: f64,
    pub correlation_width: f64,
    pub seed: u64,
    pub generator_id: String,
    /// Sample mean of the raw Gaussian weights `a_k`.
    pub raw_mean: f64,
}

impl DisorderField {
    /// The zero field on `grid`.
    pub fn none(grid: &GridSpec) -> Self {
        DisorderField {
            amplitudes: vec![0.0; grid.points()],
            strength: 0.0,
            correlation_width: 1.0,
            seed: 0,
            generator_id: DISORDER_GENERATOR_ID.to_string(),
            raw_mean: 0.0,
        }
    }

    /// `Σ d² dx`.
    pub fn squared_norm(&self, dx: f64) -> f64 {
        self.amplitudes.iter().map(|d| d * d).sum::<f64>() * dx
    }

    /// Writes `x,d` rows preceded by `#`-comment metadata.
    pub fn write_csv(&self, grid: &GridSpec, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        writeln!(out, "# seed = {}", self.seed).unwrap();
        writeln!(out, "# generator_id = {}", self.generator_id).unwrap();
        writeln!(out, "# gamma_d = {:.16e}", self.strength).unwrap();
        writeln!(out, "# sigma_d = {:.16e}", self.correlation_width).unwrap();
        writeln!(out, "x,d").unwrap();
        for (x, d) in grid.positions().iter().zip(&self.amplitudes) {
            writeln!(out, "{x:.16e},{d:.16e}").unwrap();
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

pub fn sample_disorder(
    grid: &GridSpec,
    strength: f64,
    correlation_width: f64,
    seed: u64,
) -> Result<DisorderField> {
    if !(strength >= 0.0) || !strength.is_finite() {
        return Err(Error::invalid(format!("disorder strength must be >= 0, got {strength}")));
    }
    if !(correlation_width > 0.0) {
        return Err(Error::invalid(format!(
            "disorder correlation width must be positive, got {correlation_width}"
        )));
    }
    let m = grid.points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let raw_mean = weights.iter().sum::<f64>() / m as f64;
    if raw_mean.abs() > 5.0 / (m as f64).sqrt() {
        log::warn!("disorder weights have sample mean {raw_mean:.3e}");
    }

    let mut field = DisorderField {
        amplitudes: vec![0.0; m],
        strength,
        correlation_width,
        seed,
        generator_id: DISORDER_GENERATOR_ID.to_string(),
        raw_mean,
    };
    if strength == 0.0 {
        return Ok(field);
    }

    // the bump depends only on the index distance
    let kernel: Vec<f64> = (0..m)
        .map(|d| {
            let u = d as f64 * grid.dx() / correlation_width;
            (-4.0 * u * u).exp()
        })
        .collect();
    for (i, out) in field.amplitudes.iter_mut().enumerate() {
        *out = weights.iter().enumerate().map(|(k, a)| a * kernel[i.abs_diff(k)]).sum();
    }
    let scale = strength / field.squared_norm(grid.dx()).sqrt();
    field.amplitudes.iter_mut().for_each(|d| *d *= scale);
    Ok(field)
}

/// Soft-core Coulomb repulsion between two particles.
#[inline]
pub fn soft_coulomb(separation: f64, alpha: f64) -> f64 {
    1.0 / (separation * separation + alpha * alpha).sqrt()
}

#[derive(Clone, Debug)]
pub struct HamiltonianTerms {
    grid: Arc<GridSpec>,
    omega: f64,
    alpha: f64,
    disorder: DisorderField,
    trap_profile: Vec<f64>,
    coulomb: Vec<f64>,
    total: Vec<f64>,
    coulomb_enabled: bool,
}

/// Builds the potential tensors of the interacting Hamiltonian.
pub fn build_terms(
    grid: Arc<GridSpec>,
    omega: f64,
    alpha: f64,
    disorder: DisorderField,
) -> Result<HamiltonianTerms> {
    HamiltonianTerms::build(grid, omega, alpha, disorder, true)
}

impl HamiltonianTerms {
    pub fn build(
        grid: Arc<GridSpec>,
        omega: f64,
        alpha: f64,
        disorder: DisorderField,
        coulomb_enabled: bool,
    ) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::invalid(format!("omega must be positive, got {omega}")));
        }
        if !(alpha > 0.0) {
            return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
        }
        if disorder.amplitudes.len() != grid.points() {
            return Err(Error::invalid("disorder field does not match the grid"));
        }
        let trap_profile: Vec<f64> =
            grid.positions().iter().map(|x| 0.5 * omega * omega * x * x).collect();
        let n = grid.n_particles();
        let x = grid.positions();

        let mut coulomb = vec![0.0; grid.len()];
        let mut total = vec![0.0; grid.len()];
        let mut idx = vec![0usize; n];
        for flat in 0..grid.len() {
            let mut rest = flat;
            for slot in idx.iter_mut().rev() {
                *slot = rest % grid.points();
                rest /= grid.points();
            }
            let mut pair = 0.0;
            if coulomb_enabled {
                for j in 0..n {
                    for k in 0..j {
                        pair += soft_coulomb(x[idx[j]] - x[idx[k]], alpha);
                    }
                }
            }
            let trap: f64 = idx.iter().map(|&i| trap_profile[i]).sum();
            let dis: f64 = idx.iter().map(|&i| disorder.amplitudes[i]).sum();
            coulomb[flat] = pair;
            total[flat] = trap + dis + pair;
        }
        Ok(HamiltonianTerms {
            grid,
            omega,
            alpha,
            disorder,
            trap_profile,
            coulomb,
            total,
            coulomb_enabled,
        })
    }

    /// Same trap and disorder with the pair interaction switched off.
    pub fn without_coulomb(&self) -> Result<Self> {
        Self::build(Arc::clone(&self.grid), self.omega, self.alpha, self.disorder.clone(), false)
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn coulomb_enabled(&self) -> bool {
        self.coulomb_enabled
    }

    pub fn disorder(&self) -> &DisorderField {
        &self.disorder
    }

    /// `ω²x²/2` on one axis.
    pub fn trap_profile(&self) -> &[f64] {
        &self.trap_profile
    }

    /// `d(x)` on one axis.
    pub fn disorder_profile(&self) -> &[f64] {
        &self.disorder.amplitudes
    }

    /// Pair interaction tensor `Σ_{k<j} e(x_j, x_k)`.
    pub fn coulomb(&self) -> &[f64] {
        &self.coulomb
    }

    pub fn total_potential(&self) -> &[f64] {
        &self.total
    }

    /// `Σ_j ω²x_j²/2` expanded to a tensor.
    pub fn trap_tensor(&self) -> Vec<f64> {
        self.expand(&self.trap_profile)
    }

    /// `Σ_j d(x_j)` expanded to a tensor.
    pub fn disorder_tensor(&self) -> Vec<f64> {
        self.expand(&self.disorder.amplitudes)
    }

    fn expand(&self, profile: &[f64]) -> Vec<f64> {
        (0..self.grid.len())
            .map(|flat| self.grid.unravel(flat).iter().map(|&i| profile[i]).sum())
            .collect()
    }

    pub fn max_abs_potential(&self) -> f64 {
        self.total.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
