//! The discretized physical axis, its N-fold tensor product, and the
//! Fourier machinery shared by the propagator and the weak-value estimators.
//!
//! A configuration tensor is stored flat in row-major axis order: particle
//! axis 0 varies slowest and the last axis is contiguous. Position sample `i`
//! sits at `-L + i·dx`, and wavenumbers follow the usual FFT ordering
//! `0, Δk, …, (M/2-1)Δk, -M/2·Δk, …, -Δk` with `Δk = π/L`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Smallest accepted axis length.
pub const MIN_POINTS: usize = 8;

/// Bytes used by one complex amplitude.
const BYTES_PER_AMPLITUDE: u128 = 16;

/// Limits applied when constructing a [`GridSpec`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridLimits {
    pub max_particles: usize,
    /// Upper bound on the size of one complex configuration tensor.
    pub memory_budget_bytes: u128,
}

impl Default for GridLimits {
    fn default() -> Self {
        GridLimits { max_particles: 3, memory_budget_bytes: 1 << 30 }
    }
}

#[derive(Clone, PartialEq)]
pub struct GridSpec {
    n_particles: usize,
    points: usize,
    half_width: f64,
    dx: f64,
    positions: Vec<f64>,
    wavenumbers: Vec<f64>,
    len: usize,
}

impl fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridSpec")
            .field("n_particles", &self.n_particles)
            .field("points", &self.points)
            .field("half_width", &self.half_width)
            .field("dx", &self.dx)
            .finish()
    }
}

impl GridSpec {
    /// Builds a grid with the default [`GridLimits`].
    pub fn new(n_particles: usize, points_per_axis: usize, half_width: f64) -> Result<Self> {
        Self::with_limits(n_particles, points_per_axis, half_width, &GridLimits::default())
    }

    pub fn with_limits(
        n_particles: usize,
        points_per_axis: usize,
        half_width: f64,
        limits: &GridLimits,
    ) -> Result<Self> {
        if n_particles == 0 || n_particles > limits.max_particles {
            return Err(Error::invalid(format!(
                "n_particles must be in 1..={}, got {n_particles}",
                limits.max_particles
            )));
        }
        if points_per_axis < MIN_POINTS || !points_per_axis.is_power_of_two() {
            return Err(Error::invalid(format!(
                "points_per_axis must be a power of two >= {MIN_POINTS}, got {points_per_axis}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::invalid(format!("half_width must be positive, got {half_width}")));
        }
        let total = (points_per_axis as u128)
            .checked_pow(n_particles as u32)
            .ok_or_else(|| Error::invalid("grid size overflows"))?;
        let requested = total * BYTES_PER_AMPLITUDE;
        if requested > limits.memory_budget_bytes || total > usize::MAX as u128 {
            return Err(Error::BudgetExceeded { requested, budget: limits.memory_budget_bytes });
        }

        let m = points_per_axis;
        let dx = 2.0 * half_width / m as f64;
        let positions = (0..m).map(|i| -half_width + i as f64 * dx).collect();
        let dk = PI / half_width;
        let wavenumbers = (0..m)
            .map(|i| if i < m / 2 { i as f64 * dk } else { (i as f64 - m as f64) * dk })
            .collect();
        Ok(GridSpec {
            n_particles,
            points: m,
            half_width,
            dx,
            positions,
            wavenumbers,
            len: total as usize,
        })
    }

    pub fn shared(self) -> Arc<GridSpec> {
        Arc::new(self)
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Wavenumber spacing `π/L`.
    pub fn dk(&self) -> f64 {
        PI / self.half_width
    }

    /// Configuration-space volume element `dx^N`.
    pub fn volume_element(&self) -> f64 {
        self.dx.powi(self.n_particles as i32)
    }

    /// Momentum-space volume element `dk^N`.
    pub fn momentum_volume_element(&self) -> f64 {
        self.dk().powi(self.n_particles as i32)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Wavenumbers in FFT order, Nyquist element negative.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Wavenumber used for odd-order derivatives: identical to
    /// [`wavenumbers`](Self::wavenumbers) except that the Nyquist element is
    /// zero, so real inputs have real first derivatives.
    pub fn derivative_wavenumber(&self, i: usize) -> f64 {
        if i == self.points / 2 {
            0.0
        } else {
            self.wavenumbers[i]
        }
    }

    /// Total number of configuration points `M^N`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn check_axis(&self, axis: usize) -> Result<()> {
        if axis < self.n_particles {
            Ok(())
        } else {
            Err(Error::AxisOutOfRange { axis, n_particles: self.n_particles })
        }
    }

    /// Flat-index stride of `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.points.pow((self.n_particles - 1 - axis) as u32)
    }

    /// Per-axis grid indices of a flat index.
    pub fn unravel(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.n_particles];
        for slot in out.iter_mut().rev() {
            *slot = index % self.points;
            index /= self.points;
        }
        out
    }

    pub fn ravel(&self, indices: &[usize]) -> usize {
        indices.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Grid index of the sample nearest to `x`, clamped to the box.
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x + self.half_width) / self.dx).round();
        i.clamp(0.0, (self.points - 1) as f64) as usize
    }

    /// Axis index along `axis` of a flat index.
    #[inline]
    pub fn axis_index(&self, index: usize, axis: usize) -> usize {
        (index / self.stride(axis)) % self.points
    }

    /// Flat index with two axes exchanged.
    pub fn swapped_index(&self, index: usize, a: usize, b: usize) -> usize {
        let ia = self.axis_index(index, a);
        let ib = self.axis_index(index, b);
        let (sa, sb) = (self.stride(a), self.stride(b));
        index - ia * sa - ib * sb + ib * sa + ia * sb
    }

    /// Sums a configuration tensor over every axis except `keep`, returning a
    /// 1D array (no measure applied).
    pub fn reduce_to_axis(&self, tensor: &[f64], keep: usize) -> Vec<f64> {
        let m = self.points;
        let stride = self.stride(keep);
        let mut out = vec![0.0; m];
        for chunk in tensor.chunks(stride * m) {
            for (i, row) in chunk.chunks(stride).enumerate() {
                out[i] += row.iter().sum::<f64>();
            }
        }
        out
    }
}

/// Planned transforms of length `M` plus scratch space, applied along any
/// axis of a configuration tensor.
pub struct Fourier {
    points: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl Fourier {
    pub fn new(points: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        let scratch_len =
            forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Fourier {
            points,
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
            work: Vec::new(),
        }
    }

    pub fn for_grid(grid: &GridSpec) -> Self {
        Self::new(grid.points())
    }

    /// Unnormalized forward DFT along `axis`.
    pub fn forward_axis(&mut self, grid: &GridSpec, data: &mut [Complex64], axis: usize) {
        let fft = Arc::clone(&self.forward);
        self.along_axis(grid, data, axis, |buf, scratch| fft.process_with_scratch(buf, scratch));
    }

    /// Inverse DFT along `axis`, normalized by `1/M`.
    pub fn inverse_axis(&mut self, grid: &GridSpec, data: &mut [Complex64], axis: usize) {
        let fft = Arc::clone(&self.inverse);
        let scale = 1.0 / self.points as f64;
        self.along_axis(
            grid,
            data,
            axis,
            |buf, scratch| {
                fft.process_with_scratch(buf, scratch);
                buf.iter_mut().for_each(|z| *z *= scale);
            },
        );
    }

    /// Forward transform along `axis`, pointwise multiplication by the 1D
    /// spectral `factor` (FFT order), inverse transform.
    pub fn filter_axis(
        &mut self,
        grid: &GridSpec,
        data: &mut [Complex64],
        axis: usize,
        factor: &[Complex64],
    ) {
        let fwd = Arc::clone(&self.forward);
        let inv = Arc::clone(&self.inverse);
        let scale = 1.0 / self.points as f64;
        self.along_axis(
            grid,
            data,
            axis,
            |buf, scratch| {
                fwd.process_with_scratch(buf, scratch);
                for line in buf.chunks_mut(factor.len()) {
                    for (z, f) in line.iter_mut().zip(factor) {
                        *z *= f * scale;
                    }
                }
                inv.process_with_scratch(buf, scratch);
            },
        );
    }

    /// Forward transform, multiplication by `scaled_factor`, inverse
    /// transform, on every contiguous length-`M` line of `data`. The factor
    /// must already carry the `1/M` normalization.
    pub(crate) fn filter_lines(&mut self, data: &mut [Complex64], scaled_factor: &[Complex64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
        for line in data.chunks_exact_mut(self.points) {
            for (z, f) in line.iter_mut().zip(scaled_factor) {
                *z *= f;
            }
        }
        self.inverse.process_with_scratch(data, &mut self.scratch);
    }

    /// Forward transform of every axis.
    pub fn forward_all(&mut self, grid: &GridSpec, data: &mut [Complex64]) {
        for axis in 0..grid.n_particles() {
            self.forward_axis(grid, data, axis);
        }
    }

    pub fn inverse_all(&mut self, grid: &GridSpec, data: &mut [Complex64]) {
        for axis in 0..grid.n_particles() {
            self.inverse_axis(grid, data, axis);
        }
    }

    /// Runs `op` on contiguous lines along `axis`. Lines of non-contiguous
    /// axes are gathered by a blocked transpose into a work buffer.
    fn along_axis<F>(
        &mut self,
        grid: &GridSpec,
        data: &mut [Complex64],
        axis: usize,
        op: F,
    ) where
        F: Fn(&mut [Complex64], &mut [Complex64]),
    {
        debug_assert_eq!(data.len(), grid.len());
        let m = self.points;
        let stride = grid.stride(axis);
        if stride == 1 {
            op(data, &mut self.scratch);
            return;
        }
        let block = m * stride;
        if self.work.len() < block {
            self.work.resize(block, Complex64::default());
        }
        let work = &mut self.work[..block];
        for chunk in data.chunks_mut(block) {
            // chunk is an (m x stride) matrix; lines run down its columns
            transpose(chunk, work, m, stride);
            op(work, &mut self.scratch);
            transpose(work, chunk, stride, m);
        }
    }
}

/// Cache-blocked transpose of a `rows x cols` row-major matrix into `dst`.
pub(crate) fn transpose<T: Copy>(src: &[T], dst: &mut [T], rows: usize, cols: usize) {
    const TILE: usize = 32;
    for r0 in (0..rows).step_by(TILE) {
        for c0 in (0..cols).step_by(TILE) {
            for r in r0..(r0 + TILE).min(rows) {
                for c in c0..(c0 + TILE).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// In-place transpose of an `m x m` row-major matrix.
pub(crate) fn transpose_square<T>(a: &mut [T], m: usize) {
    const TILE: usize = 8;
    for r0 in (0..m).step_by(TILE) {
        for c0 in (r0..m).step_by(TILE) {
            for r in r0..(r0 + TILE).min(m) {
                let start = if r0 == c0 { r + 1 } else { c0 };
                for c in start..(c0 + TILE).min(m) {
                    a.swap(r * m + c, c * m + r);
                }
            }
        }
    }
}

/// `∂Ψ/∂x_axis` of a configuration tensor, computed spectrally.
pub fn spectral_derivative(
    grid: &GridSpec,
    amplitudes: &[Complex64],
    axis: usize,
) -> Result<Vec<Complex64>> {
    grid.check_axis(axis)?;
    let mut fourier = Fourier::for_grid(grid);
    let mut out = amplitudes.to_vec();
    derivative_in_place(grid, &mut fourier, &mut out, axis);
    Ok(out)
}

pub(crate) fn derivative_in_place(
    grid: &GridSpec,
    fourier: &mut Fourier,
    data: &mut [Complex64],
    axis: usize,
) {
    let factor: Vec<Complex64> = (0..grid.points())
        .map(|i| Complex64::new(0.0, grid.derivative_wavenumber(i)))
        .collect();
    fourier.filter_axis(grid, data, axis, &factor);
}

/// `∂²Ψ/∂x_axis²` by multiplication with `-k²` (Nyquist included).
pub fn spectral_second_derivative(
    grid: &GridSpec,
    amplitudes: &[Complex64],
    axis: usize,
) -> Result<Vec<Complex64>> {
    grid.check_axis(axis)?;
    let factor: Vec<Complex64> =
        grid.wavenumbers().iter().map(|k| Complex64::new(-k * k, 0.0)).collect();
    let mut out = amplitudes.to_vec();
    Fourier::for_grid(grid).filter_axis(grid, &mut out, axis, &factor);
    Ok(out)
}

/// Phase `(-1)^i` that moves the FFT origin from `x = -L` to `x = 0`.
#[inline]
fn origin_phase(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Momentum-space amplitude `Ψ̃(k)` in FFT order, normalized so that
/// `Σ|Ψ̃|² dk^N = Σ|Ψ|² dx^N`.
pub fn to_momentum(grid: &GridSpec, amplitudes: &[Complex64]) -> Vec<Complex64> {
    let mut out = amplitudes.to_vec();
    to_momentum_in_place(grid, &mut Fourier::for_grid(grid), &mut out);
    out
}

pub(crate) fn to_momentum_in_place(grid: &GridSpec, fourier: &mut Fourier, data: &mut [Complex64]) {
    fourier.forward_all(grid, data);
    let scale = (grid.dx() / (2.0 * PI).sqrt()).powi(grid.n_particles() as i32);
    apply_origin_phase(grid, data, scale);
}

/// Inverse of [`to_momentum`].
pub fn from_momentum(grid: &GridSpec, momentum: &[Complex64]) -> Vec<Complex64> {
    let mut out = momentum.to_vec();
    let scale = ((2.0 * PI).sqrt() / grid.dx()).powi(grid.n_particles() as i32);
    apply_origin_phase(grid, &mut out, scale);
    Fourier::for_grid(grid).inverse_all(grid, &mut out);
    out
}

fn apply_origin_phase(grid: &GridSpec, data: &mut [Complex64], scale: f64) {
    for (index, z) in data.iter_mut().enumerate() {
        let sign: f64 = (0..grid.n_particles())
            .map(|axis| origin_phase(grid.axis_index(index, axis)))
            .product();
        *z *= sign * scale;
    }
}

/// Ratio of the largest density found within the five outermost samples of
/// any axis to the peak density. Periodic wrap-around is harmless while this
/// stays small.
pub fn edge_density_ratio(grid: &GridSpec, amplitudes: &[Complex64]) -> f64 {
    const EDGE: usize = 5;
    let m = grid.points();
    let mut peak = 0.0_f64;
    let mut edge = 0.0_f64;
    for (index, z) in amplitudes.iter().enumerate() {
        let d = z.norm_sqr();
        peak = peak.max(d);
        let near_edge = (0..grid.n_particles()).any(|axis| {
            let i = grid.axis_index(index, axis);
            i < EDGE || i >= m - EDGE
        });
        if near_edge {
            edge = edge.max(d);
        }
    }
    if peak > 0.0 {
        edge / peak
    } else {
        0.0
    }
}

/// Threshold above which [`edge_density_ratio`] is reported as a warning.
pub const EDGE_DENSITY_WARNING: f64 = 1e-10;

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &GridSpec, sigma: f64, p0: f64) -> Vec<Complex64> {
        grid.positions()
            .iter()
            .map(|&x| Complex64::from_polar((-x * x / (2.0 * sigma * sigma)).exp(), p0 * x))
            .collect()
    }

    #[test]
    fn small_grid_positions() {
        let g = GridSpec::new(1, 16, 8.0).unwrap();
        assert_eq!(g.dx(), 1.0);
        let expected: Vec<f64> = (-8..8).map(f64::from).collect();
        assert_eq!(g.positions(), expected.as_slice());
        assert_eq!(g.wavenumbers()[0], 0.0);
        assert_eq!(g.wavenumbers()[8], -8.0 * g.dk());
        assert_eq!(g.wavenumbers()[1], -g.wavenumbers()[15]);
    }

    #[test]
    fn paper_sized_two_particle_grid() {
        let g = GridSpec::new(2, 1024, 30.0).unwrap();
        assert_eq!(g.len(), 1024 * 1024);
        assert_eq!(g.dx(), 60.0 / 1024.0);
        assert!((g.dx() * 1024.0 - 60.0).abs() < 1e-12);
    }

    #[test]
    fn three_particle_toy_grid() {
        let g = GridSpec::new(3, 8, 4.0).unwrap();
        assert_eq!(g.len(), 512);
        assert_eq!(g.dx(), 1.0);
        assert!(GridSpec::new(3, 4, 4.0).is_err());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(GridSpec::new(1, 100, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(GridSpec::new(0, 16, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(GridSpec::new(4, 16, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(GridSpec::new(1, 16, -1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(GridSpec::new(3, 1024, 30.0), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn ravel_roundtrip_and_swaps() {
        let g = GridSpec::new(3, 16, 4.0).unwrap();
        for index in [0, 1, 17, 300, 4095] {
            let idx = g.unravel(index);
            assert_eq!(g.ravel(&idx), index);
            let s = g.swapped_index(index, 0, 2);
            let sidx = g.unravel(s);
            assert_eq!((sidx[0], sidx[1], sidx[2]), (idx[2], idx[1], idx[0]));
        }
    }

    #[test]
    fn plane_wave_derivative() {
        let g = GridSpec::new(1, 64, 10.0).unwrap();
        let p0 = 5.0 * g.dk();
        let psi: Vec<Complex64> =
            g.positions().iter().map(|&x| Complex64::from_polar(1.0, p0 * x)).collect();
        let d = spectral_derivative(&g, &psi, 0).unwrap();
        for (di, pi) in d.iter().zip(&psi) {
            assert!((di - Complex64::i() * p0 * pi).norm() < 1e-12);
        }
    }

    #[test]
    fn real_gaussian_derivative_is_real_and_odd() {
        let g = GridSpec::new(1, 128, 10.0).unwrap();
        let psi = gaussian(&g, 1.0, 0.0);
        let d = spectral_derivative(&g, &psi, 0).unwrap();
        let m = g.points();
        for i in 1..m {
            assert!(d[i].im.abs() < 1e-14);
            assert!((d[i].re + d[m - i].re).abs() < 1e-12, "odd about 0");
        }
    }

    #[test]
    fn boosted_gaussian_derivative_matches_closed_form() {
        let g = GridSpec::new(1, 1024, 30.0).unwrap();
        let (sigma, p0) = (1.0, 20.0);
        let psi = gaussian(&g, sigma, p0);
        let d = spectral_derivative(&g, &psi, 0).unwrap();
        let max_err = g
            .positions()
            .iter()
            .zip(&psi)
            .zip(&d)
            .map(|((&x, &p), &di)| {
                let exact = p * Complex64::new(-x / (sigma * sigma), p0);
                (di - exact).norm()
            })
            .fold(0.0, f64::max);
        assert!(max_err < 1e-10, "max deviation {max_err:e}");
    }

    #[test]
    fn derivative_along_each_axis_of_a_product() {
        let g = GridSpec::new(2, 64, 10.0).unwrap();
        let a = gaussian(&g, 1.0, 2.0);
        let b = gaussian(&g, 1.5, -1.0);
        let psi: Vec<Complex64> = (0..g.len())
            .map(|i| a[g.axis_index(i, 0)] * b[g.axis_index(i, 1)])
            .collect();
        let g1 = GridSpec::new(1, 64, 10.0).unwrap();
        let db = spectral_derivative(&g1, &b, 0).unwrap();
        let d0 = spectral_derivative(&g, &psi, 0).unwrap();
        let d1 = spectral_derivative(&g, &psi, 1).unwrap();
        let da = spectral_derivative(&g1, &a, 0).unwrap();
        for i in 0..g.len() {
            let (i0, i1) = (g.axis_index(i, 0), g.axis_index(i, 1));
            assert!((d0[i] - da[i0] * b[i1]).norm() < 1e-12);
            assert!((d1[i] - a[i0] * db[i1]).norm() < 1e-12);
        }
        assert!(matches!(
            spectral_derivative(&g, &psi, 2),
            Err(Error::AxisOutOfRange { axis: 2, n_particles: 2 })
        ));
    }

    #[test]
    fn momentum_transform_of_gaussian() {
        let g = GridSpec::new(1, 256, 20.0).unwrap();
        let norm = (1.0 / PI.sqrt()).sqrt();
        let psi: Vec<Complex64> = gaussian(&g, 1.0, 0.0).iter().map(|z| z * norm).collect();
        let phi = to_momentum(&g, &psi);
        // the unit-width Gaussian is its own Fourier transform
        for (i, &k) in g.wavenumbers().iter().enumerate() {
            let exact = norm * (-k * k / 2.0).exp();
            assert!((phi[i] - exact).norm() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn boosted_packet_peaks_at_boost() {
        let g = GridSpec::new(1, 1024, 30.0).unwrap();
        let phi = to_momentum(&g, &gaussian(&g, 1.0, 20.0));
        let (imax, _) = phi
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert!((g.wavenumbers()[imax] - 20.0).abs() <= g.dk() / 2.0);
    }

    #[test]
    fn two_axis_parseval_and_roundtrip() {
        let g = GridSpec::new(2, 32, 6.0).unwrap();
        let a = gaussian(&g, 1.0, 1.0);
        let psi: Vec<Complex64> = (0..g.len())
            .map(|i| a[g.axis_index(i, 0)] * a[(g.axis_index(i, 1) + 3) % 32] * 0.3)
            .collect();
        let phi = to_momentum(&g, &psi);
        let nx: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.volume_element();
        let nk: f64 = phi.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.momentum_volume_element();
        assert!(((nx - nk) / nx).abs() < 1e-12);
        let back = from_momentum(&g, &phi);
        for (x, y) in psi.iter().zip(&back) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn reduce_keeps_requested_axis() {
        let g = GridSpec::new(2, 16, 4.0).unwrap();
        let t: Vec<f64> = (0..g.len()).map(|i| g.axis_index(i, 0) as f64).collect();
        let r0 = g.reduce_to_axis(&t, 0);
        let r1 = g.reduce_to_axis(&t, 1);
        for i in 0..16 {
            assert_eq!(r0[i], 16.0 * i as f64);
            assert_eq!(r1[i], (0..16).sum::<usize>() as f64);
        }
    }

    #[test]
    fn edge_monitor() {
        let g = GridSpec::new(1, 64, 10.0).unwrap();
        let centered = gaussian(&g, 1.0, 0.0);
        assert!(edge_density_ratio(&g, &centered) < EDGE_DENSITY_WARNING);
        let flat = vec![Complex64::new(1.0, 0.0); 64];
        assert_eq!(edge_density_ratio(&g, &flat), 1.0);
    }

    #[test]
    fn square_transpose_matches_out_of_place() {
        for m in [1usize, 5, 8, 13, 32] {
            let src: Vec<usize> = (0..m * m).collect();
            let mut dst = vec![0; m * m];
            transpose(&src, &mut dst, m, m);
            let mut a = src.clone();
            transpose_square(&mut a, m);
            assert_eq!(a, dst);
        }
    }
}
