//! Few-body quantum dynamics in a disordered one-dimensional harmonic trap.
//!
//! `wvsim` propagates one to three particles on a tensor-product position grid
//! with a second-order split-operator scheme and measures two families of
//! momentum properties on the same states:
//!
//! * ensemble expectation values (`⟨x_j⟩`, `⟨p_j⟩`, energies), which relax
//!   towards microcanonical values after an equilibration time, and
//! * many-body weak values of momentum (Bohmian velocities and their
//!   physical-space reductions), which keep oscillating because they only
//!   see the off-diagonal part of the density matrix in the energy basis.
//!
//! The modules follow the data flow of an experiment:
//!
//! | module | contents |
//! |---|---|
//! | [`grid`] | configuration grid, FFT plans, spectral derivatives, momentum transforms |
//! | [`state`] | Gaussian orbitals, antisymmetrized states, marginal densities |
//! | [`hamiltonian`] | trap, speckle-like disorder and soft-core Coulomb potentials |
//! | [`propagator`] | Strang split-operator stepping and the observer loop |
//! | [`observables`] | expectation values, energy bookkeeping, equilibration diagnostics |
//! | [`weakvalues`] | current densities and every weak-value estimator |
//! | [`spectral`] | grid diagonalization and the energy-representation density matrix |
//! | [`io`] | configuration, CSV/SVG/snapshot output and experiment orchestration |
//!
//! Natural units are used throughout (`ħ = m = 1`). Particle axes are
//! zero-based in the API (`axis 0` is particle 1 in the usual notation).
//!
//! ```
//! use wvsim::grid::GridSpec;
//! use wvsim::state::{gaussian_orbital, OrbitalSpec, WaveFunction};
//! use wvsim::observables::expect_momentum;
//!
//! let grid = GridSpec::new(1, 256, 20.0).unwrap().shared();
//! let orbital = gaussian_orbital(&OrbitalSpec::new(0.0, 5.0, 1.0), &grid).unwrap();
//! let psi = WaveFunction::from_orbital(grid, orbital);
//! assert!((expect_momentum(&psi, 0).unwrap() - 5.0).abs() < 1e-10);
//! ```

pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod io;
pub mod observables;
pub mod propagator;
pub mod spectral;
pub mod state;
pub mod weakvalues;

pub use error::{Error, Result};
