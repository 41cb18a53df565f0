//! The guide's chapters as doc comments, so `cargo test` runs every listing.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/grid.md")]
pub mod grid {}
#[doc = include_str!("../../../book/src/states.md")]
pub mod states {}
#[doc = include_str!("../../../book/src/hamiltonian.md")]
pub mod hamiltonian {}
#[doc = include_str!("../../../book/src/propagation.md")]
pub mod propagation {}
#[doc = include_str!("../../../book/src/observables.md")]
pub mod observables {}
#[doc = include_str!("../../../book/src/weak-values.md")]
pub mod weak_values {}
#[doc = include_str!("../../../book/src/spectral.md")]
pub mod spectral {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
