//! Wigner phase-space currents, Moyal quantum corrections and the fluxes of
//! probability, entropy and purity through classical orbits.

pub mod classical;
pub mod cli;
pub mod currents;
pub mod error;
pub mod fluxes;
pub mod grid;
pub mod observables;
pub mod states;

pub use classical::{solve_orbit, ClassicalOrbit, OrbitOptions};
pub use currents::{current, delta_current, div_w, Potential, PotentialKind, PotentialModel};
pub use error::{Error, Result};
pub use fluxes::{oracle_flux, purity_flux, renyi_flux, sigma_flux, svn_flux, FluxAnalysis, FluxReport, Quantity};
pub use grid::{CoordinateGrid, DimensionlessMap, PhaseSpaceGrid, Region};
pub use observables::{expectation, purity, renyi_entropy, von_neumann_entropy, WeylSymbol};
pub use states::{evaluate_state, wigner_transform, StateSpec, Wavefunction, WignerField};
