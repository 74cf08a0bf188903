//! Bipolar counter-propagating decomposition of 1D quantum wavepacket
//! scattering.
//!
//! A wavepacket is split as psi = psi_+ + psi_-, where the components evolve
//! under coupled integro-differential equations whose coupling is
//! proportional to V'(x) and to the running spatial integrals
//! Psi_± = ∫ psi_± dx'. The sum always satisfies the ordinary discrete
//! time-dependent Schroedinger equation, while the components individually
//! stay smooth and interference-free: psi_+ carries the incident/transmitted
//! branch and psi_- the reflected branch.
//!
//! The crate provides the discrete machinery (grid, stencils, cumulative
//! Newton-Cotes quadrature, momentum transforms), the benchmark potentials,
//! packet construction and momentum-space decompositions, the forward-Euler
//! propagation engine with single-surface, spliced asymmetric and coupled
//! two-surface workflows, an independent split-step spectral oracle, and the
//! observable/verdict layer used by the command-line front end.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod field;
pub mod grid;
pub mod oracle;
pub mod output;
pub mod packet;
pub mod potential;
pub mod presets;
pub mod runner;
pub mod spectrum;
pub mod splice;

pub use config::{AssertOutcome, AssertSpec, ModeConfig, OracleConfig, RunConfig};
pub use diagnostics::{
    combined_probability, check_conditions, ConditionReport, ConditionThresholds, StageParams,
    SummaryReport,
};
pub use error::{Error, Result};
pub use evolve::{
    bipolar_rhs, euler_step, multisurface_rhs, propagate, BipolarRhs, BipolarState,
    PropagateOptions, PropagationResult, TimeStepper,
};
pub use field::ComplexField;
pub use grid::Grid;
pub use oracle::{unipolar_propagate, OracleOptions};
pub use packet::{
    gaussian_packet, multisurface_initial, negative_momentum_probability, right_decomposition,
    PacketSpec,
};
pub use potential::{PotentialModel, SampledPotential};
pub use runner::{evaluate_asserts, execute, validate, Finding, RunArtifacts};
pub use spectrum::{inverse_spectrum, momentum_spectrum, MomentumSpectrum};
pub use splice::{propagate_spliced, splice, SplicePlan, SpliceRun};
