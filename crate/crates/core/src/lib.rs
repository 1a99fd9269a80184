//! Length-preserving, energy-stable time stepping for the Oseen-Frank
//! director gradient flow on periodic grids.
//!
//! Each step solves `(n^{m+1} − n^m)/τ = −n^{m+1/2} × (D × n^{m+1/2})` for
//! `n^{m+1}`, where `D` is a discrete gradient of the Fourier spectral
//! energy. The rotational form keeps every pointwise length fixed and the
//! discrete gradient makes the energy nonincreasing.

pub mod cli;
pub mod discrete_gradient;
pub mod energy;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod manufactured;
pub mod newton_krylov;
pub mod presets;
pub mod quadrature;
pub mod spectral;
pub mod stepper;

pub use discrete_gradient::{AnchoredGradient, DiscreteGradientKind};
pub use energy::{EnergyBreakdown, ElasticParams};
pub use error::{Error, Result};
pub use field::{DirectorField, ScalarField};
pub use grid::Grid;
pub use newton_krylov::{ForcingTerm, SolveStats, SolverConfig};
pub use presets::Preset;
pub use spectral::SpectralPlan;
pub use stepper::{run, RunObserver, SnapshotSchedule, StepMode, StepRecord, Stepper, TimeControls};
