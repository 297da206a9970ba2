//! Experiment harness: configuration, presets, single runs, the ε sweep, the property suites
//! and the resonance audit.

pub mod audit;
pub mod config;
pub mod contrast;
pub mod convergence;
pub mod presets;
pub mod properties;
pub mod report;
pub mod runs;

pub use audit::{run_resonance_audit, AuditReport};
pub use config::{ExperimentConfig, InitialData, Numerics, Preset};
pub use contrast::{run_contrast, ContrastReport, ContrastRow};
pub use convergence::{run_convergence, ConvergenceReport, RunRecord, SlopeFit};
pub use presets::initial_state;
pub use properties::{run_properties, PropertyOptions, PropertyReport};
pub use runs::{oscillation_run, pe_run, reference_runs, simulate, Reference, Simulation};
