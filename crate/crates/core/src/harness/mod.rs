//! Experiment configuration, the ED oracle, the runners behind the CLI and
//! result serialization.

pub mod config;
pub mod ed;
pub mod output;
pub mod roots;
pub mod spectrum;
pub mod suite;

pub use config::{Experiment, ExperimentConfig, Tolerances};
pub use ed::EdSpectrum;
pub use output::emit_results;
pub use roots::{run_bethe_check, run_bethe_solve, CheckReport, SolveReport};
pub use spectrum::{run_spectrum, SpectrumReport, SpectrumRun};
pub use suite::{run_identity_suite, IdentityReport};
