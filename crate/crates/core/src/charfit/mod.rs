//! Single-qubit noise characterization from phase-space sweeps.
//!
//! A sweep repeats `[H, X(Θ) or Y(Θ), Z(Φ), H or H†]` many times, records
//! the |0⟩ population over a grid of injected angles (Θ, Φ), and fits the
//! coherent error parameters (ε, φ, δ/Ω) by Levenberg–Marquardt against the
//! noisy forward model.

mod drift;
mod fit;
mod ingest;
mod sweep;

pub use drift::{drift_schedule, track_drift, DriftPoint, DriftScenario, DriftSeries};
pub use fit::{lm_fit, lm_fit_joint, Bounds, FitOptions, FitReport, FitResult};
pub use ingest::{ingest_grid, write_grid, IngestError};
pub use sweep::{
    build_sweep_circuit, predict_p0, run_grid, Compilation, GridMode, GridRecord, PhaseSpaceMap, Provenance,
    RotationAxis, SweepSpec, SweepVariant,
};
