//! Dynamic muscle-fatigue modelling and manual-work evaluation.
//!
//! fatiguekit turns a recorded work task — joint angles over time plus the
//! mass in the worker's hands — into per-muscle fatigue trajectories,
//! endurance predictions, work-phase timings and machine-readable report
//! files. The underlying model tracks each muscle's exertable capacity,
//! which decays exponentially with accumulated relative load, so the whole
//! pipeline has closed forms and needs no per-step ODE integration (a
//! fixed-step RK4 reference solver is included as a cross-check).
//!
//! The pieces, bottom up:
//!
//! * [`fatigue`] — capacity decay, fatigue index, endurance times, the
//!   reference integrator.
//! * [`load`] — demanded-force profiles over time (constant, rectangular
//!   cycles, recorded samples, concatenations) with exact integrals where
//!   the shape allows.
//! * [`biomech`] — planar static joint torques for a segment chain and the
//!   torque → per-muscle force conversion.
//! * [`motion`] — joint-angle recordings: CSV parsing, resampling,
//!   dwell/move phase segmentation, efficiency scoring.
//! * [`synth`] — synthetic recordings with known ground truth.
//! * [`report`] — the full pipeline ([`report::evaluate_task`]) and
//!   deterministic report emission ([`report::write_report`]).
//!
//! The `examples/` directory is the guided tour; each file is a runnable
//! walkthrough of one capability (`cargo run --example endurance`, ...).
//! A thin `fatiguekit` binary wraps the pipeline for shell use.
//!
//! Quick taste — how long can a muscle hold half its strength, and how
//! fatigued is it at that point?
//!
//! ```
//! use fatiguekit::fatigue::{endurance_constant_relative, exhaustion_index_constant};
//!
//! let t = endurance_constant_relative(1.0, 0.5).unwrap();
//! let u = exhaustion_index_constant(1.0, 0.5).unwrap();
//! assert!((t - 1.386294).abs() < 1e-6);
//! assert!((u - 1.5).abs() < 1e-12);
//! ```

pub mod biomech;
pub mod error;
pub mod fatigue;
pub mod load;
pub mod motion;
pub mod report;
pub mod synth;

pub use biomech::WorkerProfile;
pub use error::{Error, Result};
pub use fatigue::{EnduranceOutcome, MuscleParameters, MuscleState};
pub use load::LoadProfile;
pub use motion::MotionSeries;
pub use report::{evaluate_task, write_report, EvaluationOptions, FatigueReport};
