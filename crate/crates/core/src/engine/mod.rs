//! Multiscale iteration: carving, set modification, harmonic splitting,
//! piecewise rotation maps, local motions and healing over a scale ladder.

pub mod config;
pub mod model;
pub mod run;
pub mod schedule;
pub mod step;

pub use config::EngineConfig;
pub use model::{Linear, MotionModel, MotionRecord, Rigid};
pub use run::{initial_set, run_engine, ConservationAudit, EngineOutput, TraceRecord};
pub use schedule::{desk_schedule, symbolic_schedule, DeskStep, ScaleSchedule, ScheduleStep};
