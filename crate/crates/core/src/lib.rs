//! Bio-inspired hexapod locomotion.
//!
//! Each limb runs a four-state central pattern generator ([`limb`]); the six
//! generators are kept in a tripod arrangement by [`gait`]. Two closed-loop
//! experiments drive the walker: a rate-mode spiking reflex network that turns
//! away from a stationary predator ([`snn`], [`escape`]) and a tabular
//! Q-learning agent that plans a route through a walled grid ([`maze`]).
//! [`validate`] bundles the structural invariants into one runnable report.

pub mod angle;
pub mod escape;
pub mod gait;
pub mod limb;
pub mod mapping;
pub mod maze;
pub mod snn;
pub mod validate;

pub use angle::AngleDeg;
pub use escape::{EscapeConfig, EscapeError, EscapeWorld, Point2, Pose2D, TraceEntry};
pub use gait::{GaitError, GaitState, LimbId, PhaseTable, TripodGroup};
pub use limb::{CtrState, FtiState, LimbState, Phase, TcState};
pub use mapping::{MappingError, TargetMapping};
pub use maze::{Action, Cell, Hyperparams, Maze, MazeError, QTable};
pub use snn::{Ensemble, LifParams, ReflexConfig, ReflexNetwork, SnnError};
