//! Closed-loop predator escape.
//!
//! Each iteration senses the stimulus angle of a stationary predator, asks a
//! [`TurnPolicy`] for a pivot, turns, walks one time step at constant speed
//! and advances the gait by one phase epoch.
//!
//! Coordinates are planar with x east and y north; headings and bearings are
//! compass angles (north 0°, east +90°).

use crate::angle::AngleDeg;
use crate::gait::{GaitState, TripodGroup};
use crate::limb::Phase;
use crate::snn::TurnPolicy;

/// Gait iterations per simulation time step (one swing/stance epoch).
pub const GAIT_ITERATIONS_PER_STEP: u64 = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EscapeError {
    #[error("robot and predator coincide at ({x}, {y})")]
    DegenerateGeometry { x: f64, y: f64 },
    #[error("escape run needs at least one iteration")]
    ZeroIterations,
    #[error("speed must be finite and non-negative, got {0}")]
    InvalidSpeed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub heading: AngleDeg,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, heading: AngleDeg) -> Self {
        Pose2D { x, y, heading }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

fn bearing(from: Point2, to: Point2) -> Result<AngleDeg, EscapeError> {
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    if dx == 0.0 && dy == 0.0 {
        return Err(EscapeError::DegenerateGeometry {
            x: from.x,
            y: from.y,
        });
    }
    Ok(AngleDeg::bearing(dx, dy))
}

/// Angle from the robot's rear axis to the predator, clockwise positive.
///
/// A predator straight behind the robot gives 0°.
pub fn stimulus_angle(robot: &Pose2D, predator: Point2) -> Result<AngleDeg, EscapeError> {
    let to_predator = bearing(robot.position(), predator)?;
    let rear = robot.heading + AngleDeg::new(180.0);
    Ok(to_predator.diff(rear))
}

/// Signed turn that points the robot directly away from the predator.
///
/// A predator dead ahead yields +180°.
pub fn away_turn(robot: &Pose2D, predator: Point2) -> Result<AngleDeg, EscapeError> {
    let away = bearing(predator, robot.position())?;
    Ok(away.diff(robot.heading))
}

/// Angle between the robot's heading and the direction straight away from
/// the predator, in `[0, 180]`.
pub fn away_misalignment(robot: &Pose2D, predator: Point2) -> Result<f64, EscapeError> {
    Ok(away_turn(robot, predator)?.degrees().abs())
}

/// Initial geometry and motion constants of an escape scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeConfig {
    pub robot: Pose2D,
    pub predator: Point2,
    /// Distance covered per time step.
    pub speed: f64,
}

impl Default for EscapeConfig {
    /// Robot at the origin facing north, predator five units due south,
    /// unit speed.
    fn default() -> Self {
        EscapeConfig {
            robot: Pose2D::new(0.0, 0.0, AngleDeg::ZERO),
            predator: Point2::new(0.0, -5.0),
            speed: 1.0,
        }
    }
}

/// One recorded time step.
///
/// `stimulus_angle` and `angle_of_turn` are the values that moved the robot
/// into `pose`; both are `None` for the initial entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: u64,
    pub pose: Pose2D,
    pub stimulus_angle: Option<AngleDeg>,
    pub angle_of_turn: Option<AngleDeg>,
    pub tripod_a: Phase,
    pub tripod_b: Phase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeWorld {
    robot: Pose2D,
    predator: Point2,
    speed: f64,
    gait: GaitState,
    trace: Vec<TraceEntry>,
}

impl EscapeWorld {
    pub fn new(config: &EscapeConfig) -> Result<EscapeWorld, EscapeError> {
        if !(config.speed >= 0.0 && config.speed.is_finite()) {
            return Err(EscapeError::InvalidSpeed(config.speed));
        }
        // reject coincident positions up front
        bearing(config.robot.position(), config.predator)?;
        let gait = GaitState::init();
        Ok(EscapeWorld {
            robot: config.robot,
            predator: config.predator,
            speed: config.speed,
            gait,
            trace: vec![TraceEntry {
                iteration: 0,
                pose: config.robot,
                stimulus_angle: None,
                angle_of_turn: None,
                tripod_a: gait.group_phase(TripodGroup::A),
                tripod_b: gait.group_phase(TripodGroup::B),
            }],
        })
    }

    pub fn robot(&self) -> &Pose2D {
        &self.robot
    }

    pub fn predator(&self) -> Point2 {
        self.predator
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn gait(&self) -> &GaitState {
        &self.gait
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn iterations(&self) -> u64 {
        self.trace.len() as u64 - 1
    }

    pub fn distance(&self) -> f64 {
        self.robot.position().distance(self.predator)
    }

    /// Sense, pivot, walk one time step, and advance the gait one epoch.
    pub fn step(&self, policy: &impl TurnPolicy) -> Result<EscapeWorld, EscapeError> {
        let stimulus = stimulus_angle(&self.robot, self.predator)?;
        let turn = policy.turn(stimulus);
        let heading = self.robot.heading + turn;
        let rad = heading.radians();
        let robot = Pose2D::new(
            self.robot.x + self.speed * rad.sin(),
            self.robot.y + self.speed * rad.cos(),
            heading,
        );
        let gait = self.gait.advance(GAIT_ITERATIONS_PER_STEP);
        let mut trace = self.trace.clone();
        trace.push(TraceEntry {
            iteration: self.iterations() + 1,
            pose: robot,
            stimulus_angle: Some(stimulus),
            angle_of_turn: Some(turn),
            tripod_a: gait.group_phase(TripodGroup::A),
            tripod_b: gait.group_phase(TripodGroup::B),
        });
        Ok(EscapeWorld {
            robot,
            predator: self.predator,
            speed: self.speed,
            gait,
            trace,
        })
    }

    pub fn run(
        &self,
        policy: &impl TurnPolicy,
        iterations: u64,
    ) -> Result<EscapeWorld, EscapeError> {
        if iterations == 0 {
            return Err(EscapeError::ZeroIterations);
        }
        let mut w = self.step(policy)?;
        for _ in 1..iterations {
            w = w.step(policy)?;
        }
        Ok(w)
    }

    /// Trajectory as CSV, one row per trace entry.
    pub fn trace_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "iteration",
            "x",
            "y",
            "heading_deg",
            "stimulus_angle_deg",
            "angle_of_turn_deg",
            "tripodA_phase",
            "tripodB_phase",
        ])
        .expect("in-memory write");
        let opt = |a: Option<AngleDeg>| a.map(|a| fmt6(a.degrees())).unwrap_or_default();
        for e in &self.trace {
            w.write_record([
                e.iteration.to_string(),
                fmt6(e.pose.x),
                fmt6(e.pose.y),
                fmt6(e.pose.heading.degrees()),
                opt(e.stimulus_angle),
                opt(e.angle_of_turn),
                e.tripod_a.to_string(),
                e.tripod_b.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }
}

// avoids "-0.000000" in exported files
fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

pub fn step_escape(w: &EscapeWorld, policy: &impl TurnPolicy) -> Result<EscapeWorld, EscapeError> {
    w.step(policy)
}

pub fn run_escape(
    initial: &EscapeWorld,
    policy: &impl TurnPolicy,
    iterations: u64,
) -> Result<EscapeWorld, EscapeError> {
    initial.run(policy, iterations)
}
