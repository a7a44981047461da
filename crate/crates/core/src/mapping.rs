//! Stimulus-angle → turn-angle mappings the reflex network is trained on.

use std::io::Read;

use crate::angle::AngleDeg;
use crate::escape::{away_turn, Point2, Pose2D};
use crate::snn::TurnPolicy;

pub const MAPPING_HEADER: [&str; 2] = ["stimulus_angle_deg", "angle_of_turn_deg"];

#[derive(Debug, thiserror::Error)]
pub enum MappingError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("expected header {expected:?}, found {found:?}")]
    Header { expected: String, found: String },
    #[error("row {row}: {msg}")]
    Row { row: usize, msg: String },
    #[error("mapping table has no rows")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetMapping {
    /// Turn straight away from the predator, derived from the escape
    /// geometry.
    AwayTurn,
    /// Piecewise-linear interpolation through `(stimulus, turn)` knots,
    /// sorted by stimulus; clamped outside the first and last knot.
    Table(Vec<(f64, f64)>),
}

impl TargetMapping {
    /// Turn for `stimulus` degrees.
    ///
    /// For [`TargetMapping::AwayTurn`] the result is the representative of
    /// the geometric turn nearest to `stimulus`, which keeps the mapping
    /// continuous across the whole `[-180, 180]` representation range.
    pub fn eval(&self, stimulus: f64) -> f64 {
        match self {
            TargetMapping::AwayTurn => {
                let turn = geometric_away_turn(AngleDeg::new(stimulus));
                stimulus + AngleDeg::new(turn.degrees() - stimulus).degrees()
            }
            TargetMapping::Table(knots) => interpolate(knots, stimulus),
        }
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<TargetMapping, MappingError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != MAPPING_HEADER {
            return Err(MappingError::Header {
                expected: MAPPING_HEADER.join(","),
                found: header.iter().collect::<Vec<_>>().join(","),
            });
        }
        let mut knots: Vec<(f64, f64)> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            let parse = |k: usize| -> Result<f64, MappingError> {
                let field = rec.get(k).unwrap_or("");
                field.parse::<f64>().map_err(|_| MappingError::Row {
                    row,
                    msg: format!("not a number: {field:?}"),
                })
            };
            let (s, t) = (parse(0)?, parse(1)?);
            for v in [s, t] {
                if !(v > -180.0 && v <= 180.0) {
                    return Err(MappingError::Row {
                        row,
                        msg: format!("angle {v} outside (-180, 180]"),
                    });
                }
            }
            if let Some(&(prev, _)) = knots.last() {
                if s <= prev {
                    return Err(MappingError::Row {
                        row,
                        msg: format!("stimulus {s} not above previous {prev}"),
                    });
                }
            }
            knots.push((s, t));
        }
        if knots.is_empty() {
            return Err(MappingError::Empty);
        }
        Ok(TargetMapping::Table(knots))
    }
}

impl TurnPolicy for TargetMapping {
    fn turn(&self, stimulus: AngleDeg) -> AngleDeg {
        AngleDeg::new(self.eval(stimulus.degrees()))
    }
}

/// Places a predator at unit distance behind a north-facing robot, rotated
/// by `stimulus` clockwise, and asks the escape geometry for the away turn.
fn geometric_away_turn(stimulus: AngleDeg) -> AngleDeg {
    let robot = Pose2D::new(0.0, 0.0, AngleDeg::ZERO);
    let bearing = (AngleDeg::new(180.0) + stimulus).radians();
    let predator = Point2::new(bearing.sin(), bearing.cos());
    away_turn(&robot, predator).expect("predator at unit distance")
}

fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    let (first, last) = (knots[0], knots[knots.len() - 1]);
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = knots.partition_point(|&(s, _)| s <= x);
    let (x0, y0) = knots[i - 1];
    let (x1, y1) = knots[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}
