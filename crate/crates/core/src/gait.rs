//! Six-limb tripod coordination.
//!
//! Every limb's generator advances one state per iteration, and the two
//! tripods are held two states apart so that one tripod is always in swing
//! while the other carries the body. One phase epoch is two state
//! iterations; [`PhaseTable`] reports one column per epoch.

use std::fmt;

use crate::limb::{LimbState, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LimbId {
    LH,
    LM,
    LF,
    RH,
    RM,
    RF,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TripodGroup {
    /// LH, LF, RM.
    A,
    /// LM, RH, RF.
    B,
}

impl LimbId {
    /// Left side hind-to-front, then right side hind-to-front.
    pub const ALL: [LimbId; 6] = [
        LimbId::LH,
        LimbId::LM,
        LimbId::LF,
        LimbId::RH,
        LimbId::RM,
        LimbId::RF,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn group(self) -> TripodGroup {
        match self {
            LimbId::LH | LimbId::LF | LimbId::RM => TripodGroup::A,
            LimbId::LM | LimbId::RH | LimbId::RF => TripodGroup::B,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LimbId::LH => "LH",
            LimbId::LM => "LM",
            LimbId::LF => "LF",
            LimbId::RH => "RH",
            LimbId::RM => "RM",
            LimbId::RF => "RF",
        }
    }
}

impl fmt::Display for LimbId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl TripodGroup {
    pub fn members(self) -> [LimbId; 3] {
        match self {
            TripodGroup::A => [LimbId::LH, LimbId::LF, LimbId::RM],
            TripodGroup::B => [LimbId::LM, LimbId::RH, LimbId::RF],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GaitError {
    #[error("phase table needs at least one epoch")]
    ZeroEpochs,
    #[error("tripod {group:?} is split: {limb_a} is {state_a}, {limb_b} is {state_b}")]
    SplitTripod {
        group: TripodGroup,
        limb_a: LimbId,
        state_a: LimbState,
        limb_b: LimbId,
        state_b: LimbState,
    },
    #[error("tripods are not phase-opposed: A is {a}, B is {b}")]
    NotOpposed { a: LimbState, b: LimbState },
}

/// States of all six limbs plus the number of iterations applied so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GaitState {
    states: [LimbState; 6],
    iteration: u64,
}

impl GaitState {
    /// Tripod A starts at the beginning of swing, tripod B at the beginning
    /// of stance.
    pub fn init() -> Self {
        let mut states = [LimbState::S1; 6];
        for limb in TripodGroup::B.members() {
            states[limb.index()] = LimbState::S3;
        }
        GaitState {
            states,
            iteration: 0,
        }
    }

    /// Builds a state from arbitrary limb states without checking the tripod
    /// invariants. Use [`GaitState::check`] to validate.
    pub fn from_states(states: [LimbState; 6], iteration: u64) -> Self {
        GaitState { states, iteration }
    }

    pub fn state(&self, limb: LimbId) -> LimbState {
        self.states[limb.index()]
    }

    pub fn states(&self) -> &[LimbState; 6] {
        &self.states
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn phase(&self, limb: LimbId) -> Phase {
        self.state(limb).phase()
    }

    /// State shared by a tripod; reads the group's first member.
    pub fn group_state(&self, group: TripodGroup) -> LimbState {
        self.state(group.members()[0])
    }

    pub fn group_phase(&self, group: TripodGroup) -> Phase {
        self.group_state(group).phase()
    }

    /// One coordination iteration: every limb moves to the next state.
    pub fn step(&self) -> GaitState {
        self.advance(1)
    }

    pub fn advance(&self, iterations: u64) -> GaitState {
        GaitState {
            states: self.states.map(|s| s.advance(iterations)),
            iteration: self.iteration + iterations,
        }
    }

    pub fn stance_count(&self) -> usize {
        self.states
            .iter()
            .filter(|s| s.phase() == Phase::Stance)
            .count()
    }

    /// Verifies that each tripod moves as a unit and that the tripods are
    /// two generator steps apart.
    pub fn check(&self) -> Result<(), GaitError> {
        for group in [TripodGroup::A, TripodGroup::B] {
            let members = group.members();
            let first = members[0];
            for &other in &members[1..] {
                if self.state(other) != self.state(first) {
                    return Err(GaitError::SplitTripod {
                        group,
                        limb_a: first,
                        state_a: self.state(first),
                        limb_b: other,
                        state_b: self.state(other),
                    });
                }
            }
        }
        let a = self.group_state(TripodGroup::A);
        let b = self.group_state(TripodGroup::B);
        if a.advance(2) != b {
            return Err(GaitError::NotOpposed { a, b });
        }
        Ok(())
    }

    /// Phases over `epochs` columns; column `k` is the phase after `2k`
    /// iterations from `self`.
    pub fn phase_table(&self, epochs: usize) -> Result<PhaseTable, GaitError> {
        if epochs == 0 {
            return Err(GaitError::ZeroEpochs);
        }
        let columns: Vec<[Phase; 6]> = (0..epochs)
            .map(|k| {
                let g = self.advance(2 * k as u64);
                LimbId::ALL.map(|l| g.phase(l))
            })
            .collect();
        Ok(PhaseTable { columns })
    }

    /// Limb states for `iterations` consecutive iterations, starting with
    /// `self`.
    pub fn state_table(&self, iterations: usize) -> StateTable {
        let columns = (0..iterations)
            .map(|k| self.advance(k as u64).states)
            .collect();
        StateTable {
            first_iteration: self.iteration,
            columns,
        }
    }
}

impl Default for GaitState {
    fn default() -> Self {
        GaitState::init()
    }
}

pub fn init_gait() -> GaitState {
    GaitState::init()
}

pub fn step_gait(g: &GaitState) -> GaitState {
    g.step()
}

/// Swing/stance grid, rows in [`LimbId::ALL`] order, one column per epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseTable {
    columns: Vec<[Phase; 6]>,
}

impl PhaseTable {
    pub fn epochs(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, limb: LimbId, epoch: usize) -> Phase {
        self.columns[epoch][limb.index()]
    }

    pub fn row(&self, limb: LimbId) -> Vec<Phase> {
        self.columns.iter().map(|c| c[limb.index()]).collect()
    }

    /// `Limb,epoch_1,...,epoch_N` followed by one row per limb.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["Limb".to_string()];
        header.extend((1..=self.epochs()).map(|k| format!("epoch_{k}")));
        write_grid(&header, |limb| {
            self.row(limb)
                .iter()
                .map(|p| p.as_str().to_string())
                .collect()
        })
    }
}

/// Limb states per iteration, rows in [`LimbId::ALL`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateTable {
    first_iteration: u64,
    columns: Vec<[LimbState; 6]>,
}

impl StateTable {
    pub fn row(&self, limb: LimbId) -> Vec<LimbState> {
        self.columns.iter().map(|c| c[limb.index()]).collect()
    }

    /// `Limb,iter_0,...` with `RLE`/`PLE`/`PDE`/`RDF` cells.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["Limb".to_string()];
        header.extend(
            (0..self.columns.len() as u64).map(|k| format!("iter_{}", self.first_iteration + k)),
        );
        write_grid(&header, |limb| {
            self.row(limb)
                .iter()
                .map(|s| s.label().to_string())
                .collect()
        })
    }
}

fn write_grid(header: &[String], cells: impl Fn(LimbId) -> Vec<String>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for limb in LimbId::ALL {
        let mut rec = vec![limb.as_str().to_string()];
        rec.extend(cells(limb));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}
