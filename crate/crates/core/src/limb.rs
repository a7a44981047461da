//! Three-joint limb morphology and the per-limb central pattern generator.
//!
//! A limb is described by the states of its thoraco-coxal (TC),
//! coxa-trochanteral (CTr) and femur-tibia (FTi) joints. Of the eight joint
//! combinations only four are reachable, and the generator cycles through
//! them in a fixed order.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TcState {
    Protraction,
    Retraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CtrState {
    Levitation,
    Depression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FtiState {
    Extension,
    Flexion,
}

impl TcState {
    pub const ALL: [TcState; 2] = [TcState::Protraction, TcState::Retraction];
}

impl CtrState {
    pub const ALL: [CtrState; 2] = [CtrState::Levitation, CtrState::Depression];
}

impl FtiState {
    pub const ALL: [FtiState; 2] = [FtiState::Extension, FtiState::Flexion];
}

/// Joint-state triple in (TC, CTr, FTi) order.
pub type JointTriple = (TcState, CtrState, FtiState);

/// One of the four legal limb states.
///
/// The joint triple is derived from the label, so an illegal combination
/// cannot be held in this type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LimbState {
    /// Retraction, levitation, extension (`RLE`).
    S1,
    /// Protraction, levitation, extension (`PLE`).
    S2,
    /// Protraction, depression, extension (`PDE`).
    S3,
    /// Retraction, depression, flexion (`RDF`).
    S4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Swing,
    Stance,
}

impl LimbState {
    pub const ALL: [LimbState; 4] = [LimbState::S1, LimbState::S2, LimbState::S3, LimbState::S4];

    pub fn joints(self) -> JointTriple {
        use CtrState::*;
        use FtiState::*;
        use TcState::*;
        match self {
            LimbState::S1 => (Retraction, Levitation, Extension),
            LimbState::S2 => (Protraction, Levitation, Extension),
            LimbState::S3 => (Protraction, Depression, Extension),
            LimbState::S4 => (Retraction, Depression, Flexion),
        }
    }

    /// The limb state with the given joints, if the morphology allows it.
    pub fn from_joints(tc: TcState, ctr: CtrState, fti: FtiState) -> Option<LimbState> {
        LimbState::ALL
            .into_iter()
            .find(|s| s.joints() == (tc, ctr, fti))
    }

    /// The generator's successor: S1 → S2 → S3 → S4 → S1.
    pub fn next(self) -> LimbState {
        match self {
            LimbState::S1 => LimbState::S2,
            LimbState::S2 => LimbState::S3,
            LimbState::S3 => LimbState::S4,
            LimbState::S4 => LimbState::S1,
        }
    }

    /// Applies [`LimbState::next`] `steps` times.
    pub fn advance(self, steps: u64) -> LimbState {
        let idx = (self.index() as u64 + steps % 4) % 4;
        LimbState::ALL[idx as usize]
    }

    pub fn phase(self) -> Phase {
        match self {
            LimbState::S1 | LimbState::S2 => Phase::Swing,
            LimbState::S3 | LimbState::S4 => Phase::Stance,
        }
    }

    /// Zero-based position in the S1..S4 order.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Joint abbreviation: `RLE`, `PLE`, `PDE` or `RDF`.
    pub fn label(self) -> &'static str {
        match self {
            LimbState::S1 => "RLE",
            LimbState::S2 => "PLE",
            LimbState::S3 => "PDE",
            LimbState::S4 => "RDF",
        }
    }
}

pub fn is_legal_triple(tc: TcState, ctr: CtrState, fti: FtiState) -> bool {
    LimbState::from_joints(tc, ctr, fti).is_some()
}

pub fn next_state(s: LimbState) -> LimbState {
    s.next()
}

pub fn phase_of(s: LimbState) -> Phase {
    s.phase()
}

/// All eight joint combinations, TC varying slowest.
pub fn all_triples() -> impl Iterator<Item = JointTriple> {
    TcState::ALL.into_iter().flat_map(|tc| {
        CtrState::ALL
            .into_iter()
            .flat_map(move |ctr| FtiState::ALL.into_iter().map(move |fti| (tc, ctr, fti)))
    })
}

impl fmt::Display for LimbState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown limb state label {0:?} (expected RLE, PLE, PDE or RDF)")]
pub struct ParseLimbStateError(pub String);

impl FromStr for LimbState {
    type Err = ParseLimbStateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LimbState::ALL
            .into_iter()
            .find(|st| st.label() == s)
            .ok_or_else(|| ParseLimbStateError(s.to_string()))
    }
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Swing => "swing",
            Phase::Stance => "stance",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
