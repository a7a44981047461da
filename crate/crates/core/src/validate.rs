//! Self-check of the structural invariants, runnable from the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gait::{GaitState, LimbId, TripodGroup};
use crate::limb::{all_triples, is_legal_triple, LimbState, Phase};
use crate::maze::{q_update, Action, Cell, Hyperparams, Maze, QTable};
use crate::snn::{lif_rate, LifParams};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    /// Start the tripod check from a gait with one limb out of step.
    /// Exists to prove the check can fail.
    pub corrupt_gait: bool,
}

/// Swing/stance grid for four epochs from the initial gait, rows LH, LM, LF,
/// RH, RM, RF.
pub const TABLE2: [[Phase; 4]; 6] = {
    use Phase::{Stance as St, Swing as Sw};
    [
        [Sw, St, Sw, St],
        [St, Sw, St, Sw],
        [Sw, St, Sw, St],
        [St, Sw, St, Sw],
        [Sw, St, Sw, St],
        [St, Sw, St, Sw],
    ]
};

pub fn run_checks(opts: ValidateOptions) -> Vec<CheckResult> {
    vec![
        check("limb.legal_triples", legal_triples),
        check("limb.next_cycle", next_cycle),
        check("limb.phase_assignment", phase_assignment),
        check("gait.tripod", || tripod(opts.corrupt_gait)),
        check("gait.table2", table2),
        check("lif.zero_below_threshold", lif_zero_below_threshold),
        check("lif.strictly_increasing", lif_increasing),
        check("lif.bounded", lif_bounded),
        check("qlearning.update_exact", q_update_exact),
    ]
}

fn check(name: &'static str, f: impl FnOnce() -> Result<String, String>) -> CheckResult {
    match f() {
        Ok(detail) => CheckResult {
            name,
            passed: true,
            detail,
        },
        Err(detail) => CheckResult {
            name,
            passed: false,
            detail,
        },
    }
}

fn legal_triples() -> Result<String, String> {
    let legal = all_triples()
        .filter(|&(tc, ctr, fti)| is_legal_triple(tc, ctr, fti))
        .count();
    let roundtrip = LimbState::ALL.iter().all(|s| {
        let (tc, ctr, fti) = s.joints();
        LimbState::from_joints(tc, ctr, fti) == Some(*s)
    });
    if legal == 4 && roundtrip {
        Ok("4 of 8 joint triples legal".into())
    } else {
        Err(format!("{legal} of 8 legal, roundtrip={roundtrip}"))
    }
}

fn next_cycle() -> Result<String, String> {
    let order: Vec<_> = (0..4)
        .scan(LimbState::S1, |s, _| {
            let cur = *s;
            *s = s.next();
            Some(cur)
        })
        .collect();
    let periodic = LimbState::ALL
        .iter()
        .all(|&s| s.next().next().next().next() == s);
    if order == LimbState::ALL && periodic {
        Ok("S1→S2→S3→S4→S1".into())
    } else {
        Err(format!("cycle {order:?}, period-4={periodic}"))
    }
}

fn phase_assignment() -> Result<String, String> {
    let got: Vec<_> = LimbState::ALL.iter().map(|s| s.phase()).collect();
    if got == [Phase::Swing, Phase::Swing, Phase::Stance, Phase::Stance] {
        Ok("S1,S2 swing; S3,S4 stance".into())
    } else {
        Err(format!("{got:?}"))
    }
}

fn tripod(corrupt: bool) -> Result<String, String> {
    let mut g = GaitState::init();
    if corrupt {
        let mut states = *g.states();
        states[LimbId::LF.index()] = states[LimbId::LF.index()].next();
        g = GaitState::from_states(states, 0);
    }
    for _ in 0..16 {
        g.check()
            .map_err(|e| format!("iteration {}: {e}", g.iteration()))?;
        if g.stance_count() != 3 {
            return Err(format!(
                "iteration {}: {} limbs in stance",
                g.iteration(),
                g.stance_count()
            ));
        }
        if g.group_phase(TripodGroup::A) == g.group_phase(TripodGroup::B) {
            return Err(format!("iteration {}: tripods in phase", g.iteration()));
        }
        g = g.step();
    }
    Ok("16 iterations, 3 limbs in stance throughout".into())
}

fn table2() -> Result<String, String> {
    let t = GaitState::init()
        .phase_table(4)
        .map_err(|e| e.to_string())?;
    for (limb, expected) in LimbId::ALL.iter().zip(TABLE2) {
        if t.row(*limb) != expected {
            return Err(format!("{limb}: {:?}", t.row(*limb)));
        }
    }
    Ok("6×4 grid matches".into())
}

fn lif_zero_below_threshold() -> Result<String, String> {
    let p = LifParams::default();
    let bad: Vec<f64> = (0..=1000)
        .map(|k| -5.0 + 6.0 * k as f64 / 1000.0)
        .filter(|&j| lif_rate(j, &p) != 0.0)
        .collect();
    if bad.is_empty() {
        Ok("zero on [-5, 1]".into())
    } else {
        Err(format!("non-zero at {:?}", &bad[..bad.len().min(3)]))
    }
}

/// 1000-point grid above threshold, log-spaced from 1 + 1e-6 to 1e4.
pub fn lif_grid() -> Vec<f64> {
    (0..1000)
        .map(|k| 1.0 + 10f64.powf(-6.0 + 10.0 * k as f64 / 999.0))
        .collect()
}

fn lif_increasing() -> Result<String, String> {
    let p = LifParams::default();
    let rates: Vec<f64> = lif_grid().iter().map(|&j| lif_rate(j, &p)).collect();
    match rates.windows(2).position(|w| w[1] <= w[0]) {
        None => Ok("strictly increasing on 1000 points".into()),
        Some(i) => Err(format!("rate drops at grid index {i}")),
    }
}

fn lif_bounded() -> Result<String, String> {
    let p = LifParams::default();
    let ceiling = p.max_rate_ceiling();
    let max = lif_grid()
        .iter()
        .map(|&j| lif_rate(j, &p))
        .fold(0.0, f64::max);
    if max < ceiling {
        Ok(format!("max {max:.3} Hz < {ceiling} Hz"))
    } else {
        Err(format!("max {max} Hz reaches ceiling {ceiling} Hz"))
    }
}

fn q_update_exact() -> Result<String, String> {
    let maze = Maze::shipped();
    let cells: Vec<Cell> = maze.open_cells().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..1000 {
        let mut q = QTable::new(&maze);
        for &c in &cells {
            for a in Action::ALL {
                q.set(c, a, rng.random_range(-2.0..2.0));
            }
        }
        let s = cells[rng.random_range(0..cells.len())];
        let s_next = cells[rng.random_range(0..cells.len())];
        let a = Action::ALL[rng.random_range(0..4)];
        let r = [-1.0, 0.0, 1.0][rng.random_range(0..3)];
        let h = Hyperparams {
            alpha: rng.random_range(0.01..=1.0),
            gamma: rng.random_range(0.0..0.99),
            ..Hyperparams::default()
        };
        let old = q.get(s, a);
        let next = q.row(s_next);
        let max_next = next[0].max(next[1]).max(next[2]).max(next[3]);
        let expected = old + h.alpha * (r + h.gamma * max_next - old);
        q_update(&mut q, s, a, r, s_next, &h);
        if q.get(s, a) != expected {
            return Err(format!("tuple {i}: {} != {expected}", q.get(s, a)));
        }
    }
    Ok("1000 randomized tuples bit-exact".into())
}
