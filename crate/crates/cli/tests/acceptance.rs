//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::collections::{BTreeMap, VecDeque};
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hexapod_cli::{cmd_escape, cmd_gait, cmd_maze, RunConfig};
use hexapod_core::limb::{all_triples, is_legal_triple, next_state, phase_of, Phase};
use hexapod_core::maze::{self, Action, Cell, Hyperparams, Maze, QTable};
use hexapod_core::snn::{lif_rate, uniform_test_angles, LifParams, ReflexConfig};
use hexapod_core::{LimbState, ReflexNetwork, TargetMapping};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scratch() -> tempfile::TempDir {
    tempfile::tempdir().expect("temp dir")
}

fn config_in(dir: &Path) -> RunConfig {
    RunConfig {
        output_dir: dir.to_path_buf(),
        ..RunConfig::default()
    }
}

const EXPECTED_PHASES: &str = "\
Limb,epoch_1,epoch_2,epoch_3,epoch_4
LH,swing,stance,swing,stance
LM,stance,swing,stance,swing
LF,swing,stance,swing,stance
RH,stance,swing,stance,swing
RM,swing,stance,swing,stance
RF,stance,swing,stance,swing
";

fn table_reproduction() -> Outcome {
    let dir = scratch();
    let mut c = config_in(dir.path());
    c.gait.epochs = 4;
    cmd_gait(&c).map_err(|e| format!("{e:#}"))?;
    let got = fs::read_to_string(dir.path().join("phase_table.csv")).map_err(|e| e.to_string())?;
    ensure(got == EXPECTED_PHASES, || format!("grid differs:\n{got}"))?;
    Ok("6x4 grid matches exactly".into())
}

fn state_machine() -> Outcome {
    use LimbState::*;
    let cycle = [S1, S2, S3, S4];
    for (i, s) in cycle.iter().enumerate() {
        let want = cycle[(i + 1) % 4];
        ensure(next_state(*s) == want, || {
            format!("next({s:?}) = {:?}", next_state(*s))
        })?;
        ensure(s.advance(4) == *s, || format!("{s:?} not 4-periodic"))?;
        for k in 1..4 {
            ensure(s.advance(k) != *s, || format!("{s:?} has period {k}"))?;
        }
    }
    let expected_phase = [Phase::Swing, Phase::Swing, Phase::Stance, Phase::Stance];
    for (s, p) in cycle.iter().zip(expected_phase) {
        ensure(phase_of(*s) == p, || format!("phase({s:?})"))?;
    }
    let triples: Vec<_> = all_triples().collect();
    ensure(triples.len() == 8, || {
        format!("{} triples enumerated", triples.len())
    })?;
    let legal: Vec<_> = triples
        .iter()
        .filter(|&&(tc, ctr, fti)| is_legal_triple(tc, ctr, fti))
        .collect();
    ensure(legal.len() == 4, || {
        format!("{} legal triples", legal.len())
    })?;
    for s in cycle {
        ensure(legal.contains(&&s.joints()), || {
            format!("{s:?} joints not legal")
        })?;
    }
    Ok("cycle S1->S2->S3->S4->S1, period 4, 4 of 8 triples legal".into())
}

fn reflex_accuracy() -> Outcome {
    let target = TargetMapping::AwayTurn;
    let angles = uniform_test_angles(100);
    ensure(angles.len() == 100, || "test set size".into())?;
    let mut parts = Vec::new();
    for (n, limit) in [(100usize, 5.0), (500, 2.0)] {
        let cfg = ReflexConfig {
            stage_sizes: vec![n; 4],
            ..ReflexConfig::default()
        };
        let net = ReflexNetwork::build(&cfg, |x| target.eval(x), 42).map_err(|e| e.to_string())?;
        let mae = net
            .evaluate_mae(|x| target.eval(x), &angles)
            .map_err(|e| e.to_string())?;
        ensure(mae <= limit, || format!("{n}x4 MAE {mae:.3} deg > {limit}"))?;
        parts.push(format!("{n}x4 MAE {mae:.3} deg (<= {limit})"));
    }
    Ok(parts.join(", "))
}

fn lif_curve() -> Outcome {
    let p = LifParams::default();
    for j in [-1e6, -1.0, 0.0, 0.5, 0.999_999, 1.0] {
        ensure(lif_rate(j, &p) == 0.0, || {
            format!("rate({j}) = {}", lif_rate(j, &p))
        })?;
    }
    let grid: Vec<f64> = (0..1000)
        .map(|i| 1.0 + 10f64.powf(-6.0 + 10.0 * i as f64 / 999.0))
        .collect();
    let bound = 1.0 / p.tau_ref;
    let mut prev = 0.0;
    for &j in &grid {
        let r = lif_rate(j, &p);
        ensure(r > prev, || {
            format!("not increasing at J={j}: {r} <= {prev}")
        })?;
        ensure(r < bound, || format!("rate {r} >= {bound} at J={j}"))?;
        prev = r;
    }
    Ok(format!(
        "zero at J<=1, increasing on 1000 points, max {prev:.3} < {bound}"
    ))
}

/// Unsigned angle between the heading and the direction pointing away from
/// the predator, in degrees.
fn away_error(x: f64, y: f64, heading_deg: f64, px: f64, py: f64) -> f64 {
    let (hx, hy) = (
        heading_deg.to_radians().sin(),
        heading_deg.to_radians().cos(),
    );
    let (ax, ay) = (x - px, y - py);
    (hx * ay - hy * ax)
        .atan2(hx * ax + hy * ay)
        .abs()
        .to_degrees()
}

fn escape_behaviour() -> Outcome {
    const SLACK_DEG: f64 = 1e-9;
    let dir = scratch();
    let mut c = config_in(dir.path());
    c.escape.iterations = 5;
    let r = cmd_escape(&c).map_err(|e| format!("{e:#}"))?;
    let text = fs::read_to_string(dir.path().join("trajectory.csv")).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(4).map(|v| v.parse().unwrap()).collect())
        .collect();
    ensure(rows.len() == 6, || format!("{} poses in trace", rows.len()))?;
    ensure(r.world.trace().len() == 6, || {
        "in-memory trace length".into()
    })?;

    let (px, py) = (c.escape.predator_x, c.escape.predator_y);
    let mut dist = Vec::new();
    let mut err = Vec::new();
    for e in r.world.trace() {
        let (x, y) = (e.pose.x, e.pose.y);
        dist.push(((x - px).powi(2) + (y - py).powi(2)).sqrt());
        err.push(away_error(x, y, e.pose.heading.degrees(), px, py));
    }
    for w in dist.windows(2) {
        ensure(w[1] > w[0], || format!("distance not increasing: {dist:?}"))?;
    }
    for w in err.windows(2) {
        ensure(w[1] <= w[0] + SLACK_DEG, || {
            format!("misalignment grew: {err:?}")
        })?;
    }
    Ok(format!(
        "6 poses, distance {:.3} -> {:.3}, misalignment {:.1} -> {:.2e} deg",
        dist[0], dist[5], err[0], err[5]
    ))
}

fn q_update_exact() -> Outcome {
    let m = Maze::shipped();
    let cells: Vec<Cell> = m.open_cells().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..1000 {
        let mut q = QTable::new(&m);
        for &c in &cells {
            for a in Action::ALL {
                q.set(c, a, rng.random_range(-10.0..10.0));
            }
        }
        let s = cells[rng.random_range(0..cells.len())];
        let s1 = cells[rng.random_range(0..cells.len())];
        let a = Action::ALL[rng.random_range(0..4)];
        let r = [-1.0, 0.0, 1.0][rng.random_range(0..3)];
        let h = Hyperparams {
            alpha: rng.random_range(1e-3..=1.0),
            gamma: rng.random_range(0.0..1.0),
            ..Hyperparams::default()
        };
        let old = q.get(s, a);
        let max_next = Action::ALL
            .iter()
            .map(|&b| q.get(s1, b))
            .fold(f64::NEG_INFINITY, f64::max);
        let hand = old + h.alpha * (r + h.gamma * max_next - old);
        maze::q_update(&mut q, s, a, r, s1, &h);
        let got = q.get(s, a);
        ensure(got.to_bits() == hand.to_bits(), || {
            format!("tuple {i}: {got:e} != {hand:e}")
        })?;
    }
    Ok("1000 random tuples bit-identical".into())
}

/// Shortest move count from `S` to `T` by breadth-first search over the raw
/// layout characters.
fn bfs_shortest(layout: &str) -> Option<usize> {
    let grid: Vec<&[u8]> = layout
        .lines()
        .filter(|l| !l.is_empty())
        .map(str::as_bytes)
        .collect();
    let find = |ch: u8| -> (usize, usize) {
        grid.iter()
            .enumerate()
            .find_map(|(r, row)| row.iter().position(|&b| b == ch).map(|c| (r, c)))
            .unwrap()
    };
    let (start, goal) = (find(b'S'), find(b'T'));
    let mut seen = vec![vec![false; grid[0].len()]; grid.len()];
    let mut queue = VecDeque::from([(start, 0)]);
    seen[start.0][start.1] = true;
    while let Some(((r, c), d)) = queue.pop_front() {
        if (r, c) == goal {
            return Some(d);
        }
        let steps = [(-1i64, 0i64), (1, 0), (0, 1), (0, -1)];
        for (dr, dc) in steps {
            let (nr, nc) = (r as i64 + dr, c as i64 + dc);
            if nr < 0 || nc < 0 || nr as usize >= grid.len() || nc as usize >= grid[0].len() {
                continue;
            }
            let (nr, nc) = (nr as usize, nc as usize);
            if grid[nr][nc] != b'#' && !seen[nr][nc] {
                seen[nr][nc] = true;
                queue.push_back(((nr, nc), d + 1));
            }
        }
    }
    None
}

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

fn maze_learning() -> Outcome {
    let dir = scratch();
    let c = config_in(dir.path());
    let r = cmd_maze(&c).map_err(|e| format!("{e:#}"))?;
    let oracle = bfs_shortest(maze::SHIPPED_LAYOUT).ok_or("oracle: target unreachable")?;
    ensure(r.reached_target, || {
        format!("greedy path loops after {} cells", r.path.len())
    })?;
    let m = Maze::shipped();
    ensure(r.path.last() == Some(&m.target()), || {
        "path does not end at target".into()
    })?;
    ensure(r.path[0] == Cell::new(0, 0), || {
        "path does not start at source".into()
    })?;
    let moves = r.path.len() - 1;
    ensure(moves == oracle, || {
        format!("greedy {moves} moves, BFS {oracle}")
    })?;

    let steps: Vec<usize> = r.stats.iter().map(|s| s.steps).collect();
    let tenth = steps.len() / 10;
    ensure(tenth > 0, || "too few episodes".into())?;
    let first = median(steps[..tenth].to_vec());
    let last = median(steps[steps.len() - tenth..].to_vec());
    ensure(last <= first, || {
        format!("median steps rose: first {first}, last {last}")
    })?;
    Ok(format!(
        "greedy {moves} moves = BFS {oracle}; median steps {first} -> {last}"
    ))
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_hexapod");
    let mut count = 0;
    for args in [&["gait"][..], &["escape"], &["maze"]] {
        let dir = scratch();
        let mut runs = Vec::new();
        for _ in 0..2 {
            let _ = fs::remove_dir_all(dir.path());
            let status = Command::new(bin)
                .args(["--seed", "7", "-o"])
                .arg(dir.path())
                .args(args)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.success(), || {
                format!(
                    "{args:?} failed: {}",
                    String::from_utf8_lossy(&status.stderr)
                )
            })?;
            runs.push(snapshot(dir.path()));
        }
        ensure(!runs[0].is_empty(), || format!("{args:?} wrote nothing"))?;
        ensure(runs[0] == runs[1], || format!("{args:?} outputs differ"))?;
        count += runs[0].len();
    }
    Ok(format!(
        "gait, escape, maze: {count} files byte-identical across reruns"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "1 table reproduction",
            table_reproduction,
            Duration::from_secs(1),
        ),
        ("2 state machine", state_machine, Duration::from_secs(1)),
        (
            "3 reflex accuracy",
            reflex_accuracy,
            Duration::from_secs(30),
        ),
        ("4 lif curve", lif_curve, Duration::from_secs(1)),
        (
            "5 escape behaviour",
            escape_behaviour,
            Duration::from_secs(5),
        ),
        (
            "6 q-update exactness",
            q_update_exact,
            Duration::from_secs(1),
        ),
        ("7 maze learning", maze_learning, Duration::from_secs(30)),
        ("8 determinism", determinism, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let t = Instant::now();
        let outcome = check();
        let dt = t.elapsed();
        let outcome = match outcome {
            Ok(detail) if dt > limit => Err(format!("{detail}; took {dt:.2?} > {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{dt:.2?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{dt:.2?}]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
