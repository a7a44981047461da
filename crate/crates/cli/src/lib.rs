//! Command-line front end: wires configuration to the four experiment
//! pipelines and writes their plot-ready outputs.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hexapod_core::maze::{self, Maze, MazeError};
use hexapod_core::snn::uniform_test_angles;
use hexapod_core::validate::{run_checks, CheckResult, ValidateOptions};
use hexapod_core::{EscapeWorld, GaitState, ReflexNetwork, TargetMapping};
use sha2::{Digest, Sha256};

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "hexapod", version, about = "Hexapod locomotion experiments")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Top-level RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving all output files.
    #[arg(long, short = 'o', global = true)]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tripod phase and limb-state tables.
    Gait(GaitArgs),
    /// Predator escape with the spiking reflex network.
    Escape(EscapeArgs),
    /// Q-learning maze navigation.
    Maze(MazeArgs),
    /// Run the invariant self-checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Args, Default)]
pub struct GaitArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct EscapeArgs {
    #[arg(long)]
    pub iterations: Option<u64>,
    #[arg(long)]
    pub speed: Option<f64>,
    /// Neurons per stage, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub stage_sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub target_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct MazeArgs {
    /// Layout file ('.', '#', 'S', 'T').
    #[arg(long)]
    pub maze: Option<PathBuf>,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct ValidateArgs {
    /// Fault injection: desynchronise one limb before the tripod check.
    #[arg(long, hide = true)]
    pub corrupt_gait: bool,
}

/// Derives an independent seed for a named subsystem.
pub fn subseed(seed: u64, name: &str) -> u64 {
    let digest = Sha256::digest(format!("{name}:{seed}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Merges file configuration and flags; flags win.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut c = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    if let Some(d) = &cli.output_dir {
        c.output_dir = d.clone();
    }
    match &cli.command {
        Command::Gait(a) => {
            if let Some(e) = a.epochs {
                c.gait.epochs = e;
            }
        }
        Command::Escape(a) => {
            if let Some(v) = a.iterations {
                c.escape.iterations = v;
            }
            if let Some(v) = a.speed {
                c.escape.speed = v;
            }
            if let Some(v) = &a.stage_sizes {
                c.snn.stage_sizes = v.clone();
            }
            if let Some(v) = &a.target_csv {
                c.snn.target_csv = Some(v.clone());
            }
        }
        Command::Maze(a) => {
            if let Some(v) = &a.maze {
                c.maze.file = Some(v.clone());
            }
            if let Some(v) = a.episodes {
                c.maze.episodes = v;
            }
            if let Some(v) = a.max_steps {
                c.maze.max_steps = v;
            }
            if let Some(v) = a.alpha {
                c.maze.alpha = v;
            }
            if let Some(v) = a.gamma {
                c.maze.gamma = v;
            }
            if let Some(v) = a.epsilon {
                c.maze.epsilon = v;
            }
        }
        Command::Validate(_) => {}
    }
    Ok(c)
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn prepare_output(c: &RunConfig) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&c.output_dir)
        .with_context(|| format!("creating {}", c.output_dir.display()))?;
    Ok(vec![write_output(
        &c.output_dir,
        "effective_config.toml",
        &c.to_toml(),
    )?])
}

/// Writes `phase_table.csv` and `state_table.csv`.
pub fn cmd_gait(c: &RunConfig) -> Result<Vec<PathBuf>> {
    let g = GaitState::init();
    let phases = g.phase_table(c.gait.epochs)?;
    let states = g.state_table(2 * c.gait.epochs);
    let mut files = prepare_output(c)?;
    files.push(write_output(
        &c.output_dir,
        "phase_table.csv",
        &phases.to_csv(),
    )?);
    files.push(write_output(
        &c.output_dir,
        "state_table.csv",
        &states.to_csv(),
    )?);
    Ok(files)
}

pub struct EscapeReport {
    pub world: EscapeWorld,
    pub mae_deg: f64,
    pub files: Vec<PathBuf>,
}

/// Builds the reflex network, runs the escape loop, and writes
/// `trajectory.csv` and `mae_report.csv`.
pub fn cmd_escape(c: &RunConfig) -> Result<EscapeReport> {
    let target = match &c.snn.target_csv {
        Some(p) => {
            let f = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
            TargetMapping::from_csv_reader(f).with_context(|| format!("reading {}", p.display()))?
        }
        None => TargetMapping::AwayTurn,
    };
    let net = ReflexNetwork::build(&c.snn.to_core(), |x| target.eval(x), subseed(c.seed, "snn"))?;
    let angles = uniform_test_angles(c.escape.mae_test_angles);
    let mae = net.evaluate_mae(|x| target.eval(x), &angles)?;
    let world = EscapeWorld::new(&c.escape.to_core())?.run(&net, c.escape.iterations)?;

    let target_name = match &c.snn.target_csv {
        Some(p) => p.display().to_string(),
        None => "away_turn".to_string(),
    };
    let sizes: Vec<String> = c.snn.stage_sizes.iter().map(|n| n.to_string()).collect();
    let report = format!(
        "metric,value\nstages,{}\nstage_sizes,{}\ntarget,{}\ntest_angles,{}\nmae_deg,{:.6}\n",
        sizes.len(),
        sizes.join(";"),
        target_name,
        angles.len(),
        mae
    );

    let mut files = prepare_output(c)?;
    files.push(write_output(
        &c.output_dir,
        "trajectory.csv",
        &world.trace_csv(),
    )?);
    files.push(write_output(&c.output_dir, "mae_report.csv", &report)?);
    Ok(EscapeReport {
        world,
        mae_deg: mae,
        files,
    })
}

pub struct MazeReport {
    pub path: Vec<maze::Cell>,
    pub reached_target: bool,
    pub shortest: u32,
    pub stats: Vec<maze::EpisodeStats>,
    pub files: Vec<PathBuf>,
}

/// Trains on the configured layout and writes `qtable.csv`, `path.csv` and
/// `episode_stats.csv`.
pub fn cmd_maze(c: &RunConfig) -> Result<MazeReport> {
    let m = match &c.maze.file {
        Some(p) => Maze::load(p).with_context(|| format!("loading maze {}", p.display()))?,
        None => Maze::shipped(),
    }
    .with_cell_size(c.maze.cell_size);
    let h = c.maze.hyperparams(subseed(c.seed, "maze"));
    let (q, stats) = maze::train(&m, &h)?;
    let (path, reached) = match maze::greedy_path(&q, &m) {
        Ok(p) => (p, true),
        Err(MazeError::NoConvergence { partial, .. }) => (partial, false),
        Err(e) => return Err(e.into()),
    };
    let mut files = prepare_output(c)?;
    files.push(write_output(
        &c.output_dir,
        "qtable.csv",
        &maze::export_qtable(&q, &path, &m),
    )?);
    files.push(write_output(
        &c.output_dir,
        "path.csv",
        &maze::path_csv(&path, &m),
    )?);
    files.push(write_output(
        &c.output_dir,
        "episode_stats.csv",
        &maze::stats_csv(&stats),
    )?);
    Ok(MazeReport {
        shortest: m.distance_to_target(m.source()).expect("validated on load"),
        path,
        reached_target: reached,
        stats,
        files,
    })
}

pub fn cmd_validate(opts: ValidateOptions) -> Vec<CheckResult> {
    run_checks(opts)
}

/// Parses nothing; executes an already-parsed command line.
pub fn run(cli: &Cli) -> Result<ExitCode> {
    let c = resolve_config(cli)?;
    match &cli.command {
        Command::Gait(_) => {
            for f in cmd_gait(&c)? {
                println!("wrote {}", f.display());
            }
        }
        Command::Escape(_) => {
            let r = cmd_escape(&c)?;
            println!(
                "escape: {} iterations, distance {:.3} -> {:.3}, reflex MAE {:.3} deg",
                r.world.iterations(),
                r.world.trace()[0]
                    .pose
                    .position()
                    .distance(r.world.predator()),
                r.world.distance(),
                r.mae_deg
            );
            for f in &r.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Maze(_) => {
            let r = cmd_maze(&c)?;
            if r.reached_target {
                println!(
                    "maze: greedy path reaches target in {} moves (shortest {})",
                    r.path.len() - 1,
                    r.shortest
                );
            } else {
                eprintln!(
                    "warning: greedy policy loops after {} cells without reaching the target",
                    r.path.len()
                );
            }
            for f in &r.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Validate(a) => {
            let results = cmd_validate(ValidateOptions {
                corrupt_gait: a.corrupt_gait,
            });
            let mut ok = true;
            for r in &results {
                println!(
                    "{} {}: {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
                ok &= r.passed;
            }
            if !ok {
                bail!("invariant checks failed");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
