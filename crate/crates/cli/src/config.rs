//! Run configuration: a TOML file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hexapod_core::maze::Hyperparams;
use hexapod_core::snn::{LifParams, RateBand, ReflexConfig};
use hexapod_core::{AngleDeg, EscapeConfig, Point2, Pose2D};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub gait: GaitSection,
    pub escape: EscapeSection,
    pub snn: SnnSection,
    pub maze: MazeSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            output_dir: PathBuf::from("out"),
            gait: GaitSection::default(),
            escape: EscapeSection::default(),
            snn: SnnSection::default(),
            maze: MazeSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitSection {
    pub epochs: usize,
}

impl Default for GaitSection {
    fn default() -> Self {
        GaitSection { epochs: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EscapeSection {
    pub iterations: u64,
    pub speed: f64,
    pub robot_x: f64,
    pub robot_y: f64,
    pub robot_heading_deg: f64,
    pub predator_x: f64,
    pub predator_y: f64,
    /// Test angles for the MAE report.
    pub mae_test_angles: usize,
}

impl Default for EscapeSection {
    fn default() -> Self {
        let d = EscapeConfig::default();
        EscapeSection {
            iterations: 5,
            speed: d.speed,
            robot_x: d.robot.x,
            robot_y: d.robot.y,
            robot_heading_deg: d.robot.heading.degrees(),
            predator_x: d.predator.x,
            predator_y: d.predator.y,
            mae_test_angles: 100,
        }
    }
}

impl EscapeSection {
    pub fn to_core(&self) -> EscapeConfig {
        EscapeConfig {
            robot: Pose2D::new(
                self.robot_x,
                self.robot_y,
                AngleDeg::new(self.robot_heading_deg),
            ),
            predator: Point2::new(self.predator_x, self.predator_y),
            speed: self.speed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnnSection {
    pub stage_sizes: Vec<usize>,
    pub tau_rc: f64,
    pub tau_ref: f64,
    pub max_rate_low: f64,
    pub max_rate_high: f64,
    pub radius: f64,
    pub reg_factor: f64,
    pub sample_count: usize,
    /// Optional `stimulus_angle_deg,angle_of_turn_deg` table replacing the
    /// geometric away-turn target.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_csv: Option<PathBuf>,
}

impl Default for SnnSection {
    fn default() -> Self {
        let d = ReflexConfig::default();
        SnnSection {
            stage_sizes: d.stage_sizes,
            tau_rc: d.lif.tau_rc,
            tau_ref: d.lif.tau_ref,
            max_rate_low: d.rate_band.low,
            max_rate_high: d.rate_band.high,
            radius: d.radius,
            reg_factor: d.reg_factor,
            sample_count: d.sample_count,
            target_csv: None,
        }
    }
}

impl SnnSection {
    pub fn to_core(&self) -> ReflexConfig {
        ReflexConfig {
            stage_sizes: self.stage_sizes.clone(),
            lif: LifParams {
                tau_rc: self.tau_rc,
                tau_ref: self.tau_ref,
            },
            rate_band: RateBand {
                low: self.max_rate_low,
                high: self.max_rate_high,
            },
            radius: self.radius,
            reg_factor: self.reg_factor,
            sample_count: self.sample_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MazeSection {
    /// Layout file; the built-in 9×9 layout when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    pub cell_size: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub epsilon_min: f64,
    pub episodes: usize,
    pub max_steps: usize,
}

impl Default for MazeSection {
    fn default() -> Self {
        let h = Hyperparams::default();
        MazeSection {
            file: None,
            cell_size: hexapod_core::maze::DEFAULT_CELL_SIZE,
            alpha: h.alpha,
            gamma: h.gamma,
            epsilon: h.epsilon,
            epsilon_min: h.epsilon_min,
            episodes: h.episodes,
            max_steps: h.max_steps,
        }
    }
}

impl MazeSection {
    pub fn hyperparams(&self, seed: u64) -> Hyperparams {
        Hyperparams {
            alpha: self.alpha,
            gamma: self.gamma,
            epsilon: self.epsilon,
            epsilon_min: self.epsilon_min,
            episodes: self.episodes,
            max_steps: self.max_steps,
            seed,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        RunConfig::from_toml(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
