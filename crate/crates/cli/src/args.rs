use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fso_linklab::{LinkScenario, SigmaMode};

#[derive(Debug, Parser)]
#[command(
    name = "fso-linklab",
    version,
    about = "BER sweeps for multi-hop / MISO FSO links over log-normal turbulence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep one scenario and write its BER curve as CSV
    Run(RunArgs),
    /// SNR gain of scenario A over scenario B at the target BER
    Compare(CompareArgs),
    /// Write the six curves of a figure plus a gains summary
    Reproduce(ReproduceArgs),
    /// List built-in scenarios, or print one as JSON
    Presets(PresetsArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON scenario file
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in scenario name (see `presets`)
    #[arg(long)]
    pub preset: Option<String>,
    /// CSV destination
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Scenario A: preset name or JSON file
    pub a: String,
    /// Scenario B: preset name or JSON file
    pub b: String,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// fig_clear or fig_fog
    pub which: String,
    /// Directory for the CSV bundle (created if missing)
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct PresetsArgs {
    /// Print this preset as a JSON config
    #[arg(long)]
    pub show: Option<String>,
}

/// Flags that take precedence over config fields.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// First SNR grid point (dB)
    #[arg(long, allow_hyphen_values = true)]
    pub snr_start: Option<f64>,
    /// Last SNR grid point (dB)
    #[arg(long, allow_hyphen_values = true)]
    pub snr_stop: Option<f64>,
    /// SNR grid step (dB)
    #[arg(long)]
    pub snr_step: Option<f64>,
    #[arg(long)]
    pub target_ber: Option<f64>,
    /// Monte-Carlo bits per grid point; enables simulation
    #[arg(long)]
    pub mc_trials: Option<u64>,
    /// Monte-Carlo seed; enables simulation
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte-Carlo RNG streams; enables simulation
    #[arg(long)]
    pub partitions: Option<u32>,
    /// Gauss–Hermite order
    #[arg(long)]
    pub quadrature_order: Option<usize>,
    /// from_si or from_cn2
    #[arg(long)]
    pub sigma_mode: Option<SigmaMode>,
}

impl Overrides {
    pub fn apply(&self, scenario: &mut LinkScenario) {
        if let Some(v) = self.snr_start {
            scenario.snr.start = v;
        }
        if let Some(v) = self.snr_stop {
            scenario.snr.stop = v;
        }
        if let Some(v) = self.snr_step {
            scenario.snr.step = v;
        }
        if let Some(v) = self.target_ber {
            scenario.target_ber = v;
        }
        if let Some(v) = self.quadrature_order {
            scenario.quadrature_order = v;
        }
        if let Some(v) = self.sigma_mode {
            scenario.sigma_mode = v;
        }
        if self.mc_trials.is_some() || self.seed.is_some() || self.partitions.is_some() {
            let mut mc = scenario.mc.unwrap_or_default();
            if let Some(v) = self.mc_trials {
                mc.trials = v;
                mc.max_trials = mc.max_trials.max(v);
            }
            if let Some(v) = self.seed {
                mc.seed = v;
            }
            if let Some(v) = self.partitions {
                mc.partitions = v;
            }
            scenario.mc = Some(mc);
        }
    }
}
