use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "biphoton", version, about = "Model, simulate and analyze SPDC transverse-spectral correlations")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration; omitted keys take reference defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set pump.waist_um=50`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Worker threads. Never changes any output byte.
    #[arg(long, global = true, env = "BIPHOTON_THREADS")]
    pub threads: Option<usize>,

    /// Simulation seed (same as `--set simulation.seed=N`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Directory receiving every artifact and `manifest.json`.
    #[arg(long, global = true, default_value = "biphoton-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Amplitude grid, theory panels, Schmidt number and theory mode sizes.
    Model {
        /// Pump bandwidth multipliers for a Schmidt-number scan, e.g. `1,4,16`.
        #[arg(long, value_delimiter = ',')]
        bandwidth_trend: Vec<f64>,
        #[arg(long)]
        subregions: Option<usize>,
        /// Skip writing the (large) amplitude tensor.
        #[arg(long)]
        no_grid: bool,
    },
    /// Singles ring in the (k_x, k_y) plane at one wavelength.
    Ring {
        /// Samples per axis.
        #[arg(long, default_value_t = 121)]
        points: usize,
        /// Half width of the square window [rad/mm]; default 1.4 × ring radius.
        #[arg(long)]
        k_max: Option<f64>,
        /// Wavelength of both photons [nm]; default degenerate.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Generate a frame file.
    Simulate {
        #[arg(long)]
        frames: Option<u64>,
        /// Detection efficiency per photon.
        #[arg(long)]
        eta: Option<f64>,
        /// Pair probability per temporal mode; default calibrated.
        #[arg(long)]
        chi: Option<f64>,
        #[arg(long)]
        temporal_modes: Option<u32>,
        /// Mean dark events per arm per frame.
        #[arg(long)]
        dark_rate: Option<f64>,
        /// Drive the arms from independent pulse trains.
        #[arg(long)]
        independent_arms: bool,
        /// File name inside the output directory.
        #[arg(long, default_value = "frames.bpfr")]
        out: String,
    },
    /// Covariance panels, g² map, mode sizes and efficiency from a frame file.
    Analyze {
        #[arg(long, value_name = "FILE")]
        frames: PathBuf,
        #[arg(long)]
        subregions: Option<usize>,
        #[arg(long)]
        band_half_width: Option<usize>,
    },
    /// Schmidt decomposition of a stored or freshly computed amplitude grid.
    Schmidt {
        #[arg(long, value_name = "FILE")]
        grid: Option<PathBuf>,
    },
    /// Compare theory panels with measured covariance panels.
    Report {
        #[arg(long, value_name = "DIR")]
        theory: PathBuf,
        #[arg(long, value_name = "DIR")]
        experiment: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
    },
}

impl Cli {
    /// Configuration overrides implied by flags, applied after `--set`.
    pub fn overrides(&self) -> Vec<String> {
        let mut o = self.common.overrides.clone();
        let mut set = |key: &str, v: String| o.push(format!("{key}={v}"));
        if let Some(s) = self.common.seed {
            set("simulation.seed", s.to_string());
        }
        match &self.command {
            Command::Model { bandwidth_trend, subregions, .. } => {
                if !bandwidth_trend.is_empty() {
                    let list: Vec<String> = bandwidth_trend.iter().map(|f| format!("{f:?}")).collect();
                    set("model.bandwidth_trend", format!("[{}]", list.join(",")));
                }
                if let Some(n) = subregions {
                    set("analysis.subregions", n.to_string());
                }
            }
            Command::Simulate { frames, eta, chi, temporal_modes, dark_rate, independent_arms, .. } => {
                if let Some(v) = frames {
                    set("simulation.n_frames", v.to_string());
                }
                if let Some(v) = eta {
                    set("simulation.efficiency", format!("{v:?}"));
                }
                if let Some(v) = chi {
                    set("simulation.pair_prob", format!("{v:?}"));
                }
                if let Some(v) = temporal_modes {
                    set("simulation.temporal_modes", v.to_string());
                }
                if let Some(v) = dark_rate {
                    set("simulation.dark_count_rate", format!("{v:?}"));
                }
                if *independent_arms {
                    set("simulation.independent_arms", "true".into());
                }
            }
            Command::Analyze { subregions, band_half_width, .. } => {
                if let Some(n) = subregions {
                    set("analysis.subregions", n.to_string());
                }
                if let Some(n) = band_half_width {
                    set("analysis.band_half_width", n.to_string());
                }
            }
            Command::Report { threshold: Some(t), .. } => set("analysis.agreement_threshold", format!("{t:?}")),
            _ => {}
        }
        o
    }
}
