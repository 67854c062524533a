//! Command-line arguments. Every subcommand's arguments serialize into the
//! run manifest so that `rabi rerun` can execute them again.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::io::{PulseArg, TimeUnit};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RABI_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "rabi", version, about = "Photon statistics of a pulsed two-level emitter")]
pub struct Cli {
    #[command(subcommand)]
    pub action: Action,
}

#[derive(Debug, Subcommand)]
pub enum Action {
    #[command(flatten)]
    Run(Command),
    /// Execute the command recorded in a run manifest again.
    Rerun {
        manifest: PathBuf,
        /// Write the dataset here instead of the recorded path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A dataset-producing subcommand.
#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// P1, P2 and g2[0] against the pulse length.
    ScanWidth(ScanWidthArgs),
    /// Emission statistics against the pulse area.
    ScanArea(ScanAreaArgs),
    /// Emission-time densities of a short pulse on the area axis.
    Densities(DensitiesArgs),
    /// Two-time correlation G2(t1, t2) on a square grid.
    G2grid(G2GridArgs),
    /// Photocount distribution and purities against the pulse length.
    Distribution(DistributionArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ScanWidth(_) => "scan-width",
            Command::ScanArea(_) => "scan-area",
            Command::Densities(_) => "densities",
            Command::G2grid(_) => "g2grid",
            Command::Distribution(_) => "distribution",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::ScanWidth(a) => &a.common,
            Command::ScanArea(a) => &a.common,
            Command::Densities(a) => &a.common,
            Command::G2grid(a) => &a.common,
            Command::Distribution(a) => &a.common,
        }
    }

    pub fn common_mut(&mut self) -> &mut Common {
        match self {
            Command::ScanWidth(a) => &mut a.common,
            Command::ScanArea(a) => &mut a.common,
            Command::Densities(a) => &mut a.common,
            Command::G2grid(a) => &mut a.common,
            Command::Distribution(a) => &mut a.common,
        }
    }
}

/// Computation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Short-pulse counting hierarchy.
    Analytic,
    /// Photon-number-resolved master equation and moment equations.
    Exact,
    /// Sampled jump trajectories.
    MonteCarlo,
    /// Every backend the subcommand supports.
    All,
}

impl Backend {
    pub fn label(self) -> &'static str {
        match self {
            Backend::Analytic => "analytic",
            Backend::Exact => "exact",
            Backend::MonteCarlo => "monte-carlo",
            Backend::All => "all",
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct Common {
    /// square, gaussian or tabulated:<csv with header t,omega>.
    #[arg(long, default_value = "square")]
    pub pulse: PulseArg,
    /// Time unit of a tabulated envelope file.
    #[arg(long, value_enum, default_value_t = TimeUnit::Lifetime)]
    pub time_unit: TimeUnit,
    /// Decay rate in 1/s, for `--time-unit seconds`.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Seed of the Monte Carlo streams.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV path; defaults to `<subcommand>.csv` in $RABI_OUT_DIR or the
    /// working directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ScanWidthArgs {
    #[command(flatten)]
    pub common: Common,
    /// Pulse area in multiples of pi.
    #[arg(long, default_value = "1")]
    pub area: f64,
    /// gamma*T values: a value, a list or min:max:count[:lin|log].
    #[arg(long = "gammaT", default_value = "0.01:10:40:log")]
    pub gamma_t: Grid,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "analytic,exact")]
    pub backend: Vec<Backend>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ScanAreaArgs {
    #[command(flatten)]
    pub common: Common,
    /// Pulse areas in multiples of pi.
    #[arg(long, default_value = "0:5:51")]
    pub area: Grid,
    #[arg(long = "gammaT", default_value_t = 0.3)]
    pub gamma_t: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "analytic,exact")]
    pub backend: Vec<Backend>,
    /// Trajectories per Monte Carlo row.
    #[arg(long, default_value_t = 10_000)]
    pub trajectories: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DensitiesArgs {
    #[command(flatten)]
    pub common: Common,
    /// Pulse area in multiples of pi.
    #[arg(long, default_value = "2")]
    pub area: f64,
    #[arg(long = "gammaT", default_value_t = 1e-3)]
    pub gamma_t: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "analytic")]
    pub backend: Vec<Backend>,
    /// Points of the one-dimensional area axis.
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Points per axis of the two-dimensional files.
    #[arg(long, default_value_t = 81)]
    pub points_2d: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct G2GridArgs {
    #[command(flatten)]
    pub common: Common,
    /// Pulse area in multiples of pi.
    #[arg(long, default_value = "1")]
    pub area: f64,
    #[arg(long = "gammaT", default_value_t = 3.3)]
    pub gamma_t: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "exact")]
    pub backend: Vec<Backend>,
    /// Grid points per axis (at most 256), split between pulse and tail.
    #[arg(long, default_value_t = 160)]
    pub points: usize,
    /// Length of the post-pulse tail in units of 1/gamma.
    #[arg(long, default_value_t = 12.0)]
    pub tail: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DistributionArgs {
    #[command(flatten)]
    pub common: Common,
    /// Pulse area in multiples of pi.
    #[arg(long, default_value = "2")]
    pub area: f64,
    #[arg(long = "gammaT", default_value = "0.001:1:7:log")]
    pub gamma_t: Grid,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "analytic,exact")]
    pub backend: Vec<Backend>,
    /// Trajectories per Monte Carlo row.
    #[arg(long, default_value_t = 10_000)]
    pub trajectories: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn command_survives_json() {
        let cli = Cli::try_parse_from(["rabi", "scan-area", "--area", "0:4:9", "--backend", "analytic,monte-carlo", "--seed", "7"]).unwrap();
        let Action::Run(cmd) = cli.action else { panic!("expected a run") };
        let json = serde_json::to_string(&cmd).unwrap();
        assert_eq!(serde_json::from_str::<Command>(&json).unwrap(), cmd);
    }

    #[test]
    fn bad_grids_are_usage_errors() {
        for grid in ["1:1:5", "0:1:1", "0:1:5:log", "x"] {
            let err = Cli::try_parse_from(["rabi", "scan-width", "--gammaT", grid]).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{grid}");
        }
    }
}
