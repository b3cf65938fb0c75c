use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aoi_core::experiments::Side;
use aoi_core::{Discipline, DistributionSpec};

#[derive(Debug, Parser)]
#[command(
    name = "aoi",
    version,
    about = "Average age of information for G/G/1/1 queues"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. Each one overrides the matching
/// field of `--config`.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Root seed for Monte Carlo and simulation streams.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo sample paths.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Simulated cycles per replication.
    #[arg(long, global = true)]
    pub cycles: Option<u64>,
    #[arg(long, global = true)]
    pub replications: Option<usize>,
    /// Hard cap on the number of terms of an infinite sum.
    #[arg(long, global = true)]
    pub k_max: Option<usize>,
    /// Event budget per replication; exceeding it is a partial result.
    #[arg(long, global = true)]
    pub max_events: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Interarrival distribution, e.g. `gamma:shape=2,rate=1`.
    #[arg(long, short = 'y')]
    pub arrival: Option<DistributionSpec>,
    /// Service distribution, e.g. `exp:rate=2`.
    #[arg(long, short = 's')]
    pub service: Option<DistributionSpec>,
    /// `blocking` or `preemption`.
    #[arg(long, short = 'd')]
    pub discipline: Option<Discipline>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact average age of one model.
    Age {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated evaluators (default `exact`).
        #[arg(long, short = 'e')]
        evaluators: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Upper bounds on the average age.
    Bound {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated bounds (default `bounds`, every bound of the discipline).
        #[arg(long, short = 'e')]
        evaluators: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Discrete-event simulation of the age process.
    Sim {
        #[command(flatten)]
        model: ModelArgs,
        /// Dump the cycle records of the first replication as CSV.
        #[arg(long)]
        records: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep one or two distribution parameters.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// `side.param=values`, e.g. `arrival.rate=1,2,4` or `service.shape=1:4:7`.
        #[arg(long = "axis")]
        axes: Vec<String>,
        #[arg(long, short = 'e')]
        evaluators: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Rank candidate distributions at equal means.
    Compare {
        #[arg(long, short = 'd')]
        discipline: Option<Discipline>,
        /// Side the candidates replace.
        #[arg(long)]
        side: Option<Side>,
        /// Distribution held fixed on the other side.
        #[arg(long)]
        fixed: Option<DistributionSpec>,
        /// Candidate template; repeat for each candidate.
        #[arg(long = "candidate")]
        candidates: Vec<DistributionSpec>,
        /// Mean grid, `0.2,1,3` or `0.2:3:10`.
        #[arg(long)]
        means: Option<String>,
        #[arg(long, short = 'e')]
        evaluator: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Blocking age with the sums cut after k terms.
    Truncation {
        #[arg(long, short = 'y')]
        arrival: Option<DistributionSpec>,
        #[arg(long, short = 's')]
        service: Option<DistributionSpec>,
        /// Truncation levels, e.g. `1,2,5,10`.
        #[arg(long = "k")]
        k_values: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-check every applicable evaluator against simulation.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: Common,
    },
}
