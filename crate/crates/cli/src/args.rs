use std::path::PathBuf;

use arw_core::correlation::DEFAULT_S6_CAP;
use arw_core::sampler::CrossingRule;
use arw_core::SequenceKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "arw",
    version,
    about = "Arithmetic random waves on the 2-torus"
)]
pub struct Cli {
    /// Worker threads for the compute kernels (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Flat key=value file of flag defaults; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lattice points, mu(4), c_n and B4 of one energy level.
    Lambda {
        #[arg(value_name = "N", required_unless_present = "n")]
        level: Option<u64>,
        #[arg(long, conflicts_with = "level")]
        n: Option<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact identity and lemma suites; exit 3 on any failure.
    Identities {
        #[arg(value_name = "N", required = true)]
        levels: Vec<u64>,
        #[arg(long, default_value_t = DEFAULT_S6_CAP)]
        cap: usize,
        /// Seed for the Laplace identity points.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Normalised |S6| along a sequence, as CSV; resumes an existing --out file.
    ScanS6 {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long, default_value_t = DEFAULT_S6_CAP)]
        cap: usize,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Monte Carlo nodal-length experiment; appends one record per level.
    Experiment(ExperimentArgs),
    /// Singular squares of the covariance and their measure.
    SingularSet {
        #[arg(long)]
        n: u64,
        /// Grid side (default: the smallest admissible).
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// K2 exact and Taylor values at given points.
    K2Probe {
        #[arg(long)]
        n: u64,
        /// Point `x1,x2`; repeat for several.
        #[arg(long = "x", value_name = "X1,X2", required = true, value_parser = parse_point)]
        points: Vec<[f64; 2]>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Print JSON lines instead of a table.
    #[arg(long)]
    pub json: bool,
    /// Append JSON lines, manifest included, to this file.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SequenceName {
    Generic,
    Cilleruelo,
    NuA,
}

#[derive(Debug, Clone, Args)]
pub struct SequenceArgs {
    #[arg(long, value_enum, default_value = "generic")]
    pub sequence: SequenceName,
    /// Arc half-width for nu_a, in (0, pi/4].
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, default_value_t = 4)]
    pub terms: usize,
}

impl SequenceArgs {
    pub fn kind(&self) -> Result<SequenceKind, String> {
        match (self.sequence, self.a) {
            (SequenceName::Generic, _) => Ok(SequenceKind::Generic),
            (SequenceName::Cilleruelo, _) => Ok(SequenceKind::Cilleruelo),
            (SequenceName::NuA, Some(a)) => Ok(SequenceKind::NuA { a }),
            (SequenceName::NuA, None) => Err("--sequence nu_a needs --a".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleName {
    Linear,
    Refined,
}

impl From<RuleName> for CrossingRule {
    fn from(r: RuleName) -> Self {
        match r {
            RuleName::Linear => CrossingRule::Linear,
            RuleName::Refined => CrossingRule::Refined,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[arg(long, conflicts_with_all = ["sequence", "replay"])]
    pub n: Option<u64>,
    #[arg(long, value_enum, conflicts_with = "replay")]
    pub sequence: Option<SequenceName>,
    #[arg(long, requires = "sequence")]
    pub a: Option<f64>,
    #[arg(long, default_value_t = 3, requires = "sequence")]
    pub terms: usize,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    /// Grid side (default: next power of two above 8 ceil(sqrt n)).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "refined")]
    pub rule: RuleName,
    /// Record file to append to (default: stdout).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Re-run every manifest found in a record file.
    #[arg(long, value_name = "FILE")]
    pub replay: Option<PathBuf>,
    /// With --replay: compare against the file instead of writing; exit 3 on mismatch.
    #[arg(long, requires = "replay")]
    pub check: bool,
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.trim().parse().map_err(|e| format!("{a}: {e}"))?,
            b.trim().parse().map_err(|e| format!("{b}: {e}"))?,
        ]),
        _ => Err(format!("expected X1,X2, got `{s}`")),
    }
}
