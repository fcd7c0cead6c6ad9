mod commands;
mod io;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "cim",
    version,
    about = "Copula-based dependence and monotonicity index",
    long_about = "Computes a copula-based dependence index between variable pairs, \
                  detects regions of monotonicity, calibrates null distributions for \
                  significance testing, generates synthetic benchmarks, and \
                  reconstructs dependency networks."
)]
struct Cli {
    /// Worker threads (defaults to all available cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dependence index and region report for one column pair
    Cim(CimArgs),
    /// Pairwise dependence matrix and monotonicity census
    Deps(DepsArgs),
    /// Calibrate and store a null distribution
    Null(NullArgs),
    /// Monte-Carlo power table over patterns, noise levels, and sample sizes
    Power(PowerArgs),
    /// Generate synthetic datasets
    Synth(SynthArgs),
    /// Reconstruct a dependency network by repeated relevance ranking
    Network(NetworkArgs),
}

#[derive(clap::Args)]
struct CimArgs {
    /// Input CSV with a header row
    #[arg(long)]
    input: PathBuf,
    /// Two comma-separated column names, e.g. x,y
    #[arg(long)]
    cols: String,
    /// Minimum scanning increment (fraction like 1/64 or decimal)
    #[arg(long, default_value = "1/64")]
    msi: String,
    /// Boundary-test confidence level
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// Previously calibrated null model (JSON) for a p-value
    #[arg(long)]
    null: Option<PathBuf>,
    /// Output format for --out
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Output path (stdout report is always printed)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Listwise-delete rows with empty cells instead of failing
    #[arg(long)]
    drop_incomplete_rows: bool,
}

#[derive(clap::Args)]
struct DepsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "1/64")]
    msi: String,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// Minimum dependence strength counted by the census
    #[arg(long, default_value_t = 0.4)]
    strength_min: f64,
    /// Significance level of the census
    #[arg(long, default_value_t = 0.05)]
    sig_level: f64,
    /// Bonferroni-correct the significance level by the number of pairs
    #[arg(long)]
    bonferroni: bool,
    /// Seed for null calibration
    #[arg(long)]
    seed: u64,
    /// Replicates per calibrated null
    #[arg(long, default_value_t = 200)]
    null_replicates: u64,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Output prefix; writes <out>_pairs.csv and <out>_summary.json
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    drop_incomplete_rows: bool,
}

#[derive(clap::Args)]
struct NullArgs {
    /// Statistic to calibrate
    #[arg(long, value_parser = ["tau_kl", "cim"])]
    statistic: String,
    /// Sample size per replicate
    #[arg(long)]
    n: u64,
    /// Number of replicates
    #[arg(long)]
    replicates: u64,
    /// Margin kinds, e.g. continuous,continuous or continuous,discrete
    #[arg(long, default_value = "continuous,continuous")]
    kinds: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "1/64")]
    msi: String,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// Write the serialized model here (stdout otherwise)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct PowerArgs {
    /// Comma-separated patterns (any of the 8 functional patterns or
    /// "independence"); defaults to all patterns
    #[arg(long)]
    patterns: Option<String>,
    /// Comma-separated noise standard deviations
    #[arg(long, default_value = "0,0.5,1.0")]
    noise: String,
    /// Comma-separated sample sizes
    #[arg(long, default_value = "100,500")]
    n: String,
    /// Replicates per cell
    #[arg(long, default_value_t = 500)]
    replicates: u64,
    /// Power level reported by the minimum-n summary
    #[arg(long, default_value_t = 0.8)]
    target_power: f64,
    #[arg(long, default_value_t = 0.05)]
    sig_level: f64,
    /// Replicates for each null calibration
    #[arg(long, default_value_t = 500)]
    null_replicates: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "1/64")]
    msi: String,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Write the power table here (stdout otherwise)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SynthArgs {
    /// Functional pattern name
    #[arg(long, group = "mode")]
    pattern: Option<String>,
    /// Copula family (gaussian, frank, gumbel, clayton)
    #[arg(long, group = "mode")]
    copula: Option<String>,
    /// Parabola vertex location in (0, 1)
    #[arg(long, group = "mode")]
    parabola_r: Option<f64>,
    /// Number of variables of a Gaussian Markov chain
    #[arg(long, group = "mode")]
    markov_chain: Option<usize>,
    /// Dependence strength for --copula
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Margins for --copula: gaussian or discrete<LEVELS>, comma-separated
    #[arg(long, default_value = "gaussian,gaussian")]
    margins: String,
    /// Link strength for --markov-chain
    #[arg(long, default_value_t = 0.8)]
    link_tau: f64,
    /// Rows to generate
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Gaussian noise standard deviation (pattern and parabola modes)
    #[arg(long, default_value_t = 0.0)]
    noise_sd: f64,
    /// Noise index: sets noise-sd to index/10 (sweep convention)
    #[arg(long, conflicts_with = "noise_sd")]
    noise_index: Option<u32>,
    #[arg(long)]
    seed: u64,
    /// Output CSV path (stdout otherwise)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct NetworkArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "1/64")]
    msi: String,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    null_replicates: u64,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Output prefix; writes <out>_edges.csv and <out>_network.json
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    drop_incomplete_rows: bool,
}

fn main() {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            std::process::exit(2);
        }
        // deterministic reductions make results independent of pool size
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let result = match cli.command {
        Command::Cim(args) => commands::cmd_cim(args),
        Command::Deps(args) => commands::cmd_deps(args),
        Command::Null(args) => commands::cmd_null(args),
        Command::Power(args) => commands::cmd_power(args),
        Command::Synth(args) => commands::cmd_synth(args),
        Command::Network(args) => commands::cmd_network(args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
