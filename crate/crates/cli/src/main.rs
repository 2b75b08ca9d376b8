use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use surprisal_cli::{run, Command, RunConfig, SeedList};
use surprisal_core::anomaly::DetectionMode;

#[derive(Parser)]
#[command(name = "surprisal", version, about = "k-NN learning, evaluation and anomaly detection in surprisal space")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit feature residuals and weights, print the model summary
    Fit(Opts),
    /// Predict the target for each row of --queries
    Predict(Opts),
    /// Repeated stratified split / fit / score over --seeds
    Evaluate(Opts),
    /// Flag anomalous rows of --queries by conviction threshold
    Detect(Opts),
    /// Conviction report for each row of --queries
    Explain(Opts),
}

#[derive(Args)]
struct Opts {
    /// Training data CSV
    #[arg(long)]
    data: PathBuf,
    /// Column schema (TOML)
    #[arg(long)]
    schema: PathBuf,
    /// Neighbor count [default: ceil(sqrt(N)) clamped to 1..=30]
    #[arg(long)]
    k: Option<usize>,
    /// Lebesgue parameter of the metric; 0 is the geometric mean
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    /// Conviction below which a query is anomalous
    #[arg(long, default_value_t = 0.7)]
    threshold: f64,
    /// Maximum residual-fit iterations
    #[arg(long, default_value_t = 10)]
    iters: usize,
    /// Relative residual change that stops the fit
    #[arg(long, default_value_t = 0.01)]
    tol: f64,
    /// Evaluation seeds: a count N (0..N), a range a..b, or a list a,b,c
    #[arg(long, default_value = "30")]
    seeds: SeedList,
    /// Training fraction for evaluate
    #[arg(long, default_value_t = 0.75)]
    split: f64,
    /// Detection mode: similarity or familiarity
    #[arg(long, default_value = "similarity")]
    mode: DetectionMode,
    /// Hold out only this many sampled cases per residual pass
    #[arg(long)]
    sample: Option<usize>,
    /// Seed for the residual sample outside evaluate
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Query CSV for predict, detect and explain
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Column of --queries holding true anomaly flags (enables F1)
    #[arg(long)]
    truth: Option<String>,
    /// Write per-seed evaluate rows to this CSV
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Report path [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

impl From<Opts> for RunConfig {
    fn from(o: Opts) -> Self {
        RunConfig {
            k: o.k,
            p: o.p,
            threshold: o.threshold,
            iters: o.iters,
            tol: o.tol,
            seeds: o.seeds.0,
            split: o.split,
            mode: o.mode,
            sample: o.sample,
            seed: o.seed,
            out: o.out,
            queries: o.queries,
            truth: o.truth,
            csv: o.csv,
            ..RunConfig::new(o.data, o.schema)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match cli.command {
        Cmd::Fit(o) => (Command::Fit, o),
        Cmd::Predict(o) => (Command::Predict, o),
        Cmd::Evaluate(o) => (Command::Evaluate, o),
        Cmd::Detect(o) => (Command::Detect, o),
        Cmd::Explain(o) => (Command::Explain, o),
    };
    let cfg = RunConfig::from(opts);
    let result = run(command, &cfg).and_then(|text| match &cfg.out {
        Some(path) => surprisal_cli::report::write_text(path, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| surprisal_cli::CliError::Runtime(format!("cannot write report: {e}"))),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("surprisal {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
