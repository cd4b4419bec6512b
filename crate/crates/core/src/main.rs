use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use randmetric::clustering::build_clusters;
use randmetric::experiment::{
    parse_param_flag, run_experiment, verify_bounds, write_csv, write_json, BoundReport,
    ExperimentConfig, ExperimentKind, OutputFormat, RunOutput,
};
use randmetric::metric::all_pairs_shortest_paths;
use randmetric::{Distribution, Error, WeightedGraph};

#[derive(Parser)]
#[command(
    name = "randmetric",
    version,
    about = "Experiments on random shortest path metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and emit records plus summary.
    Run(RunArgs),
    /// Run an experiment and check it against its analytic bounds (exit 1 on failure).
    Verify(RunArgs),
    /// Write the edge weights of one instance.
    Dump {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "exponential1")]
        distribution: Distribution,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the Δ-ball clustering of an instance and print it as JSON.
    Clusters {
        /// Weight dump to read; otherwise a fresh instance from --n/--seed.
        #[arg(long, conflicts_with = "n")]
        input: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        delta: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<ExperimentKind>,
    /// Comma-separated list of sizes.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// key=value, repeatable.
    #[arg(long = "param")]
    params: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long)]
    workers: Option<usize>,
}

impl RunArgs {
    fn into_config(self) -> randmetric::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_toml_file(path)?,
            None => {
                let experiment = self
                    .experiment
                    .ok_or_else(|| Error::Config("--experiment is required".into()))?;
                let n = self
                    .n
                    .clone()
                    .ok_or_else(|| Error::Config("--n is required".into()))?;
                let trials = self
                    .trials
                    .ok_or_else(|| Error::Config("--trials is required".into()))?;
                ExperimentConfig::new(experiment, n, trials, 0)
            }
        };
        if let Some(e) = self.experiment {
            cfg.experiment = e;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        for p in &self.params {
            let (k, v) = parse_param_flag(p)?;
            cfg.params.insert(k, v);
        }
        if self.out.is_some() {
            cfg.output = self.out;
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        cfg.plan()?;
        Ok(cfg)
    }
}

fn open_output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(out: &RunOutput, report: Option<&BoundReport>) -> randmetric::Result<()> {
    let mut w = open_output(out.config.output.as_ref())?;
    match out.config.format {
        OutputFormat::Csv => write_csv(out, &mut w)?,
        OutputFormat::Json => write_json(out, report, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn print_report(report: &BoundReport) {
    for p in report.points.iter().filter(|p| !p.pass) {
        eprintln!(
            "FAIL {} {} x={:.6} empirical={:.6} bounds=[{:.6}, {:.6}] band={:.6}",
            p.param_tuple, p.quantity, p.x, p.empirical, p.lower, p.upper, p.band
        );
    }
    let failed = report.points.iter().filter(|p| !p.pass).count();
    eprintln!(
        "{}: {} of {} points within bounds",
        if report.pass { "PASS" } else { "FAIL" },
        report.points.len() - failed,
        report.points.len()
    );
}

fn execute(command: Command) -> randmetric::Result<bool> {
    match command {
        Command::Run(args) => {
            let out = run_experiment(&args.into_config()?)?;
            emit(&out, None)?;
            Ok(true)
        }
        Command::Verify(args) => {
            let (out, report) = verify_bounds(&args.into_config()?)?;
            emit(&out, Some(&report))?;
            print_report(&report);
            Ok(report.pass)
        }
        Command::Dump {
            n,
            seed,
            distribution,
            out,
        } => {
            let g = WeightedGraph::generate(n, distribution, seed)?;
            let mut w = open_output(out.as_ref())?;
            g.write_dump(&mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Clusters {
            input,
            n,
            seed,
            delta,
        } => {
            let g = match (input, n) {
                (Some(path), _) => WeightedGraph::read_dump(BufReader::new(File::open(path)?))?,
                (None, Some(n)) => WeightedGraph::generate(n, Distribution::Exponential1, seed)?,
                (None, None) => return Err(Error::Config("give --input or --n".into())),
            };
            let m = all_pairs_shortest_paths(&g);
            let c = build_clusters(&m, delta);
            let mut w = open_output(None)?;
            serde_json::to_writer_pretty(&mut w, &c)?;
            writeln!(w)?;
            w.flush()?;
            Ok(c.verify(&m).is_ok())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (Error::Config(_) | Error::InvalidParameter(_) | Error::Parse(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
