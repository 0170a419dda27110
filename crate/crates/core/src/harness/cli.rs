//! Command-line front end; the `linplan` binary is a thin wrapper around [`run_cli`].

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::{
    cmd_check, cmd_dump, cmd_run, worker_pool, write_json, write_run_outputs, ExperimentConfig, FixtureChoice,
    EXIT_FAIL, EXIT_PASS, EXIT_USAGE,
};
use crate::error::{Error, Result};
use crate::hard::Variant;
use crate::oracle::SmokePlanner;

#[derive(Parser, Debug)]
#[command(name = "linplan", version, about = "Hard linearly realizable MDPs, TensorPlan and their verifiers")]
pub struct Cli {
    /// JSON file with an `ExperimentConfig`; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exhaustive or sampled verification; exits 1 if anything fails.
    Check {
        #[arg(value_enum)]
        target: CheckTarget,
        #[command(flatten)]
        hard: HardArgs,
        #[arg(long, value_parser = parse_variant)]
        variant: Option<Variant>,
        #[arg(long)]
        tol: Option<f64>,
        /// Treat parameter warnings as failures.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        lemma_samples: Option<u64>,
        #[arg(long)]
        lemma_l_max: Option<usize>,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a planner (or the game smoke test) and write runs.csv and summary.json.
    Run {
        #[arg(value_enum)]
        target: RunTarget,
        #[command(flatten)]
        planner: PlannerArgs,
        #[command(flatten)]
        hard: HardArgs,
        #[arg(long)]
        episodes: Option<u64>,
        #[arg(long, value_enum)]
        fixture: Option<FixtureArg>,
        #[arg(long, value_enum)]
        smoke_planner: Option<SmokeArg>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Record per-episode wall time (outputs are then no longer byte-identical across reruns).
        #[arg(long)]
        record_timing: bool,
    },
    /// Enumerate a hard MDP instance as CSV.
    Dump {
        #[arg(value_enum)]
        target: DumpTarget,
        #[command(flatten)]
        hard: HardArgs,
        #[arg(long, value_parser = parse_variant)]
        variant: Option<Variant>,
        #[arg(long)]
        secret_index: Option<usize>,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Default)]
pub struct HardArgs {
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long = "K")]
    pub k: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct PlannerArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "H")]
    pub h: Option<usize>,
    #[arg(long = "A")]
    pub a: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "B")]
    pub b: Option<f64>,
    #[arg(long)]
    pub scale_n1: Option<f64>,
    #[arg(long)]
    pub scale_n2: Option<f64>,
    #[arg(long)]
    pub scale_n3: Option<f64>,
    #[arg(long)]
    pub ed_cap: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum CheckTarget {
    Realizability,
    Lemmas,
    Reduction,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum RunTarget {
    Tensorplan,
    Game,
    Reduction,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum DumpTarget {
    Hardmdp,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum FixtureArg {
    Toy,
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum SmokeArg {
    FixedOutput,
    RandomOutput,
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl HardArgs {
    fn apply(self, c: &mut ExperimentConfig) {
        set(&mut c.p, self.p);
        set(&mut c.k, self.k);
    }
}

impl PlannerArgs {
    fn apply(self, c: &mut ExperimentConfig) {
        set(&mut c.d, self.d);
        set(&mut c.h, self.h);
        set(&mut c.a, self.a);
        set(&mut c.delta, self.delta);
        set(&mut c.b, self.b);
        set(&mut c.scale_n1, self.scale_n1);
        set(&mut c.scale_n2, self.scale_n2);
        set(&mut c.scale_n3, self.scale_n3);
        if self.ed_cap.is_some() {
            c.ed_cap = self.ed_cap;
        }
    }
}

/// Merge a parsed command line into a configuration (flags win over the file).
pub fn resolve(cli: Cli) -> Result<ExperimentConfig> {
    let mut c = match &cli.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    set(&mut c.seed, cli.seed);
    match cli.command {
        Command::Check { target, hard, variant, tol, strict, lemma_samples, lemma_l_max, out } => {
            c.command = "check".into();
            c.target = format!("{target:?}").to_lowercase();
            hard.apply(&mut c);
            if variant.is_some() {
                c.variant = variant;
            }
            set(&mut c.tol, tol);
            c.strict |= strict;
            set(&mut c.lemma_samples, lemma_samples);
            set(&mut c.lemma_l_max, lemma_l_max);
            if out.is_some() {
                c.out = out;
            }
        }
        Command::Run { target, planner, hard, episodes, fixture, smoke_planner, out_dir, record_timing } => {
            c.command = "run".into();
            c.target = format!("{target:?}").to_lowercase();
            planner.apply(&mut c);
            hard.apply(&mut c);
            set(&mut c.episodes, episodes);
            set(
                &mut c.fixture,
                fixture.map(|f| match f {
                    FixtureArg::Toy => FixtureChoice::Toy,
                    FixtureArg::Random => FixtureChoice::Random,
                }),
            );
            set(
                &mut c.smoke_planner,
                smoke_planner.map(|s| match s {
                    SmokeArg::FixedOutput => SmokePlanner::FixedOutput,
                    SmokeArg::RandomOutput => SmokePlanner::RandomOutput,
                }),
            );
            set(&mut c.out_dir, out_dir);
            c.record_timing |= record_timing;
        }
        Command::Dump { target, hard, variant, secret_index, out } => {
            c.command = "dump".into();
            c.target = format!("{target:?}").to_lowercase();
            hard.apply(&mut c);
            if variant.is_some() {
                c.variant = variant;
            }
            set(&mut c.secret_index, secret_index);
            if out.is_some() {
                c.out = out;
            }
        }
    }
    Ok(c)
}

/// Execute a resolved configuration and return the exit code.
pub fn execute(cfg: &ExperimentConfig) -> Result<u8> {
    let pool = worker_pool()?;
    pool.install(|| match cfg.command.as_str() {
        "check" => {
            let outcome = cmd_check(cfg)?;
            if let Some(path) = &cfg.out {
                write_json(path, &outcome.report)?;
            }
            println!("{}", serde_json::to_string_pretty(&outcome.report)?);
            Ok(if outcome.pass { EXIT_PASS } else { EXIT_FAIL })
        }
        "run" => {
            let outcome = cmd_run(cfg)?;
            write_run_outputs(&cfg.out_dir, &outcome)?;
            println!("{}", outcome.summary);
            Ok(if outcome.pass { EXIT_PASS } else { EXIT_FAIL })
        }
        "dump" => {
            let rows = match &cfg.out {
                Some(path) => cmd_dump(cfg, std::fs::File::create(path)?)?,
                None => cmd_dump(cfg, std::io::stdout().lock())?,
            };
            if cfg.out.is_some() {
                eprintln!("wrote {rows} rows");
            }
            Ok(EXIT_PASS)
        }
        other => Err(Error::InvalidParams(format!("unknown command {other:?}"))),
    })
}

/// Parse, resolve and execute; errors are reported on standard error.
pub fn run_cli<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let outcome = resolve(cli).and_then(|cfg| execute(&cfg));
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            EXIT_USAGE
        }
    }
}
