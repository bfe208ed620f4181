//! Argument definitions and their resolution against a config file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use reciprec_core::evaluation::DEFAULT_KS;
use reciprec_core::experiment::ExperimentConfig;
use reciprec_core::recommender::DEFAULT_PENALTY;
use reciprec_core::synthgen::SynthConfig;
use reciprec_core::{ModelKind, RcDefinition};

use crate::config::{FileConfig, List};
use crate::pipeline::{self, DataSource, EvalOptions, SweepOptions};
use crate::AppError;

// Like println!, but a closed stdout (e.g. piped into `head`) is not an error.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

const DEFAULT_USERS: usize = 2000;
const DEFAULT_SEED: u64 = 42;
const DEFAULT_PENALTIES: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

#[derive(Debug, Parser)]
#[command(
    name = "reciprec",
    version,
    about = "Reciprocal collaborative filtering on two-sided contact networks",
    after_help = "Every flag can also be set in the --config file as `flag_name = value`."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory [default: .]
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads, 0 for one per core [default: 0]
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Generator seed [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a calibrated synthetic contact log.
    Synth(SynthArgs),
    /// Evaluate the models on one temporal split.
    Eval(EvalArgs),
    /// Evaluate the hybrid model over a grid of penalties.
    Sweep(SweepArgs),
    /// Compare users with and without successful hybrid recommendations.
    Cohort(CohortArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of users [default: 2000]
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub male_fraction: Option<f64>,
    /// Length of the log in days.
    #[arg(long)]
    pub days: Option<u32>,
    /// Target number of first contacts [default: about 10.1 per user]
    #[arg(long)]
    pub contacts: Option<usize>,
    /// Share of first contacts sent by men.
    #[arg(long)]
    pub male_share: Option<f64>,
    /// Target share of first contacts that get a reply.
    #[arg(long)]
    pub reciprocity: Option<f64>,
    #[arg(long)]
    pub latent_dim: Option<usize>,
    #[arg(long)]
    pub activity_sigma: Option<f64>,
    #[arg(long)]
    pub taste_temperature: Option<f64>,
    #[arg(long)]
    pub reply_temperature: Option<f64>,
    #[arg(long)]
    pub responsiveness_sigma: Option<f64>,
    /// Leave profile attribute columns out of users.csv.
    #[arg(long)]
    pub no_attributes: bool,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Directory holding users.csv and contacts.csv.
    #[arg(long, value_name = "DIR")]
    pub data: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub users_file: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub contacts_file: Option<PathBuf>,
    /// Without input files, generate this many synthetic users [default: 2000]
    #[arg(long)]
    pub users: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// First test day [default: 98]
    #[arg(long)]
    pub split_day: Option<u32>,
    /// Messages a service user must send in each period [default: 5]
    #[arg(long)]
    pub threshold: Option<u32>,
    /// Comma-separated subset of baseline, reciprocity_only, hybrid.
    #[arg(long)]
    pub models: Option<List<ModelKind>>,
    /// Hybrid penalty for one-sided contacts [default: 0.6]
    #[arg(long)]
    pub penalty: Option<f64>,
    /// Comma-separated list lengths [default: 1,5,10,20,50,100]
    #[arg(long)]
    pub ks: Option<List<usize>>,
    /// List length defining successful recommendations [default: largest K]
    #[arg(long)]
    pub k_star: Option<usize>,
    /// Reciprocal ground truth: any_initiator or service_initiated.
    #[arg(long)]
    pub rc_definition: Option<RcDefinition>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Also write contact-matrix, similarity and recommendation CSV dumps.
    #[arg(long)]
    pub dumps: bool,
    #[arg(long, hide = true)]
    pub dense_oracle: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Comma-separated penalty grid [default: 0.2,0.4,0.6,0.8]
    #[arg(long)]
    pub penalties: Option<List<f64>>,
}

#[derive(Debug, Args)]
pub struct CohortArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
}

/// Flag value, else file value. The file key is always consumed.
fn pick<T>(flag: Option<T>, file: &mut FileConfig, key: &str) -> Result<Option<T>, AppError>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    let from_file = file.take(key)?;
    Ok(flag.or(from_file))
}

fn pick_bool(flag: bool, file: &mut FileConfig, key: &str) -> Result<bool, AppError> {
    Ok(flag || file.take(key)?.unwrap_or(false))
}

struct Shared {
    out: PathBuf,
    workers: usize,
    seed: u64,
}

fn shared(common: &Common, file: &mut FileConfig) -> Result<Shared, AppError> {
    Ok(Shared {
        out: pick(common.out.clone(), file, "out")?.unwrap_or_else(|| PathBuf::from(".")),
        workers: pick(common.workers, file, "workers")?.unwrap_or(0),
        seed: pick(common.seed, file, "seed")?.unwrap_or(DEFAULT_SEED),
    })
}

fn synth_config(a: &SynthArgs, seed: u64, file: &mut FileConfig) -> Result<SynthConfig, AppError> {
    let users = pick(a.users, file, "users")?.unwrap_or(DEFAULT_USERS);
    let mut cfg = SynthConfig::with_users(users, seed);
    macro_rules! set {
        ($flag:expr, $key:literal, $field:ident) => {
            if let Some(v) = pick($flag, file, $key)? {
                cfg.$field = v;
            }
        };
    }
    set!(a.male_fraction, "male_fraction", male_fraction);
    set!(a.days, "days", total_days);
    set!(a.contacts, "contacts", target_initial_contacts);
    set!(a.male_share, "male_share", male_initiation_share);
    set!(a.reciprocity, "reciprocity", target_reciprocity_rate);
    set!(a.latent_dim, "latent_dim", latent_dim);
    set!(a.activity_sigma, "activity_sigma", activity_sigma);
    set!(a.taste_temperature, "taste_temperature", taste_temperature);
    set!(a.reply_temperature, "reply_temperature", reply_temperature);
    set!(
        a.responsiveness_sigma,
        "responsiveness_sigma",
        responsiveness_sigma
    );
    if pick_bool(a.no_attributes, file, "no_attributes")? {
        cfg.attributes.clear();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn data_source(a: &DataArgs, seed: u64, file: &mut FileConfig) -> Result<DataSource, AppError> {
    let dir: Option<PathBuf> = pick(a.data.clone(), file, "data")?;
    let users_file: Option<PathBuf> = pick(a.users_file.clone(), file, "users_file")?;
    let contacts_file: Option<PathBuf> = pick(a.contacts_file.clone(), file, "contacts_file")?;
    let users = pick(a.users, file, "users")?;
    let from_dir = |name: &str| dir.as_ref().map(|d| d.join(name));
    match (
        users_file.or_else(|| from_dir("users.csv")),
        contacts_file.or_else(|| from_dir("contacts.csv")),
    ) {
        (Some(users), Some(contacts)) => Ok(DataSource::Files { users, contacts }),
        (None, None) => {
            let cfg = SynthConfig::with_users(users.unwrap_or(DEFAULT_USERS), seed);
            cfg.validate()?;
            Ok(DataSource::Synthetic(cfg))
        }
        _ => Err(AppError::Usage(
            "give both --users-file and --contacts-file, or --data".into(),
        )),
    }
}

fn experiment(a: &ExperimentArgs, file: &mut FileConfig) -> Result<ExperimentConfig, AppError> {
    let d = ExperimentConfig::default();
    let ks = pick(a.ks.clone(), file, "ks")?.map_or_else(|| DEFAULT_KS.to_vec(), |l| l.0);
    let k_star =
        pick(a.k_star, file, "k_star")?.unwrap_or_else(|| ks.iter().copied().max().unwrap_or(1));
    let cfg = ExperimentConfig {
        split_day: pick(a.split_day, file, "split_day")?.unwrap_or(d.split_day),
        service_threshold: pick(a.threshold, file, "threshold")?.unwrap_or(d.service_threshold),
        models: pick(a.models.clone(), file, "models")?.map_or(d.models, |l| l.0),
        penalty: pick(a.penalty, file, "penalty")?.unwrap_or(DEFAULT_PENALTY),
        ks,
        k_star,
        rc_definition: pick(a.rc_definition, file, "rc_definition")?.unwrap_or_default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a parsed command line, printing a short summary to stdout.
pub fn run(cli: Cli) -> Result<(), AppError> {
    let mut file = match &cli.common.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let sh = shared(&cli.common, &mut file)?;
    match &cli.command {
        Command::Synth(a) => {
            let cfg = synth_config(a, sh.seed, &mut file)?;
            file.finish()?;
            let s = pipeline::run_synth(&cfg, &sh.out)?;
            say!(
                "wrote users.csv, contacts.csv, stats.json to {}: {} users, {} messages, {} first contacts, reciprocity {:.3}, male initiation {:.3}",
                sh.out.display(),
                s.num_users,
                s.num_messages,
                s.initial_contacts,
                s.reciprocity_rate.unwrap_or(0.0),
                s.male_initiation_share.unwrap_or(0.0),
            );
        }
        Command::Eval(a) => {
            let opts = EvalOptions {
                source: data_source(&a.data, sh.seed, &mut file)?,
                experiment: experiment(&a.experiment, &mut file)?,
                dumps: pick_bool(a.dumps, &mut file, "dumps")?,
                dense_oracle: pick_bool(a.dense_oracle, &mut file, "dense_oracle")?,
                out: sh.out.clone(),
                workers: sh.workers,
            };
            file.finish()?;
            let outcome = pipeline::run_eval(&opts)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            say!("{} service users", outcome.service_users);
            for run in &outcome.runs {
                for (c, i) in run.city.iter().zip(&run.individual) {
                    say!(
                        "{:<16} K={:<4} city IC recall {}  RC recall {}  individual RC recall {}",
                        run.kind.name(),
                        c.k,
                        show(c.ic_recall),
                        show(c.rc_recall),
                        show(i.rc_recall.mean),
                    );
                }
            }
            if opts.dense_oracle {
                say!("dense oracle: sparse and dense results agree");
            }
        }
        Command::Sweep(a) => {
            let opts = SweepOptions {
                source: data_source(&a.data, sh.seed, &mut file)?,
                experiment: experiment(&a.experiment, &mut file)?,
                penalties: pick(a.penalties.clone(), &mut file, "penalties")?
                    .map_or_else(|| DEFAULT_PENALTIES.to_vec(), |l| l.0),
                out: sh.out.clone(),
                workers: sh.workers,
            };
            file.finish()?;
            let runs = pipeline::run_sweep(&opts)?;
            say!("wrote sweep.csv with {} penalties", runs.len());
        }
        Command::Cohort(a) => {
            let opts = EvalOptions {
                source: data_source(&a.data, sh.seed, &mut file)?,
                experiment: experiment(&a.experiment, &mut file)?,
                dumps: false,
                dense_oracle: false,
                out: sh.out.clone(),
                workers: sh.workers,
            };
            file.finish()?;
            for w in pipeline::run_cohort(&opts)? {
                eprintln!("warning: {w}");
            }
            say!("wrote cohort.json");
        }
    }
    Ok(())
}

fn show(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |v| format!("{v:.4}"))
}
