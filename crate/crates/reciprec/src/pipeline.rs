//! The four commands as library functions.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use reciprec_core::dense;
use reciprec_core::evaluation::cohort_analysis;
use reciprec_core::experiment::{self, ExperimentConfig, FittedModel, ModelRun, Prepared};
use reciprec_core::synthgen::{self, SynthConfig};
use reciprec_core::{ContactEvent, DatasetStats, ModelKind, UserTable};

use crate::{io, report, AppError};

/// Where the contact log comes from.
#[derive(Debug, Clone)]
pub enum DataSource {
    Files { users: PathBuf, contacts: PathBuf },
    Synthetic(SynthConfig),
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub source: DataSource,
    pub out: PathBuf,
    pub experiment: ExperimentConfig,
    /// 0 lets rayon pick.
    pub workers: usize,
    pub dense_oracle: bool,
    /// Also write matrix, similarity and recommendation dumps.
    pub dumps: bool,
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub source: DataSource,
    pub out: PathBuf,
    pub experiment: ExperimentConfig,
    pub penalties: Vec<f64>,
    pub workers: usize,
}

// Dense cross-checks are O(N^2 M); keep them to small inputs.
const ORACLE_MAX_USERS: usize = 5000;
const ORACLE_MAX_SERVICE: usize = 600;
const ORACLE_TOL: f64 = 1e-12;

fn with_pool<T: Send>(
    workers: usize,
    f: impl FnOnce() -> Result<T, AppError> + Send,
) -> Result<T, AppError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| AppError::Internal(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

pub fn load(source: &DataSource) -> Result<(UserTable, Vec<ContactEvent>), AppError> {
    match source {
        DataSource::Synthetic(cfg) => Ok(synthgen::generate(cfg)?),
        DataSource::Files { users, contacts } => {
            let open = |p: &Path| {
                File::open(p)
                    .map(BufReader::new)
                    .map_err(|e| AppError::io(p, e))
            };
            let table = io::parse_users(open(users)?, &users.display().to_string())?;
            let events =
                io::parse_contacts(open(contacts)?, &table, &contacts.display().to_string())?;
            Ok((table, events))
        }
    }
}

/// Generates a log and writes users.csv, contacts.csv and stats.json.
pub fn run_synth(cfg: &SynthConfig, out: &Path) -> Result<DatasetStats, AppError> {
    let generated = synthgen::generate_detailed(cfg)?;
    let stats = synthgen::summarize(&generated.users, &generated.events);
    report::write_atomic(&out.join("users.csv"), |w| {
        io::write_users(w, &generated.users)
    })?;
    report::write_atomic(&out.join("contacts.csv"), |w| {
        io::write_contacts(w, &generated.users, &generated.events)
    })?;
    report::write_stats(&out.join("stats.json"), cfg, generated.reply_bias, &stats)?;
    Ok(stats)
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub service_users: usize,
    pub runs: Vec<ModelRun>,
    pub warnings: Vec<String>,
}

/// Runs every configured model over one split and writes metrics.json,
/// per_user_metrics.csv and, when the hybrid model ran, cohort.json.
pub fn run_eval(opts: &EvalOptions) -> Result<EvalOutcome, AppError> {
    let (users, events) = load(&opts.source)?;
    with_pool(opts.workers, || {
        let prep = experiment::prepare(&users, &events, &opts.experiment)?;
        let mut runs = Vec::new();
        for &kind in &opts.experiment.models {
            let fitted = experiment::fit(&prep, kind)?;
            let run =
                experiment::evaluate(&prep, &fitted, opts.experiment.penalty, &opts.experiment.ks)?;
            if opts.dense_oracle {
                check_against_dense(&prep, &fitted, &run)?;
            }
            if opts.dumps {
                write_dumps(&opts.out, &prep, &fitted, &run)?;
            }
            runs.push(run);
        }
        report::write_metrics(&opts.out.join("metrics.json"), &runs)?;
        report::write_per_user(&opts.out.join("per_user_metrics.csv"), &users, &runs)?;
        let mut warnings = Vec::new();
        match runs.iter().find(|r| r.kind == ModelKind::Hybrid) {
            Some(h) => {
                let rep = cohort_analysis(&users, &events, &h.table, opts.experiment.k_star)?;
                warnings = report::write_cohort(&opts.out.join("cohort.json"), &rep)?;
            }
            None => warnings.push("hybrid model not selected; cohort.json not written".into()),
        }
        Ok(EvalOutcome {
            service_users: prep.service.len(),
            runs,
            warnings,
        })
    })
}

/// Hybrid model at every penalty in the grid; writes sweep.csv.
pub fn run_sweep(opts: &SweepOptions) -> Result<Vec<ModelRun>, AppError> {
    if opts.penalties.is_empty() {
        return Err(AppError::Usage("penalty grid is empty".into()));
    }
    let (users, events) = load(&opts.source)?;
    with_pool(opts.workers, || {
        let prep = experiment::prepare(&users, &events, &opts.experiment)?;
        let runs = experiment::sweep(&prep, &opts.penalties, &opts.experiment.ks)?;
        report::write_sweep(&opts.out.join("sweep.csv"), &runs)?;
        Ok(runs)
    })
}

/// Hybrid run plus the SR/UR analysis; writes cohort.json only.
pub fn run_cohort(opts: &EvalOptions) -> Result<Vec<String>, AppError> {
    let (users, events) = load(&opts.source)?;
    with_pool(opts.workers, || {
        let prep = experiment::prepare(&users, &events, &opts.experiment)?;
        let fitted = experiment::fit(&prep, ModelKind::Hybrid)?;
        let run =
            experiment::evaluate(&prep, &fitted, opts.experiment.penalty, &opts.experiment.ks)?;
        let rep = cohort_analysis(&users, &events, &run.table, opts.experiment.k_star)?;
        report::write_cohort(&opts.out.join("cohort.json"), &rep)
    })
}

fn write_dumps(
    out: &Path,
    prep: &Prepared<'_>,
    fitted: &FittedModel,
    run: &ModelRun,
) -> Result<(), AppError> {
    let name = run.kind.name();
    report::write_atomic(&out.join(format!("matrix_{name}.csv")), |w| {
        io::dump_matrix(w, &fitted.contacts, &prep.service, prep.users)
    })?;
    report::write_atomic(&out.join(format!("similarity_{name}.csv")), |w| {
        io::dump_similarity(w, &fitted.similarity, &prep.service, prep.users)
    })?;
    report::write_atomic(&out.join(format!("recommendations_{name}.csv")), |w| {
        io::dump_recommendations(w, &run.recommendations, &prep.service, prep.users)
    })
}

/// Recomputes similarity and lists with the dense reference and fails on
/// any disagreement beyond the tolerance.
fn check_against_dense(
    prep: &Prepared<'_>,
    fitted: &FittedModel,
    run: &ModelRun,
) -> Result<(), AppError> {
    let (n, m) = (prep.service.len(), prep.users.len());
    if m > ORACLE_MAX_USERS || n > ORACLE_MAX_SERVICE {
        return Err(AppError::Usage(format!(
            "--dense-oracle needs at most {ORACLE_MAX_USERS} users and {ORACLE_MAX_SERVICE} service users, got {m} and {n}"
        )));
    }
    let kind = run.kind;
    let model = dense::build(kind, &prep.train_dyads, &prep.service, prep.users);
    for p in 0..n {
        for q in 0..n {
            let (a, b) = (fitted.similarity.get(p, q), model.similarity[p][q]);
            if (a - b).abs() > ORACLE_TOL {
                return Err(AppError::Internal(format!(
                    "{kind}: sparse similarity {a} differs from dense {b} at ({p}, {q})"
                )));
            }
        }
    }
    let k = run.recommendations.list_length;
    let lists = dense::recommend(
        &model,
        &prep.train_dyads,
        &prep.service,
        prep.users,
        run.penalty,
        k,
    );
    for (p, (fast, slow)) in run.recommendations.lists.iter().zip(&lists).enumerate() {
        let mismatch = fast.len() != slow.len()
            || fast.iter().zip(slow).enumerate().any(|(i, (x, y))| {
                let tied = |list: &[(reciprec_core::UserIdx, f64)]| {
                    let near = |j: usize| {
                        list.get(j)
                            .is_some_and(|o| (o.1 - list[i].1).abs() <= ORACLE_TOL)
                    };
                    (i > 0 && near(i - 1)) || near(i + 1)
                };
                (x.1 - y.1).abs() > ORACLE_TOL || (x.0 != y.0 && !(tied(fast) && tied(slow)))
            });
        if mismatch {
            return Err(AppError::Internal(format!(
                "{kind}: sparse and dense recommendations differ for service user {}",
                prep.users.id(prep.service.user(p))
            )));
        }
    }
    Ok(())
}
