//! JSON and CSV reports, written atomically.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use reciprec_core::evaluation::{CityMetrics, CohortReport, IndividualMetrics, MeanCi};
use reciprec_core::experiment::ModelRun;
use reciprec_core::synthgen::{SynthConfig, RNG_ALGORITHM};
use reciprec_core::{DatasetStats, UserTable};
use serde::Serialize;

use crate::io::{fmt12, sig12};
use crate::AppError;

/// Writes `path` through a sibling temporary file and a rename, so readers
/// never observe a half-written report.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<(), AppError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| AppError::io(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w).map_err(|e| AppError::io(path, e))?;
        w.flush().map_err(|e| AppError::io(path, e))?;
    }
    tmp.as_file()
        .sync_all()
        .map_err(|e| AppError::io(path, e))?;
    tmp.persist(path).map_err(|e| AppError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), AppError> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")
    })
}

fn r(x: Option<f64>) -> Option<f64> {
    x.map(sig12)
}

#[derive(Debug, Serialize)]
struct CityOut {
    users: usize,
    ic_precision: Option<f64>,
    ic_recall: Option<f64>,
    rc_precision: Option<f64>,
    rc_recall: Option<f64>,
}

impl From<&CityMetrics> for CityOut {
    fn from(c: &CityMetrics) -> Self {
        CityOut {
            users: c.users,
            ic_precision: r(c.ic_precision),
            ic_recall: r(c.ic_recall),
            rc_precision: r(c.rc_precision),
            rc_recall: r(c.rc_recall),
        }
    }
}

#[derive(Debug, Serialize)]
struct MeanCiOut {
    mean: Option<f64>,
    ci_half_width: Option<f64>,
    n: usize,
}

impl From<&MeanCi> for MeanCiOut {
    fn from(m: &MeanCi) -> Self {
        MeanCiOut {
            mean: r(m.mean),
            ci_half_width: r(m.ci_half_width),
            n: m.n,
        }
    }
}

#[derive(Debug, Serialize)]
struct IndividualOut {
    ic_precision: MeanCiOut,
    ic_recall: MeanCiOut,
    rc_precision: MeanCiOut,
    rc_recall: MeanCiOut,
}

impl From<&IndividualMetrics> for IndividualOut {
    fn from(m: &IndividualMetrics) -> Self {
        IndividualOut {
            ic_precision: (&m.ic_precision).into(),
            ic_recall: (&m.ic_recall).into(),
            rc_precision: (&m.rc_precision).into(),
            rc_recall: (&m.rc_recall).into(),
        }
    }
}

#[derive(Debug, Serialize)]
struct AtK {
    city: CityOut,
    individual: IndividualOut,
}

/// `{model: {K: {city, individual}}}` with K keys in numeric order.
pub fn write_metrics(path: &Path, runs: &[ModelRun]) -> Result<(), AppError> {
    let mut out: BTreeMap<&str, BTreeMap<usize, AtK>> = BTreeMap::new();
    for run in runs {
        let per_k = run
            .city
            .iter()
            .zip(&run.individual)
            .map(|(c, i)| {
                (
                    c.k,
                    AtK {
                        city: c.into(),
                        individual: i.into(),
                    },
                )
            })
            .collect();
        out.insert(run.kind.name(), per_k);
    }
    write_json(path, &out)
}

/// `user_id,model,K,ic_hits,ic_set_size,rc_hits,rc_set_size`.
pub fn write_per_user(path: &Path, users: &UserTable, runs: &[ModelRun]) -> Result<(), AppError> {
    write_atomic(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "user_id",
            "model",
            "K",
            "ic_hits",
            "ic_set_size",
            "rc_hits",
            "rc_set_size",
        ])?;
        for run in runs {
            for row in &run.table.rows {
                for (k, h) in run.table.ks.iter().zip(&row.per_k) {
                    csv.write_record([
                        users.id(row.user),
                        run.kind.name(),
                        &k.to_string(),
                        &h.ic_hits.to_string(),
                        &h.ic_set_size.to_string(),
                        &h.rc_hits.to_string(),
                        &h.rc_set_size.to_string(),
                    ])?;
                }
            }
        }
        csv.flush()
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt12).unwrap_or_default()
}

/// One row per penalty and K: four pooled metrics, then four per-user means.
pub fn write_sweep(path: &Path, runs: &[ModelRun]) -> Result<(), AppError> {
    write_atomic(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "penalty",
            "K",
            "city_ic_precision",
            "city_ic_recall",
            "city_rc_precision",
            "city_rc_recall",
            "individual_ic_precision",
            "individual_ic_recall",
            "individual_rc_precision",
            "individual_rc_recall",
        ])?;
        for run in runs {
            for (c, i) in run.city.iter().zip(&run.individual) {
                csv.write_record([
                    fmt12(run.penalty),
                    c.k.to_string(),
                    opt(c.ic_precision),
                    opt(c.ic_recall),
                    opt(c.rc_precision),
                    opt(c.rc_recall),
                    opt(i.ic_precision.mean),
                    opt(i.ic_recall.mean),
                    opt(i.rc_precision.mean),
                    opt(i.rc_recall.mean),
                ])?;
            }
        }
        csv.flush()
    })
}

#[derive(Debug, Serialize)]
struct TTestOut {
    t: f64,
    df: f64,
    p_value: f64,
    significant: bool,
}

#[derive(Debug, Serialize)]
struct DistanceOut {
    attribute: String,
    distance: f64,
}

#[derive(Debug, Serialize)]
struct GenderOut {
    gender: String,
    sr_size: usize,
    ur_size: usize,
    sr_mean_messages: Option<f64>,
    ur_mean_messages: Option<f64>,
    messages_t_test: Option<TTestOut>,
    attribute_distances: Vec<DistanceOut>,
    warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
struct CohortOut {
    k_star: usize,
    sr_size: usize,
    ur_size: usize,
    by_gender: Vec<GenderOut>,
}

/// Writes cohort.json and returns the warnings it recorded.
pub fn write_cohort(path: &Path, report: &CohortReport) -> Result<Vec<String>, AppError> {
    let mut all_warnings = Vec::new();
    let by_gender = report
        .by_gender
        .iter()
        .map(|g| {
            let mut warnings = Vec::new();
            let messages_t_test = match &g.messages_t_test {
                Ok(w) => Some(TTestOut {
                    t: sig12(w.t),
                    df: sig12(w.df),
                    p_value: sig12(w.p_value),
                    significant: w.significant,
                }),
                Err(e) => {
                    warnings.push(format!("{} t-test skipped: {e}", g.gender));
                    None
                }
            };
            let attribute_distances = match &g.attribute_distances {
                Ok(d) => d
                    .iter()
                    .map(|(a, v)| DistanceOut {
                        attribute: a.clone(),
                        distance: sig12(*v),
                    })
                    .collect(),
                Err(e) => {
                    warnings.push(format!("{} attribute distances skipped: {e}", g.gender));
                    Vec::new()
                }
            };
            all_warnings.extend(warnings.iter().cloned());
            GenderOut {
                gender: g.gender.to_string(),
                sr_size: g.sr_size,
                ur_size: g.ur_size,
                sr_mean_messages: r(g.sr_mean_messages),
                ur_mean_messages: r(g.ur_mean_messages),
                messages_t_test,
                attribute_distances,
                warnings,
            }
        })
        .collect();
    let out = CohortOut {
        k_star: report.cohorts.k_star,
        sr_size: report.cohorts.sr.len(),
        ur_size: report.cohorts.ur.len(),
        by_gender,
    };
    write_json(path, &out)?;
    Ok(all_warnings)
}

#[derive(Debug, Serialize)]
struct AttributeOut<'a> {
    name: &'a str,
    categories: &'a [String],
    weights: &'a [f64],
}

#[derive(Debug, Serialize)]
struct GeneratorOut<'a> {
    seed: u64,
    rng: &'static str,
    reply_bias: f64,
    num_users: usize,
    male_fraction: f64,
    total_days: u32,
    target_initial_contacts: usize,
    male_initiation_share: f64,
    target_reciprocity_rate: f64,
    latent_dim: usize,
    activity_mu: f64,
    activity_sigma: f64,
    taste_temperature: f64,
    reply_temperature: f64,
    responsiveness_sigma: f64,
    female_initiator_reply_boost: f64,
    max_reply_delay: u32,
    extra_messages_mean: f64,
    attributes: Vec<AttributeOut<'a>>,
}

#[derive(Debug, Serialize)]
struct StatsOut {
    num_users: usize,
    num_male: usize,
    num_female: usize,
    num_messages: usize,
    initial_contacts: usize,
    reciprocal_dyads: usize,
    male_initiation_share: Option<f64>,
    reciprocity_rate: Option<f64>,
    mean_messages_sent_male: Option<f64>,
    mean_messages_sent_female: Option<f64>,
    reply_rate_male: Option<f64>,
    reply_rate_female: Option<f64>,
}

#[derive(Debug, Serialize)]
struct StatsFile<'a> {
    generator: GeneratorOut<'a>,
    stats: StatsOut,
}

pub fn write_stats(
    path: &Path,
    cfg: &SynthConfig,
    reply_bias: f64,
    s: &DatasetStats,
) -> Result<(), AppError> {
    let generator = GeneratorOut {
        seed: cfg.seed,
        rng: RNG_ALGORITHM,
        reply_bias: sig12(reply_bias),
        num_users: cfg.num_users,
        male_fraction: cfg.male_fraction,
        total_days: cfg.total_days,
        target_initial_contacts: cfg.target_initial_contacts,
        male_initiation_share: cfg.male_initiation_share,
        target_reciprocity_rate: cfg.target_reciprocity_rate,
        latent_dim: cfg.latent_dim,
        activity_mu: cfg.activity_mu,
        activity_sigma: cfg.activity_sigma,
        taste_temperature: cfg.taste_temperature,
        reply_temperature: cfg.reply_temperature,
        responsiveness_sigma: cfg.responsiveness_sigma,
        female_initiator_reply_boost: cfg.female_initiator_reply_boost,
        max_reply_delay: cfg.max_reply_delay,
        extra_messages_mean: cfg.extra_messages_mean,
        attributes: cfg
            .attributes
            .iter()
            .map(|a| AttributeOut {
                name: &a.name,
                categories: &a.categories,
                weights: &a.weights,
            })
            .collect(),
    };
    let stats = StatsOut {
        num_users: s.num_users,
        num_male: s.num_male,
        num_female: s.num_female,
        num_messages: s.num_messages,
        initial_contacts: s.initial_contacts,
        reciprocal_dyads: s.reciprocal_dyads,
        male_initiation_share: r(s.male_initiation_share),
        reciprocity_rate: r(s.reciprocity_rate),
        mean_messages_sent_male: r(s.mean_messages_sent_male),
        mean_messages_sent_female: r(s.mean_messages_sent_female),
        reply_rate_male: r(s.reply_rate_male),
        reply_rate_female: r(s.reply_rate_female),
    };
    write_json(path, &StatsFile { generator, stats })
}
