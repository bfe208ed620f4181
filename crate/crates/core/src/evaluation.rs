//! Test-period ground truth, IC/RC precision and recall at K, city- and
//! individual-level aggregation, and the SR/UR cohort analysis.
//!
//! City-level numbers pool hits over all service users; individual-level
//! numbers average each user's own metric. The two disagree whenever a few very
//! active users dominate: hits `{70, 1, 1}` over relevant sets `{100, 10, 10}`
//! give a pooled recall of `72 / 120 = 0.6` but a mean recall of
//! `(0.7 + 0.1 + 0.1) / 3 = 0.3`.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::contact_log::{
    aggregate_dyads, messages_sent, ContactEvent, DyadRecord, Gender, ServiceUserSet, UserIdx,
    UserTable,
};
use crate::recommender::{PartnerIndex, RecommendationList};
use crate::stats::{self, WelchResult};
use crate::{Error, Result};

pub const DEFAULT_KS: [usize; 6] = [1, 5, 10, 20, 50, 100];

/// Which test-period reciprocal dyads count as a service user's reciprocal contacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RcDefinition {
    /// Reciprocal dyads started by either side.
    #[default]
    AnyInitiator,
    /// Only reciprocal dyads the service user started.
    ServiceInitiated,
}

impl core::str::FromStr for RcDefinition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "any" | "any_initiator" => Ok(RcDefinition::AnyInitiator),
            "service" | "service_initiated" => Ok(RcDefinition::ServiceInitiated),
            _ => Err(Error::InvalidParameter(
                "rc definition must be `any_initiator` or `service_initiated`",
            )),
        }
    }
}

impl RcDefinition {
    pub fn name(self) -> &'static str {
        match self {
            RcDefinition::AnyInitiator => "any_initiator",
            RcDefinition::ServiceInitiated => "service_initiated",
        }
    }
}

/// Relevant sets per service user (indexed by service position), each ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub ic: Vec<Vec<UserIdx>>,
    pub rc: Vec<Vec<UserIdx>>,
}

/// Builds IC and RC sets from dyads that begin in the test window. Pairs that
/// already had a training dyad are ignored even if they keep writing.
pub fn ground_truth(
    test_events: &[ContactEvent],
    train_dyads: &[DyadRecord],
    service: &ServiceUserSet,
    users: &UserTable,
    rc_definition: RcDefinition,
) -> GroundTruth {
    let trained = PartnerIndex::new(train_dyads, users.len());
    let mut ic = alloc::vec![Vec::new(); service.len()];
    let mut rc = alloc::vec![Vec::new(); service.len()];
    for d in aggregate_dyads(test_events) {
        if trained.contains(d.initiator, d.responder) {
            continue;
        }
        for (me, other) in [(d.initiator, d.responder), (d.responder, d.initiator)] {
            let Some(p) = service.position(me) else {
                continue;
            };
            let started = me == d.initiator;
            if started {
                ic[p].push(other);
            }
            if d.reciprocal && (started || rc_definition == RcDefinition::AnyInitiator) {
                rc[p].push(other);
            }
        }
    }
    for set in ic.iter_mut().chain(rc.iter_mut()) {
        set.sort_unstable();
    }
    GroundTruth { ic, rc }
}

/// Hit counts for one user at one K.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HitCounts {
    pub ic_hits: usize,
    pub ic_set_size: usize,
    pub rc_hits: usize,
    pub rc_set_size: usize,
}

impl HitCounts {
    pub fn ic_precision(&self, k: usize) -> f64 {
        self.ic_hits as f64 / k as f64
    }

    pub fn rc_precision(&self, k: usize) -> f64 {
        self.rc_hits as f64 / k as f64
    }

    /// `None` when the user has no initial contacts in the test period.
    pub fn ic_recall(&self) -> Option<f64> {
        (self.ic_set_size > 0).then(|| self.ic_hits as f64 / self.ic_set_size as f64)
    }

    pub fn rc_recall(&self) -> Option<f64> {
        (self.rc_set_size > 0).then(|| self.rc_hits as f64 / self.rc_set_size as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserMetrics {
    pub user: UserIdx,
    /// One entry per K of the owning table.
    pub per_k: Vec<HitCounts>,
}

/// Per-user hit counts for one model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerUserTable {
    pub ks: Vec<usize>,
    pub rows: Vec<UserMetrics>,
}

impl PerUserTable {
    pub fn k_position(&self, k: usize) -> Option<usize> {
        self.ks.iter().position(|&x| x == k)
    }
}

fn validate_ks(ks: &[usize]) -> Result<()> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::InvalidParameter(
            "K values must be positive and non-empty",
        ));
    }
    Ok(())
}

/// Counts IC and RC hits within the top K of every service user's list.
pub fn precision_recall_at_k(
    recs: &RecommendationList,
    truth: &GroundTruth,
    service: &ServiceUserSet,
    ks: &[usize],
) -> Result<PerUserTable> {
    validate_ks(ks)?;
    if ks.iter().any(|&k| k > recs.list_length) {
        return Err(Error::InvalidParameter(
            "K exceeds the materialised list length",
        ));
    }
    if recs.lists.len() != service.len() || truth.ic.len() != service.len() {
        return Err(Error::InvalidParameter(
            "recommendations and ground truth must cover the same service users",
        ));
    }
    let rows = (0..service.len())
        .map(|p| {
            let list = &recs.lists[p];
            let (ic, rc) = (&truth.ic[p], &truth.rc[p]);
            let per_k = ks
                .iter()
                .map(|&k| {
                    let top = &list[..k.min(list.len())];
                    HitCounts {
                        ic_hits: top
                            .iter()
                            .filter(|(t, _)| ic.binary_search(t).is_ok())
                            .count(),
                        ic_set_size: ic.len(),
                        rc_hits: top
                            .iter()
                            .filter(|(t, _)| rc.binary_search(t).is_ok())
                            .count(),
                        rc_set_size: rc.len(),
                    }
                })
                .collect();
            UserMetrics {
                user: service.user(p),
                per_k,
            }
        })
        .collect();
    Ok(PerUserTable {
        ks: ks.to_vec(),
        rows,
    })
}

/// Pooled metrics at one K.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CityMetrics {
    pub k: usize,
    pub users: usize,
    pub ic_precision: Option<f64>,
    pub ic_recall: Option<f64>,
    pub rc_precision: Option<f64>,
    pub rc_recall: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Pooled precision `sum(hits) / (K * users)` and recall `sum(hits) / sum(|set|)`.
pub fn aggregate_city(table: &PerUserTable) -> Vec<CityMetrics> {
    table
        .ks
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let mut tot = HitCounts::default();
            for row in &table.rows {
                let h = row.per_k[i];
                tot.ic_hits += h.ic_hits;
                tot.ic_set_size += h.ic_set_size;
                tot.rc_hits += h.rc_hits;
                tot.rc_set_size += h.rc_set_size;
            }
            let n = table.rows.len();
            CityMetrics {
                k,
                users: n,
                ic_precision: ratio(tot.ic_hits, k * n),
                ic_recall: ratio(tot.ic_hits, tot.ic_set_size),
                rc_precision: ratio(tot.rc_hits, k * n),
                rc_recall: ratio(tot.rc_hits, tot.rc_set_size),
            }
        })
        .collect()
}

/// Mean of a per-user metric with its 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanCi {
    pub mean: Option<f64>,
    /// Absent for fewer than two users.
    pub ci_half_width: Option<f64>,
    /// Users included in the mean.
    pub n: usize,
}

impl MeanCi {
    pub fn of(xs: &[f64]) -> Self {
        MeanCi {
            mean: stats::mean(xs),
            ci_half_width: stats::ci95_half_width(xs),
            n: xs.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IndividualMetrics {
    pub k: usize,
    pub ic_precision: MeanCi,
    pub ic_recall: MeanCi,
    pub rc_precision: MeanCi,
    pub rc_recall: MeanCi,
}

/// Per-user means. Recall means skip users whose relevant set is empty;
/// precision means include everyone.
pub fn aggregate_individual(table: &PerUserTable) -> Vec<IndividualMetrics> {
    table
        .ks
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let hits = || table.rows.iter().map(move |r| r.per_k[i]);
            let icp: Vec<f64> = hits().map(|h| h.ic_precision(k)).collect();
            let rcp: Vec<f64> = hits().map(|h| h.rc_precision(k)).collect();
            let icr: Vec<f64> = hits().filter_map(|h| h.ic_recall()).collect();
            let rcr: Vec<f64> = hits().filter_map(|h| h.rc_recall()).collect();
            IndividualMetrics {
                k,
                ic_precision: MeanCi::of(&icp),
                ic_recall: MeanCi::of(&icr),
                rc_precision: MeanCi::of(&rcp),
                rc_recall: MeanCi::of(&rcr),
            }
        })
        .collect()
}

/// Successful (at least one RC hit) and unsuccessful recommendation groups.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cohorts {
    pub k_star: usize,
    pub sr: Vec<UserIdx>,
    pub ur: Vec<UserIdx>,
}

/// Splits the users of a (hybrid) table by whether any RC hit lands in the top `k_star`.
pub fn sr_ur_split(table: &PerUserTable, k_star: usize) -> Result<Cohorts> {
    let i = table.k_position(k_star).ok_or(Error::InvalidParameter(
        "K* must be one of the evaluated K values",
    ))?;
    let (sr, ur) = table
        .rows
        .iter()
        .partition::<Vec<&UserMetrics>, _>(|r| r.per_k[i].rc_hits >= 1);
    Ok(Cohorts {
        k_star,
        sr: sr.into_iter().map(|r| r.user).collect(),
        ur: ur.into_iter().map(|r| r.user).collect(),
    })
}

/// Euclidean distances between the two cohorts' mean category-indicator
/// vectors, one per attribute, restricted to `gender`, sorted descending.
pub fn attribute_distance(
    users: &UserTable,
    cohorts: &Cohorts,
    gender: Gender,
) -> Result<Vec<(String, f64)>> {
    let pick = |set: &[UserIdx]| -> Vec<UserIdx> {
        set.iter()
            .copied()
            .filter(|&u| users.gender(u) == gender)
            .collect()
    };
    let (sr, ur) = (pick(&cohorts.sr), pick(&cohorts.ur));
    if sr.is_empty() || ur.is_empty() {
        return Err(Error::DegenerateSample("a cohort is empty for this gender"));
    }
    let names = users.attribute_names();
    let mut out = Vec::with_capacity(names.len());
    for (a, name) in names.iter().enumerate() {
        let categories: BTreeSet<&str> = users
            .records()
            .iter()
            .map(|r| r.attributes[a].1.as_str())
            .collect();
        let share = |group: &[UserIdx], cat: &str| {
            group
                .iter()
                .filter(|&&u| users.get(u).attributes[a].1 == cat)
                .count() as f64
                / group.len() as f64
        };
        let sq: f64 = categories
            .iter()
            .map(|c| {
                let d = share(&sr, c) - share(&ur, c);
                d * d
            })
            .sum();
        out.push((String::from(*name), libm::sqrt(sq)));
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

/// SR vs UR comparison for one gender.
#[derive(Debug, Clone, PartialEq)]
pub struct GenderCohortReport {
    pub gender: Gender,
    pub sr_size: usize,
    pub ur_size: usize,
    pub sr_mean_messages: Option<f64>,
    pub ur_mean_messages: Option<f64>,
    /// Welch test of messages sent, SR minus UR.
    pub messages_t_test: Result<WelchResult>,
    /// `Err` when the attribute analysis had to be skipped.
    pub attribute_distances: Result<Vec<(String, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortReport {
    pub cohorts: Cohorts,
    pub by_gender: Vec<GenderCohortReport>,
}

/// SR/UR split plus per-gender activity t-tests and attribute distances.
/// Activity is the number of messages each user sent over `all_events`.
pub fn cohort_analysis(
    users: &UserTable,
    all_events: &[ContactEvent],
    hybrid_table: &PerUserTable,
    k_star: usize,
) -> Result<CohortReport> {
    let cohorts = sr_ur_split(hybrid_table, k_star)?;
    let sent = messages_sent(all_events, users.len());
    let by_gender = [Gender::Male, Gender::Female]
        .into_iter()
        .map(|g| {
            let msgs = |set: &[UserIdx]| -> Vec<f64> {
                set.iter()
                    .filter(|&&u| users.gender(u) == g)
                    .map(|&u| sent[u.get()] as f64)
                    .collect()
            };
            let (a, b) = (msgs(&cohorts.sr), msgs(&cohorts.ur));
            let attribute_distances = if users.attribute_names().is_empty() {
                Err(Error::InvalidParameter(
                    "users file has no attribute columns",
                ))
            } else {
                attribute_distance(users, &cohorts, g)
            };
            GenderCohortReport {
                gender: g,
                sr_size: a.len(),
                ur_size: b.len(),
                sr_mean_messages: stats::mean(&a),
                ur_mean_messages: stats::mean(&b),
                messages_t_test: stats::welch_t_test(&a, &b),
                attribute_distances,
            }
        })
        .collect();
    Ok(CohortReport { cohorts, by_gender })
}
