//! Success scores `E[p][t] = sum_k s[p][k] * w(c[k][t])` and top-K lists.
//!
//! `k` runs over service users other than `p`. Including `p` would change
//! nothing: a valid candidate has no training dyad with `p`, so `p`'s own cell
//! at the candidate is empty and weighs 0.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::contact_log::{DyadRecord, ServiceUserSet, UserIdx, UserTable};
use crate::matrices::{ContactData, DyadCell, ModelKind};
use crate::par;
use crate::similarity::SimilarityMatrix;
use crate::{Error, Result};

pub const DEFAULT_PENALTY: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecommenderConfig {
    pub model_kind: ModelKind,
    /// Discount applied to one-sided hybrid cells, in `(0, 1)`.
    pub penalty: f64,
    /// Longest list to materialise per service user.
    pub list_length: usize,
}

impl RecommenderConfig {
    pub fn new(model_kind: ModelKind, penalty: f64, list_length: usize) -> Result<Self> {
        if !(penalty > 0.0 && penalty < 1.0) {
            return Err(Error::InvalidPenalty(penalty));
        }
        if list_length == 0 {
            return Err(Error::InvalidParameter("list length must be at least 1"));
        }
        Ok(RecommenderConfig {
            model_kind,
            penalty,
            list_length,
        })
    }
}

/// Hybrid contact weight: 1 for `<1,1>`, `1 - penalty` for a one-sided cell, 0 for `<0,0>`.
#[inline]
pub fn g_penalty(cell: DyadCell, penalty: f64) -> f64 {
    match (cell.sent, cell.received) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 1.0 - penalty,
        (false, false) => 0.0,
    }
}

#[inline]
fn contact_weight(kind: ModelKind, cell: DyadCell, penalty: f64) -> f64 {
    match kind {
        ModelKind::Hybrid => g_penalty(cell, penalty),
        _ => 1.0,
    }
}

/// Training partners of every user, each list ascending.
#[derive(Debug, Clone)]
pub struct PartnerIndex {
    offsets: Vec<usize>,
    partners: Vec<UserIdx>,
}

impl PartnerIndex {
    pub fn new(dyads: &[DyadRecord], num_users: usize) -> Self {
        let mut adj = vec![Vec::new(); num_users];
        for d in dyads {
            adj[d.initiator.get()].push(d.responder);
            adj[d.responder.get()].push(d.initiator);
        }
        let mut offsets = Vec::with_capacity(num_users + 1);
        offsets.push(0);
        let mut partners = Vec::new();
        for mut list in adj {
            list.sort_unstable();
            list.dedup();
            partners.extend(list);
            offsets.push(partners.len());
        }
        PartnerIndex { offsets, partners }
    }

    pub fn partners(&self, u: UserIdx) -> &[UserIdx] {
        &self.partners[self.offsets[u.get()]..self.offsets[u.get() + 1]]
    }

    pub fn contains(&self, u: UserIdx, v: UserIdx) -> bool {
        self.partners(u).binary_search(&v).is_ok()
    }
}

fn is_candidate(p: UserIdx, t: UserIdx, users: &UserTable, partners: &PartnerIndex) -> bool {
    t != p && users.gender(t) != users.gender(p) && !partners.contains(p, t)
}

/// Opposite-gender users with no training dyad with `p`, ascending. Includes
/// non-service users.
pub fn candidate_set(p: UserIdx, partners: &PartnerIndex, users: &UserTable) -> Vec<UserIdx> {
    users
        .indices()
        .filter(|&t| is_candidate(p, t, users, partners))
        .collect()
}

fn check_kinds(
    sim: &SimilarityMatrix,
    data: &ContactData,
    config: &RecommenderConfig,
) -> Result<()> {
    for other in [data.kind(), config.model_kind] {
        if sim.kind() != other {
            return Err(Error::ModelMismatch {
                similarity: sim.kind(),
                contacts: other,
            });
        }
    }
    Ok(())
}

/// Scores every user in `candidates` for the service user at row `p`.
/// Output follows the order of `candidates`.
pub fn score_candidates(
    p: usize,
    sim: &SimilarityMatrix,
    data: &ContactData,
    config: &RecommenderConfig,
    candidates: &[UserIdx],
) -> Result<Vec<(UserIdx, f64)>> {
    check_kinds(sim, data, config)?;
    if p >= sim.num_rows() {
        return Err(Error::IndexOutOfRange(p));
    }
    let mut acc: alloc::collections::BTreeMap<UserIdx, f64> = Default::default();
    let (ks, sks) = sim.row(p);
    for (&k, &s) in ks.iter().zip(sks) {
        for (t, cell) in data.row_cells(k as usize) {
            *acc.entry(t).or_insert(0.0) +=
                s * contact_weight(config.model_kind, cell, config.penalty);
        }
    }
    Ok(candidates
        .iter()
        .map(|&t| (t, acc.get(&t).copied().unwrap_or(0.0)))
        .collect())
}

/// Heap entry ordered so that the *worst* ranked item is the maximum.
#[derive(Debug, Clone, Copy)]
struct Ranked(UserIdx, f64);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        other.1.total_cmp(&self.1).then(self.0.cmp(&other.0))
    }
}

struct TopK {
    k: usize,
    heap: BinaryHeap<Ranked>,
}

impl TopK {
    fn new(k: usize) -> Self {
        TopK {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    fn push(&mut self, t: UserIdx, score: f64) {
        let item = Ranked(t, score);
        if self.heap.len() < self.k {
            self.heap.push(item);
        } else if let Some(mut worst) = self.heap.peek_mut() {
            if item < *worst {
                *worst = item;
            }
        }
    }

    fn into_sorted(self) -> Vec<(UserIdx, f64)> {
        self.heap
            .into_sorted_vec()
            .into_iter()
            .map(|Ranked(t, s)| (t, s))
            .collect()
    }
}

/// Highest `k` scores, ties broken by ascending user index.
pub fn top_k(scored: &[(UserIdx, f64)], k: usize) -> Vec<(UserIdx, f64)> {
    let mut top = TopK::new(k);
    for &(t, s) in scored {
        top.push(t, s);
    }
    top.into_sorted()
}

/// Ranked candidates for every service user, indexed by service position.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationList {
    pub model_kind: ModelKind,
    pub list_length: usize,
    pub lists: Vec<Vec<(UserIdx, f64)>>,
}

impl RecommendationList {
    pub fn for_user(&self, p: usize) -> &[(UserIdx, f64)] {
        &self.lists[p]
    }
}

struct Accumulator {
    scores: Vec<f64>,
    touched: Vec<UserIdx>,
}

/// Scores and ranks candidates for every service user.
///
/// Scores are accumulated sparsely (only users reachable through a similar
/// neighbour are touched) and fed through a bounded heap. Lists shorter than
/// `list_length` are topped up with zero-score candidates in index order.
pub fn recommend(
    sim: &SimilarityMatrix,
    data: &ContactData,
    config: &RecommenderConfig,
    service: &ServiceUserSet,
    users: &UserTable,
    partners: &PartnerIndex,
) -> Result<RecommendationList> {
    check_kinds(sim, data, config)?;
    if sim.num_rows() != service.len() || data.num_rows() != service.len() {
        return Err(Error::InvalidParameter(
            "similarity and contact matrix must have one row per service user",
        ));
    }
    let m = users.len();
    let lists = par::map_range(
        service.len(),
        || Accumulator {
            scores: vec![0.0; m],
            touched: Vec::new(),
        },
        |acc, p| {
            let user = service.user(p);
            let (ks, sks) = sim.row(p);
            for (&k, &s) in ks.iter().zip(sks) {
                for (t, cell) in data.row_cells(k as usize) {
                    let slot = &mut acc.scores[t.get()];
                    if *slot == 0.0 {
                        acc.touched.push(t);
                    }
                    *slot += s * contact_weight(config.model_kind, cell, config.penalty);
                }
            }
            let mut top = TopK::new(config.list_length);
            for &t in &acc.touched {
                if is_candidate(user, t, users, partners) {
                    top.push(t, acc.scores[t.get()]);
                }
            }
            let mut list = top.into_sorted();
            if list.len() < config.list_length {
                for t in users.indices() {
                    if list.len() == config.list_length {
                        break;
                    }
                    if acc.scores[t.get()] == 0.0 && is_candidate(user, t, users, partners) {
                        list.push((t, 0.0));
                    }
                }
            }
            for &t in &acc.touched {
                acc.scores[t.get()] = 0.0;
            }
            acc.touched.clear();
            list
        },
    );
    Ok(RecommendationList {
        model_kind: config.model_kind,
        list_length: config.list_length,
        lists,
    })
}
