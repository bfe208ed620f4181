//! Brute-force dense reference for the three models.
//!
//! Everything here works from the raw dyad records and evaluates the formulas
//! literally over every column and every service user: `O(N^2 M)` similarity
//! and `O(N^2 M)` scoring. It exists to cross-check the sparse path on small
//! inputs and shares no code with it.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::contact_log::{DyadRecord, ServiceUserSet, UserIdx, UserTable};
use crate::matrices::ModelKind;

/// `(sent, received)` bits, 0 or 1.
pub type Bits = (u8, u8);

#[derive(Debug, Clone, PartialEq)]
pub struct DenseModel {
    pub kind: ModelKind,
    /// `N x M` cells; binary models use `(c, 0)`.
    pub cells: Vec<Vec<Bits>>,
    /// `N x N`, zero diagonal.
    pub similarity: Vec<Vec<f64>>,
}

fn pair_map(dyads: &[DyadRecord]) -> BTreeMap<(u32, u32), &DyadRecord> {
    dyads
        .iter()
        .flat_map(|d| {
            [
                ((d.initiator.0, d.responder.0), d),
                ((d.responder.0, d.initiator.0), d),
            ]
        })
        .collect()
}

/// Cell of row user `p` at column user `t`.
fn cell(kind: ModelKind, p: UserIdx, d: Option<&&DyadRecord>) -> Bits {
    let Some(d) = d else { return (0, 0) };
    let (mine, theirs) = if d.initiator == p {
        (d.msgs_initiator_to_responder, d.msgs_responder_to_initiator)
    } else {
        (d.msgs_responder_to_initiator, d.msgs_initiator_to_responder)
    };
    match kind {
        ModelKind::Baseline => ((d.initiator == p) as u8, 0),
        ModelKind::ReciprocityOnly => ((mine > 0 && theirs > 0) as u8, 0),
        ModelKind::Hybrid => ((mine > 0) as u8, (theirs > 0) as u8),
    }
}

/// Agreement count times the "both interacted" gate, written out literally.
fn eq1_numerator(a: Bits, b: Bits) -> u32 {
    let agree = (a.0 == b.0) as u32 + (a.1 == b.1) as u32;
    let both = ((a.0 + a.1) > 0 && (b.0 + b.1) > 0) as u32;
    agree * both
}

pub fn build(
    kind: ModelKind,
    dyads: &[DyadRecord],
    service: &ServiceUserSet,
    users: &UserTable,
) -> DenseModel {
    let pairs = pair_map(dyads);
    let n = service.len();
    let m = users.len();
    let cells: Vec<Vec<Bits>> = (0..n)
        .map(|p| {
            let pu = service.user(p);
            (0..m)
                .map(|t| cell(kind, pu, pairs.get(&(pu.0, t as u32))))
                .collect()
        })
        .collect();

    let degree: Vec<u32> = (0..m)
        .map(|i| {
            (0..m)
                .filter(|&j| pairs.contains_key(&(i as u32, j as u32)))
                .count() as u32
        })
        .collect();

    let mut similarity = vec![vec![0.0; n]; n];
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            similarity[p][q] = match kind {
                ModelKind::Hybrid => {
                    let num: u32 = (0..m)
                        .map(|k| eq1_numerator(cells[p][k], cells[q][k]))
                        .sum();
                    let den = degree[service.user(p).get()] + degree[service.user(q).get()];
                    if den == 0 {
                        0.0
                    } else {
                        num as f64 / den as f64
                    }
                }
                _ => {
                    let dot: u32 = (0..m).map(|k| (cells[p][k].0 * cells[q][k].0) as u32).sum();
                    let np: u32 = cells[p].iter().map(|c| c.0 as u32).sum();
                    let nq: u32 = cells[q].iter().map(|c| c.0 as u32).sum();
                    if np == 0 || nq == 0 {
                        0.0
                    } else {
                        dot as f64 / libm::sqrt((np as usize * nq as usize) as f64)
                    }
                }
            };
        }
    }
    DenseModel {
        kind,
        cells,
        similarity,
    }
}

fn weight(kind: ModelKind, c: Bits, penalty: f64) -> f64 {
    match kind {
        ModelKind::Hybrid => match c {
            (1, 1) => 1.0,
            (1, 0) | (0, 1) => 1.0 - penalty,
            _ => 0.0,
        },
        _ => c.0 as f64,
    }
}

impl DenseModel {
    /// `E[p][t]` for every user column, summing over all service users
    /// `k != p` (or all `k` when `include_self`).
    pub fn scores(&self, penalty: f64, include_self: bool) -> Vec<Vec<f64>> {
        let n = self.cells.len();
        let m = self.cells.first().map_or(0, Vec::len);
        (0..n)
            .map(|p| {
                (0..m)
                    .map(|t| {
                        let mut e = 0.0;
                        for k in 0..n {
                            if k == p && !include_self {
                                continue;
                            }
                            e += self.similarity[p][k]
                                * weight(self.kind, self.cells[k][t], penalty);
                        }
                        e
                    })
                    .collect()
            })
            .collect()
    }
}

/// Full sort of every candidate by `(score desc, index asc)`, truncated to `k`.
pub fn recommend(
    model: &DenseModel,
    dyads: &[DyadRecord],
    service: &ServiceUserSet,
    users: &UserTable,
    penalty: f64,
    k: usize,
) -> Vec<Vec<(UserIdx, f64)>> {
    let pairs = pair_map(dyads);
    let scores = model.scores(penalty, false);
    (0..service.len())
        .map(|p| {
            let pu = service.user(p);
            let mut cands: Vec<(UserIdx, f64)> = users
                .indices()
                .filter(|&t| {
                    t != pu
                        && users.gender(t) != users.gender(pu)
                        && !pairs.contains_key(&(pu.0, t.0))
                })
                .map(|t| (t, scores[p][t.get()]))
                .collect();
            cands.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            cands.truncate(k);
            cands
        })
        .collect()
}
