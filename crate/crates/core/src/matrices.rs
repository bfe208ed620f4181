//! The three `N x M` contact matrices and the degree map used to normalise
//! hybrid similarity.
//!
//! Rows belong to service users (row `p` is the `p`-th member of the
//! [`ServiceUserSet`]), columns to all users. Storage is compressed sparse rows
//! with ascending column indices, so any reduction over a row runs in a fixed
//! order.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::contact_log::{DyadRecord, ServiceUserSet, UserIdx, UserTable};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    Baseline,
    ReciprocityOnly,
    Hybrid,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::Baseline,
        ModelKind::ReciprocityOnly,
        ModelKind::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Baseline => "baseline",
            ModelKind::ReciprocityOnly => "reciprocity_only",
            ModelKind::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(ModelKind::Baseline),
            "reciprocity_only" | "reciprocity-only" | "reciprocity" => {
                Ok(ModelKind::ReciprocityOnly)
            }
            "hybrid" => Ok(ModelKind::Hybrid),
            _ => Err(Error::InvalidParameter(
                "model must be one of baseline, reciprocity_only, hybrid",
            )),
        }
    }
}

/// `<sent, received>` for one (row user, column user) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DyadCell {
    /// Row user sent at least one message to the column user (taste).
    pub sent: bool,
    /// Column user sent at least one message to the row user (attractiveness).
    pub received: bool,
}

impl DyadCell {
    pub const EMPTY: DyadCell = DyadCell {
        sent: false,
        received: false,
    };

    pub const fn new(sent: bool, received: bool) -> Self {
        DyadCell { sent, received }
    }

    pub fn is_empty(self) -> bool {
        !self.sent && !self.received
    }

    /// All four cells, `<0,0>` first.
    pub const ALL: [DyadCell; 4] = [
        DyadCell::new(false, false),
        DyadCell::new(false, true),
        DyadCell::new(true, false),
        DyadCell::new(true, true),
    ];
}

/// Binary `N x M` matrix; stored entries are exactly the ones.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryContactMatrix {
    kind: ModelKind,
    num_cols: usize,
    offsets: Vec<usize>,
    cols: Vec<UserIdx>,
}

impl BinaryContactMatrix {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn num_rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn row(&self, p: usize) -> &[UserIdx] {
        &self.cols[self.offsets[p]..self.offsets[p + 1]]
    }

    pub fn get(&self, p: usize, t: UserIdx) -> bool {
        self.row(p).binary_search(&t).is_ok()
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }
}

/// Dyad-cell-valued `N x M` matrix of the hybrid model; `<0,0>` is never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadContactMatrix {
    num_cols: usize,
    offsets: Vec<usize>,
    cols: Vec<UserIdx>,
    cells: Vec<DyadCell>,
}

impl DyadContactMatrix {
    pub fn num_rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn row(&self, p: usize) -> (&[UserIdx], &[DyadCell]) {
        let r = self.offsets[p]..self.offsets[p + 1];
        (&self.cols[r.clone()], &self.cells[r])
    }

    /// Cell at `(p, t)`, `<0,0>` when absent.
    pub fn get(&self, p: usize, t: UserIdx) -> DyadCell {
        let (cols, cells) = self.row(p);
        match cols.binary_search(&t) {
            Ok(i) => cells[i],
            Err(_) => DyadCell::EMPTY,
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }
}

/// Contact data for any of the three models.
#[derive(Debug, Clone, PartialEq)]
pub enum ContactData {
    Binary(BinaryContactMatrix),
    Dyad(DyadContactMatrix),
}

impl ContactData {
    pub fn kind(&self) -> ModelKind {
        match self {
            ContactData::Binary(m) => m.kind(),
            ContactData::Dyad(_) => ModelKind::Hybrid,
        }
    }

    pub fn num_rows(&self) -> usize {
        match self {
            ContactData::Binary(m) => m.num_rows(),
            ContactData::Dyad(m) => m.num_rows(),
        }
    }

    /// Stored entries of row `p` as dyad cells. Baseline ones mean "row user
    /// initiated" (`<1,0>`), reciprocity-only ones mean both sides wrote (`<1,1>`).
    pub fn row_cells(&self, p: usize) -> impl Iterator<Item = (UserIdx, DyadCell)> + '_ {
        let (binary, dyad) = match self {
            ContactData::Binary(m) => (Some(m), None),
            ContactData::Dyad(m) => (None, Some(m)),
        };
        let binary_cell = DyadCell::new(true, self.kind() == ModelKind::ReciprocityOnly);
        let a = binary
            .into_iter()
            .flat_map(move |m| m.row(p).iter().map(move |&t| (t, binary_cell)));
        let b = dyad.into_iter().flat_map(move |m| {
            let (cols, cells) = m.row(p);
            cols.iter().copied().zip(cells.iter().copied())
        });
        a.chain(b)
    }
}

fn check_service(service: &ServiceUserSet, users: &UserTable) -> Result<()> {
    match service.members().iter().find(|m| m.get() >= users.len()) {
        Some(bad) => Err(Error::IndexOutOfRange(bad.get())),
        None => Ok(()),
    }
}

/// Collects `(row, col, cell)` for every service-user endpoint of every dyad
/// and packs them into CSR form.
fn collect_rows(
    dyads: &[DyadRecord],
    service: &ServiceUserSet,
    users: &UserTable,
    mut cell_for: impl FnMut(&DyadRecord, UserIdx) -> Option<DyadCell>,
) -> Result<(Vec<usize>, Vec<UserIdx>, Vec<DyadCell>)> {
    check_service(service, users)?;
    let mut triples: Vec<(u32, UserIdx, DyadCell)> = Vec::new();
    for d in dyads {
        for (me, other) in [(d.initiator, d.responder), (d.responder, d.initiator)] {
            if let Some(pos) = service.position(me) {
                if let Some(cell) = cell_for(d, me) {
                    debug_assert!(!cell.is_empty());
                    triples.push((pos as u32, other, cell));
                }
            }
        }
    }
    triples.sort_unstable_by_key(|&(p, t, _)| (p, t));
    triples.dedup_by_key(|&mut (p, t, _)| (p, t));

    let mut offsets = Vec::with_capacity(service.len() + 1);
    offsets.push(0);
    let mut cols = Vec::with_capacity(triples.len());
    let mut cells = Vec::with_capacity(triples.len());
    let mut it = triples.into_iter().peekable();
    for p in 0..service.len() as u32 {
        while let Some(&(_, t, c)) = it.peek().filter(|x| x.0 == p) {
            cols.push(t);
            cells.push(c);
            it.next();
        }
        offsets.push(cols.len());
    }
    Ok((offsets, cols, cells))
}

/// Baseline matrix: `c[p][t] = 1` iff `p` initiated the `(p, t)` dyad.
pub fn build_baseline(
    train_dyads: &[DyadRecord],
    service: &ServiceUserSet,
    users: &UserTable,
) -> Result<BinaryContactMatrix> {
    let (offsets, cols, _) = collect_rows(train_dyads, service, users, |d, me| {
        (d.initiator == me).then_some(DyadCell::new(true, false))
    })?;
    Ok(BinaryContactMatrix {
        kind: ModelKind::Baseline,
        num_cols: users.len(),
        offsets,
        cols,
    })
}

/// Reciprocity-only matrix: `c[p][t] = 1` iff the `(p, t)` dyad is reciprocal,
/// whoever started it.
pub fn build_reciprocity_only(
    train_dyads: &[DyadRecord],
    service: &ServiceUserSet,
    users: &UserTable,
) -> Result<BinaryContactMatrix> {
    let (offsets, cols, _) = collect_rows(train_dyads, service, users, |d, _| {
        d.reciprocal.then_some(DyadCell::new(true, true))
    })?;
    Ok(BinaryContactMatrix {
        kind: ModelKind::ReciprocityOnly,
        num_cols: users.len(),
        offsets,
        cols,
    })
}

/// Hybrid matrix: `sent` iff `p` wrote to `t` at all (first message or reply),
/// `received` iff `t` wrote to `p`.
pub fn build_hybrid(
    train_dyads: &[DyadRecord],
    service: &ServiceUserSet,
    users: &UserTable,
) -> Result<DyadContactMatrix> {
    let (offsets, cols, cells) = collect_rows(train_dyads, service, users, |d, me| {
        let other = d.partner_of(me)?;
        let cell = DyadCell::new(d.msgs_from(me) >= 1, d.msgs_from(other) >= 1);
        (!cell.is_empty()).then_some(cell)
    })?;
    Ok(DyadContactMatrix {
        num_cols: users.len(),
        offsets,
        cols,
        cells,
    })
}

pub fn build(
    kind: ModelKind,
    train_dyads: &[DyadRecord],
    service: &ServiceUserSet,
    users: &UserTable,
) -> Result<ContactData> {
    Ok(match kind {
        ModelKind::Baseline => ContactData::Binary(build_baseline(train_dyads, service, users)?),
        ModelKind::ReciprocityOnly => {
            ContactData::Binary(build_reciprocity_only(train_dyads, service, users)?)
        }
        ModelKind::Hybrid => ContactData::Dyad(build_hybrid(train_dyads, service, users)?),
    })
}

/// Degree centrality of every user in the undirected, unweighted contact network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeMap(Vec<u32>);

impl DegreeMap {
    pub fn get(&self, user: UserIdx) -> u32 {
        self.0[user.get()]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

/// Counts distinct partners per user. Expects one record per pair, as
/// produced by [`aggregate_dyads`](crate::aggregate_dyads).
pub fn compute_degrees(train_dyads: &[DyadRecord], users: &UserTable) -> DegreeMap {
    let mut deg = alloc::vec![0u32; users.len()];
    for d in train_dyads {
        deg[d.initiator.get()] += 1;
        deg[d.responder.get()] += 1;
    }
    DegreeMap(deg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact_log::{aggregate_dyads, ContactEvent, Gender, UserRecord};
    use alloc::vec;

    /// M1..M4 are users 0..3, F1..F3 are users 4..6.
    fn network() -> UserTable {
        let mut recs = Vec::new();
        for i in 1..=4 {
            recs.push(UserRecord::new(alloc::format!("M{i}"), Gender::Male));
        }
        for i in 1..=3 {
            recs.push(UserRecord::new(alloc::format!("F{i}"), Gender::Female));
        }
        UserTable::new(recs).unwrap()
    }

    const M1: UserIdx = UserIdx(0);
    const M2: UserIdx = UserIdx(1);
    const M3: UserIdx = UserIdx(2);
    const M4: UserIdx = UserIdx(3);
    const F1: UserIdx = UserIdx(4);
    const F2: UserIdx = UserIdx(5);
    const F3: UserIdx = UserIdx(6);

    fn ev(s: UserIdx, r: UserIdx, day: u32) -> ContactEvent {
        ContactEvent::new(s, r, day)
    }

    fn dyads() -> Vec<DyadRecord> {
        aggregate_dyads(&[
            ev(M1, F2, 1),
            ev(M2, F1, 2),
            ev(F1, M2, 3),
            ev(M3, F3, 4),
            ev(M4, F3, 5),
        ])
    }

    #[test]
    fn baseline_counts_initiations_only() {
        let users = network();
        let service = ServiceUserSet::from_members(&users, vec![M1, M2, M3, F1, F3]).unwrap();
        let c = build_baseline(&dyads(), &service, &users).unwrap();
        let pos = |u| service.position(u).unwrap();
        assert_eq!(c.row(pos(M1)), [F2]);
        assert_eq!(c.row(pos(M2)), [F1]);
        // F1 only replied.
        assert!(!c.get(pos(F1), M2));
        assert!(c.row(pos(F3)).is_empty());
    }

    #[test]
    fn reciprocity_only_keeps_answered_dyads() {
        let users = network();
        let service = ServiceUserSet::from_members(&users, vec![M1, M2, M3, F1]).unwrap();
        let c = build_reciprocity_only(&dyads(), &service, &users).unwrap();
        let pos = |u| service.position(u).unwrap();
        assert!(c.row(pos(M1)).is_empty());
        assert!(c.get(pos(M2), F1));
        assert!(c.get(pos(F1), M2));
        assert!(!c.get(pos(M3), F3));
    }

    #[test]
    fn hybrid_cells() {
        let users = network();
        let service = ServiceUserSet::from_members(&users, vec![M1, M2, M3, F3]).unwrap();
        let c = build_hybrid(&dyads(), &service, &users).unwrap();
        let pos = |u| service.position(u).unwrap();
        assert_eq!(c.get(pos(M1), F2), DyadCell::new(true, false));
        assert_eq!(c.get(pos(M2), F1), DyadCell::new(true, true));
        assert_eq!(c.get(pos(F3), M3), DyadCell::new(false, true));
        assert_eq!(c.get(pos(F3), M4), DyadCell::new(false, true));
        assert_eq!(c.get(pos(M1), F1), DyadCell::EMPTY);
    }

    #[test]
    fn hybrid_sent_bit_includes_replies() {
        let users = network();
        let service = ServiceUserSet::from_members(&users, vec![F1]).unwrap();
        let c = build_hybrid(&dyads(), &service, &users).unwrap();
        assert_eq!(c.get(0, M2), DyadCell::new(true, true));
        let b = build_baseline(&dyads(), &service, &users).unwrap();
        assert!(b.row(0).is_empty());
    }

    #[test]
    fn degrees() {
        let users = network();
        let mut events = vec![ev(M1, F1, 0), ev(F2, M1, 1), ev(M1, F3, 2)];
        for d in 0..10 {
            events.push(ev(M2, F1, d));
        }
        let deg = compute_degrees(&aggregate_dyads(&events), &users);
        assert_eq!(deg.get(M1), 3);
        assert_eq!(deg.get(M2), 1);
        assert_eq!(deg.get(F1), 2);
        assert_eq!(deg.get(M4), 0);
    }

    #[test]
    fn unknown_service_user_is_an_error() {
        let users = network();
        let big = UserTable::new(
            (0..10)
                .map(|i| UserRecord::new(alloc::format!("x{i}"), Gender::Male))
                .collect(),
        )
        .unwrap();
        let service = ServiceUserSet::from_members(&big, vec![UserIdx(9)]).unwrap();
        assert_eq!(
            build_baseline(&dyads(), &service, &users),
            Err(Error::IndexOutOfRange(9))
        );
    }

    #[test]
    fn model_kind_parses() {
        for k in ModelKind::ALL {
            assert_eq!(k.name().parse::<ModelKind>().unwrap(), k);
        }
        assert!("pLSA".parse::<ModelKind>().is_err());
    }
}
