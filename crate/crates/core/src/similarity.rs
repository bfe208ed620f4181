//! Service-user similarity.
//!
//! Both measures have an integer numerator (shared-support size for cosine,
//! summed agreement for the hybrid model), so they are computed from an
//! inverted column index: for row `p`, walk its columns and the other rows
//! stored at each column, accumulating counts. Cost is proportional to the
//! number of co-occurring pairs rather than `N^2 * M`. Because the numerator is
//! exact and the denominator symmetric, `s(p, q)` and `s(q, p)` are computed
//! independently yet come out bit-identical, and rows can be processed in any
//! order or in parallel.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrices::{ContactData, DegreeMap, DyadCell, ModelKind};
use crate::par;
use crate::ServiceUserSet;

/// Sparse symmetric `N x N` similarity between service users. Only positive
/// off-diagonal entries are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    kind: ModelKind,
    offsets: Vec<usize>,
    neighbours: Vec<u32>,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn num_rows(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Neighbours of `p` (ascending service positions) and their similarities.
    pub fn row(&self, p: usize) -> (&[u32], &[f64]) {
        let r = self.offsets[p]..self.offsets[p + 1];
        (&self.neighbours[r.clone()], &self.values[r])
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        let (n, v) = self.row(p);
        match n.binary_search(&(q as u32)) {
            Ok(i) => v[i],
            Err(_) => 0.0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.neighbours.len()
    }

    fn from_rows(kind: ModelKind, rows: Vec<Vec<(u32, f64)>>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0);
        let total = rows.iter().map(Vec::len).sum();
        let mut neighbours = Vec::with_capacity(total);
        let mut values = Vec::with_capacity(total);
        for row in rows {
            for (q, s) in row {
                neighbours.push(q);
                values.push(s);
            }
            offsets.push(neighbours.len());
        }
        SimilarityMatrix {
            kind,
            offsets,
            neighbours,
            values,
        }
    }
}

/// Agreement between two users' cells at one column: 0 when either cell is
/// `<0,0>`, otherwise the number of matching components (0, 1 or 2).
#[inline]
pub fn f_agreement(cell_p: DyadCell, cell_q: DyadCell) -> u32 {
    if cell_p.is_empty() || cell_q.is_empty() {
        return 0;
    }
    (cell_p.sent == cell_q.sent) as u32 + (cell_p.received == cell_q.received) as u32
}

/// Column -> rows having a stored entry there, ascending by row.
struct ColumnIndex {
    offsets: Vec<usize>,
    rows: Vec<u32>,
    cells: Vec<DyadCell>,
}

impl ColumnIndex {
    fn build(data: &ContactData, num_cols: usize) -> Self {
        let n = data.num_rows();
        let mut counts = vec![0usize; num_cols + 1];
        for p in 0..n {
            for (t, _) in data.row_cells(p) {
                counts[t.get() + 1] += 1;
            }
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let offsets = counts.clone();
        let mut next = counts;
        let total = offsets[num_cols];
        let mut rows = vec![0u32; total];
        let mut cells = vec![DyadCell::EMPTY; total];
        for p in 0..n {
            for (t, c) in data.row_cells(p) {
                let slot = next[t.get()];
                rows[slot] = p as u32;
                cells[slot] = c;
                next[t.get()] += 1;
            }
        }
        ColumnIndex {
            offsets,
            rows,
            cells,
        }
    }

    fn column(&self, t: usize) -> (&[u32], &[DyadCell]) {
        let r = self.offsets[t]..self.offsets[t + 1];
        (&self.rows[r.clone()], &self.cells[r])
    }
}

struct Scratch {
    numer: Vec<u32>,
    touched: Vec<u32>,
}

/// Shared driver: accumulate integer numerators per neighbour, then divide.
fn pairwise(
    data: &ContactData,
    num_cols: usize,
    weight: impl Fn(DyadCell, DyadCell) -> u32 + Sync + Send,
    denom: impl Fn(usize, usize) -> f64 + Sync + Send,
) -> SimilarityMatrix {
    let n = data.num_rows();
    let index = ColumnIndex::build(data, num_cols);
    let rows = par::map_range(
        n,
        || Scratch {
            numer: vec![0; n],
            touched: Vec::new(),
        },
        |s, p| {
            for (t, cp) in data.row_cells(p) {
                let (qs, cqs) = index.column(t.get());
                for (&q, &cq) in qs.iter().zip(cqs) {
                    if q as usize == p {
                        continue;
                    }
                    let slot = &mut s.numer[q as usize];
                    if *slot == 0 {
                        s.touched.push(q);
                    }
                    // Zero-weight pairs may be touched more than once; dedup below.
                    *slot += weight(cp, cq);
                }
            }
            s.touched.sort_unstable();
            s.touched.dedup();
            let mut out = Vec::new();
            for &q in &s.touched {
                let num = core::mem::take(&mut s.numer[q as usize]);
                if num == 0 {
                    continue;
                }
                let d = denom(p, q as usize);
                if d > 0.0 {
                    out.push((q, num as f64 / d));
                }
            }
            s.touched.clear();
            out
        },
    );
    SimilarityMatrix::from_rows(data.kind(), rows)
}

/// Cosine similarity between binary rows; an empty row has similarity 0 to everyone.
pub fn cosine_similarity(data: &ContactData, num_cols: usize) -> SimilarityMatrix {
    let lens: Vec<usize> = (0..data.num_rows())
        .map(|p| data.row_cells(p).count())
        .collect();
    pairwise(
        data,
        num_cols,
        |_, _| 1,
        |p, q| libm::sqrt((lens[p] * lens[q]) as f64),
    )
}

/// Hybrid similarity: summed agreement over shared columns divided by
/// `dgr(p) + dgr(q)` (0 when both degrees are 0).
pub fn hybrid_similarity(
    data: &ContactData,
    num_cols: usize,
    service: &ServiceUserSet,
    degrees: &DegreeMap,
) -> SimilarityMatrix {
    let deg: Vec<u32> = service.members().iter().map(|&u| degrees.get(u)).collect();
    pairwise(data, num_cols, f_agreement, |p, q| (deg[p] + deg[q]) as f64)
}

/// Model-appropriate similarity for `data`.
pub fn similarity_for(
    data: &ContactData,
    num_cols: usize,
    service: &ServiceUserSet,
    degrees: &DegreeMap,
) -> SimilarityMatrix {
    match data.kind() {
        ModelKind::Hybrid => hybrid_similarity(data, num_cols, service, degrees),
        _ => cosine_similarity(data, num_cols),
    }
}
