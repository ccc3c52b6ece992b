// SPDX-License-Identifier: Apache-2.0

//! One-pass α-approximation by merging.
//!
//! Every α consecutive sets of the stream are merged into one; at the end the
//! merged sets are solved exactly and each chosen merged set is expanded back
//! to the original sets that witness its elements. Storage is `ceil(m/α)`
//! merged sets with one witness per element, i.e. `O(mn/α)` entries.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::instance::{Assignment, ColumnEvent, CoveringInstance, SetSystem, SparseColumn, VariableKind};
use crate::oracle::{exact_opt, OracleError, OracleLimits};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error("alpha must be at least 1")]
    ZeroAlpha,
    #[error("instance is infeasible")]
    Infeasible,
    #[error("column {index} is not a 0/1 set column")]
    NotASet { index: usize },
    #[error("row {row} out of range for {n} elements")]
    RowOutOfRange { row: usize, n: usize },
    #[error("demand vector has {got} entries, expected {expected}")]
    DemandLength { expected: usize, got: usize },
    #[error(transparent)]
    Oracle(OracleError),
}

impl From<OracleError> for MergeError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Infeasible => MergeError::Infeasible,
            other => MergeError::Oracle(other),
        }
    }
}

/// A cover together with, for each element, the chosen set covering it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverCertificate {
    /// Original set indices, ascending.
    pub chosen: Vec<usize>,
    /// `witness[e]` is the chosen set used for element `e`.
    pub witness: Vec<usize>,
}

impl CoverCertificate {
    pub fn size(&self) -> usize {
        self.chosen.len()
    }

    /// Checks every certificate invariant against the set system.
    pub fn verify(&self, sets: &SetSystem) -> bool {
        self.witness.len() == sets.n()
            && self.witness.iter().enumerate().all(|(e, &s)| {
                s < sets.m() && self.chosen.binary_search(&s).is_ok() && sets.set(s).binary_search(&e).is_ok()
            })
    }
}

/// A merged set: its union and, per element, the first member covering it.
struct MergedSet {
    witness: BTreeMap<usize, usize>,
}

/// Streaming state for [`merge_approx`].
pub struct MergeApprox {
    n: usize,
    alpha: usize,
    merged: Vec<MergedSet>,
    open_members: usize,
}

impl MergeApprox {
    pub fn new(n: usize, alpha: usize) -> Result<Self, MergeError> {
        if alpha == 0 {
            return Err(MergeError::ZeroAlpha);
        }
        Ok(MergeApprox {
            n,
            alpha,
            merged: Vec::new(),
            open_members: 0,
        })
    }

    pub fn push(&mut self, event: &ColumnEvent) -> Result<(), MergeError> {
        if event.column.iter().any(|(_, a)| a != 1) {
            return Err(MergeError::NotASet { index: event.index });
        }
        if let Some(row) = event.column.rows().find(|&r| r >= self.n) {
            return Err(MergeError::RowOutOfRange { row, n: self.n });
        }
        if self.open_members == 0 {
            self.merged.push(MergedSet {
                witness: BTreeMap::new(),
            });
        }
        let current = self.merged.last_mut().expect("batch opened above");
        for e in event.column.rows() {
            current.witness.entry(e).or_insert(event.index);
        }
        self.open_members = (self.open_members + 1) % self.alpha;
        Ok(())
    }

    /// Number of stored (element, witness) pairs.
    pub fn stored_entries(&self) -> usize {
        self.merged.iter().map(|s| s.witness.len()).sum()
    }

    pub fn merged_count(&self) -> usize {
        self.merged.len()
    }

    /// Solves minimum set cover over the merged sets and expands it.
    pub fn finish(self, limits: OracleLimits) -> Result<CoverCertificate, MergeError> {
        let sets: Vec<Vec<usize>> = self.merged.iter().map(|s| s.witness.keys().copied().collect()).collect();
        let system = SetSystem::unweighted(self.n, sets).expect("rows validated on push");
        let sol = exact_opt(&system.to_ilp(), limits)?;
        let selected = sol.x.support();
        let mut witness = vec![usize::MAX; self.n];
        for &s in &selected {
            for (&e, &orig) in &self.merged[s].witness {
                if witness[e] == usize::MAX {
                    witness[e] = orig;
                }
            }
        }
        debug_assert!(witness.iter().all(|&w| w != usize::MAX));
        let mut chosen = witness.clone();
        chosen.sort_unstable();
        chosen.dedup();
        Ok(CoverCertificate { chosen, witness })
    }
}

/// α-approximate set cover of a stream of 0/1 columns over `[0, n)`.
///
/// Weights are ignored; the objective is the number of sets.
pub fn merge_approx<I>(events: I, n: usize, alpha: usize, limits: OracleLimits) -> Result<CoverCertificate, MergeError>
where
    I: IntoIterator<Item = ColumnEvent>,
{
    let mut state = MergeApprox::new(n, alpha)?;
    for ev in events {
        state.push(&ev)?;
    }
    state.finish(limits)
}

/// α-approximation for binary covering ILPs.
///
/// Columns are grouped by exact weight; inside each group every α consecutive
/// columns are merged into their coordinate-wise sum, weighing the sum of the
/// members. Choosing a merged column sets all its members to one.
pub fn merge_approx_ilp<I>(
    events: I,
    n: usize,
    b: &[u64],
    alpha: usize,
    limits: OracleLimits,
) -> Result<Assignment, MergeError>
where
    I: IntoIterator<Item = ColumnEvent>,
{
    if alpha == 0 {
        return Err(MergeError::ZeroAlpha);
    }
    if b.len() != n {
        return Err(MergeError::DemandLength {
            expected: n,
            got: b.len(),
        });
    }
    struct Batch {
        members: Vec<usize>,
        sum: Vec<(usize, u64)>,
        weight: u64,
    }
    let mut closed: Vec<Batch> = Vec::new();
    let mut open: BTreeMap<u64, Batch> = BTreeMap::new();
    let mut m = 0usize;
    for ev in events {
        if let Some(row) = ev.column.rows().find(|&r| r >= n) {
            return Err(MergeError::RowOutOfRange { row, n });
        }
        m = m.max(ev.index + 1);
        let batch = open.entry(ev.weight).or_insert_with(|| Batch {
            members: Vec::new(),
            sum: Vec::new(),
            weight: 0,
        });
        batch.members.push(ev.index);
        batch.sum.extend(ev.column.iter());
        batch.weight += ev.weight;
        // Keep the running sum canonical so memory stays proportional to its support.
        batch.sum = SparseColumn::new(std::mem::take(&mut batch.sum)).entries().to_vec();
        if batch.members.len() == alpha {
            closed.push(open.remove(&ev.weight).expect("entry exists"));
        }
    }
    closed.extend(open.into_values());

    let columns = closed.iter().map(|bt| SparseColumn::new(bt.sum.clone())).collect();
    let weights = closed.iter().map(|bt| bt.weight).collect();
    let merged = CoveringInstance::new(n, columns, b.to_vec(), weights, VariableKind::Binary)
        .expect("rows validated above");
    let sol = exact_opt(&merged, limits)?;
    let mut x = vec![0u64; m];
    for s in sol.x.support() {
        for &i in &closed[s].members {
            x[i] = 1;
        }
    }
    Ok(Assignment::from(x))
}
