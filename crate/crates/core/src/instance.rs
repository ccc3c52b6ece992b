// SPDX-License-Identifier: Apache-2.0

//! Covering integer programs `min c·x s.t. Ax >= b` and the set systems they
//! generalize.
//!
//! Everything is non-negative integer data. Columns are stored sparsely and
//! in canonical form: sorted by row, no duplicate rows, no zero entries.

use std::fmt;

use thiserror::Error;

/// Errors raised while building or evaluating instances.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("row {row} out of range for {n} constraints")]
    RowOutOfRange { row: usize, n: usize },
    #[error("expected {expected} {what}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("binary variable x[{index}] = {value} is not 0 or 1")]
    NotBinary { index: usize, value: u64 },
    #[error("set weight for set {index} must be positive")]
    ZeroWeight { index: usize },
    #[error("arithmetic overflow while evaluating {0}")]
    Overflow(&'static str),
}

/// Whether decision variables are restricted to {0, 1} or range over all
/// non-negative integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum VariableKind {
    #[default]
    Binary,
    Integer,
}

impl VariableKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariableKind::Binary => "binary",
            VariableKind::Integer => "integer",
        }
    }
}

impl fmt::Display for VariableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for VariableKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(VariableKind::Binary),
            "integer" => Ok(VariableKind::Integer),
            other => Err(format!("unknown variable kind `{other}`")),
        }
    }
}

/// A sparse non-negative integer column, sorted by row with no duplicates
/// and no zero entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SparseColumn {
    entries: Vec<(usize, u64)>,
}

impl SparseColumn {
    /// Canonicalizes `entries`: duplicate rows are summed and zeros dropped.
    pub fn new(mut entries: Vec<(usize, u64)>) -> Self {
        entries.sort_unstable_by_key(|&(row, _)| row);
        let mut out: Vec<(usize, u64)> = Vec::with_capacity(entries.len());
        for (row, value) in entries {
            match out.last_mut() {
                Some(last) if last.0 == row => last.1 = last.1.saturating_add(value),
                _ => out.push((row, value)),
            }
        }
        out.retain(|&(_, v)| v > 0);
        SparseColumn { entries: out }
    }

    /// A 0/1 column with a one in every listed row.
    pub fn indicator<I: IntoIterator<Item = usize>>(rows: I) -> Self {
        Self::new(rows.into_iter().map(|r| (r, 1)).collect())
    }

    pub fn empty() -> Self {
        SparseColumn::default()
    }

    pub fn entries(&self) -> &[(usize, u64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(r, _)| r)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Coefficient in `row` (zero when absent).
    pub fn get(&self, row: usize) -> u64 {
        self.entries
            .binary_search_by_key(&row, |&(r, _)| r)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Sum of all coefficients.
    pub fn l1_norm(&self) -> u64 {
        self.entries.iter().map(|&(_, v)| v).fold(0u64, u64::saturating_add)
    }

    pub fn max_entry(&self) -> u64 {
        self.entries.iter().map(|&(_, v)| v).max().unwrap_or(0)
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        Self::new(self.iter().map(|(r, v)| (r, v.saturating_mul(factor))).collect())
    }

    pub(crate) fn check_rows(&self, n: usize) -> Result<(), InstanceError> {
        match self.entries.last() {
            Some(&(row, _)) if row >= n => Err(InstanceError::RowOutOfRange { row, n }),
            _ => Ok(()),
        }
    }
}

impl FromIterator<(usize, u64)> for SparseColumn {
    fn from_iter<T: IntoIterator<Item = (usize, u64)>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// One stream element: the `index`-th column together with its weight.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColumnEvent {
    pub index: usize,
    pub column: SparseColumn,
    pub weight: u64,
}

impl ColumnEvent {
    pub fn new(index: usize, column: SparseColumn, weight: u64) -> Self {
        ColumnEvent { index, column, weight }
    }
}

/// A non-negative integer assignment to the decision variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Assignment {
    pub x: Vec<u64>,
}

impl Assignment {
    pub fn zeros(m: usize) -> Self {
        Assignment { x: vec![0; m] }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Indices with a non-zero value.
    pub fn support(&self) -> Vec<usize> {
        self.x
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(i, _)| i)
            .collect()
    }
}

impl From<Vec<u64>> for Assignment {
    fn from(x: Vec<u64>) -> Self {
        Assignment { x }
    }
}

/// Default bound exponent for "poly(n)-bounded" entries: values up to `n^3`.
pub const DEFAULT_POLY_EXPONENT: u32 = 3;

/// A covering ILP `min c·x s.t. Ax >= b, x >= 0 integer` (or binary).
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringInstance {
    n: usize,
    columns: Vec<SparseColumn>,
    b: Vec<u64>,
    c: Vec<u64>,
    kind: VariableKind,
}

impl CoveringInstance {
    /// Validates dimensions and row ranges. Entries exceeding `n^3` only
    /// produce a log warning.
    pub fn new(
        n: usize,
        columns: Vec<SparseColumn>,
        b: Vec<u64>,
        c: Vec<u64>,
        kind: VariableKind,
    ) -> Result<Self, InstanceError> {
        Self::with_poly_bound(n, columns, b, c, kind, DEFAULT_POLY_EXPONENT)
    }

    pub fn with_poly_bound(
        n: usize,
        columns: Vec<SparseColumn>,
        b: Vec<u64>,
        c: Vec<u64>,
        kind: VariableKind,
        poly_exponent: u32,
    ) -> Result<Self, InstanceError> {
        if b.len() != n {
            return Err(InstanceError::DimensionMismatch {
                what: "demands",
                expected: n,
                got: b.len(),
            });
        }
        if c.len() != columns.len() {
            return Err(InstanceError::DimensionMismatch {
                what: "weights",
                expected: columns.len(),
                got: c.len(),
            });
        }
        for col in &columns {
            col.check_rows(n)?;
        }
        let inst = CoveringInstance { n, columns, b, c, kind };
        let bound = (n.max(2) as u64).saturating_pow(poly_exponent);
        for (name, value) in [
            ("a_max", inst.a_max()),
            ("b_max", inst.b_max()),
            ("c_max", inst.c_max()),
        ] {
            if value > bound {
                log::warn!("{name} = {value} exceeds the poly(n) bound n^{poly_exponent} = {bound}");
            }
        }
        Ok(inst)
    }

    /// Assembles an instance from a stream of column events. Events are
    /// placed at their own `index`; gaps become empty zero-weight columns.
    pub fn from_events<I>(n: usize, b: Vec<u64>, kind: VariableKind, events: I) -> Result<Self, InstanceError>
    where
        I: IntoIterator<Item = ColumnEvent>,
    {
        let mut cols: Vec<Option<(SparseColumn, u64)>> = Vec::new();
        for ev in events {
            if cols.len() <= ev.index {
                cols.resize(ev.index + 1, None);
            }
            cols[ev.index] = Some((ev.column, ev.weight));
        }
        let (columns, c) = cols
            .into_iter()
            .map(|e| e.unwrap_or_else(|| (SparseColumn::empty(), 0)))
            .unzip();
        Self::new(n, columns, b, c, kind)
    }

    /// Number of constraints (rows).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of variables (columns).
    pub fn m(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[SparseColumn] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &SparseColumn {
        &self.columns[i]
    }

    pub fn demands(&self) -> &[u64] {
        &self.b
    }

    pub fn weights(&self) -> &[u64] {
        &self.c
    }

    pub fn kind(&self) -> VariableKind {
        self.kind
    }

    pub fn a_max(&self) -> u64 {
        self.columns.iter().map(SparseColumn::max_entry).max().unwrap_or(0)
    }

    pub fn b_max(&self) -> u64 {
        self.b.iter().copied().max().unwrap_or(0)
    }

    pub fn c_max(&self) -> u64 {
        self.c.iter().copied().max().unwrap_or(0)
    }

    /// The columns as stream events in index order.
    pub fn events(&self) -> Vec<ColumnEvent> {
        self.columns
            .iter()
            .zip(&self.c)
            .enumerate()
            .map(|(i, (col, &w))| ColumnEvent::new(i, col.clone(), w))
            .collect()
    }

    /// Copy of this instance with demands replaced by `b`.
    pub fn with_demands(&self, b: Vec<u64>) -> Result<Self, InstanceError> {
        Self::new(self.n, self.columns.clone(), b, self.c.clone(), self.kind)
    }

    /// Copy of this instance with a different variable kind.
    pub fn with_kind(&self, kind: VariableKind) -> Self {
        CoveringInstance { kind, ..self.clone() }
    }

    fn check_dim(&self, x: &Assignment) -> Result<(), InstanceError> {
        if x.len() != self.m() {
            return Err(InstanceError::DimensionMismatch {
                what: "variables",
                expected: self.m(),
                got: x.len(),
            });
        }
        if self.kind == VariableKind::Binary {
            if let Some((index, &value)) = x.x.iter().enumerate().find(|(_, &v)| v > 1) {
                return Err(InstanceError::NotBinary { index, value });
            }
        }
        Ok(())
    }

    /// `(Ax)_j` for every row, saturating.
    pub fn coverage(&self, x: &Assignment) -> Result<Vec<u64>, InstanceError> {
        self.check_dim(x)?;
        let mut cov = vec![0u64; self.n];
        for (col, &xi) in self.columns.iter().zip(&x.x) {
            if xi == 0 {
                continue;
            }
            for (row, a) in col.iter() {
                cov[row] = cov[row].saturating_add(a.saturating_mul(xi));
            }
        }
        Ok(cov)
    }

    /// True iff `Ax >= b`.
    pub fn check_feasible(&self, x: &Assignment) -> Result<bool, InstanceError> {
        let cov = self.coverage(x)?;
        Ok(cov.iter().zip(&self.b).all(|(have, need)| have >= need))
    }

    /// `c·x`.
    pub fn objective_value(&self, x: &Assignment) -> Result<u64, InstanceError> {
        self.check_dim(x)?;
        self.c.iter().zip(&x.x).try_fold(0u64, |acc, (&c, &xi)| {
            c.checked_mul(xi)
                .and_then(|v| acc.checked_add(v))
                .ok_or(InstanceError::Overflow("objective"))
        })
    }

    /// Rows with positive demand that no column touches.
    pub fn uncoverable_rows(&self) -> Vec<usize> {
        let mut touched = vec![false; self.n];
        for col in &self.columns {
            for r in col.rows() {
                touched[r] = true;
            }
        }
        (0..self.n).filter(|&j| self.b[j] > 0 && !touched[j]).collect()
    }
}

/// A set system over the universe `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSystem {
    n: usize,
    sets: Vec<Vec<usize>>,
    weights: Option<Vec<u64>>,
}

impl SetSystem {
    /// Sorts and deduplicates every set; rejects out-of-range elements and
    /// zero weights. Weights that are all 1 are stored as unweighted.
    pub fn new(n: usize, sets: Vec<Vec<usize>>, weights: Option<Vec<u64>>) -> Result<Self, InstanceError> {
        let mut sets = sets;
        for set in &mut sets {
            set.sort_unstable();
            set.dedup();
            if let Some(&e) = set.last() {
                if e >= n {
                    return Err(InstanceError::RowOutOfRange { row: e, n });
                }
            }
        }
        if let Some(w) = &weights {
            if w.len() != sets.len() {
                return Err(InstanceError::DimensionMismatch {
                    what: "set weights",
                    expected: sets.len(),
                    got: w.len(),
                });
            }
            if let Some(index) = w.iter().position(|&v| v == 0) {
                return Err(InstanceError::ZeroWeight { index });
            }
        }
        // All-ones weights are the unweighted default.
        let weights = weights.filter(|w| w.iter().any(|&v| v != 1));
        Ok(SetSystem { n, sets, weights })
    }

    pub fn unweighted(n: usize, sets: Vec<Vec<usize>>) -> Result<Self, InstanceError> {
        Self::new(n, sets, None)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    pub fn explicit_weights(&self) -> Option<&[u64]> {
        self.weights.as_deref()
    }

    pub fn weight(&self, i: usize) -> u64 {
        self.weights.as_ref().map_or(1, |w| w[i])
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    /// Encodes the system as a binary covering ILP with unit demands:
    /// `a[j][i] = 1` iff element `j` is in set `i`.
    pub fn to_ilp(&self) -> CoveringInstance {
        let columns = self.sets.iter().map(|s| SparseColumn::indicator(s.iter().copied())).collect();
        let c = (0..self.m()).map(|i| self.weight(i)).collect();
        CoveringInstance::new(self.n, columns, vec![1; self.n], c, VariableKind::Binary)
            .expect("a valid set system encodes to a valid instance")
    }

    /// The sets as stream events in index order.
    pub fn events(&self) -> Vec<ColumnEvent> {
        self.sets
            .iter()
            .enumerate()
            .map(|(i, s)| ColumnEvent::new(i, SparseColumn::indicator(s.iter().copied()), self.weight(i)))
            .collect()
    }

    /// True when the union of the sets is the whole universe.
    pub fn covers_universe(&self) -> bool {
        let mut seen = vec![false; self.n];
        for s in &self.sets {
            for &e in s {
                seen[e] = true;
            }
        }
        seen.into_iter().all(|b| b)
    }
}

/// Free-function form of [`SetSystem::to_ilp`].
pub fn set_system_to_ilp(s: &SetSystem) -> CoveringInstance {
    s.to_ilp()
}

/// Recovers a set system from a 0/1 unit-demand instance. Returns `None`
/// when some coefficient is not 1, some demand is not 1, or some weight is 0.
pub fn ilp_to_set_system(inst: &CoveringInstance) -> Option<SetSystem> {
    if inst.demands().iter().any(|&b| b != 1) {
        return None;
    }
    if inst.columns().iter().any(|c| c.iter().any(|(_, a)| a != 1)) {
        return None;
    }
    if inst.weights().iter().any(|&w| w == 0) {
        return None;
    }
    let sets = inst.columns().iter().map(|c| c.rows().collect()).collect();
    let weights = if inst.weights().iter().all(|&w| w == 1) {
        None
    } else {
        Some(inst.weights().to_vec())
    };
    SetSystem::new(inst.n(), sets, weights).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(n: usize, sets: Vec<Vec<usize>>) -> SetSystem {
        SetSystem::unweighted(n, sets).unwrap()
    }

    #[test]
    fn encodes_small_set_system() {
        let inst = sys(3, vec![vec![0, 1], vec![2]]).to_ilp();
        assert_eq!(inst.column(0).entries(), &[(0, 1), (1, 1)]);
        assert_eq!(inst.column(1).entries(), &[(2, 1)]);
        assert_eq!(inst.demands(), &[1, 1, 1]);
        assert_eq!(inst.weights(), &[1, 1]);
        assert_eq!(inst.kind(), VariableKind::Binary);
    }

    #[test]
    fn empty_collection_leaves_row_uncoverable() {
        let inst = sys(1, vec![]).to_ilp();
        assert_eq!(inst.m(), 0);
        assert_eq!(inst.uncoverable_rows(), vec![0]);
    }

    #[test]
    fn weighted_full_set() {
        let s = SetSystem::new(4, vec![vec![0, 1, 2, 3]], Some(vec![7])).unwrap();
        let inst = s.to_ilp();
        assert_eq!(inst.column(0).entries(), &[(0, 1), (1, 1), (2, 1), (3, 1)]);
        assert_eq!(inst.weights(), &[7]);
    }

    #[test]
    fn canonical_columns_sum_duplicates() {
        let col = SparseColumn::new(vec![(3, 1), (1, 2), (3, 4), (0, 0)]);
        assert_eq!(col.entries(), &[(1, 2), (3, 5)]);
        assert_eq!(col.get(3), 5);
        assert_eq!(col.get(0), 0);
    }

    #[test]
    fn rejects_out_of_range_rows() {
        let err = CoveringInstance::new(2, vec![SparseColumn::indicator([2])], vec![1, 1], vec![1], VariableKind::Binary)
            .unwrap_err();
        assert_eq!(err, InstanceError::RowOutOfRange { row: 2, n: 2 });
        assert!(SetSystem::unweighted(2, vec![vec![5]]).is_err());
    }

    #[test]
    fn feasibility_and_objective() {
        let zero = CoveringInstance::new(2, vec![SparseColumn::indicator([0])], vec![0, 0], vec![1], VariableKind::Binary)
            .unwrap();
        assert!(zero.check_feasible(&Assignment::zeros(1)).unwrap());

        let inst = CoveringInstance::new(2, vec![SparseColumn::indicator([0, 1])], vec![1, 2], vec![1], VariableKind::Binary)
            .unwrap();
        assert!(!inst.check_feasible(&Assignment::from(vec![1])).unwrap());

        let three = CoveringInstance::new(
            1,
            vec![SparseColumn::indicator([0]); 3],
            vec![1],
            vec![1, 1, 1],
            VariableKind::Binary,
        )
        .unwrap();
        assert_eq!(three.objective_value(&Assignment::from(vec![1, 0, 1])).unwrap(), 2);

        let int = CoveringInstance::new(
            1,
            vec![SparseColumn::indicator([0]); 2],
            vec![1],
            vec![3, 5],
            VariableKind::Integer,
        )
        .unwrap();
        assert_eq!(int.objective_value(&Assignment::from(vec![2, 1])).unwrap(), 11);
        let free = int.with_demands(vec![1]).unwrap();
        assert_eq!(
            CoveringInstance::new(1, free.columns().to_vec(), vec![1], vec![0, 0], VariableKind::Integer)
                .unwrap()
                .objective_value(&Assignment::from(vec![4, 9]))
                .unwrap(),
            0
        );
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let inst = sys(2, vec![vec![0], vec![1]]).to_ilp();
        assert!(matches!(
            inst.check_feasible(&Assignment::zeros(3)),
            Err(InstanceError::DimensionMismatch { .. })
        ));
        assert!(inst.objective_value(&Assignment::zeros(1)).is_err());
        assert!(matches!(
            inst.check_feasible(&Assignment::from(vec![2, 0])),
            Err(InstanceError::NotBinary { .. })
        ));
    }

    #[test]
    fn ilp_round_trips_to_set_system() {
        let s = SetSystem::new(5, vec![vec![4, 0], vec![], vec![1, 2, 3]], Some(vec![2, 1, 9])).unwrap();
        assert_eq!(ilp_to_set_system(&s.to_ilp()).unwrap(), s);
    }
}
