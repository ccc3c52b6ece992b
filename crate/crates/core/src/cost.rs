// SPDX-License-Identifier: Apache-2.0

//! Per-constraint cost: the cheapest way to satisfy a single row, and the
//! one-pass dynamic program that maintains it over a column stream.

use std::borrow::Borrow;
use std::fmt;

use crate::instance::{ColumnEvent, CoveringInstance, VariableKind};

/// A non-negative cost or `+inf`. Addition saturates at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cost(u64);

impl Cost {
    pub const ZERO: Cost = Cost(0);
    pub const INFINITE: Cost = Cost(u64::MAX);

    /// Finite cost; `u64::MAX` is reserved for infinity.
    pub fn finite(v: u64) -> Cost {
        Cost(v.min(u64::MAX - 1))
    }

    pub fn is_finite(self) -> bool {
        self.0 != u64::MAX
    }

    pub fn value(self) -> Option<u64> {
        self.is_finite().then_some(self.0)
    }

    pub fn plus(self, w: u64) -> Cost {
        if !self.is_finite() {
            return self;
        }
        match self.0.checked_add(w) {
            Some(v) if v != u64::MAX => Cost(v),
            _ => Cost::INFINITE,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("inf"),
        }
    }
}

/// `Cost_j[y]` for every row `j` and coverage level `y in [0, b_j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostTable {
    rows: Vec<Vec<Cost>>,
    kind: VariableKind,
}

impl CostTable {
    pub fn new(b: &[u64], kind: VariableKind) -> Self {
        let rows = b
            .iter()
            .map(|&bj| {
                let mut row = vec![Cost::INFINITE; bj as usize + 1];
                row[0] = Cost::ZERO;
                row
            })
            .collect();
        CostTable { rows, kind }
    }

    /// Folds one column into the table.
    ///
    /// Binary variables sweep coverage downwards so a column is used at most
    /// once per row; integer variables sweep upwards and may reuse it.
    pub fn update(&mut self, event: &ColumnEvent) {
        let w = event.weight;
        for (j, a) in event.column.iter() {
            let row = &mut self.rows[j];
            let bj = row.len() - 1;
            let a = a as usize;
            let relax = |y: usize, row: &mut Vec<Cost>| {
                let cand = row[y.saturating_sub(a)].plus(w);
                if cand < row[y] {
                    row[y] = cand;
                }
            };
            match self.kind {
                VariableKind::Binary => (1..=bj).rev().for_each(|y| relax(y, row)),
                VariableKind::Integer => (1..=bj).for_each(|y| relax(y, row)),
            }
        }
    }

    pub fn row(&self, j: usize) -> &[Cost] {
        &self.rows[j]
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// `Cost_j[b_j]`.
    pub fn row_cost(&self, j: usize) -> Cost {
        *self.rows[j].last().expect("row has level 0")
    }

    /// `max_j Cost_j[b_j]`, zero for an empty table.
    pub fn cost(&self) -> Cost {
        (0..self.rows.len()).map(|j| self.row_cost(j)).max().unwrap_or(Cost::ZERO)
    }

    /// Number of stored cells, `sum_j (b_j + 1)`.
    pub fn cells(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Minimum `c·x` satisfying row `j` alone.
pub fn cost_of_constraint(inst: &CoveringInstance, j: usize) -> Cost {
    let bj = inst.demands()[j];
    let mut table = CostTable::new(&[bj], inst.kind());
    for (i, col) in inst.columns().iter().enumerate() {
        let a = col.get(j);
        if a > 0 {
            let single = crate::instance::SparseColumn::new(vec![(0, a)]);
            table.update(&ColumnEvent::new(i, single, inst.weights()[i]));
        }
    }
    table.row_cost(0)
}

/// `max_j Cost(j)`; zero when there are no rows.
pub fn cost_of_instance(inst: &CoveringInstance) -> Cost {
    (0..inst.n()).map(|j| cost_of_constraint(inst, j)).max().unwrap_or(Cost::ZERO)
}

/// Computes `Cost(I)` in a single pass over `events`.
pub fn streaming_cost<I>(events: I, b: &[u64], kind: VariableKind) -> Cost
where
    I: IntoIterator,
    I::Item: std::borrow::Borrow<ColumnEvent>,
{
    let mut table = CostTable::new(b, kind);
    for ev in events {
        table.update(ev.borrow());
    }
    table.cost()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{SetSystem, SparseColumn};

    #[test]
    fn cost_arithmetic_saturates() {
        assert_eq!(Cost::finite(3).plus(4), Cost::finite(7));
        assert_eq!(Cost::INFINITE.plus(1), Cost::INFINITE);
        assert_eq!(Cost::finite(u64::MAX - 2).plus(10), Cost::INFINITE);
        assert!(Cost::finite(5) < Cost::INFINITE);
        assert_eq!(Cost::INFINITE.to_string(), "inf");
    }

    #[test]
    fn zero_demand_costs_nothing() {
        let inst = CoveringInstance::new(2, vec![], vec![0, 0], vec![], VariableKind::Binary).unwrap();
        assert_eq!(cost_of_constraint(&inst, 0), Cost::ZERO);
        assert_eq!(cost_of_instance(&inst), Cost::ZERO);
    }

    #[test]
    fn unreachable_demand_is_infinite() {
        let inst = CoveringInstance::new(
            1,
            vec![SparseColumn::new(vec![(0, 2)])],
            vec![3],
            vec![5],
            VariableKind::Binary,
        )
        .unwrap();
        assert_eq!(cost_of_constraint(&inst, 0), Cost::INFINITE);
        // Reuse makes it reachable with integer variables.
        assert_eq!(cost_of_constraint(&inst.with_kind(VariableKind::Integer), 0), Cost::finite(10));
    }

    #[test]
    fn unweighted_cover_costs_one() {
        let s = SetSystem::unweighted(4, vec![vec![0, 1], vec![2, 3], vec![1, 2]]).unwrap();
        assert_eq!(cost_of_instance(&s.to_ilp()), Cost::finite(1));
    }

    #[test]
    fn streaming_matches_offline_on_empty_stream() {
        assert_eq!(streaming_cost(Vec::<ColumnEvent>::new(), &[0, 0], VariableKind::Binary), Cost::ZERO);
        assert_eq!(streaming_cost(Vec::<ColumnEvent>::new(), &[0, 1], VariableKind::Binary), Cost::INFINITE);
        assert_eq!(streaming_cost(Vec::<ColumnEvent>::new(), &[], VariableKind::Binary), Cost::ZERO);
    }

    #[test]
    fn table_rows_stay_monotone() {
        let mut t = CostTable::new(&[4], VariableKind::Binary);
        for (i, (a, w)) in [(1, 3), (2, 1), (3, 7), (1, 1)].into_iter().enumerate() {
            t.update(&ColumnEvent::new(i, SparseColumn::new(vec![(0, a)]), w));
            assert!(t.row(0).windows(2).all(|p| p[0] <= p[1]));
            assert_eq!(t.row(0)[0], Cost::ZERO);
        }
        // Cheapest way to reach 4: a=2 (1) + a=1 (1) + a=1 (3) = 5, or a=3 (7) + a=1 (1) = 8.
        assert_eq!(t.row_cost(0), Cost::finite(5));
    }
}
