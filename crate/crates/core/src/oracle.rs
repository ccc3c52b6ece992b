// SPDX-License-Identifier: Apache-2.0

//! Exact offline optimum of a covering ILP.
//!
//! The solver splits the demand rows into connected components (two rows are
//! connected when some column touches both) and runs a depth-first
//! branch-and-bound on each component:
//!
//! * branch on the uncovered row with the fewest open candidate columns; the
//!   k-th child raises candidate k by one and freezes candidates `< k`,
//! * prune on residual capacity, and on `cost + lower bound >= incumbent`
//!   where the lower bound sums per-row costs over rows with pairwise
//!   disjoint candidate sets (at least `max_j Cost(j)` of the residual),
//! * start from a greedy incumbent.
//!
//! Candidates are tried in descending coverage-per-weight order.

use thiserror::Error;

use crate::instance::{Assignment, CoveringInstance, SetSystem, VariableKind};

/// Search budget for [`exact_opt`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Maximum number of branch-and-bound nodes summed over all components.
    pub max_nodes: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_nodes: 20_000_000 }
    }
}

impl OracleLimits {
    pub fn unlimited() -> Self {
        OracleLimits { max_nodes: u64::MAX }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance is infeasible")]
    Infeasible,
    #[error("oracle node limit of {limit} exceeded")]
    LimitExceeded { limit: u64 },
}

/// An optimal value with a witness assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub value: u64,
    pub x: Assignment,
}

/// Minimum `c·x` over feasible `x`, with a witness.
pub fn exact_opt(inst: &CoveringInstance, limits: OracleLimits) -> Result<Solution, OracleError> {
    solve(inst, limits, None).map(|s| s.expect("no cutoff given"))
}

/// Returns an optimal solution if `opt <= cutoff`, `None` if `opt > cutoff`.
///
/// Cheaper than [`exact_opt`] when the cutoff is small because every branch
/// whose bound exceeds it is discarded immediately.
pub fn exact_opt_within(
    inst: &CoveringInstance,
    cutoff: u64,
    limits: OracleLimits,
) -> Result<Option<Solution>, OracleError> {
    match solve(inst, limits, Some(cutoff)) {
        Err(OracleError::Infeasible) => Ok(None),
        other => other,
    }
}

/// Minimum number (or weight, if weighted) of sets covering the universe,
/// with the chosen set indices.
pub fn exact_set_cover(s: &SetSystem, limits: OracleLimits) -> Result<(u64, Vec<usize>), OracleError> {
    let sol = exact_opt(&s.to_ilp(), limits)?;
    Ok((sol.value, sol.x.support()))
}

fn solve(inst: &CoveringInstance, limits: OracleLimits, cutoff: Option<u64>) -> Result<Option<Solution>, OracleError> {
    if !inst.uncoverable_rows().is_empty() {
        return Err(OracleError::Infeasible);
    }
    let b = inst.demands();
    let mut x = vec![0u64; inst.m()];
    let mut total = 0u64;
    let mut budget = Budget {
        used: 0,
        limit: limits.max_nodes,
    };
    for comp in components(inst) {
        let remaining = cutoff.map(|c| c.saturating_sub(total));
        let mut sub = SubProblem::build(inst, &comp, b);
        match sub.solve(&mut budget, remaining)? {
            None => return Ok(None),
            Some((value, local_x)) => {
                total = total.checked_add(value).expect("objective overflow");
                for (local, &global) in comp.cols.iter().enumerate() {
                    x[global] = local_x[local];
                }
            }
        }
    }
    if let Some(c) = cutoff {
        if total > c {
            return Ok(None);
        }
    }
    Ok(Some(Solution {
        value: total,
        x: Assignment::from(x),
    }))
}

struct Budget {
    used: u64,
    limit: u64,
}

impl Budget {
    fn tick(&mut self) -> Result<(), OracleError> {
        self.used += 1;
        if self.used > self.limit {
            Err(OracleError::LimitExceeded { limit: self.limit })
        } else {
            Ok(())
        }
    }
}

/// Rows with positive demand and the columns touching them.
struct Component {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

fn components(inst: &CoveringInstance) -> Vec<Component> {
    let n = inst.n();
    let b = inst.demands();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for col in inst.columns() {
        let mut first = None;
        for r in col.rows().filter(|&r| b[r] > 0) {
            match first {
                None => first = Some(find(&mut parent, r)),
                Some(root) => {
                    let other = find(&mut parent, r);
                    if other != root {
                        parent[other] = root;
                    }
                }
            }
        }
    }
    let mut index_of_root = vec![usize::MAX; n];
    let mut comps: Vec<Component> = Vec::new();
    for j in (0..n).filter(|&j| b[j] > 0) {
        let root = find(&mut parent, j);
        if index_of_root[root] == usize::MAX {
            index_of_root[root] = comps.len();
            comps.push(Component {
                rows: Vec::new(),
                cols: Vec::new(),
            });
        }
        comps[index_of_root[root]].rows.push(j);
    }
    for (i, col) in inst.columns().iter().enumerate() {
        if let Some(r) = col.rows().find(|&r| b[r] > 0) {
            let root = find(&mut parent, r);
            comps[index_of_root[root]].cols.push(i);
        }
    }
    comps
}

/// One component, reindexed locally. Column order is the branching order.
struct SubProblem {
    /// `cols[i]` = (local row, coefficient) pairs restricted to demand rows.
    cols: Vec<Vec<(usize, u64)>>,
    cost: Vec<u64>,
    ub: Vec<u64>,
    demand: Vec<u64>,
    /// Candidate columns per row, in branching order.
    cands: Vec<Vec<usize>>,
    /// Maps branching order back to the component's column order.
    order: Vec<usize>,
}

struct SearchState {
    x: Vec<u64>,
    frozen: Vec<bool>,
    residual: Vec<u64>,
    cost: u64,
}

impl SubProblem {
    fn build(inst: &CoveringInstance, comp: &Component, b: &[u64]) -> Self {
        let mut local_row = std::collections::HashMap::with_capacity(comp.rows.len());
        for (l, &j) in comp.rows.iter().enumerate() {
            local_row.insert(j, l);
        }
        let demand: Vec<u64> = comp.rows.iter().map(|&j| b[j]).collect();
        let mut cols = Vec::with_capacity(comp.cols.len());
        let mut cost = Vec::with_capacity(comp.cols.len());
        let mut ub = Vec::with_capacity(comp.cols.len());
        for &i in &comp.cols {
            let entries: Vec<(usize, u64)> = inst
                .column(i)
                .iter()
                .filter_map(|(r, a)| local_row.get(&r).map(|&l| (l, a)))
                .collect();
            let bound = match inst.kind() {
                VariableKind::Binary => 1,
                VariableKind::Integer => entries
                    .iter()
                    .map(|&(l, a)| demand[l].div_ceil(a))
                    .max()
                    .unwrap_or(0),
            };
            cols.push(entries);
            cost.push(inst.weights()[i]);
            ub.push(bound);
        }
        // Descending coverage-per-weight; zero-weight columns first.
        let mut order: Vec<usize> = (0..cols.len()).collect();
        let useful = |i: usize| -> u64 { cols[i].iter().map(|&(l, a)| a.min(demand[l])).sum() };
        order.sort_by(|&p, &q| {
            let (up, uq) = (useful(p) as u128, useful(q) as u128);
            let (cp, cq) = (cost[p] as u128, cost[q] as u128);
            (uq * cp).cmp(&(up * cq)).then(p.cmp(&q))
        });
        let cols: Vec<_> = order.iter().map(|&i| cols[i].clone()).collect();
        let cost: Vec<_> = order.iter().map(|&i| cost[i]).collect();
        let ub: Vec<_> = order.iter().map(|&i| ub[i]).collect();
        let mut cands = vec![Vec::new(); demand.len()];
        for (i, col) in cols.iter().enumerate() {
            for &(l, _) in col {
                cands[l].push(i);
            }
        }
        SubProblem {
            cols,
            cost,
            ub,
            demand,
            cands,
            order,
        }
    }

    /// Returns the optimum and its assignment in component column order,
    /// or `None` if the optimum exceeds `cutoff`.
    fn solve(&mut self, budget: &mut Budget, cutoff: Option<u64>) -> Result<Option<(u64, Vec<u64>)>, OracleError> {
        let m = self.cols.len();
        let mut st = SearchState {
            x: vec![0; m],
            frozen: vec![false; m],
            residual: self.demand.clone(),
            cost: 0,
        };
        // Zero-weight columns never hurt.
        for i in 0..m {
            if self.cost[i] == 0 {
                while st.x[i] < self.ub[i] {
                    self.raise(&mut st, i);
                }
                st.frozen[i] = true;
            }
        }
        if !self.capacity_ok(&st) {
            return Err(OracleError::Infeasible);
        }
        let mut best: Option<(u64, Vec<u64>)> = None;
        let mut bound = cutoff.map_or(u64::MAX, |c| c.saturating_add(1));
        if let Some((v, gx)) = self.greedy(&st) {
            if v < bound {
                bound = v;
                best = Some((v, gx));
            }
        }
        self.dfs(&mut st, budget, &mut bound, &mut best)?;
        Ok(best.map(|(v, x)| {
            let mut out = vec![0; m];
            for (pos, &orig) in self.order.iter().enumerate() {
                out[orig] = x[pos];
            }
            (v, out)
        }))
    }

    fn raise(&self, st: &mut SearchState, i: usize) {
        st.x[i] += 1;
        st.cost += self.cost[i];
        for &(l, a) in &self.cols[i] {
            st.residual[l] = st.residual[l].saturating_sub(a);
        }
    }

    fn capacity_ok(&self, st: &SearchState) -> bool {
        st.residual.iter().enumerate().all(|(l, &r)| {
            r == 0 || {
                let cap = self.cands[l]
                    .iter()
                    .filter(|&&i| !st.frozen[i])
                    .map(|&i| {
                        let a = self.cols[i].iter().find(|e| e.0 == l).map_or(0, |e| e.1);
                        a.saturating_mul(self.ub[i] - st.x[i])
                    })
                    .fold(0u64, u64::saturating_add);
                cap >= r
            }
        })
    }

    fn coeff(&self, i: usize, l: usize) -> u64 {
        self.cols[i].iter().find(|e| e.0 == l).map_or(0, |e| e.1)
    }

    fn greedy(&self, start: &SearchState) -> Option<(u64, Vec<u64>)> {
        let mut x = start.x.clone();
        let mut residual = start.residual.clone();
        let mut cost = start.cost;
        while residual.iter().any(|&r| r > 0) {
            let mut pick: Option<(usize, u64)> = None;
            for i in 0..self.cols.len() {
                if start.frozen[i] || x[i] >= self.ub[i] {
                    continue;
                }
                let gain: u64 = self.cols[i].iter().map(|&(l, a)| a.min(residual[l])).sum();
                if gain == 0 {
                    continue;
                }
                let better = match pick {
                    None => true,
                    Some((j, g)) => (gain as u128) * (self.cost[j] as u128) > (g as u128) * (self.cost[i] as u128),
                };
                if better {
                    pick = Some((i, gain));
                }
            }
            let (i, _) = pick?;
            x[i] += 1;
            cost += self.cost[i];
            for &(l, a) in &self.cols[i] {
                residual[l] = residual[l].saturating_sub(a);
            }
        }
        Some((cost, x))
    }

    /// Lower bound on the cost of covering row `l`'s residual with open
    /// columns, or `None` if the residual cannot be covered.
    fn row_bound(&self, st: &SearchState, l: usize) -> Option<u64> {
        let r = st.residual[l];
        let mut cap = 0u64;
        let mut min_cost = u64::MAX;
        // Best ratio cost / useful coverage as a fraction (num, den).
        let mut best: Option<(u64, u64)> = None;
        for &i in &self.cands[l] {
            if st.frozen[i] || st.x[i] >= self.ub[i] {
                continue;
            }
            let a = self.coeff(i, l);
            cap = cap.saturating_add(a.saturating_mul(self.ub[i] - st.x[i]));
            min_cost = min_cost.min(self.cost[i]);
            let useful = a.min(r);
            let c = self.cost[i];
            best = match best {
                Some((bc, bu)) if (bc as u128) * (useful as u128) <= (c as u128) * (bu as u128) => Some((bc, bu)),
                _ => Some((c, useful)),
            };
        }
        if cap < r {
            return None;
        }
        let (c, u) = best?;
        let ratio_bound = ((r as u128) * (c as u128)).div_ceil(u as u128) as u64;
        Some(ratio_bound.max(min_cost))
    }

    fn dfs(
        &self,
        st: &mut SearchState,
        budget: &mut Budget,
        bound: &mut u64,
        best: &mut Option<(u64, Vec<u64>)>,
    ) -> Result<(), OracleError> {
        budget.tick()?;
        if st.cost >= *bound {
            return Ok(());
        }
        let open_rows: Vec<usize> = (0..st.residual.len()).filter(|&l| st.residual[l] > 0).collect();
        if open_rows.is_empty() {
            *bound = st.cost;
            *best = Some((st.cost, st.x.clone()));
            return Ok(());
        }
        let mut rows = Vec::with_capacity(open_rows.len());
        for &l in &open_rows {
            match self.row_bound(st, l) {
                None => return Ok(()),
                Some(lb) => rows.push((lb, l)),
            }
        }
        // Disjoint-candidate packing bound.
        rows.sort_unstable_by(|p, q| q.0.cmp(&p.0).then(p.1.cmp(&q.1)));
        let mut marked = vec![false; self.cols.len()];
        let mut lb = 0u64;
        for &(rb, l) in &rows {
            let open = self.cands[l].iter().filter(|&&i| !st.frozen[i] && st.x[i] < self.ub[i]);
            if open.clone().any(|&i| marked[i]) {
                continue;
            }
            for &i in open {
                marked[i] = true;
            }
            lb = lb.saturating_add(rb);
        }
        if st.cost.saturating_add(lb) >= *bound {
            return Ok(());
        }
        // Branch on the row with the fewest open candidates.
        let branch_row = open_rows
            .iter()
            .copied()
            .min_by_key(|&l| {
                let open = self.cands[l]
                    .iter()
                    .filter(|&&i| !st.frozen[i] && st.x[i] < self.ub[i])
                    .count();
                (open, std::cmp::Reverse(st.residual[l]), l)
            })
            .expect("open rows non-empty");
        let cands: Vec<usize> = self.cands[branch_row]
            .iter()
            .copied()
            .filter(|&i| !st.frozen[i] && st.x[i] < self.ub[i])
            .collect();
        let mut newly_frozen = Vec::new();
        for &i in &cands {
            let saved_residual: Vec<(usize, u64)> = self.cols[i].iter().map(|&(l, _)| (l, st.residual[l])).collect();
            self.raise(st, i);
            let result = self.dfs(st, budget, bound, best);
            st.x[i] -= 1;
            st.cost -= self.cost[i];
            for (l, r) in saved_residual {
                st.residual[l] = r;
            }
            if let Err(e) = result {
                for &f in &newly_frozen {
                    st.frozen[f] = false;
                }
                return Err(e);
            }
            st.frozen[i] = true;
            newly_frozen.push(i);
        }
        for f in newly_frozen {
            st.frozen[f] = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::SparseColumn;

    fn lim() -> OracleLimits {
        OracleLimits::default()
    }

    #[test]
    fn zero_demand_is_free() {
        let inst = CoveringInstance::new(
            3,
            vec![SparseColumn::indicator([0, 1])],
            vec![0, 0, 0],
            vec![4],
            VariableKind::Binary,
        )
        .unwrap();
        let sol = exact_opt(&inst, lim()).unwrap();
        assert_eq!(sol.value, 0);
        assert_eq!(sol.x, Assignment::zeros(1));
    }

    #[test]
    fn picks_the_single_covering_column() {
        let inst = CoveringInstance::new(
            2,
            vec![
                SparseColumn::indicator([0]),
                SparseColumn::indicator([1]),
                SparseColumn::indicator([0, 1]),
            ],
            vec![1, 1],
            vec![1, 1, 1],
            VariableKind::Binary,
        )
        .unwrap();
        let sol = exact_opt(&inst, lim()).unwrap();
        assert_eq!(sol.value, 1);
        assert_eq!(sol.x.x, vec![0, 0, 1]);
    }

    #[test]
    fn infeasible_instances_are_reported() {
        let s = SetSystem::unweighted(1, vec![]).unwrap();
        assert_eq!(exact_set_cover(&s, lim()), Err(OracleError::Infeasible));
        let short = CoveringInstance::new(1, vec![SparseColumn::new(vec![(0, 2)])], vec![3], vec![1], VariableKind::Binary)
            .unwrap();
        assert_eq!(exact_opt(&short, lim()), Err(OracleError::Infeasible));
    }

    #[test]
    fn full_set_and_forced_singletons() {
        let full = SetSystem::unweighted(5, vec![vec![0, 1], (0..5).collect(), vec![3]]).unwrap();
        assert_eq!(exact_set_cover(&full, lim()).unwrap(), (1, vec![1]));
        let singles = SetSystem::unweighted(6, (0..6).map(|e| vec![e]).collect()).unwrap();
        assert_eq!(exact_set_cover(&singles, lim()).unwrap(), (6, (0..6).collect()));
    }

    #[test]
    fn integer_variables_may_repeat() {
        let inst = CoveringInstance::new(1, vec![SparseColumn::indicator([0])], vec![3], vec![1], VariableKind::Integer)
            .unwrap();
        let sol = exact_opt(&inst, lim()).unwrap();
        assert_eq!(sol.value, 3);
        assert_eq!(sol.x.x, vec![3]);
    }

    #[test]
    fn cutoff_search() {
        let singles = SetSystem::unweighted(6, (0..6).map(|e| vec![e]).collect()).unwrap().to_ilp();
        assert_eq!(exact_opt_within(&singles, 5, lim()).unwrap(), None);
        assert_eq!(exact_opt_within(&singles, 6, lim()).unwrap().unwrap().value, 6);
    }

    #[test]
    fn node_limit_is_enforced() {
        let s = SetSystem::unweighted(
            8,
            (0..8).flat_map(|a| (0..8).filter(move |&b| b > a).map(move |b| vec![a, b])).collect(),
        )
        .unwrap();
        let err = exact_opt(&s.to_ilp(), OracleLimits { max_nodes: 1 }).unwrap_err();
        assert_eq!(err, OracleError::LimitExceeded { limit: 1 });
    }
}
