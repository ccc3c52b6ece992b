// SPDX-License-Identifier: Apache-2.0

//! The per-guess tester.
//!
//! A tester for guess `k` keeps a residual demand vector, a random row
//! sample `V` (rate `min(1, 4 ln n / α)`), and for every column it does not
//! prune, the projection of that column onto `V`. Columns heavier than `k`
//! are ignored. A column whose clipped contribution `u = min(b_res, A_i)` has
//! ℓ₁-norm at least `n·b_max/α` is pruned: `b_res -= u` and nothing is
//! stored. At the end the sampled residual ILP is solved and `k` is accepted
//! iff its optimum is at most `k`.

use std::sync::Arc;

use rand::Rng as _;

use crate::instance::{ColumnEvent, CoveringInstance, SparseColumn, VariableKind};
use crate::oracle::{exact_opt, exact_opt_within, OracleError, OracleLimits};
use crate::rng;
use crate::sampler::lemma_rate;

/// What gets stored for a retained column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionMode {
    /// `u_i(V)`: the column clipped by the residual at arrival.
    #[default]
    Clipped,
    /// `A_i(V)`: the raw column. Same optimum, more space.
    Full,
}

/// Which pruning threshold to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PruneRule {
    /// `||u||₁ >= n·b_max/α`.
    #[default]
    Standard,
    /// `||u||₁ >= n/α`, for unweighted multi-cover.
    Multicover,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TesterConfig {
    pub projection: ProjectionMode,
    pub prune: PruneRule,
    /// Abort once a stored projection reaches `c·n·b_max/α²` entries.
    pub space_guard: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }
}

/// How a tester handled one column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventOutcome {
    Skipped,
    Pruned,
    Retained,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetainedColumn {
    pub index: usize,
    pub weight: u64,
    /// Entries on sampled rows only, in global row ids.
    pub projection: SparseColumn,
}

/// The row sample `V`, shareable between testers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSample {
    member: Vec<bool>,
    rows: Vec<usize>,
}

impl RowSample {
    /// Each of `n` rows independently with probability `min(1, 4 ln n / α)`.
    pub fn draw(n: usize, alpha: f64, seed: u64) -> Self {
        let p = lemma_rate(n, alpha).min(1.0);
        let mut rng = rng::stream(seed, 0);
        let member: Vec<bool> = (0..n).map(|_| rng.gen_bool(p)).collect();
        Self::from_membership(member)
    }

    pub fn from_membership(member: Vec<bool>) -> Self {
        let rows = member.iter().enumerate().filter(|(_, &m)| m).map(|(j, _)| j).collect();
        RowSample { member, rows }
    }

    pub fn all(n: usize) -> Self {
        Self::from_membership(vec![true; n])
    }

    pub fn contains(&self, row: usize) -> bool {
        self.member[row]
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Logical space of a tester, in bits, per stored structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SpaceBreakdown {
    pub b_res: u64,
    pub tilde_c: u64,
    pub tilde_a: u64,
    pub sample: u64,
}

impl SpaceBreakdown {
    pub fn total(&self) -> u64 {
        self.b_res + self.tilde_c + self.tilde_a + self.sample
    }
}

impl std::ops::Add for SpaceBreakdown {
    type Output = SpaceBreakdown;

    fn add(self, o: SpaceBreakdown) -> SpaceBreakdown {
        SpaceBreakdown {
            b_res: self.b_res + o.b_res,
            tilde_c: self.tilde_c + o.tilde_c,
            tilde_a: self.tilde_a + o.tilde_a,
            sample: self.sample + o.sample,
        }
    }
}

/// Bits needed to write any value in `[0, x)`, i.e. `ceil(log2 x)`.
pub fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - u64::from((x - 1).leading_zeros())
    }
}

/// Running state of one tester. Cloning yields an independent snapshot.
#[derive(Debug, Clone)]
pub struct TesterState {
    k: u64,
    alpha: f64,
    n: usize,
    m: usize,
    b_max: u64,
    sample: Arc<RowSample>,
    b_res: Vec<u64>,
    retained: Vec<RetainedColumn>,
    pruned_count: usize,
    pruned_weight_total: u64,
    max_weight_seen: u64,
    guard_tripped: bool,
    config: TesterConfig,
}

impl TesterState {
    /// A fresh tester with its own row sample drawn from `seed`.
    pub fn new(n: usize, m: usize, b: &[u64], k: u64, alpha: f64, seed: u64, config: TesterConfig) -> Self {
        let sample = Arc::new(RowSample::draw(n, alpha, seed));
        Self::with_sample(m, b, k, alpha, sample, config)
    }

    /// A fresh tester over an existing row sample.
    pub fn with_sample(m: usize, b: &[u64], k: u64, alpha: f64, sample: Arc<RowSample>, config: TesterConfig) -> Self {
        assert!(alpha > 0.0, "alpha must be positive");
        TesterState {
            k,
            alpha,
            n: b.len(),
            m,
            b_max: b.iter().copied().max().unwrap_or(0),
            sample,
            b_res: b.to_vec(),
            retained: Vec::new(),
            pruned_count: 0,
            pruned_weight_total: 0,
            max_weight_seen: 0,
            guard_tripped: false,
            config,
        }
    }

    /// Snapshot of this tester re-labelled with guess `k`.
    pub fn fork(&self, k: u64) -> Self {
        TesterState { k, ..self.clone() }
    }

    pub fn guess(&self) -> u64 {
        self.k
    }

    pub fn residual(&self) -> &[u64] {
        &self.b_res
    }

    pub fn sample(&self) -> &RowSample {
        &self.sample
    }

    pub fn retained(&self) -> &[RetainedColumn] {
        &self.retained
    }

    pub fn pruned_count(&self) -> usize {
        self.pruned_count
    }

    pub fn pruned_weight_total(&self) -> u64 {
        self.pruned_weight_total
    }

    pub fn guard_tripped(&self) -> bool {
        self.guard_tripped
    }

    fn prune_numerator(&self) -> f64 {
        match self.config.prune {
            PruneRule::Standard => self.n as f64 * self.b_max as f64,
            PruneRule::Multicover => self.n as f64,
        }
    }

    /// The ℓ₁ threshold a clipped column must reach to be pruned.
    pub fn prune_threshold(&self) -> f64 {
        self.prune_numerator() / self.alpha
    }

    pub fn process(&mut self, event: &ColumnEvent) -> EventOutcome {
        self.max_weight_seen = self.max_weight_seen.max(event.weight);
        if event.weight > self.k {
            return EventOutcome::Skipped;
        }
        let clipped: Vec<(usize, u64)> = event
            .column
            .iter()
            .map(|(j, a)| (j, a.min(self.b_res[j])))
            .filter(|&(_, v)| v > 0)
            .collect();
        let norm: u64 = clipped.iter().map(|&(_, v)| v).sum();
        // A zero clip never prunes; this only matters when b is all zeros.
        if norm > 0 && norm as f64 * self.alpha >= self.prune_numerator() {
            for &(j, v) in &clipped {
                self.b_res[j] -= v;
            }
            self.pruned_count += 1;
            self.pruned_weight_total += event.weight;
            return EventOutcome::Pruned;
        }
        let projection: SparseColumn = match self.config.projection {
            ProjectionMode::Clipped => clipped.into_iter().filter(|&(j, _)| self.sample.contains(j)).collect(),
            ProjectionMode::Full => event.column.iter().filter(|&(j, _)| self.sample.contains(j)).collect(),
        };
        if let Some(c) = self.config.space_guard {
            let cap = c * self.n as f64 * self.b_max as f64 / (self.alpha * self.alpha);
            if projection.nnz() as f64 >= cap {
                self.guard_tripped = true;
            }
        }
        self.retained.push(RetainedColumn {
            index: event.index,
            weight: event.weight,
            projection,
        });
        EventOutcome::Retained
    }

    /// `min c̃·x s.t. Ã x >= b_res(V)` over the sampled rows, reindexed.
    pub fn tester_instance(&self) -> CoveringInstance {
        let mut local = vec![usize::MAX; self.n];
        for (l, &j) in self.sample.rows().iter().enumerate() {
            local[j] = l;
        }
        let b: Vec<u64> = self.sample.rows().iter().map(|&j| self.b_res[j]).collect();
        let columns = self
            .retained
            .iter()
            .map(|r| r.projection.iter().map(|(j, a)| (local[j], a)).collect())
            .collect();
        let c = self.retained.iter().map(|r| r.weight).collect();
        CoveringInstance::new(b.len(), columns, b, c, VariableKind::Binary).expect("projection rows lie in V")
    }

    /// Exact optimum of the tester instance, `None` if infeasible.
    pub fn tester_opt(&self, limits: OracleLimits) -> Result<Option<u64>, OracleError> {
        match exact_opt(&self.tester_instance(), limits) {
            Ok(sol) => Ok(Some(sol.value)),
            Err(OracleError::Infeasible) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// ACCEPT iff the tester instance has a solution of value at most `k`.
    pub fn finalize(&self, limits: OracleLimits) -> Result<Verdict, OracleError> {
        Ok(match exact_opt_within(&self.tester_instance(), self.k, limits)? {
            Some(_) => Verdict::Accept,
            None => Verdict::Reject,
        })
    }

    /// Bits held by the tester's stored structures.
    pub fn logical_space_bits(&self) -> SpaceBreakdown {
        let row_bits = ceil_log2(self.n as u64);
        let nnz: u64 = self.retained.iter().map(|r| r.projection.nnz() as u64).sum();
        let a_max = self.retained.iter().map(|r| r.projection.max_entry()).max().unwrap_or(0);
        SpaceBreakdown {
            b_res: self.n as u64 * ceil_log2(self.b_max + 1),
            tilde_c: self.m as u64 * ceil_log2(self.max_weight_seen.saturating_add(1)),
            tilde_a: nnz * (row_bits + ceil_log2(a_max + 1)),
            sample: self.sample.len() as u64 * row_bits,
        }
    }
}

/// `TesterState::new` with the default configuration.
pub fn tester_init(n: usize, m: usize, b: &[u64], k: u64, alpha: f64, seed: u64) -> TesterState {
    TesterState::new(n, m, b, k, alpha, seed, TesterConfig::default())
}
