// SPDX-License-Identifier: Apache-2.0

//! α-estimation of covering ILPs in one pass.
//!
//! Two parts run side by side over the stream: the `Cost(I)` dynamic program
//! and a bank of testers, one group of boosted copies per guess
//! `k ∈ {1, 2, 4, ..., 2^⌈log₂(m·c_max)⌉}`. The output is `32α·k*` for the
//! smallest accepted guess `k* >= Cost(I)`.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::cost::{Cost, CostTable};
use crate::instance::{ColumnEvent, CoveringInstance, VariableKind};
use crate::oracle::{OracleError, OracleLimits};
use crate::rng;
use crate::tester::{ceil_log2, PruneRule, RowSample, SpaceBreakdown, TesterConfig, TesterState, Verdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("instance is infeasible")]
    Infeasible,
    #[error("alpha must be at least 1, got {0}")]
    BadAlpha(f64),
    #[error("boost_copies must be at least 1")]
    ZeroBoost,
    #[error("column {index} has weight {weight} above the declared c_max {c_max}")]
    WeightAboveCmax { index: usize, weight: u64, c_max: u64 },
    #[error("column {index} has weight {weight}; the multi-cover estimator needs unit weights")]
    Weighted { index: usize, weight: u64 },
    #[error("column {index} touches row {row}, but there are only {n} rows")]
    RowOutOfRange { index: usize, row: usize, n: usize },
    #[error("space guard tripped in the tester for guess {guess}")]
    SpaceGuardTripped { guess: u64 },
    #[error(transparent)]
    Oracle(OracleError),
}

impl From<OracleError> for EstimateError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Infeasible => EstimateError::Infeasible,
            other => EstimateError::Oracle(other),
        }
    }
}

/// Powers of two from 1 up to the first one `>= m·c_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessLadder {
    guesses: Vec<u64>,
}

impl GuessLadder {
    pub fn new(m: usize, c_max: u64) -> Self {
        Self::up_to((m as u64).saturating_mul(c_max))
    }

    /// `{2^γ : 0 <= γ <= ⌈log₂ bound⌉}`.
    pub fn up_to(bound: u64) -> Self {
        let top = ceil_log2(bound.max(1));
        GuessLadder {
            guesses: (0..=top).map(|g| 1u64 << g).collect(),
        }
    }

    pub fn guesses(&self) -> &[u64] {
        &self.guesses
    }

    pub fn len(&self) -> usize {
        self.guesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.guesses.is_empty()
    }

    pub fn max(&self) -> u64 {
        *self.guesses.last().expect("ladder is never empty")
    }

    /// Default number of boosted copies: `⌈log₂ |K|⌉ + 2`.
    pub fn default_boost(&self) -> usize {
        ceil_log2(self.len() as u64) as usize + 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub alpha: f64,
    pub seed: u64,
    /// Copies per guess; `None` uses [`GuessLadder::default_boost`].
    pub boost_copies: Option<usize>,
    pub tester: TesterConfig,
    pub limits: OracleLimits,
}

impl EstimatorConfig {
    pub fn new(alpha: f64, seed: u64) -> Self {
        EstimatorConfig {
            alpha,
            seed,
            boost_copies: None,
            tester: TesterConfig::default(),
            limits: OracleLimits::default(),
        }
    }

    pub fn with_boost(mut self, copies: usize) -> Self {
        self.boost_copies = Some(copies);
        self
    }

    pub fn with_limits(mut self, limits: OracleLimits) -> Self {
        self.limits = limits;
        self
    }

    fn check(&self) -> Result<(), EstimateError> {
        if !(self.alpha >= 1.0) {
            return Err(EstimateError::BadAlpha(self.alpha));
        }
        if self.boost_copies == Some(0) {
            return Err(EstimateError::ZeroBoost);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessVerdict {
    pub guess: u64,
    pub verdict: Verdict,
    pub copies: usize,
    pub rejecting_copies: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub estimate: f64,
    /// The guess the estimate was derived from (0 when demand is zero).
    pub k_star: u64,
    pub cost_value: u64,
    pub verdicts: Vec<GuessVerdict>,
    /// Bits across all testers plus the cost table.
    pub space_bits: u64,
    pub tester_space: SpaceBreakdown,
    /// Largest pruned count over all testers.
    pub max_pruned: usize,
}

impl EstimateReport {
    fn zero_demand() -> Self {
        EstimateReport {
            estimate: 0.0,
            k_star: 0,
            cost_value: 0,
            verdicts: Vec::new(),
            space_bits: 0,
            tester_space: SpaceBreakdown::default(),
            max_pruned: 0,
        }
    }
}

fn check_event(ev: &ColumnEvent, n: usize) -> Result<(), EstimateError> {
    match ev.column.rows().find(|&r| r >= n) {
        Some(row) => Err(EstimateError::RowOutOfRange {
            index: ev.index,
            row,
            n,
        }),
        None => Ok(()),
    }
}

fn cost_bits(table: &CostTable, value_bound: u64) -> u64 {
    table.cells() as u64 * ceil_log2(value_bound.saturating_add(2))
}

fn tester_seed(seed: u64, guess_index: usize, copy: usize) -> u64 {
    rng::derive(rng::derive(seed, guess_index as u64), copy as u64)
}

/// Known-`c_max` estimation over a stream of binary-variable columns.
///
/// `m` is the stream length and `c_max` an upper bound on every weight.
pub fn estimate_opt<I>(
    events: I,
    n: usize,
    m: usize,
    b: &[u64],
    c_max: u64,
    cfg: &EstimatorConfig,
) -> Result<EstimateReport, EstimateError>
where
    I: IntoIterator<Item = ColumnEvent>,
{
    cfg.check()?;
    assert_eq!(b.len(), n, "demand vector length must equal n");
    if b.iter().all(|&v| v == 0) {
        return Ok(EstimateReport::zero_demand());
    }
    let ladder = GuessLadder::new(m, c_max);
    let copies = cfg.boost_copies.unwrap_or_else(|| ladder.default_boost());
    let mut table = CostTable::new(b, VariableKind::Binary);
    let mut bank: Vec<Vec<TesterState>> = ladder
        .guesses()
        .iter()
        .enumerate()
        .map(|(g, &k)| {
            (0..copies)
                .map(|r| TesterState::new(n, m, b, k, cfg.alpha, tester_seed(cfg.seed, g, r), cfg.tester))
                .collect()
        })
        .collect();

    for ev in events {
        check_event(&ev, n)?;
        if ev.weight > c_max {
            return Err(EstimateError::WeightAboveCmax {
                index: ev.index,
                weight: ev.weight,
                c_max,
            });
        }
        table.update(&ev);
        for t in bank.iter_mut().flatten() {
            t.process(&ev);
        }
    }

    let cost = table.cost();
    let cost_value = cost.value().ok_or(EstimateError::Infeasible)?;
    if let Some(t) = bank.iter().flatten().find(|t| t.guard_tripped()) {
        return Err(EstimateError::SpaceGuardTripped { guess: t.guess() });
    }

    let verdicts = finalize_bank(&bank, cfg.limits)?;
    let k_star = verdicts
        .iter()
        .filter(|v| v.guess >= cost_value && v.verdict.is_accept())
        .map(|v| v.guess)
        .next()
        .ok_or(EstimateError::Infeasible)?;
    let tester_space = bank
        .iter()
        .flatten()
        .map(TesterState::logical_space_bits)
        .fold(SpaceBreakdown::default(), |a, s| a + s);
    Ok(EstimateReport {
        estimate: 32.0 * cfg.alpha * k_star as f64,
        k_star,
        cost_value,
        space_bits: tester_space.total() + cost_bits(&table, (m as u64).saturating_mul(c_max)),
        tester_space,
        max_pruned: bank.iter().flatten().map(TesterState::pruned_count).max().unwrap_or(0),
        verdicts,
    })
}

/// A guess is rejected if any of its copies rejects.
fn finalize_bank(bank: &[Vec<TesterState>], limits: OracleLimits) -> Result<Vec<GuessVerdict>, EstimateError> {
    bank.par_iter()
        .map(|copies| {
            let rejecting = copies
                .iter()
                .map(|t| t.finalize(limits))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .filter(|v| !v.is_accept())
                .count();
            Ok(GuessVerdict {
                guess: copies[0].guess(),
                verdict: if rejecting == 0 { Verdict::Accept } else { Verdict::Reject },
                copies: copies.len(),
                rejecting_copies: rejecting,
            })
        })
        .collect::<Result<Vec<_>, OracleError>>()
        .map_err(EstimateError::from)
}

/// Estimation without knowing `c_max` up front.
///
/// All testers share one row sample. The ladder starts at `{1}`; when a
/// heavier column arrives, each new guess starts as a copy of the tester for
/// the current largest guess. The output is `64α` times the largest rejected
/// guess, or `32α` times the smallest guess if nothing was rejected.
pub fn estimate_opt_unknown_cmax<I>(
    events: I,
    n: usize,
    m: usize,
    b: &[u64],
    cfg: &EstimatorConfig,
) -> Result<EstimateReport, EstimateError>
where
    I: IntoIterator<Item = ColumnEvent>,
{
    cfg.check()?;
    assert_eq!(b.len(), n, "demand vector length must equal n");
    if b.iter().all(|&v| v == 0) {
        return Ok(EstimateReport::zero_demand());
    }
    let sample = Arc::new(RowSample::draw(n, cfg.alpha, cfg.seed));
    let mut table = CostTable::new(b, VariableKind::Binary);
    let mut testers = vec![TesterState::with_sample(m, b, 1, cfg.alpha, sample, cfg.tester)];
    let mut c_seen = 0u64;

    for ev in events {
        check_event(&ev, n)?;
        if ev.weight > c_seen {
            c_seen = ev.weight;
            let top = GuessLadder::new(m, c_seen).max();
            while testers.last().expect("non-empty").guess() < top {
                let last = testers.last().expect("non-empty");
                let next = last.fork(last.guess() * 2);
                testers.push(next);
            }
        }
        table.update(&ev);
        for t in &mut testers {
            t.process(&ev);
        }
    }

    let cost_value = table.cost().value().ok_or(EstimateError::Infeasible)?;
    if let Some(t) = testers.iter().find(|t| t.guard_tripped()) {
        return Err(EstimateError::SpaceGuardTripped { guess: t.guess() });
    }
    let bank: Vec<Vec<TesterState>> = testers.into_iter().map(|t| vec![t]).collect();
    let verdicts = finalize_bank(&bank, cfg.limits)?;
    let (k_star, estimate) = match verdicts.iter().rev().find(|v| !v.verdict.is_accept()) {
        Some(v) => (v.guess, 64.0 * cfg.alpha * v.guess as f64),
        None => {
            let k = verdicts[0].guess;
            (k, 32.0 * cfg.alpha * k as f64)
        }
    };
    let tester_space = bank
        .iter()
        .flatten()
        .map(TesterState::logical_space_bits)
        .fold(SpaceBreakdown::default(), |a, s| a + s);
    Ok(EstimateReport {
        estimate,
        k_star,
        cost_value,
        space_bits: tester_space.total() + cost_bits(&table, (m as u64).saturating_mul(c_seen)),
        tester_space,
        max_pruned: bank.iter().flatten().map(TesterState::pruned_count).max().unwrap_or(0),
        verdicts,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticoverReport {
    /// `#pruned + 8α(opt(I_tester) + b_max)`.
    pub estimate: f64,
    pub pruned: usize,
    pub opt_tester: u64,
    pub b_max: u64,
    pub space: SpaceBreakdown,
}

/// Single-tester estimate for unweighted set multi-cover.
pub fn multicover_estimate<I>(
    events: I,
    n: usize,
    m: usize,
    b: &[u64],
    cfg: &EstimatorConfig,
) -> Result<MulticoverReport, EstimateError>
where
    I: IntoIterator<Item = ColumnEvent>,
{
    cfg.check()?;
    assert_eq!(b.len(), n, "demand vector length must equal n");
    let b_max = b.iter().copied().max().unwrap_or(0);
    let config = TesterConfig {
        prune: PruneRule::Multicover,
        ..cfg.tester
    };
    let mut tester = TesterState::new(n, m, b, u64::MAX, cfg.alpha, cfg.seed, config);
    let mut table = CostTable::new(b, VariableKind::Binary);
    for ev in events {
        check_event(&ev, n)?;
        if ev.weight != 1 {
            return Err(EstimateError::Weighted {
                index: ev.index,
                weight: ev.weight,
            });
        }
        table.update(&ev);
        tester.process(&ev);
    }
    if table.cost() == Cost::INFINITE {
        return Err(EstimateError::Infeasible);
    }
    if tester.guard_tripped() {
        return Err(EstimateError::SpaceGuardTripped { guess: tester.guess() });
    }
    let opt_tester = tester.tester_opt(cfg.limits)?.ok_or(EstimateError::Infeasible)?;
    let pruned = tester.pruned_count();
    Ok(MulticoverReport {
        estimate: pruned as f64 + 8.0 * cfg.alpha * (opt_tester + b_max) as f64,
        pruned,
        opt_tester,
        b_max,
        space: tester.logical_space_bits(),
    })
}

/// Binary copies per integer variable: `⌈log₂(b_max + 1)⌉`.
pub fn binary_copies(b_max: u64) -> usize {
    ceil_log2(b_max.saturating_add(1)) as usize
}

/// Replaces each integer column by copies scaled by `1, 2, 4, ...`, one per
/// bit of `b_max`. Copy `t` of column `i` gets index `i·L + t`.
pub fn binarize_events<I>(events: I, b_max: u64) -> impl Iterator<Item = ColumnEvent>
where
    I: IntoIterator<Item = ColumnEvent>,
{
    let copies = binary_copies(b_max);
    events.into_iter().flat_map(move |ev| {
        (0..copies).map(move |t| {
            let f = 1u64 << t;
            ColumnEvent::new(ev.index * copies + t, ev.column.scaled(f), ev.weight.saturating_mul(f))
        })
    })
}

/// The binary-variable instance with the same optimum as an integer one.
/// Binary instances are returned unchanged.
pub fn binarize(inst: &CoveringInstance) -> CoveringInstance {
    if inst.kind() == VariableKind::Binary {
        return inst.clone();
    }
    let b_max = inst.b_max();
    let events: Vec<ColumnEvent> = binarize_events(inst.events(), b_max).collect();
    let (columns, c) = events.into_iter().map(|e| (e.column, e.weight)).unzip();
    CoveringInstance::new(inst.n(), columns, inst.demands().to_vec(), c, VariableKind::Binary)
        .expect("scaling keeps rows in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{SetSystem, SparseColumn};

    #[test]
    fn ladder_covers_m_cmax() {
        assert_eq!(GuessLadder::new(1, 1).guesses(), &[1]);
        assert_eq!(GuessLadder::new(3, 1).guesses(), &[1, 2, 4]);
        assert_eq!(GuessLadder::new(4, 2).guesses(), &[1, 2, 4, 8]);
        assert_eq!(GuessLadder::new(0, 5).guesses(), &[1]);
        let l = GuessLadder::new(5, 7);
        assert!(l.max() >= 35);
        assert_eq!(l.default_boost(), ceil_log2(l.len() as u64) as usize + 2);
    }

    #[test]
    fn single_full_set() {
        let s = SetSystem::unweighted(6, vec![(0..6).collect()]).unwrap();
        let alpha = 2.0;
        let r = estimate_opt(s.events(), 6, 1, &[1; 6], 1, &EstimatorConfig::new(alpha, 3)).unwrap();
        assert_eq!(r.cost_value, 1);
        assert!(r.k_star == 1 || r.k_star == 2);
        assert!(r.estimate <= 64.0 * alpha);
    }

    #[test]
    fn zero_demand_estimates_zero() {
        let s = SetSystem::unweighted(3, vec![vec![0]]).unwrap();
        let r = estimate_opt(s.events(), 3, 1, &[0; 3], 1, &EstimatorConfig::new(2.0, 0)).unwrap();
        assert_eq!(r.estimate, 0.0);
        let u = estimate_opt_unknown_cmax(s.events(), 3, 1, &[0; 3], &EstimatorConfig::new(2.0, 0)).unwrap();
        assert_eq!(u.estimate, 0.0);
    }

    #[test]
    fn infeasible_and_bad_config() {
        let s = SetSystem::unweighted(3, vec![vec![0]]).unwrap();
        let cfg = EstimatorConfig::new(2.0, 0);
        assert_eq!(estimate_opt(s.events(), 3, 1, &[1; 3], 1, &cfg), Err(EstimateError::Infeasible));
        assert_eq!(
            estimate_opt(s.events(), 3, 1, &[1; 3], 1, &cfg.clone().with_boost(0)),
            Err(EstimateError::ZeroBoost)
        );
        let heavy = SetSystem::new(3, vec![vec![0, 1, 2]], Some(vec![9])).unwrap();
        assert!(matches!(
            estimate_opt(heavy.events(), 3, 1, &[1; 3], 4, &cfg),
            Err(EstimateError::WeightAboveCmax { .. })
        ));
    }

    #[test]
    fn unknown_cmax_grows_ladder_lazily() {
        let s = SetSystem::new(4, vec![vec![0, 1], vec![2, 3], vec![0, 3]], Some(vec![1, 3, 2])).unwrap();
        let cfg = EstimatorConfig::new(1.0, 0);
        let r = estimate_opt_unknown_cmax(s.events(), 4, 3, &[1; 4], &cfg).unwrap();
        let guesses: Vec<u64> = r.verdicts.iter().map(|v| v.guess).collect();
        assert_eq!(guesses, GuessLadder::new(3, 3).guesses());
    }

    #[test]
    fn binarize_small_cases() {
        let int = CoveringInstance::new(1, vec![SparseColumn::indicator([0])], vec![3], vec![1], VariableKind::Integer)
            .unwrap();
        let bin = binarize(&int);
        assert_eq!(bin.m(), 2);
        assert_eq!(bin.column(0).entries(), &[(0, 1)]);
        assert_eq!(bin.column(1).entries(), &[(0, 2)]);
        assert_eq!(bin.weights(), &[1, 2]);
        assert_eq!(bin.kind(), VariableKind::Binary);

        let unit = CoveringInstance::new(2, vec![SparseColumn::indicator([0, 1])], vec![1, 1], vec![4], VariableKind::Integer)
            .unwrap();
        let b1 = binarize(&unit);
        assert_eq!(b1.columns(), unit.columns());
        assert_eq!(b1.weights(), unit.weights());
    }

    #[test]
    fn multicover_on_single_full_set() {
        let s = SetSystem::unweighted(5, vec![(0..5).collect()]).unwrap();
        let alpha = 2.0;
        let r = multicover_estimate(s.events(), 5, 1, &[1; 5], &EstimatorConfig::new(alpha, 1)).unwrap();
        assert!(r.estimate >= 1.0);
        // pruned <= α·b_max and opt(I_tester) <= opt = 1.
        assert!(r.estimate <= alpha + 8.0 * alpha * 2.0);
        let weighted = SetSystem::new(5, vec![(0..5).collect()], Some(vec![2])).unwrap();
        assert!(matches!(
            multicover_estimate(weighted.events(), 5, 1, &[1; 5], &EstimatorConfig::new(alpha, 1)),
            Err(EstimateError::Weighted { .. })
        ));
    }
}
