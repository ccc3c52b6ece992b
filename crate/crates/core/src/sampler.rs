// SPDX-License-Identifier: Apache-2.0

//! Constraint sampling: keep each demand with probability `p`, zero it
//! otherwise, and measure how often the sampled optimum plus `Cost(I)` stays
//! above `opt(I) / 8α`.

use rand::Rng as _;
use rayon::prelude::*;
use thiserror::Error;

use crate::cost::{cost_of_instance, Cost};
use crate::instance::CoveringInstance;
use crate::oracle::{exact_opt, OracleError, OracleLimits};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("sampling probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("sampling rate 4 ln n / alpha = {0} exceeds 1")]
    RateAboveOne(f64),
    #[error("alpha must be positive")]
    ZeroAlpha,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// `4 ln n / α` with `n < 2` treated as 2, not clamped.
pub fn lemma_rate(n: usize, alpha: f64) -> f64 {
    4.0 * (n.max(2) as f64).ln() / alpha
}

/// Result of one constraint-sampling draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSample {
    pub instance: CoveringInstance,
    /// Rows whose demand was kept, ascending.
    pub kept_rows: Vec<usize>,
}

/// Keeps each row's demand independently with probability `p`.
pub fn sample_constraints(inst: &CoveringInstance, p: f64, seed: u64) -> Result<ConstraintSample, SamplerError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SamplerError::BadProbability(p));
    }
    let mut rng = rng::stream(seed, 0);
    let mut kept_rows = Vec::new();
    let b: Vec<u64> = inst
        .demands()
        .iter()
        .enumerate()
        .map(|(j, &bj)| {
            if rng.gen_bool(p) {
                kept_rows.push(j);
                bj
            } else {
                0
            }
        })
        .collect();
    let instance = inst.with_demands(b).expect("same dimensions");
    Ok(ConstraintSample { instance, kept_rows })
}

/// One trial of the sampling lemma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingOutcome {
    pub sampled_rows: Vec<usize>,
    pub opt_sampled: u64,
    pub cost_full: u64,
    pub opt_full: u64,
    pub event_held: bool,
}

/// `opt_sampled + cost_full >= opt_full / (8α)`, evaluated exactly.
pub fn event_holds(opt_sampled: u64, cost_full: u64, opt_full: u64, alpha: f64) -> bool {
    (opt_sampled as f64 + cost_full as f64) * 8.0 * alpha >= opt_full as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingReport {
    pub alpha: f64,
    pub rate: f64,
    pub outcomes: Vec<SamplingOutcome>,
}

impl SamplingReport {
    /// Fraction of trials where the event held; 1.0 when there are none.
    pub fn frequency(&self) -> f64 {
        if self.outcomes.is_empty() {
            return 1.0;
        }
        self.outcomes.iter().filter(|o| o.event_held).count() as f64 / self.outcomes.len() as f64
    }
}

/// Runs `trials` independent samplings at rate `4 ln n / α` and evaluates
/// the event on each with the exact oracle.
///
/// Trial `t` uses the seed `derive(seed, t)`, so results are identical
/// regardless of how trials are scheduled.
pub fn verify_sampling_lemma(
    inst: &CoveringInstance,
    alpha: f64,
    trials: usize,
    seed: u64,
    limits: OracleLimits,
) -> Result<SamplingReport, SamplerError> {
    if alpha <= 0.0 {
        return Err(SamplerError::ZeroAlpha);
    }
    let rate = lemma_rate(inst.n(), alpha);
    if rate > 1.0 {
        return Err(SamplerError::RateAboveOne(rate));
    }
    if alpha < 32.0 * (inst.n().max(2) as f64).ln() {
        log::warn!(
            "alpha = {alpha} is below 32 ln n = {:.2}; the 3/4 guarantee is not promised",
            32.0 * (inst.n().max(2) as f64).ln()
        );
    }
    let opt_full = exact_opt(inst, limits)?.value;
    let cost_full = match cost_of_instance(inst) {
        c if c == Cost::INFINITE => return Err(SamplerError::Oracle(OracleError::Infeasible)),
        c => c.value().expect("finite"),
    };
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sample = sample_constraints(inst, rate, rng::derive(seed, t as u64))?;
            let opt_sampled = exact_opt(&sample.instance, limits)?.value;
            Ok(SamplingOutcome {
                sampled_rows: sample.kept_rows,
                opt_sampled,
                cost_full,
                opt_full,
                event_held: event_holds(opt_sampled, cost_full, opt_full, alpha),
            })
        })
        .collect::<Result<Vec<_>, SamplerError>>()?;
    Ok(SamplingReport { alpha, rate, outcomes })
}
