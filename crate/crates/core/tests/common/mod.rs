// SPDX-License-Identifier: Apache-2.0

//! Brute-force references and random instance builders shared by the
//! integration tests. Nothing here calls the library's solver or DP.

#![allow(dead_code)]

use covstream::instance::{CoveringInstance, SetSystem, SparseColumn, VariableKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimum `c·x` with `Ax >= b`, or `None` if infeasible.
///
/// Binary: every subset of columns. Integer: a DP over coverage vectors
/// capped at `b`, filled in increasing mixed-radix order.
pub fn brute_opt(inst: &CoveringInstance) -> Option<u64> {
    match inst.kind() {
        VariableKind::Binary => brute_binary(inst),
        VariableKind::Integer => brute_integer(inst),
    }
}

fn dense(inst: &CoveringInstance) -> Vec<Vec<u64>> {
    inst.columns()
        .iter()
        .map(|c| (0..inst.n()).map(|j| c.get(j)).collect())
        .collect()
}

fn brute_binary(inst: &CoveringInstance) -> Option<u64> {
    let m = inst.m();
    assert!(m <= 20, "too many columns to enumerate");
    let a = dense(inst);
    let b = inst.demands();
    let c = inst.weights();
    let mut best: Option<u64> = None;
    for mask in 0u32..(1 << m) {
        let mut cover = vec![0u64; inst.n()];
        let mut cost = 0;
        for i in 0..m {
            if mask >> i & 1 == 1 {
                cost += c[i];
                for j in 0..inst.n() {
                    cover[j] += a[i][j];
                }
            }
        }
        if cover.iter().zip(b).all(|(x, y)| x >= y) && best.map_or(true, |v| cost < v) {
            best = Some(cost);
        }
    }
    best
}

fn brute_integer(inst: &CoveringInstance) -> Option<u64> {
    let n = inst.n();
    let b = inst.demands();
    let a = dense(inst);
    let radix: Vec<usize> = b.iter().map(|&v| v as usize + 1).collect();
    let states: usize = radix.iter().product();
    assert!(states <= 5_000_000, "state space too large");
    let decode = |mut s: usize| {
        let mut v = vec![0u64; n];
        for j in 0..n {
            v[j] = (s % radix[j]) as u64;
            s /= radix[j];
        }
        v
    };
    let encode = |v: &[u64]| {
        let mut s = 0usize;
        for j in (0..n).rev() {
            s = s * radix[j] + v[j] as usize;
        }
        s
    };
    let mut dp = vec![u64::MAX; states];
    dp[0] = 0;
    for s in 0..states {
        if dp[s] == u64::MAX {
            continue;
        }
        let v = decode(s);
        for (i, col) in a.iter().enumerate() {
            let next: Vec<u64> = (0..n).map(|j| (v[j] + col[j]).min(b[j])).collect();
            let t = encode(&next);
            if t != s {
                dp[t] = dp[t].min(dp[s] + inst.weights()[i]);
            }
        }
    }
    let full = dp[states - 1];
    (full != u64::MAX).then_some(full)
}

/// Minimum weight to satisfy row `j` alone, by enumeration (binary) or by
/// trying every count vector bounded by `b_j` (integer).
pub fn brute_row_cost(inst: &CoveringInstance, j: usize) -> Option<u64> {
    let bj = inst.demands()[j];
    let items: Vec<(u64, u64)> = inst
        .columns()
        .iter()
        .zip(inst.weights())
        .map(|(c, &w)| (c.get(j), w))
        .filter(|&(a, _)| a > 0)
        .collect();
    if bj == 0 {
        return Some(0);
    }
    let max_copies = match inst.kind() {
        VariableKind::Binary => 1,
        VariableKind::Integer => bj,
    };
    let mut best = None;
    let mut counts = vec![0u64; items.len()];
    loop {
        let cover: u64 = counts.iter().zip(&items).map(|(k, (a, _))| k * a).sum();
        let cost: u64 = counts.iter().zip(&items).map(|(k, (_, w))| k * w).sum();
        if cover >= bj && best.map_or(true, |v| cost < v) {
            best = Some(cost);
        }
        let mut i = 0;
        loop {
            if i == counts.len() {
                return best;
            }
            if counts[i] < max_copies {
                counts[i] += 1;
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

pub fn brute_cost(inst: &CoveringInstance) -> Option<u64> {
    (0..inst.n()).map(|j| brute_row_cost(inst, j)).try_fold(0, |acc, c| c.map(|v| acc.max(v)))
}

/// A random covering ILP. Each column touches each row with probability
/// `density`, coefficient uniform in `1..=a_max`.
pub fn random_ilp(
    r: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    a_max: u64,
    b_max: u64,
    c_max: u64,
    density: f64,
    kind: VariableKind,
) -> CoveringInstance {
    let columns = (0..m)
        .map(|_| {
            let rows: Vec<usize> = (0..n).filter(|_| r.gen_bool(density)).collect();
            SparseColumn::new(rows.into_iter().map(|j| (j, r.gen_range(1..=a_max))).collect())
        })
        .collect();
    let b = (0..n).map(|_| r.gen_range(0..=b_max)).collect();
    let c = (0..m).map(|_| r.gen_range(1..=c_max)).collect();
    CoveringInstance::new(n, columns, b, c, kind).unwrap()
}

/// A random instance in the desk-scale box used across the suite.
pub fn small_instance(r: &mut ChaCha8Rng, kind: VariableKind) -> CoveringInstance {
    let n = r.gen_range(1..=10);
    let m = r.gen_range(1..=12);
    let b_max = r.gen_range(1..=3);
    let density = r.gen_range(0.15..0.6);
    random_ilp(r, n, m, 3, b_max, 7, density, kind)
}

/// Like [`small_instance`] but retried until feasible.
pub fn feasible_small(r: &mut ChaCha8Rng, kind: VariableKind) -> (CoveringInstance, u64) {
    loop {
        let inst = small_instance(r, kind);
        if let Some(opt) = brute_opt(&inst) {
            return (inst, opt);
        }
    }
}

/// A random unweighted set system in which every element is covered.
pub fn feasible_sets(r: &mut ChaCha8Rng, n: usize, m: usize, density: f64) -> SetSystem {
    loop {
        let sets: Vec<Vec<usize>> = (0..m).map(|_| (0..n).filter(|_| r.gen_bool(density)).collect()).collect();
        let s = SetSystem::unweighted(n, sets).unwrap();
        if s.covers_universe() {
            return s;
        }
    }
}

/// Unweighted set-cover optimum by subset enumeration.
pub fn brute_set_cover(s: &SetSystem) -> Option<u64> {
    brute_binary(&s.to_ilp())
}

/// Uniformly random permutation of `0..k` (Fisher–Yates written out).
pub fn permutation(r: &mut ChaCha8Rng, k: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..k).collect();
    for i in (1..k).rev() {
        let j = r.gen_range(0..=i);
        p.swap(i, j);
    }
    p
}
