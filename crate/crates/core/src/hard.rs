// SPDX-License-Identifier: Apache-2.0

//! Generators for hard set-cover distributions.
//!
//! Every generator returns Alice's `m` sets followed by Bob's set `T` as one
//! [`SetSystem`] with `m + 1` sets, plus hidden metadata that must never be
//! handed to an algorithm under test. `log m` means `⌈log₂ m⌉` throughout.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng as _;
use thiserror::Error;

use crate::instance::SetSystem;
use crate::rng::{self, Rng};
use crate::tester::ceil_log2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HardKind {
    DApx,
    DEst,
    DExt,
    DDet,
}

impl HardKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HardKind::DApx => "dapx",
            HardKind::DEst => "dest",
            HardKind::DExt => "dext",
            HardKind::DDet => "ddet",
        }
    }
}

impl fmt::Display for HardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HardKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dapx" => Ok(HardKind::DApx),
            "dest" => Ok(HardKind::DEst),
            "dext" => Ok(HardKind::DExt),
            "ddet" => Ok(HardKind::DDet),
            other => Err(format!("unknown distribution `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Alice,
    Bob,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid parameters for {kind}: n={n}, m={m}, alpha={alpha}: {reason}")]
pub struct HardError {
    pub kind: HardKind,
    pub n: usize,
    pub m: usize,
    pub alpha: usize,
    pub reason: &'static str,
}

/// Hidden labels of a generated instance.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HardMeta {
    pub seed: u64,
    pub alpha: usize,
    pub i_star: usize,
    /// Absent for D_apx.
    pub theta: Option<u8>,
    /// The element of `E` outside `S_{i*}` (D_apx).
    pub e_star: Option<usize>,
    /// `E = [n] \ T` (D_apx).
    pub e_set: Option<Vec<usize>>,
    /// Complement of `T`, ascending.
    pub t_bar: Vec<usize>,
    /// `P_1..P_m`, each a list of blocks (partition form of D_est and D_ext).
    pub partitions: Option<Vec<Vec<Vec<usize>>>>,
    /// Side of each of the `m + 1` sets (D_ext).
    pub sides: Option<Vec<Side>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardInstance {
    /// Alice's sets `0..m`, then `T` at index `m`.
    pub system: SetSystem,
    pub kind: HardKind,
    pub meta: HardMeta,
}

impl HardInstance {
    /// Number of Alice's sets.
    pub fn m(&self) -> usize {
        self.system.m() - 1
    }

    pub fn t_index(&self) -> usize {
        self.m()
    }

    /// For D_apx: `(i*, T, S)` with `S ≠ S_{i*}` containing `e*`, if any.
    pub fn dapx_cover_witness(&self) -> Option<[usize; 3]> {
        let e = self.meta.e_star?;
        let i_star = self.meta.i_star;
        (0..self.m())
            .find(|&i| i != i_star && self.system.set(i).binary_search(&e).is_ok())
            .map(|s| [i_star, self.t_index(), s])
    }

    /// True iff `S_{i*} ∪ T = [n]`, i.e. a cover of size 2 exists by construction.
    pub fn pair_covers(&self) -> bool {
        let n = self.system.n();
        let mut seen = vec![false; n];
        for &e in self.system.set(self.meta.i_star).iter().chain(self.system.set(self.t_index())) {
            seen[e] = true;
        }
        seen.into_iter().all(|b| b)
    }
}

/// Sizes shared by the generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardParams {
    /// `n / (10α)`.
    pub set_size: usize,
    /// `⌈log₂ m⌉`.
    pub log_m: usize,
}

fn base_params(kind: HardKind, n: usize, m: usize, alpha: usize) -> Result<HardParams, HardError> {
    let err = |reason| HardError { kind, n, m, alpha, reason };
    if alpha == 0 {
        return Err(err("alpha must be at least 1"));
    }
    if m < 2 {
        return Err(err("m must be at least 2"));
    }
    if n == 0 || n % (10 * alpha) != 0 {
        return Err(err("10·alpha must divide n"));
    }
    Ok(HardParams {
        set_size: n / (10 * alpha),
        log_m: ceil_log2(m as u64) as usize,
    })
}

/// `ℓ = 2α⌈log₂ m⌉`, checked against `ℓ < n/(10α)`.
pub fn dapx_ell(n: usize, m: usize, alpha: usize) -> Result<usize, HardError> {
    let p = base_params(HardKind::DApx, n, m, alpha)?;
    let ell = 2 * alpha * p.log_m;
    if ell >= p.set_size {
        return Err(HardError {
            kind: HardKind::DApx,
            n,
            m,
            alpha,
            reason: "|E| = 2·alpha·ceil(log2 m) must be smaller than n/(10·alpha)",
        });
    }
    Ok(ell)
}

/// `(k, p, t)` of the partition form: `k = n/(5α)`, `p = α⌈log₂ m⌉`, `t = k/p`.
pub fn dest_partition_params(n: usize, m: usize, alpha: usize) -> Result<(usize, usize, usize), HardError> {
    let kind = HardKind::DEst;
    let err = |reason| HardError { kind, n, m, alpha, reason };
    let base = base_params(kind, n, m, alpha)?;
    let k = n / (5 * alpha);
    let p = alpha * base.log_m;
    if p == 0 || k % p != 0 {
        return Err(err("block size alpha·ceil(log2 m) must divide n/(5·alpha)"));
    }
    let t = k / p;
    if t < 2 || t % 2 != 0 {
        return Err(err("block count t = k/p must be even and at least 2"));
    }
    Ok((k, p, t))
}

fn check(kind: HardKind, n: usize, m: usize, alpha: usize) -> Result<(), HardError> {
    match kind {
        HardKind::DApx => dapx_ell(n, m, alpha).map(|_| ()),
        HardKind::DEst | HardKind::DExt => dest_partition_params(n, m, alpha).map(|_| ()),
        HardKind::DDet => base_params(kind, n, m, alpha).map(|_| ()),
    }
}

/// The closest `n` (ties go up) for which `kind` accepts `(n, m, α)`.
pub fn nearest_valid_params(kind: HardKind, n: usize, m: usize, alpha: usize) -> Option<(usize, usize, usize)> {
    if alpha == 0 || m < 2 {
        return None;
    }
    let limit = n.max(1) * 4 + 10_000 * alpha;
    (0..=limit).find_map(|d| {
        [n.checked_add(d), n.checked_sub(d)]
            .into_iter()
            .flatten()
            .find(|&cand| check(kind, cand, m, alpha).is_ok())
            .map(|cand| (cand, m, alpha))
    })
}

fn random_subset(rng: &mut Rng, n: usize, size: usize) -> Vec<usize> {
    let mut v = sample(rng, n, size).into_vec();
    v.sort_unstable();
    v
}

fn complement(n: usize, set: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; n];
    for &e in set {
        inside[e] = true;
    }
    (0..n).filter(|&e| !inside[e]).collect()
}

fn assemble(n: usize, mut sets: Vec<Vec<usize>>, t_bar: &[usize]) -> SetSystem {
    sets.push(complement(n, t_bar));
    SetSystem::unweighted(n, sets).expect("generated sets lie in [0, n)")
}

/// D_apx: `m` independent uniform sets of size `n/(10α)`; `T = [n] \ E` where
/// `|E| = ℓ` and exactly one element `e*` of `E` lies outside `S_{i*}`.
pub fn gen_dapx(n: usize, m: usize, alpha: usize, seed: u64) -> Result<HardInstance, HardError> {
    let ell = dapx_ell(n, m, alpha)?;
    let s = n / (10 * alpha);
    let mut rng = rng::stream(seed, 0);
    let sets: Vec<Vec<usize>> = (0..m).map(|_| random_subset(&mut rng, n, s)).collect();
    let i_star = rng.gen_range(0..m);
    let outside = complement(n, &sets[i_star]);
    let e_star = *outside.choose(&mut rng).expect("set is a proper subset");
    let inner = &sets[i_star];
    let mut e_set: Vec<usize> = sample(&mut rng, s, ell - 1).into_iter().map(|k| inner[k]).collect();
    e_set.push(e_star);
    e_set.sort_unstable();
    let system = assemble(n, sets, &e_set);
    Ok(HardInstance {
        system,
        kind: HardKind::DApx,
        meta: HardMeta {
            seed,
            alpha,
            i_star,
            e_star: Some(e_star),
            t_bar: e_set.clone(),
            e_set: Some(e_set),
            ..HardMeta::default()
        },
    })
}

/// D_est, partition form: each `S_i` is `t/2` random blocks of a random
/// `(k, t)`-partition `P_i`; `T̄` is a random block of `P_{i*}`. `θ = 0` iff
/// that block is one of the blocks in `S_{i*}`.
pub fn gen_dest(n: usize, m: usize, alpha: usize, seed: u64) -> Result<HardInstance, HardError> {
    let (k, _p, t) = dest_partition_params(n, m, alpha)?;
    let mut rng = rng::stream(seed, 0);
    let mut partitions = Vec::with_capacity(m);
    let mut chosen_blocks = Vec::with_capacity(m);
    let mut sets = Vec::with_capacity(m);
    for _ in 0..m {
        let mut elems = sample(&mut rng, n, k).into_vec();
        elems.shuffle(&mut rng);
        let blocks: Vec<Vec<usize>> = elems
            .chunks(k / t)
            .map(|c| {
                let mut b = c.to_vec();
                b.sort_unstable();
                b
            })
            .collect();
        let picked = sample(&mut rng, t, t / 2).into_vec();
        let mut set: Vec<usize> = picked.iter().flat_map(|&j| blocks[j].iter().copied()).collect();
        set.sort_unstable();
        sets.push(set);
        let mut picked = picked;
        picked.sort_unstable();
        chosen_blocks.push(picked);
        partitions.push(blocks);
    }
    let i_star = rng.gen_range(0..m);
    let block = rng.gen_range(0..t);
    let theta = u8::from(chosen_blocks[i_star].binary_search(&block).is_err());
    let t_bar = partitions[i_star][block].clone();
    let system = assemble(n, sets, &t_bar);
    Ok(HardInstance {
        system,
        kind: HardKind::DEst,
        meta: HardMeta {
            seed,
            alpha,
            i_star,
            theta: Some(theta),
            t_bar,
            partitions: Some(partitions),
            ..HardMeta::default()
        },
    })
}

/// D_est, direct form: `θ` and `i*` are fair draws; `T̄` has size
/// `α⌈log₂ m⌉` and is drawn from `S_{i*}` when `θ = 0`, else from its complement.
pub fn gen_dest_direct(n: usize, m: usize, alpha: usize, seed: u64) -> Result<HardInstance, HardError> {
    let base = base_params(HardKind::DEst, n, m, alpha)?;
    let p = alpha * base.log_m;
    if p >= base.set_size {
        return Err(HardError {
            kind: HardKind::DEst,
            n,
            m,
            alpha,
            reason: "alpha·ceil(log2 m) must be smaller than n/(10·alpha)",
        });
    }
    let mut rng = rng::stream(seed, 0);
    let sets: Vec<Vec<usize>> = (0..m).map(|_| random_subset(&mut rng, n, base.set_size)).collect();
    let theta: u8 = rng.gen_range(0..=1);
    let i_star = rng.gen_range(0..m);
    let pool = if theta == 0 {
        sets[i_star].clone()
    } else {
        complement(n, &sets[i_star])
    };
    let mut t_bar: Vec<usize> = sample(&mut rng, pool.len(), p).into_iter().map(|j| pool[j]).collect();
    t_bar.sort_unstable();
    let system = assemble(n, sets, &t_bar);
    Ok(HardInstance {
        system,
        kind: HardKind::DEst,
        meta: HardMeta {
            seed,
            alpha,
            i_star,
            theta: Some(theta),
            t_bar,
            ..HardMeta::default()
        },
    })
}

/// D_ext: a D_est instance (same seed, same sets) whose `m + 1` sets are each
/// given to Alice or Bob by a fair coin.
pub fn gen_dext(n: usize, m: usize, alpha: usize, seed: u64) -> Result<HardInstance, HardError> {
    let mut inst = gen_dest(n, m, alpha, seed)?;
    let mut rng = rng::stream(seed, 1);
    let sides = (0..=m)
        .map(|_| if rng.gen_bool(0.5) { Side::Alice } else { Side::Bob })
        .collect();
    inst.kind = HardKind::DExt;
    inst.meta.sides = Some(sides);
    Ok(inst)
}

/// Alice's sets in a random order, then Bob's sets in a random order.
pub fn side_ordering(sides: &[Side], seed: u64) -> Vec<usize> {
    let mut rng = rng::stream(seed, 0);
    let mut alice: Vec<usize> = (0..sides.len()).filter(|&i| sides[i] == Side::Alice).collect();
    let mut bob: Vec<usize> = (0..sides.len()).filter(|&i| sides[i] == Side::Bob).collect();
    alice.shuffle(&mut rng);
    bob.shuffle(&mut rng);
    alice.extend(bob);
    alice
}

/// D_det: a uniform `m`-subset of distinct sets of size `n/(10α)`; `T̄` is a
/// random member of it when `θ = 0` and a random non-member when `θ = 1`.
pub fn gen_ddet(n: usize, m: usize, alpha: usize, seed: u64) -> Result<HardInstance, HardError> {
    let base = base_params(HardKind::DDet, n, m, alpha)?;
    let s = base.set_size;
    // |F| = C(n, s) must exceed m for the θ = 1 draw to exist.
    let family_exceeds_m = (0..s).try_fold(1u128, |acc, i| {
        let next = acc * (n - i) as u128 / (i + 1) as u128;
        if next > m as u128 {
            None
        } else {
            Some(next)
        }
    });
    if family_exceeds_m.is_some() {
        return Err(HardError {
            kind: HardKind::DDet,
            n,
            m,
            alpha,
            reason: "m must be smaller than the number of sets of size n/(10·alpha)",
        });
    }
    let mut rng = rng::stream(seed, 0);
    let mut seen = HashSet::with_capacity(m);
    let mut sets = Vec::with_capacity(m);
    while sets.len() < m {
        let set = random_subset(&mut rng, n, s);
        if seen.insert(set.clone()) {
            sets.push(set);
        }
    }
    let theta: u8 = rng.gen_range(0..=1);
    let (i_star, t_bar) = if theta == 0 {
        let i = rng.gen_range(0..m);
        (i, sets[i].clone())
    } else {
        let fresh = loop {
            let cand = random_subset(&mut rng, n, s);
            if !seen.contains(&cand) {
                break cand;
            }
        };
        (rng.gen_range(0..m), fresh)
    };
    let system = assemble(n, sets, &t_bar);
    Ok(HardInstance {
        system,
        kind: HardKind::DDet,
        meta: HardMeta {
            seed,
            alpha,
            i_star,
            theta: Some(theta),
            t_bar,
            ..HardMeta::default()
        },
    })
}

/// Dispatches on `kind`.
pub fn generate(kind: HardKind, n: usize, m: usize, alpha: usize, seed: u64) -> Result<HardInstance, HardError> {
    match kind {
        HardKind::DApx => gen_dapx(n, m, alpha, seed),
        HardKind::DEst => gen_dest(n, m, alpha, seed),
        HardKind::DExt => gen_dext(n, m, alpha, seed),
        HardKind::DDet => gen_ddet(n, m, alpha, seed),
    }
}
