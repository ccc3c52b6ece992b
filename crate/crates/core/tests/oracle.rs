// SPDX-License-Identifier: Apache-2.0

mod common;

use covstream::cost::{cost_of_constraint, cost_of_instance, streaming_cost, Cost};
use covstream::instance::VariableKind;
use covstream::oracle::{exact_opt, exact_opt_within, OracleError, OracleLimits};
use proptest::prelude::*;

fn as_option(c: Cost) -> Option<u64> {
    c.value()
}

#[test]
fn exact_matches_enumeration() {
    let mut r = common::rng(1);
    for t in 0..150 {
        let kind = if t % 2 == 0 { VariableKind::Binary } else { VariableKind::Integer };
        let inst = common::small_instance(&mut r, kind);
        let got = match exact_opt(&inst, OracleLimits::default()) {
            Ok(s) => Some(s.value),
            Err(OracleError::Infeasible) => None,
            Err(e) => panic!("{e}"),
        };
        assert_eq!(got, common::brute_opt(&inst), "instance {t}: {inst:?}");
    }
}

#[test]
fn cutoff_agrees_with_full_solve() {
    let mut r = common::rng(2);
    for _ in 0..100 {
        let (inst, opt) = common::feasible_small(&mut r, VariableKind::Binary);
        let lim = OracleLimits::default();
        assert!(exact_opt_within(&inst, opt, lim).unwrap().is_some());
        if opt > 0 {
            assert!(exact_opt_within(&inst, opt - 1, lim).unwrap().is_none());
        }
    }
}

#[test]
fn row_costs_match_enumeration() {
    let mut r = common::rng(3);
    for t in 0..150 {
        let kind = if t % 2 == 0 { VariableKind::Binary } else { VariableKind::Integer };
        let inst = common::small_instance(&mut r, kind);
        for j in 0..inst.n() {
            assert_eq!(as_option(cost_of_constraint(&inst, j)), common::brute_row_cost(&inst, j));
        }
        assert_eq!(as_option(cost_of_instance(&inst)), common::brute_cost(&inst));
    }
}

#[test]
fn cost_is_a_lower_bound() {
    let mut r = common::rng(4);
    for _ in 0..100 {
        let (inst, opt) = common::feasible_small(&mut r, VariableKind::Binary);
        assert!(cost_of_instance(&inst).value().unwrap() <= opt);
    }
}

proptest! {
    #[test]
    fn streaming_cost_ignores_order(seed in any::<u64>(), perm_seed in any::<u64>(), int in prop::bool::ANY) {
        let mut r = common::rng(seed);
        let kind = if int { VariableKind::Integer } else { VariableKind::Binary };
        let inst = common::small_instance(&mut r, kind);
        let events = inst.events();
        let order = common::permutation(&mut common::rng(perm_seed), events.len());
        let shuffled: Vec<_> = order.iter().map(|&i| events[i].clone()).collect();
        prop_assert_eq!(
            streaming_cost(&events, inst.demands(), kind),
            streaming_cost(&shuffled, inst.demands(), kind)
        );
        prop_assert_eq!(streaming_cost(&events, inst.demands(), kind), cost_of_instance(&inst));
    }
}
