use gsqc::circuit::{gates, last_core_step, layout_depth, pairs_1d, pairs_all_to_all, unitarity_defect, Rule};
use gsqc::{
    build_1d_circuit, build_all_to_all_circuit, build_random_circuit, validate_circuit, Circuit, Error, Gate, Layout,
};
use proptest::prelude::*;
use std::collections::BTreeSet;

#[test]
fn depth_formula() {
    // N = 2(2n + M) + 3
    assert_eq!(layout_depth(3, 2), 17);
    assert_eq!(layout_depth(3, 4), 25);
    assert_eq!(layout_depth(5, 4), 29);
    for (m, n) in [(3, 2), (3, 6), (5, 4), (7, 6)] {
        let c = build_1d_circuit(m, n, &[]).unwrap();
        assert_eq!(c.depth(), 2 * (2 * n + m) + 3);
        let a = build_all_to_all_circuit(m, n, &[]).unwrap();
        assert_eq!(a.depth(), c.depth());
    }
}

#[test]
fn generated_circuits_validate() {
    for (m, n) in [(3, 2), (3, 4), (5, 4), (5, 6)] {
        for layout in [Layout::OneD, Layout::AllToAll] {
            let c = build_random_circuit(m, n, layout, 7).unwrap();
            let r = validate_circuit(&c);
            assert!(r.is_empty(), "{layout} M={m} n={n}: {:?}", r.violations);
            assert!(!c.is_all_identity());
        }
    }
}

#[test]
fn identity_region_is_respected() {
    let c = build_1d_circuit(3, 2, &[]).unwrap();
    let last = last_core_step(3, 2);
    assert!(last + (c.depth() - 3) / 2 + c.m() <= c.depth());
    let r = build_random_circuit(3, 2, Layout::OneD, 1).unwrap();
    for g in r.gates() {
        if !g.is_identity() {
            assert!(g.step() >= 2 && g.step() <= last, "gate at {}", g.step());
        }
    }
}

#[test]
fn windows_nest_and_end_at_depth() {
    let c = build_1d_circuit(3, 2, &[]).unwrap();
    let w: Vec<_> = (1..=3).map(|q| c.window(q)).collect();
    for x in &w {
        assert!(x.o < x.f && x.f <= c.depth());
        assert_eq!(x.rest(), x.o - 1);
        assert_eq!(x.sites(), x.f - x.o + 2);
    }
    assert!(w.iter().any(|x| x.f == c.depth()));
}

#[test]
fn nearest_neighbour_pairs_are_adjacent() {
    for m in [3, 5, 7] {
        for step in (4..20).step_by(2) {
            for (a, b) in pairs_1d(m, step) {
                assert_eq!((a as isize - b as isize).abs(), 1);
            }
        }
    }
}

#[test]
fn round_robin_covers_pairs_except_one_and_m() {
    for m in [5usize, 7] {
        let mut seen = BTreeSet::new();
        for step in (4..4 + 4 * m).step_by(2) {
            for (a, b) in pairs_all_to_all(m, step) {
                seen.insert((a.min(b), a.max(b)));
            }
        }
        for a in 1..=m {
            for b in a + 1..=m {
                if (a, b) != (1, m) {
                    assert!(seen.contains(&(a, b)), "M={m}: pair ({a},{b}) missing");
                }
            }
        }
    }
}

#[test]
fn rejects_non_unitary_gate() {
    let mut u = gates::hadamard();
    u[(0, 0)] *= 1.1;
    assert!(matches!(Gate::new(2, &[1], u), Err(Error::NonUnitary { .. })));
}

#[test]
fn rejects_gate_outside_core() {
    let g = Gate::new(last_core_step(3, 2) + 2, &[1], gates::hadamard()).unwrap();
    assert!(build_1d_circuit(3, 2, &[g]).is_err());
}

#[test]
fn custom_circuit_missing_first_identity_is_flagged() {
    let gates = vec![Gate::new(1, &[1], gates::pauli_x()).unwrap(), Gate::identity(2, &[1])];
    match Circuit::new(1, 0, Layout::Custom, gates) {
        Err(_) => {}
        Ok(c) => assert!(validate_circuit(&c).has(Rule::FirstGateIdentity)),
    }
}

#[test]
fn layout_parses() {
    assert_eq!("1d".parse::<Layout>().unwrap(), Layout::OneD);
    assert_eq!("all-to-all".parse::<Layout>().unwrap(), Layout::AllToAll);
    assert!("ring".parse::<Layout>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn json_roundtrip(seed in any::<u64>(), big in any::<bool>(), a2a in any::<bool>()) {
        let (m, n) = if big { (5, 4) } else { (3, 2) };
        let layout = if a2a { Layout::AllToAll } else { Layout::OneD };
        let c = build_random_circuit(m, n, layout, seed).unwrap();
        let back = Circuit::from_json(&c.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.to_json().unwrap(), c.to_json().unwrap());
        prop_assert_eq!(back.depth(), c.depth());
    }

    #[test]
    fn random_gates_are_unitary(seed in any::<u64>()) {
        let c = build_random_circuit(3, 2, Layout::OneD, seed).unwrap();
        for g in c.gates() {
            prop_assert!(unitarity_defect(g.matrix()) < 1e-12);
        }
    }
}
