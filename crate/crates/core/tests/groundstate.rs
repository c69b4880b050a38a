use gsqc::adiabatic::{output_probability, qubit_m_tail_probability};
use gsqc::groundstate::{history_ground_state_with, SweepOrder};
use gsqc::hamiltonian::smoothstep;
use gsqc::{
    assemble, build_1d_circuit, build_all_to_all_circuit, build_random_circuit, enumerate_basis, history_ground_state,
    penalty_free_basis, Convention, EnergyScale, Layout,
};
use proptest::prelude::*;

fn residual(c: &gsqc::Circuit, lambda: f64) -> f64 {
    let b = enumerate_basis(c).unwrap();
    let psi = history_ground_state(c, lambda, &b).unwrap();
    assert!((psi.norm() - 1.0).abs() < 1e-12);
    let h = assemble(c, lambda, &b, EnergyScale::default()).unwrap();
    gsqc::sparse::norm(&h.apply(psi.amplitudes()))
}

#[test]
fn zero_energy_on_generated_layouts() {
    for c in [build_1d_circuit(3, 2, &[]).unwrap(), build_all_to_all_circuit(3, 2, &[]).unwrap()] {
        for k in 0..=10 {
            let l = k as f64 / 10.0;
            let r = residual(&c, l);
            assert!(r <= 1e-10, "{} λ={l}: residual {r}", c.layout());
        }
    }
}

#[test]
fn rest_occupation_closed_form() {
    // 1/(1 + 3λ_A²) for A < M, 1/(1 + (N − 4)λ_M²) for the last qubit
    let c = build_1d_circuit(3, 2, &[]).unwrap();
    let pf = penalty_free_basis(&c, None, &[]);
    let n = c.depth() as f64;
    for (lambda, a, la) in
        [(0.1, 1, smoothstep(0.3)), (0.5, 2, 0.5), (0.6, 2, smoothstep(0.8)), (0.9, 3, smoothstep(0.7))]
    {
        let psi = history_ground_state(&c, lambda, &pf).unwrap();
        let occ = psi.occupation(a, c.window(a).rest(), Some(0)).unwrap();
        let expected = if a < 3 { 1.0 / (1.0 + 3.0 * la * la) } else { 1.0 / (1.0 + (n - 4.0) * la * la) };
        assert!((occ - expected).abs() < 1e-8, "λ={lambda}: {occ} vs {expected}");
        assert!(occ >= 1.0 / n);
    }
    // at λ = 1 the last qubit's rest site carries 1/(N − 3)
    let psi = history_ground_state(&c, 1.0, &pf).unwrap();
    let occ = psi.occupation(3, c.window(3).rest(), Some(0)).unwrap();
    assert!((occ - 1.0 / 14.0).abs() < 1e-12);
}

#[test]
fn lambda_zero_is_all_rest() {
    let c = build_random_circuit(3, 2, Layout::OneD, 5).unwrap();
    let pf = penalty_free_basis(&c, None, &[]);
    let psi = history_ground_state(&c, 0.0, &pf).unwrap();
    for a in 1..=3 {
        assert!((psi.occupation(a, c.window(a).rest(), Some(0)).unwrap() - 1.0).abs() < 1e-14);
    }
    assert_eq!(output_probability(&psi, &c), 0.0);
}

#[test]
fn output_region_weights() {
    let c = build_1d_circuit(3, 2, &[]).unwrap();
    let pf = penalty_free_basis(&c, Some(0), &[]);
    let psi = history_ground_state(&c, 1.0, &pf).unwrap();
    assert!((output_probability(&psi, &c) - 0.5).abs() < 1e-12);
    // (N − 1)/(2(N − 3)) − (M − 1)/(N − 3) = 6/14
    assert!((qubit_m_tail_probability(&psi, &c) - 6.0 / 14.0).abs() < 1e-12);

    let c = build_1d_circuit(3, 4, &[]).unwrap();
    let pf = penalty_free_basis(&c, Some(0), &[]);
    let psi = history_ground_state(&c, 1.0, &pf).unwrap();
    assert!((output_probability(&psi, &c) - 0.5).abs() < 1e-12);
    assert!((qubit_m_tail_probability(&psi, &c) - 10.0 / 22.0).abs() < 1e-12);
}

#[test]
fn output_weight_is_gate_independent() {
    let id = build_1d_circuit(3, 2, &[]).unwrap();
    let pf0 = penalty_free_basis(&id, Some(0), &[]);
    let p0 = output_probability(&history_ground_state(&id, 1.0, &pf0).unwrap(), &id);
    let c = build_random_circuit(3, 2, Layout::AllToAll, 11).unwrap();
    let pf = penalty_free_basis(&c, None, &[]);
    let psi = history_ground_state(&c, 1.0, &pf).unwrap();
    assert!((output_probability(&psi, &c) - p0).abs() < 1e-12);
    assert!(output_probability(&psi, &c) >= 1.0 / 3.0);
}

#[test]
fn sweep_order_does_not_matter() {
    let c = build_random_circuit(3, 2, Layout::OneD, 2).unwrap();
    let b = penalty_free_basis(&c, None, &[]);
    for l in [0.2, 0.55, 1.0] {
        let a = history_ground_state_with(&c, l, &b, Convention::Shifted, SweepOrder::Ascending).unwrap();
        let d = history_ground_state_with(&c, l, &b, Convention::Shifted, SweepOrder::Descending).unwrap();
        assert!((a.fidelity(&d).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn restriction_to_subbasis_preserves_state() {
    let c = build_random_circuit(3, 2, Layout::OneD, 4).unwrap();
    let full = enumerate_basis(&c).unwrap();
    let pf = penalty_free_basis(&c, None, &[]);
    let a = history_ground_state(&c, 0.8, &full).unwrap();
    let b = history_ground_state(&c, 0.8, &pf).unwrap();
    let lifted = b.on_basis(&full).unwrap();
    assert!((a.fidelity(&lifted).unwrap() - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_gates_keep_zero_energy(seed in any::<u64>(), lambda in 0.0f64..=1.0, a2a in any::<bool>()) {
        let layout = if a2a { Layout::AllToAll } else { Layout::OneD };
        let c = build_random_circuit(3, 2, layout, seed).unwrap();
        prop_assert!(residual(&c, lambda) <= 1e-10);
    }
}
