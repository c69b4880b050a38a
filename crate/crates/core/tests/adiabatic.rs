use gsqc::adiabatic::{
    default_steps, evolve, evolve_default, evolve_sweep, jansen_bound, toy_circuit, Block, NORM_BUDGET,
};
use gsqc::Error;
use proptest::prelude::*;

#[test]
fn toy_blocks() {
    assert_eq!(Block::new(&toy_circuit(1).unwrap()).unwrap().dim(), 3);
    assert_eq!(Block::new(&toy_circuit(3).unwrap()).unwrap().dim(), 66);
    assert!(toy_circuit(2).is_err());
}

#[test]
fn zero_time_leaves_state_unchanged() {
    let c = toy_circuit(1).unwrap();
    let r = evolve(&c, 0.0, 10).unwrap();
    let b = Block::new(&c).unwrap();
    let init = b.initial_state();
    let diff: f64 = r.final_state.amplitudes().iter().zip(&init).map(|(a, b)| (a - b).norm()).sum();
    assert!(diff < 1e-15);
    assert!(r.norm_drift < 1e-15);
    // sudden limit: overlap of the rest state with the λ = 1 history state
    assert!(r.fidelity > 0.0 && r.fidelity < 1.0);
}

#[test]
fn bad_arguments() {
    let c = toy_circuit(1).unwrap();
    assert!(matches!(evolve(&c, -1.0, 10), Err(Error::Domain(_))));
    assert!(matches!(evolve(&c, f64::NAN, 10), Err(Error::Domain(_))));
    assert!(matches!(evolve(&c, 1.0, 0), Err(Error::Domain(_))));
    assert!(jansen_bound(1, 0.0, 1.0).is_err());
    assert!(jansen_bound(0, 1.0, 1.0).is_err());
}

#[test]
fn default_step_count() {
    // ⌈50 · T · ‖H‖⌉ with ‖H‖ ≤ 4 on the one-qubit toy
    let c = toy_circuit(1).unwrap();
    assert_eq!(default_steps(&c, 10.0).unwrap(), 2000);
}

#[test]
fn step_doubling_converges() {
    let c = toy_circuit(1).unwrap();
    let a = evolve(&c, 10.0, 4000).unwrap();
    let b = evolve(&c, 10.0, 8000).unwrap();
    assert!((a.infidelity() - b.infidelity()).abs() < 1e-6);
    let overlap = gsqc::sparse::dot(a.final_state.amplitudes(), b.final_state.amplitudes()).norm();
    assert!(1.0 - overlap < 1e-6);
}

#[test]
fn infidelity_decreases_with_time() {
    let c = toy_circuit(1).unwrap();
    let runs = evolve_sweep(&c, &[10.0, 20.0, 40.0, 80.0], None).unwrap();
    for w in runs.windows(2) {
        assert!(w[1].infidelity() <= 1.05 * w[0].infidelity() + 1e-12);
    }
    assert!(runs.iter().all(|r| r.norm_drift <= NORM_BUDGET));
    // frozen values for the three-state block
    assert!((runs[0].infidelity() - 0.2517).abs() < 5e-4);
    assert!((runs[3].infidelity() - 9.65e-6).abs() < 5e-8);
}

#[test]
fn sweep_matches_single_runs() {
    let c = toy_circuit(1).unwrap();
    let s = evolve_sweep(&c, &[5.0, 15.0], Some(1000)).unwrap();
    let one = evolve(&c, 15.0, 1000).unwrap();
    assert_eq!(s[1].fidelity, one.fidelity);
    assert_eq!(s[1].steps, 1000);
    let d = evolve_default(&c, 5.0).unwrap();
    assert_eq!(d.steps, default_steps(&c, 5.0).unwrap());
}

#[test]
fn checkpoints_cover_the_run() {
    let c = toy_circuit(1).unwrap();
    let r = evolve(&c, 10.0, 500).unwrap();
    let cp = &r.checkpoints;
    assert!(cp.len() >= 2);
    assert_eq!(cp[0].t, 0.0);
    assert!((cp.last().unwrap().t - 10.0).abs() < 1e-12);
    assert!(cp.windows(2).all(|w| w[0].t < w[1].t && w[0].lambda <= w[1].lambda));
    assert!(cp.iter().all(|p| (p.norm - 1.0).abs() < 1e-12 && p.overlap <= 1.0 + 1e-12));
}

#[test]
fn jansen_plug_in() {
    // M = 1, g = 1, T = 1095: full = (24 + 63 + 1008)/1095 = 1 = cap
    let j = jansen_bound(1, 1.0, 1095.0).unwrap();
    assert!((j.cap - 1.0).abs() < 1e-15);
    assert!((j.full - 1.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn full_below_cap_for_small_gaps(m in 1usize..8, g in 1e-4f64..=1.0, t in 1.0f64..1e8) {
        let j = jansen_bound(m, g, t).unwrap();
        prop_assert!(j.full <= j.cap * (1.0 + 1e-12));
        prop_assert!(j.full > 0.0);
    }
}
