//! Time-dependent evolution under H(t/T), the adiabatic error bound, and the
//! output-measurement probability.
//!
//! Evolution starts in the all-rest state (the ground state of H(0)), which only
//! couples to the block of the Hamiltonian that contains it; the integration is
//! carried out on that block. Each step is a Crank–Nicolson (implicit midpoint)
//! update, a Cayley transform of H at the step midpoint, so it is unitary up to
//! the linear-solver tolerance.

use crate::basis::{enumerate_basis, Basis, Selection};
use crate::circuit::{gates, Circuit, Gate, Layout, C64};
use crate::error::{Error, Result};
use crate::groundstate::{history_ground_state, StateVector};
use crate::hamiltonian::{AssemblyOptions, Skeleton};
use crate::sparse::{dot, norm, SparseOperator};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest tolerated |‖ψ‖ − 1| over a run.
pub const NORM_BUDGET: f64 = 1e-8;
/// Default resolution: steps per unit of T·‖H‖.
pub const STEPS_PER_UNIT: f64 = 50.0;
const CHECKPOINTS: usize = 100;
const CG_TOL: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: f64,
    pub lambda: f64,
    /// |⟨ψ_0(λ)|ψ(t)⟩|² against the instantaneous ground state.
    pub overlap: f64,
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub total_time: f64,
    pub steps: usize,
    pub final_state: StateVector,
    /// |⟨ψ_0(1)|ψ(T)⟩|².
    pub fidelity: f64,
    /// max over steps of |‖ψ‖ − 1|.
    pub norm_drift: f64,
    pub checkpoints: Vec<Checkpoint>,
}

impl EvolutionResult {
    pub fn infidelity(&self) -> f64 {
        (1.0 - self.fidelity).max(0.0)
    }
}

/// Small instances for evolution studies.
///
/// * `1`: one qubit, identity gates at steps 1 and 2 (three rail sites).
/// * `3`: three qubits over steps 1–4 with CNOT(1,2) at 2, CNOT(2,3) at 3 and H on qubit 1 at 4.
pub fn toy_circuit(m: usize) -> Result<Circuit> {
    let mut g = Vec::new();
    match m {
        1 => {
            g.push(Gate::identity(1, &[1]));
            g.push(Gate::identity(2, &[1]));
        }
        3 => {
            for q in 1..=3 {
                g.push(Gate::identity(1, &[q]));
            }
            g.push(Gate::new(2, &[1, 2], gates::cnot())?);
            g.push(Gate::identity(2, &[3]));
            g.push(Gate::identity(3, &[1]));
            g.push(Gate::new(3, &[2, 3], gates::cnot())?);
            g.push(Gate::new(4, &[1], gates::hadamard())?);
            g.push(Gate::identity(4, &[2]));
            g.push(Gate::identity(4, &[3]));
        }
        _ => return Err(Error::Domain(format!("no toy instance with M = {m} (use 1 or 3)"))),
    }
    Circuit::new(m, 0, Layout::Custom, g)
}

/// The block of H coupled to the all-rest, all-zero state, and its skeleton.
pub struct Block {
    pub basis: Basis,
    pub skeleton: Skeleton,
    start: usize,
}

impl Block {
    pub fn new(c: &Circuit) -> Result<Block> {
        let full = enumerate_basis(c)?;
        let sk = Skeleton::new(c, &full, &AssemblyOptions::default())?;
        let space = full.space().clone();
        let rest = full
            .index_of(&space.lo, 0)
            .ok_or_else(|| Error::Dimension("rest configuration missing from the basis".into()))?;
        // every hop is switched fully on at λ = 1, so its pattern is the coupling graph
        let comp = sk.at(1.0)?.components().into_iter().find(|c| c.binary_search(&rest).is_ok()).unwrap();
        let codes = comp.iter().map(|&k| full.code(k)).collect();
        let basis = Basis::from_codes(space.clone(), codes, Selection::Subset("rest block".into()));
        let skeleton = Skeleton::new(c, &basis, &AssemblyOptions::default())?;
        let start = basis.index_of(&space.lo, 0).unwrap();
        Ok(Block { basis, skeleton, start })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn initial_state(&self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[self.start] = C64::new(1.0, 0.0);
        v
    }
}

/// ⌈50 · T · ‖H‖⌉ with ‖H‖ bounded uniformly over λ.
pub fn default_steps(c: &Circuit, total_time: f64) -> Result<usize> {
    let b = Block::new(c)?;
    Ok(steps_for(&b, total_time))
}

fn steps_for(b: &Block, total_time: f64) -> usize {
    ((STEPS_PER_UNIT * total_time * b.skeleton.magnitude_bound()).ceil() as usize).max(1)
}

/// x = (1 + i a H)⁻¹ (1 − i a H) ψ by conjugate gradients on the normal equations,
/// whose operator 1 + a²H² is positive definite and close to the identity.
fn cayley_solve(h: &SparseOperator, a: f64, psi: &[C64], guess: &mut [C64]) -> Result<()> {
    let n = psi.len();
    let i_a = C64::new(0.0, a);
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let apply_normal = |x: &[C64], out: &mut [C64], tmp: &mut [C64]| {
        h.matvec(x, tmp);
        h.matvec(tmp, out);
        for k in 0..n {
            out[k] = x[k] + out[k] * (a * a);
        }
    };
    // normal-equation rhs: (1 − i a H)² ψ
    h.matvec(psi, &mut tmp);
    let half: Vec<C64> = (0..n).map(|k| psi[k] - i_a * tmp[k]).collect();
    h.matvec(&half, &mut tmp);
    let b: Vec<C64> = (0..n).map(|k| half[k] - i_a * tmp[k]).collect();
    let bnorm = norm(&b).max(f64::MIN_POSITIVE);
    let mut ax = vec![C64::new(0.0, 0.0); n];
    apply_normal(guess, &mut ax, &mut tmp);
    let mut r: Vec<C64> = (0..n).map(|k| b[k] - ax[k]).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re;
    let mut ap = vec![C64::new(0.0, 0.0); n];
    for _ in 0..200 {
        if rr.sqrt() <= CG_TOL * bnorm {
            return Ok(());
        }
        apply_normal(&p, &mut ap, &mut tmp);
        let alpha = rr / dot(&p, &ap).re;
        for k in 0..n {
            guess[k] += p[k] * alpha;
            r[k] -= ap[k] * alpha;
        }
        let rr_new = dot(&r, &r).re;
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            p[k] = r[k] + p[k] * beta;
        }
    }
    if rr.sqrt() <= 1e3 * CG_TOL * bnorm {
        return Ok(());
    }
    Err(Error::NoConvergence { residual: rr.sqrt() / bnorm, iterations: 200 })
}

/// Integrate i dψ/dt = H(t/T) ψ from the all-rest state over [0, T] in `steps` steps.
pub fn evolve(c: &Circuit, total_time: f64, steps: usize) -> Result<EvolutionResult> {
    if !(total_time >= 0.0 && total_time.is_finite()) {
        return Err(Error::Domain(format!("evolution time {total_time} must be finite and ≥ 0")));
    }
    if steps == 0 {
        return Err(Error::Domain("at least one step is required".into()));
    }
    let block = Block::new(c)?;
    evolve_block(c, &block, total_time, steps)
}

/// [`evolve`] with the default step count.
pub fn evolve_default(c: &Circuit, total_time: f64) -> Result<EvolutionResult> {
    let block = Block::new(c)?;
    let steps = steps_for(&block, total_time);
    evolve_block(c, &block, total_time, steps)
}

/// Independent evolutions for several total times (parallel).
pub fn evolve_sweep(c: &Circuit, times: &[f64], steps: Option<usize>) -> Result<Vec<EvolutionResult>> {
    let block = Block::new(c)?;
    times.par_iter().map(|&t| evolve_block(c, &block, t, steps.unwrap_or_else(|| steps_for(&block, t)))).collect()
}

fn ground_overlap(c: &Circuit, basis: &Basis, lambda: f64, psi: &[C64]) -> Result<f64> {
    let g = history_ground_state(c, lambda, basis)?;
    Ok(dot(g.amplitudes(), psi).norm_sqr() / norm(psi).powi(2))
}

fn evolve_block(c: &Circuit, block: &Block, total_time: f64, steps: usize) -> Result<EvolutionResult> {
    let basis = &block.basis;
    let mut psi = block.initial_state();
    let dt = total_time / steps as f64;
    let every = steps.div_ceil(CHECKPOINTS).max(1);
    let mut checkpoints =
        vec![Checkpoint { t: 0.0, lambda: 0.0, overlap: ground_overlap(c, basis, 0.0, &psi)?, norm: 1.0 }];
    let mut drift: f64 = 0.0;
    if total_time > 0.0 {
        let mut next = psi.clone();
        for s in 0..steps {
            let lambda_mid = (s as f64 + 0.5) / steps as f64;
            let h = block.skeleton.at(lambda_mid)?;
            // (1 + i dt/2 H) ψ' = (1 − i dt/2 H) ψ
            next.copy_from_slice(&psi);
            cayley_solve(&h, 0.5 * dt, &psi, &mut next)?;
            std::mem::swap(&mut psi, &mut next);
            let nrm = norm(&psi);
            drift = drift.max((nrm - 1.0).abs());
            if drift > NORM_BUDGET {
                return Err(Error::NormDrift(drift));
            }
            if (s + 1) % every == 0 || s + 1 == steps {
                let lambda = (s + 1) as f64 / steps as f64;
                checkpoints.push(Checkpoint {
                    t: lambda * total_time,
                    lambda,
                    overlap: ground_overlap(c, basis, lambda, &psi)?,
                    norm: nrm,
                });
            }
        }
    }
    let fidelity = ground_overlap(c, basis, 1.0, &psi)?;
    Ok(EvolutionResult {
        total_time,
        steps,
        final_state: StateVector::new(basis.clone(), psi)?,
        fidelity,
        norm_drift: drift,
        checkpoints,
    })
}

/// The adiabatic excitation bound for the smoothstep schedule, in units of 𝓔 = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JansenBound {
    /// ((24M + 63M²)/g² + 1008M²/g³)/T
    pub full: f64,
    /// 1095M²/(T g³); dominates `full` whenever g ≤ 𝓔.
    pub cap: f64,
}

pub fn jansen_bound(m: usize, g_min: f64, total_time: f64) -> Result<JansenBound> {
    if m == 0 || !(g_min > 0.0) || !(total_time > 0.0) {
        return Err(Error::Domain(format!(
            "bound needs M ≥ 1, g > 0 and T > 0 (got M = {m}, g = {g_min}, T = {total_time})"
        )));
    }
    let mf = m as f64;
    let full = ((24.0 * mf + 63.0 * mf * mf) / g_min.powi(2) + 1008.0 * mf * mf / g_min.powi(3)) / total_time;
    let cap = 1095.0 * mf * mf / (total_time * g_min.powi(3));
    debug_assert!(g_min > 1.0 || full <= cap * (1.0 + 1e-12));
    Ok(JansenBound { full, cap })
}

/// Number of final time steps counted as the output region: (N − 3)/2 + M.
pub fn output_steps(c: &Circuit) -> usize {
    c.depth().saturating_sub(3) / 2 + c.m()
}

/// Probability that every qubit sits within the last (N−3)/2 + M time steps.
pub fn output_probability(psi: &StateVector, c: &Circuit) -> f64 {
    let first = (c.depth() + 1).saturating_sub(output_steps(c));
    weight_where(psi, |pos| pos.iter().all(|&i| i >= first))
}

/// Probability that qubit M sits on its last (N−1)/2 − (M−1) sites.
pub fn qubit_m_tail_probability(psi: &StateVector, c: &Circuit) -> f64 {
    let m = c.m();
    let len = ((c.depth().saturating_sub(1)) / 2).saturating_sub(m - 1);
    let f = c.window(m).f;
    let first = (f + 1).saturating_sub(len);
    weight_where(psi, |pos| pos[m - 1] >= first)
}

fn weight_where(psi: &StateVector, keep: impl Fn(&[usize]) -> bool) -> f64 {
    let basis = psi.basis();
    let mut pos = vec![0; basis.m()];
    let mut total = 0.0;
    let mut hit = 0.0;
    for (k, a) in psi.amplitudes().iter().enumerate() {
        let w = a.norm_sqr();
        if w == 0.0 {
            continue;
        }
        total += w;
        basis.state_into(k, &mut pos);
        if keep(&pos) {
            hit += w;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        hit / total
    }
}
