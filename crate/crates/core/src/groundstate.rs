//! Zero-energy ground state of H(λ) from the forward recurrence.
//!
//! Starting from the all-rest, all-zero configuration, every other time-valid
//! position tuple is reached by stepping one qubit (or a pair sharing a two-qubit
//! gate) back by one site; the amplitude there is the gate applied to the
//! amplitude of the predecessor. Tuples are processed in order of total
//! displacement, so every predecessor is known before it is needed.

use crate::basis::{bit_of, penalty_free_vertices, with_bit, Basis, Space};
use crate::circuit::{Circuit, C64};
use crate::error::{Error, Result};
use crate::hamiltonian::{Convention, Schedule};
use crate::sparse::{dot, norm};
use std::collections::HashMap;

/// Amplitudes over a basis.
#[derive(Clone, Debug)]
pub struct StateVector {
    basis: Basis,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(basis: Basis, amplitudes: Vec<C64>) -> Result<StateVector> {
        if amplitudes.len() != basis.len() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a basis of {} states",
                amplitudes.len(),
                basis.len()
            )));
        }
        Ok(StateVector { basis, amplitudes })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// Probability of finding `qubit` at `site` (and with bit `bit`, if given).
    pub fn occupation(&self, qubit: usize, site: usize, bit: Option<u32>) -> Result<f64> {
        let sp = self.basis.space();
        let m = sp.m();
        if qubit == 0 || qubit > m {
            return Err(Error::Domain(format!("qubit {qubit} out of range 1..={m}")));
        }
        if site < sp.lo[qubit - 1] || site > sp.hi[qubit - 1] {
            return Err(Error::Window { qubit, step: site });
        }
        let mut pos = vec![0; m];
        let mut p = 0.0;
        for (k, a) in self.amplitudes.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let bits = self.basis.state_into(k, &mut pos);
            if pos[qubit - 1] == site && bit.is_none_or(|b| bit_of(bits, m, qubit) == b) {
                p += a.norm_sqr();
            }
        }
        Ok(p / self.norm().powi(2))
    }

    /// ⟨self|other⟩ over a common basis.
    pub fn overlap(&self, other: &StateVector) -> Result<C64> {
        let o = other.on_basis(&self.basis)?;
        Ok(dot(&self.amplitudes, &o.amplitudes))
    }

    /// |⟨self|other⟩|² for normalized states.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr() / (self.norm() * other.norm()).powi(2))
    }

    /// Re-express on another basis of the same space. Fails if weight would be lost.
    pub fn on_basis(&self, target: &Basis) -> Result<StateVector> {
        if target.space() != self.basis.space() {
            return Err(Error::Dimension("states live in different spaces".into()));
        }
        let mut out = vec![C64::new(0.0, 0.0); target.len()];
        for (k, a) in self.amplitudes.iter().enumerate() {
            match target.index_of_code(self.basis.code(k)) {
                Some(j) => out[j] = *a,
                None if *a != C64::new(0.0, 0.0) => {
                    return Err(Error::Dimension(format!(
                        "state {:?} carries weight but is missing from the target basis",
                        self.basis.state(k)
                    )))
                }
                None => {}
            }
        }
        StateVector::new(target.clone(), out)
    }
}

pub fn occupation(psi: &StateVector, qubit: usize, site: usize, bit: Option<u32>) -> Result<f64> {
    psi.occupation(qubit, site, bit)
}

/// Which qubit is preferred when several can step back. The result must not depend on it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SweepOrder {
    #[default]
    Ascending,
    Descending,
}

/// Normalized ground state of H(λ) on `basis` (default schedule convention).
pub fn history_ground_state(c: &Circuit, lambda: f64, basis: &Basis) -> Result<StateVector> {
    history_ground_state_with(c, lambda, basis, Convention::Shifted, SweepOrder::Ascending)
}

pub fn history_ground_state_with(
    c: &Circuit,
    lambda: f64,
    basis: &Basis,
    convention: Convention,
    order: SweepOrder,
) -> Result<StateVector> {
    let m = c.m();
    let lam = Schedule { m, convention }.eval(lambda)?;
    let space = Space::of(c);
    if basis.space() != &space {
        return Err(Error::Dimension("basis does not belong to this circuit".into()));
    }
    let mut verts = penalty_free_vertices(c, &[]);
    let disp = |p: &Vec<usize>| p.iter().zip(&space.lo).map(|(a, b)| a - b).sum::<usize>();
    verts.sort_by_key(disp);
    let index: HashMap<u64, usize> = verts.iter().enumerate().map(|(k, p)| (space.encode(p, 0), k)).collect();
    let nb = 1usize << m;
    let mut amp = vec![C64::new(0.0, 0.0); verts.len() * nb];
    let qubits: Vec<usize> = match order {
        SweepOrder::Ascending => (1..=m).collect(),
        SweepOrder::Descending => (1..=m).rev().collect(),
    };
    let mut prev = vec![0usize; m];
    for (k, p) in verts.iter().enumerate() {
        if disp(p) == 0 {
            amp[k * nb] = C64::new(1.0, 0.0);
            continue;
        }
        let mut done = false;
        for &a in &qubits {
            let w = c.window(a);
            let pa = p[a - 1];
            if pa == w.rest() {
                continue;
            }
            prev.copy_from_slice(p);
            if pa == w.o {
                prev[a - 1] = w.rest();
                let j = index[&space.encode(&prev, 0)];
                for b in 0..nb {
                    amp[k * nb + b] = amp[j * nb + b] * lam[a - 1];
                }
                done = true;
                break;
            }
            let g = c.gate_at(a, pa).ok_or(Error::Window { qubit: a, step: pa })?;
            let u = g.matrix();
            match g.partner(a) {
                None => {
                    prev[a - 1] = pa - 1;
                    let j = index[&space.encode(&prev, 0)];
                    for b in 0..nb as u32 {
                        let ba = bit_of(b, m, a) as usize;
                        let mut s = C64::new(0.0, 0.0);
                        for beta in 0..2u32 {
                            s += u[(ba, beta as usize)] * amp[j * nb + with_bit(b, m, a, beta) as usize];
                        }
                        amp[k * nb + b as usize] = s;
                    }
                }
                Some(pb) if p[pb - 1] == pa => {
                    let (qa, qb) = (g.qubits()[0], g.qubits()[1]);
                    prev[qa - 1] = pa - 1;
                    prev[qb - 1] = pa - 1;
                    let j = index[&space.encode(&prev, 0)];
                    for b in 0..nb as u32 {
                        let row = 2 * bit_of(b, m, qa) as usize + bit_of(b, m, qb) as usize;
                        let mut s = C64::new(0.0, 0.0);
                        for kappa in 0..4u32 {
                            let src = with_bit(with_bit(b, m, qa, kappa >> 1), m, qb, kappa & 1);
                            s += u[(row, kappa as usize)] * amp[j * nb + src as usize];
                        }
                        amp[k * nb + b as usize] = s;
                    }
                }
                Some(_) => continue,
            }
            done = true;
            break;
        }
        if !done {
            return Err(Error::InvalidCircuit(format!("time-valid tuple {p:?} has no predecessor")));
        }
    }
    let total = norm(&amp);
    let mut out = vec![C64::new(0.0, 0.0); basis.len()];
    for (k, p) in verts.iter().enumerate() {
        for b in 0..nb {
            let a = amp[k * nb + b];
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            match basis.index_of(p, b as u32) {
                Some(j) => out[j] = a / total,
                None => {
                    return Err(Error::Dimension(format!(
                        "ground state has weight on {p:?} bits {b:#b}, which the basis excludes"
                    )))
                }
            }
        }
    }
    StateVector::new(basis.clone(), out)
}
