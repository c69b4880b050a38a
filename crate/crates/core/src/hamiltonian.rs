//! The two-body Hamiltonian H(λ) compiled from a circuit.
//!
//! Each gate contributes a hop term `𝓔[C†_i − C†_{i−1}U†][C_i − U C_{i−1}]` along the
//! qubit's rail; the first gate of every qubit is replaced by the λ_A-weighted entry
//! hop, bits at a rest site pay an initialisation cost, qubits still waiting pay a
//! quiescence cost `𝓔(1 − λ_{A−1}³)` for leaving rest, and every two-qubit gate adds a
//! diagonal penalty on position pairs that straddle its step.
//!
//! λ only enters through a handful of scalar coefficients, so the operator is built
//! once as a [`Skeleton`] and re-weighted per λ.

use crate::basis::{bit_of, violates_pair, with_bit, Basis};
use crate::circuit::{CMatrix, Circuit, C64};
use crate::error::{Error, Result};
pub use crate::sparse::SparseOperator;
use serde::{Deserialize, Serialize};

/// Energy prefactor 𝓔 (default 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyScale(f64);

impl EnergyScale {
    pub fn new(e: f64) -> Result<EnergyScale> {
        if e > 0.0 && e.is_finite() {
            Ok(EnergyScale(e))
        } else {
            Err(Error::Domain(format!("energy scale must be positive, got {e}")))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl Default for EnergyScale {
    fn default() -> Self {
        EnergyScale(1.0)
    }
}

/// Quintic smoothstep, clamped to [0, 1].
pub fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }
}

pub fn smoothstep_d1(x: f64) -> f64 {
    if (0.0..=1.0).contains(&x) {
        30.0 * x * x * (1.0 - x) * (1.0 - x)
    } else {
        0.0
    }
}

pub fn smoothstep_d2(x: f64) -> f64 {
    if (0.0..=1.0).contains(&x) {
        60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)
    } else {
        0.0
    }
}

/// Which offset is used when staggering the per-qubit ramps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    /// λ_A = F(Mλ − (A−1)): qubit A finishes exactly at λ = A/M.
    #[default]
    Shifted,
    /// λ_A = F(Mλ − A): qubit M never starts before λ = 1.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub m: usize,
    pub convention: Convention,
}

impl Schedule {
    pub fn new(m: usize) -> Schedule {
        Schedule { m, convention: Convention::Shifted }
    }

    fn offset(&self, a: usize) -> f64 {
        match self.convention {
            Convention::Shifted => (a - 1) as f64,
            Convention::Literal => a as f64,
        }
    }

    fn check(lambda: f64) -> Result<()> {
        if (0.0..=1.0).contains(&lambda) {
            Ok(())
        } else {
            Err(Error::Domain(format!("λ = {lambda} outside [0, 1]")))
        }
    }

    pub fn eval(&self, lambda: f64) -> Result<Vec<f64>> {
        Self::check(lambda)?;
        let ml = self.m as f64 * lambda;
        Ok((1..=self.m).map(|a| smoothstep(ml - self.offset(a))).collect())
    }

    /// dλ_A/dλ.
    pub fn derivative(&self, lambda: f64) -> Result<Vec<f64>> {
        Self::check(lambda)?;
        let (m, ml) = (self.m as f64, self.m as f64 * lambda);
        Ok((1..=self.m).map(|a| m * smoothstep_d1(ml - self.offset(a))).collect())
    }

    pub fn second_derivative(&self, lambda: f64) -> Result<Vec<f64>> {
        Self::check(lambda)?;
        let (m, ml) = (self.m as f64, self.m as f64 * lambda);
        Ok((1..=self.m).map(|a| m * m * smoothstep_d2(ml - self.offset(a))).collect())
    }

    /// The qubit whose ramp is running at λ: ⌊Mλ⌋ + 1, and M at λ = 1.
    pub fn active_qubit(&self, lambda: f64) -> usize {
        let k = (self.m as f64 * lambda + 1e-12).floor() as usize + 1;
        k.min(self.m)
    }
}

/// λ_A under the default (shifted) convention.
pub fn schedule_eval(lambda: f64, m: usize) -> Result<Vec<f64>> {
    Schedule::new(m).eval(lambda)
}

/// Scalar factor multiplying a skeleton entry. Qubit labels are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Coef {
    One,
    LambdaSq(usize),
    NegLambda(usize),
    /// 1 − λ_{A−1}³ for qubit A
    Quiescent(usize),
}

impl Coef {
    fn value(&self, l: &[f64]) -> f64 {
        match *self {
            Coef::One => 1.0,
            Coef::LambdaSq(a) => l[a - 1] * l[a - 1],
            Coef::NegLambda(a) => -l[a - 1],
            Coef::Quiescent(a) => 1.0 - l[a - 2].powi(3),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    pub scale: EnergyScale,
    pub convention: Convention,
    /// Drop the entry hop h^{o_A}_A(λ_A 𝓘) of this qubit.
    pub omit_entry_hop: Option<usize>,
}

/// λ-independent structure of H over a basis.
#[derive(Clone, Debug)]
pub struct Skeleton {
    schedule: Schedule,
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    // per stored entry: contributions[cptr[k]..cptr[k+1]]
    cptr: Vec<usize>,
    contributions: Vec<(Coef, C64)>,
}

fn first_gate_check(c: &Circuit) -> Result<()> {
    for a in 1..=c.m() {
        let w = c.window(a);
        match c.gate_at(a, w.o) {
            Some(g) if !g.is_two_qubit() => {}
            _ => {
                return Err(Error::InvalidCircuit(format!(
                    "first gate on qubit {a} (step {}) must be a one-qubit identity",
                    w.o
                )))
            }
        }
    }
    Ok(())
}

impl Skeleton {
    pub fn new(c: &Circuit, basis: &Basis, opts: &AssemblyOptions) -> Result<Skeleton> {
        first_gate_check(c)?;
        if basis.space() != &crate::basis::Space::of(c) {
            return Err(Error::Dimension("basis does not belong to this circuit".into()));
        }
        let m = c.m();
        let e = opts.scale.value();
        let ec = C64::new(e, 0.0);
        let mut trip: Vec<(usize, usize, Coef, C64)> = Vec::new();
        let mut pos = vec![0usize; m];
        let mut tpos = vec![0usize; m];
        let two: Vec<(usize, usize, usize)> =
            c.two_qubit_gates().map(|g| (g.qubits()[0], g.qubits()[1], g.step())).collect();
        for r in 0..basis.len() {
            let bits = basis.state_into(r, &mut pos);
            for a in 1..=m {
                let w = c.window(a);
                let p = pos[a - 1];
                if a >= 2 && p >= w.o {
                    trip.push((r, r, Coef::Quiescent(a), ec));
                }
                if p == w.rest() && bit_of(bits, m, a) == 1 {
                    trip.push((r, r, Coef::One, ec));
                }
                if opts.omit_entry_hop != Some(a) {
                    if p == w.o {
                        trip.push((r, r, Coef::One, ec));
                    }
                    if p == w.rest() {
                        trip.push((r, r, Coef::LambdaSq(a), ec));
                        tpos.copy_from_slice(&pos);
                        tpos[a - 1] = w.o;
                        if let Some(t) = basis.index_of(&tpos, bits) {
                            trip.push((t, r, Coef::NegLambda(a), ec));
                            trip.push((r, t, Coef::NegLambda(a), ec));
                        }
                    }
                }
                // gate at step p seen from its upper site
                if p > w.o {
                    if let Some(g) = c.gate_at(a, p) {
                        match g.partner(a) {
                            None => trip.push((r, r, Coef::One, ec)),
                            Some(b) if b > a && pos[b - 1] == p => trip.push((r, r, Coef::One, ec)),
                            _ => {}
                        }
                    }
                }
                // gate at step p+1 seen from its lower site
                if p + 1 > w.o && p < w.f {
                    let Some(g) = c.gate_at(a, p + 1) else { continue };
                    let u = g.matrix();
                    match g.partner(a) {
                        None => {
                            trip.push((r, r, Coef::One, ec));
                            tpos.copy_from_slice(&pos);
                            tpos[a - 1] = p + 1;
                            let beta = bit_of(bits, m, a) as usize;
                            for b in 0..2u32 {
                                let v = -ec * u[(b as usize, beta)];
                                if let Some(t) = basis.index_of(&tpos, with_bit(bits, m, a, b)) {
                                    trip.push((t, r, Coef::One, v));
                                    trip.push((r, t, Coef::One, v.conj()));
                                }
                            }
                        }
                        Some(b) if b > a && pos[b - 1] == p => {
                            trip.push((r, r, Coef::One, ec));
                            tpos.copy_from_slice(&pos);
                            tpos[a - 1] = p + 1;
                            tpos[b - 1] = p + 1;
                            let beta = 2 * bit_of(bits, m, a) as usize + bit_of(bits, m, b) as usize;
                            for k in 0..4u32 {
                                let v = -ec * u[(k as usize, beta)];
                                let nb = with_bit(with_bit(bits, m, a, k >> 1), m, b, k & 1);
                                if let Some(t) = basis.index_of(&tpos, nb) {
                                    trip.push((t, r, Coef::One, v));
                                    trip.push((r, t, Coef::One, v.conj()));
                                }
                            }
                        }
                        _ => {}
                    }
                }
            }
            for &(a, b, s) in &two {
                if violates_pair(pos[a - 1], pos[b - 1], s) {
                    trip.push((r, r, Coef::One, ec));
                }
            }
        }
        Ok(Skeleton::compress(basis.len(), trip, Schedule { m, convention: opts.convention }))
    }

    fn compress(dim: usize, mut trip: Vec<(usize, usize, Coef, C64)>, schedule: Schedule) -> Skeleton {
        trip.sort_by_key(|x| (x.0, x.1));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::new();
        let mut cptr = vec![0usize];
        let mut contributions = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, coef, v) in trip {
            if last != Some((r, c)) {
                if last.is_some() {
                    cptr.push(contributions.len());
                }
                indptr[r + 1] += 1;
                indices.push(c);
                last = Some((r, c));
            }
            // merge repeated coefficients of the same kind
            let start = *cptr.last().unwrap();
            if let Some(slot) = contributions[start..].iter_mut().find(|(k, _)| *k == coef) {
                slot.1 += v;
            } else {
                contributions.push((coef, v));
            }
        }
        if last.is_some() {
            cptr.push(contributions.len());
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        Skeleton { schedule, dim, indptr, indices, cptr, contributions }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    /// Operator for explicit per-qubit values (λ_1, …, λ_M).
    pub fn with_lambdas(&self, l: &[f64]) -> SparseOperator {
        let values = (0..self.indices.len())
            .map(|k| self.contributions[self.cptr[k]..self.cptr[k + 1]].iter().map(|(coef, v)| v * coef.value(l)).sum())
            .collect();
        SparseOperator::from_csr(self.dim, self.indptr.clone(), self.indices.clone(), values)
    }

    pub fn at(&self, lambda: f64) -> Result<SparseOperator> {
        Ok(self.with_lambdas(&self.schedule.eval(lambda)?))
    }

    /// Operator with each coefficient replaced by its largest magnitude over λ;
    /// its Gershgorin norm bounds ‖H(λ)‖ uniformly.
    pub fn magnitude_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1])
                    .map(|k| {
                        self.contributions[self.cptr[k]..self.cptr[k + 1]].iter().map(|(_, v)| v.norm()).sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Coupling pattern (all entries that are nonzero for some λ).
    pub fn pattern(&self) -> SparseOperator {
        let values = (0..self.indices.len()).map(|_| C64::new(1.0, 0.0)).collect();
        SparseOperator::from_csr(self.dim, self.indptr.clone(), self.indices.clone(), values)
    }
}

pub fn assemble(c: &Circuit, lambda: f64, basis: &Basis, scale: EnergyScale) -> Result<SparseOperator> {
    Skeleton::new(c, basis, &AssemblyOptions { scale, ..Default::default() })?.at(lambda)
}

/// A single term of the Hamiltonian.
#[derive(Clone, Debug)]
pub enum Term {
    /// h^i_A(U); `matrix` may be a scaled identity for the entry hop.
    OneQubit {
        qubit: usize,
        step: usize,
        matrix: CMatrix,
    },
    TwoQubit {
        qubits: (usize, usize),
        step: usize,
        matrix: CMatrix,
    },
    /// 𝓔 c†_{A,i,1} c_{A,i,1}
    Init {
        qubit: usize,
        site: usize,
    },
    /// 𝓔 Σ_{k<i≤l} (n_{A,k} n_{B,l} + n_{A,l} n_{B,k})
    Penalty {
        qubits: (usize, usize),
        step: usize,
    },
}

/// Standalone operator for one term, for testing assembly piece by piece.
///
/// The hop matrix may be a scaled unitary (e.g. λ·𝓘); the lower-site diagonal is
/// then `U†U` rather than the identity.
pub fn build_term(term: &Term, basis: &Basis, scale: EnergyScale) -> Result<SparseOperator> {
    let m = basis.m();
    let sp = basis.space().clone();
    let e = C64::new(scale.value(), 0.0);
    let in_window = |q: usize, step: usize| -> Result<()> {
        if q == 0 || q > m || step < sp.lo[q - 1] + 1 || step > sp.hi[q - 1] {
            Err(Error::Window { qubit: q, step })
        } else {
            Ok(())
        }
    };
    let mut t = Vec::new();
    let mut pos = vec![0usize; m];
    let mut tpos = vec![0usize; m];
    match term {
        Term::OneQubit { qubit, step, matrix } => {
            in_window(*qubit, *step)?;
            let (a, i) = (*qubit, *step);
            let utu = matrix.adjoint() * matrix;
            for r in 0..basis.len() {
                let bits = basis.state_into(r, &mut pos);
                let beta = bit_of(bits, m, a) as usize;
                if pos[a - 1] == i {
                    t.push((r, r, e));
                } else if pos[a - 1] + 1 == i {
                    for b2 in 0..2u32 {
                        let src = basis.index_of(&pos, with_bit(bits, m, a, b2));
                        if let Some(s) = src {
                            t.push((r, s, e * utu[(beta, b2 as usize)]));
                        }
                    }
                    tpos.copy_from_slice(&pos);
                    tpos[a - 1] = i;
                    for b in 0..2u32 {
                        if let Some(u) = basis.index_of(&tpos, with_bit(bits, m, a, b)) {
                            let v = -e * matrix[(b as usize, beta)];
                            t.push((u, r, v));
                            t.push((r, u, v.conj()));
                        }
                    }
                }
            }
        }
        Term::TwoQubit { qubits: (qa, qb), step, matrix } => {
            in_window(*qa, *step)?;
            in_window(*qb, *step)?;
            let (a, b, i) = (*qa, *qb, *step);
            if a == b {
                return Err(Error::InvalidCircuit("two-qubit term on one qubit".into()));
            }
            for r in 0..basis.len() {
                let bits = basis.state_into(r, &mut pos);
                let (pa, pb) = (pos[a - 1], pos[b - 1]);
                if pa == i && pb == i {
                    t.push((r, r, e));
                } else if pa + 1 == i && pb + 1 == i {
                    t.push((r, r, e));
                    tpos.copy_from_slice(&pos);
                    tpos[a - 1] = i;
                    tpos[b - 1] = i;
                    let beta = 2 * bit_of(bits, m, a) as usize + bit_of(bits, m, b) as usize;
                    for k in 0..4u32 {
                        let nb = with_bit(with_bit(bits, m, a, k >> 1), m, b, k & 1);
                        if let Some(u) = basis.index_of(&tpos, nb) {
                            let v = -e * matrix[(k as usize, beta)];
                            t.push((u, r, v));
                            t.push((r, u, v.conj()));
                        }
                    }
                }
            }
        }
        Term::Init { qubit, site } => {
            if *qubit == 0 || *qubit > m || *site < sp.lo[qubit - 1] || *site > sp.hi[qubit - 1] {
                return Err(Error::Window { qubit: *qubit, step: *site });
            }
            for r in 0..basis.len() {
                let bits = basis.state_into(r, &mut pos);
                if pos[qubit - 1] == *site && bit_of(bits, m, *qubit) == 1 {
                    t.push((r, r, e));
                }
            }
        }
        Term::Penalty { qubits: (a, b), step } => {
            in_window(*a, *step)?;
            in_window(*b, *step)?;
            for r in 0..basis.len() {
                basis.state_into(r, &mut pos);
                if violates_pair(pos[a - 1], pos[b - 1], *step) {
                    t.push((r, r, e));
                }
            }
        }
    }
    Ok(SparseOperator::from_triplets(basis.len(), t))
}
