//! Basis changes that relate Hamiltonians of different circuits.
//!
//! * The identity gauge: for each position tuple, the product of every gate a
//!   configuration has already passed maps the all-identity circuit's Hamiltonian
//!   onto the original one, so both share a spectrum.
//! * Rail swaps: exchanging the contents of two rails once both sit at or beyond a
//!   step. A chain of such swaps turns the nearest-neighbour layout into the
//!   round-robin one on the time-valid subspace.

use crate::basis::{bit_of, penalty_free_basis, with_bit, Basis};
use crate::circuit::{
    build_1d_circuit, build_all_to_all_circuit, layout_depth, pairs_1d, pairs_all_to_all, CMatrix, Circuit, Gate, C64,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{AssemblyOptions, Skeleton};
use crate::sparse::SparseOperator;
use crate::spectra::{dense_eigenvalues, lowest_by_blocks, DENSE_LIMIT};

const LOWEST_COMPARED: usize = 4;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Position-dependent bit rotation V(i_1, …, i_M), evaluated on demand.
#[derive(Clone, Debug)]
pub struct GaugeMap {
    circuit: Circuit,
}

fn apply_gate_left(v: &mut CMatrix, g: &Gate, m: usize) {
    let u = g.matrix();
    let nb = v.nrows();
    let old = v.clone();
    match *g.qubits() {
        [a] => {
            for r in 0..nb as u32 {
                let ra = bit_of(r, m, a) as usize;
                for c in 0..nb {
                    let mut s = C64::new(0.0, 0.0);
                    for beta in 0..2u32 {
                        s += u[(ra, beta as usize)] * old[(with_bit(r, m, a, beta) as usize, c)];
                    }
                    v[(r as usize, c)] = s;
                }
            }
        }
        [a, b] => {
            for r in 0..nb as u32 {
                let row = 2 * bit_of(r, m, a) as usize + bit_of(r, m, b) as usize;
                for c in 0..nb {
                    let mut s = C64::new(0.0, 0.0);
                    for k in 0..4u32 {
                        let src = with_bit(with_bit(r, m, a, k >> 1), m, b, k & 1);
                        s += u[(row, k as usize)] * old[(src as usize, c)];
                    }
                    v[(r as usize, c)] = s;
                }
            }
        }
        _ => unreachable!("gates act on one or two qubits"),
    }
}

impl GaugeMap {
    pub fn new(c: &Circuit) -> GaugeMap {
        GaugeMap { circuit: c.clone() }
    }

    /// Time-ordered product of the gates each qubit has passed: a one-qubit gate at
    /// step j counts once its qubit is at j or later, a two-qubit gate once both are.
    pub fn at(&self, pos: &[usize]) -> CMatrix {
        let m = self.circuit.m();
        let nb = 1usize << m;
        let mut v = CMatrix::identity(nb, nb);
        for g in self.circuit.gates() {
            let applies = g.qubits().iter().all(|&q| pos[q - 1] >= g.step());
            if applies && !g.is_identity() {
                apply_gate_left(&mut v, g, m);
            }
        }
        v
    }

    /// The block-diagonal operator 𝒰 = Σ_p |p⟩⟨p| ⊗ V(p) on `basis`.
    ///
    /// Every tuple of the basis must carry all 2^M bit strings.
    pub fn operator(&self, basis: &Basis) -> Result<SparseOperator> {
        let m = self.circuit.m();
        let nb = 1u32 << m;
        let mut cache: HashMap<Vec<usize>, CMatrix> = HashMap::new();
        let mut pos = vec![0; m];
        let mut t = Vec::new();
        for col in 0..basis.len() {
            let bits = basis.state_into(col, &mut pos);
            let v = cache.entry(pos.clone()).or_insert_with(|| self.at(&pos));
            for r in 0..nb {
                let x = v[(r as usize, bits as usize)];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = basis
                    .index_of(&pos, r)
                    .ok_or_else(|| Error::Dimension(format!("basis lacks bit string {r:#b} at tuple {pos:?}")))?;
                t.push((row, col, x));
            }
        }
        Ok(SparseOperator::from_triplets(basis.len(), t))
    }
}

/// Replace every gate by the identity; returns the gauged circuit and the map relating the two.
pub fn identity_gauge(c: &Circuit) -> (Circuit, GaugeMap) {
    (c.with_identity_gates(), GaugeMap::new(c))
}

/// 𝒰† H 𝒰.
pub fn conjugate(op: &SparseOperator, u: &SparseOperator) -> SparseOperator {
    u.adjoint().mul(op).mul(u)
}

/// One rail exchange: qubits `a`, `b` swap positions and bits when both sit at `k` or later.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Swap {
    pub a: usize,
    pub b: usize,
    pub k: usize,
}

impl Swap {
    pub fn apply(&self, pos: &mut [usize], bits: &mut u32, m: usize) {
        let (a, b) = (self.a - 1, self.b - 1);
        if pos[a] >= self.k && pos[b] >= self.k {
            pos.swap(a, b);
            let (ba, bb) = (bit_of(*bits, m, self.a), bit_of(*bits, m, self.b));
            *bits = with_bit(with_bit(*bits, m, self.a, bb), m, self.b, ba);
        }
    }
}

/// The operator conjugated by a partial permutation of basis states.
#[derive(Clone, Debug)]
pub struct Conjugated {
    pub op: SparseOperator,
    /// Basis indices whose image left the basis; their rows and columns are zero.
    pub dropped: Vec<usize>,
}

/// Image of each basis state under a sequence of swaps (applied in order).
pub fn swap_permutation(basis: &Basis, swaps: &[Swap]) -> Vec<Option<usize>> {
    let m = basis.m();
    let mut pos = vec![0; m];
    (0..basis.len())
        .map(|i| {
            let mut bits = basis.state_into(i, &mut pos);
            for s in swaps {
                s.apply(&mut pos, &mut bits, m);
            }
            basis.index_of(&pos, bits)
        })
        .collect()
}

/// W† op W for the rail swap of `a` and `b` at step `k`.
pub fn swap_conjugate(op: &SparseOperator, a: usize, b: usize, k: usize, basis: &Basis) -> Result<Conjugated> {
    if op.dim() != basis.len() {
        return Err(Error::Dimension(format!("operator of dimension {} on a basis of {}", op.dim(), basis.len())));
    }
    let sp = basis.space();
    if a == b || a == 0 || b == 0 || a > sp.m() || b > sp.m() {
        return Err(Error::Domain(format!("cannot swap qubits {a} and {b}")));
    }
    for q in [a, b] {
        if k <= sp.lo[q - 1] || k > sp.hi[q - 1] {
            return Err(Error::Window { qubit: q, step: k });
        }
    }
    Ok(permute_operator(op, &swap_permutation(basis, &[Swap { a, b, k }])))
}

/// (P† op P)[r][c] = op[σ(r)][σ(c)], zero where σ is undefined. The result lives on
/// the domain of σ, which may be a different basis of the same size or smaller.
pub fn permute_operator(op: &SparseOperator, sigma: &[Option<usize>]) -> Conjugated {
    let mut inv = vec![usize::MAX; op.dim()];
    let mut dropped = Vec::new();
    for (r, s) in sigma.iter().enumerate() {
        match s {
            Some(s) => inv[*s] = r,
            None => dropped.push(r),
        }
    }
    let t = op
        .triplets()
        .filter(|(r, c, _)| inv[*r] != usize::MAX && inv[*c] != usize::MAX)
        .map(|(r, c, v)| (inv[r], inv[c], v))
        .collect();
    Conjugated { op: SparseOperator::from_triplets(sigma.len(), t), dropped }
}

/// A named stage of the swap chain: all swaps at one step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapStage {
    pub name: String,
    pub k: usize,
    pub swaps: Vec<Swap>,
}

/// Stages W_6, V_8, W_10, … up to step N−3 that carry the nearest-neighbour
/// layout into the round-robin one. W_k swaps every nearest-neighbour pair at k
/// except (1, 2); V_k every pair except (M, M−1).
pub fn swap_chain(m: usize, n: usize) -> Vec<SwapStage> {
    let big_n = layout_depth(m, n);
    (6..=big_n - 3)
        .step_by(2)
        .map(|k| {
            let (name, skip) = if k % 4 == 2 { ("W", (1, 2)) } else { ("V", (m, m - 1)) };
            let swaps = pairs_1d(m, k).into_iter().filter(|&p| p != skip).map(|(a, b)| Swap { a, b, k }).collect();
            SwapStage { name: format!("{name}{k}"), k, swaps }
        })
        .collect()
}

/// Two-qubit pairs per even step 4..=N−3, as unordered pairs sorted within each row.
pub type PairTable = Vec<(usize, Vec<(usize, usize)>)>;

fn normalized(mut row: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    row.iter_mut().for_each(|p| *p = (p.0.min(p.1), p.0.max(p.1)));
    row.sort();
    row
}

fn table_from(m: usize, n: usize, f: impl Fn(usize) -> Vec<(usize, usize)>) -> PairTable {
    (4..=layout_depth(m, n) - 3).step_by(2).map(|s| (s, f(s))).collect()
}

/// Relabel a table by conjugating with `stage`: in each row after its step, labels a ↔ b swap.
fn relabel(table: &mut PairTable, stage: &SwapStage) {
    for (step, row) in table.iter_mut() {
        if *step <= stage.k {
            continue;
        }
        for p in row.iter_mut() {
            for s in &stage.swaps {
                let sw = |x: usize| {
                    if x == s.a {
                        s.b
                    } else if x == s.b {
                        s.a
                    } else {
                        x
                    }
                };
                *p = (sw(p.0), sw(p.1));
            }
        }
    }
}

/// Nearest-neighbour table after conjugating by the first `stages` stages of the chain
/// (innermost stage relabelled first).
pub fn table_after_stages(m: usize, n: usize, stages: usize) -> PairTable {
    let chain = swap_chain(m, n);
    let mut t = table_from(m, n, |s| pairs_1d(m, s));
    for st in chain[..stages].iter().rev() {
        relabel(&mut t, st);
    }
    t.into_iter().map(|(s, r)| (s, normalized(r))).collect()
}

pub fn round_robin_pair_table(m: usize, n: usize) -> PairTable {
    table_from(m, n, |s| normalized(pairs_all_to_all(m, s)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    pub k: usize,
    pub swaps: Vec<Swap>,
    pub table: PairTable,
    /// Rows at steps ≤ this agree with the round-robin table.
    pub agrees_through: usize,
    pub expected_through: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralCheck {
    pub lambda: f64,
    pub dim: usize,
    /// Full block spectra when every block is small, otherwise the lowest few.
    pub eigenvalues_compared: usize,
    /// Only defined when the swap chain is a bijection between the two bases.
    pub entrywise_deviation: Option<f64>,
    pub spectral_deviation: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub m: usize,
    pub n: usize,
    pub depth: usize,
    pub tol: f64,
    pub stages: Vec<StageReport>,
    pub final_table_matches: bool,
    /// True when the chain maps the time-valid states of one layout onto the other.
    /// Rails whose last sites differ (f = N versus N − 2) can break this: a state
    /// with one such qubit beyond N − 2 may have no image.
    pub bijective: bool,
    pub dropped: usize,
    pub spectra: Vec<SpectralCheck>,
    pub ok: bool,
}

fn agrees_through(t: &PairTable, rr: &PairTable) -> usize {
    let mut last = 2;
    for ((s, a), (_, b)) in t.iter().zip(rr) {
        if a != b {
            break;
        }
        last = *s;
    }
    last
}

/// Map from round-robin states to nearest-neighbour states: W_6 first, then V_8, ….
pub fn chain_permutation(from: &Basis, to: &Basis, chain: &[SwapStage]) -> Vec<Option<usize>> {
    let m = from.m();
    let mut pos = vec![0; m];
    (0..from.len())
        .map(|i| {
            let mut bits = from.state_into(i, &mut pos);
            for st in chain {
                for s in &st.swaps {
                    s.apply(&mut pos, &mut bits, m);
                }
            }
            to.index_of(&pos, bits)
        })
        .collect()
}

/// Eigenvalues of every connected block, merged and sorted.
pub fn block_spectrum(op: &SparseOperator) -> Vec<f64> {
    let mut v: Vec<f64> = op.components().iter().flat_map(|b| dense_eigenvalues(&op.restrict(b))).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Check the swap chain stage by stage and compare the time-valid blocks of both layouts.
///
/// `bits` restricts the comparison to one bit string (`None`: all of them).
pub fn verify_all_to_all_equivalence(
    m: usize,
    n: usize,
    tol: f64,
    lambdas: &[f64],
    bits: Option<u32>,
) -> Result<EquivalenceReport> {
    let one = build_1d_circuit(m, n, &[])?;
    let all = build_all_to_all_circuit(m, n, &[])?;
    let chain = swap_chain(m, n);
    let rr = round_robin_pair_table(m, n);
    let depth = layout_depth(m, n);
    let mut stages = Vec::new();
    for (idx, st) in chain.iter().enumerate() {
        let table = table_after_stages(m, n, idx + 1);
        let through = agrees_through(&table, &rr);
        let expected = (st.k + 2).min(depth - 3);
        stages.push(StageReport {
            stage: st.name.clone(),
            k: st.k,
            swaps: st.swaps.clone(),
            ok: through >= expected,
            table,
            agrees_through: through,
            expected_through: expected,
        });
    }
    let final_table_matches = table_after_stages(m, n, chain.len()) == rr;

    let b_all = penalty_free_basis(&all, bits, &[]);
    let b_one = penalty_free_basis(&one, bits, &[]);
    let sigma = chain_permutation(&b_all, &b_one, &chain);
    let dropped = sigma.iter().filter(|s| s.is_none()).count();
    let mut hit = vec![false; b_one.len()];
    sigma.iter().flatten().for_each(|&j| hit[j] = true);
    let bijective = dropped == 0 && b_all.len() == b_one.len() && hit.iter().all(|&h| h);

    let opts = AssemblyOptions::default();
    let sk_all = Skeleton::new(&all, &b_all, &opts)?;
    let sk_one = Skeleton::new(&one, &b_one, &opts)?;
    let mut spectra = Vec::new();
    for &l in lambdas {
        let h_all = sk_all.at(l)?;
        let h_one = sk_one.at(l)?;
        // pull the nearest-neighbour operator back onto the round-robin basis
        let entry_dev = bijective.then(|| permute_operator(&h_one, &sigma).op.max_deviation(&h_all));
        let (s_all, s_one) = if h_all.components().iter().all(|b| b.len() <= DENSE_LIMIT) {
            (block_spectrum(&h_all), block_spectrum(&h_one))
        } else {
            let low = |h: &SparseOperator| -> Result<Vec<f64>> {
                let k = LOWEST_COMPARED.min(h.dim());
                Ok(lowest_by_blocks(h, &vec![0.0; h.dim()], k, tol * 1e-2, false)?
                    .into_iter()
                    .map(|p| p.value)
                    .collect())
            };
            (low(&h_all)?, low(&h_one)?)
        };
        let spec_dev = if s_all.len() == s_one.len() {
            s_all.iter().zip(&s_one).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        spectra.push(SpectralCheck {
            lambda: l,
            dim: b_all.len(),
            eigenvalues_compared: s_all.len(),
            entrywise_deviation: entry_dev,
            spectral_deviation: spec_dev,
            ok: spec_dev <= tol && entry_dev.is_none_or(|d| d <= tol),
        });
    }
    let ok = stages.iter().all(|s| s.ok) && final_table_matches && spectra.iter().all(|s| s.ok);
    Ok(EquivalenceReport { m, n, depth, tol, stages, final_table_matches, bijective, dropped, spectra, ok })
}
