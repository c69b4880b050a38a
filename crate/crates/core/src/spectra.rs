//! Eigenvalues, gaps and the analytic gap bounds.
//!
//! Hopping never changes which pair penalties a position tuple violates, so H(λ)
//! splits into connected blocks, each carrying a constant penalty count. Since all
//! other terms are positive semi-definite, a block's spectrum starts at or above
//! `𝓔 × penalty count`; blocks whose floor already exceeds the eigenvalues being
//! sought are skipped without diagonalization.

use crate::basis::{enumerate_basis, penalty_count, sector, Basis};
use crate::circuit::{Circuit, C64};
use crate::error::{Error, Result};
use crate::groundstate::history_ground_state_with;
use crate::groundstate::SweepOrder;
use crate::hamiltonian::{AssemblyOptions, Convention, EnergyScale, Schedule, Skeleton};
use crate::sparse::{dot, norm, normalize, SparseOperator};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Components up to this size are diagonalized densely.
pub const DENSE_LIMIT: usize = 1024;
/// Eigenvalues below this (in units of 𝓔) count as zero.
pub const ZERO_TOL: f64 = 1e-8;
const MAX_RESTARTS: usize = 2000;
const SEED: u64 = 0x6a09e667f3bcc908;

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    /// Empty when only the eigenvalue was requested.
    pub vector: Vec<C64>,
}

/// All eigenpairs of a small operator, ascending.
pub fn dense_eigs(op: &SparseOperator) -> Vec<Eigenpair> {
    let n = op.dim();
    let mut pairs: Vec<Eigenpair> = if op.is_real() {
        let e = SymmetricEigen::new(op.to_dense_real());
        (0..n)
            .map(|k| Eigenpair {
                value: e.eigenvalues[k],
                vector: e.eigenvectors.column(k).iter().map(|&x| C64::new(x, 0.0)).collect(),
            })
            .collect()
    } else {
        let e = SymmetricEigen::new(op.to_dense());
        (0..n)
            .map(|k| Eigenpair { value: e.eigenvalues[k], vector: e.eigenvectors.column(k).iter().copied().collect() })
            .collect()
    };
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    pairs
}

/// Eigenvalues only, ascending.
pub fn dense_eigenvalues(op: &SparseOperator) -> Vec<f64> {
    let mut v: Vec<f64> = if op.is_real() {
        SymmetricEigen::new(op.to_dense_real()).eigenvalues.iter().copied().collect()
    } else {
        SymmetricEigen::new(op.to_dense()).eigenvalues.iter().copied().collect()
    };
    v.sort_by(f64::total_cmp);
    v
}

fn orthogonalize(v: &mut [C64], against: &[Vec<C64>]) {
    // two passes: classical Gram-Schmidt loses orthogonality otherwise
    for _ in 0..2 {
        for u in against {
            let c = dot(u, v);
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= y * c);
        }
    }
}

/// The `k` lowest eigenpairs of `op` in the orthogonal complement of `locked`, by
/// thick-restart Lanczos: the Krylov space is grown to `maxdim`, then shrunk to the
/// lowest Ritz vectors and extended again from their common residual direction.
fn thick_restart(
    op: &SparseOperator,
    k: usize,
    locked: &[Vec<C64>],
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Eigenpair>> {
    let n = op.dim();
    let avail = n - locked.len();
    let k = k.min(avail);
    let maxdim = (2 * k + 80).min(avail);
    let keep = (k + 20).min(maxdim.saturating_sub(10)).max(k);
    let zero = C64::new(0.0, 0.0);
    let random = |rng: &mut ChaCha8Rng| -> Vec<C64> {
        (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect()
    };
    let mut v: Vec<Vec<C64>> = Vec::new();
    let mut hv: Vec<Vec<C64>> = Vec::new();
    let mut t: Vec<Vec<C64>> = Vec::new();
    let mut next = random(rng);
    let mut best_res = f64::INFINITY;
    for _ in 0..MAX_RESTARTS {
        let mut stalled = 0;
        while v.len() < maxdim {
            orthogonalize(&mut next, locked);
            orthogonalize(&mut next, &v);
            if norm(&next) < 1e-10 {
                if v.len() >= k && stalled == 0 {
                    break;
                }
                stalled += 1;
                next = random(rng);
                continue;
            }
            normalize(&mut next);
            let w = op.apply(&next);
            let col: Vec<C64> = v.iter().map(|x| dot(x, &w)).collect();
            for (i, c) in col.iter().enumerate() {
                t[i].push(*c);
            }
            let mut row: Vec<C64> = col.iter().map(|c| c.conj()).collect();
            row.push(C64::new(dot(&next, &w).re, 0.0));
            t.push(row);
            v.push(std::mem::replace(&mut next, w.clone()));
            hv.push(w);
        }
        let d = v.len();
        let tm = DMatrix::from_fn(d, d, |r, c| t[r][c]);
        let e = SymmetricEigen::new(tm);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
        let nk = keep.min(d);
        let mut xs = Vec::with_capacity(nk);
        let mut hxs = Vec::with_capacity(nk);
        let mut thetas = Vec::with_capacity(nk);
        for &j in order.iter().take(nk) {
            let y = e.eigenvectors.column(j);
            let mut x = vec![zero; n];
            let mut hx = vec![zero; n];
            for q in 0..d {
                let c = y[q];
                x.iter_mut().zip(&v[q]).for_each(|(a, b)| *a += b * c);
                hx.iter_mut().zip(&hv[q]).for_each(|(a, b)| *a += b * c);
            }
            xs.push(x);
            hxs.push(hx);
            thetas.push(e.eigenvalues[j]);
        }
        let mut first_bad = None;
        let mut worst: f64 = 0.0;
        for j in 0..k {
            let r: f64 = hxs[j].iter().zip(&xs[j]).map(|(a, b)| (a - b * thetas[j]).norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(r / thetas[j].abs().max(1.0));
            if r > tol * thetas[j].abs().max(1.0) && first_bad.is_none() {
                first_bad = Some(j);
            }
        }
        best_res = best_res.min(worst);
        let Some(j) = first_bad else {
            return Ok((0..k).map(|j| Eigenpair { value: thetas[j], vector: xs[j].clone() }).collect());
        };
        next = hxs[j].iter().zip(&xs[j]).map(|(a, b)| a - b * thetas[j]).collect();
        t = (0..nk).map(|r| (0..nk).map(|c| if r == c { C64::new(thetas[r], 0.0) } else { zero }).collect()).collect();
        v = xs;
        hv = hxs;
    }
    Err(Error::NoConvergence { residual: best_res, iterations: MAX_RESTARTS })
}

/// The `k` smallest eigenpairs, ascending, with residual ≤ tol·max(1, |ε|).
///
/// Dense diagonalization below [`DENSE_LIMIT`], otherwise thick-restart Lanczos with
/// full reorthogonalization. Krylov methods see one copy of an exactly degenerate
/// eigenvalue per start vector, so the result is re-checked in the complement of the
/// pairs found until no lower eigenvalue turns up. Deterministic (fixed seed).
pub fn extremal_eigs(op: &SparseOperator, k: usize, tol: f64) -> Result<Vec<Eigenpair>> {
    if k == 0 || k > op.dim() {
        return Err(Error::Dimension(format!("requested {k} eigenpairs of a {}-dim operator", op.dim())));
    }
    if op.dim() <= DENSE_LIMIT {
        return Ok(dense_eigs(op).into_iter().take(k).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut found = thick_restart(op, k, &[], tol, &mut rng)?;
    let mut locked: Vec<Vec<C64>> = found.iter().map(|p| p.vector.clone()).collect();
    while locked.len() < op.dim() {
        let extra = thick_restart(op, 1, &locked, tol, &mut rng)?.remove(0);
        let kth = found[found.len() - 1].value;
        if extra.value >= kth - tol * kth.abs().max(1.0) {
            break;
        }
        locked.push(extra.vector.clone());
        found.push(extra);
        found.sort_by(|a, b| a.value.total_cmp(&b.value));
        found.truncate(k);
    }
    Ok(found)
}

/// Per-state lower bound on the block energy: 𝓔 × violated pair penalties.
pub fn penalty_floors(c: &Circuit, basis: &Basis, scale: EnergyScale) -> Vec<f64> {
    let mut pos = vec![0; c.m()];
    (0..basis.len())
        .map(|k| {
            basis.state_into(k, &mut pos);
            scale.value() * penalty_count(c, &pos) as f64
        })
        .collect()
}

/// The `count` smallest eigenvalues (with multiplicity) of a block-structured operator.
///
/// `floors[i]` must lower-bound every eigenvalue of the block containing state `i`;
/// the block floor is the minimum over its states.
pub fn lowest_by_blocks(
    op: &SparseOperator,
    floors: &[f64],
    count: usize,
    tol: f64,
    want_vectors: bool,
) -> Result<Vec<Eigenpair>> {
    let mut blocks: Vec<(f64, Vec<usize>)> =
        op.components().into_iter().map(|b| (b.iter().map(|&i| floors[i]).fold(f64::INFINITY, f64::min), b)).collect();
    blocks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1[0].cmp(&b.1[0])));
    let mut best: Vec<Eigenpair> = Vec::new();
    for (floor, block) in blocks {
        if best.len() == count && floor >= best[count - 1].value {
            break;
        }
        let sub = op.restrict(&block);
        let k = count.min(block.len());
        let pairs = if want_vectors || sub.dim() > DENSE_LIMIT {
            extremal_eigs(&sub, k, tol)?
        } else {
            dense_eigenvalues(&sub).into_iter().take(k).map(|value| Eigenpair { value, vector: Vec::new() }).collect()
        };
        for p in pairs {
            let vector = if want_vectors {
                let mut v = vec![C64::new(0.0, 0.0); op.dim()];
                for (x, &i) in p.vector.iter().zip(&block) {
                    v[i] = *x;
                }
                v
            } else {
                Vec::new()
            };
            best.push(Eigenpair { value: p.value, vector });
        }
        best.sort_by(|a, b| a.value.total_cmp(&b.value));
        best.truncate(count);
    }
    Ok(best)
}

/// Options shared by the gap computations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub scale: EnergyScale,
    pub convention: Convention,
    pub tol: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { scale: EnergyScale::default(), convention: Convention::Shifted, tol: 1e-10 }
    }
}

/// Cached operators for repeated spectral queries on one circuit.
///
/// Gates are gauged to identities first; this preserves the spectrum and makes
/// the operator block diagonal in the bit values.
#[derive(Clone)]
pub struct GapSolver {
    circuit: Circuit,
    gauged: Circuit,
    opts: SpectralOptions,
    basis: Basis,
    skeleton: Skeleton,
    floors: Vec<f64>,
    // per active qubit A: (sector basis, skeleton without the entry hop of A, floors)
    e1_parts: Vec<Option<(Basis, Skeleton, Vec<f64>)>>,
}

impl GapSolver {
    pub fn new(c: &Circuit, opts: SpectralOptions) -> Result<GapSolver> {
        let gauged = c.with_identity_gates();
        let basis = enumerate_basis(&gauged)?;
        let aopts = AssemblyOptions { scale: opts.scale, convention: opts.convention, omit_entry_hop: None };
        let skeleton = Skeleton::new(&gauged, &basis, &aopts)?;
        let floors = penalty_floors(&gauged, &basis, opts.scale);
        Ok(GapSolver { circuit: c.clone(), gauged, opts, basis, skeleton, floors, e1_parts: vec![None; c.m()] })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn schedule(&self) -> Schedule {
        Schedule { m: self.circuit.m(), convention: self.opts.convention }
    }

    /// Qubit whose ramp is running at λ.
    pub fn active_qubit(&self, lambda: f64) -> usize {
        self.schedule().active_qubit(lambda)
    }

    /// The `k` lowest eigenvalues of H(λ).
    pub fn lowest(&self, lambda: f64, k: usize) -> Result<Vec<f64>> {
        let h = self.skeleton.at(lambda)?;
        Ok(lowest_by_blocks(&h, &self.floors, k, self.opts.tol, false)?.into_iter().map(|p| p.value).collect())
    }

    /// (e0, e1, e1 − e0).
    pub fn gap(&self, lambda: f64) -> Result<(f64, f64, f64)> {
        let v = self.lowest(lambda, 2)?;
        Ok((v[0], v[1], v[1] - v[0]))
    }

    fn e1_part(&mut self, a: usize) -> Result<&(Basis, Skeleton, Vec<f64>)> {
        if self.e1_parts[a - 1].is_none() {
            let b = sector(&self.basis, Some(0), a)?;
            let aopts =
                AssemblyOptions { scale: self.opts.scale, convention: self.opts.convention, omit_entry_hop: Some(a) };
            let sk = Skeleton::new(&self.gauged, &b, &aopts)?;
            let fl = penalty_floors(&self.gauged, &b, self.opts.scale);
            self.e1_parts[a - 1] = Some((b, sk, fl));
        }
        Ok(self.e1_parts[a - 1].as_ref().unwrap())
    }

    /// Lowest nonzero eigenvalue of H(λ) − h^{o_A}_A(λ_A 𝓘) on the all-zero-bit block
    /// with the qubits above the active one quiescent. Also returns the kernel dimension.
    pub fn e1(&mut self, lambda: f64) -> Result<(f64, usize)> {
        let a = self.active_qubit(lambda);
        let tol = self.opts.tol;
        let zero = ZERO_TOL * self.opts.scale.value();
        let (_, sk, fl) = self.e1_part(a)?;
        let h = sk.at(lambda)?;
        let mut count = 3;
        loop {
            let v = lowest_by_blocks(&h, fl, count.min(h.dim()), tol, false)?;
            let kernel = v.iter().filter(|p| p.value.abs() <= zero).count();
            if let Some(p) = v.iter().find(|p| p.value > zero) {
                return Ok((p.value, kernel));
            }
            if count >= h.dim() {
                return Err(Error::EmptySector("no nonzero eigenvalue in the zero-bit block".into()));
            }
            count *= 2;
        }
    }

    /// Ground-state occupation of the active qubit's rest site with bit 0.
    pub fn rest_occupation(&self, lambda: f64) -> Result<f64> {
        let a = self.active_qubit(lambda);
        let pf = crate::basis::penalty_free_basis(&self.circuit, None, &[]);
        let psi = history_ground_state_with(&self.circuit, lambda, &pf, self.opts.convention, SweepOrder::Ascending)?;
        psi.occupation(a, self.circuit.window(a).rest(), Some(0))
    }
}

/// Gap of H(λ): difference of its two smallest eigenvalues.
pub fn gap(c: &Circuit, lambda: f64) -> Result<f64> {
    Ok(GapSolver::new(c, SpectralOptions::default())?.gap(lambda)?.2)
}

/// See [`GapSolver::e1`].
pub fn e1(c: &Circuit, lambda: f64) -> Result<f64> {
    Ok(GapSolver::new(c, SpectralOptions::default())?.e1(lambda)?.0)
}

/// Lower bound on the ground energy of h + δh from the spectrum of h:
/// `e0 + (e1−e0)x / ((e1−e0) + x + ‖δh‖)`, minimized over the supplied
/// ground-state expectations x = ⟨ψ0|δh|ψ0⟩.
pub fn sum_bound(e0: f64, e1: f64, expectations: &[f64], norm_dh: f64) -> Result<f64> {
    if e1 < e0 {
        return Err(Error::Domain(format!("e1 = {e1} below e0 = {e0}")));
    }
    if expectations.is_empty() {
        return Err(Error::Domain("no ground-state expectations supplied".into()));
    }
    let d = e1 - e0;
    let mut best = f64::INFINITY;
    for &x in expectations {
        if x < 0.0 || x > norm_dh {
            return Err(Error::Domain(format!("expectation {x} outside [0, ‖δh‖ = {norm_dh}]")));
        }
        let denom = d + x + norm_dh;
        let b = if denom > 0.0 { e0 + d * x / denom } else { e0 };
        best = best.min(b);
    }
    Ok(best)
}

/// Closed-form gap lower bound for the nearest-neighbour layout of depth N:
/// 𝓔 / ((12M(N+2M−4)+1)(4(N+4M−4)+1)(2N)), in units of 𝓔.
pub fn gap_bound_1d(m: usize, big_n: usize) -> Result<f64> {
    let valid = m >= 3 && m % 2 == 1 && big_n >= 2 * m + 3 && (big_n - 3).is_multiple_of(2) && {
        let two_n = (big_n - 3) / 2 - m;
        two_n.is_multiple_of(4) && two_n / 2 + 1 >= m
    };
    if !valid {
        return Err(Error::Domain(format!("(M = {m}, N = {big_n}) is not a nearest-neighbour configuration")));
    }
    let (m, n) = (m as f64, big_n as f64);
    Ok(1.0 / ((12.0 * m * (n + 2.0 * m - 4.0) + 1.0) * (4.0 * (n + 4.0 * m - 4.0) + 1.0) * (2.0 * n)))
}

/// One row of a gap scan. All energies in units of 𝓔.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapScanRow {
    pub lambda: f64,
    pub active: usize,
    pub e0: f64,
    pub e1_full: f64,
    pub gap: f64,
    pub e1_thm3: f64,
    pub kernel: usize,
    pub occupation: f64,
    pub bound_thm3: f64,
    pub bound_thm4: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapScan {
    pub rows: Vec<GapScanRow>,
}

impl GapScan {
    pub fn min_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min)
    }

    /// Minimum over the grid of (1/4) e1(λ) × occupation.
    pub fn occupation_bound(&self) -> f64 {
        self.rows.iter().map(|r| r.bound_thm3).fold(f64::INFINITY, f64::min)
    }
}

/// Parse `a:b:steps` into `steps` evenly spaced points from a to b inclusive.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Domain(format!("grid '{spec}' is not of the form a:b:steps"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let k: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b || k == 0 {
        return Err(Error::Domain(format!("grid '{spec}' must satisfy 0 ≤ a ≤ b ≤ 1 and steps ≥ 1")));
    }
    if k == 1 {
        return Ok(vec![a]);
    }
    Ok((0..k).map(|i| if i + 1 == k { b } else { a + (b - a) * i as f64 / (k - 1) as f64 }).collect())
}

/// Exact gap, e1 and the occupation bound at every grid point (parallel over λ).
pub fn gap_scan(c: &Circuit, grid: &[f64], opts: SpectralOptions) -> Result<GapScan> {
    let base = GapSolver::new(c, opts)?;
    let bound_1d = match c.layout() {
        crate::circuit::Layout::OneD => gap_bound_1d(c.m(), c.depth()).ok(),
        _ => None,
    };
    // warm the per-qubit caches once so the parallel section can clone them
    let mut warm = base;
    for &l in grid {
        let a = warm.active_qubit(l);
        warm.e1_part(a)?;
    }
    let rows: Result<Vec<GapScanRow>> = grid
        .par_iter()
        .map(|&lambda| {
            let mut s = warm.clone();
            let (e0, e1_full, g) = s.gap(lambda)?;
            let (e1v, kernel) = s.e1(lambda)?;
            let occ = s.rest_occupation(lambda)?;
            Ok(GapScanRow {
                lambda,
                active: s.active_qubit(lambda),
                e0,
                e1_full,
                gap: g,
                e1_thm3: e1v,
                kernel,
                occupation: occ,
                bound_thm3: 0.25 * e1v * occ,
                bound_thm4: bound_1d,
            })
        })
        .collect();
    Ok(GapScan { rows: rows? })
}

/// Minimum over the grid of (1/4) e1(λ) × occupation of the active rest site.
pub fn gap_bound_thm3(c: &Circuit, grid: &[f64]) -> Result<f64> {
    Ok(gap_scan(c, grid, SpectralOptions::default())?.occupation_bound())
}

/// Closed-form rest-site occupation of the active qubit for the nearest-neighbour layout.
pub fn analytic_rest_occupation(m: usize, big_n: usize, active: usize, lambda_a: f64) -> f64 {
    let l2 = lambda_a * lambda_a;
    if active < m {
        1.0 / (1.0 + 3.0 * l2)
    } else {
        1.0 / (1.0 + (big_n as f64 - 4.0) * l2)
    }
}
