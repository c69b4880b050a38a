//! Spectral lower bounds on configuration graphs from explicit path families.
//!
//! A path family moves every vertex along graph edges for T steps so that the
//! end map is a bijection and adjacent starting pairs land on opposite sides of
//! the median split of φ. If no edge is used more than B times, the Rayleigh
//! quotient of φ is at least 2𝓔/((2T+1)(2B+1)). The certifier checks all four
//! conditions and counts B exactly; the constructions below build such families
//! for chains, grids and the gate-constrained configuration graphs.
//!
//! Product-shaped graphs are handled one axis at a time. Reassignments along the
//! higher axes are computed first (each balancing signs on the cross-sections of
//! the next), the lowest axis is routed by the alternating chain rule, and in
//! time the lowest axis moves first, so that the composed end map carries each
//! adjacent pair along axis 1 onto opposite signs.

use crate::basis::{penalty_free_basis, penalty_free_vertices, Pin};
use crate::circuit::{build_1d_circuit, Circuit};
use crate::error::{Error, Result};
use crate::hamiltonian::{AssemblyOptions, Skeleton};
use nalgebra::{DMatrix, SymmetricEigen};
use petgraph::graph::UnGraph;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Which configuration graph to build.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphSpec {
    /// Path graph on `n1` vertices, coordinates 1..=n1.
    Chain { n1: usize },
    /// Cartesian product of chains, coordinates 1..=N_α on every axis.
    Grid { dims: Vec<usize> },
    /// The M-qubit chain with a two-qubit gate at every interior step (odd M, even N).
    GateGraph { m: usize, n: usize },
    /// Time-valid tuples of the generated nearest-neighbour circuit with M qubits
    /// and n core layers, qubit M past its rest site, edges from the hops of H(1).
    FromCircuit { m: usize, n: usize },
}

/// Shape of the coordinate moves available to the sweep construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepKind {
    /// Lower coordinates in {0,1}; one edge per exchange.
    Binary,
    /// Lower coordinates in {0,1,2,3}; three-edge exchanges, two-edge final advances.
    Quaternary,
}

impl SweepKind {
    fn half(self) -> usize {
        match self {
            SweepKind::Binary => 1,
            SweepKind::Quaternary => 2,
        }
    }

    /// Steps allotted to one unit move along axis `alpha` (1-based).
    fn unit(self, alpha: usize) -> usize {
        match self {
            SweepKind::Binary => 2 * alpha,
            SweepKind::Quaternary => 6 * alpha,
        }
    }
}

/// Undirected unit-weight graph on integer coordinate tuples.
///
/// Vertices are ordered with axis 1 varying fastest.
#[derive(Clone, Debug)]
pub struct Graph {
    spec: GraphSpec,
    coords: Vec<Vec<usize>>,
    raw: Option<Vec<Vec<usize>>>,
    index: HashMap<Vec<usize>, usize>,
    adj: Vec<Vec<usize>>,
    sweep: Option<SweepKind>,
    depth: usize,
}

fn axis_major_order(v: &mut [Vec<usize>]) {
    v.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
}

impl Graph {
    fn assemble(
        spec: GraphSpec,
        coords: Vec<Vec<usize>>,
        raw: Option<Vec<Vec<usize>>>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        sweep: Option<SweepKind>,
        depth: usize,
    ) -> Graph {
        let index: HashMap<Vec<usize>, usize> = coords.iter().cloned().enumerate().map(|(k, c)| (c, k)).collect();
        let mut adj = vec![Vec::new(); coords.len()];
        for (a, b) in edges {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        Graph { spec, coords, raw, index, adj, sweep, depth }
    }

    pub fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.coords.first().map_or(0, |c| c.len())
    }

    pub fn coords(&self, v: usize) -> &[usize] {
        &self.coords[v]
    }

    /// Underlying position tuple (k coordinates) for relabelled graphs.
    pub fn raw(&self, v: usize) -> Option<&[usize]> {
        self.raw.as_ref().map(|r| r[v].as_slice())
    }

    pub fn index_of(&self, coords: &[usize]) -> Option<usize> {
        self.index.get(coords).copied()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Each edge once, as (smaller, larger).
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(a, l)| l.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn sweep_kind(&self) -> Option<SweepKind> {
        self.sweep
    }

    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut l = DMatrix::zeros(n, n);
        for (a, b) in self.edges() {
            l[(a, b)] -= 1.0;
            l[(b, a)] -= 1.0;
            l[(a, a)] += 1.0;
            l[(b, b)] += 1.0;
        }
        l
    }

    /// Second-smallest Laplacian eigenvalue (dense).
    pub fn fiedler(&self) -> Result<f64> {
        self.laplacian_spectrum().map(|s| s[1])
    }

    /// Second-smallest Laplacian eigenvalue and a unit eigenvector for it.
    pub fn fiedler_vector(&self) -> Result<(f64, Vec<f64>)> {
        if self.len() < 2 {
            return Err(Error::Graph("needs at least two vertices".into()));
        }
        let e = SymmetricEigen::new(self.laplacian());
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
        let k = order[1];
        Ok((e.eigenvalues[k], e.eigenvectors.column(k).iter().copied().collect()))
    }

    pub fn laplacian_spectrum(&self) -> Result<Vec<f64>> {
        if self.len() < 2 {
            return Err(Error::Graph("needs at least two vertices".into()));
        }
        let mut v: Vec<f64> = SymmetricEigen::new(self.laplacian()).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        Ok(v)
    }

    /// Inclusive value range of every axis, if the vertex set is the full box.
    fn product_ranges(&self) -> Result<Vec<(usize, usize)>> {
        let d = self.dims();
        let mut r = vec![(usize::MAX, 0); d];
        for c in &self.coords {
            for (k, &x) in c.iter().enumerate() {
                r[k].0 = r[k].0.min(x);
                r[k].1 = r[k].1.max(x);
            }
        }
        let size: usize = r.iter().map(|(a, b)| b - a + 1).product();
        if size != self.len() {
            return Err(Error::Graph(format!(
                "{} vertices do not fill the coordinate box of {size} points",
                self.len()
            )));
        }
        Ok(r)
    }
}

pub fn build_graph(spec: &GraphSpec) -> Result<Graph> {
    match spec {
        GraphSpec::Chain { n1 } => grid(spec.clone(), &[*n1]),
        GraphSpec::Grid { dims } => grid(spec.clone(), dims),
        GraphSpec::GateGraph { m, n } => gate_graph(*m, *n),
        GraphSpec::FromCircuit { m, n } => {
            let c = build_1d_circuit(*m, *n, &[])?;
            let mut g = from_circuit(&c)?;
            g.spec = spec.clone();
            Ok(g)
        }
    }
}

fn grid(spec: GraphSpec, dims: &[usize]) -> Result<Graph> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Graph(format!("every axis needs at least one vertex, got {dims:?}")));
    }
    let total: usize = dims.iter().product();
    let mut coords = Vec::with_capacity(total);
    for mut k in 0..total {
        let mut c = Vec::with_capacity(dims.len());
        for &d in dims {
            c.push(k % d + 1);
            k /= d;
        }
        coords.push(c);
    }
    let mut edges = Vec::new();
    let mut stride = 1;
    for &d in dims {
        for v in 0..total {
            if (v / stride) % d + 1 < d {
                edges.push((v, v + stride));
            }
        }
        stride *= d;
    }
    Ok(Graph::assemble(spec, coords, None, edges, None, 0))
}

/// Replace every coordinate below the top by its rank among the values allowed
/// once the next coordinate is fixed. Returns `None` if those sets differ in size.
fn relabel(raw: &[Vec<usize>]) -> (Vec<Vec<usize>>, Option<usize>) {
    let d = raw.first().map_or(0, Vec::len);
    let mut allowed: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for k in raw {
        for a in 0..d.saturating_sub(1) {
            allowed.entry((a, k[a + 1])).or_default().push(k[a]);
        }
    }
    for s in allowed.values_mut() {
        s.sort_unstable();
        s.dedup();
    }
    let mut sizes = allowed.values().map(Vec::len);
    let width = sizes.next();
    let uniform = match width {
        Some(w) if allowed.values().all(|s| s.len() == w) => Some(w),
        _ => None,
    };
    let coords = raw
        .iter()
        .map(|k| {
            (0..d)
                .map(|a| if a + 1 == d { k[a] } else { allowed[&(a, k[a + 1])].binary_search(&k[a]).unwrap() })
                .collect()
        })
        .collect();
    (coords, uniform)
}

fn finish_relabelled(
    spec: GraphSpec,
    raw: Vec<Vec<usize>>,
    raw_edges: Vec<(usize, usize)>,
    kinds: &[(usize, SweepKind)],
    depth: usize,
) -> Graph {
    let (coords, width) = relabel(&raw);
    let sweep = width.and_then(|w| kinds.iter().find(|(k, _)| *k == w).map(|(_, s)| *s));
    // reorder so that relabelled axis 1 varies fastest
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&a, &b| coords[a].iter().rev().cmp(coords[b].iter().rev()));
    let mut pos = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        pos[old] = new;
    }
    let coords_sorted = order.iter().map(|&o| coords[o].clone()).collect();
    let raw_sorted = order.iter().map(|&o| raw[o].clone()).collect();
    let edges = raw_edges.into_iter().map(|(a, b)| (pos[a], pos[b]));
    Graph::assemble(spec, coords_sorted, Some(raw_sorted), edges, sweep, depth)
}

fn gate_graph(m: usize, n: usize) -> Result<Graph> {
    if m < 3 || m.is_multiple_of(2) || n < 4 || n % 2 == 1 {
        return Err(Error::Graph(format!("gate graph needs odd M ≥ 3 and even N ≥ 4, got M = {m}, N = {n}")));
    }
    // qubit α (1-based): odd α ranges over 1..=N, even α over 0..=N-1
    let allowed = |alpha: usize, k: usize| -> [usize; 2] {
        if alpha.is_multiple_of(2) {
            if k == 0 {
                [1, 2]
            } else {
                let b = 2 * k.div_ceil(2);
                [b - 1, b]
            }
        } else if k < n {
            let b = 2 * (k / 2);
            [b, b + 1]
        } else {
            [n - 2, n - 1]
        }
    };
    let mut raw: Vec<Vec<usize>> = (1..=n).map(|k| vec![k]).collect();
    for alpha in (2..=m).rev() {
        let mut next = Vec::with_capacity(raw.len() * 2);
        for tail in &raw {
            for v in allowed(alpha, tail[0]) {
                let mut t = Vec::with_capacity(tail.len() + 1);
                t.push(v);
                t.extend_from_slice(tail);
                next.push(t);
            }
        }
        raw = next;
    }
    axis_major_order(&mut raw);
    let index: HashMap<&[usize], usize> = raw.iter().enumerate().map(|(i, k)| (k.as_slice(), i)).collect();
    let mut edges = Vec::new();
    let mut link = |from: usize, moved: &[usize]| {
        let mut k = raw[from].clone();
        for &a in moved {
            k[a] += 1;
        }
        if let Some(&to) = index.get(k.as_slice()) {
            edges.push((from, to));
        }
    };
    for v in 0..raw.len() {
        let k = raw[v].clone();
        if k[m - 1].is_multiple_of(2) {
            link(v, &[m - 1]);
        }
        if k[0] % 2 == 1 {
            link(v, &[0]);
        }
        for a in (0..m - 1).step_by(2) {
            if k[a].is_multiple_of(2) && k[a + 1].is_multiple_of(2) {
                link(v, &[a, a + 1]);
            }
        }
        for a in (1..m - 1).step_by(2) {
            if k[a] % 2 == 1 && k[a + 1] % 2 == 1 {
                link(v, &[a, a + 1]);
            }
        }
        for a in 0..m {
            let alpha = a + 1;
            if (alpha % 2 == 1 && k[a] == n - 1) || (alpha % 2 == 0 && k[a] == 0) {
                link(v, &[a]);
            }
        }
    }
    Ok(finish_relabelled(GraphSpec::GateGraph { m, n }, raw, edges, &[(2, SweepKind::Binary)], n))
}

/// Configuration graph of a circuit at λ = 1: time-valid tuples with the last
/// qubit past its rest site, joined wherever H(1) hops.
pub fn from_circuit(c: &Circuit) -> Result<Graph> {
    let m = c.m();
    let pins = [Pin::at_least(m, c.window(m).o)];
    let gauged = c.with_identity_gates();
    let basis = penalty_free_basis(&gauged, Some(0), &pins);
    let sk = Skeleton::new(&gauged, &basis, &AssemblyOptions::default())?;
    let h = sk.at(1.0)?;
    let mut raw = penalty_free_vertices(&gauged, &pins);
    axis_major_order(&mut raw);
    let index: HashMap<&[usize], usize> = raw.iter().enumerate().map(|(i, k)| (k.as_slice(), i)).collect();
    let to_vertex: Vec<usize> = (0..basis.len()).map(|j| index[basis.state(j).positions.as_slice()]).collect();
    let edges: Vec<(usize, usize)> = h
        .triplets()
        .filter(|&(r, col, v)| r < col && v.norm() > 0.0)
        .map(|(r, col, _)| (to_vertex[r], to_vertex[col]))
        .collect();
    let spec = GraphSpec::FromCircuit { m, n: (c.depth() - 3) / 2 };
    Ok(finish_relabelled(spec, raw, edges, &[(4, SweepKind::Quaternary)], c.depth()))
}

/// Rayleigh quotient Σ_{i∼i′}|ψ(i)−ψ(i′)|² / Σ|ψ(i)|², in units of 𝓔.
pub fn rayleigh(g: &Graph, psi: &[f64]) -> Result<f64> {
    if psi.len() != g.len() {
        return Err(Error::Dimension(format!("{} values for {} vertices", psi.len(), g.len())));
    }
    let den: f64 = psi.iter().map(|x| x * x).sum();
    if den == 0.0 {
        return Err(Error::Domain("Rayleigh quotient of the zero function".into()));
    }
    let num: f64 = g.edges().map(|(a, b)| (psi[a] - psi[b]).powi(2)).sum();
    Ok(num / den)
}

/// φ together with its median split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedFunction {
    phi: Vec<f64>,
    median: f64,
    psi: Vec<f64>,
    positive: Vec<bool>,
}

impl SignedFunction {
    /// Φ is the midpoint of the two middle values; vertices are split by
    /// (ψ, index) order, so ties at the median fall to 𝒩 first.
    pub fn new(phi: Vec<f64>) -> Result<SignedFunction> {
        let n = phi.len();
        if n == 0 || n % 2 == 1 {
            return Err(Error::Graph(format!("the certifier needs an even vertex count, got {n}")));
        }
        if phi.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("φ has non-finite values".into()));
        }
        let sum: f64 = phi.iter().sum();
        let scale: f64 = phi.iter().map(|x| x.abs()).sum();
        if sum.abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::Domain(format!("Σφ = {sum:e} is not zero")));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| phi[a].total_cmp(&phi[b]).then(a.cmp(&b)));
        let median = 0.5 * (phi[order[n / 2 - 1]] + phi[order[n / 2]]);
        let psi = phi.iter().map(|x| x - median).collect();
        let mut positive = vec![false; n];
        for &v in &order[n / 2..] {
            positive[v] = true;
        }
        Ok(SignedFunction { phi, median, psi, positive })
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn median(&self) -> f64 {
        self.median
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    /// Membership in 𝒫 (ψ ≥ 0 side) per vertex.
    pub fn positive(&self) -> &[bool] {
        &self.positive
    }

    pub fn sign(&self, v: usize) -> i32 {
        if self.positive[v] {
            1
        } else {
            -1
        }
    }
}

/// P(i, t) for every vertex over t = 0..=T.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathFamily {
    t: usize,
    paths: Vec<Vec<usize>>,
    /// Congestion cap the construction guarantees, if it comes with one.
    cap: Option<usize>,
}

impl PathFamily {
    pub fn identity(n: usize) -> PathFamily {
        PathFamily { t: 0, paths: (0..n).map(|v| vec![v]).collect(), cap: None }
    }

    /// Every path must have T + 1 entries.
    pub fn from_paths(t: usize, paths: Vec<Vec<usize>>) -> Result<PathFamily> {
        if let Some((v, p)) = paths.iter().enumerate().find(|(_, p)| p.len() != t + 1) {
            return Err(Error::Path(format!("path of vertex {v} has {} entries, expected {}", p.len(), t + 1)));
        }
        Ok(PathFamily { t, paths, cap: None })
    }

    pub fn with_cap(mut self, cap: usize) -> PathFamily {
        self.cap = Some(cap);
        self
    }

    pub fn horizon(&self) -> usize {
        self.t
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn at(&self, v: usize, t: usize) -> usize {
        self.paths[v][t]
    }

    pub fn path(&self, v: usize) -> &[usize] {
        &self.paths[v]
    }

    pub fn cap(&self) -> Option<usize> {
        self.cap
    }

    pub fn end_map(&self) -> Vec<usize> {
        self.paths.iter().map(|p| p[self.t]).collect()
    }

    /// Uses per edge (smaller, larger), counted in one pass over all moves.
    pub fn edge_usage(&self) -> BTreeMap<(usize, usize), usize> {
        let mut m = BTreeMap::new();
        for p in &self.paths {
            for w in p.windows(2) {
                if w[0] != w[1] {
                    *m.entry((w[0].min(w[1]), w[0].max(w[1]))).or_insert(0) += 1;
                }
            }
        }
        m
    }

    pub fn congestion(&self) -> usize {
        self.edge_usage().values().copied().max().unwrap_or(0)
    }
}

/// Literal δ-sum for B_{i,i′} of one edge. Quadratic in the family size; for cross-checks.
pub fn congestion_of_edge(pf: &PathFamily, a: usize, b: usize) -> usize {
    let mut count = 0;
    for p in &pf.paths {
        for t in 0..pf.t {
            if (p[t] == a && p[t + 1] == b) || (p[t + 1] == a && p[t] == b) {
                count += 1;
            }
        }
    }
    count
}

/// Outcome of one path-family condition; `witness` says where it first fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub ok: bool,
    pub witness: Option<String>,
}

impl Check {
    fn pass() -> Check {
        Check { ok: true, witness: None }
    }

    fn fail(w: String) -> Check {
        Check { ok: false, witness: Some(w) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conditions {
    pub identity_start: Check,
    pub single_steps: Check,
    pub bijective_end: Check,
    pub opposite_pairs: Check,
    /// Adjacent starting pairs whose end points lie in opposite halves.
    pub matching: Vec<(usize, usize)>,
}

impl Conditions {
    pub fn ok(&self) -> bool {
        self.identity_start.ok && self.single_steps.ok && self.bijective_end.ok && self.opposite_pairs.ok
    }

    fn first_failure(&self) -> Option<String> {
        [
            ("(I)", &self.identity_start),
            ("(II)", &self.single_steps),
            ("(III)", &self.bijective_end),
            ("(IV)", &self.opposite_pairs),
        ]
        .iter()
        .find(|(_, c)| !c.ok)
        .map(|(n, c)| format!("condition {n} fails: {}", c.witness.clone().unwrap_or_default()))
    }
}

/// Evaluate conditions (I)–(IV) without computing a bound.
pub fn check_conditions(g: &Graph, sf: &SignedFunction, pf: &PathFamily) -> Result<Conditions> {
    let n = g.len();
    if pf.len() != n || sf.phi.len() != n {
        return Err(Error::Dimension(format!(
            "graph has {n} vertices, path family {}, function {}",
            pf.len(),
            sf.phi.len()
        )));
    }
    let identity_start = match (0..n).find(|&v| pf.paths[v][0] != v) {
        Some(v) => Check::fail(format!("P({v}, 0) = {}", pf.paths[v][0])),
        None => Check::pass(),
    };
    let mut single_steps = Check::pass();
    'outer: for (v, p) in pf.paths.iter().enumerate() {
        for t in 0..pf.t {
            let (a, b) = (p[t], p[t + 1]);
            if a >= n || b >= n {
                single_steps = Check::fail(format!("vertex {v} leaves the graph at t = {}", t + 1));
                break 'outer;
            }
            if a != b && !g.has_edge(a, b) {
                single_steps = Check::fail(format!(
                    "vertex {v} jumps {:?} → {:?} at t = {t} without an edge",
                    g.coords(a),
                    g.coords(b)
                ));
                break 'outer;
            }
        }
    }
    let end = pf.end_map();
    let mut seen = vec![usize::MAX; n];
    let mut bijective_end = Check::pass();
    for (v, &e) in end.iter().enumerate() {
        if e >= n {
            bijective_end = Check::fail(format!("vertex {v} ends outside the graph"));
            break;
        }
        if seen[e] != usize::MAX {
            bijective_end = Check::fail(format!("vertices {} and {v} both end at {:?}", seen[e], g.coords(e)));
            break;
        }
        seen[e] = v;
    }
    let mut matching = Vec::new();
    let opposite_pairs = if bijective_end.ok {
        let mut ug = UnGraph::<(), ()>::with_capacity(n, 0);
        let nodes: Vec<_> = (0..n).map(|_| ug.add_node(())).collect();
        for (a, b) in g.edges() {
            if sf.positive[end[a]] != sf.positive[end[b]] {
                ug.add_edge(nodes[a], nodes[b], ());
            }
        }
        let mm = petgraph::algo::maximum_matching(&ug);
        matching = mm.edges().map(|(a, b)| (a.index().min(b.index()), a.index().max(b.index()))).collect();
        matching.sort_unstable();
        if mm.is_perfect() {
            Check::pass()
        } else {
            let covered: std::collections::HashSet<usize> = matching.iter().flat_map(|&(a, b)| [a, b]).collect();
            let lone = (0..n).find(|v| !covered.contains(v)).unwrap_or(0);
            Check::fail(format!(
                "maximum matching covers {} of {n} vertices; {:?} is unmatched",
                2 * matching.len(),
                g.coords(lone)
            ))
        }
    } else {
        Check::fail("end map is not a bijection".into())
    };
    Ok(Conditions { identity_start, single_steps, bijective_end, opposite_pairs, matching })
}

/// 2/((2T+1)(2B+1)) in units of 𝓔.
pub fn path_bound(t: usize, b: usize) -> f64 {
    2.0 / (((2 * t + 1) * (2 * b + 1)) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedBound {
    pub horizon: usize,
    /// Exact maximum edge use.
    pub congestion: usize,
    /// The construction's stated cap, when it has one.
    pub congestion_cap: Option<usize>,
    /// Whether the exact congestion stays within the cap (None without a cap).
    pub cap_respected: Option<bool>,
    /// Bound with the cap when the cap is respected, else with the exact congestion.
    pub bound: f64,
    /// Bound with the exact congestion (never smaller than `bound`).
    pub bound_exact: f64,
    /// E_φ, the quantity being bounded.
    pub rayleigh: f64,
    pub conditions: Conditions,
}

/// Verify (I)–(IV), count congestion, and return the path-family bound.
pub fn certify_path(g: &Graph, sf: &SignedFunction, pf: &PathFamily) -> Result<CertifiedBound> {
    if g.len() % 2 == 1 {
        return Err(Error::Graph(format!("the certifier needs an even vertex count, got {}", g.len())));
    }
    let conditions = check_conditions(g, sf, pf)?;
    if let Some(w) = conditions.first_failure() {
        return Err(Error::Path(w));
    }
    let b = pf.congestion();
    let cap_respected = pf.cap.map(|c| b <= c);
    let bound_exact = path_bound(pf.t, b);
    let bound = match pf.cap {
        Some(c) if b <= c => path_bound(pf.t, c),
        _ => bound_exact,
    };
    Ok(CertifiedBound {
        horizon: pf.t,
        congestion: b,
        congestion_cap: pf.cap,
        cap_respected,
        bound,
        bound_exact,
        rayleigh: rayleigh(g, &sf.phi)?,
        conditions,
    })
}

/// Certificate document for the CLI.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub graph: GraphSpec,
    pub vertices: usize,
    pub edges: usize,
    pub median: f64,
    #[serde(flatten)]
    pub result: CertifiedBound,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<Vec<Vec<Vec<usize>>>>,
}

impl Certificate {
    pub fn new(
        g: &Graph,
        sf: &SignedFunction,
        pf: &PathFamily,
        result: CertifiedBound,
        with_paths: bool,
    ) -> Certificate {
        let paths =
            with_paths.then(|| pf.paths.iter().map(|p| p.iter().map(|&v| g.coords(v).to_vec()).collect()).collect());
        Certificate {
            graph: g.spec.clone(),
            vertices: g.len(),
            edges: g.edge_count(),
            median: sf.median,
            result,
            paths,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(crate::numfmt::to_json_string(self)?)
    }
}

// ---------------------------------------------------------------------------
// Constructions

/// How one unit of motion along an axis is realized.
#[derive(Clone, Copy)]
enum Mover {
    Direct,
    Sweep(SweepKind),
}

struct Layout<'g> {
    g: &'g Graph,
    ranges: Vec<(usize, usize)>,
    mover: Mover,
    /// Steps allotted per stage, indexed by axis.
    stage: Vec<usize>,
}

impl<'g> Layout<'g> {
    fn vertex(&self, c: &[usize]) -> Result<usize> {
        self.g.index_of(c).ok_or_else(|| Error::Path(format!("configuration {c:?} is not a vertex")))
    }

    fn step(&self, from: &[usize], to: &[usize], out: &mut Vec<usize>) -> Result<()> {
        let (a, b) = (self.vertex(from)?, self.vertex(to)?);
        if !self.g.has_edge(a, b) {
            return Err(Error::Path(format!("no edge {from:?} → {to:?}")));
        }
        out.push(b);
        Ok(())
    }

    fn edge_exists(&self, from: &[usize], to: &[usize]) -> bool {
        match (self.g.index_of(from), self.g.index_of(to)) {
            (Some(a), Some(b)) => self.g.has_edge(a, b),
            _ => false,
        }
    }

    fn unit(&self, axis: usize) -> usize {
        match self.mover {
            Mover::Direct => 1,
            Mover::Sweep(k) => k.unit(axis + 1),
        }
    }

    /// Vertices visited (after `start`) while raising coordinate `axis` by one.
    fn advance(&self, start: &[usize], axis: usize) -> Result<Vec<usize>> {
        let mut target = start.to_vec();
        target[axis] += 1;
        let mut out = Vec::new();
        if self.edge_exists(start, &target) {
            self.step(start, &target, &mut out)?;
            return Ok(out);
        }
        let kind = match self.mover {
            Mover::Direct => {
                return Err(Error::Path(format!("no edge {start:?} → {target:?}")));
            }
            Mover::Sweep(k) => k,
        };
        if axis == 0 {
            return Err(Error::Path(format!("axis 1 cannot advance from {start:?}")));
        }
        let half = kind.half();
        let mut cur = start.to_vec();
        let mut final_done = false;
        if cur[axis - 1] >= half {
            self.final_advance(&mut cur, axis, kind, &mut out)?;
            final_done = true;
        }
        // downward sweep: lift the first coordinate that can rise on its own,
        // cascading high values upward through exchanges on the way
        let mut b = axis - 1;
        loop {
            if self.try_lift(&mut cur, b, half, &mut out)? {
                break;
            }
            if b == 0 {
                return Err(Error::Path(format!("downward sweep from {start:?} found no lift")));
            }
            if cur[b - 1] >= half {
                self.exchange(&mut cur, b, kind, &mut out)?;
            }
            b -= 1;
        }
        // upward sweep: carry the lifted value back up to axis − 1
        for beta in b + 1..axis {
            if cur[beta - 1] >= half && cur[beta] < half {
                self.exchange(&mut cur, beta, kind, &mut out)?;
            }
        }
        if !final_done {
            self.final_advance(&mut cur, axis, kind, &mut out)?;
        }
        if cur != target {
            return Err(Error::Path(format!("sweep from {start:?} ended at {cur:?}, not {target:?}")));
        }
        Ok(out)
    }

    /// Raise `cur[b]` by `half` along single-coordinate edges, if they all exist.
    fn try_lift(&self, cur: &mut Vec<usize>, b: usize, half: usize, out: &mut Vec<usize>) -> Result<bool> {
        let mut probe = cur.clone();
        for _ in 0..half {
            let mut next = probe.clone();
            next[b] += 1;
            if !self.edge_exists(&probe, &next) {
                return Ok(false);
            }
            probe = next;
        }
        for _ in 0..half {
            let mut next = cur.clone();
            next[b] += 1;
            self.step(cur, &next, out)?;
            *cur = next;
        }
        Ok(true)
    }

    /// Move `half` from coordinate b−1 to coordinate b.
    fn exchange(&self, cur: &mut Vec<usize>, b: usize, kind: SweepKind, out: &mut Vec<usize>) -> Result<()> {
        let moves: &[(usize, usize)] = match (kind, cur[b - 1], cur[b]) {
            (SweepKind::Binary, 1, 0) => &[(0, 1)],
            (SweepKind::Quaternary, 2, 0) => &[(2, 1), (3, 1), (0, 2)],
            (SweepKind::Quaternary, 3, 0) => &[(3, 1), (0, 2), (1, 2)],
            (SweepKind::Quaternary, 2, 1) => &[(3, 1), (0, 2), (0, 3)],
            (SweepKind::Quaternary, 3, 1) => &[(0, 2), (1, 2), (1, 3)],
            (_, x, y) => return Err(Error::Path(format!("no exchange from ({x}, {y}) at axis {} in {cur:?}", b + 1))),
        };
        for &(x, y) in moves {
            let mut next = cur.clone();
            next[b - 1] = x;
            next[b] = y;
            self.step(cur, &next, out)?;
            *cur = next;
        }
        Ok(())
    }

    /// Lower coordinate axis−1 by `half` while raising `axis` by one.
    fn final_advance(&self, cur: &mut Vec<usize>, axis: usize, kind: SweepKind, out: &mut Vec<usize>) -> Result<()> {
        let i = cur[axis];
        let moves: Vec<(usize, usize)> = match (kind, cur[axis - 1]) {
            (SweepKind::Binary, 1) => vec![(0, i + 1)],
            (SweepKind::Quaternary, 2) => vec![(3, i), (0, i + 1)],
            (SweepKind::Quaternary, 3) => vec![(0, i + 1), (1, i + 1)],
            (_, x) => return Err(Error::Path(format!("no final advance from {x} at axis {} in {cur:?}", axis + 1))),
        };
        for (x, y) in moves {
            let mut next = cur.clone();
            next[axis - 1] = x;
            next[axis] = y;
            self.step(cur, &next, out)?;
            *cur = next;
        }
        Ok(())
    }

    /// Stitched unit moves from `start` to coordinate value `to` on `axis`,
    /// each padded to the unit length.
    fn travel(&self, start: usize, axis: usize, to: usize) -> Result<Vec<usize>> {
        let unit = self.unit(axis);
        let mut c = self.g.coords(start).to_vec();
        let mut out = Vec::new();
        while c[axis] != to {
            let seg = if to > c[axis] {
                let s = self.advance(&c, axis)?;
                c[axis] += 1;
                s
            } else {
                let mut below = c.clone();
                below[axis] -= 1;
                let mut s = self.advance(&below, axis)?;
                s.pop();
                s.reverse();
                s.push(self.vertex(&below)?);
                c = below;
                s
            };
            if seg.len() > unit {
                return Err(Error::Path(format!("unit move on axis {} took {} > {unit} steps", axis + 1, seg.len())));
            }
            let last = *seg.last().unwrap();
            out.extend_from_slice(&seg);
            out.extend(std::iter::repeat_n(last, unit - seg.len()));
        }
        Ok(out)
    }

    /// Vertices grouped by their coordinates above `axis`, each group ordered with
    /// the lower coordinates fastest.
    fn slices(&self, axis: usize) -> Vec<Vec<usize>> {
        let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for v in 0..self.g.len() {
            groups.entry(self.g.coords(v)[axis + 1..].to_vec()).or_default().push(v);
        }
        groups.into_values().collect()
    }
}

/// Reassignment of coordinate `axis` within every column (fixed other coordinates)
/// so that each cross-section at fixed `axis` value has balanced signs.
fn jshuffle(lay: &Layout, signs: &[bool], axis: usize) -> Result<Vec<usize>> {
    let g = lay.g;
    let (lo, hi) = lay.ranges[axis];
    let rows = hi - lo + 1;
    let mut target = vec![usize::MAX; g.len()];
    for slice in lay.slices(axis) {
        let mut cols: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for &v in &slice {
            let c = g.coords(v);
            let key: Vec<usize> = c[..axis].iter().rev().copied().collect();
            cols.entry(key).or_default().push(v);
        }
        // column members indexed by row value
        let cols: Vec<Vec<usize>> = cols
            .into_values()
            .map(|mut vs| {
                vs.sort_by_key(|&v| g.coords(v)[axis]);
                vs
            })
            .collect();
        let ncol = cols.len();
        if ncol % 2 == 1 {
            return Err(Error::Path(format!("odd cross-section size {ncol} on axis {}", axis + 1)));
        }
        let mut remaining: Vec<Vec<bool>> = vec![vec![true; rows]; ncol];
        for r in 0..rows {
            let mut forced = Vec::new();
            let mut free = Vec::new();
            let (mut n_pos, mut n_neg) = (0, 0);
            for (k, col) in cols.iter().enumerate() {
                let left: Vec<bool> = (0..rows).filter(|&j| remaining[k][j]).map(|j| signs[col[j]]).collect();
                if left.iter().all(|&s| s) {
                    n_pos += 1;
                    forced.push(k);
                } else if left.iter().all(|&s| !s) {
                    n_neg += 1;
                    forced.push(k);
                } else {
                    free.push(k);
                }
            }
            if n_pos > ncol / 2 || n_neg > ncol / 2 {
                return Err(Error::Path(format!(
                    "cross-section {r} of axis {} cannot be balanced ({n_pos} forced positive, {n_neg} forced negative)",
                    axis + 1
                )));
            }
            let mut pick = |k: usize, want: Option<bool>| -> usize {
                let j = (0..rows).find(|&j| remaining[k][j] && want.is_none_or(|w| signs[cols[k][j]] == w)).unwrap();
                remaining[k][j] = false;
                j
            };
            for &k in &forced {
                let j = pick(k, None);
                target[cols[k][r]] = cols[k][j];
            }
            let need_neg = ncol / 2 - n_neg;
            for (q, &k) in free.iter().enumerate() {
                let j = pick(k, Some(q >= need_neg));
                target[cols[k][r]] = cols[k][j];
            }
        }
    }
    Ok(target)
}

/// Alternating chain rule along axis 1: in each fiber, the 2a-th position goes to
/// the a-th negative vertex and the (2a−1)-th to the a-th positive one.
fn chain_rule(lay: &Layout, signs: &[bool]) -> Result<Vec<usize>> {
    let g = lay.g;
    let mut target = vec![usize::MAX; g.len()];
    for fiber in lay.slices(0) {
        let pos: Vec<usize> = fiber.iter().copied().filter(|&v| signs[v]).collect();
        let neg: Vec<usize> = fiber.iter().copied().filter(|&v| !signs[v]).collect();
        if pos.len() != neg.len() {
            return Err(Error::Path(format!(
                "fiber at {:?} has {} positive and {} negative vertices",
                &g.coords(fiber[0])[1..],
                pos.len(),
                neg.len()
            )));
        }
        for (x, &v) in fiber.iter().enumerate() {
            target[v] = if x % 2 == 1 { neg[x / 2] } else { pos[x / 2] };
        }
    }
    Ok(target)
}

fn product_family(lay: &Layout, sf: &SignedFunction, cap: usize) -> Result<PathFamily> {
    let g = lay.g;
    let d = g.dims();
    let mut maps: Vec<Vec<usize>> = vec![Vec::new(); d];
    let mut chi: Vec<bool> = sf.positive.clone();
    for axis in (1..d).rev() {
        let j = jshuffle(lay, &chi, axis)?;
        chi = j.iter().map(|&u| chi[u]).collect();
        maps[axis] = j;
    }
    maps[0] = chain_rule(lay, &chi)?;
    let t: usize = lay.stage.iter().sum();
    let mut paths = Vec::with_capacity(g.len());
    for v in 0..g.len() {
        let mut p = Vec::with_capacity(t + 1);
        p.push(v);
        let mut u = v;
        for axis in 0..d {
            let dest = maps[axis][u];
            let seg = lay.travel(u, axis, g.coords(dest)[axis])?;
            if seg.len() > lay.stage[axis] {
                return Err(Error::Path(format!(
                    "stage {} needs {} steps, horizon is {}",
                    axis + 1,
                    seg.len(),
                    lay.stage[axis]
                )));
            }
            p.extend_from_slice(&seg);
            if p.last() != Some(&dest) {
                return Err(Error::Path(format!("stage {} missed its target", axis + 1)));
            }
            p.extend(std::iter::repeat_n(dest, lay.stage[axis] - seg.len()));
            u = dest;
        }
        paths.push(p);
    }
    Ok(PathFamily { t, paths, cap: Some(cap) })
}

fn direct_layout(g: &Graph) -> Result<Layout<'_>> {
    let ranges = g.product_ranges()?;
    let stage: Vec<usize> = ranges.iter().map(|(a, b)| b - a + 1).collect();
    Ok(Layout { g, ranges, mover: Mover::Direct, stage })
}

/// The single-axis family for a chain.
pub fn construct_path_chain(g: &Graph, sf: &SignedFunction) -> Result<PathFamily> {
    if !matches!(g.spec, GraphSpec::Chain { .. }) {
        return Err(Error::Graph("construct_path_chain needs a chain graph".into()));
    }
    construct_path_product(g, sf)
}

/// Axis-by-axis family for a chain or grid: T = Σ N_α, B ≤ max N_α.
pub fn construct_path_product(g: &Graph, sf: &SignedFunction) -> Result<PathFamily> {
    if !matches!(g.spec, GraphSpec::Chain { .. } | GraphSpec::Grid { .. }) {
        return Err(Error::Graph("product construction needs a chain or grid".into()));
    }
    check_len(g, sf)?;
    if g.len() % 2 == 1 {
        return Err(Error::Graph(format!("odd vertex count {}", g.len())));
    }
    let lay = direct_layout(g)?;
    let cap = *lay.stage.iter().max().unwrap();
    product_family(&lay, sf, cap)
}

/// New coordinate along `axis` (1-based) for every vertex, balancing the signs of
/// ψ on each cross-section of fixed axis value. Returned as target vertex ids.
pub fn construct_jshuffle(g: &Graph, sf: &SignedFunction, axis: usize) -> Result<Vec<usize>> {
    check_len(g, sf)?;
    if axis < 2 || axis > g.dims() {
        return Err(Error::Domain(format!("axis {axis} must lie in 2..={}", g.dims())));
    }
    let lay = direct_layout(g)?;
    jshuffle(&lay, &sf.positive, axis - 1)
}

fn check_len(g: &Graph, sf: &SignedFunction) -> Result<()> {
    if sf.phi.len() != g.len() {
        return Err(Error::Dimension(format!("{} values for {} vertices", sf.phi.len(), g.len())));
    }
    Ok(())
}

/// Sweep construction on a gate graph or a circuit's configuration graph.
pub fn construct_sweep_path(g: &Graph, sf: &SignedFunction) -> Result<PathFamily> {
    check_len(g, sf)?;
    let kind = g.sweep.ok_or_else(|| Error::Graph("graph does not have the relabelled sweep structure".into()))?;
    let ranges = g.product_ranges()?;
    let m = g.dims();
    let n = g.depth;
    let (stage, cap): (Vec<usize>, usize) = match kind {
        SweepKind::Binary => {
            let mut s: Vec<usize> = (1..m).map(|a| 2 * a).collect();
            s.push(2 * m * n);
            (s, 2 * (n + 2 * m - 2))
        }
        SweepKind::Quaternary => {
            let mut s: Vec<usize> = (1..m).map(|a| 24 * a).collect();
            s.push(6 * m * (n - 2));
            (s, 2 * (n + 4 * m - 4))
        }
    };
    let lay = Layout { g, ranges, mover: Mover::Sweep(kind), stage };
    product_family(&lay, sf, cap)
}

/// Q along the top axis from `start` (coordinates) for `units` unit moves
/// (negative to retreat), padded; the starting vertex is included.
pub fn sweep_q(g: &Graph, start: &[usize], axis: usize, units: isize) -> Result<Vec<Vec<usize>>> {
    let kind = g.sweep.ok_or_else(|| Error::Graph("graph has no sweep structure".into()))?;
    let lay = Layout { g, ranges: g.product_ranges()?, mover: Mover::Sweep(kind), stage: vec![] };
    let v = lay.vertex(start)?;
    let to = (start[axis - 1] as isize + units) as usize;
    let mut out = vec![start.to_vec()];
    out.extend(lay.travel(v, axis - 1, to)?.into_iter().map(|u| g.coords(u).to_vec()));
    Ok(out)
}

/// Exact horizon and congestion cap of the sweep family, from the closed forms.
pub fn sweep_parameters(kind: SweepKind, m: usize, n: usize) -> (usize, usize) {
    match kind {
        SweepKind::Binary => (m * (2 * n + m - 1), 2 * (n + 2 * m - 2)),
        SweepKind::Quaternary => (6 * m * (n + 2 * m - 4), 2 * (n + 4 * m - 4)),
    }
}

/// The construction matching the graph's kind.
pub fn construct_path(g: &Graph, sf: &SignedFunction) -> Result<PathFamily> {
    match g.spec {
        GraphSpec::Chain { .. } | GraphSpec::Grid { .. } => construct_path_product(g, sf),
        GraphSpec::GateGraph { .. } | GraphSpec::FromCircuit { .. } => construct_sweep_path(g, sf),
    }
}

/// Uniform values on [−1, 1] shifted to zero mean, from a seeded ChaCha8 stream.
pub fn random_balanced(n: usize, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut phi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let mean = phi.iter().sum::<f64>() / n.max(1) as f64;
    phi.iter_mut().for_each(|x| *x -= mean);
    phi
}
