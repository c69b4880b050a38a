//! Gate-model circuits and the two generated layouts.
//!
//! Qubits are labelled `1..=M` and gate times `1..=N`, so that the parity rules
//! of the layouts ("even A", "step 2j+2") read the same way in code as in the usual notation.
//! Qubit `A` occupies the rail sites `o_A − 1 ..= f_A`, where `o_A`/`f_A` are the
//! steps of its first and last gate and `o_A − 1` is the rest site.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layout {
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "all-to-all")]
    AllToAll,
    #[serde(rename = "custom")]
    Custom,
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layout::OneD => "1d",
            Layout::AllToAll => "all-to-all",
            Layout::Custom => "custom",
        })
    }
}

impl FromStr for Layout {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1d" => Ok(Layout::OneD),
            "all-to-all" => Ok(Layout::AllToAll),
            "custom" => Ok(Layout::Custom),
            other => Err(Error::Domain(format!("unknown layout '{other}'"))),
        }
    }
}

/// Largest entry of |U†U − 1|.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let prod = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for r in 0..prod.nrows() {
        for c in 0..prod.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((prod[(r, c)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

fn identity_defect(u: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..u.nrows() {
        for c in 0..u.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((u[(r, c)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// A one- or two-qubit gate at a given step.
///
/// Two-qubit gates are stored with ascending qubit labels; the matrix acts on
/// `|b_lo b_hi⟩` with the lower label as the most significant bit. A gate given
/// in descending order has its tensor factors swapped on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    step: usize,
    qubits: Vec<usize>,
    matrix: CMatrix,
}

impl Gate {
    pub fn new(step: usize, qubits: &[usize], matrix: CMatrix) -> Result<Gate> {
        if step == 0 {
            return Err(Error::InvalidCircuit("gate times are 1-based".into()));
        }
        let dim = match qubits.len() {
            1 => 2,
            2 => 4,
            k => return Err(Error::InvalidCircuit(format!("gate on {k} qubits"))),
        };
        if qubits.contains(&0) {
            return Err(Error::InvalidCircuit("qubit labels are 1-based".into()));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::InvalidCircuit(format!("two-qubit gate at step {step} repeats qubit {}", qubits[0])));
        }
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidCircuit(format!("gate at step {step} on {qubits:?} needs a {dim}x{dim} matrix")));
        }
        let deviation = unitarity_defect(&matrix);
        if deviation > UNITARY_TOL {
            return Err(Error::NonUnitary { step, qubits: qubits.to_vec(), deviation });
        }
        let (qubits, matrix) = if qubits.len() == 2 && qubits[0] > qubits[1] {
            let p = [0usize, 2, 1, 3];
            let swapped = CMatrix::from_fn(4, 4, |r, c| matrix[(p[r], p[c])]);
            (vec![qubits[1], qubits[0]], swapped)
        } else {
            (qubits.to_vec(), matrix)
        };
        Ok(Gate { step, qubits, matrix })
    }

    pub fn identity(step: usize, qubits: &[usize]) -> Gate {
        let dim = if qubits.len() == 2 { 4 } else { 2 };
        Gate::new(step, qubits, CMatrix::identity(dim, dim)).expect("identity gate is valid")
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits.len() == 2
    }

    pub fn is_identity(&self) -> bool {
        identity_defect(&self.matrix) <= UNITARY_TOL
    }

    pub fn acts_on(&self, qubit: usize) -> bool {
        self.qubits.contains(&qubit)
    }

    /// The other qubit of a two-qubit gate.
    pub fn partner(&self, qubit: usize) -> Option<usize> {
        match self.qubits.as_slice() {
            [a, b] if *a == qubit => Some(*b),
            [a, b] if *b == qubit => Some(*a),
            _ => None,
        }
    }
}

/// First and last gate steps of a qubit. The rail runs from `o − 1` to `f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub o: usize,
    pub f: usize,
}

impl Window {
    pub fn rest(&self) -> usize {
        self.o - 1
    }

    pub fn sites(&self) -> usize {
        self.f - self.o + 2
    }

    pub fn contains_site(&self, i: usize) -> bool {
        i + 1 >= self.o && i <= self.f
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    m: usize,
    n: usize,
    depth: usize,
    layout: Layout,
    gates: Vec<Gate>,
    windows: Vec<Window>,
    // slots[A-1][step] = index of the (first) gate acting on A at `step`
    slots: Vec<Vec<Option<usize>>>,
}

impl Circuit {
    /// Assemble a circuit from an explicit gate list. Only malformed input is
    /// rejected here; rule violations are reported by [`validate_circuit`].
    pub fn new(m: usize, n: usize, layout: Layout, mut gates: Vec<Gate>) -> Result<Circuit> {
        if m == 0 {
            return Err(Error::InvalidCircuit("circuit needs at least one qubit".into()));
        }
        if let Some(g) = gates.iter().find(|g| g.qubits.iter().any(|&q| q > m)) {
            return Err(Error::InvalidCircuit(format!("gate at step {} acts on {:?} but M = {m}", g.step, g.qubits)));
        }
        gates.sort_by(|a, b| (a.step, &a.qubits).cmp(&(b.step, &b.qubits)));
        let depth = gates.iter().map(|g| g.step).max().unwrap_or(0);
        let mut windows = Vec::with_capacity(m);
        for q in 1..=m {
            let steps: Vec<usize> = gates.iter().filter(|g| g.acts_on(q)).map(|g| g.step).collect();
            match (steps.iter().min(), steps.iter().max()) {
                (Some(&o), Some(&f)) => windows.push(Window { o, f }),
                _ => {
                    return Err(Error::InvalidCircuit(format!("qubit {q} has no gates")));
                }
            }
        }
        let mut slots = vec![vec![None; depth + 2]; m];
        for (idx, g) in gates.iter().enumerate() {
            for &q in &g.qubits {
                slots[q - 1][g.step].get_or_insert(idx);
            }
        }
        Ok(Circuit { m, n, depth, layout, gates, windows, slots })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total depth N (largest gate step).
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn window(&self, qubit: usize) -> Window {
        self.windows[qubit - 1]
    }

    pub fn gate_at(&self, qubit: usize, step: usize) -> Option<&Gate> {
        self.slots.get(qubit - 1).and_then(|row| row.get(step)).copied().flatten().map(|i| &self.gates[i])
    }

    pub fn two_qubit_gates(&self) -> impl Iterator<Item = &Gate> {
        self.gates.iter().filter(|g| g.is_two_qubit())
    }

    /// Unordered pairs coupled at `step`, ascending.
    pub fn pairs_at(&self, step: usize) -> Vec<(usize, usize)> {
        self.two_qubit_gates().filter(|g| g.step == step).map(|g| (g.qubits[0], g.qubits[1])).collect()
    }

    /// Same circuit with every gate replaced by the identity.
    pub fn with_identity_gates(&self) -> Circuit {
        let gates = self.gates.iter().map(|g| Gate::identity(g.step, &g.qubits)).collect();
        Circuit::new(self.m, self.n, self.layout, gates).expect("structure unchanged")
    }

    pub fn is_all_identity(&self) -> bool {
        self.gates.iter().all(|g| g.is_identity())
    }
}

/// N = 2(2n+M)+3 for both generated layouts.
pub fn layout_depth(m: usize, n: usize) -> usize {
    2 * (2 * n + m) + 3
}

/// Last step that may carry a non-identity gate: the final (N−3)/2 + M steps hold identities only.
pub fn last_core_step(m: usize, n: usize) -> usize {
    let big_n = layout_depth(m, n);
    big_n - ((big_n - 3) / 2 + m)
}

fn check_layout_params(m: usize, n: usize) -> Result<()> {
    if m < 3 || m.is_multiple_of(2) {
        return Err(Error::InvalidCircuit(format!("M must be odd and at least 3, got {m}")));
    }
    if n % 2 == 1 {
        return Err(Error::InvalidCircuit(format!("n must be even, got {n}")));
    }
    if n + 1 < m {
        return Err(Error::InvalidCircuit(format!("n must be at least M−1 = {}, got {n}", m - 1)));
    }
    Ok(())
}

/// Pairs (A, B) of the nearest-neighbour layout at an even step `2j+2 ≥ 4`, in table order.
/// Odd j couples (M, M−1), (M−2, M−3), …, (3, 2) with qubit 1 idle; even j couples
/// (1, 2), (3, 4), …, (M−2, M−1) with qubit M idle.
pub fn pairs_1d(m: usize, step: usize) -> Vec<(usize, usize)> {
    assert!(step >= 4 && step.is_multiple_of(2), "two-qubit layers sit at even steps ≥ 4");
    let j = (step - 2) / 2;
    if j % 2 == 1 {
        (1..=(m - 1) / 2).map(|k| (m + 2 - 2 * k, m + 1 - 2 * k)).collect()
    } else {
        (1..=(m - 1) / 2).map(|k| (2 * k - 1, 2 * k)).collect()
    }
}

/// Round-robin table at an even step `≥ 4`: (top row, bottom row); column k pairs top[k] with bottom[k].
///
/// Step 4 and step 6 are fixed; each later table is the one four steps earlier with the
/// top-left entry pinned and the remaining entries moved one place clockwise.
pub fn round_robin_table(m: usize, step: usize) -> (Vec<usize>, Vec<usize>) {
    assert!(step >= 4 && step.is_multiple_of(2), "two-qubit layers sit at even steps ≥ 4");
    let (mut top, mut bottom) = if (step / 2).is_multiple_of(2) {
        // steps 4, 8, 12, …
        let mut top = vec![m];
        top.extend((1..(m - 1) / 2).map(|k| m - 1 - 2 * k));
        let mut bottom = vec![m - 1];
        bottom.extend((1..(m - 1) / 2).map(|k| m - 2 * k));
        (top, bottom)
    } else {
        // steps 6, 10, 14, …
        let top = (0..(m - 1) / 2).map(|k| 2 * k + 1).collect::<Vec<_>>();
        let bottom = (0..(m - 1) / 2).map(|k| 2 * k + 2).collect::<Vec<_>>();
        (top, bottom)
    };
    let base = if (step / 2).is_multiple_of(2) { 4 } else { 6 };
    for _ in 0..(step - base) / 4 {
        rotate_clockwise(&mut top, &mut bottom);
    }
    (top, bottom)
}

fn rotate_clockwise(top: &mut [usize], bottom: &mut [usize]) {
    let w = top.len();
    if w < 2 {
        return;
    }
    // ring of movable positions: top[1..w], then bottom[w-1] down to bottom[0]
    let mut ring: Vec<usize> = top[1..].to_vec();
    ring.extend(bottom.iter().rev());
    ring.rotate_right(1);
    top[1..].copy_from_slice(&ring[..w - 1]);
    for (k, v) in ring[w - 1..].iter().enumerate() {
        bottom[w - 1 - k] = *v;
    }
}

/// Pairs of the round-robin layout at an even step ≥ 4, as (top, bottom) columns.
pub fn pairs_all_to_all(m: usize, step: usize) -> Vec<(usize, usize)> {
    let (top, bottom) = round_robin_table(m, step);
    top.into_iter().zip(bottom).collect()
}

fn layout_windows(m: usize, n: usize, layout: Layout) -> Vec<Window> {
    let big_n = layout_depth(m, n);
    let last_pairs = match layout {
        Layout::AllToAll => round_robin_table(m, big_n - 3).0,
        _ => pairs_1d(m, big_n - 3).into_iter().map(|p| p.0).collect(),
    };
    (1..=m)
        .map(|a| {
            let o = if a % 2 == 0 { 1 } else { 3 };
            let f = if last_pairs.contains(&a) { big_n } else { big_n - 2 };
            Window { o, f }
        })
        .collect()
}

fn layout_pairs(m: usize, step: usize, layout: Layout) -> Vec<(usize, usize)> {
    match layout {
        Layout::AllToAll => pairs_all_to_all(m, step),
        _ => pairs_1d(m, step),
    }
}

fn build_layout(m: usize, n: usize, layout: Layout, core: &[Gate]) -> Result<Circuit> {
    check_layout_params(m, n)?;
    let big_n = layout_depth(m, n);
    let windows = layout_windows(m, n, layout);
    let mut gates = Vec::new();
    for step in 1..=big_n {
        let pairs =
            if step % 2 == 0 && step >= 4 && step <= big_n - 3 { layout_pairs(m, step, layout) } else { Vec::new() };
        for &(a, b) in &pairs {
            gates.push(Gate::identity(step, &[a, b]));
        }
        for a in 1..=m {
            let w = windows[a - 1];
            if step < w.o || step > w.f || pairs.iter().any(|&(x, y)| x == a || y == a) {
                continue;
            }
            gates.push(Gate::identity(step, &[a]));
        }
    }
    let last_core = last_core_step(m, n);
    for g in core {
        let slot = gates.iter().position(|s| s.step == g.step && s.qubits == g.qubits).ok_or_else(|| {
            Error::InvalidCircuit(format!(
                "core gate at step {} on {:?} does not match a layout slot (layer parity or pairing)",
                g.step, g.qubits
            ))
        })?;
        if g.step < 4 || g.step > last_core {
            return Err(Error::InvalidCircuit(format!(
                "core gate at step {} lies outside the core steps 4..={last_core}",
                g.step
            )));
        }
        gates[slot] = g.clone();
    }
    Circuit::new(m, n, layout, gates)
}

/// Nearest-neighbour layout with `N = 2(2n+M)+3`; unspecified slots are identities.
pub fn build_1d_circuit(m: usize, n: usize, core: &[Gate]) -> Result<Circuit> {
    build_layout(m, n, Layout::OneD, core)
}

/// Round-robin layout; same windows and padding scheme as the nearest-neighbour one.
pub fn build_all_to_all_circuit(m: usize, n: usize, core: &[Gate]) -> Result<Circuit> {
    build_layout(m, n, Layout::AllToAll, core)
}

/// Haar-distributed unitary of size `dim` (QR of a complex Gaussian matrix, phases fixed).
pub fn random_unitary(dim: usize, rng: &mut impl rand::Rng) -> CMatrix {
    use rand_distr::StandardNormal;
    let z = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// A generated layout whose core slots (steps 4..=last core step) carry random unitaries
/// drawn from a ChaCha8 stream seeded with `seed`.
pub fn build_random_circuit(m: usize, n: usize, layout: Layout, seed: u64) -> Result<Circuit> {
    use rand::SeedableRng;
    let base = match layout {
        Layout::OneD => build_1d_circuit(m, n, &[])?,
        Layout::AllToAll => build_all_to_all_circuit(m, n, &[])?,
        Layout::Custom => return Err(Error::InvalidCircuit("random circuits need a generated layout".into())),
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let last = last_core_step(m, n);
    let core: Vec<Gate> = base
        .gates()
        .iter()
        .filter(|g| (4..=last).contains(&g.step))
        .map(|g| {
            let dim = if g.is_two_qubit() { 4 } else { 2 };
            let u = random_unitary(dim, &mut rng);
            // QR output is unitary to rounding; re-check through the constructor anyway
            Gate::new(g.step, &g.qubits, u)
        })
        .collect::<Result<_>>()?;
    build_layout(m, n, layout, &core)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Coverage,
    FirstGateIdentity,
    Unitarity,
    Parameters,
    Window,
    LayerParity,
    Pairing,
    IdentityRegion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub qubit: Option<usize>,
    pub step: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn push(&mut self, rule: Rule, qubit: Option<usize>, step: Option<usize>, detail: String) {
        self.violations.push(Violation { rule, qubit, step, detail });
    }
}

/// Check every structural rule; never fails, an empty report means the circuit is valid.
pub fn validate_circuit(c: &Circuit) -> ValidationReport {
    let mut rep = ValidationReport::default();
    for g in &c.gates {
        let d = unitarity_defect(&g.matrix);
        if d > UNITARY_TOL {
            rep.push(Rule::Unitarity, Some(g.qubits[0]), Some(g.step), format!("|U†U−1| = {d:.3e}"));
        }
    }
    for a in 1..=c.m {
        let w = c.window(a);
        for step in w.o..=w.f {
            let count = c.gates.iter().filter(|g| g.step == step && g.acts_on(a)).count();
            if count != 1 {
                rep.push(
                    Rule::Coverage,
                    Some(a),
                    Some(step),
                    format!("{count} gates act on qubit {a} at step {step}; exactly one required"),
                );
            }
        }
        match c.gate_at(a, w.o) {
            Some(g) if !g.is_two_qubit() && g.is_identity() => {}
            _ => rep.push(Rule::FirstGateIdentity, Some(a), Some(w.o), "first gate must be identity".into()),
        }
    }
    if matches!(c.layout, Layout::OneD | Layout::AllToAll) {
        validate_layout(c, &mut rep);
    }
    rep
}

fn validate_layout(c: &Circuit, rep: &mut ValidationReport) {
    if let Err(e) = check_layout_params(c.m, c.n) {
        rep.push(Rule::Parameters, None, None, e.to_string());
        return;
    }
    let big_n = layout_depth(c.m, c.n);
    if c.depth != big_n {
        rep.push(Rule::Parameters, None, None, format!("depth {} but N = 2(2n+M)+3 = {big_n}", c.depth));
    }
    for (a, (got, want)) in c.windows.iter().zip(layout_windows(c.m, c.n, c.layout)).enumerate() {
        if *got != want {
            rep.push(
                Rule::Window,
                Some(a + 1),
                None,
                format!("window [{}, {}] but layout requires [{}, {}]", got.o, got.f, want.o, want.f),
            );
        }
    }
    let last_core = last_core_step(c.m, c.n);
    for g in &c.gates {
        if g.is_two_qubit() && g.step % 2 == 1 {
            rep.push(Rule::LayerParity, Some(g.qubits[0]), Some(g.step), "two-qubit gate at an odd step".into());
        }
        if g.step > last_core && !g.is_identity() {
            rep.push(
                Rule::IdentityRegion,
                Some(g.qubits[0]),
                Some(g.step),
                format!("non-identity gate after step {last_core}"),
            );
        }
    }
    for step in (4..=big_n.saturating_sub(3)).step_by(2) {
        let mut want: Vec<(usize, usize)> =
            layout_pairs(c.m, step, c.layout).into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        want.sort();
        let mut got = c.pairs_at(step);
        got.sort();
        if got != want {
            rep.push(Rule::Pairing, None, Some(step), format!("pairs {got:?}, layout requires {want:?}"));
        }
    }
    for g in c.two_qubit_gates() {
        if g.step % 2 == 0 && (g.step < 4 || g.step > big_n - 3) {
            rep.push(Rule::Pairing, Some(g.qubits[0]), Some(g.step), "two-qubit gate outside the paired layers".into());
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateJson {
    pub t: usize,
    pub q: Vec<usize>,
    pub u: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitJson {
    #[serde(rename = "M")]
    pub m: usize,
    pub n: usize,
    pub layout: Layout,
    pub gates: Vec<GateJson>,
}

impl From<&Circuit> for CircuitJson {
    fn from(c: &Circuit) -> Self {
        let gates = c
            .gates
            .iter()
            .map(|g| {
                let d = g.matrix.nrows();
                let mut u = Vec::with_capacity(d * d);
                for r in 0..d {
                    for col in 0..d {
                        let z = g.matrix[(r, col)];
                        u.push([z.re, z.im]);
                    }
                }
                GateJson { t: g.step, q: g.qubits.clone(), u }
            })
            .collect();
        CircuitJson { m: c.m, n: c.n, layout: c.layout, gates }
    }
}

impl TryFrom<CircuitJson> for Circuit {
    type Error = Error;
    fn try_from(j: CircuitJson) -> Result<Circuit> {
        let mut gates = Vec::with_capacity(j.gates.len());
        for g in j.gates {
            let d = if g.q.len() == 2 { 4 } else { 2 };
            if g.u.len() != d * d {
                return Err(Error::InvalidCircuit(format!(
                    "gate at step {} has {} matrix entries, expected {}",
                    g.t,
                    g.u.len(),
                    d * d
                )));
            }
            let m = CMatrix::from_fn(d, d, |r, c| {
                let [re, im] = g.u[r * d + c];
                C64::new(re, im)
            });
            gates.push(Gate::new(g.t, &g.q, m)?);
        }
        Circuit::new(j.m, j.n, j.layout, gates)
    }
}

impl Circuit {
    pub fn to_json(&self) -> Result<String> {
        Ok(crate::numfmt::to_json_string(&CircuitJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Circuit> {
        let j: CircuitJson = serde_json::from_str(s)?;
        Circuit::try_from(j)
    }
}

/// Common named gates.
pub mod gates {
    use super::{CMatrix, C64};

    pub fn hadamard() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_row_slice(2, 2, &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)])
    }

    pub fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
    }

    pub fn phase(theta: f64) -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::from_polar(1.0, theta)],
        )
    }

    /// Control on the first (more significant) qubit.
    pub fn cnot() -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(1, 1)] = C64::new(1.0, 0.0);
        m[(2, 3)] = C64::new(1.0, 0.0);
        m[(3, 2)] = C64::new(1.0, 0.0);
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows_for_small_m() {
        assert_eq!(pairs_1d(3, 4), vec![(3, 2)]);
        assert_eq!(pairs_1d(3, 6), vec![(1, 2)]);
        assert_eq!(pairs_1d(7, 4), vec![(7, 6), (5, 4), (3, 2)]);
        assert_eq!(round_robin_table(5, 4), (vec![5, 2], vec![4, 3]));
        assert_eq!(round_robin_table(5, 8), (vec![5, 4], vec![3, 2]));
        assert_eq!(round_robin_table(5, 10), (vec![1, 2], vec![4, 3]));
    }

    #[test]
    fn descending_pair_is_canonicalised() {
        let g = Gate::new(4, &[3, 2], gates::cnot()).unwrap();
        assert_eq!(g.qubits(), &[2, 3]);
        // control now on the second factor: |01⟩ ↔ |11⟩
        assert_eq!(g.matrix()[(3, 1)], C64::new(1.0, 0.0));
        assert_eq!(g.matrix()[(2, 2)], C64::new(1.0, 0.0));
    }
}
