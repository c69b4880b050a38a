//! Occupation basis: one particle per qubit rail, carrying a position and a bit.
//!
//! A state is encoded as a mixed-radix integer, with positions outer (qubit 1 most
//! significant) and the bit string inner (qubit 1 the most significant bit). The full
//! basis is every code; restricted bases keep a sorted code list.

use crate::circuit::{Circuit, Window};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MAX_STATES: u128 = 1 << 31;

/// Bit string with qubit 1 as the most significant of `m` bits.
#[inline]
pub fn bit_of(bits: u32, m: usize, qubit: usize) -> u32 {
    (bits >> (m - qubit)) & 1
}

#[inline]
pub fn with_bit(bits: u32, m: usize, qubit: usize, value: u32) -> u32 {
    let mask = 1 << (m - qubit);
    (bits & !mask) | (value << (m - qubit))
}

/// Per-qubit rail geometry: sites `lo..=hi` for each qubit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Space {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

impl Space {
    pub fn of(c: &Circuit) -> Space {
        Space::from_windows(c.windows())
    }

    pub fn from_windows(w: &[Window]) -> Space {
        Space { lo: w.iter().map(|w| w.rest()).collect(), hi: w.iter().map(|w| w.f).collect() }
    }

    pub fn m(&self) -> usize {
        self.lo.len()
    }

    fn radix(&self, a: usize) -> u64 {
        (self.hi[a] - self.lo[a] + 1) as u64
    }

    pub fn position_count(&self) -> u128 {
        (0..self.m()).map(|a| self.radix(a) as u128).product()
    }

    pub fn size(&self) -> u128 {
        self.position_count() << self.m()
    }

    pub fn contains(&self, pos: &[usize]) -> bool {
        pos.iter().enumerate().all(|(a, &p)| p >= self.lo[a] && p <= self.hi[a])
    }

    pub fn encode(&self, pos: &[usize], bits: u32) -> u64 {
        let mut code = 0u64;
        for (a, &p) in pos.iter().enumerate() {
            code = code * self.radix(a) + (p - self.lo[a]) as u64;
        }
        (code << self.m()) | bits as u64
    }

    pub fn decode_into(&self, code: u64, pos: &mut [usize]) -> u32 {
        let m = self.m();
        let bits = (code & ((1u64 << m) - 1)) as u32;
        let mut rest = code >> m;
        for a in (0..m).rev() {
            let r = self.radix(a);
            pos[a] = self.lo[a] + (rest % r) as usize;
            rest /= r;
        }
        bits
    }

    pub fn decode(&self, code: u64) -> BasisState {
        let mut pos = vec![0; self.m()];
        let bits = self.decode_into(code, &mut pos);
        BasisState { positions: pos, bits }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisState {
    pub positions: Vec<usize>,
    /// qubit 1 is the most significant bit
    pub bits: u32,
}

/// How a basis was selected from the full space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Selection {
    Full,
    /// Fixed bits (or all zero), qubits above `active` pinned at rest with bit 0.
    Sector {
        bits: Option<u32>,
        active: usize,
    },
    PenaltyFree {
        bits: Option<u32>,
    },
    Subset(String),
}

#[derive(Clone, Debug)]
pub struct Basis {
    space: Space,
    selection: Selection,
    // None: every code of the space, in order
    codes: Option<Vec<u64>>,
    len: usize,
}

impl Basis {
    pub fn full(space: Space) -> Result<Basis> {
        let size = space.size();
        if size > MAX_STATES {
            return Err(Error::BasisTooLarge(size));
        }
        Ok(Basis { space, selection: Selection::Full, codes: None, len: size as usize })
    }

    /// Restricted basis from arbitrary codes (sorted and deduplicated here).
    pub fn from_codes(space: Space, mut codes: Vec<u64>, selection: Selection) -> Basis {
        codes.sort_unstable();
        codes.dedup();
        let len = codes.len();
        Basis { space, selection, codes: Some(codes), len }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn m(&self) -> usize {
        self.space.m()
    }

    pub fn selection(&self) -> &Selection {
        &self.selection
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.codes.is_none()
    }

    pub fn code(&self, index: usize) -> u64 {
        match &self.codes {
            None => index as u64,
            Some(c) => c[index],
        }
    }

    pub fn index_of_code(&self, code: u64) -> Option<usize> {
        match &self.codes {
            None => ((code as u128) < self.len as u128).then_some(code as usize),
            Some(c) => c.binary_search(&code).ok(),
        }
    }

    pub fn index_of(&self, pos: &[usize], bits: u32) -> Option<usize> {
        if !self.space.contains(pos) || bits >> self.m() != 0 {
            return None;
        }
        self.index_of_code(self.space.encode(pos, bits))
    }

    pub fn state(&self, index: usize) -> BasisState {
        self.space.decode(self.code(index))
    }

    pub fn state_into(&self, index: usize, pos: &mut [usize]) -> u32 {
        self.space.decode_into(self.code(index), pos)
    }

    /// Keep the states satisfying `keep`.
    pub fn filter(&self, selection: Selection, mut keep: impl FnMut(&[usize], u32) -> bool) -> Basis {
        let mut pos = vec![0; self.m()];
        let codes = (0..self.len)
            .filter_map(|i| {
                let code = self.code(i);
                let bits = self.space.decode_into(code, &mut pos);
                keep(&pos, bits).then_some(code)
            })
            .collect();
        Basis::from_codes(self.space.clone(), codes, selection)
    }
}

pub fn enumerate_basis(c: &Circuit) -> Result<Basis> {
    Basis::full(Space::of(c))
}

/// States with the given bits (`None` = all zero) and every qubit above `active`
/// pinned at its rest site with bit 0.
pub fn sector(b: &Basis, bits: Option<u32>, active: usize) -> Result<Basis> {
    let m = b.m();
    if active > m {
        return Err(Error::Domain(format!("active prefix {active} exceeds M = {m}")));
    }
    let want = bits.unwrap_or(0);
    if want >> m != 0 {
        return Err(Error::Domain(format!("bit pattern {want:#b} has more than {m} bits")));
    }
    if (active + 1..=m).any(|q| bit_of(want, m, q) == 1) {
        return Err(Error::EmptySector(format!("bits {want:#b} set a pinned qubit above {active}")));
    }
    let lo = b.space().lo.clone();
    let out = b.filter(Selection::Sector { bits, active }, |pos, s| s == want && (active..m).all(|a| pos[a] == lo[a]));
    if out.is_empty() {
        return Err(Error::EmptySector(format!("no states with bits {want:#b} and active prefix {active}")));
    }
    Ok(out)
}

/// A lower or upper bound on one qubit's position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pin {
    pub qubit: usize,
    pub min: Option<usize>,
    pub max: Option<usize>,
}

impl Pin {
    pub fn at_least(qubit: usize, min: usize) -> Pin {
        Pin { qubit, min: Some(min), max: None }
    }

    pub fn exactly(qubit: usize, site: usize) -> Pin {
        Pin { qubit, min: Some(site), max: Some(site) }
    }
}

/// Side constraint of a two-qubit gate at `step` on qubits `a < b`:
/// a tuple is time-valid iff `i_a ≥ step ⇔ i_b ≥ step`.
#[derive(Clone, Copy, Debug)]
struct PairConstraint {
    a: usize,
    step: usize,
}

pub fn violates_pair(i_a: usize, i_b: usize, step: usize) -> bool {
    (i_a >= step) != (i_b >= step)
}

/// Number of pair penalty terms a position tuple violates.
pub fn penalty_count(c: &Circuit, pos: &[usize]) -> usize {
    c.two_qubit_gates().filter(|g| violates_pair(pos[g.qubits()[0] - 1], pos[g.qubits()[1] - 1], g.step())).count()
}

/// All time-valid position tuples, lexicographic order, qubit 1 first.
///
/// Qubits are assigned in order; each new value is checked against the already
/// assigned partners, which prunes the search to the valid set.
pub fn penalty_free_vertices(c: &Circuit, pins: &[Pin]) -> Vec<Vec<usize>> {
    let m = c.m();
    let space = Space::of(c);
    let mut lo = space.lo.clone();
    let mut hi = space.hi.clone();
    for p in pins {
        let a = p.qubit - 1;
        if let Some(v) = p.min {
            lo[a] = lo[a].max(v);
        }
        if let Some(v) = p.max {
            hi[a] = hi[a].min(v);
        }
    }
    // constraints attached to the later qubit of each pair
    let mut back: Vec<Vec<PairConstraint>> = vec![Vec::new(); m];
    for g in c.two_qubit_gates() {
        let (a, b) = (g.qubits()[0] - 1, g.qubits()[1] - 1);
        back[b].push(PairConstraint { a, step: g.step() });
    }
    let mut out = Vec::new();
    if (0..m).any(|a| lo[a] > hi[a]) {
        return out;
    }
    let mut pos = vec![0usize; m];
    fn rec(
        q: usize,
        pos: &mut Vec<usize>,
        lo: &[usize],
        hi: &[usize],
        back: &[Vec<PairConstraint>],
        out: &mut Vec<Vec<usize>>,
    ) {
        if q == pos.len() {
            out.push(pos.clone());
            return;
        }
        // the valid values form an interval: each constraint bounds v to one side of a step
        let (mut l, mut h) = (lo[q], hi[q]);
        for pc in &back[q] {
            if pos[pc.a] >= pc.step {
                l = l.max(pc.step);
            } else {
                h = h.min(pc.step - 1);
            }
        }
        if l > h {
            return;
        }
        for v in l..=h {
            pos[q] = v;
            rec(q + 1, pos, lo, hi, back, out);
        }
    }
    rec(0, &mut pos, &lo, &hi, &back, &mut out);
    out
}

/// Basis of time-valid tuples with the given bits (`None`: all 2^M bit strings).
pub fn penalty_free_basis(c: &Circuit, bits: Option<u32>, pins: &[Pin]) -> Basis {
    let space = Space::of(c);
    let m = c.m();
    let verts = penalty_free_vertices(c, pins);
    let mut codes = Vec::with_capacity(verts.len() << if bits.is_some() { 0 } else { m });
    for v in &verts {
        match bits {
            Some(b) => codes.push(space.encode(v, b)),
            None => codes.extend((0..1u32 << m).map(|b| space.encode(v, b))),
        }
    }
    Basis::from_codes(space, codes, Selection::PenaltyFree { bits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_1d_circuit;

    #[test]
    fn encode_roundtrip_and_bit_order() {
        let c = build_1d_circuit(3, 2, &[]).unwrap();
        let s = Space::of(&c);
        let code = s.encode(&[5, 3, 7], 0b101);
        let st = s.decode(code);
        assert_eq!(st.positions, vec![5, 3, 7]);
        assert_eq!(bit_of(st.bits, 3, 1), 1);
        assert_eq!(bit_of(st.bits, 3, 2), 0);
        assert_eq!(with_bit(0, 3, 2, 1), 0b010);
    }
}
