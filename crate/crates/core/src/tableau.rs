//! Exact stabilizer-tableau engine (Aaronson–Gottesman) used as the
//! correctness oracle for the frame sampler.
//!
//! Row signs are affine functions over the outcomes of earlier random
//! measurements: bit 0 of a sign row is the constant, bit `1 + r` the
//! dependence on measurement record `r`. Random outcomes are therefore never
//! fixed numerically, and every deterministic outcome comes out as an explicit
//! parity of earlier random ones.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::gf2::{self, BitRow};
use crate::pauli::{Letter, PauliString};

#[derive(Debug, Clone)]
pub struct Tableau {
    n: usize,
    w: usize,
    sw: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    sign: Vec<u64>,
    next_record: usize,
}

/// Outcome of one measurement in the ideal run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// Uniformly random; later outcomes may depend on it.
    Random,
    /// `constant ⊕ (sum of the listed earlier random records)`.
    Deterministic {
        constant: bool,
        depends_on: Vec<usize>,
    },
}

impl Outcome {
    pub fn is_deterministic(&self) -> bool {
        matches!(self, Outcome::Deterministic { .. })
    }
}

impl Tableau {
    /// `n` qubits in |0…0⟩, with room for `max_records` symbolic outcomes.
    pub fn new(n: usize, max_records: usize) -> Self {
        let w = n.div_ceil(64).max(1);
        let sw = (max_records + 1).div_ceil(64);
        let rows = 2 * n + 1;
        let mut t = Self {
            n,
            w,
            sw,
            x: vec![0; rows * w],
            z: vec![0; rows * w],
            sign: vec![0; rows * sw],
            next_record: 0,
        };
        for i in 0..n {
            gf2::set(t.xrow_mut(i), i, true);
            gf2::set(t.zrow_mut(n + i), i, true);
        }
        t
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn xrow_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.x[r * self.w..(r + 1) * self.w]
    }
    #[inline]
    fn zrow_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.z[r * self.w..(r + 1) * self.w]
    }
    #[inline]
    fn xb(&self, r: usize, q: usize) -> bool {
        (self.x[r * self.w + (q >> 6)] >> (q & 63)) & 1 == 1
    }
    #[inline]
    fn zb(&self, r: usize, q: usize) -> bool {
        (self.z[r * self.w + (q >> 6)] >> (q & 63)) & 1 == 1
    }
    #[inline]
    fn flip_const(&mut self, r: usize) {
        self.sign[r * self.sw] ^= 1;
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange {
                index: q,
                n_qubits: self.n,
            });
        }
        Ok(())
    }

    pub fn h(&mut self, q: usize) {
        let (word, bit) = (q >> 6, 1u64 << (q & 63));
        for r in 0..2 * self.n {
            let i = r * self.w + word;
            let (xv, zv) = (self.x[i] & bit, self.z[i] & bit);
            if xv != 0 && zv != 0 {
                self.flip_const(r);
            }
            self.x[i] = (self.x[i] & !bit) | zv;
            self.z[i] = (self.z[i] & !bit) | xv;
        }
    }

    pub fn s(&mut self, q: usize) {
        let (word, bit) = (q >> 6, 1u64 << (q & 63));
        for r in 0..2 * self.n {
            let i = r * self.w + word;
            if self.x[i] & bit != 0 {
                if self.z[i] & bit != 0 {
                    self.flip_const(r);
                }
                self.z[i] ^= bit;
            }
        }
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        for r in 0..2 * self.n {
            let (xc, zc, xt, zt) = (self.xb(r, c), self.zb(r, c), self.xb(r, t), self.zb(r, t));
            if xc && zt && (xt == zc) {
                self.flip_const(r);
            }
            if xc {
                self.x[r * self.w + (t >> 6)] ^= 1u64 << (t & 63);
            }
            if zt {
                self.z[r * self.w + (c >> 6)] ^= 1u64 << (c & 63);
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    /// Multiplies the state by a Pauli letter on `q` (flips anticommuting rows).
    pub fn apply_pauli(&mut self, q: usize, letter: Letter) {
        let (px, pz) = letter.bits();
        for r in 0..2 * self.n {
            let anti = (px && self.zb(r, q)) ^ (pz && self.xb(r, q));
            if anti {
                self.flip_const(r);
            }
        }
    }

    /// Row `h` ← row `i` · row `h`.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.w;
        let mut plus = 0u32;
        let mut minus = 0u32;
        for k in 0..w {
            let (x1, z1) = (self.x[i * w + k], self.z[i * w + k]);
            let (x2, z2) = (self.x[h * w + k], self.z[h * w + k]);
            let y1 = x1 & z1;
            let xo1 = x1 & !z1;
            let zo1 = !x1 & z1;
            let y2 = x2 & z2;
            let xo2 = x2 & !z2;
            let zo2 = !x2 & z2;
            plus += ((y1 & zo2) | (xo1 & y2) | (zo1 & xo2)).count_ones();
            minus += ((y1 & xo2) | (xo1 & zo2) | (zo1 & y2)).count_ones();
            self.x[h * w + k] = x1 ^ x2;
            self.z[h * w + k] = z1 ^ z2;
        }
        let g = (plus as i64 - minus as i64).rem_euclid(4);
        debug_assert!(g == 0 || g == 2);
        for k in 0..self.sw {
            self.sign[h * self.sw + k] ^= self.sign[i * self.sw + k];
        }
        if g == 2 {
            self.flip_const(h);
        }
    }

    /// Z-basis measurement. The record index is allocated internally.
    pub fn measure_z(&mut self, q: usize) -> Outcome {
        let n = self.n;
        let record = self.next_record;
        self.next_record += 1;
        if let Some(p) = (n..2 * n).find(|&r| self.xb(r, q)) {
            // Row p - n anticommutes with p and is overwritten below.
            for r in 0..2 * n {
                if r != p && r != p - n && self.xb(r, q) {
                    self.rowsum(r, p);
                }
            }
            let w = self.w;
            let sw = self.sw;
            self.x.copy_within(p * w..(p + 1) * w, (p - n) * w);
            self.z.copy_within(p * w..(p + 1) * w, (p - n) * w);
            self.sign.copy_within(p * sw..(p + 1) * sw, (p - n) * sw);
            self.xrow_mut(p).fill(0);
            self.zrow_mut(p).fill(0);
            gf2::set(self.zrow_mut(p), q, true);
            self.sign[p * sw..(p + 1) * sw].fill(0);
            assert!(record + 1 < sw * 64, "tableau record capacity exceeded");
            gf2::set(&mut self.sign[p * sw..(p + 1) * sw], record + 1, true);
            Outcome::Random
        } else {
            let s = 2 * n;
            self.x[s * self.w..(s + 1) * self.w].fill(0);
            self.z[s * self.w..(s + 1) * self.w].fill(0);
            self.sign[s * self.sw..(s + 1) * self.sw].fill(0);
            for i in 0..n {
                if self.xb(i, q) {
                    self.rowsum(s, i + n);
                }
            }
            let sign = &self.sign[s * self.sw..(s + 1) * self.sw];
            let constant = gf2::get(sign, 0);
            let depends_on = (1..self.sw * 64)
                .filter(|&b| gf2::get(sign, b))
                .map(|b| b - 1)
                .collect();
            Outcome::Deterministic {
                constant,
                depends_on,
            }
        }
    }

    pub fn measure_x(&mut self, q: usize) -> Outcome {
        self.h(q);
        let o = self.measure_z(q);
        self.h(q);
        o
    }

    pub fn measure_y(&mut self, q: usize) -> Outcome {
        // S† then H maps Y to Z.
        self.s(q);
        self.s(q);
        self.s(q);
        self.h(q);
        let o = self.measure_z(q);
        self.h(q);
        self.s(q);
        o
    }

    /// Stabilizer generators (signs dropped).
    pub fn stabilizers(&self) -> Vec<PauliString> {
        (self.n..2 * self.n)
            .map(|r| {
                let mut p = PauliString::identity(self.n);
                for q in 0..self.n {
                    p.set(q, Letter::from_bits(self.xb(r, q), self.zb(r, q)));
                }
                p
            })
            .collect()
    }

    /// Sign of `p` as an element of the stabilizer group, in the same
    /// affine form as a deterministic outcome (`constant` set means `-p`).
    /// `None` if neither `p` nor `-p` is in the group.
    pub fn sign_of(&mut self, p: &PauliString) -> Option<Outcome> {
        let n = self.n;
        if p.n_qubits() != n {
            return None;
        }
        let s = 2 * n;
        self.x[s * self.w..(s + 1) * self.w].fill(0);
        self.z[s * self.w..(s + 1) * self.w].fill(0);
        self.sign[s * self.sw..(s + 1) * self.sw].fill(0);
        // The destabilizers anticommuting with p pick out its factors.
        for i in 0..n {
            let mut anti = false;
            for q in 0..n {
                anti ^= (self.xb(i, q) && p.z(q)) ^ (self.zb(i, q) && p.x(q));
            }
            if anti {
                self.rowsum(s, i + n);
            }
        }
        if (0..n).any(|q| self.xb(s, q) != p.x(q) || self.zb(s, q) != p.z(q)) {
            return None;
        }
        let sign = &self.sign[s * self.sw..(s + 1) * self.sw];
        let constant = gf2::get(sign, 0);
        let depends_on = (1..self.sw * 64)
            .filter(|&b| gf2::get(sign, b))
            .map(|b| b - 1)
            .collect();
        Some(Outcome::Deterministic {
            constant,
            depends_on,
        })
    }

    /// True iff `p` (up to sign) lies in the stabilizer group.
    pub fn stabilizes(&self, p: &PauliString) -> bool {
        let mut space = gf2::RowSpace::new(2 * self.n);
        for s in self.stabilizers() {
            space.insert(&to_row(&s));
        }
        space.contains(&to_row(p))
    }
}

/// Symplectic row `[x | z]` of a Pauli.
pub(crate) fn to_row(p: &PauliString) -> BitRow {
    let n = p.n_qubits();
    let mut r = gf2::zeros(2 * n);
    for q in 0..n {
        if p.x(q) {
            gf2::set(&mut r, q, true);
        }
        if p.z(q) {
            gf2::set(&mut r, n + q, true);
        }
    }
    r
}

pub(crate) fn from_row(r: &[u64], n: usize) -> PauliString {
    let mut p = PauliString::identity(n);
    for q in 0..n {
        p.set(q, Letter::from_bits(gf2::get(r, q), gf2::get(r, n + q)));
    }
    p
}

/// Noiseless reference for a circuit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdealReference {
    pub n_qubits: usize,
    pub outputs: Vec<usize>,
    /// Generators of the stabilizer group of the output qubits, as full-width
    /// strings supported on `outputs` (signs dropped).
    pub stabilizers: Vec<PauliString>,
    /// One entry per measurement record.
    pub outcomes: Vec<Outcome>,
}

impl IdealReference {
    /// True iff `p` (up to sign) is in the output stabilizer group.
    pub fn stabilizes(&self, p: &PauliString) -> bool {
        let mut space = gf2::RowSpace::new(2 * self.n_qubits);
        for s in &self.stabilizers {
            space.insert(&to_row(s));
        }
        space.contains(&to_row(p))
    }

    /// Whether the parity of the listed records is fixed in the ideal run.
    pub fn parity_is_deterministic(&self, records: &[usize]) -> bool {
        let mut acc: Vec<bool> = vec![false; self.outcomes.len()];
        for &r in records {
            match &self.outcomes[r] {
                Outcome::Random => acc[r] ^= true,
                Outcome::Deterministic { depends_on, .. } => {
                    for &d in depends_on {
                        acc[d] ^= true;
                    }
                }
            }
        }
        acc.iter().all(|&b| !b)
    }
}

/// Runs the circuit in a tableau, applying `injected(event_index)` Paulis
/// right after each event (before it, for measurements).
pub fn run_tableau(
    circuit: &Circuit,
    mut injected: impl FnMut(usize) -> Vec<(usize, Letter)>,
) -> Result<(Tableau, Vec<Outcome>)> {
    circuit.validate()?;
    let mut t = Tableau::new(circuit.n_qubits, circuit.measurement_count());
    let mut outcomes = Vec::with_capacity(circuit.measurement_count());
    for (i, e) in circuit.events.iter().enumerate() {
        for &q in e.targets() {
            t.check(q)?;
        }
        let (a, b) = (e.qubits[0], e.qubits[1]);
        if e.kind.is_measurement() {
            for (q, l) in injected(i) {
                t.apply_pauli(q, l);
            }
        }
        match e.kind {
            GateKind::H => t.h(a),
            GateKind::S => t.s(a),
            GateKind::Cnot => t.cnot(a, b),
            GateKind::Cz => t.cz(a, b),
            // Validation guarantees a fresh qubit, still in |0⟩.
            GateKind::PrepZ => {}
            GateKind::PrepX => t.h(a),
            GateKind::MeasZ => outcomes.push(t.measure_z(a)),
            GateKind::MeasX => outcomes.push(t.measure_x(a)),
            GateKind::MeasY => outcomes.push(t.measure_y(a)),
            GateKind::Wait => {}
        }
        if !e.kind.is_measurement() {
            for (q, l) in injected(i) {
                t.apply_pauli(q, l);
            }
        }
    }
    Ok((t, outcomes))
}

/// Evolves the circuit without noise and extracts the output stabilizer group.
///
/// Input qubits are taken to start in |0⟩.
pub fn run_ideal(circuit: &Circuit) -> Result<IdealReference> {
    let (t, outcomes) = run_tableau(circuit, |_| Vec::new())?;
    let n = circuit.n_qubits;
    let mut is_out = vec![false; n];
    for &q in &circuit.outputs {
        is_out[q] = true;
    }
    let kill: Vec<usize> = (0..n)
        .filter(|&q| !is_out[q])
        .flat_map(|q| [q, n + q])
        .collect();
    let rows: Vec<BitRow> = t.stabilizers().iter().map(to_row).collect();
    let stabilizers = gf2::vanishing_on(&rows, 2 * n, &kill)
        .iter()
        .map(|r| from_row(r, n))
        .collect();
    Ok(IdealReference {
        n_qubits: n,
        outputs: circuit.outputs.clone(),
        stabilizers,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateEvent;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn prep_then_measure_is_deterministic_zero() {
        let mut c = Circuit::new(1);
        c.push(GateEvent::one(GateKind::PrepZ, 0));
        c.push(GateEvent::one(GateKind::MeasZ, 0));
        let r = run_ideal(&c).unwrap();
        assert_eq!(
            r.outcomes,
            vec![Outcome::Deterministic {
                constant: false,
                depends_on: vec![]
            }]
        );
    }

    #[test]
    fn y_measurement_of_z_eigenstate_is_random() {
        let mut c = Circuit::new(2);
        c.push(GateEvent::one(GateKind::PrepZ, 0));
        c.push(GateEvent::one(GateKind::PrepZ, 1));
        c.push(GateEvent::one(GateKind::MeasY, 0));
        c.push(GateEvent::one(GateKind::MeasY, 1));
        let r = run_ideal(&c).unwrap();
        assert_eq!(r.outcomes, vec![Outcome::Random, Outcome::Random]);
    }

    #[test]
    fn two_qubit_graph_state() {
        let mut c = Circuit::new(2);
        c.push(GateEvent::one(GateKind::PrepX, 0));
        c.push(GateEvent::one(GateKind::PrepX, 1));
        c.push(GateEvent::two(GateKind::Cz, 0, 1));
        c.outputs = vec![0, 1];
        let r = run_ideal(&c).unwrap();
        assert_eq!(r.stabilizers.len(), 2);
        assert!(r.stabilizes(&p("XZ")));
        assert!(r.stabilizes(&p("ZX")));
        assert!(!r.stabilizes(&p("XX")));
    }

    #[test]
    fn bell_pair_correlations_are_symbolic() {
        let mut c = Circuit::new(2);
        c.push(GateEvent::one(GateKind::PrepX, 0));
        c.push(GateEvent::one(GateKind::PrepZ, 1));
        c.push(GateEvent::two(GateKind::Cnot, 0, 1));
        c.push(GateEvent::one(GateKind::MeasZ, 0));
        c.push(GateEvent::one(GateKind::MeasZ, 1));
        let r = run_ideal(&c).unwrap();
        assert_eq!(r.outcomes[0], Outcome::Random);
        assert_eq!(
            r.outcomes[1],
            Outcome::Deterministic {
                constant: false,
                depends_on: vec![0]
            }
        );
        assert!(r.parity_is_deterministic(&[0, 1]));
        assert!(!r.parity_is_deterministic(&[0]));
    }

    #[test]
    fn y_measurement_of_y_eigenstate() {
        let mut c = Circuit::new(1);
        c.push(GateEvent::one(GateKind::PrepX, 0));
        c.push(GateEvent::one(GateKind::S, 0));
        c.push(GateEvent::one(GateKind::MeasY, 0));
        let r = run_ideal(&c).unwrap();
        assert_eq!(
            r.outcomes[0],
            Outcome::Deterministic {
                constant: false,
                depends_on: vec![]
            }
        );
    }

    #[test]
    fn injected_pauli_flips_deterministic_outcome() {
        let mut c = Circuit::new(1);
        c.push(GateEvent::one(GateKind::PrepX, 0));
        c.push(GateEvent::one(GateKind::MeasX, 0));
        let (_, out) =
            run_tableau(&c, |i| if i == 1 { vec![(0, Letter::Z)] } else { vec![] }).unwrap();
        assert_eq!(
            out[0],
            Outcome::Deterministic {
                constant: true,
                depends_on: vec![]
            }
        );
    }

    #[test]
    fn measured_qubit_reuse_is_an_error() {
        let mut c = Circuit::new(1);
        c.push(GateEvent::one(GateKind::PrepZ, 0));
        c.push(GateEvent::one(GateKind::MeasZ, 0));
        c.push(GateEvent::one(GateKind::MeasZ, 0));
        assert_eq!(run_ideal(&c).unwrap_err(), Error::MeasuredQubit(0));
    }
}
