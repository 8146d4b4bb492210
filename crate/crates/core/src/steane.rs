//! The [[7,1,3]] Steane code: check matrix, encoders, transversal gates and
//! classical decoding of transversal measurements.
//!
//! Bit layout: wire `i` of a block is column `i + 1` of the Hamming parity
//! check matrix, so the syndrome of a single flip on wire `i` is `i + 1`.
//! Logical operators are supported on wires {0, 1, 2}.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateEvent, GateKind};
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString};
use crate::tableau::IdealReference;

pub const N: usize = 7;
pub const CODE_ID: &str = "steane7";
/// Rows of the Hamming [7,4,3] parity check matrix, bit `i` = wire `i`.
pub const CHECK_ROWS: [u8; 3] = [0b101_0101, 0b110_0110, 0b111_1000];
/// Support of the logical X and Z representatives.
pub const LOGICAL_MASK: u8 = 0b000_0111;
pub const FULL_MASK: u8 = 0b111_1111;

/// Static code data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub id: String,
    pub n: usize,
    pub k: usize,
    pub distance: usize,
    /// Check rows as bit strings, wire 0 first. Shared by X and Z checks.
    pub check_matrix: Vec<String>,
    pub x_checks: Vec<String>,
    pub z_checks: Vec<String>,
    pub stabilizers: Vec<String>,
    pub logical_x: String,
    pub logical_z: String,
}

impl CodeSpec {
    pub fn generators(&self) -> Vec<PauliString> {
        self.stabilizers
            .iter()
            .map(|s| s.parse().expect("valid generator"))
            .collect()
    }

    pub fn logical_x_op(&self) -> PauliString {
        self.logical_x.parse().expect("valid logical")
    }

    pub fn logical_z_op(&self) -> PauliString {
        self.logical_z.parse().expect("valid logical")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("code spec serializes")
    }
}

fn mask_string(mask: u8) -> String {
    (0..N)
        .map(|i| if mask >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn mask_pauli(mask: u8, letter: Letter) -> String {
    (0..N)
        .map(|i| {
            if mask >> i & 1 == 1 {
                letter.as_char()
            } else {
                'I'
            }
        })
        .collect()
}

pub fn code_spec() -> CodeSpec {
    let rows: Vec<String> = CHECK_ROWS.iter().map(|&r| mask_string(r)).collect();
    let mut stabilizers: Vec<String> = CHECK_ROWS
        .iter()
        .map(|&r| mask_pauli(r, Letter::X))
        .collect();
    stabilizers.extend(CHECK_ROWS.iter().map(|&r| mask_pauli(r, Letter::Z)));
    CodeSpec {
        id: CODE_ID.into(),
        n: N,
        k: 1,
        distance: 3,
        check_matrix: rows.clone(),
        x_checks: rows.clone(),
        z_checks: rows,
        stabilizers,
        logical_x: mask_pauli(LOGICAL_MASK, Letter::X),
        logical_z: mask_pauli(LOGICAL_MASK, Letter::Z),
    }
}

/// 3-bit syndrome of a 7-bit word.
#[inline]
pub fn syndrome(word: u8) -> u8 {
    let mut s = 0u8;
    for (r, &row) in CHECK_ROWS.iter().enumerate() {
        s |= (((word & row).count_ones() & 1) as u8) << r;
    }
    s
}

/// The unique weight-≤1 word with the given syndrome.
#[inline]
pub fn correction(syndrome: u8) -> u8 {
    if syndrome == 0 {
        0
    } else {
        1 << (syndrome - 1)
    }
}

#[inline]
pub fn logical_parity(word: u8) -> bool {
    (word & LOGICAL_MASK).count_ones() & 1 == 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decoded {
    pub logical: bool,
    pub syndrome: u8,
    pub corrected: u8,
}

/// Decodes a transversal measurement record (bit `i` = wire `i`).
///
/// The code is self-dual, so X and Z records decode identically. `Y` records
/// are decoded the same way after the ideal-level rotation to X.
pub fn decode_measurement(bits: u8, _basis: Basis) -> Decoded {
    let bits = bits & FULL_MASK;
    let s = syndrome(bits);
    let corrected = bits ^ correction(s);
    Decoded {
        logical: logical_parity(corrected),
        syndrome: s,
        corrected,
    }
}

/// Minimum-weight element of `word + span(group)`; ties go to the smaller word.
pub fn min_weight_in_coset(word: u8, group: &[u8]) -> u8 {
    let mut best = word;
    for subset in 1u32..(1 << group.len()) {
        let mut w = word;
        for (i, &g) in group.iter().enumerate() {
            if subset >> i & 1 == 1 {
                w ^= g;
            }
        }
        if (w.count_ones(), w) < (best.count_ones(), best) {
            best = w;
        }
    }
    best
}

/// Encoder target state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalState {
    Zero,
    Plus,
}

/// CNOT fan-out schedule of the |0_L⟩ encoder: three rounds of three
/// disjoint gates from the pivot wires {0, 1, 3} onto the check supports.
const FANOUT: [[(usize, usize); 3]; 3] = [
    [(0, 2), (1, 5), (3, 6)],
    [(0, 4), (1, 6), (3, 5)],
    [(0, 6), (1, 2), (3, 4)],
];
const PIVOTS: [usize; 3] = [0, 1, 3];

/// Encoder over 7 fresh wires. The |+_L⟩ encoder is the |0_L⟩ one conjugated
/// by transversal H (preparation bases swapped, CNOT directions reversed).
pub fn encoding_circuit(target: LogicalState) -> Circuit {
    let mut c = Circuit::new(N);
    push_encoder(&mut c, target, &std::array::from_fn(|i| i));
    c.outputs = (0..N).collect();
    c
}

pub(crate) fn push_encoder(c: &mut Circuit, target: LogicalState, wires: &[usize; N]) {
    for (i, &w) in wires.iter().enumerate() {
        let pivot = PIVOTS.contains(&i);
        let kind = match (target, pivot) {
            (LogicalState::Zero, true) | (LogicalState::Plus, false) => GateKind::PrepX,
            _ => GateKind::PrepZ,
        };
        c.push(GateEvent::one(kind, w));
    }
    for round in FANOUT {
        for (p, t) in round {
            let (ctrl, tgt) = match target {
                LogicalState::Zero => (p, t),
                LogicalState::Plus => (t, p),
            };
            c.push(GateEvent::two(GateKind::Cnot, wires[ctrl], wires[tgt]));
        }
    }
}

/// A logical qubit bound to 7 physical wires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeBlock {
    pub id: usize,
    pub wires: [usize; N],
}

impl CodeBlock {
    /// Block `id` on wires `7*id .. 7*id + 7`.
    pub fn contiguous(id: usize) -> Self {
        Self {
            id,
            wires: std::array::from_fn(|i| N * id + i),
        }
    }

    pub fn with_offset(id: usize, first_wire: usize) -> Self {
        Self {
            id,
            wires: std::array::from_fn(|i| first_wire + i),
        }
    }

    /// Logical X representative embedded in an `n`-qubit string.
    pub fn logical_x(&self, n: usize) -> PauliString {
        let w: Vec<usize> = (0..N)
            .filter(|i| LOGICAL_MASK >> i & 1 == 1)
            .map(|i| self.wires[i])
            .collect();
        PauliString::x_on(n, &w)
    }

    pub fn logical_z(&self, n: usize) -> PauliString {
        let w: Vec<usize> = (0..N)
            .filter(|i| LOGICAL_MASK >> i & 1 == 1)
            .map(|i| self.wires[i])
            .collect();
        PauliString::z_on(n, &w)
    }

    /// The 6 code generators embedded in an `n`-qubit string.
    pub fn generators(&self, n: usize) -> Vec<PauliString> {
        let mut out = Vec::with_capacity(6);
        for letter in [Letter::X, Letter::Z] {
            for &row in &CHECK_ROWS {
                let mut p = PauliString::identity(n);
                for i in 0..N {
                    if row >> i & 1 == 1 {
                        p.set(self.wires[i], letter);
                    }
                }
                out.push(p);
            }
        }
        out
    }

    /// Frame restricted to this block as `(x_mask, z_mask)`.
    #[inline]
    pub fn masks(&self, frame: &PauliString) -> (u8, u8) {
        let (x, z) = frame.pack(&self.wires);
        (x as u8, z as u8)
    }
}

/// Transversal two-qubit gate pairing wire `i` of `a` with wire `i` of `b`.
pub fn transversal(kind: GateKind, a: &CodeBlock, b: &CodeBlock) -> Result<Vec<GateEvent>> {
    if kind.arity() != 2 {
        return Err(Error::NotUnitary(kind));
    }
    if let Some(&w) = a.wires.iter().find(|w| b.wires.contains(w)) {
        return Err(Error::OverlappingBlocks(w));
    }
    Ok((0..N)
        .map(|i| GateEvent::two(kind, a.wires[i], b.wires[i]))
        .collect())
}

pub(crate) fn push_transversal(
    c: &mut Circuit,
    kind: GateKind,
    a: &CodeBlock,
    b: &CodeBlock,
) -> Result<()> {
    for e in transversal(kind, a, b)? {
        c.push(e);
    }
    Ok(())
}

pub(crate) fn push_measure(c: &mut Circuit, basis: Basis, block: &CodeBlock) -> [usize; N] {
    let kind = match basis {
        Basis::X => GateKind::MeasX,
        Basis::Z => GateKind::MeasZ,
        Basis::Y => GateKind::MeasY,
    };
    let first = c.measurement_count();
    for &w in &block.wires {
        c.push(GateEvent::one(kind, w));
    }
    std::array::from_fn(|i| first + i)
}

/// Syndrome parities (and optionally the logical parity) over a block's 7 records.
pub(crate) fn block_parities(records: &[usize; N], include_logical: bool) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = CHECK_ROWS
        .iter()
        .map(|&row| {
            (0..N)
                .filter(|i| row >> i & 1 == 1)
                .map(|i| records[i])
                .collect()
        })
        .collect();
    if include_logical {
        out.push(
            (0..N)
                .filter(|i| LOGICAL_MASK >> i & 1 == 1)
                .map(|i| records[i])
                .collect(),
        );
    }
    out
}

/// Logical error class of a single-block frame, after distance-3 decoding
/// and reduction by logical operators that stabilize the reference state.
pub fn classify_residual(
    frame: &PauliString,
    reference: &IdealReference,
    block: &CodeBlock,
) -> Result<Letter> {
    if frame.n_qubits() != reference.n_qubits {
        return Err(Error::LengthMismatch {
            left: frame.n_qubits(),
            right: reference.n_qubits,
        });
    }
    if let Some(q) = frame
        .support()
        .into_iter()
        .find(|q| !block.wires.contains(q))
    {
        return Err(Error::OutsideBlock(q));
    }
    let (x, z) = block.masks(frame);
    let mut lx = logical_parity(x ^ correction(syndrome(x)));
    let mut lz = logical_parity(z ^ correction(syndrome(z)));
    let n = reference.n_qubits;
    let xl = block.logical_x(n);
    let zl = block.logical_z(n);
    if lx && lz && reference.stabilizes(&xl.mul(&zl)?) {
        lx = false;
        lz = false;
    }
    if lx && reference.stabilizes(&xl) {
        lx = false;
    }
    if lz && reference.stabilizes(&zl) {
        lz = false;
    }
    Ok(Letter::from_bits(lx, lz))
}
