//! Pauli operators as paired X/Z bit vectors, global phase dropped.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-qubit Pauli letter, encoded as `(x, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const NONTRIVIAL: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    /// Index into `[I, X, Y, Z]`.
    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// An `n`-qubit Pauli operator. Composition is XOR of the bit vectors.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        let w = words_for(n_qubits);
        Self {
            n_qubits,
            x: vec![0; w],
            z: vec![0; w],
        }
    }

    /// Single-letter operator on qubit `q`.
    pub fn single(n_qubits: usize, q: usize, letter: Letter) -> Self {
        let mut p = Self::identity(n_qubits);
        p.set(q, letter);
        p
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set(q, l);
        }
        p
    }

    /// X-type operator on the listed qubits.
    pub fn x_on(n_qubits: usize, qubits: &[usize]) -> Self {
        let mut p = Self::identity(n_qubits);
        for &q in qubits {
            p.set_x(q, true);
        }
        p
    }

    /// Z-type operator on the listed qubits.
    pub fn z_on(n_qubits: usize, qubits: &[usize]) -> Self {
        let mut p = Self::identity(n_qubits);
        for &q in qubits {
            p.set_z(q, true);
        }
        p
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn x(&self, q: usize) -> bool {
        (self.x[q >> 6] >> (q & 63)) & 1 == 1
    }

    #[inline]
    pub fn z(&self, q: usize) -> bool {
        (self.z[q >> 6] >> (q & 63)) & 1 == 1
    }

    #[inline]
    pub fn set_x(&mut self, q: usize, v: bool) {
        let m = 1u64 << (q & 63);
        if v {
            self.x[q >> 6] |= m;
        } else {
            self.x[q >> 6] &= !m;
        }
    }

    #[inline]
    pub fn set_z(&mut self, q: usize, v: bool) {
        let m = 1u64 << (q & 63);
        if v {
            self.z[q >> 6] |= m;
        } else {
            self.z[q >> 6] &= !m;
        }
    }

    #[inline]
    pub fn flip_x(&mut self, q: usize) {
        self.x[q >> 6] ^= 1u64 << (q & 63);
    }

    #[inline]
    pub fn flip_z(&mut self, q: usize) {
        self.z[q >> 6] ^= 1u64 << (q & 63);
    }

    #[inline]
    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x(q), self.z(q))
    }

    #[inline]
    pub fn set(&mut self, q: usize, letter: Letter) {
        let (x, z) = letter.bits();
        self.set_x(q, x);
        self.set_z(q, z);
    }

    /// Multiply a single letter into qubit `q`.
    #[inline]
    pub fn apply(&mut self, q: usize, letter: Letter) {
        let (x, z) = letter.bits();
        if x {
            self.flip_x(q);
        }
        if z {
            self.flip_z(q);
        }
    }

    /// Clears both components on `q` (used when a qubit is measured out).
    #[inline]
    pub fn clear(&mut self, q: usize) {
        self.set_x(q, false);
        self.set_z(q, false);
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|&q| self.x(q) || self.z(q))
            .collect()
    }

    /// In-place product (phase dropped).
    pub fn mul_assign(&mut self, other: &PauliString) -> Result<()> {
        self.check_len(other)?;
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a ^= b;
        }
        for (a, b) in self.z.iter_mut().zip(&other.z) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        let mut out = self.clone();
        out.mul_assign(other)?;
        Ok(out)
    }

    /// True iff the symplectic inner product vanishes.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        Ok(!self.anticommutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn anticommutes_unchecked(&self, other: &PauliString) -> bool {
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones();
        }
        acc & 1 == 1
    }

    /// Operator on the listed qubits, in order, as a new string of that length.
    pub fn restrict(&self, qubits: &[usize]) -> Result<PauliString> {
        let mut out = PauliString::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits: self.n_qubits,
                });
            }
            out.set(i, self.letter(q));
        }
        Ok(out)
    }

    /// Embed `self` (of length `qubits.len()`) into an `n`-qubit string.
    pub fn embed(&self, n_qubits: usize, qubits: &[usize]) -> Result<PauliString> {
        if qubits.len() != self.n_qubits {
            return Err(Error::LengthMismatch {
                left: self.n_qubits,
                right: qubits.len(),
            });
        }
        let mut out = PauliString::identity(n_qubits);
        for (i, &q) in qubits.iter().enumerate() {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            out.set(q, self.letter(i));
        }
        Ok(out)
    }

    /// X and Z parts of qubits `qubits` packed into the low bits of two words
    /// (at most 64 qubits).
    pub fn pack(&self, qubits: &[usize]) -> (u64, u64) {
        debug_assert!(qubits.len() <= 64);
        let mut xs = 0u64;
        let mut zs = 0u64;
        for (i, &q) in qubits.iter().enumerate() {
            xs |= (self.x(q) as u64) << i;
            zs |= (self.z(q) as u64) << i;
        }
        (xs, zs)
    }

    fn check_len(&self, other: &PauliString) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::LengthMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                'I' | '_' | '.' => Ok(Letter::I),
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                'Z' => Ok(Letter::Z),
                other => Err(Error::InvalidParameter(format!(
                    "bad Pauli letter {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString::from_letters(&letters))
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn letter_encoding() {
        assert_eq!(Letter::from_bits(false, false), Letter::I);
        assert_eq!(Letter::from_bits(true, false), Letter::X);
        assert_eq!(Letter::from_bits(false, true), Letter::Z);
        assert_eq!(Letter::from_bits(true, true), Letter::Y);
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        assert!(p("III").commutes(&p("XYZ")).unwrap());
        assert!(p("YI").commutes(&p("YZ")).unwrap());
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(matches!(
            p("X").commutes(&p("XX")),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn composition_is_xor() {
        assert_eq!(p("XZ").mul(&p("ZZ")).unwrap(), p("YI"));
        assert_eq!(p("XYZ").mul(&p("XYZ")).unwrap(), p("III"));
    }

    #[test]
    fn wide_strings_cross_word_boundaries() {
        let mut a = PauliString::identity(130);
        a.set(0, Letter::X);
        a.set(64, Letter::Z);
        a.set(129, Letter::Y);
        assert_eq!(a.weight(), 3);
        assert_eq!(a.support(), vec![0, 64, 129]);
        let b = PauliString::single(130, 129, Letter::X);
        assert!(!a.commutes(&b).unwrap());
    }

    #[test]
    fn restrict_and_embed() {
        let a = p("XIZY");
        let r = a.restrict(&[3, 0]).unwrap();
        assert_eq!(r, p("YX"));
        assert_eq!(r.embed(4, &[3, 0]).unwrap(), p("XIIY"));
    }
}
