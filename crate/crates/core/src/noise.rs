//! Stochastic Pauli noise and the counter-based random stream that drives it.
//!
//! Every random draw is a pure function of `(seed, trial, stream, location_id)`,
//! so a trial replays identically no matter which worker runs it or in which
//! order its locations are visited.

use serde::{Deserialize, Serialize};

use crate::circuit::{GateEvent, GateKind};
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString};

/// Fault distribution attached to single-qubit unitary gates (`H`, `S`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SingleQubitRule {
    /// Uniform over {X, Y, Z} with the given total probability.
    Uniform(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Mean error rate.
    pub p: f64,
    /// Probability of each of the 15 nontrivial two-qubit Paulis after a two-qubit gate.
    pub p_two: f64,
    pub p_prep: f64,
    pub p_meas: f64,
    /// Effective waiting time; a `WAIT` event faults with total probability `tau * p`.
    pub tau: f64,
    pub single_qubit: SingleQubitRule,
}

impl NoiseModel {
    /// `(p_two, p_prep, p_meas) = (p/15, 4p/15, 4p/15)`, single-qubit gates at rate `p`, `tau = 0`.
    pub fn standard(p: f64) -> Self {
        Self {
            p,
            p_two: p / 15.0,
            p_prep: 4.0 * p / 15.0,
            p_meas: 4.0 * p / 15.0,
            tau: 0.0,
            single_qubit: SingleQubitRule::Uniform(p),
        }
    }

    pub fn noiseless() -> Self {
        Self::standard(0.0)
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let SingleQubitRule::Uniform(ps) = self.single_qubit;
        let checks = [
            ("p", self.p),
            ("15*p_two", 15.0 * self.p_two),
            ("p_prep", self.p_prep),
            ("p_meas", self.p_meas),
            ("single-qubit rate", ps),
            ("tau*p", self.tau * self.p),
        ];
        for (name, v) in checks {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(Error::InvalidNoise(format!(
                    "{name} = {v} is not a probability"
                )));
            }
        }
        if self.tau < 0.0 {
            return Err(Error::InvalidNoise(format!(
                "tau = {} is negative",
                self.tau
            )));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        let SingleQubitRule::Uniform(ps) = self.single_qubit;
        self.p_two == 0.0
            && self.p_prep == 0.0
            && self.p_meas == 0.0
            && ps == 0.0
            && self.tau * self.p == 0.0
    }
}

/// A fault at one location: up to two single-qubit letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fault {
    None,
    One(usize, Letter),
    Two(usize, Letter, usize, Letter),
}

impl Fault {
    pub fn to_pauli(self, n_qubits: usize) -> PauliString {
        let mut p = PauliString::identity(n_qubits);
        self.apply_to(&mut p);
        p
    }

    #[inline]
    pub fn apply_to(self, frame: &mut PauliString) {
        match self {
            Fault::None => {}
            Fault::One(q, l) => frame.apply(q, l),
            Fault::Two(a, la, b, lb) => {
                frame.apply(a, la);
                frame.apply(b, lb);
            }
        }
    }

    pub fn is_none(self) -> bool {
        match self {
            Fault::None => true,
            Fault::One(_, l) => l == Letter::I,
            Fault::Two(_, a, _, b) => a == Letter::I && b == Letter::I,
        }
    }

    /// Every nontrivial fault an event can suffer under some nonzero-rate model.
    pub fn all_for(event: &GateEvent) -> Vec<Fault> {
        let q = event.qubits[0];
        match event.kind {
            GateKind::Cnot | GateKind::Cz => (1..16)
                .map(|i| Fault::Two(q, Letter::ALL[i / 4], event.qubits[1], Letter::ALL[i % 4]))
                .collect(),
            GateKind::PrepZ | GateKind::MeasZ => vec![Fault::One(q, Letter::X)],
            GateKind::PrepX | GateKind::MeasX | GateKind::MeasY => vec![Fault::One(q, Letter::Z)],
            GateKind::H | GateKind::S | GateKind::Wait => Letter::NONTRIVIAL
                .iter()
                .map(|&l| Fault::One(q, l))
                .collect(),
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic random stream keyed by `(seed, trial, stream)`; draws are
/// indexed by location id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaultStream {
    key: u64,
}

impl FaultStream {
    pub fn new(seed: u64, trial: u64, stream: u64) -> Self {
        let k = mix64(seed ^ GOLDEN);
        let k = mix64(
            k ^ trial
                .wrapping_mul(GOLDEN)
                .wrapping_add(0x632B_E59B_D9B4_E019),
        );
        let k = mix64(k ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93).wrapping_add(1));
        Self { key: k }
    }

    /// Child stream, for sub-builds that are retried independently.
    pub fn child(&self, index: u64) -> Self {
        Self {
            key: mix64(self.key ^ mix64(index.wrapping_add(0xA076_1D64_78BD_642F))),
        }
    }

    #[inline]
    pub fn bits(&self, location_id: u64) -> u64 {
        mix64(mix64(self.key ^ location_id.wrapping_mul(GOLDEN)) ^ self.key.rotate_left(17))
    }

    /// Uniform draw in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&self, location_id: u64) -> f64 {
        (self.bits(location_id) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Draws the fault that follows `event` (or precedes it, for measurements).
#[inline]
pub fn sample_fault(event: &GateEvent, noise: &NoiseModel, stream: &FaultStream) -> Fault {
    let q = event.qubits[0];
    match event.kind {
        GateKind::Cnot | GateKind::Cz => {
            if noise.p_two <= 0.0 {
                return Fault::None;
            }
            let u = stream.uniform(event.location_id);
            let idx = (u / noise.p_two) as usize;
            if idx >= 15 {
                return Fault::None;
            }
            let i = idx + 1;
            Fault::Two(q, Letter::ALL[i / 4], event.qubits[1], Letter::ALL[i % 4])
        }
        GateKind::PrepZ | GateKind::PrepX => bernoulli_flip(event, noise.p_prep, stream),
        GateKind::MeasZ | GateKind::MeasX | GateKind::MeasY => {
            bernoulli_flip(event, noise.p_meas, stream)
        }
        GateKind::H | GateKind::S => {
            let SingleQubitRule::Uniform(rate) = noise.single_qubit;
            uniform_letter(q, rate, stream.uniform(event.location_id))
        }
        GateKind::Wait => uniform_letter(q, noise.tau * noise.p, stream.uniform(event.location_id)),
    }
}

#[inline]
fn bernoulli_flip(event: &GateEvent, prob: f64, stream: &FaultStream) -> Fault {
    if prob <= 0.0 || stream.uniform(event.location_id) >= prob {
        return Fault::None;
    }
    let letter = match event.kind {
        GateKind::PrepZ | GateKind::MeasZ => Letter::X,
        _ => Letter::Z,
    };
    Fault::One(event.qubits[0], letter)
}

#[inline]
fn uniform_letter(q: usize, rate: f64, u: f64) -> Fault {
    if rate <= 0.0 || u >= rate {
        return Fault::None;
    }
    let k = ((u / rate) * 3.0) as usize;
    Fault::One(q, Letter::NONTRIVIAL[k.min(2)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(kind: GateKind) -> GateEvent {
        let mut e = if kind.arity() == 2 {
            GateEvent::two(kind, 0, 1)
        } else {
            GateEvent::one(kind, 0)
        };
        e.location_id = 7;
        e
    }

    #[test]
    fn standard_split() {
        let n = NoiseModel::standard(0.15);
        assert!((n.p_two - 0.01).abs() < 1e-15);
        assert!((n.p_prep - 0.04).abs() < 1e-15);
        assert!((n.p_meas - 0.04).abs() < 1e-15);
        n.validate().unwrap();
    }

    #[test]
    fn invalid_noise_rejected() {
        let mut n = NoiseModel::standard(0.5);
        n.p_two = 0.1;
        assert!(n.validate().is_err());
    }

    #[test]
    fn zero_noise_never_faults() {
        let n = NoiseModel::noiseless();
        for kind in [
            GateKind::Cnot,
            GateKind::PrepX,
            GateKind::MeasZ,
            GateKind::H,
            GateKind::Wait,
        ] {
            for t in 0..1000 {
                assert_eq!(
                    sample_fault(&ev(kind), &n, &FaultStream::new(1, t, 0)),
                    Fault::None
                );
            }
        }
    }

    #[test]
    fn draws_are_keyed_not_sequenced() {
        let s = FaultStream::new(42, 3, 9);
        let a: Vec<u64> = (0..10).map(|l| s.bits(l)).collect();
        let b: Vec<u64> = (0..10)
            .rev()
            .map(|l| s.bits(l))
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        assert_eq!(a, b);
        assert_ne!(
            FaultStream::new(42, 3, 9).bits(0),
            FaultStream::new(42, 4, 9).bits(0)
        );
        assert_ne!(s.child(0).bits(0), s.child(1).bits(0));
    }

    #[test]
    fn flip_letters_match_basis() {
        let n = NoiseModel::standard(1.0);
        let hit = |kind| {
            (0..100)
                .map(|t| sample_fault(&ev(kind), &n, &FaultStream::new(5, t, 0)))
                .find(|f| !f.is_none())
                .unwrap()
        };
        assert_eq!(hit(GateKind::MeasX), Fault::One(0, Letter::Z));
        assert_eq!(hit(GateKind::MeasZ), Fault::One(0, Letter::X));
        assert_eq!(hit(GateKind::PrepZ), Fault::One(0, Letter::X));
        assert_eq!(hit(GateKind::PrepX), Fault::One(0, Letter::Z));
    }

    #[test]
    fn enumerated_faults() {
        assert_eq!(Fault::all_for(&ev(GateKind::Cz)).len(), 15);
        assert_eq!(
            Fault::all_for(&ev(GateKind::MeasX)),
            vec![Fault::One(0, Letter::Z)]
        );
    }
}
