//! Timed gate/preparation/measurement circuits with addressable fault locations.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    S,
    Cnot,
    Cz,
    PrepZ,
    PrepX,
    MeasX,
    MeasZ,
    MeasY,
    Wait,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz => 2,
            _ => 1,
        }
    }

    pub fn is_unitary(self) -> bool {
        matches!(
            self,
            GateKind::H | GateKind::S | GateKind::Cnot | GateKind::Cz
        )
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, GateKind::MeasX | GateKind::MeasZ | GateKind::MeasY)
    }

    pub fn is_preparation(self) -> bool {
        matches!(self, GateKind::PrepX | GateKind::PrepZ)
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::PrepZ => "PREP_Z",
            GateKind::PrepX => "PREP_X",
            GateKind::MeasX => "MEAS_X",
            GateKind::MeasZ => "MEAS_Z",
            GateKind::MeasY => "MEAS_Y",
            GateKind::Wait => "WAIT",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        Some(match s {
            "H" => GateKind::H,
            "S" => GateKind::S,
            "CNOT" => GateKind::Cnot,
            "CZ" => GateKind::Cz,
            "PREP_Z" => GateKind::PrepZ,
            "PREP_X" => GateKind::PrepX,
            "MEAS_X" => GateKind::MeasX,
            "MEAS_Z" => GateKind::MeasZ,
            "MEAS_Y" => GateKind::MeasY,
            "WAIT" => GateKind::Wait,
            _ => return None,
        })
    }
}

/// One event. For `CNOT`, `qubits[0]` is the control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateEvent {
    pub kind: GateKind,
    pub qubits: [usize; 2],
    pub location_id: u64,
    pub time_step: u32,
}

impl GateEvent {
    pub fn one(kind: GateKind, q: usize) -> Self {
        Self {
            kind,
            qubits: [q, usize::MAX],
            location_id: 0,
            time_step: 0,
        }
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        Self {
            kind,
            qubits: [a, b],
            location_id: 0,
            time_step: 0,
        }
    }

    #[inline]
    pub fn targets(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }
}

/// Postselection checkpoint: every listed parity of measurement flip bits must vanish.
///
/// Entries of `parities` are lists of measurement record indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub label: String,
    pub parities: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub events: Vec<GateEvent>,
    /// Qubits whose state is supplied from outside (not prepared here).
    pub inputs: Vec<usize>,
    /// Qubits alive at the end that carry the result.
    pub outputs: Vec<usize>,
    pub checkpoints: Vec<Checkpoint>,
    /// Next free time step per qubit, maintained by `push`.
    #[serde(skip)]
    ready: Vec<u32>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ..Default::default()
        }
    }

    /// Appends an event, assigning the next location id and the earliest
    /// time step after every involved qubit's previous event.
    pub fn push(&mut self, mut event: GateEvent) -> usize {
        event.location_id = self.events.len() as u64;
        if self.ready.len() < self.n_qubits {
            self.ready.resize(self.n_qubits, 0);
        }
        let t = event
            .targets()
            .iter()
            .map(|&q| self.ready.get(q).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        for &q in event.targets() {
            if let Some(r) = self.ready.get_mut(q) {
                *r = t + 1;
            }
        }
        event.time_step = t;
        self.events.push(event);
        self.events.len() - 1
    }

    /// Number of measurement events (= length of a measurement record).
    pub fn measurement_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind.is_measurement())
            .count()
    }

    /// Measurement record index of each event (None for non-measurements).
    pub fn record_indices(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        self.events
            .iter()
            .map(|e| {
                if e.kind.is_measurement() {
                    next += 1;
                    Some(next - 1)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn depth(&self) -> u32 {
        self.events
            .iter()
            .map(|e| e.time_step + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Appends `other` with its qubit `i` mapped to `mapping[i]`. Returns the
    /// record offset that `other`'s measurement indices were shifted by.
    ///
    /// Inputs and outputs of `other` are not merged; the caller decides which
    /// wires remain live.
    pub fn append(&mut self, other: &Circuit, mapping: &[usize]) -> Result<usize> {
        if mapping.len() != other.n_qubits {
            return Err(Error::LengthMismatch {
                left: other.n_qubits,
                right: mapping.len(),
            });
        }
        if let Some(&bad) = mapping.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::QubitOutOfRange {
                index: bad,
                n_qubits: self.n_qubits,
            });
        }
        let offset = self.measurement_count();
        for e in &other.events {
            let mut ev = *e;
            for q in ev.qubits.iter_mut().take(e.kind.arity()) {
                *q = mapping[*q];
            }
            self.push(ev);
        }
        for cp in &other.checkpoints {
            self.checkpoints.push(Checkpoint {
                label: cp.label.clone(),
                parities: cp
                    .parities
                    .iter()
                    .map(|par| par.iter().map(|i| i + offset).collect())
                    .collect(),
            });
        }
        Ok(offset)
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        let mut seen_loc = HashSet::new();
        let mut alive: Vec<bool> = vec![false; self.n_qubits];
        let mut measured: Vec<bool> = vec![false; self.n_qubits];
        for &q in &self.inputs {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits: self.n_qubits,
                });
            }
            alive[q] = true;
        }
        let mut busy: std::collections::HashMap<u32, HashSet<usize>> = Default::default();
        for e in &self.events {
            if !seen_loc.insert(e.location_id) {
                return Err(Error::InvalidCircuit(format!(
                    "duplicate location id {}",
                    e.location_id
                )));
            }
            let qs = e.targets();
            for &q in qs {
                if q >= self.n_qubits {
                    return Err(Error::QubitOutOfRange {
                        index: q,
                        n_qubits: self.n_qubits,
                    });
                }
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(Error::InvalidCircuit(format!(
                    "two-qubit gate on repeated qubit {}",
                    qs[0]
                )));
            }
            let slot = busy.entry(e.time_step).or_default();
            for &q in qs {
                if !slot.insert(q) {
                    return Err(Error::InvalidCircuit(format!(
                        "qubit {q} used twice at time step {}",
                        e.time_step
                    )));
                }
            }
            for &q in qs {
                if measured[q] {
                    return Err(Error::MeasuredQubit(q));
                }
                if e.kind.is_preparation() {
                    if alive[q] {
                        return Err(Error::InvalidCircuit(format!("qubit {q} prepared twice")));
                    }
                    alive[q] = true;
                } else if !alive[q] {
                    return Err(Error::InvalidCircuit(format!(
                        "qubit {q} used before preparation"
                    )));
                }
                if e.kind.is_measurement() {
                    measured[q] = true;
                    alive[q] = false;
                }
            }
        }
        for &q in &self.outputs {
            if q >= self.n_qubits || !alive[q] {
                return Err(Error::InvalidCircuit(format!(
                    "output qubit {q} is not alive at the end"
                )));
            }
        }
        let m = self.measurement_count();
        for cp in &self.checkpoints {
            if cp.parities.iter().flatten().any(|&i| i >= m) {
                return Err(Error::InvalidCircuit(format!(
                    "checkpoint {} references a missing record",
                    cp.label
                )));
            }
        }
        Ok(())
    }

    /// Line-per-event text dump: `KIND q0 [q1] t=<step> loc=<id>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# qubits {}", self.n_qubits);
        for e in &self.events {
            let qs: Vec<String> = e.targets().iter().map(|q| q.to_string()).collect();
            let _ = writeln!(
                out,
                "{} {} t={} loc={}",
                e.kind.mnemonic(),
                qs.join(" "),
                e.time_step,
                e.location_id
            );
        }
        out
    }

    /// Parses the events of [`Circuit::to_text`]. Inputs, outputs and
    /// checkpoints are not part of the text format.
    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut c = Circuit::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# qubits ") {
                c.n_qubits = rest.trim().parse().map_err(|_| {
                    Error::InvalidCircuit(format!("line {}: bad qubit count", lineno + 1))
                })?;
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let bad =
                || Error::InvalidCircuit(format!("line {}: cannot parse {line:?}", lineno + 1));
            let mut parts = line.split_whitespace();
            let kind = parts
                .next()
                .and_then(GateKind::from_mnemonic)
                .ok_or_else(bad)?;
            let mut qubits = [usize::MAX; 2];
            for slot in qubits.iter_mut().take(kind.arity()) {
                *slot = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            }
            let time_step = parts
                .next()
                .and_then(|s| s.strip_prefix("t="))
                .and_then(|s| s.parse().ok())
                .ok_or_else(bad)?;
            let location_id = parts
                .next()
                .and_then(|s| s.strip_prefix("loc="))
                .and_then(|s| s.parse().ok())
                .ok_or_else(bad)?;
            c.events.push(GateEvent {
                kind,
                qubits,
                location_id,
                time_step,
            });
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asap_scheduling_keeps_same_step_disjoint() {
        let mut c = Circuit::new(3);
        c.push(GateEvent::one(GateKind::PrepX, 0));
        c.push(GateEvent::one(GateKind::PrepZ, 1));
        c.push(GateEvent::one(GateKind::PrepZ, 2));
        c.push(GateEvent::two(GateKind::Cnot, 0, 1));
        c.push(GateEvent::two(GateKind::Cnot, 0, 2));
        c.push(GateEvent::one(GateKind::MeasZ, 1));
        assert_eq!(
            c.events.iter().map(|e| e.time_step).collect::<Vec<_>>(),
            vec![0, 0, 0, 1, 2, 2]
        );
        c.validate().unwrap();
        assert_eq!(c.depth(), 3);
    }

    #[test]
    fn use_after_measurement_rejected() {
        let mut c = Circuit::new(1);
        c.push(GateEvent::one(GateKind::PrepZ, 0));
        c.push(GateEvent::one(GateKind::MeasZ, 0));
        c.push(GateEvent::one(GateKind::H, 0));
        assert_eq!(c.validate(), Err(Error::MeasuredQubit(0)));
    }

    #[test]
    fn unprepared_qubit_rejected_unless_input() {
        let mut c = Circuit::new(1);
        c.push(GateEvent::one(GateKind::H, 0));
        assert!(c.validate().is_err());
        c.inputs.push(0);
        c.validate().unwrap();
    }

    #[test]
    fn repeated_qubit_rejected() {
        let mut c = Circuit::new(2);
        c.inputs = vec![0, 1];
        c.push(GateEvent::two(GateKind::Cz, 1, 1));
        assert!(c.validate().is_err());
    }

    #[test]
    fn text_format_round_trips_events() {
        let mut c = Circuit::new(2);
        c.push(GateEvent::one(GateKind::PrepX, 0));
        c.push(GateEvent::one(GateKind::PrepZ, 1));
        c.push(GateEvent::two(GateKind::Cz, 0, 1));
        c.push(GateEvent::one(GateKind::MeasY, 1));
        let text = c.to_text();
        assert!(text.contains("CZ 0 1 t=1 loc=2"));
        let back = Circuit::from_text(&text).unwrap();
        assert_eq!(back.events, c.events);
        assert_eq!(back.n_qubits, 2);
    }

    #[test]
    fn append_shifts_records_and_maps_qubits() {
        let mut inner = Circuit::new(1);
        inner.push(GateEvent::one(GateKind::PrepZ, 0));
        inner.push(GateEvent::one(GateKind::MeasZ, 0));
        inner.checkpoints.push(Checkpoint {
            label: "m".into(),
            parities: vec![vec![0]],
        });
        let mut outer = Circuit::new(3);
        outer.append(&inner, &[2]).unwrap();
        let off = outer.append(&inner, &[1]).unwrap();
        assert_eq!(off, 1);
        assert_eq!(outer.checkpoints[1].parities, vec![vec![1]]);
        assert_eq!(outer.events[2].qubits[0], 1);
        outer.validate().unwrap();
    }
}
