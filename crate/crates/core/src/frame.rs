//! Pauli-frame sampler: the throughput engine.
//!
//! A frame is the accumulated Pauli error relative to the ideal run. Gates
//! conjugate it, faults multiply into it, and a measurement outcome flips iff
//! the frame anticommutes with the measured observable.

use crate::circuit::{Circuit, GateKind};
use crate::clifford::conjugate_in_place;
use crate::error::Result;
use crate::noise::{sample_fault, Fault, FaultStream, NoiseModel};
use crate::pauli::PauliString;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    /// Frame over all circuit qubits; measured qubits are cleared.
    pub frame: PauliString,
    /// One flip bit per measurement record.
    pub flips: Vec<bool>,
    /// Pass/fail per checkpoint, in declaration order.
    pub checkpoints: Vec<bool>,
    /// All checkpoints passed.
    pub accepted: bool,
}

/// Where faults come from during a run.
#[derive(Clone, Copy)]
pub enum Faults<'a> {
    None,
    Sampled {
        noise: &'a NoiseModel,
        stream: FaultStream,
    },
    /// Explicit `(event index, fault)` pairs, sorted by event index.
    Injected(&'a [(usize, Fault)]),
}

/// Pre-digested circuit for repeated frame runs.
#[derive(Debug, Clone)]
pub struct FrameSimulator {
    circuit: Circuit,
    /// For each checkpoint, the event index after which it can be evaluated.
    ready_at: Vec<usize>,
    /// Measurement record index per event.
    record_of: Vec<u32>,
}

impl FrameSimulator {
    pub fn new(circuit: Circuit) -> Result<Self> {
        circuit.validate()?;
        let records = circuit.record_indices();
        let mut event_of_record = Vec::new();
        for (i, r) in records.iter().enumerate() {
            if r.is_some() {
                event_of_record.push(i);
            }
        }
        let ready_at = circuit
            .checkpoints
            .iter()
            .map(|cp| {
                cp.parities
                    .iter()
                    .flatten()
                    .map(|&r| event_of_record[r])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let record_of = records
            .iter()
            .map(|r| r.map_or(u32::MAX, |v| v as u32))
            .collect();
        Ok(Self {
            circuit,
            ready_at,
            record_of,
        })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// Runs one trial. With `stop_on_reject`, returns as soon as a checkpoint
    /// fails (later flips are then left at zero).
    pub fn run(
        &self,
        initial: Option<&PauliString>,
        faults: Faults<'_>,
        stop_on_reject: bool,
    ) -> TrialRecord {
        self.run_until(initial, faults, |_| stop_on_reject)
    }

    /// Like [`FrameSimulator::run`], stopping early as soon as a checkpoint
    /// `k` with `fatal(k)` fails.
    pub fn run_until(
        &self,
        initial: Option<&PauliString>,
        faults: Faults<'_>,
        fatal: impl Fn(usize) -> bool,
    ) -> TrialRecord {
        let c = &self.circuit;
        let mut stop = false;
        let mut frame = match initial {
            Some(f) => f.clone(),
            None => PauliString::identity(c.n_qubits),
        };
        let mut flips = vec![false; c.measurement_count()];
        let mut checkpoints = vec![true; c.checkpoints.len()];
        let mut accepted = true;
        let mut injected_pos = 0usize;
        // Checkpoints sorted by readiness.
        let mut order: Vec<usize> = (0..c.checkpoints.len()).collect();
        order.sort_by_key(|&i| self.ready_at[i]);
        let mut next_cp = 0usize;

        for (i, e) in c.events.iter().enumerate() {
            let fault = match faults {
                Faults::None => Fault::None,
                Faults::Sampled { noise, ref stream } => sample_fault(e, noise, stream),
                Faults::Injected(list) => {
                    let mut f = Fault::None;
                    while injected_pos < list.len() && list[injected_pos].0 == i {
                        f = merge(f, list[injected_pos].1, &mut frame);
                        injected_pos += 1;
                    }
                    f
                }
            };
            let (a, b) = (e.qubits[0], e.qubits[1]);
            match e.kind {
                GateKind::MeasX | GateKind::MeasY | GateKind::MeasZ => {
                    fault.apply_to(&mut frame);
                    let flip = match e.kind {
                        GateKind::MeasZ => frame.x(a),
                        GateKind::MeasX => frame.z(a),
                        _ => frame.x(a) ^ frame.z(a),
                    };
                    flips[self.record_of[i] as usize] = flip;
                    frame.clear(a);
                }
                GateKind::PrepX | GateKind::PrepZ => {
                    frame.clear(a);
                    fault.apply_to(&mut frame);
                }
                _ => {
                    conjugate_in_place(&mut frame, e.kind, a, b);
                    fault.apply_to(&mut frame);
                }
            }
            while next_cp < order.len() && self.ready_at[order[next_cp]] == i {
                let k = order[next_cp];
                let ok = c.checkpoints[k]
                    .parities
                    .iter()
                    .all(|par| !par.iter().fold(false, |acc, &r| acc ^ flips[r]));
                checkpoints[k] = ok;
                accepted &= ok;
                stop |= !ok && fatal(k);
                next_cp += 1;
            }
            if stop {
                break;
            }
        }
        TrialRecord {
            frame,
            flips,
            checkpoints,
            accepted,
        }
    }
}

/// Several injected faults at one event: all but the last are applied
/// immediately (they commute with the event's own fault placement).
fn merge(prev: Fault, next: Fault, frame: &mut PauliString) -> Fault {
    if !prev.is_none() {
        prev.apply_to(frame);
    }
    next
}

/// One noisy trial of `circuit` with faults keyed by `(seed, trial, location_id)`.
pub fn sample_noisy(
    circuit: &Circuit,
    noise: &NoiseModel,
    seed: u64,
    trial: u64,
) -> Result<TrialRecord> {
    let sim = FrameSimulator::new(circuit.clone())?;
    Ok(sim.run(
        None,
        Faults::Sampled {
            noise,
            stream: FaultStream::new(seed, trial, 0),
        },
        false,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Checkpoint, GateEvent};
    use crate::pauli::Letter;

    fn prep_meas() -> Circuit {
        let mut c = Circuit::new(1);
        c.push(GateEvent::one(GateKind::PrepZ, 0));
        c.push(GateEvent::one(GateKind::MeasZ, 0));
        c
    }

    #[test]
    fn noiseless_run_has_no_flips() {
        let r = sample_noisy(&prep_meas(), &NoiseModel::noiseless(), 1, 1).unwrap();
        assert_eq!(r.flips, vec![false]);
        assert!(r.frame.is_identity());
    }

    #[test]
    fn z_fault_flips_x_measurement() {
        let mut c = Circuit::new(1);
        c.push(GateEvent::one(GateKind::PrepX, 0));
        c.push(GateEvent::one(GateKind::MeasX, 0));
        let sim = FrameSimulator::new(c).unwrap();
        let inj = [(1usize, Fault::One(0, Letter::Z))];
        assert_eq!(
            sim.run(None, Faults::Injected(&inj), false).flips,
            vec![true]
        );
        let inj = [(1usize, Fault::One(0, Letter::X))];
        assert_eq!(
            sim.run(None, Faults::Injected(&inj), false).flips,
            vec![false]
        );
    }

    #[test]
    fn checkpoint_rejects_and_stops() {
        let mut c = Circuit::new(2);
        c.push(GateEvent::one(GateKind::PrepZ, 0));
        c.push(GateEvent::one(GateKind::MeasZ, 0));
        c.push(GateEvent::one(GateKind::PrepZ, 1));
        c.push(GateEvent::one(GateKind::MeasZ, 1));
        c.checkpoints.push(Checkpoint {
            label: "first".into(),
            parities: vec![vec![0]],
        });
        let sim = FrameSimulator::new(c).unwrap();
        let inj = [
            (0usize, Fault::One(0, Letter::X)),
            (2usize, Fault::One(1, Letter::X)),
        ];
        let r = sim.run(None, Faults::Injected(&inj), true);
        assert!(!r.accepted);
        assert_eq!(r.flips, vec![true, false]);
        let r = sim.run(None, Faults::Injected(&inj), false);
        assert_eq!(r.flips, vec![true, true]);
    }

    #[test]
    fn initial_frame_propagates() {
        let mut c = Circuit::new(2);
        c.inputs = vec![0, 1];
        c.push(GateEvent::two(GateKind::Cnot, 0, 1));
        c.outputs = vec![0, 1];
        let sim = FrameSimulator::new(c).unwrap();
        let init: PauliString = "XI".parse().unwrap();
        let r = sim.run(Some(&init), Faults::None, false);
        assert_eq!(r.frame.to_string(), "XX");
    }
}
