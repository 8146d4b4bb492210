//! Size and postselection profile of a star build.
//!
//! `N` is the expected number of physical qubits plus operations (preparations,
//! gates, measurements) consumed by the inputs of one star-assembly attempt,
//! including the retries of the lower stages, plus that attempt itself. `K` is
//! the number of fault locations of the star-assembly stage at which some
//! single fault trips a checkpoint. The assembly's own acceptance then makes
//! the total cost roughly `N (1 - p)^-K`. Since most covered locations only
//! catch some of their faults, `k_effective` (total detected fault weight
//! over `p`) is the exponent that reproduces the first-order acceptance.
//!
//! Stage acceptance rates are the first-order values obtained from an
//! exhaustive single-fault scan, so the count is deterministic.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind};
use crate::error::Result;
use crate::frame::{Faults, FrameSimulator};
use crate::noise::{Fault, NoiseModel};
use crate::protocols::star::{dv_stage, pair_stage, star_stage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageProfile {
    pub qubits: usize,
    pub operations: usize,
    pub locations: usize,
    /// Locations with at least one detected single fault.
    pub covered: usize,
    /// Summed probability of the detected single faults.
    pub detected_weight: f64,
    /// First-order acceptance probability.
    pub acceptance: f64,
}

impl StageProfile {
    pub fn size(&self) -> f64 {
        (self.qubits + self.operations) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceCount {
    pub leaves: usize,
    pub p: f64,
    pub dv: StageProfile,
    pub pair: StageProfile,
    pub star: StageProfile,
    /// Expected qubits plus operations per star-assembly attempt.
    pub n: f64,
    pub k: usize,
    pub k_effective: f64,
    /// Expected qubits plus operations per accepted star.
    pub expected_total: f64,
}

/// Probability of one specific nontrivial fault at an event.
fn fault_probability(kind: GateKind, noise: &NoiseModel) -> f64 {
    match kind {
        GateKind::Cnot | GateKind::Cz => noise.p_two,
        GateKind::PrepX | GateKind::PrepZ => noise.p_prep,
        GateKind::MeasX | GateKind::MeasY | GateKind::MeasZ => noise.p_meas,
        GateKind::H | GateKind::S => {
            let crate::noise::SingleQubitRule::Uniform(r) = noise.single_qubit;
            r / 3.0
        }
        GateKind::Wait => noise.tau * noise.p / 3.0,
    }
}

pub fn stage_profile(circuit: &Circuit, noise: &NoiseModel) -> Result<StageProfile> {
    let sim = FrameSimulator::new(circuit.clone())?;
    let mut covered = 0;
    let mut log_accept = 0.0f64;
    let mut detected_weight = 0.0;
    for (i, e) in circuit.events.iter().enumerate() {
        let mut any = false;
        let mut weight = 0.0;
        for f in Fault::all_for(e) {
            if !sim.run(None, Faults::Injected(&[(i, f)]), true).accepted {
                any = true;
                weight += fault_probability(e.kind, noise);
            }
        }
        covered += any as usize;
        detected_weight += weight;
        log_accept += (-weight).ln_1p();
    }
    Ok(StageProfile {
        qubits: circuit.n_qubits - circuit.inputs.len(),
        operations: circuit.events.len(),
        locations: circuit.events.len(),
        covered,
        detected_weight,
        acceptance: log_accept.exp(),
    })
}

/// Resource profile of a star with `leaves` leaves at physical error rate `p`.
pub fn count_resources(leaves: usize, p: f64) -> Result<ResourceCount> {
    let noise = NoiseModel::standard(p);
    noise.validate()?;
    let dv = stage_profile(dv_stage()?.circuit(), &noise)?;
    let pair = stage_profile(pair_stage()?.circuit(), &noise)?;
    let star = stage_profile(star_stage(leaves)?.circuit(), &noise)?;
    let e_dv = dv.size() / dv.acceptance;
    let e_pair = (2.0 * e_dv + pair.size()) / pair.acceptance;
    let n = e_dv + leaves as f64 * e_pair + star.size();
    Ok(ResourceCount {
        leaves,
        p,
        dv,
        pair,
        star,
        n,
        k: star.covered,
        k_effective: if p > 0.0 {
            star.detected_weight / p
        } else {
            0.0
        },
        expected_total: n / star.acceptance,
    })
}
