//! Fault-tolerant construction of verified clusters from Steane blocks.

pub mod connect;
pub mod graph;
pub mod resources;
pub mod star;
pub mod verification;

pub use connect::{
    connect, ConnectionOutcome, ConnectionStatus, Connector, LinkRecord, LinkStatus,
};
pub use graph::{LogicalGraph, MeasurementReduction, Reducer};
pub use resources::{count_resources, ResourceCount};
pub use star::{build_star, BuildContext, BuildStats, StarClusterState, StarFactory};
pub use verification::{double_verification_circuit, reverification_circuit, VerificationPlan};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::frame::{Faults, FrameSimulator};
use crate::gf2::BitRow;
use crate::noise::Fault;
use crate::steane::{syndrome, CodeBlock};
use crate::tableau::IdealReference;

/// Effect of every single fault of a circuit, injected one at a time.
#[derive(Debug, Clone)]
pub struct LocationScan {
    pub event: usize,
    pub faults: Vec<Fault>,
    /// Some checkpoint failed.
    pub detected: Vec<bool>,
    /// Accepted, yet the output blocks carry a logical error.
    pub logical: Vec<bool>,
}

/// Injects each single fault of `circuit` and classifies the accepted
/// outputs on `blocks` with `reducer` (indexed like `blocks`).
pub fn scan_single_faults(
    circuit: &Circuit,
    blocks: &[CodeBlock],
    reducer: &Reducer,
) -> Result<Vec<LocationScan>> {
    if reducer.blocks() != blocks.len() {
        return Err(Error::LengthMismatch {
            left: reducer.blocks(),
            right: blocks.len(),
        });
    }
    let sim = FrameSimulator::new(circuit.clone())?;
    let mut out = Vec::with_capacity(circuit.events.len());
    for (i, e) in circuit.events.iter().enumerate() {
        let faults = Fault::all_for(e);
        let mut detected = Vec::with_capacity(faults.len());
        let mut logical = Vec::with_capacity(faults.len());
        for &f in &faults {
            let r = sim.run(None, Faults::Injected(&[(i, f)]), true);
            detected.push(!r.accepted);
            logical.push(if r.accepted {
                let masks: Vec<(u8, u8)> = blocks.iter().map(|b| b.masks(&r.frame)).collect();
                !reducer.is_trivial(&graph::logical_row(&masks))
            } else {
                false
            });
        }
        out.push(LocationScan {
            event: i,
            faults,
            detected,
            logical,
        });
    }
    Ok(out)
}

/// Logical stabilizer rows of a reference state over the given blocks. Fails
/// if some reference stabilizer is not a logical operator of the blocks.
pub fn logical_stabilizers(
    reference: &IdealReference,
    blocks: &[CodeBlock],
) -> Result<Vec<BitRow>> {
    let mut rows = Vec::with_capacity(reference.stabilizers.len());
    for s in &reference.stabilizers {
        let masks: Vec<(u8, u8)> = blocks.iter().map(|b| b.masks(s)).collect();
        if masks
            .iter()
            .any(|&(x, z)| syndrome(x) != 0 || syndrome(z) != 0)
        {
            return Err(Error::InvalidCircuit(format!(
                "reference stabilizer {s} leaves the code space"
            )));
        }
        let covered: usize = masks
            .iter()
            .map(|&(x, z)| (x | z).count_ones() as usize)
            .sum();
        if covered != s.weight() {
            return Err(Error::InvalidCircuit(format!(
                "reference stabilizer {s} acts outside the blocks"
            )));
        }
        rows.push(graph::logical_row(&masks));
    }
    Ok(rows)
}
