//! Double verification of a logical block.
//!
//! Each round couples a primary |0_L⟩ ancilla to the target, and a secondary
//! |0_L⟩ ancilla to the primary so that errors the primary's own measurement
//! is blind to are caught as well. Two rounds cover both error sectors:
//!
//! 1. Z check: `CNOT(primary → target)` copies the target's Z errors onto the
//!    primary, which is read out in X (syndrome only). The secondary is fed by
//!    `CNOT(primary → secondary)` and read out in Z, logical parity included.
//! 2. X check: for a |+_L⟩ (or any graph-state) target,
//!    `CZ(target, primary)` turns target X errors into primary Z errors, read
//!    out in X; the secondary is coupled as in round 1. For a |0_L⟩ target the
//!    round uses `CNOT(target → primary)` with a Z readout (logical parity
//!    included) and a secondary fed by `CNOT(secondary → primary)`, read out
//!    in X.
//!
//! Every coupling acts as the logical identity on the target, so the same
//! rounds re-verify blocks that are already part of a cluster.

use serde::{Deserialize, Serialize};

use crate::circuit::{Checkpoint, Circuit, GateKind};
use crate::error::Result;
use crate::steane::{
    block_parities, push_encoder, push_measure, push_transversal, Basis, CodeBlock, LogicalState, N,
};

/// Appends a fresh 7-wire block to the circuit.
pub fn alloc_block(c: &mut Circuit) -> CodeBlock {
    let first = c.n_qubits;
    c.n_qubits += N;
    CodeBlock::with_offset(first / N, first)
}

pub fn alloc_encoded(c: &mut Circuit, state: LogicalState) -> CodeBlock {
    let b = alloc_block(c);
    push_encoder(c, state, &b.wires);
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coupling {
    /// `CNOT(primary → target)`.
    PrimaryControlsTarget,
    /// `CZ(target, primary)`.
    ControlledZ,
    /// `CNOT(target → primary)`.
    TargetControlsPrimary,
}

/// One verification round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRound {
    pub coupling: Coupling,
    pub primary: CodeBlock,
    pub secondary: CodeBlock,
    pub primary_basis: Basis,
    pub secondary_basis: Basis,
    /// Indices into `Circuit::checkpoints`.
    pub checkpoints: Vec<usize>,
    /// Measurement records of the primary and secondary blocks.
    pub primary_records: [usize; N],
    pub secondary_records: [usize; N],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationPlan {
    pub target: CodeBlock,
    pub target_state: Option<LogicalState>,
    pub rounds: Vec<CheckRound>,
}

impl VerificationPlan {
    pub fn ancillas(&self) -> impl Iterator<Item = &CodeBlock> {
        self.rounds.iter().flat_map(|r| [&r.primary, &r.secondary])
    }

    pub fn checkpoint_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.rounds
            .iter()
            .flat_map(|r| r.checkpoints.iter().copied())
    }
}

/// Appends both check rounds for `target`. `zero_target` selects the X-check
/// variant for a |0_L⟩ target; everything else uses the CZ variant.
pub fn push_verification(
    c: &mut Circuit,
    target: &CodeBlock,
    zero_target: bool,
    label: &str,
) -> Result<Vec<CheckRound>> {
    push_verification_with_depth(c, target, zero_target, label, 0)
}

/// A |0_L⟩ ancilla, itself double-verified `depth` levels deep.
fn alloc_ancilla(c: &mut Circuit, depth: usize, label: &str) -> Result<CodeBlock> {
    let b = alloc_encoded(c, LogicalState::Zero);
    if depth > 0 {
        push_verification_with_depth(c, &b, true, label, depth - 1)?;
    }
    Ok(b)
}

/// [`push_verification`] with ancillas verified `ancilla_depth` levels deep.
pub fn push_verification_with_depth(
    c: &mut Circuit,
    target: &CodeBlock,
    zero_target: bool,
    label: &str,
    ancilla_depth: usize,
) -> Result<Vec<CheckRound>> {
    let zp = alloc_ancilla(c, ancilla_depth, &format!("{label}/zcheck/primary"))?;
    let zs = alloc_ancilla(c, ancilla_depth, &format!("{label}/zcheck/secondary"))?;
    let z = z_check(c, target, zp, zs, label)?;
    let xp = alloc_ancilla(c, ancilla_depth, &format!("{label}/xcheck/primary"))?;
    let xs = alloc_ancilla(c, ancilla_depth, &format!("{label}/xcheck/secondary"))?;
    Ok(vec![z, x_check(c, target, zero_target, xp, xs, label)?])
}

/// Both check rounds using supplied |0_L⟩ ancillas `[z primary, z
/// secondary, x primary, x secondary]`.
pub fn push_verification_with_ancillas(
    c: &mut Circuit,
    target: &CodeBlock,
    zero_target: bool,
    label: &str,
    [zp, zs, xp, xs]: [CodeBlock; 4],
) -> Result<Vec<CheckRound>> {
    Ok(vec![
        z_check(c, target, zp, zs, label)?,
        x_check(c, target, zero_target, xp, xs, label)?,
    ])
}

fn z_check(
    c: &mut Circuit,
    target: &CodeBlock,
    p: CodeBlock,
    s: CodeBlock,
    label: &str,
) -> Result<CheckRound> {
    push_transversal(c, GateKind::Cnot, &p, target)?;
    push_transversal(c, GateKind::Cnot, &p, &s)?;
    Ok(finish_round(
        c,
        Coupling::PrimaryControlsTarget,
        p,
        s,
        (Basis::X, false),
        (Basis::Z, true),
        &format!("{label}/zcheck"),
    ))
}

fn x_check(
    c: &mut Circuit,
    target: &CodeBlock,
    zero_target: bool,
    p: CodeBlock,
    s: CodeBlock,
    label: &str,
) -> Result<CheckRound> {
    let label = format!("{label}/xcheck");
    if zero_target {
        push_transversal(c, GateKind::Cnot, target, &p)?;
        push_transversal(c, GateKind::Cnot, &s, &p)?;
        Ok(finish_round(
            c,
            Coupling::TargetControlsPrimary,
            p,
            s,
            (Basis::Z, true),
            (Basis::X, false),
            &label,
        ))
    } else {
        push_transversal(c, GateKind::Cz, target, &p)?;
        push_transversal(c, GateKind::Cnot, &p, &s)?;
        Ok(finish_round(
            c,
            Coupling::ControlledZ,
            p,
            s,
            (Basis::X, false),
            (Basis::Z, true),
            &label,
        ))
    }
}

fn finish_round(
    c: &mut Circuit,
    coupling: Coupling,
    primary: CodeBlock,
    secondary: CodeBlock,
    (pb, p_logical): (Basis, bool),
    (sb, s_logical): (Basis, bool),
    label: &str,
) -> CheckRound {
    let pr = push_measure(c, pb, &primary);
    let sr = push_measure(c, sb, &secondary);
    let first = c.checkpoints.len();
    c.checkpoints.push(Checkpoint {
        label: format!("{label}/primary"),
        parities: block_parities(&pr, p_logical),
    });
    c.checkpoints.push(Checkpoint {
        label: format!("{label}/secondary"),
        parities: block_parities(&sr, s_logical),
    });
    CheckRound {
        coupling,
        primary,
        secondary,
        primary_basis: pb,
        secondary_basis: sb,
        checkpoints: vec![first, first + 1],
        primary_records: pr,
        secondary_records: sr,
    }
}

/// Encodes `target` and double-verifies it. The output block is block 0.
pub fn double_verification_circuit(target: LogicalState) -> Result<(Circuit, VerificationPlan)> {
    double_verification_circuit_with_depth(target, 0)
}

/// [`double_verification_circuit`] with ancillas verified `ancilla_depth` levels deep.
pub fn double_verification_circuit_with_depth(
    target: LogicalState,
    ancilla_depth: usize,
) -> Result<(Circuit, VerificationPlan)> {
    let mut c = Circuit::new(0);
    let t = alloc_encoded(&mut c, target);
    let rounds = push_verification_with_depth(
        &mut c,
        &t,
        target == LogicalState::Zero,
        "dv",
        ancilla_depth,
    )?;
    c.outputs = t.wires.to_vec();
    Ok((
        c,
        VerificationPlan {
            target: t,
            target_state: Some(target),
            rounds,
        },
    ))
}

/// Re-verification of an externally supplied block (block 0, an input).
pub fn reverification_circuit() -> Result<(Circuit, VerificationPlan)> {
    let mut c = Circuit::new(0);
    let t = alloc_block(&mut c);
    c.inputs = t.wires.to_vec();
    let rounds = push_verification(&mut c, &t, false, "rv")?;
    c.outputs = t.wires.to_vec();
    Ok((
        c,
        VerificationPlan {
            target: t,
            target_state: None,
            rounds,
        },
    ))
}
