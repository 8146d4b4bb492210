//! Exhaustive oracle checks, shared by the `selftest` subcommand and the test
//! suites.

use serde::{Deserialize, Serialize};

use crate::analytic::f_steane;
use crate::circuit::{Circuit, GateEvent, GateKind};
use crate::error::Result;
use crate::frame::{Faults, FrameSimulator};
use crate::noise::{Fault, FaultStream};
use crate::pauli::Letter;
use crate::protocols::graph::{LogicalGraph, Reducer};
use crate::protocols::star::{flat_pair, flat_star, FlatBuild};
use crate::protocols::{double_verification_circuit, logical_stabilizers, scan_single_faults};
use crate::steane::{
    correction, decode_measurement, logical_parity, syndrome, Basis, LogicalState, N,
};
use crate::tableau::{run_ideal, run_tableau, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Smallest weight of a 7-bit word with trivial syndrome and odd logical parity.
pub fn min_logical_weight() -> u32 {
    (1u8..128)
        .filter(|&w| syndrome(w) == 0 && logical_parity(w))
        .map(|w| w.count_ones())
        .min()
        .unwrap_or(0)
}

pub fn steane_distance() -> Check {
    let d = min_logical_weight();
    Check::new(
        "steane distance",
        d == 3,
        format!("minimum logical weight {d} in each sector"),
    )
}

/// Weight-2 flip patterns whose decoded bit comes out wrong.
pub fn weight_two_miscorrections() -> usize {
    (0u8..128)
        .filter(|w| w.count_ones() == 2)
        .filter(|&w| decode_measurement(w, Basis::X).logical)
        .count()
}

pub fn miscorrections() -> Check {
    let k = weight_two_miscorrections();
    Check::new(
        "weight-2 miscorrections",
        k == 21,
        format!("{k} of 21 weight-2 patterns decode wrong"),
    )
}

/// Probability that the weight-1 decoder does not recover the exact flip
/// pattern, by weighted enumeration of all 128 patterns.
pub fn decoder_failure_enumerated(x: f64) -> f64 {
    (0u8..128)
        .filter(|&w| correction(syndrome(w)) != w)
        .map(|w| {
            let k = w.count_ones() as i32;
            x.powi(k) * (1.0 - x).powi(N as i32 - k)
        })
        .sum()
}

pub fn f_enumeration() -> Check {
    let worst = [0.0, 0.001, 0.0046667, 0.01, 0.05, 0.2, 0.5, 1.0]
        .iter()
        .map(|&x| (decoder_failure_enumerated(x) - f_steane(x)).abs())
        .fold(0.0, f64::max);
    Check::new(
        "f vs 2^7 enumeration",
        worst <= 1e-12,
        format!("max deviation {worst:.2e}"),
    )
}

/// Random Clifford circuit on `n` qubits: random preparations, `gates`
/// random unitaries, random single-qubit measurements interleaved (a
/// measured qubit is not touched again), then a measurement of every live
/// qubit. Draws come from `stream`.
pub fn random_clifford_circuit(n: usize, gates: usize, stream: &FaultStream) -> Circuit {
    let mut next = 0u64;
    let mut draw = |m: usize| {
        next += 1;
        (stream.bits(next) % m as u64) as usize
    };
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.push(GateEvent::one(
            if draw(2) == 0 {
                GateKind::PrepZ
            } else {
                GateKind::PrepX
            },
            q,
        ));
    }
    let meas = [GateKind::MeasX, GateKind::MeasY, GateKind::MeasZ];
    let mut alive = vec![true; n];
    for _ in 0..gates {
        let live: Vec<usize> = (0..n).filter(|&q| alive[q]).collect();
        if live.len() < 2 {
            break;
        }
        let a = live[draw(live.len())];
        match draw(10) {
            0..=1 => {
                c.push(GateEvent::one(GateKind::H, a));
            }
            2..=3 => {
                c.push(GateEvent::one(GateKind::S, a));
            }
            4..=8 => {
                let mut b = live[draw(live.len())];
                if b == a {
                    b = live[(live.iter().position(|&q| q == a).unwrap_or(0) + 1) % live.len()];
                }
                let kind = if draw(2) == 0 {
                    GateKind::Cnot
                } else {
                    GateKind::Cz
                };
                c.push(GateEvent::two(kind, a, b));
            }
            _ => {
                c.push(GateEvent::one(meas[draw(3)], a));
                alive[a] = false;
            }
        }
    }
    for q in 0..n {
        if alive[q] {
            c.push(GateEvent::one(meas[draw(3)], q));
        }
    }
    c
}

/// Random single-qubit faults on roughly one event in `every`, sorted by event.
pub fn random_faults(c: &Circuit, every: u64, stream: &FaultStream) -> Vec<(usize, Fault)> {
    let mut out = Vec::new();
    for (i, e) in c.events.iter().enumerate() {
        let r = stream.bits(1_000_000 + i as u64);
        if r % every != 0 {
            continue;
        }
        let targets = e.targets();
        let q = targets[(r >> 8) as usize % targets.len()];
        out.push((i, Fault::One(q, Letter::NONTRIVIAL[(r >> 16) as usize % 3])));
    }
    out
}

/// Compares frame flips with the tableau for one circuit and fault set.
/// A deterministic outcome `c ⊕ Σ r_d` must change its constant by the
/// frame flip of that record plus the flips of the records it depends on.
pub fn cross_validate(c: &Circuit, faults: &[(usize, Fault)]) -> Result<bool> {
    let sim = FrameSimulator::new(c.clone())?;
    let flips = sim.run(None, Faults::Injected(faults), false).flips;
    let (_, ideal) = run_tableau(c, |_| Vec::new())?;
    let (_, noisy) = run_tableau(c, |i| {
        faults
            .iter()
            .filter(|(e, _)| *e == i)
            .flat_map(|&(_, f)| match f {
                Fault::One(q, l) => vec![(q, l)],
                Fault::Two(a, la, b, lb) => vec![(a, la), (b, lb)],
                Fault::None => Vec::new(),
            })
            .collect()
    })?;
    for (r, (a, b)) in ideal.iter().zip(&noisy).enumerate() {
        match (a, b) {
            (Outcome::Random, Outcome::Random) => {}
            (
                Outcome::Deterministic {
                    constant: c0,
                    depends_on: d0,
                },
                Outcome::Deterministic {
                    constant: c1,
                    depends_on: d1,
                },
            ) => {
                if d0 != d1 {
                    return Ok(false);
                }
                let expected = d0.iter().fold(flips[r], |acc, &d| acc ^ flips[d]);
                if (c0 ^ c1) != expected {
                    return Ok(false);
                }
            }
            _ => return Ok(false),
        }
    }
    Ok(true)
}

pub fn engine_cross_validation(circuits: u64, seed: u64) -> Result<Check> {
    let mut failures = 0;
    for t in 0..circuits {
        let s = FaultStream::new(seed, t, 0);
        let n = 2 + (s.bits(0) % 19) as usize;
        let c = random_clifford_circuit(n, 4 * n, &s);
        let faults = random_faults(&c, 3, &s);
        if !cross_validate(&c, &faults)? {
            failures += 1;
        }
    }
    Ok(Check::new(
        "engine cross-validation",
        failures == 0,
        format!("{failures} mismatches over {circuits} random circuits of 2..=20 qubits"),
    ))
}

fn accepted_logical_faults(b: &FlatBuild) -> Result<(usize, usize)> {
    let r = run_ideal(&b.circuit)?;
    let red = Reducer::new(b.blocks.len(), &logical_stabilizers(&r, &b.blocks)?);
    let scan = scan_single_faults(&b.circuit, &b.blocks, &red)?;
    let total = scan.iter().map(|l| l.faults.len()).sum();
    let bad = scan.iter().flat_map(|l| &l.logical).filter(|&&x| x).count();
    Ok((bad, total))
}

/// Exhaustive single-fault scans of double verification (both targets),
/// the two-block stage and a flat star build with `star_leaves` leaves.
pub fn single_fault_scans(star_leaves: usize) -> Result<Vec<Check>> {
    let mut builds = Vec::new();
    for (state, name) in [
        (LogicalState::Plus, "dv |+>"),
        (LogicalState::Zero, "dv |0>"),
    ] {
        let (circuit, plan) = double_verification_circuit(state)?;
        builds.push((
            name.to_string(),
            FlatBuild {
                circuit,
                blocks: vec![plan.target],
                graph: LogicalGraph::empty(1),
            },
        ));
    }
    builds.push(("two-block cluster".into(), flat_pair()?));
    builds.push((format!("star L={star_leaves}"), flat_star(star_leaves)?));
    builds
        .into_iter()
        .map(|(name, b)| {
            let (bad, total) = accepted_logical_faults(&b)?;
            Ok(Check::new(
                &format!("single-fault scan {name}"),
                bad == 0,
                format!("{bad} accepted logical errors over {total} single faults"),
            ))
        })
        .collect()
}

/// Every oracle check.
pub fn run_all(seed: u64, star_leaves: usize) -> Result<Vec<Check>> {
    let mut out = vec![
        steane_distance(),
        miscorrections(),
        f_enumeration(),
        engine_cross_validation(500, seed)?,
    ];
    out.extend(single_fault_scans(star_leaves)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_checks_pass() {
        for c in [steane_distance(), miscorrections(), f_enumeration()] {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn cross_validation_catches_a_wrong_flip() {
        let mut c = Circuit::new(1);
        c.push(GateEvent::one(GateKind::PrepZ, 0));
        c.push(GateEvent::one(GateKind::MeasZ, 0));
        assert!(cross_validate(&c, &[(1, Fault::One(0, Letter::X))]).unwrap());
        // Z commutes with the readout, so the tableau sees no change either.
        assert!(cross_validate(&c, &[(1, Fault::One(0, Letter::Z))]).unwrap());
    }
}
