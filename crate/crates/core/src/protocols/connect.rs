//! Joining two star clusters through one leaf of each.
//!
//! With chains `R_A - a2 - a1` and `b3 - b4 - R_B`, a transversal CZ joins
//! `a1` and `b3`, which are then read out in X with syndrome checks. If both
//! syndromes are trivial, `a2` and `b4` are read out in X as well, leaving an
//! edge between the roots. Otherwise they are read out in Z, which cuts the
//! leaves off and leaves both roots as they were.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::frame::{Faults, FrameSimulator};
use crate::gf2;
use crate::noise::{FaultStream, NoiseModel};
use crate::protocols::graph::MeasurementReduction;
use crate::protocols::star::{frame_from_blocks, BlockFrame, StarClusterState};
use crate::steane::{
    decode_measurement, push_measure, push_transversal, Basis, CodeBlock, Decoded, N,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConnectionStatus {
    Success,
    DetectedFailure,
    /// Syndromes were nontrivial but no leaf was left to retry with, so the
    /// connection was kept.
    UndetectedErroneous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionOutcome {
    pub status: ConnectionStatus,
    pub leaves: [usize; 2],
    /// Syndromes of the X readouts of `a1` and `b3`.
    pub syndromes: [u8; 2],
    /// Decoded logical readout flips of `a1`, `b3`, `a2`, `b4`.
    pub readout_flips: [bool; 4],
    /// Z-type logical error left on each root by this connection, in the
    /// canonical form of the resulting graph.
    pub root_errors: [bool; 2],
    /// The connection left an error on some block other than the roots.
    pub spill: bool,
}

impl ConnectionOutcome {
    /// Accepted readout of `a1`/`b3` with a wrong decoded value.
    pub fn verified_readout_error(&self) -> bool {
        self.syndromes == [0, 0] && (self.readout_flips[0] || self.readout_flips[1])
    }
}

/// Circuits for the two phases of a connection.
#[derive(Debug, Clone)]
pub struct Connector {
    blocks: [CodeBlock; 2],
    fuse: FrameSimulator,
    readout_x: FrameSimulator,
    readout_z: FrameSimulator,
}

impl Connector {
    pub fn new() -> Result<Self> {
        let blocks = [CodeBlock::contiguous(0), CodeBlock::contiguous(1)];
        let inputs: Vec<usize> = blocks.iter().flat_map(|b| b.wires).collect();
        let mut fuse = Circuit::new(2 * N);
        fuse.inputs = inputs.clone();
        push_transversal(&mut fuse, GateKind::Cz, &blocks[0], &blocks[1])?;
        for b in &blocks {
            push_measure(&mut fuse, Basis::X, b);
        }
        let readout = |basis| -> Result<FrameSimulator> {
            let mut c = Circuit::new(2 * N);
            c.inputs = inputs.clone();
            for b in &blocks {
                push_measure(&mut c, basis, b);
            }
            FrameSimulator::new(c)
        };
        Ok(Self {
            blocks,
            fuse: FrameSimulator::new(fuse)?,
            readout_x: readout(Basis::X)?,
            readout_z: readout(Basis::Z)?,
        })
    }

    fn measure(
        &self,
        sim: &FrameSimulator,
        frames: [BlockFrame; 2],
        noise: &NoiseModel,
        stream: FaultStream,
    ) -> [u8; 2] {
        let init = frame_from_blocks(2 * N, &self.blocks, &frames);
        let r = sim.run(init.as_ref(), Faults::Sampled { noise, stream }, false);
        let word = |k: usize| (0..N).fold(0u8, |acc, i| acc | (r.flips[k * N + i] as u8) << i);
        [word(0), word(1)]
    }

    /// Phase one alone: CZ between the two end blocks and their decoded X
    /// readouts.
    pub fn fuse(
        &self,
        a1: BlockFrame,
        b3: BlockFrame,
        noise: &NoiseModel,
        stream: FaultStream,
    ) -> [Decoded; 2] {
        let ends = self.measure(&self.fuse, [a1, b3], noise, stream);
        [
            decode_measurement(ends[0], Basis::X),
            decode_measurement(ends[1], Basis::X),
        ]
    }

    /// Connects leaf `la` of `a` to leaf `lb` of `b` and consumes both
    /// leaves. With `keep`, a detected failure is kept as if it had
    /// succeeded.
    pub fn connect(
        &self,
        a: &mut StarClusterState,
        la: usize,
        b: &mut StarClusterState,
        lb: usize,
        noise: &NoiseModel,
        stream: FaultStream,
        keep: bool,
    ) -> Result<ConnectionOutcome> {
        for (s, l) in [(&*a, la), (&*b, lb)] {
            if s.is_consumed(l) {
                return Err(Error::LeafConsumed(l));
            }
        }
        let (a1, a2) = (StarClusterState::end(la), StarClusterState::inner(la));
        let (b3, b4) = (StarClusterState::end(lb), StarClusterState::inner(lb));
        let [d1, d3] = self.fuse(a.frames[a1], b.frames[b3], noise, stream.child(0));
        let clean = d1.syndrome == 0 && d3.syndrome == 0;
        let status = match (clean, keep) {
            (true, _) => ConnectionStatus::Success,
            (false, true) => ConnectionStatus::UndetectedErroneous,
            (false, false) => ConnectionStatus::DetectedFailure,
        };
        let inner_basis = if status == ConnectionStatus::DetectedFailure {
            Basis::Z
        } else {
            Basis::X
        };
        let sim = if inner_basis == Basis::X {
            &self.readout_x
        } else {
            &self.readout_z
        };
        let inners = self.measure(sim, [a.frames[a2], b.frames[b4]], noise, stream.child(1));
        let d2 = decode_measurement(inners[0], inner_basis);
        let d4 = decode_measurement(inners[1], inner_basis);

        // Effective error of the readout flips on the joined graph.
        let off = a.graph.len();
        let mut g = a.graph.union(&b.graph);
        g.add_edge(a1, off + b3);
        let n = g.len();
        let measured = [
            (a2, inner_basis),
            (off + b4, inner_basis),
            (a1, Basis::X),
            (off + b3, Basis::X),
        ];
        let red = MeasurementReduction::new(n, &g.stabilizer_rows(), &measured)?;
        let mut err = gf2::zeros(2 * n);
        for (&(v, basis), flip) in measured
            .iter()
            .zip([d2.logical, d4.logical, d1.logical, d3.logical])
        {
            let col = if basis == Basis::X { n + v } else { v };
            gf2::set(&mut err, col, flip);
        }
        let eff = red.effective(&err);
        let root_errors = [gf2::get(&eff, n), gf2::get(&eff, n + off)];
        let spill = (0..2 * n)
            .filter(|&c| c != n && c != n + off)
            .any(|c| gf2::get(&eff, c));

        a.consume(la)?;
        b.consume(lb)?;
        Ok(ConnectionOutcome {
            status,
            leaves: [la, lb],
            syndromes: [d1.syndrome, d3.syndrome],
            readout_flips: [d1.logical, d3.logical, d2.logical, d4.logical],
            root_errors,
            spill,
        })
    }
}

/// One-off connection; see [`Connector::connect`].
pub fn connect(
    a: &mut StarClusterState,
    la: usize,
    b: &mut StarClusterState,
    lb: usize,
    noise: &NoiseModel,
    stream: FaultStream,
) -> Result<ConnectionOutcome> {
    Connector::new()?.connect(a, la, b, lb, noise, stream, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkStatus {
    Success,
    UndetectedErroneous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub status: LinkStatus,
    pub attempts: usize,
    /// Accumulated root errors over all attempts.
    pub root_errors: [bool; 2],
    pub outcomes: Vec<ConnectionOutcome>,
}

impl Connector {
    /// Retries on fresh leaves until a connection succeeds. When either star
    /// is down to its last leaf, that attempt is kept whatever its syndromes.
    pub fn link_with_retries(
        &self,
        a: &mut StarClusterState,
        b: &mut StarClusterState,
        noise: &NoiseModel,
        stream: FaultStream,
    ) -> Result<LinkRecord> {
        let mut outcomes = Vec::new();
        let mut root_errors = [false; 2];
        loop {
            let (Some(la), Some(lb)) = (a.next_free_leaf(), b.next_free_leaf()) else {
                return Err(Error::InvalidParameter(
                    "no unconsumed leaf left to link".into(),
                ));
            };
            let keep = a.free_leaves() == 1 || b.free_leaves() == 1;
            let o = self.connect(
                a,
                la,
                b,
                lb,
                noise,
                stream.child(outcomes.len() as u64),
                keep,
            )?;
            root_errors[0] ^= o.root_errors[0];
            root_errors[1] ^= o.root_errors[1];
            let status = o.status;
            outcomes.push(o);
            match status {
                ConnectionStatus::DetectedFailure => continue,
                ConnectionStatus::Success => {
                    return Ok(LinkRecord {
                        status: LinkStatus::Success,
                        attempts: outcomes.len(),
                        root_errors,
                        outcomes,
                    })
                }
                ConnectionStatus::UndetectedErroneous => {
                    return Ok(LinkRecord {
                        status: LinkStatus::UndetectedErroneous,
                        attempts: outcomes.len(),
                        root_errors,
                        outcomes,
                    })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean(l: usize) -> StarClusterState {
        StarClusterState::new(l, vec![(0, 0); 1 + 2 * l]).unwrap()
    }

    #[test]
    fn noiseless_connection_succeeds_cleanly() {
        let (mut a, mut b) = (clean(3), clean(3));
        let o = connect(
            &mut a,
            0,
            &mut b,
            2,
            &NoiseModel::noiseless(),
            FaultStream::new(1, 2, 3),
        )
        .unwrap();
        assert_eq!(o.status, ConnectionStatus::Success);
        assert_eq!(o.root_errors, [false, false]);
        assert!(!o.spill);
        assert!(a.is_consumed(0) && b.is_consumed(2));
    }

    #[test]
    fn reusing_a_leaf_fails() {
        let (mut a, mut b) = (clean(2), clean(2));
        connect(
            &mut a,
            0,
            &mut b,
            0,
            &NoiseModel::noiseless(),
            FaultStream::new(0, 0, 0),
        )
        .unwrap();
        let e = connect(
            &mut a,
            0,
            &mut b,
            1,
            &NoiseModel::noiseless(),
            FaultStream::new(0, 0, 1),
        );
        assert!(matches!(e, Err(Error::LeafConsumed(0))));
    }

    #[test]
    fn weight_one_end_error_is_detected() {
        let (mut a, mut b) = (clean(2), clean(2));
        a.frames[StarClusterState::end(0)] = (0, 0b100);
        let o = connect(
            &mut a,
            0,
            &mut b,
            0,
            &NoiseModel::noiseless(),
            FaultStream::new(0, 0, 0),
        )
        .unwrap();
        assert_eq!(o.status, ConnectionStatus::DetectedFailure);
        assert_eq!(o.syndromes[0], 3);
        assert_eq!(o.root_errors, [false, false]);
    }

    #[test]
    fn logical_z_on_an_end_reaches_a_root() {
        let (mut a, mut b) = (clean(2), clean(2));
        a.frames[StarClusterState::end(0)] = (0, crate::steane::LOGICAL_MASK);
        let o = connect(
            &mut a,
            0,
            &mut b,
            0,
            &NoiseModel::noiseless(),
            FaultStream::new(0, 0, 0),
        )
        .unwrap();
        assert_eq!(o.status, ConnectionStatus::Success);
        assert!(o.verified_readout_error());
        assert!(o.root_errors[0] ^ o.root_errors[1]);
    }

    #[test]
    fn logical_x_on_an_inner_is_harmless_with_its_partner() {
        // X_L on a2 times Z_L on R_A and a1 is a stabilizer.
        let (mut a, mut b) = (clean(1), clean(1));
        let m = crate::steane::LOGICAL_MASK;
        a.frames[0] = (0, m);
        a.frames[1] = (m, 0);
        a.frames[2] = (0, m);
        let o = connect(
            &mut a,
            0,
            &mut b,
            0,
            &NoiseModel::noiseless(),
            FaultStream::new(0, 0, 0),
        )
        .unwrap();
        assert_eq!(o.status, ConnectionStatus::Success);
        // Only the root's own error is outside this connection's account.
        assert_eq!(o.root_errors, [true, false]);
    }

    #[test]
    fn link_retries_then_keeps_the_last_attempt() {
        let (mut a, mut b) = (clean(2), clean(3));
        for l in 0..2 {
            a.frames[StarClusterState::end(l)] = (0, 1);
        }
        let c = Connector::new().unwrap();
        let r = c
            .link_with_retries(
                &mut a,
                &mut b,
                &NoiseModel::noiseless(),
                FaultStream::new(0, 0, 0),
            )
            .unwrap();
        assert_eq!(r.attempts, 2);
        assert_eq!(r.status, LinkStatus::UndetectedErroneous);
        assert_eq!(a.free_leaves(), 0);
    }
}
