//! Logical-level bookkeeping: graphs over code blocks and Pauli errors
//! expressed as one `(x, z)` bit pair per block.
//!
//! A logical row over `n` blocks has `2n` bits: column `v` is the X bit of
//! block `v`, column `n + v` its Z bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{self, BitRow, RowSpace};
use crate::steane::{correction, logical_parity, syndrome, Basis};

/// Simple undirected graph on logical qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalGraph {
    adj: Vec<Vec<usize>>,
}

impl LogicalGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
        }
    }

    /// Root 0; leaf `i` is the chain `root - (1 + 2i) - (2 + 2i)`.
    pub fn star(leaves: usize) -> Self {
        let mut g = Self::empty(1 + 2 * leaves);
        for i in 0..leaves {
            g.add_edge(0, 1 + 2 * i);
            g.add_edge(1 + 2 * i, 2 + 2 * i);
        }
        g
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b && !self.adj[a].contains(&b) {
            self.adj[a].push(b);
            self.adj[b].push(a);
        }
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, nb) in self.adj.iter().enumerate() {
            for &b in nb {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Disjoint union; vertices of `other` are shifted by `self.len()`.
    pub fn union(&self, other: &LogicalGraph) -> LogicalGraph {
        let off = self.len();
        let mut adj = self.adj.clone();
        adj.extend(
            other
                .adj
                .iter()
                .map(|nb| nb.iter().map(|v| v + off).collect()),
        );
        LogicalGraph { adj }
    }

    /// Generators `K_v = X_v Π_{u ~ v} Z_u` as logical rows.
    pub fn stabilizer_rows(&self) -> Vec<BitRow> {
        let n = self.len();
        (0..n)
            .map(|v| {
                let mut r = gf2::zeros(2 * n);
                gf2::set(&mut r, v, true);
                for &u in &self.adj[v] {
                    gf2::set(&mut r, n + u, true);
                }
                r
            })
            .collect()
    }
}

/// Logical bits `(x, z)` of a block frame after weight-1 correction of each sector.
#[inline]
pub fn decode_block(x: u8, z: u8) -> (bool, bool) {
    (
        logical_parity(x ^ correction(syndrome(x))),
        logical_parity(z ^ correction(syndrome(z))),
    )
}

/// Logical row of a frame given per-block `(x, z)` masks.
pub fn logical_row(masks: &[(u8, u8)]) -> BitRow {
    let n = masks.len();
    let mut r = gf2::zeros(2 * n);
    for (v, &(x, z)) in masks.iter().enumerate() {
        let (lx, lz) = decode_block(x, z);
        gf2::set(&mut r, v, lx);
        gf2::set(&mut r, n + v, lz);
    }
    r
}

/// Column order with every X column ahead of every Z column, so reduction
/// pushes errors into Z-only form whenever possible.
fn x_first(n: usize) -> Vec<usize> {
    (0..2 * n).collect()
}

/// Reduces logical errors modulo a stabilizer group.
#[derive(Debug, Clone)]
pub struct Reducer {
    n: usize,
    space: RowSpace,
}

impl Reducer {
    pub fn new(n: usize, stabilizers: &[BitRow]) -> Self {
        let mut space = RowSpace::with_order(x_first(n));
        for s in stabilizers {
            space.insert(s);
        }
        Self { n, space }
    }

    pub fn from_graph(g: &LogicalGraph) -> Self {
        Self::new(g.len(), &g.stabilizer_rows())
    }

    pub fn blocks(&self) -> usize {
        self.n
    }

    /// Canonical representative of `row` modulo the group.
    pub fn canonical(&self, row: &[u64]) -> BitRow {
        let mut r = row.to_vec();
        self.space.reduce(&mut r);
        r
    }

    pub fn is_trivial(&self, row: &[u64]) -> bool {
        self.space.contains(row)
    }
}

/// Logical measurements on a stabilizer state carrying a logical error.
///
/// Each flipped outcome changes the ideal post-measurement state by a
/// stabilizer element anticommuting with that measurement; the protocol's
/// byproduct corrections undo exactly that, so the net error on the
/// surviving blocks is the input error times those elements. Outcomes that
/// are already fixed by earlier ones in the list carry no information and are
/// ignored, as a protocol would.
#[derive(Debug, Clone)]
pub struct MeasurementReduction {
    n: usize,
    measured: Vec<usize>,
    space: RowSpace,
    post: Reducer,
}

impl MeasurementReduction {
    /// `stabilizers` generate the pre-measurement group on `n` blocks; the
    /// measurements are logical X or Z readouts.
    pub fn new(n: usize, stabilizers: &[BitRow], measured: &[(usize, Basis)]) -> Result<Self> {
        let mut kill = Vec::with_capacity(measured.len());
        for &(b, basis) in measured {
            kill.push(match basis {
                Basis::X => n + b,
                Basis::Z => b,
                Basis::Y => {
                    return Err(Error::InvalidParameter(
                        "logical Y readouts are not supported here".into(),
                    ))
                }
            });
        }
        let mut is_kill = vec![false; 2 * n];
        for &k in &kill {
            is_kill[k] = true;
        }
        let mut order = kill.clone();
        order.extend((0..2 * n).filter(|&c| !is_kill[c]));
        let mut space = RowSpace::with_order(order);
        for s in stabilizers {
            space.insert(s);
        }
        let measured: Vec<usize> = measured.iter().map(|&(b, _)| b).collect();
        let post_rows: Vec<BitRow> = gf2::vanishing_on(stabilizers, 2 * n, &kill)
            .into_iter()
            .map(|mut r| {
                for &b in &measured {
                    gf2::set(&mut r, b, false);
                    gf2::set(&mut r, n + b, false);
                }
                r
            })
            .collect();
        Ok(Self {
            n,
            measured,
            space,
            post: Reducer::new(n, &post_rows),
        })
    }

    /// Canonical error left on the unmeasured blocks. Bits of measured
    /// blocks in `error` are read as readout flips.
    pub fn effective(&self, error: &[u64]) -> BitRow {
        let mut r = error.to_vec();
        self.space.reduce(&mut r);
        for &b in &self.measured {
            gf2::set(&mut r, b, false);
            gf2::set(&mut r, self.n + b, false);
        }
        self.post.canonical(&r)
    }

    pub fn post_measurement(&self) -> &Reducer {
        &self.post
    }
}

/// Letter-like view of block `v` in a logical row.
pub fn block_bits(row: &[u64], n: usize, v: usize) -> (bool, bool) {
    (gf2::get(row, v), gf2::get(row, n + v))
}
