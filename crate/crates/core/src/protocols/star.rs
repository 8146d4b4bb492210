//! Verified two-qubit clusters and star clusters.
//!
//! Builds are hierarchical: every block is double-verified on its own, pairs
//! are joined by a transversal CZ and re-verified, and a star joins a root to
//! the inner blocks of `L` pairs, again followed by re-verification of every
//! block touched. A rejected stage discards its inputs, which are rebuilt from
//! scratch with fresh randomness.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::frame::{Faults, FrameSimulator};
use crate::gf2::{self, BitRow, RowSpace};
use crate::noise::{FaultStream, NoiseModel};
use crate::pauli::{Letter, PauliString};
use crate::protocols::graph::{decode_block, LogicalGraph};
use crate::protocols::verification::{alloc_block, alloc_encoded, push_verification};
use crate::steane::{push_transversal, CodeBlock, LogicalState, CHECK_ROWS, LOGICAL_MASK, N};

/// Per-block frame as `(x_mask, z_mask)`.
pub type BlockFrame = (u8, u8);

/// A circuit with designated input and output blocks.
#[derive(Debug, Clone)]
pub struct Stage {
    sim: FrameSimulator,
    pub inputs: Vec<CodeBlock>,
    pub outputs: Vec<CodeBlock>,
    /// Checkpoint parity vectors reachable from input errors alone.
    input_image: RowSpace,
    n_parities: usize,
    /// Checkpoints no input error can affect.
    input_blind: Vec<bool>,
}

impl Stage {
    pub fn new(circuit: Circuit, inputs: Vec<CodeBlock>, outputs: Vec<CodeBlock>) -> Result<Self> {
        let n_parities = circuit.checkpoints.iter().map(|c| c.parities.len()).sum();
        let mut stage = Self {
            sim: FrameSimulator::new(circuit)?,
            inputs,
            outputs,
            input_image: RowSpace::new(n_parities),
            n_parities,
            input_blind: Vec::new(),
        };
        let n = stage.circuit().n_qubits;
        let mut image = RowSpace::new(n_parities);
        let mut touched = gf2::zeros(n_parities);
        for b in &stage.inputs {
            for &w in &b.wires {
                for letter in [Letter::X, Letter::Z] {
                    let f = PauliString::single(n, w, letter);
                    let r = stage.sim.run(Some(&f), Faults::None, false);
                    let v = stage.parity_vector(&r.flips);
                    for (t, x) in touched.iter_mut().zip(&v) {
                        *t |= x;
                    }
                    image.insert(&v);
                }
            }
        }
        let mut k = 0;
        stage.input_blind = stage
            .circuit()
            .checkpoints
            .iter()
            .map(|cp| {
                let blind = (k..k + cp.parities.len()).all(|i| !gf2::get(&touched, i));
                k += cp.parities.len();
                blind
            })
            .collect();
        stage.input_image = image;
        Ok(stage)
    }

    pub fn circuit(&self) -> &Circuit {
        self.sim.circuit()
    }

    fn parity_vector(&self, flips: &[bool]) -> BitRow {
        let mut v = gf2::zeros(self.n_parities);
        let mut k = 0;
        for cp in &self.circuit().checkpoints {
            for par in &cp.parities {
                gf2::set(&mut v, k, par.iter().fold(false, |acc, &r| acc ^ flips[r]));
                k += 1;
            }
        }
        v
    }

    /// Runs the stage with the given input frames; `None` if a checkpoint fails.
    pub fn run(&self, inputs: &[BlockFrame], faults: Faults<'_>) -> Option<Vec<BlockFrame>> {
        debug_assert_eq!(inputs.len(), self.inputs.len());
        let init = frame_from_blocks(self.circuit().n_qubits, &self.inputs, inputs);
        let r = self.sim.run(init.as_ref(), faults, true);
        if !r.accepted {
            return None;
        }
        Some(self.outputs.iter().map(|b| b.masks(&r.frame)).collect())
    }

    /// Same outcome distribution as building the inputs and calling
    /// [`Stage::run`], but the stage's own faults are simulated first and the
    /// inputs are only requested when some input error could still cancel
    /// the syndrome those faults produce. Frames are linear in the input
    /// frame and the faults, so the two contributions simply add.
    pub fn run_lazy(
        &self,
        faults: Faults<'_>,
        inputs: impl FnOnce() -> Result<Vec<BlockFrame>>,
    ) -> Result<Option<Vec<BlockFrame>>> {
        if self.inputs.is_empty() {
            return Ok(self.run(&[], faults));
        }
        let own = self.sim.run_until(None, faults, |k| self.input_blind[k]);
        if own
            .checkpoints
            .iter()
            .zip(&self.input_blind)
            .any(|(&ok, &blind)| blind && !ok)
        {
            return Ok(None);
        }
        let s_own = self.parity_vector(&own.flips);
        if !gf2::is_zero(&s_own) && !self.input_image.contains(&s_own) {
            return Ok(None);
        }
        let frames = inputs()?;
        let Some(init) = frame_from_blocks(self.circuit().n_qubits, &self.inputs, &frames) else {
            return Ok(if gf2::is_zero(&s_own) {
                Some(self.outputs.iter().map(|b| b.masks(&own.frame)).collect())
            } else {
                None
            });
        };
        let prop = self.sim.run(Some(&init), Faults::None, false);
        if self.parity_vector(&prop.flips) != s_own {
            return Ok(None);
        }
        Ok(Some(
            self.outputs
                .iter()
                .map(|b| {
                    let (x0, z0) = b.masks(&own.frame);
                    let (x1, z1) = b.masks(&prop.frame);
                    (x0 ^ x1, z0 ^ z1)
                })
                .collect(),
        ))
    }
}

/// Full-width frame carrying the given block frames; `None` if all are clean.
pub fn frame_from_blocks(
    n_qubits: usize,
    blocks: &[CodeBlock],
    frames: &[BlockFrame],
) -> Option<PauliString> {
    if frames.iter().all(|&(x, z)| x | z == 0) {
        return None;
    }
    let mut f = PauliString::identity(n_qubits);
    for (b, &(x, z)) in blocks.iter().zip(frames) {
        for i in 0..N {
            f.set_x(b.wires[i], x >> i & 1 == 1);
            f.set_z(b.wires[i], z >> i & 1 == 1);
        }
    }
    Some(f)
}

/// Transversal CZ between the two blocks, then re-verification of both.
pub fn push_pair_ops(c: &mut Circuit, inner: &CodeBlock, end: &CodeBlock) -> Result<()> {
    push_transversal(c, GateKind::Cz, inner, end)?;
    push_verification(c, inner, false, "pair/inner")?;
    push_verification(c, end, false, "pair/end")?;
    Ok(())
}

/// Transversal CZ from the root to every inner block, then re-verification of
/// the root and each inner block.
pub fn push_star_ops(c: &mut Circuit, root: &CodeBlock, inners: &[CodeBlock]) -> Result<()> {
    for inner in inners {
        push_transversal(c, GateKind::Cz, root, inner)?;
    }
    push_verification(c, root, false, "star/root")?;
    for (i, inner) in inners.iter().enumerate() {
        push_verification(c, inner, false, &format!("star/inner{i}"))?;
    }
    Ok(())
}

fn input_blocks(c: &mut Circuit, count: usize) -> Vec<CodeBlock> {
    let blocks: Vec<CodeBlock> = (0..count).map(|_| alloc_block(c)).collect();
    c.inputs = blocks.iter().flat_map(|b| b.wires).collect();
    blocks
}

fn set_outputs(c: &mut Circuit, blocks: &[CodeBlock]) {
    c.outputs = blocks.iter().flat_map(|b| b.wires).collect();
}

/// Double verification of a fresh |+_L⟩ block.
pub fn dv_stage() -> Result<Stage> {
    let (c, plan) =
        crate::protocols::verification::double_verification_circuit(LogicalState::Plus)?;
    Stage::new(c, Vec::new(), vec![plan.target])
}

/// Inputs `[inner, end]`, outputs the same.
pub fn pair_stage() -> Result<Stage> {
    let mut c = Circuit::new(0);
    let b = input_blocks(&mut c, 2);
    push_pair_ops(&mut c, &b[0], &b[1])?;
    set_outputs(&mut c, &b);
    Stage::new(c, b.clone(), b)
}

/// Inputs `[root, inner_0, .., inner_{L-1}]`, outputs the same. End blocks
/// are not touched by this stage.
pub fn star_stage(leaves: usize) -> Result<Stage> {
    let mut c = Circuit::new(0);
    let b = input_blocks(&mut c, 1 + leaves);
    push_star_ops(&mut c, &b[0], &b[1..])?;
    set_outputs(&mut c, &b);
    Stage::new(c, b.clone(), b)
}

/// A whole build flattened into one circuit (no retries), for noiseless
/// reference runs and exhaustive fault scans.
#[derive(Debug, Clone)]
pub struct FlatBuild {
    pub circuit: Circuit,
    /// Output blocks, indexed like the vertices of `graph`.
    pub blocks: Vec<CodeBlock>,
    pub graph: LogicalGraph,
}

fn push_dv(c: &mut Circuit, label: &str) -> Result<CodeBlock> {
    let t = alloc_encoded(c, LogicalState::Plus);
    push_verification(c, &t, false, label)?;
    Ok(t)
}

pub fn flat_pair() -> Result<FlatBuild> {
    let mut c = Circuit::new(0);
    let inner = push_dv(&mut c, "dv/inner")?;
    let end = push_dv(&mut c, "dv/end")?;
    push_pair_ops(&mut c, &inner, &end)?;
    let blocks = vec![inner, end];
    set_outputs(&mut c, &blocks);
    let mut graph = LogicalGraph::empty(2);
    graph.add_edge(0, 1);
    Ok(FlatBuild {
        circuit: c,
        blocks,
        graph,
    })
}

pub fn flat_star(leaves: usize) -> Result<FlatBuild> {
    let mut c = Circuit::new(0);
    let root = push_dv(&mut c, "dv/root")?;
    let mut blocks = vec![root];
    for i in 0..leaves {
        let inner = push_dv(&mut c, &format!("dv/inner{i}"))?;
        let end = push_dv(&mut c, &format!("dv/end{i}"))?;
        push_pair_ops(&mut c, &inner, &end)?;
        blocks.push(inner);
        blocks.push(end);
    }
    let inners: Vec<CodeBlock> = (0..leaves).map(|i| blocks[1 + 2 * i]).collect();
    push_star_ops(&mut c, &root, &inners)?;
    set_outputs(&mut c, &blocks);
    Ok(FlatBuild {
        circuit: c,
        blocks,
        graph: LogicalGraph::star(leaves),
    })
}

/// Minimum-weight representative of each 7-bit word modulo the span of the
/// check rows (the stabilizers of either sector).
fn min_weight_table() -> &'static [u8; 128] {
    static TABLE: OnceLock<[u8; 128]> = OnceLock::new();
    TABLE.get_or_init(|| {
        std::array::from_fn(|w| crate::steane::min_weight_in_coset(w as u8, &CHECK_ROWS))
    })
}

/// Puts block frames into a canonical gauge without changing the state they
/// describe: logical X parts are traded for logical Z on the neighbours via
/// the graph stabilizers, then each sector is reduced to its lightest
/// representative modulo the code stabilizers.
pub fn canonicalize(frames: &mut [BlockFrame], graph: &LogicalGraph) {
    for v in 0..frames.len() {
        let (lx, _) = decode_block(frames[v].0, frames[v].1);
        if lx {
            frames[v].0 ^= LOGICAL_MASK;
            for &u in graph.neighbors(v) {
                frames[u].1 ^= LOGICAL_MASK;
            }
        }
    }
    let t = min_weight_table();
    for f in frames.iter_mut() {
        *f = (t[f.0 as usize], t[f.1 as usize]);
    }
}

/// Stage attempts simulated during a build. Input sub-builds that were
/// skipped because the attempt was already certain to fail are not counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    pub dv_attempts: u64,
    pub pair_attempts: u64,
    pub star_attempts: u64,
}

impl BuildStats {
    pub fn add(&mut self, o: &BuildStats) {
        self.dv_attempts += o.dv_attempts;
        self.pair_attempts += o.pair_attempts;
        self.star_attempts += o.star_attempts;
    }
}

/// Randomness for one top-level build; every stage attempt draws a fresh
/// child stream.
#[derive(Debug, Clone)]
pub struct BuildContext {
    base: FaultStream,
    next: u64,
    pub stats: BuildStats,
}

impl BuildContext {
    pub fn new(base: FaultStream) -> Self {
        Self {
            base,
            next: 0,
            stats: BuildStats::default(),
        }
    }

    pub fn fresh(&mut self) -> FaultStream {
        self.next += 1;
        self.base.child(self.next)
    }
}

/// A verified star cluster: root 0, leaf `i` = inner `1 + 2i`, end `2 + 2i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarClusterState {
    pub leaves: usize,
    pub graph: LogicalGraph,
    /// Residual frame per block.
    pub frames: Vec<BlockFrame>,
    consumed: Vec<bool>,
}

impl StarClusterState {
    pub fn new(leaves: usize, frames: Vec<BlockFrame>) -> Result<Self> {
        if frames.len() != 1 + 2 * leaves {
            return Err(Error::LengthMismatch {
                left: 1 + 2 * leaves,
                right: frames.len(),
            });
        }
        let graph = LogicalGraph::star(leaves);
        Ok(Self {
            leaves,
            graph,
            frames,
            consumed: vec![false; leaves],
        })
    }

    /// Physical block `v` in a layout with blocks stored contiguously.
    pub fn block(&self, v: usize) -> CodeBlock {
        CodeBlock::contiguous(v)
    }

    pub fn inner(leaf: usize) -> usize {
        1 + 2 * leaf
    }

    pub fn end(leaf: usize) -> usize {
        2 + 2 * leaf
    }

    pub fn is_consumed(&self, leaf: usize) -> bool {
        self.consumed.get(leaf).copied().unwrap_or(true)
    }

    pub fn next_free_leaf(&self) -> Option<usize> {
        self.consumed.iter().position(|&c| !c)
    }

    pub fn free_leaves(&self) -> usize {
        self.consumed.iter().filter(|&&c| !c).count()
    }

    /// Marks a leaf as used and detaches it from the cluster.
    pub(crate) fn consume(&mut self, leaf: usize) -> Result<()> {
        if self.is_consumed(leaf) {
            return Err(Error::LeafConsumed(leaf));
        }
        self.consumed[leaf] = true;
        let (i, e) = (Self::inner(leaf), Self::end(leaf));
        let mut g = LogicalGraph::empty(self.graph.len());
        for (a, b) in self.graph.edges() {
            if ![a, b].iter().any(|v| *v == i || *v == e) {
                g.add_edge(a, b);
            }
        }
        self.graph = g;
        self.frames[i] = (0, 0);
        self.frames[e] = (0, 0);
        Ok(())
    }
}

/// Stage circuits for one star size, shared across trials.
#[derive(Debug, Clone)]
pub struct StarFactory {
    pub leaves: usize,
    pub noise: NoiseModel,
    /// Cap on consecutive rejections of a single stage.
    pub max_attempts: u64,
    dv: Stage,
    pair: Stage,
    star: Stage,
}

impl StarFactory {
    pub fn new(leaves: usize, noise: NoiseModel) -> Result<Self> {
        noise.validate()?;
        if leaves == 0 {
            return Err(Error::InvalidParameter(
                "a star needs at least one leaf".into(),
            ));
        }
        Ok(Self {
            leaves,
            noise,
            max_attempts: 1_000_000,
            dv: dv_stage()?,
            pair: pair_stage()?,
            star: star_stage(leaves)?,
        })
    }

    pub fn dv(&self) -> &Stage {
        &self.dv
    }

    pub fn pair(&self) -> &Stage {
        &self.pair
    }

    pub fn star(&self) -> &Stage {
        &self.star
    }

    fn faults(&self, stream: FaultStream) -> Faults<'_> {
        Faults::Sampled {
            noise: &self.noise,
            stream,
        }
    }

    /// A double-verified |+_L⟩ block.
    pub fn build_block(&self, ctx: &mut BuildContext) -> Result<BlockFrame> {
        for _ in 0..self.max_attempts {
            ctx.stats.dv_attempts += 1;
            let s = ctx.fresh();
            if let Some(out) = self.dv.run(&[], self.faults(s)) {
                let mut f = [out[0]];
                canonicalize(&mut f, &LogicalGraph::empty(1));
                return Ok(f[0]);
            }
        }
        Err(Error::ZeroAccepted(self.max_attempts))
    }

    /// A verified two-block cluster `[inner, end]`.
    pub fn build_two_qubit_cluster(&self, ctx: &mut BuildContext) -> Result<[BlockFrame; 2]> {
        let mut edge = LogicalGraph::empty(2);
        edge.add_edge(0, 1);
        for _ in 0..self.max_attempts {
            ctx.stats.pair_attempts += 1;
            let s = ctx.fresh();
            let out = self.pair.run_lazy(self.faults(s), || {
                Ok(vec![self.build_block(ctx)?, self.build_block(ctx)?])
            })?;
            if let Some(out) = out {
                let mut f = [out[0], out[1]];
                canonicalize(&mut f, &edge);
                return Ok(f);
            }
        }
        Err(Error::ZeroAccepted(self.max_attempts))
    }

    pub fn build_star(&self, ctx: &mut BuildContext) -> Result<StarClusterState> {
        let l = self.leaves;
        let graph = LogicalGraph::star(l);
        for _ in 0..self.max_attempts {
            ctx.stats.star_attempts += 1;
            let s = ctx.fresh();
            let mut ends = Vec::with_capacity(l);
            let out = self.star.run_lazy(self.faults(s), || {
                let mut inputs = Vec::with_capacity(1 + l);
                inputs.push(self.build_block(ctx)?);
                for _ in 0..l {
                    let [inner, end] = self.build_two_qubit_cluster(ctx)?;
                    inputs.push(inner);
                    ends.push(end);
                }
                Ok(inputs)
            })?;
            if let Some(out) = out {
                let mut frames = Vec::with_capacity(1 + 2 * l);
                frames.push(out[0]);
                for (i, &end) in ends.iter().enumerate() {
                    frames.push(out[1 + i]);
                    frames.push(end);
                }
                canonicalize(&mut frames, &graph);
                return StarClusterState::new(l, frames);
            }
        }
        Err(Error::ZeroAccepted(self.max_attempts))
    }
}

/// One star build keyed by `(seed, trial)`.
pub fn build_star(
    leaves: usize,
    noise: &NoiseModel,
    seed: u64,
    trial: u64,
) -> Result<(StarClusterState, BuildStats)> {
    let f = StarFactory::new(leaves, noise.clone())?;
    let mut ctx = BuildContext::new(FaultStream::new(seed, trial, 0));
    let s = f.build_star(&mut ctx)?;
    Ok((s, ctx.stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::graph::logical_row;
    use crate::protocols::graph::Reducer;

    #[test]
    fn noiseless_star_is_clean() {
        let (s, stats) = build_star(3, &NoiseModel::noiseless(), 1, 0).unwrap();
        assert!(s.frames.iter().all(|&f| f == (0, 0)));
        assert_eq!(stats.star_attempts, 1);
        assert_eq!(stats.pair_attempts, 3);
        assert_eq!(stats.dv_attempts, 7);
    }

    #[test]
    fn canonical_gauge_keeps_the_logical_class() {
        let g = LogicalGraph::star(2);
        let red = Reducer::from_graph(&g);
        for seed in 0..200u64 {
            let mut frames: Vec<BlockFrame> = (0..5)
                .map(|i| {
                    let h = FaultStream::new(seed, i, 9).bits(0);
                    ((h & 0x7f) as u8, (h >> 8 & 0x7f) as u8)
                })
                .collect();
            let before = logical_row(&frames);
            canonicalize(&mut frames, &g);
            let after = logical_row(&frames);
            assert_eq!(red.canonical(&before), red.canonical(&after));
            assert!(frames.iter().all(|&(x, _)| !decode_block(x, 0).0));
        }
    }

    #[test]
    fn lazy_run_matches_eager_run() {
        let noise = NoiseModel::standard(0.01);
        for stage in [pair_stage().unwrap(), star_stage(2).unwrap()] {
            let k = stage.inputs.len();
            let mut accepted = 0;
            for t in 0..3000u64 {
                let h = FaultStream::new(11, t, 1);
                let frames: Vec<BlockFrame> = (0..k as u64)
                    .map(|i| {
                        let b = h.bits(i);
                        let pick = |v: u64| if v % 5 == 0 { 1u8 << (v / 5 % 7) } else { 0 };
                        (pick(b & 0xffff), pick(b >> 16 & 0xffff))
                    })
                    .collect();
                let stream = FaultStream::new(12, t, 0);
                let eager = stage.run(
                    &frames,
                    Faults::Sampled {
                        noise: &noise,
                        stream,
                    },
                );
                let lazy = stage
                    .run_lazy(
                        Faults::Sampled {
                            noise: &noise,
                            stream,
                        },
                        || Ok(frames.clone()),
                    )
                    .unwrap();
                assert_eq!(eager, lazy, "trial {t}");
                accepted += eager.is_some() as usize;
            }
            assert!(accepted > 10);
        }
    }

    #[test]
    fn consumed_leaf_is_rejected() {
        let mut s = StarClusterState::new(2, vec![(0, 0); 5]).unwrap();
        s.consume(1).unwrap();
        assert!(matches!(s.consume(1), Err(Error::LeafConsumed(1))));
        assert_eq!(s.next_free_leaf(), Some(0));
        assert_eq!(s.graph.edges(), vec![(0, 1), (1, 2)]);
    }
}
