//! Monte Carlo estimators with Wilson intervals.
//!
//! Trial `t` draws all of its randomness from streams keyed by
//! `(seed, t)`, and tallies are integer counters merged by addition, so an
//! estimate does not depend on the number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::analytic::{AnalyticModel, LeadingChannel, LINKS_PER_ROOT};
use crate::circuit::{Circuit, GateEvent, GateKind};
use crate::error::{Error, Result};
use crate::frame::{Faults, FrameSimulator};
use crate::noise::{FaultStream, NoiseModel};
use crate::protocols::connect::{Connector, LinkStatus};
use crate::protocols::graph::{decode_block, LogicalGraph};
use crate::protocols::star::{
    canonicalize, dv_stage, frame_from_blocks, BlockFrame, BuildContext, BuildStats, Stage,
    StarClusterState, StarFactory,
};
use crate::scalar::Real;
use crate::steane::{decode_measurement, push_measure, Basis, CodeBlock, N};

pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Two-sided normal quantile for `confidence`.
pub fn z_for_confidence<T: Real>(confidence: T) -> Result<T> {
    let c = confidence.to_f64_lossy();
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence {c} outside (0, 1)"
        )));
    }
    let z = Normal::standard().inverse_cdf(0.5 + c / 2.0);
    Ok(T::lit(z))
}

/// Wilson score interval.
pub fn wilson_interval<T: Real>(successes: u64, trials: u64, confidence: T) -> Result<(T, T)> {
    if trials == 0 || successes > trials {
        return Err(Error::InvalidCounts { successes, trials });
    }
    let z = z_for_confidence(confidence)?;
    let n = T::lit(trials as f64);
    let p = T::lit(successes as f64) / n;
    let two = T::lit(2.0);
    let z2 = z * z;
    let denom = T::one() + z2 / n;
    let center = (p + z2 / (two * n)) / denom;
    let half = z / denom * (p * (T::one() - p) / n + z2 / (T::lit(4.0) * n * n)).sqrt();
    let low = if successes == 0 {
        T::zero()
    } else {
        (center - half).max(T::zero())
    };
    let high = if successes == trials {
        T::one()
    } else {
        (center + half).min(T::one())
    };
    Ok((low.min(p), high.max(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate<T = f64> {
    pub successes: u64,
    pub trials: u64,
    pub point: T,
    pub ci_low: T,
    pub ci_high: T,
    pub confidence: T,
}

impl<T: Real> RateEstimate<T> {
    pub fn new(successes: u64, trials: u64, confidence: T) -> Result<Self> {
        let (ci_low, ci_high) = wilson_interval(successes, trials, confidence)?;
        let point = T::lit(successes as f64) / T::lit(trials as f64);
        Ok(Self {
            successes,
            trials,
            point,
            ci_low,
            ci_high,
            confidence,
        })
    }

    pub fn contains(&self, v: T) -> bool {
        self.ci_low <= v && v <= self.ci_high
    }

    pub fn overlaps(&self, other: &RateEstimate<T>) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }

    /// Binomial standard error of the point estimate.
    pub fn std_error(&self) -> T {
        (self.point * (T::one() - self.point) / T::lit(self.trials as f64)).sqrt()
    }
}

/// Trial budget and execution settings shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub confidence: f64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            confidence: DEFAULT_CONFIDENCE,
            workers: 0,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        z_for_confidence(self.confidence).map(|_| ())
    }

    fn rate(&self, successes: u64, trials: u64) -> Result<RateEstimate> {
        RateEstimate::new(successes, trials, self.confidence)
    }
}

trait Tally: Default + Send {
    fn merge(&mut self, other: Self);
}

/// Runs `trial(t, &mut tally)` for every `t < cfg.trials` on `cfg.workers` threads.
fn run_trials<A: Tally>(
    cfg: &McConfig,
    trial: impl Fn(u64, &mut A) -> Result<()> + Sync,
) -> Result<A> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .try_fold(A::default, |mut acc, t| {
                trial(t, &mut acc)?;
                Ok(acc)
            })
            .try_reduce(A::default, |mut a, b| {
                a.merge(b);
                Ok(a)
            })
    })
}

fn check_p(p: f64) -> Result<NoiseModel> {
    let noise = NoiseModel::standard(p);
    noise.validate()?;
    Ok(noise)
}

/// Letter index per wire of a block frame: 0 = X, 1 = Y, 2 = Z.
fn wire_letter(frame: BlockFrame, wire: usize) -> Option<usize> {
    match (frame.0 >> wire & 1, frame.1 >> wire & 1) {
        (1, 0) => Some(0),
        (1, 1) => Some(1),
        (0, 1) => Some(2),
        _ => None,
    }
}

/// A double-verified |+_L⟩ frame in canonical gauge, or `None` if rejected.
fn verified_block(dv: &Stage, noise: &NoiseModel, stream: FaultStream) -> Option<BlockFrame> {
    let out = dv.run(&[], Faults::Sampled { noise, stream })?;
    let mut f = [out[0]];
    canonicalize(&mut f, &LogicalGraph::empty(1));
    Some(f[0])
}

#[derive(Debug, Default)]
struct ChannelTally {
    accepted: u64,
    letters: [[u64; 3]; N],
    any: [u64; N],
    joint: [[u64; N]; N],
}

impl Tally for ChannelTally {
    fn merge(&mut self, o: Self) {
        self.accepted += o.accepted;
        for i in 0..N {
            for a in 0..3 {
                self.letters[i][a] += o.letters[i][a];
            }
            self.any[i] += o.any[i];
            for j in 0..N {
                self.joint[i][j] += o.joint[i][j];
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliRates {
    pub x: RateEstimate,
    pub y: RateEstimate,
    pub z: RateEstimate,
}

/// Residual single-wire channel of a double-verified block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEstimate {
    pub p: f64,
    pub acceptance: RateEstimate,
    pub per_wire: Vec<PauliRates>,
    pub pooled: PauliRates,
    /// Accepted trials with any error on wire `i`.
    pub any_error: Vec<u64>,
    /// `joint[i][j]`: accepted trials with errors on both wires `i != j`.
    pub joint: Vec<Vec<u64>>,
}

pub fn estimate_residual_channel(p: f64, cfg: &McConfig) -> Result<ChannelEstimate> {
    let noise = check_p(p)?;
    let dv = dv_stage()?;
    let t = run_trials(cfg, |trial, acc: &mut ChannelTally| {
        let Some(f) = verified_block(&dv, &noise, FaultStream::new(cfg.seed, trial, 0)) else {
            return Ok(());
        };
        acc.accepted += 1;
        let mut hit = [false; N];
        for (i, h) in hit.iter_mut().enumerate() {
            if let Some(a) = wire_letter(f, i) {
                acc.letters[i][a] += 1;
                acc.any[i] += 1;
                *h = true;
            }
        }
        for i in 0..N {
            for j in 0..N {
                if i != j && hit[i] && hit[j] {
                    acc.joint[i][j] += 1;
                }
            }
        }
        Ok(())
    })?;
    if t.accepted == 0 {
        return Err(Error::ZeroAccepted(cfg.trials));
    }
    let rates = |c: [u64; 3], n: u64| -> Result<PauliRates> {
        Ok(PauliRates {
            x: cfg.rate(c[0], n)?,
            y: cfg.rate(c[1], n)?,
            z: cfg.rate(c[2], n)?,
        })
    };
    let per_wire = t
        .letters
        .iter()
        .map(|&c| rates(c, t.accepted))
        .collect::<Result<Vec<_>>>()?;
    let mut pooled = [0u64; 3];
    for c in &t.letters {
        for a in 0..3 {
            pooled[a] += c[a];
        }
    }
    Ok(ChannelEstimate {
        p,
        acceptance: cfg.rate(t.accepted, cfg.trials)?,
        per_wire,
        pooled: rates(pooled, N as u64 * t.accepted)?,
        any_error: t.any.to_vec(),
        joint: t.joint.iter().map(|r| r.to_vec()).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    pub wires: (usize, usize),
    pub joint: RateEstimate,
    pub marginal_product: f64,
    /// `|P(i,j) - P(i)P(j)|`.
    pub excess: f64,
    /// `excess / (P(i)P(j))`; infinite when the product vanishes.
    pub excess_ratio: f64,
    /// Standard error of the joint rate under independence.
    pub sigma: f64,
    /// `excess <= 0.1 P(i)P(j) + 3 sigma`.
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub p: f64,
    pub accepted: u64,
    pub pairs: Vec<PairCorrelation>,
}

impl CorrelationReport {
    pub fn from_channel(c: &ChannelEstimate) -> Result<Self> {
        let n = c.acceptance.successes;
        let nf = n as f64;
        let mut pairs = Vec::with_capacity(N * (N - 1) / 2);
        for i in 0..N {
            for j in i + 1..N {
                let joint = RateEstimate::new(c.joint[i][j], n, c.acceptance.confidence)?;
                let prod = c.any_error[i] as f64 / nf * (c.any_error[j] as f64 / nf);
                let excess = (joint.point - prod).abs();
                let sigma = (prod * (1.0 - prod) / nf).sqrt();
                let excess_ratio = if prod > 0.0 {
                    excess / prod
                } else if excess > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                pairs.push(PairCorrelation {
                    wires: (i, j),
                    joint,
                    marginal_product: prod,
                    excess,
                    excess_ratio,
                    sigma,
                    within_bound: excess <= 0.1 * prod + 3.0 * sigma,
                });
            }
        }
        Ok(Self {
            p: c.p,
            accepted: n,
            pairs,
        })
    }

    pub fn all_within_bound(&self) -> bool {
        self.pairs.iter().all(|c| c.within_bound)
    }
}

pub fn correlation_diagnostic(p: f64, cfg: &McConfig) -> Result<CorrelationReport> {
    if p > 0.05 {
        return Err(Error::InvalidParameter(format!(
            "correlation diagnostic is defined for p <= 0.05, got {p}"
        )));
    }
    CorrelationReport::from_channel(&estimate_residual_channel(p, cfg)?)
}

/// Transversal readout of one input block after `WAIT` on every wire.
fn readout_simulator(basis: Basis, wait: bool) -> Result<FrameSimulator> {
    let b = CodeBlock::contiguous(0);
    let mut c = Circuit::new(N);
    c.inputs = b.wires.to_vec();
    if wait {
        for &q in &b.wires {
            c.push(GateEvent::one(GateKind::Wait, q));
        }
    }
    push_measure(&mut c, basis, &b);
    FrameSimulator::new(c)
}

#[derive(Debug, Default)]
struct ReadoutTally {
    accepted: u64,
    errors: u64,
}

impl Tally for ReadoutTally {
    fn merge(&mut self, o: Self) {
        self.accepted += o.accepted;
        self.errors += o.errors;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutEstimate {
    pub p: f64,
    pub tau: f64,
    /// Wrong decoded bit among accepted blocks.
    pub error: RateEstimate,
    pub acceptance: RateEstimate,
}

/// Logical readout error of a double-verified |+_L⟩ measured transversally
/// in X after waiting `tau`. `WAIT` faults are uniform over X, Y, Z.
pub fn estimate_logical_measurement_error(
    p: f64,
    tau: f64,
    basis: Basis,
    cfg: &McConfig,
) -> Result<ReadoutEstimate> {
    if basis != Basis::X {
        return Err(Error::InvalidParameter(
            "only X readouts of verified |+_L⟩ are estimated".into(),
        ));
    }
    let noise = check_p(p)?.with_tau(tau);
    noise.validate()?;
    let dv = dv_stage()?;
    let readout = readout_simulator(basis, tau > 0.0)?;
    let block = [CodeBlock::contiguous(0)];
    let t = run_trials(cfg, |trial, acc: &mut ReadoutTally| {
        let Some(f) = verified_block(&dv, &noise, FaultStream::new(cfg.seed, trial, 0)) else {
            return Ok(());
        };
        acc.accepted += 1;
        let init = frame_from_blocks(N, &block, &[f]);
        let r = readout.run(
            init.as_ref(),
            Faults::Sampled {
                noise: &noise,
                stream: FaultStream::new(cfg.seed, trial, 1),
            },
            false,
        );
        let word = (0..N).fold(0u8, |w, i| w | (r.flips[i] as u8) << i);
        acc.errors += decode_measurement(word, basis).logical as u64;
        Ok(())
    })?;
    if t.accepted == 0 {
        return Err(Error::ZeroAccepted(cfg.trials));
    }
    Ok(ReadoutEstimate {
        p,
        tau,
        error: cfg.rate(t.errors, t.accepted)?,
        acceptance: cfg.rate(t.accepted, cfg.trials)?,
    })
}

/// Where the stars used by the connection estimators come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafSource {
    /// Full hierarchical star builds.
    Star,
    /// A verified root plus verified two-block leaves, without the final
    /// star assembly.
    Pair,
    /// Every wire of every block independently drawn from the leading
    /// residual channel.
    Homogeneous,
}

impl std::str::FromStr for LeafSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(Self::Star),
            "pair" => Ok(Self::Pair),
            "homogeneous" => Ok(Self::Homogeneous),
            _ => Err(Error::InvalidParameter(format!(
                "unknown leaf source {s:?}"
            ))),
        }
    }
}

struct StarSource {
    kind: LeafSource,
    /// Index `l - 1` builds stars with `l` leaves.
    factories: Vec<StarFactory>,
    channel: LeadingChannel<f64>,
}

impl StarSource {
    fn new(kind: LeafSource, leaves: usize, noise: &NoiseModel) -> Result<Self> {
        let factories = match kind {
            LeafSource::Star => (1..=leaves)
                .map(|l| StarFactory::new(l, *noise))
                .collect::<Result<_>>()?,
            LeafSource::Pair => vec![StarFactory::new(1, *noise)?],
            LeafSource::Homogeneous => Vec::new(),
        };
        Ok(Self {
            kind,
            factories,
            channel: AnalyticModel::<f64>::default().leading_channel(noise.p),
        })
    }

    fn draw_block(&self, stream: &FaultStream, v: usize) -> BlockFrame {
        let c = &self.channel;
        let (mut x, mut z) = (0u8, 0u8);
        for i in 0..N {
            let u = stream.uniform((v * N + i) as u64);
            if u < c.eps_x {
                x |= 1 << i;
            } else if u < c.eps_x + c.eps_y {
                x |= 1 << i;
                z |= 1 << i;
            } else if u < c.total() {
                z |= 1 << i;
            }
        }
        (x, z)
    }

    fn build(&self, leaves: usize, stream: FaultStream) -> Result<StarClusterState> {
        let mut ctx = BuildContext::new(stream);
        match self.kind {
            LeafSource::Star => self.factories[leaves - 1].build_star(&mut ctx),
            LeafSource::Pair => {
                let f = &self.factories[0];
                let mut frames = vec![f.build_block(&mut ctx)?];
                for _ in 0..leaves {
                    frames.extend(f.build_two_qubit_cluster(&mut ctx)?);
                }
                canonicalize(&mut frames, &LogicalGraph::star(leaves));
                StarClusterState::new(leaves, frames)
            }
            LeafSource::Homogeneous => StarClusterState::new(
                leaves,
                (0..1 + 2 * leaves)
                    .map(|v| self.draw_block(&stream, v))
                    .collect(),
            ),
        }
    }

    /// End-block frames only; for homogeneous stars the other blocks are not drawn.
    fn ends(&self, leaves: usize, stream: FaultStream) -> Result<Vec<BlockFrame>> {
        if self.kind == LeafSource::Homogeneous {
            return Ok((0..leaves)
                .map(|l| self.draw_block(&stream, StarClusterState::end(l)))
                .collect());
        }
        let s = self.build(leaves, stream)?;
        Ok((0..leaves)
            .map(|l| s.frames[StarClusterState::end(l)])
            .collect())
    }
}

#[derive(Debug, Default)]
struct FusionTally {
    attempts: u64,
    successes: u64,
    readouts: u64,
    wrong: u64,
    inherited: u64,
}

impl Tally for FusionTally {
    fn merge(&mut self, o: Self) {
        self.attempts += o.attempts;
        self.successes += o.successes;
        self.readouts += o.readouts;
        self.wrong += o.wrong;
        self.inherited += o.inherited;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionEstimate {
    pub p: f64,
    pub leaves: usize,
    pub source: LeafSource,
    /// Both syndromes trivial, per attempt.
    pub p_s: RateEstimate,
    /// Readouts with trivial syndromes whose decoded bit differs from the
    /// logical value carried by the input blocks.
    pub conditional_error: RateEstimate,
    /// Readouts with trivial syndromes whose input blocks already carried a
    /// logical flip.
    pub inherited_error: RateEstimate,
}

/// Success rate and verified readout error of the fusion step. Trial `t`
/// builds two fresh stars and fuses them leaf by leaf, so each trial
/// contributes `leaves` attempts.
pub fn estimate_fusion_stats(
    p: f64,
    leaves: usize,
    source: LeafSource,
    cfg: &McConfig,
) -> Result<FusionEstimate> {
    let noise = check_p(p)?;
    if leaves == 0 {
        return Err(Error::InvalidParameter(
            "a star needs at least one leaf".into(),
        ));
    }
    let src = StarSource::new(source, leaves, &noise)?;
    let conn = Connector::new()?;
    let t = run_trials(cfg, |trial, acc: &mut FusionTally| {
        let s = FaultStream::new(cfg.seed, trial, 2);
        let a = src.ends(leaves, s.child(0))?;
        let b = src.ends(leaves, s.child(1))?;
        for l in 0..leaves {
            let [d1, d3] = conn.fuse(a[l], b[l], &noise, s.child(2 + l as u64));
            acc.attempts += 1;
            if d1.syndrome == 0 && d3.syndrome == 0 {
                // Logical value each readout should report given its input
                // frames; the CZ carries X on one block into Z on the other.
                let (ax, az) = decode_block(a[l].0, a[l].1);
                let (bx, bz) = decode_block(b[l].0, b[l].1);
                let carried = [az ^ bx, bz ^ ax];
                acc.successes += 1;
                acc.readouts += 2;
                for (d, c) in [d1, d3].iter().zip(carried) {
                    acc.wrong += (d.logical != c) as u64;
                    acc.inherited += c as u64;
                }
            }
        }
        Ok(())
    })?;
    if t.successes == 0 {
        return Err(Error::ZeroAccepted(t.attempts));
    }
    Ok(FusionEstimate {
        p,
        leaves,
        source,
        p_s: cfg.rate(t.successes, t.attempts)?,
        conditional_error: cfg.rate(t.wrong, t.readouts)?,
        inherited_error: cfg.rate(t.inherited, t.readouts)?,
    })
}

#[derive(Debug, Default)]
struct RootTally {
    roots: u64,
    failures: u64,
    links: u64,
    attempts: u64,
    root_errors: u64,
}

impl Tally for RootTally {
    fn merge(&mut self, o: Self) {
        self.roots += o.roots;
        self.failures += o.failures;
        self.links += o.links;
        self.attempts += o.attempts;
        self.root_errors += o.root_errors;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootFailureEstimate {
    pub p: f64,
    pub leaves: usize,
    pub source: LeafSource,
    /// Root that could not complete all of its links.
    pub p_fail: RateEstimate,
    /// Completed links, and the connection attempts they took.
    pub links: u64,
    pub attempts: u64,
    /// Completed links that left a logical error on this root.
    pub root_error: RateEstimate,
}

impl RootFailureEstimate {
    pub fn mean_attempts(&self) -> f64 {
        self.attempts as f64 / self.links as f64
    }
}

/// Trial `t` builds one star and links it to [`LINKS_PER_ROOT`] fresh
/// partners in turn, retrying on its own leaves. Each partner has as many
/// leaves as the root has left, so the root is always the one to run out.
pub fn estimate_root_failure(
    p: f64,
    leaves: usize,
    source: LeafSource,
    cfg: &McConfig,
) -> Result<RootFailureEstimate> {
    let noise = check_p(p)?;
    if leaves == 0 {
        return Err(Error::InvalidParameter(
            "a star needs at least one leaf".into(),
        ));
    }
    let src = StarSource::new(source, leaves, &noise)?;
    let conn = Connector::new()?;
    let t = run_trials(cfg, |trial, acc: &mut RootTally| {
        let s = FaultStream::new(cfg.seed, trial, 3);
        let mut root = src.build(leaves, s.child(0))?;
        acc.roots += 1;
        for j in 0..LINKS_PER_ROOT as u64 {
            let free = root.free_leaves();
            if free == 0 {
                acc.failures += 1;
                return Ok(());
            }
            let mut partner = src.build(free, s.child(1 + 2 * j))?;
            let rec =
                conn.link_with_retries(&mut root, &mut partner, &noise, s.child(2 + 2 * j))?;
            if rec.status == LinkStatus::UndetectedErroneous {
                acc.failures += 1;
                return Ok(());
            }
            acc.links += 1;
            acc.attempts += rec.attempts as u64;
            acc.root_errors += rec.root_errors[0] as u64;
        }
        Ok(())
    })?;
    if t.links == 0 {
        return Err(Error::ZeroAccepted(t.roots));
    }
    Ok(RootFailureEstimate {
        p,
        leaves,
        source,
        p_fail: cfg.rate(t.failures, t.roots)?,
        links: t.links,
        attempts: t.attempts,
        root_error: cfg.rate(t.root_errors, t.links)?,
    })
}

#[derive(Debug, Default)]
struct StarTally {
    stats: BuildStats,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl Tally for StarTally {
    fn merge(&mut self, o: Self) {
        self.stats.add(&o.stats);
        for (v, (x, z)) in o.x.into_iter().zip(o.z).enumerate() {
            if self.x.len() <= v {
                self.x.push(0);
                self.z.push(0);
            }
            self.x[v] += x;
            self.z[v] += z;
        }
    }
}

/// Residual frames of fully built stars, per block (root first, then
/// inner/end pairs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarEstimate {
    pub p: f64,
    pub leaves: usize,
    pub stars: u64,
    pub stats: BuildStats,
    /// Any X-type residual on the block, in canonical gauge.
    pub x_error: Vec<RateEstimate>,
    pub z_error: Vec<RateEstimate>,
}

impl StarEstimate {
    /// Stage attempts per accepted star: (dv, pair, star).
    pub fn attempts_per_star(&self) -> (f64, f64, f64) {
        let n = self.stars as f64;
        (
            self.stats.dv_attempts as f64 / n,
            self.stats.pair_attempts as f64 / n,
            self.stats.star_attempts as f64 / n,
        )
    }

    /// Whether the per-block intervals of each kind all overlap the first leaf's.
    pub fn leaves_homogeneous(&self) -> bool {
        [&self.x_error, &self.z_error]
            .iter()
            .all(|r| r[1..].iter().all(|e| e.overlaps(&r[1])))
    }
}

pub fn estimate_star_blocks(p: f64, leaves: usize, cfg: &McConfig) -> Result<StarEstimate> {
    let noise = check_p(p)?;
    let factory = StarFactory::new(leaves, noise)?;
    let t = run_trials(cfg, |trial, acc: &mut StarTally| {
        let mut ctx = BuildContext::new(FaultStream::new(cfg.seed, trial, 4));
        let s = factory.build_star(&mut ctx)?;
        acc.stats.add(&ctx.stats);
        if acc.x.is_empty() {
            acc.x = vec![0; s.frames.len()];
            acc.z = vec![0; s.frames.len()];
        }
        for (v, f) in s.frames.iter().enumerate() {
            acc.x[v] += (f.0 != 0) as u64;
            acc.z[v] += (f.1 != 0) as u64;
        }
        Ok(())
    })?;
    let rates = |c: &[u64]| {
        c.iter()
            .map(|&k| cfg.rate(k, cfg.trials))
            .collect::<Result<Vec<_>>>()
    };
    Ok(StarEstimate {
        p,
        leaves,
        stars: cfg.trials,
        stats: t.stats,
        x_error: rates(&t.x)?,
        z_error: rates(&t.z)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionEstimate {
    pub fusion: FusionEstimate,
    pub roots: RootFailureEstimate,
}

/// Both connection estimators with the same budget and seed.
pub fn estimate_connection_stats(
    p: f64,
    leaves: usize,
    source: LeafSource,
    cfg: &McConfig,
) -> Result<ConnectionEstimate> {
    Ok(ConnectionEstimate {
        fusion: estimate_fusion_stats(p, leaves, source, cfg)?,
        roots: estimate_root_failure(p, leaves, source, cfg)?,
    })
}

/// Weighted least-squares slope of `ln rate` against `ln p`, with `1/k`
/// as the variance of `ln rate` at `k` events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub std_error: f64,
}

pub fn loglog_slope(points: &[(f64, RateEstimate)]) -> Option<SlopeFit> {
    if points.len() < 2 || points.iter().any(|(p, r)| *p <= 0.0 || r.successes == 0) {
        return None;
    }
    let w: Vec<f64> = points.iter().map(|(_, r)| r.successes as f64).collect();
    let x: Vec<f64> = points.iter().map(|(p, _)| p.ln()).collect();
    let y: Vec<f64> = points.iter().map(|(_, r)| r.point.ln()).collect();
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(&y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&x).map(|(w, x)| w * (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = w
        .iter()
        .zip(x.iter().zip(&y))
        .map(|(w, (x, y))| w * (x - mx) * (y - my))
        .sum();
    Some(SlopeFit {
        slope: sxy / sxx,
        std_error: (1.0 / sxx).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_zero_of_hundred() {
        let (lo, hi) = wilson_interval(0, 100, 0.95f64).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.0370).abs() < 1e-3, "{hi}");
    }

    #[test]
    fn wilson_half_is_symmetric() {
        let (lo, hi) = wilson_interval(50, 100, 0.95f64).unwrap();
        assert!(((lo + hi) / 2.0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wilson_rejects_bad_counts() {
        assert!(wilson_interval::<f64>(3, 2, 0.95).is_err());
        assert!(wilson_interval::<f64>(0, 0, 0.95).is_err());
        assert!(wilson_interval::<f64>(1, 2, 1.0).is_err());
    }

    #[test]
    fn slope_of_a_cube() {
        let cfg = McConfig::new(1, 0);
        let pts: Vec<(f64, RateEstimate)> = [0.01, 0.02, 0.04]
            .iter()
            .map(|&p: &f64| {
                (
                    p,
                    cfg.rate((1e9 * p.powi(3)) as u64, 1_000_000_000).unwrap(),
                )
            })
            .collect();
        let s = loglog_slope(&pts).unwrap();
        assert!((s.slope - 3.0).abs() < 1e-3);
    }

    #[test]
    fn leaf_source_names() {
        assert_eq!("pair".parse::<LeafSource>().unwrap(), LeafSource::Pair);
        assert!("tree".parse::<LeafSource>().is_err());
    }
}
