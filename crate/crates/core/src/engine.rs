//! Verification and the plan / generate / verify loop.
//!
//! Candidates are compared with the target in a cheap shared embedding: the
//! tSDF block-mean pooled to `pool_res³`. A capacity-bounded priority queue
//! keeps the best candidates seen across all rounds, and its head becomes
//! the next round's current sequence.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::generator::{CandidateSet, GenError, GenPolicy, Generator, SurrogateGenerator};
use crate::geom::{render, GridSpec, TsdfGrid};
use crate::hash::{mix_seed, Fnv64};
use crate::mask::apply_mask;
use crate::math::sqrt;
use crate::metrics::{MetricOptions, MetricsReport};
use crate::planner::{relative_scores, select_segments, InfluenceVector, PlanConfig, PlanError};
use crate::segment::SegmentId;
use crate::seq::ConstructionSequence;
use crate::token::serialize_sequence;
use crate::validate::{validate, Violation};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EngineError {
    #[error("original sequence is invalid: {0:?}")]
    InvalidOriginal(Vec<Violation>),
    #[error("original sequence does not render a solid")]
    OriginalRenderInvalid,
    #[error("target grid does not match the configured grid spec")]
    TargetSpecMismatch,
    #[error("grid resolution {resolution} is not divisible by pool resolution {pool_res}")]
    ResolutionMismatch { resolution: usize, pool_res: usize },
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Generate(#[from] GenError),
}

/// Pooled shape embedding. `None` is the sentinel for an unrenderable
/// sequence; it is infinitely far from everything.
#[derive(Clone, Debug, PartialEq)]
pub struct Latent(Option<Vec<f64>>);

impl Latent {
    pub fn invalid() -> Self {
        Latent(None)
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.0.as_deref()
    }

    pub fn is_valid(&self) -> bool {
        self.0.is_some()
    }

    /// Euclidean distance; `+inf` if either side is the sentinel or the
    /// lengths differ.
    pub fn distance(&self, other: &Latent) -> f64 {
        match (&self.0, &other.0) {
            (Some(a), Some(b)) if a.len() == b.len() => {
                sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
            }
            _ => f64::INFINITY,
        }
    }
}

pub fn embed_shape(grid: &TsdfGrid, pool_res: usize) -> Result<Latent, EngineError> {
    let res = grid.spec().resolution;
    if pool_res == 0 || res % pool_res != 0 {
        return Err(EngineError::ResolutionMismatch { resolution: res, pool_res });
    }
    let block = res / pool_res;
    let mut out = vec![0.0; pool_res * pool_res * pool_res];
    for (idx, v) in grid.values().iter().enumerate() {
        let (i, j, k) = grid.spec().coords(idx);
        let cell = (i / block) + pool_res * ((j / block) + pool_res * (k / block));
        out[cell] += f64::from(*v);
    }
    let n = (block * block * block) as f64;
    out.iter_mut().for_each(|v| *v /= n);
    Ok(Latent(Some(out)))
}

pub fn embed_sequence(seq: &ConstructionSequence, spec: &GridSpec, pool_res: usize) -> Latent {
    render(seq, spec).ok().and_then(|g| embed_shape(&g, pool_res).ok()).unwrap_or_else(Latent::invalid)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueueEntry {
    pub seq: ConstructionSequence,
    pub text: String,
    pub latent: Latent,
    pub distance: f64,
    order: u64,
}

/// Best-`capacity` store ordered by ascending distance, ties by insertion.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorityQueue {
    capacity: usize,
    entries: Vec<QueueEntry>,
    pushed: u64,
}

impl PriorityQueue {
    pub fn new(capacity: usize) -> Self {
        PriorityQueue { capacity: capacity.max(1), entries: Vec::new(), pushed: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[QueueEntry] {
        &self.entries
    }

    pub fn best(&self) -> Option<&QueueEntry> {
        self.entries.first()
    }

    pub fn best_distance(&self) -> f64 {
        self.best().map_or(f64::INFINITY, |e| e.distance)
    }

    pub fn distances(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.distance).collect()
    }

    /// Returns whether the entry was kept. Infinite distances and streams
    /// already queued are rejected.
    pub fn push(&mut self, seq: ConstructionSequence, latent: Latent, distance: f64) -> bool {
        if !distance.is_finite() {
            return false;
        }
        let text = serialize_sequence(&seq);
        if self.entries.iter().any(|e| e.text == text) {
            return false;
        }
        let order = self.pushed;
        self.pushed += 1;
        // first slot with a strictly larger distance keeps ties in insertion order
        let at = self.entries.partition_point(|e| e.distance <= distance);
        if at >= self.capacity {
            return false;
        }
        self.entries.insert(at, QueueEntry { seq, text, latent, distance, order });
        self.entries.truncate(self.capacity);
        true
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// Order-sensitive hash of the queued streams and distances.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv64::new();
        for e in &self.entries {
            h.write(e.text.as_bytes());
            h.write_u64(e.distance.to_bits());
            h.write_u64(e.order);
        }
        h.finish()
    }
}

/// Embeds and scores every candidate, pushes them into `queue`, and returns
/// the per-candidate distances together with the queue head.
pub fn verify_select(
    candidates: &CandidateSet,
    target: &Latent,
    queue: &mut PriorityQueue,
    spec: &GridSpec,
    pool_res: usize,
) -> (Vec<f64>, Option<ConstructionSequence>) {
    let mut distances = Vec::with_capacity(candidates.len());
    for seq in candidates.sequences() {
        let latent = embed_sequence(seq, spec, pool_res);
        let d = latent.distance(target);
        distances.push(d);
        queue.push(seq.clone(), latent, d);
    }
    (distances, queue.best().map(|e| e.seq.clone()))
}

/// Which stage of the loop to replace with a random or memoryless stand-in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Ablation {
    #[default]
    None,
    /// Relative scores drawn uniformly at random.
    Plan,
    /// A uniformly random renderable candidate replaces the verifier's pick.
    Verify,
    /// Capacity one and no memory across rounds.
    Queue,
}

impl Ablation {
    pub fn name(self) -> &'static str {
        match self {
            Ablation::None => "none",
            Ablation::Plan => "plan",
            Ablation::Verify => "verify",
            Ablation::Queue => "queue",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineConfig {
    pub max_rounds: usize,
    /// Candidates per round; overrides the generator policy's `n`.
    pub n: usize,
    pub queue_capacity: usize,
    pub pool_res: usize,
    pub epsilon: f64,
    pub patience: usize,
    pub seed: u64,
    pub spec: GridSpec,
    pub metrics: MetricOptions,
    pub ablation: Ablation,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_rounds: 10,
            n: 8,
            queue_capacity: 5,
            pool_res: 8,
            epsilon: 1e-3,
            patience: 3,
            seed: 0,
            spec: GridSpec::default(),
            metrics: MetricOptions::default(),
            ablation: Ablation::None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    EmptyMask,
    Converged,
    Patience,
    MaxRounds,
    NoGeneration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub influence: InfluenceVector,
    pub selected: Vec<SegmentId>,
    pub candidate_distances: Vec<f64>,
    pub queue_digest: u64,
    /// Distance of the sequence carried into the next round.
    pub current_distance: f64,
    /// Smallest distance seen so far over all rounds.
    pub best_distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EditResult {
    pub final_seq: ConstructionSequence,
    pub rounds_used: usize,
    pub stop: StopReason,
    pub trace: Vec<RoundRecord>,
    pub report: MetricsReport,
}

/// Runs the loop with the built-in surrogate generator.
pub fn run(
    original: &ConstructionSequence,
    target: &TsdfGrid,
    cfg: &EngineConfig,
    plan: &PlanConfig,
    policy: &GenPolicy,
) -> Result<EditResult, EngineError> {
    run_with(&mut SurrogateGenerator, original, target, cfg, plan, policy)
}

pub fn run_with<G: Generator + ?Sized>(
    generator: &mut G,
    original: &ConstructionSequence,
    target: &TsdfGrid,
    cfg: &EngineConfig,
    plan: &PlanConfig,
    policy: &GenPolicy,
) -> Result<EditResult, EngineError> {
    if cfg.max_rounds == 0 || cfg.queue_capacity == 0 {
        return Err(EngineError::InvalidConfig("max_rounds and queue_capacity must be at least 1"));
    }
    let violations = validate(original);
    if !violations.is_empty() {
        return Err(EngineError::InvalidOriginal(violations));
    }
    if *target.spec() != cfg.spec {
        return Err(EngineError::TargetSpecMismatch);
    }
    let target_latent = embed_shape(target, cfg.pool_res)?;
    let original_grid = render(original, &cfg.spec).map_err(|_| EngineError::OriginalRenderInvalid)?;
    let finish = |seq: ConstructionSequence, rounds_used, stop, trace| EditResult {
        report: MetricsReport::compute(&seq, target, original, &cfg.metrics),
        final_seq: seq,
        rounds_used,
        stop,
        trace,
    };
    if cfg.n == 0 {
        return Ok(finish(original.clone(), 0, StopReason::NoGeneration, Vec::new()));
    }

    let capacity = if cfg.ablation == Ablation::Queue { 1 } else { cfg.queue_capacity };
    let mut queue = PriorityQueue::new(capacity);
    let original_latent = embed_shape(&original_grid, cfg.pool_res)?;
    let original_distance = original_latent.distance(&target_latent);
    if cfg.ablation != Ablation::Queue {
        queue.push(original.clone(), original_latent, original_distance);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 0x5eed));
    let mut current = original.clone();
    let mut current_grid = original_grid;
    let mut current_distance = original_distance;
    let mut best = original_distance;
    let mut stale = 0usize;
    let mut trace = Vec::new();

    for round in 1..=cfg.max_rounds {
        let mut influence = relative_scores(&current, &current_grid, target, plan)?;
        if cfg.ablation == Ablation::Plan {
            let any_signal = influence.entries.iter().any(|e| e.j > 0.0);
            for e in &mut influence.entries {
                e.j = if any_signal { rng.random::<f64>() } else { 0.0 };
            }
        }
        let selected = select_segments(&influence, plan);
        let mut record = RoundRecord {
            round,
            influence,
            selected: selected.clone(),
            candidate_distances: Vec::new(),
            queue_digest: queue.digest(),
            current_distance,
            best_distance: best,
        };
        if selected.is_empty() {
            trace.push(record);
            return Ok(finish(current, round, StopReason::EmptyMask, trace));
        }

        let masked = apply_mask(&current, &selected).expect("planner selects disjoint known segments");
        let round_policy = GenPolicy { n: cfg.n, seed: mix_seed(cfg.seed ^ policy.seed, round as u64), ..*policy };
        let candidates = generator.infill(&masked, &round_policy)?;
        if cfg.ablation == Ablation::Queue {
            queue.clear();
        }
        let (distances, head) = verify_select(&candidates, &target_latent, &mut queue, &cfg.spec, cfg.pool_res);

        let pick = match cfg.ablation {
            Ablation::Verify => {
                let valid: Vec<usize> = (0..distances.len()).filter(|&i| distances[i].is_finite()).collect();
                (!valid.is_empty()).then(|| {
                    let i = valid[rng.random_range(0..valid.len())];
                    (candidates.candidates[i].seq.clone(), distances[i])
                })
            }
            _ => head.map(|seq| (seq, queue.best_distance())),
        };
        if let Some((seq, d)) = pick {
            if seq != current {
                current_grid = render(&seq, &cfg.spec).expect("finite distance implies a valid render");
                current = seq;
            }
            current_distance = d;
        }

        let round_min = distances.iter().copied().fold(current_distance, f64::min);
        if round_min < best {
            best = round_min;
            stale = 0;
        } else {
            stale += 1;
        }
        record.candidate_distances = distances;
        record.queue_digest = queue.digest();
        record.current_distance = current_distance;
        record.best_distance = best;
        trace.push(record);

        if current_distance < cfg.epsilon {
            return Ok(finish(current, round, StopReason::Converged, trace));
        }
        if stale >= cfg.patience {
            return Ok(finish(current, round, StopReason::Patience, trace));
        }
    }
    Ok(finish(current, cfg.max_rounds, StopReason::MaxRounds, trace))
}
