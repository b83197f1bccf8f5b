//! Synthetic benchmark triplets: an original sequence, a ground-truth edit
//! of it, and the target shape rendered from that edit.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sketchedit_core::geom::render;
use sketchedit_core::metrics::iou;
use sketchedit_core::random::{random_pair, random_renderable, RandomSpec};
use sketchedit_core::segment::SegmentId;
use sketchedit_core::{
    edit_distance, validate, BoolOp, ConstructionSequence, ExtentType, GridSpec, Primitive, QuantizedParam, TsdfGrid,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EditClass {
    ParamJitter,
    PrimitiveSubstitute,
    LoopAddRemove,
    PairAddRemove,
}

impl EditClass {
    pub const ALL: [EditClass; 4] =
        [EditClass::ParamJitter, EditClass::PrimitiveSubstitute, EditClass::LoopAddRemove, EditClass::PairAddRemove];

    pub fn name(self) -> &'static str {
        match self {
            EditClass::ParamJitter => "param-jitter",
            EditClass::PrimitiveSubstitute => "primitive-substitute",
            EditClass::LoopAddRemove => "loop-add-remove",
            EditClass::PairAddRemove => "pair-add-remove",
        }
    }
}

impl fmt::Display for EditClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EditClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EditClass::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown edit class `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub corpus_size: usize,
    pub classes: Vec<EditClass>,
    pub edits_per_triplet: usize,
    pub seed: u64,
    pub resolution: usize,
    pub tau: f64,
    pub min_pairs: usize,
    pub max_pairs: usize,
    /// Accepted range of IoU between the original's and the target's
    /// renderings; keeps edits visible without replacing the shape.
    pub min_iou: f64,
    pub max_iou: f64,
    /// Rejection budget per triplet.
    pub max_attempts: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            corpus_size: 50,
            classes: vec![EditClass::ParamJitter, EditClass::PrimitiveSubstitute],
            edits_per_triplet: 1,
            seed: 0,
            resolution: 32,
            tau: 0.2,
            min_pairs: 1,
            max_pairs: 4,
            min_iou: 0.4,
            max_iou: 0.85,
            max_attempts: 2000,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    InvalidSpec(String),
    #[error("triplet {index}: no accepted {class} edit within {attempts} attempts")]
    ExhaustedAttempts { index: usize, class: EditClass, attempts: usize },
}

impl SynthSpec {
    pub fn grid(&self) -> Result<GridSpec, SynthError> {
        GridSpec::new(self.resolution, self.tau).map_err(|e| SynthError::InvalidSpec(e.to_string()))
    }

    pub fn check(&self) -> Result<(), SynthError> {
        self.grid()?;
        let bad = |m: &str| Err(SynthError::InvalidSpec(m.to_string()));
        if self.classes.is_empty() {
            return bad("at least one edit class is required");
        }
        if self.edits_per_triplet == 0 {
            return bad("edits_per_triplet must be at least 1");
        }
        if self.min_pairs == 0 || self.max_pairs < self.min_pairs {
            return bad("need 1 <= min_pairs <= max_pairs");
        }
        if !(0.0..=1.0).contains(&self.min_iou) || self.max_iou < self.min_iou {
            return bad("need 0 <= min_iou <= max_iou");
        }
        Ok(())
    }

    fn random_spec(&self) -> RandomSpec {
        RandomSpec { min_pairs: self.min_pairs, max_pairs: self.max_pairs, ..RandomSpec::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Triplet {
    pub original: ConstructionSequence,
    pub target: TsdfGrid,
    pub truth: ConstructionSequence,
    pub edit_class: EditClass,
    pub truth_edit_distance: usize,
    /// The segment changed by a single-segment edit, at primitive granularity.
    pub edited_segment: Option<SegmentId>,
    pub seed: u64,
}

/// Derives the seed of triplet `index`.
pub fn triplet_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng.random()
}

pub fn synth(spec: &SynthSpec) -> Result<Vec<Triplet>, SynthError> {
    spec.check()?;
    (0..spec.corpus_size).map(|i| synth_one(spec, i)).collect()
}

pub fn synth_one(spec: &SynthSpec, index: usize) -> Result<Triplet, SynthError> {
    let grid = spec.grid()?;
    let seed = triplet_seed(spec.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let class = spec.classes[index % spec.classes.len()];
    for _ in 0..spec.max_attempts {
        let original = random_renderable(&mut rng, &spec.random_spec(), &grid, 0.01);
        let Some((truth, edited)) = mutate(&mut rng, &original, class, spec.edits_per_triplet) else { continue };
        if !validate(&truth).is_empty() {
            continue;
        }
        let (Ok(before), Ok(target)) = (render(&original, &grid), render(&truth, &grid)) else { continue };
        let overlap = iou(&before, &target).expect("same grid");
        if overlap < spec.min_iou || overlap > spec.max_iou {
            continue;
        }
        let truth_edit_distance = edit_distance(&original, &truth);
        if truth_edit_distance == 0 {
            continue;
        }
        let edited_segment = if spec.edits_per_triplet == 1 { edited } else { None };
        return Ok(Triplet { original, target, truth, edit_class: class, truth_edit_distance, edited_segment, seed });
    }
    Err(SynthError::ExhaustedAttempts { index, class, attempts: spec.max_attempts })
}

fn shift<R: Rng>(rng: &mut R, q: QuantizedParam, lo: u8) -> QuantizedParam {
    let mag: i64 = rng.random_range(12..=40);
    let delta = if rng.random_bool(0.5) { mag } else { -mag };
    QuantizedParam::new((i64::from(q.bin()) + delta).clamp(i64::from(lo), 255) as u8)
}

fn mutate<R: Rng>(
    rng: &mut R,
    seq: &ConstructionSequence,
    class: EditClass,
    edits: usize,
) -> Option<(ConstructionSequence, Option<SegmentId>)> {
    let mut out = seq.clone();
    let mut last = None;
    for _ in 0..edits {
        last = match class {
            EditClass::ParamJitter => param_jitter(rng, &mut out),
            EditClass::PrimitiveSubstitute => substitute(rng, &mut out),
            EditClass::LoopAddRemove => loop_add_remove(rng, &mut out),
            EditClass::PairAddRemove => pair_add_remove(rng, &mut out),
        };
        last?;
    }
    Some((out, last.flatten()))
}

fn primitive_ids(seq: &ConstructionSequence) -> Vec<SegmentId> {
    let mut ids = Vec::new();
    for (pi, pair) in seq.pairs.iter().enumerate() {
        for (li, lp) in pair.sketch.loops.iter().enumerate() {
            for k in 0..lp.primitives.len() {
                ids.push(SegmentId::primitive(pi, li, k));
            }
        }
    }
    ids
}

fn primitive_mut<'a>(seq: &'a mut ConstructionSequence, id: &SegmentId) -> &'a mut Primitive {
    match id.kind {
        sketchedit_core::SegmentKind::Primitive { loop_idx, prim } => {
            &mut seq.pairs[id.pair].sketch.loops[loop_idx].primitives[prim]
        }
        _ => unreachable!("primitive ids only"),
    }
}

/// Moves the numeric fields of one primitive, or the extents of one
/// extrusion, by 12 to 40 bins each. Placement and orientation of the
/// sketch plane are left alone.
fn param_jitter<R: Rng>(rng: &mut R, seq: &mut ConstructionSequence) -> Option<Option<SegmentId>> {
    let prims = primitive_ids(seq);
    if rng.random_bool(0.2) {
        let pi = rng.random_range(0..seq.pairs.len());
        let e = &mut seq.pairs[pi].extrusion;
        if e.extent == ExtentType::TwoSided && rng.random_bool(0.5) {
            e.dist_neg = shift(rng, e.dist_neg, 1);
        } else {
            e.dist_pos = shift(rng, e.dist_pos, 1);
        }
        return Some(Some(SegmentId::extrusion(pi)));
    }
    let id = *prims.choose(rng)?;
    let p = primitive_mut(seq, &id);
    // each field moves with probability one half, at least one always does
    let pick = |rng: &mut R, n: usize| -> Vec<bool> {
        let mut m: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        if !m.contains(&true) {
            m[rng.random_range(0..n)] = true;
        }
        m
    };
    match p {
        Primitive::Line { end } => {
            let m = pick(rng, 2);
            for (i, v) in end.iter_mut().enumerate() {
                if m[i] {
                    *v = shift(rng, *v, 0);
                }
            }
        }
        Primitive::Arc { end, sweep, .. } => {
            let m = pick(rng, 3);
            for (i, v) in end.iter_mut().enumerate() {
                if m[i] {
                    *v = shift(rng, *v, 0);
                }
            }
            if m[2] {
                *sweep = QuantizedParam::new(shift(rng, *sweep, 1).bin().min(254));
            }
        }
        Primitive::Circle { center, radius } => {
            let m = pick(rng, 3);
            for (i, v) in center.iter_mut().enumerate() {
                if m[i] {
                    *v = shift(rng, *v, 0);
                }
            }
            if m[2] {
                *radius = shift(rng, *radius, 1);
            }
        }
    }
    Some(Some(id))
}

/// Line to arc or arc to line, keeping the endpoint.
fn substitute<R: Rng>(rng: &mut R, seq: &mut ConstructionSequence) -> Option<Option<SegmentId>> {
    let ids: Vec<SegmentId> = primitive_ids(seq)
        .into_iter()
        .filter(|id| !primitive_mut(&mut seq.clone(), id).is_circle())
        .collect();
    let id = *ids.choose(rng)?;
    let p = primitive_mut(seq, &id);
    *p = match *p {
        Primitive::Line { end } => Primitive::Arc {
            end,
            sweep: QuantizedParam::new(rng.random_range(32..=112)),
            ccw: rng.random_bool(0.5),
        },
        Primitive::Arc { end, .. } => Primitive::Line { end },
        Primitive::Circle { .. } => unreachable!(),
    };
    Some(Some(id))
}

fn loop_add_remove<R: Rng>(rng: &mut R, seq: &mut ConstructionSequence) -> Option<Option<SegmentId>> {
    let pi = rng.random_range(0..seq.pairs.len());
    let loops = &mut seq.pairs[pi].sketch.loops;
    if loops.len() > 1 && rng.random_bool(0.5) {
        let k = rng.random_range(1..loops.len());
        loops.remove(k);
    } else {
        let donor = random_pair(rng, &RandomSpec { hole_prob: 1.0, ..RandomSpec::default() }, BoolOp::New);
        let hole = donor.sketch.loops.get(1)?.clone();
        loops.push(hole);
    }
    Some(None)
}

fn pair_add_remove<R: Rng>(rng: &mut R, seq: &mut ConstructionSequence) -> Option<Option<SegmentId>> {
    if seq.pairs.len() > 1 && rng.random_bool(0.5) {
        let k = rng.random_range(1..seq.pairs.len());
        seq.pairs.remove(k);
    } else {
        let op = if rng.random_bool(0.5) { BoolOp::Join } else { BoolOp::Cut };
        seq.pairs.push(random_pair(rng, &RandomSpec::default(), op));
    }
    Some(None)
}
