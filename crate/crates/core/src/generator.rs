//! Generation: fill masked segments with grammar-valid candidates.
//!
//! The built-in [`SurrogateGenerator`] walks the masked spans left to right
//! and resamples their numeric fields from a discretized Gaussian centred on
//! the masked values, occasionally swapping a primitive's kind or adding or
//! removing a hole loop. Every candidate is parsed and validated before it
//! is emitted, and tokens outside the masked spans are never touched. An
//! external model can stand in through the [`Generator`] trait.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::mask::MaskedSequence;
use crate::math::{round, sqrt};
use crate::quant::QuantizedParam as Q;
use crate::segment::{SegmentId, SegmentKind};
use crate::seq::{ConstructionSequence, Extrusion, Loop, Pair, Primitive, EXTRUSION_NUMERIC_FIELDS};
use crate::token::{emit_extrusion, emit_loop_body, emit_pair_body, emit_primitive, parse_tokens, tokenize, Token};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GenError {
    #[error("invalid generation policy: {0}")]
    InvalidPolicy(&'static str),
    #[error("external generator unavailable: {0}")]
    EndpointUnavailable(String),
    #[error("external generator protocol error: {0}")]
    ProtocolError(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenPolicy {
    /// Candidates per round.
    pub n: usize,
    /// Standard deviation of parameter resampling, in bins.
    pub jitter_sigma: f64,
    /// Probability that a candidate changes the kind of one masked
    /// primitive (or loop), spread evenly over the eligible sites.
    pub p_substitute: f64,
    /// Probability of adding or removing a hole loop inside a masked pair.
    pub p_structural: f64,
    /// Expected number of numeric fields resampled per candidate. One field
    /// is always dealt to each antithetic pair, distinct within a round
    /// while fields last; the remainder is spread evenly at random.
    pub fields_per_candidate: f64,
    pub seed: u64,
}

impl Default for GenPolicy {
    fn default() -> Self {
        GenPolicy { n: 8, jitter_sigma: 12.0, p_substitute: 0.15, p_structural: 0.10, fields_per_candidate: 1.0, seed: 0 }
    }
}

impl GenPolicy {
    pub fn check(&self) -> Result<(), GenError> {
        if self.n == 0 {
            return Err(GenError::InvalidPolicy("n must be at least 1"));
        }
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.p_substitute) || !prob(self.p_structural) {
            return Err(GenError::InvalidPolicy("probabilities must lie in [0, 1]"));
        }
        if !(self.jitter_sigma >= 0.0) || !(self.fields_per_candidate >= 1.0) {
            return Err(GenError::InvalidPolicy("jitter_sigma must be >= 0 and fields_per_candidate >= 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    Surrogate,
    External,
    /// Surrogate candidate standing in for a missing or rejected external one.
    Backfill,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub seq: ConstructionSequence,
    pub origin: Origin,
    /// Segments this candidate filled.
    pub filled: Vec<SegmentId>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
    /// Set when the external endpoint could not be reached at all.
    pub fallback: bool,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn sequences(&self) -> impl Iterator<Item = &ConstructionSequence> {
        self.candidates.iter().map(|c| &c.seq)
    }
}

pub trait Generator {
    fn infill(&mut self, masked: &MaskedSequence, policy: &GenPolicy) -> Result<CandidateSet, GenError>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SurrogateGenerator;

impl Generator for SurrogateGenerator {
    fn infill(&mut self, masked: &MaskedSequence, policy: &GenPolicy) -> Result<CandidateSet, GenError> {
        infill(masked, policy)
    }
}

/// `n` surrogate candidates. Deterministic in `policy.seed`; candidate `i`
/// draws from its own ChaCha stream.
pub fn infill(masked: &MaskedSequence, policy: &GenPolicy) -> Result<CandidateSet, GenError> {
    policy.check()?;
    let candidates = (0..policy.n)
        .map(|i| Candidate {
            seq: sample_candidate(masked, policy, i as u64),
            origin: Origin::Surrogate,
            filled: masked.masked_ids(),
        })
        .collect();
    Ok(CandidateSet { candidates, fallback: false })
}

const MAX_ATTEMPTS: usize = 64;

/// One surrogate candidate. Candidates come in antithetic pairs: `2k` and
/// `2k + 1` share stream `k`, and the odd one mirrors every Gaussian offset
/// and every sampled arc direction. Falls back to the base sequence if no
/// valid, changed fill turns up within the attempt budget.
pub fn sample_candidate(masked: &MaskedSequence, policy: &GenPolicy, index: u64) -> ConstructionSequence {
    if masked.is_empty() {
        return masked.unmask();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    rng.set_stream(index / 2);
    let mirror = index % 2 == 1;
    let base = masked.base();
    let originals = masked.original_fragments();
    // Each pair is dealt one field: spans go round-robin from a per-round
    // offset, then fields round-robin within the span. Any budget beyond
    // that field is split evenly over spans, then over each span's fields.
    let counts: Vec<usize> = masked.masked().iter().map(|s| numeric_fields(base, &s.id)).collect();
    let live: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] > 0).collect();
    let dealt = (!live.is_empty()).then(|| {
        let mut deal = ChaCha8Rng::seed_from_u64(policy.seed);
        deal.set_stream(u64::MAX);
        let (o1, o2) = (deal.random_range(0..live.len()), deal.random::<u32>() as usize);
        let k = (index / 2) as usize;
        let span = live[(o1 + k) % live.len()];
        let field = (o2 + k / live.len()) % counts[span];
        counts[..span].iter().sum::<usize>() + field
    });
    let extra = (policy.fields_per_candidate - 1.0).max(0.0);
    let spans = counts.len() as f64;
    let rates: Vec<f64> = counts.iter().map(|&c| (extra / (spans * c.max(1) as f64)).min(1.0)).collect();
    let sites: usize = masked.masked().iter().map(|s| substitution_sites(base, &s.id)).sum();
    let sub_rate = (policy.p_substitute / sites.max(1) as f64).min(1.0);
    for _ in 0..MAX_ATTEMPTS {
        let mut countdown = dealt;
        let fragments: Vec<Vec<Token>> = masked
            .masked()
            .iter()
            .zip(&rates)
            .map(|(s, &rate)| sample_fragment(base, &s.id, [rate, sub_rate], &mut countdown, mirror, policy, &mut rng))
            .collect();
        if fragments.iter().zip(&originals).all(|(f, o)| f.as_slice() == *o) {
            continue;
        }
        if let Ok(seq) = masked.fill(&fragments) {
            return seq;
        }
    }
    masked.unmask()
}

/// Parses an externally produced candidate and checks it against the masked
/// stream. Returns `None` for anything unparsable, invalid, or touching an
/// unmasked token.
pub fn accept_external(masked: &MaskedSequence, line: &str) -> Option<ConstructionSequence> {
    let tokens = tokenize(line).ok()?;
    let seq = parse_tokens(&tokens).ok()?;
    masked.match_candidate(&tokens)?;
    Some(seq)
}

/// Completes a set of accepted external candidates to `policy.n` members
/// with surrogate samples.
pub fn backfill(
    masked: &MaskedSequence,
    policy: &GenPolicy,
    external: Vec<ConstructionSequence>,
    unreachable: bool,
) -> CandidateSet {
    let filled = masked.masked_ids();
    let mut candidates: Vec<Candidate> = external
        .into_iter()
        .take(policy.n)
        .map(|seq| Candidate { seq, origin: Origin::External, filled: filled.clone() })
        .collect();
    let mut index = candidates.len() as u64;
    while candidates.len() < policy.n {
        candidates.push(Candidate {
            seq: sample_candidate(masked, policy, index),
            origin: Origin::Backfill,
            filled: filled.clone(),
        });
        index += 1;
    }
    CandidateSet { candidates, fallback: unreachable }
}

/// `round(center + sigma * z)` clamped to `[lo, hi]`.
pub fn discretized_gaussian<R: Rng + ?Sized>(rng: &mut R, center: u8, sigma: f64, lo: u8, hi: u8) -> u8 {
    let z: f64 = rng.sample(StandardNormal);
    let v = round(f64::from(center) + sigma * z);
    v.clamp(f64::from(lo), f64::from(hi)) as u8
}

struct Sampler<'a, R: Rng> {
    policy: &'a GenPolicy,
    rng: &'a mut R,
    /// Fields left to visit before the dealt one.
    countdown: &'a mut Option<usize>,
    /// Per-field resampling probability.
    rate: f64,
    /// Per-site kind-change probability.
    sub_rate: f64,
    mirror: bool,
}

impl<R: Rng> Sampler<'_, R> {
    fn field(&mut self, q: Q, lo: u8, hi: u8) -> Q {
        let dealt = match self.countdown {
            Some(0) => {
                *self.countdown = None;
                true
            }
            Some(k) => {
                *k -= 1;
                false
            }
            None => false,
        };
        if dealt || self.rng.random_bool(self.rate) {
            let sigma = if self.mirror { -self.policy.jitter_sigma } else { self.policy.jitter_sigma };
            Q::new(discretized_gaussian(self.rng, q.bin(), sigma, lo, hi))
        } else {
            q
        }
    }

    fn point(&mut self, p: [Q; 2]) -> [Q; 2] {
        [self.field(p[0], 0, 255), self.field(p[1], 0, 255)]
    }

    fn primitive(&mut self, p: &Primitive) -> Primitive {
        if !p.is_circle() && self.rng.random_bool(self.sub_rate) {
            return self.substitute(p);
        }
        match p {
            Primitive::Line { end } => Primitive::Line { end: self.point(*end) },
            Primitive::Arc { end, sweep, ccw } => {
                Primitive::Arc { end: self.point(*end), sweep: self.field(*sweep, 1, 254), ccw: *ccw }
            }
            Primitive::Circle { center, radius } => {
                Primitive::Circle { center: self.point(*center), radius: self.field(*radius, 1, 255) }
            }
        }
    }

    fn substitute(&mut self, p: &Primitive) -> Primitive {
        match p {
            Primitive::Line { end } => Primitive::Arc {
                end: *end,
                sweep: Q::new(self.rng.random_range(16..=128)),
                ccw: self.rng.random_bool(0.5) != self.mirror,
            },
            Primitive::Arc { end, sweep, ccw } => {
                if self.rng.random_bool(0.5) {
                    Primitive::Line { end: *end }
                } else {
                    Primitive::Arc { end: *end, sweep: *sweep, ccw: !*ccw }
                }
            }
            Primitive::Circle { .. } => p.clone(),
        }
    }

    fn looped(&mut self, lp: &Loop) -> Loop {
        if self.rng.random_bool(self.sub_rate) {
            return swap_loop_kind(lp);
        }
        Loop::new(lp.primitives.iter().map(|p| self.primitive(p)).collect())
    }

    fn extrusion(&mut self, e: &Extrusion) -> Extrusion {
        let mut out = e.clone();
        for i in 0..EXTRUSION_NUMERIC_FIELDS {
            let lo = if i == 6 { 1 } else { 0 };
            let v = self.field(e.numeric()[i], lo, 255);
            *out.numeric_mut(i) = v;
        }
        out
    }

    fn pair(&mut self, pair: &Pair) -> Pair {
        let mut loops: Vec<Loop> = pair.sketch.loops.iter().map(|l| self.looped(l)).collect();
        if self.rng.random_bool(self.policy.p_structural) {
            if loops.len() > 1 && self.rng.random_bool(0.5) {
                let k = self.rng.random_range(1..loops.len());
                loops.remove(k);
            } else if let Some(hole) = hole_for(&loops[0]) {
                loops.push(hole);
            }
        }
        let mut out = pair.clone();
        out.sketch.loops = loops;
        out.extrusion = self.extrusion(&pair.extrusion);
        out
    }
}

/// Circle to axis-aligned square of the same half-width, or chain to the
/// circle through its vertex centroid.
fn swap_loop_kind(lp: &Loop) -> Loop {
    if let [Primitive::Circle { center, radius }] = lp.primitives.as_slice() {
        let (cx, cy, r) = (i32::from(center[0].bin()), i32::from(center[1].bin()), i32::from(radius.bin()));
        let b = |v: i32| v.clamp(0, 255) as u8;
        return Loop::new(alloc::vec![
            Primitive::line(b(cx + r), b(cy - r)),
            Primitive::line(b(cx + r), b(cy + r)),
            Primitive::line(b(cx - r), b(cy + r)),
            Primitive::line(b(cx - r), b(cy - r)),
        ]);
    }
    let (cx, cy, r) = centroid_radius(lp);
    Loop::new(alloc::vec![Primitive::circle(cx, cy, r.max(1))])
}

fn centroid_radius(lp: &Loop) -> (u8, u8, u8) {
    let pts: Vec<[f64; 2]> = lp
        .primitives
        .iter()
        .filter_map(Primitive::end_bins)
        .map(|e| [f64::from(e[0].bin()), f64::from(e[1].bin())])
        .collect();
    if pts.is_empty() {
        if let [Primitive::Circle { center, radius }] = lp.primitives.as_slice() {
            return (center[0].bin(), center[1].bin(), radius.bin());
        }
        return (128, 128, 1);
    }
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / n;
    let r = pts.iter().map(|p| { let (dx, dy) = (p[0] - cx, p[1] - cy); sqrt(dx * dx + dy * dy) }).sum::<f64>() / n;
    (round(cx) as u8, round(cy) as u8, round(r).clamp(1.0, 255.0) as u8)
}

/// A small circular hole centred in the outer loop.
fn hole_for(outer: &Loop) -> Option<Loop> {
    let (cx, cy, r) = centroid_radius(outer);
    let hr = r / 3;
    (hr >= 2).then(|| Loop::new(alloc::vec![Primitive::circle(cx, cy, hr)]))
}

fn numeric_fields(base: &ConstructionSequence, id: &SegmentId) -> usize {
    let pair = &base.pairs[id.pair];
    let loop_fields = |l: &Loop| l.primitives.iter().map(Primitive::field_count).sum::<usize>();
    match id.kind {
        SegmentKind::Primitive { loop_idx, prim } => pair.sketch.loops[loop_idx].primitives[prim].field_count(),
        SegmentKind::Loop { loop_idx } => loop_fields(&pair.sketch.loops[loop_idx]),
        SegmentKind::Extrusion => EXTRUSION_NUMERIC_FIELDS,
        SegmentKind::Pair => pair.sketch.loops.iter().map(loop_fields).sum::<usize>() + EXTRUSION_NUMERIC_FIELDS,
    }
}

/// Places where a kind change can happen: chain primitives, plus whole
/// loops when the span covers them.
fn substitution_sites(base: &ConstructionSequence, id: &SegmentId) -> usize {
    let pair = &base.pairs[id.pair];
    let chain = |l: &Loop| l.primitives.iter().filter(|p| !p.is_circle()).count();
    match id.kind {
        SegmentKind::Primitive { loop_idx, prim } => {
            usize::from(!pair.sketch.loops[loop_idx].primitives[prim].is_circle())
        }
        SegmentKind::Loop { loop_idx } => 1 + chain(&pair.sketch.loops[loop_idx]),
        SegmentKind::Extrusion => 0,
        SegmentKind::Pair => pair.sketch.loops.iter().map(|l| 1 + chain(l)).sum(),
    }
}

fn sample_fragment<R: Rng>(
    base: &ConstructionSequence,
    id: &SegmentId,
    [rate, sub_rate]: [f64; 2],
    countdown: &mut Option<usize>,
    mirror: bool,
    policy: &GenPolicy,
    rng: &mut R,
) -> Vec<Token> {
    let mut s = Sampler { policy, rng, countdown, rate, sub_rate, mirror };
    let pair = &base.pairs[id.pair];
    let mut out = Vec::new();
    match id.kind {
        SegmentKind::Primitive { loop_idx, prim } => {
            emit_primitive(&s.primitive(&pair.sketch.loops[loop_idx].primitives[prim]), &mut out)
        }
        SegmentKind::Loop { loop_idx } => emit_loop_body(&s.looped(&pair.sketch.loops[loop_idx]), &mut out),
        SegmentKind::Extrusion => emit_extrusion(&s.extrusion(&pair.extrusion), &mut out),
        SegmentKind::Pair => emit_pair_body(&s.pair(pair), &mut out),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::apply_mask;
    use crate::segment::{segment_ids, Granularity};
    use crate::token::parse_sequence;
    use crate::validate::validate;

    const TWO: &str = "SOL L 200 60 L 200 200 L 60 200 L 60 60 SOL C 128 128 20 E 0 0 0 128 128 100 255 100 0 0 0 SEP \
                       SOL C 128 128 30 E 0 0 0 128 128 128 255 120 0 1 0 SEP EOS";

    #[test]
    fn zero_masks_give_copies() {
        let seq = parse_sequence(TWO).unwrap();
        let m = apply_mask(&seq, &[]).unwrap();
        let set = infill(&m, &GenPolicy::default()).unwrap();
        assert_eq!(set.len(), 8);
        assert!(set.sequences().all(|s| *s == seq));
    }

    #[test]
    fn candidates_are_valid_and_preserve_unmasked() {
        let seq = parse_sequence(TWO).unwrap();
        for g in [Granularity::Primitive, Granularity::Loop, Granularity::Pair] {
            let ids = segment_ids(&seq, g);
            for (i, id) in ids.iter().enumerate() {
                let m = apply_mask(&seq, [id]).unwrap();
                let policy = GenPolicy { seed: i as u64, p_structural: 0.5, p_substitute: 0.5, ..GenPolicy::default() };
                for c in infill(&m, &policy).unwrap().candidates {
                    assert!(validate(&c.seq).is_empty());
                    let toks = crate::token::to_tokens(&c.seq);
                    assert!(m.match_candidate(&toks).is_some(), "{g:?} {id}");
                }
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let seq = parse_sequence(TWO).unwrap();
        let m = apply_mask(&seq, &[SegmentId::extrusion(1), SegmentId::primitive(0, 0, 2)]).unwrap();
        let p = GenPolicy { seed: 42, ..GenPolicy::default() };
        assert_eq!(infill(&m, &p).unwrap(), infill(&m, &p).unwrap());
        let q = GenPolicy { seed: 43, ..GenPolicy::default() };
        assert_ne!(infill(&m, &p).unwrap(), infill(&m, &q).unwrap());
    }

    #[test]
    fn discretized_gaussian_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 10_000;
        let samples: Vec<u8> = (0..n).map(|_| discretized_gaussian(&mut rng, 100, 12.0, 0, 255)).collect();
        let mean = samples.iter().map(|&s| f64::from(s)).sum::<f64>() / n as f64;
        assert!((mean - 100.0).abs() < 1.0, "{mean}");
        let inside = samples.iter().filter(|&&s| (64..=136).contains(&s)).count();
        assert!(inside as f64 >= 0.99 * n as f64);
    }

    #[test]
    fn policy_checks() {
        assert!(GenPolicy { n: 0, ..GenPolicy::default() }.check().is_err());
        assert!(GenPolicy { p_substitute: 1.5, ..GenPolicy::default() }.check().is_err());
    }

    #[test]
    fn loop_kind_swap_round_trip_shapes() {
        let c = Loop::new(alloc::vec![Primitive::circle(128, 128, 30)]);
        let sq = swap_loop_kind(&c);
        assert_eq!(sq.primitives.len(), 4);
        let back = swap_loop_kind(&sq);
        assert!(back.is_circle());
    }
}
