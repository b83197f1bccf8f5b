//! Random valid construction sequences, for property tests and synthetic
//! benchmarks.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::geom::{render, GridSpec};
use crate::math::{cos, round, sin, TAU};
use crate::quant::QuantizedParam as Q;
use crate::seq::{BoolOp, ConstructionSequence, ExtentType, Extrusion, Loop, Pair, Primitive, Sketch};
use crate::validate::validate;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSpec {
    pub min_pairs: usize,
    pub max_pairs: usize,
    /// Probability that a chain profile gets one arc edge.
    pub arc_prob: f64,
    pub hole_prob: f64,
    /// Probability of a tilted sketch plane instead of the identity frame.
    pub tilt_prob: f64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec { min_pairs: 1, max_pairs: 4, arc_prob: 0.3, hole_prob: 0.25, tilt_prob: 0.15 }
    }
}

fn b(v: f64) -> u8 {
    round(v).clamp(0.0, 255.0) as u8
}

fn rectangle(cx: i32, cy: i32, w: i32, h: i32) -> Vec<Primitive> {
    let c = |v: i32| v.clamp(0, 255) as u8;
    vec![
        Primitive::line(c(cx + w), c(cy - h)),
        Primitive::line(c(cx + w), c(cy + h)),
        Primitive::line(c(cx - w), c(cy + h)),
        Primitive::line(c(cx - w), c(cy - h)),
    ]
}

/// The outer loop of a random profile and a characteristic half-size.
pub fn random_outer_loop<R: Rng + ?Sized>(rng: &mut R, spec: &RandomSpec) -> (Loop, i32) {
    let cx = rng.random_range(100..=156);
    let cy = rng.random_range(100..=156);
    let shape = rng.random_range(0..3);
    let (mut prims, size) = match shape {
        0 => {
            let r = rng.random_range(24..=64);
            (vec![Primitive::circle(cx as u8, cy as u8, r as u8)], r)
        }
        1 => {
            let (w, h) = (rng.random_range(24..=64), rng.random_range(24..=64));
            (rectangle(cx, cy, w, h), w.min(h))
        }
        _ => {
            let n = rng.random_range(3..=6);
            let r = f64::from(rng.random_range(32..=64));
            let phase = rng.random::<f64>() * TAU;
            let prims = (0..n)
                .map(|k| {
                    let a = phase + TAU * f64::from(k) / f64::from(n);
                    Primitive::line(b(f64::from(cx) + r * cos(a)), b(f64::from(cy) + r * sin(a)))
                })
                .collect();
            (prims, (r / 2.0) as i32)
        }
    };
    if prims.len() > 1 && rng.random_bool(spec.arc_prob) {
        let k = rng.random_range(0..prims.len());
        let end = prims[k].end_bins().expect("chain primitive");
        prims[k] = Primitive::Arc { end, sweep: Q::new(rng.random_range(24..=112)), ccw: true };
    }
    (Loop::new(prims), size)
}

fn random_extrusion<R: Rng + ?Sized>(rng: &mut R, spec: &RandomSpec, op: BoolOp) -> Extrusion {
    let extent = match rng.random_range(0..10) {
        0..=4 => ExtentType::OneSided,
        5..=7 => ExtentType::Symmetric,
        _ => ExtentType::TwoSided,
    };
    let dist_neg = if extent == ExtentType::TwoSided { rng.random_range(20..=80) } else { 0 };
    let origin = [rng.random_range(108..=148), rng.random_range(108..=148), rng.random_range(64..=176)];
    let mut e = Extrusion::simple(origin, rng.random_range(40..=128), dist_neg, op, extent);
    if rng.random_bool(spec.tilt_prob) {
        // a quarter turn about y or x puts the sketch plane upright
        e.orientation[rng.random_range(1..=2)] = Q::new(64);
    }
    e
}

pub fn random_pair<R: Rng + ?Sized>(rng: &mut R, spec: &RandomSpec, op: BoolOp) -> Pair {
    let (outer, size) = random_outer_loop(rng, spec);
    let mut loops = vec![outer];
    if size >= 24 && rng.random_bool(spec.hole_prob) {
        let [cx, cy] = centroid(&loops[0]);
        loops.push(Loop::new(vec![Primitive::circle(cx, cy, (size / 3) as u8)]));
    }
    Pair::new(Sketch::new(loops), random_extrusion(rng, spec, op))
}

fn centroid(lp: &Loop) -> [u8; 2] {
    if let [Primitive::Circle { center, .. }] = lp.primitives.as_slice() {
        return [center[0].bin(), center[1].bin()];
    }
    let pts: Vec<[Q; 2]> = lp.primitives.iter().filter_map(Primitive::end_bins).collect();
    let n = pts.len() as f64;
    let mean = |i: usize| b(pts.iter().map(|p| f64::from(p[i].bin())).sum::<f64>() / n);
    [mean(0), mean(1)]
}

fn random_op<R: Rng + ?Sized>(rng: &mut R) -> BoolOp {
    match rng.random_range(0..10) {
        0..=5 => BoolOp::Join,
        6..=8 => BoolOp::Cut,
        _ => BoolOp::Intersect,
    }
}

/// A sequence that passes [`validate`]. Rendering is not checked.
pub fn random_sequence<R: Rng + ?Sized>(rng: &mut R, spec: &RandomSpec) -> ConstructionSequence {
    loop {
        let n = rng.random_range(spec.min_pairs..=spec.max_pairs.max(spec.min_pairs));
        let pairs = (0..n)
            .map(|i| {
                let op = if i == 0 { BoolOp::New } else { random_op(rng) };
                random_pair(rng, spec, op)
            })
            .collect();
        let seq = ConstructionSequence::new(pairs);
        if validate(&seq).is_empty() {
            return seq;
        }
    }
}

/// A valid sequence whose rendering on `grid` is a non-empty solid that
/// fills at least `min_fill` of the domain.
pub fn random_renderable<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &RandomSpec,
    grid: &GridSpec,
    min_fill: f64,
) -> ConstructionSequence {
    loop {
        let seq = random_sequence(rng, spec);
        if render(&seq, grid).is_ok_and(|g| g.occupancy_fraction() >= min_fill) {
            return seq;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sequences_validate_and_mostly_render() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec = RandomSpec::default();
        let grid = GridSpec::new(16, 0.2).unwrap();
        let mut ok = 0;
        for _ in 0..100 {
            let s = random_sequence(&mut rng, &spec);
            assert!(validate(&s).is_empty());
            ok += usize::from(render(&s, &grid).is_ok());
        }
        assert!(ok > 80, "{ok}");
    }
}
