//! Invariant checks for construction sequences. Violations are data: every
//! failing invariant is reported with its location.

use alloc::vec::Vec;
use core::fmt;

use crate::math::sin;
use crate::quant::Channel;
use crate::seq::{BoolOp, ConstructionSequence, Loop, Primitive};

/// Where in a sequence a violation sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Location {
    pub pair: usize,
    pub loop_idx: Option<usize>,
    pub prim: Option<usize>,
}

impl Location {
    fn pair(pair: usize) -> Self {
        Location { pair, loop_idx: None, prim: None }
    }

    fn loop_at(pair: usize, loop_idx: usize) -> Self {
        Location { pair, loop_idx: Some(loop_idx), prim: None }
    }

    fn prim(pair: usize, loop_idx: usize, prim: usize) -> Self {
        Location { pair, loop_idx: Some(loop_idx), prim: Some(prim) }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pair {}", self.pair)?;
        if let Some(l) = self.loop_idx {
            write!(f, " loop {l}")?;
        }
        if let Some(p) = self.prim {
            write!(f, " primitive {p}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Violation {
    EmptySequence,
    FirstOpNotNew,
    EmptySketch { at: Location },
    EmptyLoop { at: Location },
    /// A bin is outside the valid sub-range of its field.
    Range { at: Location, field: &'static str },
    /// A circle shares its loop with other primitives.
    MixedCircleLoop { at: Location },
    /// A line/arc chain does not bound a region.
    Closure { at: Location, reason: &'static str },
    ZeroExtent { at: Location },
}

pub fn validate(seq: &ConstructionSequence) -> Vec<Violation> {
    let mut out = Vec::new();
    if seq.pairs.is_empty() {
        out.push(Violation::EmptySequence);
        return out;
    }
    if seq.pairs[0].extrusion.bool_op != BoolOp::New {
        out.push(Violation::FirstOpNotNew);
    }
    for (pi, pair) in seq.pairs.iter().enumerate() {
        if pair.sketch.loops.is_empty() {
            out.push(Violation::EmptySketch { at: Location::pair(pi) });
        }
        for (li, lp) in pair.sketch.loops.iter().enumerate() {
            check_loop(pi, li, lp, &mut out);
        }
        let e = &pair.extrusion;
        if e.scale.bin() == 0 {
            out.push(Violation::Range { at: Location::pair(pi), field: "scale" });
        }
        let (lo, hi) = e.interval();
        if hi - lo <= 0.0 {
            out.push(Violation::ZeroExtent { at: Location::pair(pi) });
        }
    }
    out
}

fn check_loop(pi: usize, li: usize, lp: &Loop, out: &mut Vec<Violation>) {
    if lp.primitives.is_empty() {
        out.push(Violation::EmptyLoop { at: Location::loop_at(pi, li) });
        return;
    }
    let mut has_circle = false;
    for (k, p) in lp.primitives.iter().enumerate() {
        match p {
            Primitive::Circle { radius, .. } => {
                has_circle = true;
                if radius.bin() == 0 {
                    out.push(Violation::Range { at: Location::prim(pi, li, k), field: "radius" });
                }
            }
            Primitive::Arc { sweep, .. } => {
                // A full turn cannot join two distinct points.
                if sweep.bin() == 0 || sweep.bin() == 255 {
                    out.push(Violation::Range { at: Location::prim(pi, li, k), field: "sweep" });
                }
            }
            Primitive::Line { .. } => {}
        }
    }
    if has_circle {
        if lp.primitives.len() > 1 {
            out.push(Violation::MixedCircleLoop { at: Location::loop_at(pi, li) });
        }
        return;
    }
    if let Some(reason) = closure_defect(lp) {
        out.push(Violation::Closure { at: Location::loop_at(pi, li), reason });
    }
}

/// Checks that a line/arc chain bounds a region: no zero-length edge and a
/// non-zero enclosed area.
pub(crate) fn closure_defect(lp: &Loop) -> Option<&'static str> {
    let ends: Vec<[i64; 2]> = lp
        .primitives
        .iter()
        .filter_map(Primitive::end_bins)
        .map(|e| [i64::from(e[0].bin()), i64::from(e[1].bin())])
        .collect();
    if ends.len() != lp.primitives.len() {
        return Some("circle inside a chain");
    }
    let n = ends.len();
    let mut twice_area = 0i64;
    let mut arc_area = 0.0f64;
    for (k, p) in lp.primitives.iter().enumerate() {
        let s = ends[(k + n - 1) % n];
        let e = ends[k];
        if s == e {
            return Some("zero-length edge");
        }
        twice_area += s[0] * e[1] - e[0] * s[1];
        if let Primitive::Arc { sweep, ccw, .. } = p {
            // circular segment between chord and arc, in bin units
            let theta = sweep.dequantize(Channel::Angle);
            let chord2 = ((e[0] - s[0]).pow(2) + (e[1] - s[1]).pow(2)) as f64;
            let half_sin = sin(theta / 2.0);
            if half_sin.abs() < 1e-12 {
                return Some("degenerate arc");
            }
            let r2 = chord2 / (4.0 * half_sin * half_sin);
            let seg = 0.5 * r2 * (theta - sin(theta));
            arc_area += if *ccw { seg } else { -seg };
        }
    }
    let area = twice_area as f64 / 2.0 + arc_area;
    if area.abs() < 1e-9 {
        return Some("loop encloses no area");
    }
    None
}
