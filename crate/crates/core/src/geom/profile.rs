//! Signed distance to 2D loops and sketch profiles.
//!
//! Magnitude is the exact Euclidean distance to the loop boundary (lines,
//! circular arcs, circles). The sign comes from the non-zero winding rule,
//! where an arc contributes the angle of its chord plus one full turn for
//! points inside the circular segment it cuts off.

use alloc::vec::Vec;

use super::vec::{cross2, dot2, norm2, sub2, V2};
use super::GeomError;
use crate::math::{atan2, rem_euclid, round, sin, tan, TAU};
#[cfg(test)]
use crate::math::cos;
use crate::quant::Channel;
use crate::seq::{point2, Loop, Primitive, Sketch};

/// Boundary points closer than this fraction of an edge to its start vertex
/// belong to the primitive that encodes that vertex (the previous one).
pub(crate) const OWNER_SPLIT: f64 = 0.25;

#[derive(Clone, Debug)]
pub(crate) enum Edge {
    Seg { a: V2, b: V2 },
    Arc { a: V2, b: V2, center: V2, radius: f64, start: f64, sweep: f64, ccw: bool },
}

#[derive(Clone, Debug)]
pub(crate) enum LoopGeom {
    Circle { center: V2, radius: f64 },
    Chain(Vec<Edge>),
}

/// Closest-boundary information for one loop.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LoopHit {
    pub(crate) value: f64,
    /// Primitive holding the nearest boundary point.
    pub(crate) prim: usize,
    /// Position of that point along the primitive, `[0, 1]`.
    pub(crate) t: f64,
}

impl LoopGeom {
    pub(crate) fn new(lp: &Loop) -> Result<Self, GeomError> {
        if lp.primitives.is_empty() {
            return Err(GeomError::DegenerateLoop);
        }
        if let [Primitive::Circle { center, radius }] = lp.primitives.as_slice() {
            return Ok(LoopGeom::Circle { center: point2(*center), radius: radius.dequantize(Channel::Distance) });
        }
        let mut edges = Vec::with_capacity(lp.primitives.len());
        let mut start = lp.start_point().ok_or(GeomError::DegenerateLoop)?;
        let mut total = 0.0;
        for p in &lp.primitives {
            let end = p.end_point().ok_or(GeomError::DegenerateLoop)?;
            let chord = norm2(sub2(end, start));
            total += chord;
            let edge = match p {
                Primitive::Line { .. } => Edge::Seg { a: start, b: end },
                Primitive::Arc { sweep, ccw, .. } => {
                    let theta = sweep.dequantize(Channel::Angle);
                    arc_edge(start, end, theta, *ccw).unwrap_or(Edge::Seg { a: start, b: end })
                }
                Primitive::Circle { .. } => return Err(GeomError::DegenerateLoop),
            };
            edges.push(edge);
            start = end;
        }
        if total <= 0.0 {
            return Err(GeomError::DegenerateLoop);
        }
        Ok(LoopGeom::Chain(edges))
    }

    pub(crate) fn eval(&self, p: V2) -> LoopHit {
        match self {
            LoopGeom::Circle { center, radius } => {
                LoopHit { value: norm2(sub2(p, *center)) - radius, prim: 0, t: 0.0 }
            }
            LoopGeom::Chain(edges) => {
                let mut best = f64::INFINITY;
                let mut prim = 0;
                let mut t_best = 0.0;
                let mut winding = 0.0;
                for (k, e) in edges.iter().enumerate() {
                    let (d, t) = e.distance(p);
                    if d < best {
                        best = d;
                        prim = k;
                        t_best = t;
                    }
                    winding += e.winding_angle(p);
                }
                let turns = round(winding / TAU);
                let value = if turns != 0.0 { -best } else { best };
                LoopHit { value, prim, t: t_best }
            }
        }
    }

    /// Primitive that owns a boundary hit under the start-vertex rule.
    pub(crate) fn owner(&self, hit: &LoopHit) -> usize {
        match self {
            LoopGeom::Circle { .. } => 0,
            LoopGeom::Chain(edges) => {
                if hit.t < OWNER_SPLIT {
                    (hit.prim + edges.len() - 1) % edges.len()
                } else {
                    hit.prim
                }
            }
        }
    }
}

fn arc_edge(a: V2, b: V2, theta: f64, ccw: bool) -> Option<Edge> {
    let d = sub2(b, a);
    let c = norm2(d);
    let half_sin = sin(theta / 2.0);
    if c <= 0.0 || half_sin.abs() < 1e-12 {
        return None;
    }
    let radius = c / (2.0 * half_sin);
    let h = (c / 2.0) / tan(theta / 2.0);
    let n = [-d[1] / c, d[0] / c];
    let m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let s = if ccw { h } else { -h };
    let center = [m[0] + n[0] * s, m[1] + n[1] * s];
    let start = atan2(a[1] - center[1], a[0] - center[0]);
    Some(Edge::Arc { a, b, center, radius, start, sweep: theta, ccw })
}

impl Edge {
    /// Distance to the edge and the parameter of the closest point.
    fn distance(&self, p: V2) -> (f64, f64) {
        match *self {
            Edge::Seg { a, b } => {
                let ab = sub2(b, a);
                let len2 = dot2(ab, ab);
                let t = if len2 > 0.0 { (dot2(sub2(p, a), ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
                let q = [a[0] + ab[0] * t, a[1] + ab[1] * t];
                (norm2(sub2(p, q)), t)
            }
            Edge::Arc { a, b, center, radius, start, sweep, ccw } => {
                let q = sub2(p, center);
                let phi = atan2(q[1], q[0]);
                let delta = if ccw { rem_euclid(phi - start, TAU) } else { rem_euclid(start - phi, TAU) };
                if delta <= sweep {
                    ((norm2(q) - radius).abs(), delta / sweep)
                } else {
                    let da = norm2(sub2(p, a));
                    let db = norm2(sub2(p, b));
                    if da <= db {
                        (da, 0.0)
                    } else {
                        (db, 1.0)
                    }
                }
            }
        }
    }

    /// Signed angle the edge subtends as seen from `p`.
    fn winding_angle(&self, p: V2) -> f64 {
        match *self {
            Edge::Seg { a, b } => chord_angle(a, b, p),
            Edge::Arc { a, b, center, radius, ccw, .. } => {
                let mut angle = chord_angle(a, b, p);
                let q = sub2(p, center);
                if dot2(q, q) < radius * radius {
                    // ccw arcs lie right of their chord, cw arcs left
                    let side = cross2(sub2(b, a), sub2(p, a));
                    if (ccw && side < 0.0) || (!ccw && side > 0.0) {
                        angle += if ccw { TAU } else { -TAU };
                    }
                }
                angle
            }
        }
    }
}

fn chord_angle(a: V2, b: V2, p: V2) -> f64 {
    let u = sub2(a, p);
    let v = sub2(b, p);
    atan2(cross2(u, v), dot2(u, v))
}

/// Closest-boundary information for a whole profile.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ProfileHit {
    pub(crate) value: f64,
    pub(crate) loop_idx: usize,
    pub(crate) hit: LoopHit,
}

#[derive(Clone, Debug)]
pub(crate) struct SketchGeom {
    pub(crate) loops: Vec<LoopGeom>,
}

impl SketchGeom {
    pub(crate) fn new(sketch: &Sketch) -> Result<Self, GeomError> {
        if sketch.loops.is_empty() {
            return Err(GeomError::DegenerateLoop);
        }
        let loops = sketch.loops.iter().map(LoopGeom::new).collect::<Result<Vec<_>, _>>()?;
        Ok(SketchGeom { loops })
    }

    /// Outer loop minus every hole: `f = max(f, -hole)`, first loop wins ties.
    pub(crate) fn eval(&self, p: V2) -> ProfileHit {
        let first = self.loops[0].eval(p);
        let mut best = ProfileHit { value: first.value, loop_idx: 0, hit: first };
        for (li, lp) in self.loops.iter().enumerate().skip(1) {
            let h = lp.eval(p);
            if -h.value > best.value {
                best = ProfileHit { value: -h.value, loop_idx: li, hit: h };
            }
        }
        best
    }

    pub(crate) fn owner(&self, hit: &ProfileHit) -> usize {
        self.loops[hit.loop_idx].owner(&hit.hit)
    }
}

/// Signed distance from `p` to a single loop. Negative inside.
pub fn loop_sdf(lp: &Loop, p: [f64; 2]) -> Result<f64, GeomError> {
    Ok(LoopGeom::new(lp)?.eval(p).value)
}

/// Signed distance to a sketch profile: outer loop with holes subtracted.
pub fn profile_sdf(sketch: &Sketch, p: [f64; 2]) -> Result<f64, GeomError> {
    Ok(SketchGeom::new(sketch)?.eval(p).value)
}

// Used by tests that need arc geometry in real units.
#[cfg(test)]
pub(crate) fn arc_point(a: V2, b: V2, theta: f64, ccw: bool, t: f64) -> V2 {
    match arc_edge(a, b, theta, ccw) {
        Some(Edge::Arc { center, radius, start, sweep, ccw, .. }) => {
            let ang = if ccw { start + t * sweep } else { start - t * sweep };
            [center[0] + radius * cos(ang), center[1] + radius * sin(ang)]
        }
        _ => [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t],
    }
}
