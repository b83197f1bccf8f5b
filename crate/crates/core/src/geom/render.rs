//! Sequential Boolean fold over sketch/extrusion pairs.
//!
//! Composition runs on unclamped fields; the truncation to `[-tau, tau]`
//! happens once on output. `New` bodies are unioned into the running scene.

use alloc::vec::Vec;

use super::body::{BodyGeom, BodyHit};
use super::csg::{sdf_difference, sdf_intersection, sdf_union};
use super::grid::{clamp_store, GridSpec, TsdfGrid};
use super::GeomError;
use crate::segment::{Granularity, SegmentId};
use crate::seq::{BoolOp, ConstructionSequence, Pair};

/// Per-voxel owning segment: the segment whose field decided the composed
/// value at that voxel.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributionGrid {
    spec: GridSpec,
    granularity: Granularity,
    owners: Vec<Option<SegmentId>>,
}

impl AttributionGrid {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn owner(&self, idx: usize) -> Option<SegmentId> {
        self.owners[idx]
    }

    pub fn owners(&self) -> &[Option<SegmentId>] {
        &self.owners
    }
}

fn build_bodies(seq: &ConstructionSequence) -> Result<Vec<BodyGeom>, GeomError> {
    seq.pairs.iter().map(|p| BodyGeom::new(&p.sketch, &p.extrusion)).collect()
}

fn owner_of(pair: usize, body: &BodyGeom, hit: &BodyHit, g: Granularity) -> SegmentId {
    match g {
        Granularity::Pair => SegmentId::pair(pair),
        _ if hit.cap => SegmentId::extrusion(pair),
        Granularity::Loop => SegmentId::looped(pair, hit.profile.loop_idx),
        Granularity::Primitive => SegmentId::primitive(pair, hit.profile.loop_idx, body.sketch.owner(&hit.profile)),
    }
}

fn compose(
    seq: &ConstructionSequence,
    spec: &GridSpec,
    track: Option<Granularity>,
) -> Result<(TsdfGrid, Option<AttributionGrid>), GeomError> {
    spec.check()?;
    let bodies = build_bodies(seq)?;
    let n = spec.voxel_count();
    let r = spec.resolution;
    let mut values = Vec::with_capacity(n);
    let mut owners = track.map(|_| Vec::with_capacity(n));
    for k in 0..r {
        for j in 0..r {
            for i in 0..r {
                let q = spec.center(i, j, k);
                let mut scene = f64::INFINITY;
                let mut owner: Option<(usize, BodyHit)> = None;
                for (pi, (pair, body)) in seq.pairs.iter().zip(&bodies).enumerate() {
                    let hit = body.eval(q);
                    let b = hit.value;
                    let next = if pi == 0 {
                        b
                    } else {
                        match pair.extrusion.bool_op {
                            BoolOp::New | BoolOp::Join => sdf_union(scene, b),
                            BoolOp::Cut => sdf_difference(scene, b),
                            BoolOp::Intersect => sdf_intersection(scene, b),
                        }
                    };
                    // earlier pairs keep ownership on ties
                    if pi == 0 || next != scene {
                        owner = Some((pi, hit));
                    }
                    scene = next;
                }
                values.push(clamp_store(scene, spec.tau));
                if let (Some(out), Some(g)) = (owners.as_mut(), track) {
                    out.push(owner.map(|(pi, hit)| owner_of(pi, &bodies[pi], &hit, g)));
                }
            }
        }
    }
    if !values.iter().any(|v: &f32| *v < 0.0) {
        return Err(GeomError::RenderInvalid);
    }
    let grid = TsdfGrid::from_values(*spec, values)?;
    let attribution = owners.zip(track).map(|(owners, granularity)| AttributionGrid { spec: *spec, granularity, owners });
    Ok((grid, attribution))
}

/// Renders a sequence to a truncated SDF grid.
pub fn render(seq: &ConstructionSequence, spec: &GridSpec) -> Result<TsdfGrid, GeomError> {
    compose(seq, spec, None).map(|(g, _)| g)
}

/// Renders and attributes in one pass; both come from the same fold.
pub fn render_attributed(
    seq: &ConstructionSequence,
    spec: &GridSpec,
    granularity: Granularity,
) -> Result<(TsdfGrid, AttributionGrid), GeomError> {
    let (grid, attr) = compose(seq, spec, Some(granularity))?;
    Ok((grid, attr.expect("attribution requested")))
}

pub fn attribute(
    seq: &ConstructionSequence,
    spec: &GridSpec,
    granularity: Granularity,
) -> Result<AttributionGrid, GeomError> {
    render_attributed(seq, spec, granularity).map(|(_, a)| a)
}

/// Renders a single pair's body on its own, ignoring its Boolean op.
/// Unlike [`render`], an empty body is not an error.
pub fn render_pair(pair: &Pair, spec: &GridSpec) -> Result<TsdfGrid, GeomError> {
    let body = BodyGeom::new(&pair.sketch, &pair.extrusion)?;
    TsdfGrid::from_fn(*spec, |q| body.eval(q).value)
}
