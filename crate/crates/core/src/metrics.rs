//! Shape and sequence metrics: IoU, Chamfer distance, Jensen-Shannon
//! divergence of occupancy distributions, invalid rate, edit distance, and
//! the composite geometry + structure objective.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::edit_distance::edit_distance;
use crate::geom::vec::dist3_sq;
use crate::geom::{render, surface_points, GridSpec, PointSet, TsdfGrid};
use crate::math::{floor, ln};
use crate::seq::ConstructionSequence;
use crate::token::to_tokens;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("grid specs differ")]
    SpecMismatch,
    #[error("point set is empty")]
    EmptySet,
    #[error("distribution is not normalized")]
    NormalizationError,
    #[error("outcome list is empty")]
    EmptyList,
}

/// Intersection over union of the occupied (negative) voxels. Two empty
/// occupancies count as identical.
pub fn iou(a: &TsdfGrid, b: &TsdfGrid) -> Result<f64, MetricError> {
    if a.spec() != b.spec() {
        return Err(MetricError::SpecMismatch);
    }
    let (mut inter, mut uni) = (0usize, 0usize);
    for (x, y) in a.values().iter().zip(b.values()) {
        let (ox, oy) = (*x < 0.0, *y < 0.0);
        inter += usize::from(ox && oy);
        uni += usize::from(ox || oy);
    }
    Ok(if uni == 0 { 1.0 } else { inter as f64 / uni as f64 })
}

fn mean_nearest_sq(from: &PointSet, to: &PointSet) -> f64 {
    let total: f64 = from
        .points
        .iter()
        .map(|p| to.points.iter().map(|q| dist3_sq(*p, *q)).fold(f64::INFINITY, f64::min))
        .sum();
    total / from.len() as f64
}

/// Symmetric Chamfer distance with squared nearest-neighbour distances:
/// half the mean over `a` plus half the mean over `b`.
pub fn chamfer(a: &PointSet, b: &PointSet) -> Result<f64, MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptySet);
    }
    Ok(0.5 * mean_nearest_sq(a, b) + 0.5 * mean_nearest_sq(b, a))
}

fn check_distribution(p: &[f64]) -> Result<(), MetricError> {
    let sum: f64 = p.iter().sum();
    if p.iter().any(|x| !(*x >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(MetricError::NormalizationError);
    }
    Ok(())
}

/// Jensen-Shannon divergence with natural logarithms; in `[0, ln 2]`.
pub fn jsd(p: &[f64], q: &[f64]) -> Result<f64, MetricError> {
    if p.len() != q.len() {
        return Err(MetricError::NormalizationError);
    }
    check_distribution(p)?;
    check_distribution(q)?;
    let kl_half = |x: f64, m: f64| if x > 0.0 { x * ln(x / m) } else { 0.0 };
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        total += 0.5 * kl_half(a, m) + 0.5 * kl_half(b, m);
    }
    Ok(total.clamp(0.0, core::f64::consts::LN_2))
}

/// Default bins per axis for occupancy histograms.
pub const JSD_BINS: usize = 28;

/// Occupied-voxel counts of several grids accumulated on a `bins³` lattice
/// over the unit cube, normalized to sum 1.
pub fn occupancy_histogram<'a>(
    grids: impl IntoIterator<Item = &'a TsdfGrid>,
    bins: usize,
) -> Result<Vec<f64>, MetricError> {
    let mut hist = vec![0.0f64; bins * bins * bins];
    let to_bin = |c: f64| (floor((c + 0.5) * bins as f64) as isize).clamp(0, bins as isize - 1) as usize;
    for g in grids {
        let spec = g.spec();
        for (idx, v) in g.values().iter().enumerate() {
            if *v < 0.0 {
                let (i, j, k) = spec.coords(idx);
                let c = spec.center(i, j, k);
                let (a, b, d) = (to_bin(c[0]), to_bin(c[1]), to_bin(c[2]));
                hist[a + bins * (b + bins * d)] += 1.0;
            }
        }
    }
    let total: f64 = hist.iter().sum();
    if total <= 0.0 {
        return Err(MetricError::NormalizationError);
    }
    hist.iter_mut().for_each(|h| *h /= total);
    Ok(hist)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderOutcome {
    Valid,
    ParseFailure,
    RenderInvalid,
}

/// Fraction of outcomes that failed to parse or render.
pub fn invalid_rate(outcomes: &[RenderOutcome]) -> Result<f64, MetricError> {
    if outcomes.is_empty() {
        return Err(MetricError::EmptyList);
    }
    let bad = outcomes.iter().filter(|o| **o != RenderOutcome::Valid).count();
    Ok(bad as f64 / outcomes.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricOptions {
    /// Weight of the structure term in the composite objective.
    pub lambda: f64,
    /// Surface point budget per shape for Chamfer distance.
    pub max_points: usize,
    pub seed: u64,
    pub jsd_bins: usize,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions { lambda: 0.1, max_points: 2048, seed: 0, jsd_bins: JSD_BINS }
    }
}

/// Geometry term plus `lambda` times the edit distance normalized by the
/// original stream length. Unrenderable candidates score `+inf`.
pub fn composite_objective(
    candidate: &ConstructionSequence,
    target: &TsdfGrid,
    original: &ConstructionSequence,
    opts: &MetricOptions,
    spec: &GridSpec,
) -> f64 {
    let geometry = render(candidate, spec)
        .ok()
        .and_then(|g| surface_points(&g, opts.max_points, opts.seed).ok())
        .zip(surface_points(target, opts.max_points, opts.seed).ok())
        .and_then(|(a, b)| chamfer(&a, &b).ok());
    match geometry {
        Some(d) => {
            let structure = edit_distance(candidate, original) as f64 / to_tokens(original).len() as f64;
            d + opts.lambda * structure
        }
        None => f64::INFINITY,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub iou: Option<f64>,
    pub chamfer_mean: Option<f64>,
    pub edit_distance: usize,
    pub invalid: bool,
    pub jsd: f64,
    pub objective: f64,
}

impl MetricsReport {
    /// Metrics of `result` against a target shape and the original sequence.
    pub fn compute(
        result: &ConstructionSequence,
        target: &TsdfGrid,
        original: &ConstructionSequence,
        opts: &MetricOptions,
    ) -> Self {
        let spec = *target.spec();
        let edit = edit_distance(result, original);
        let Ok(grid) = render(result, &spec) else {
            return MetricsReport {
                iou: None,
                chamfer_mean: None,
                edit_distance: edit,
                invalid: true,
                jsd: core::f64::consts::LN_2,
                objective: f64::INFINITY,
            };
        };
        let iou_v = iou(&grid, target).ok();
        let cd = surface_points(&grid, opts.max_points, opts.seed)
            .ok()
            .zip(surface_points(target, opts.max_points, opts.seed).ok())
            .and_then(|(a, b)| chamfer(&a, &b).ok());
        let jsd_v = occupancy_histogram([&grid], opts.jsd_bins)
            .ok()
            .zip(occupancy_histogram([target], opts.jsd_bins).ok())
            .and_then(|(p, q)| jsd(&p, &q).ok())
            .unwrap_or(core::f64::consts::LN_2);
        let objective = match cd {
            Some(d) => d + opts.lambda * edit as f64 / to_tokens(original).len() as f64,
            None => f64::INFINITY,
        };
        MetricsReport { iou: iou_v, chamfer_mean: cd, edit_distance: edit, invalid: false, jsd: jsd_v, objective }
    }
}
