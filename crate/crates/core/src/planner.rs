//! Planning: find the segments whose geometric influence differs most
//! between the current shape and the target, and mask them.
//!
//! The raw contribution of segment `i` to a shape `S` is
//! `M(i, S) = |A_i ∩ band(S)| / (|A_i| + 1)`, where `A_i` is the set of
//! near-surface voxels the segment owns in the sequence's own rendering and
//! `band(S)` the near-surface voxels of `S`. The relative score is
//! `J(i) = |M(i, target) - M(i, current)|`; segments strictly above the mean
//! `J` are masked.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::geom::{render_attributed, GeomError, TsdfGrid};
use crate::segment::{segment_ids, Granularity, SegmentId};
use crate::seq::ConstructionSequence;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("current and target grids have different specs")]
    SpecMismatch,
    #[error(transparent)]
    Render(#[from] GeomError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieRule {
    #[default]
    DocumentOrder,
    ReverseDocumentOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlanConfig {
    pub granularity: Granularity,
    /// Half-width of the near-surface band, in voxels.
    pub band_width: u32,
    /// Segments to force-select when nothing is strictly above the mean.
    pub min_mask: usize,
    pub tie_rule: TieRule,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig { granularity: Granularity::Primitive, band_width: 1, min_mask: 0, tie_rule: TieRule::DocumentOrder }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Influence {
    pub id: SegmentId,
    pub m_current: f64,
    pub m_target: f64,
    pub j: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct InfluenceVector {
    pub entries: Vec<Influence>,
}

impl InfluenceVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn j(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.j).collect()
    }

    pub fn get(&self, id: &SegmentId) -> Option<&Influence> {
        self.entries.iter().find(|e| e.id == *id)
    }

    /// Segment with the largest `j`, earliest on ties.
    pub fn top(&self) -> Option<SegmentId> {
        let mut best: Option<&Influence> = None;
        for e in &self.entries {
            if best.is_none_or(|b| e.j > b.j) {
                best = Some(e);
            }
        }
        best.map(|e| e.id)
    }
}

/// Owned near-surface voxel sets of every segment, by segment order.
struct Ownership {
    ids: Vec<SegmentId>,
    /// For each segment, the voxel indices it owns inside its own band.
    owned: Vec<Vec<usize>>,
}

fn ownership(seq: &ConstructionSequence, shape: &TsdfGrid, cfg: &PlanConfig) -> Result<Ownership, PlanError> {
    let spec = shape.spec();
    let (own_grid, attr) = render_attributed(seq, spec, cfg.granularity)?;
    let band = f64::from(cfg.band_width) * spec.pitch();
    let ids = segment_ids(seq, cfg.granularity);
    let mut owned = vec![Vec::new(); ids.len()];
    for (idx, v) in own_grid.values().iter().enumerate() {
        if f64::from(*v).abs() >= band {
            continue;
        }
        if let Some(owner) = attr.owner(idx) {
            if let Ok(pos) = ids.binary_search(&owner) {
                owned[pos].push(idx);
            }
        }
    }
    Ok(Ownership { ids, owned })
}

fn contribution(owned: &[usize], shape: &TsdfGrid, band: f64) -> f64 {
    let hits = owned.iter().filter(|&&idx| f64::from(shape.values()[idx]).abs() < band).count();
    hits as f64 / (owned.len() as f64 + 1.0)
}

/// `M(i, shape)` for every segment of `seq` at the configured granularity.
pub fn influence(
    seq: &ConstructionSequence,
    shape: &TsdfGrid,
    cfg: &PlanConfig,
) -> Result<Vec<(SegmentId, f64)>, PlanError> {
    let own = ownership(seq, shape, cfg)?;
    let band = f64::from(cfg.band_width) * shape.spec().pitch();
    Ok(own.ids.iter().zip(&own.owned).map(|(id, o)| (*id, contribution(o, shape, band))).collect())
}

/// `J(i)` for every segment, comparing the current shape with the target.
pub fn relative_scores(
    seq: &ConstructionSequence,
    s_current: &TsdfGrid,
    s_target: &TsdfGrid,
    cfg: &PlanConfig,
) -> Result<InfluenceVector, PlanError> {
    if s_current.spec() != s_target.spec() {
        return Err(PlanError::SpecMismatch);
    }
    let own = ownership(seq, s_current, cfg)?;
    let band = f64::from(cfg.band_width) * s_current.spec().pitch();
    let entries = own
        .ids
        .iter()
        .zip(&own.owned)
        .map(|(id, o)| {
            let m_current = contribution(o, s_current, band);
            let m_target = contribution(o, s_target, band);
            Influence { id: *id, m_current, m_target, j: (m_target - m_current).abs() }
        })
        .collect();
    Ok(InfluenceVector { entries })
}

/// Segments with `j` strictly above the mean, in document order. When none
/// qualify, the top `min_mask` by `j` (possibly none).
pub fn select_segments(iv: &InfluenceVector, cfg: &PlanConfig) -> Vec<SegmentId> {
    if iv.is_empty() {
        return Vec::new();
    }
    let n = iv.len() as f64;
    let mean = iv.entries.iter().map(|e| e.j).sum::<f64>() / n;
    let max = iv.entries.iter().map(|e| e.j).fold(0.0, f64::max);
    // relative slack keeps "all equal" from splitting on rounding noise
    let slack = 1e-12 * max;
    let above: Vec<SegmentId> = iv.entries.iter().filter(|e| e.j - mean > slack).map(|e| e.id).collect();
    if !above.is_empty() || cfg.min_mask == 0 {
        return above;
    }
    let mut order: Vec<usize> = (0..iv.len()).collect();
    if cfg.tie_rule == TieRule::ReverseDocumentOrder {
        order.reverse();
    }
    order.sort_by(|&a, &b| iv.entries[b].j.total_cmp(&iv.entries[a].j));
    let mut picked: Vec<usize> = order.into_iter().take(cfg.min_mask).collect();
    picked.sort_unstable();
    picked.into_iter().map(|i| iv.entries[i].id).collect()
}
