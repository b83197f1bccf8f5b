//! Batch evaluation over a triplet corpus.
//!
//! Triplets run in parallel, each with its own seed derived from the global
//! seed and its index, so results do not depend on scheduling. Aggregates
//! are computed afterwards in index order.

use rayon::prelude::*;
use sketchedit_core::engine::{self, EditResult};
use sketchedit_core::geom::render;
use sketchedit_core::metrics::{jsd, occupancy_histogram, JSD_BINS};
use sketchedit_core::{Ablation, EngineConfig, EngineError, GenPolicy, PlanConfig, TsdfGrid};

use crate::report::{metrics_section, Report, Section};
use crate::synth::{triplet_seed, Triplet};

/// IoU at or above which a triplet counts as recovered.
pub const RECOVERY_IOU: f64 = 0.85;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalConfig {
    pub engine: EngineConfig,
    pub plan: PlanConfig,
    pub policy: GenPolicy,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { engine: EngineConfig::default(), plan: PlanConfig::default(), policy: GenPolicy::default() }
    }
}

impl EvalConfig {
    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        self.engine.ablation = ablation;
        self
    }
}

#[derive(Clone, Debug)]
pub struct TripletOutcome {
    pub index: usize,
    pub seed: u64,
    pub truth_edit_distance: usize,
    pub result: EditResult,
}

impl TripletOutcome {
    pub fn iou(&self) -> f64 {
        self.result.report.iou.unwrap_or(0.0)
    }

    pub fn edit_distance(&self) -> usize {
        self.result.report.edit_distance
    }

    /// Per-round best distances, for monotonicity checks.
    pub fn best_distances(&self) -> Vec<f64> {
        self.result.trace.iter().map(|r| r.best_distance).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub count: usize,
    pub iou_mean: f64,
    pub chamfer_mean: Option<f64>,
    pub chamfer_median: Option<f64>,
    /// Mean of the per-triplet divergences.
    pub jsd_mean: f64,
    /// Divergence between the pooled occupancy of all results and of all
    /// targets.
    pub jsd_corpus: f64,
    /// Fraction of final sequences that fail to render.
    pub invalid_rate: f64,
    /// Fraction of all generated candidates that failed to render.
    pub candidate_invalid_rate: f64,
    pub edit_distance_mean: f64,
    pub edit_distance_median: f64,
    pub truth_edit_distance_median: f64,
    pub recovered: usize,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub ablation: Ablation,
    pub outcomes: Vec<TripletOutcome>,
    pub aggregate: Aggregate,
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

pub fn run_triplet(t: &Triplet, index: usize, cfg: &EvalConfig) -> Result<TripletOutcome, EngineError> {
    let seed = triplet_seed(cfg.engine.seed, index);
    let engine_cfg = EngineConfig { seed, spec: *t.target.spec(), ..cfg.engine };
    let result = engine::run(&t.original, &t.target, &engine_cfg, &cfg.plan, &cfg.policy)?;
    Ok(TripletOutcome { index, seed, truth_edit_distance: t.truth_edit_distance, result })
}

pub fn evaluate(triplets: &[Triplet], cfg: &EvalConfig) -> Result<Evaluation, EngineError> {
    let outcomes: Vec<TripletOutcome> = triplets
        .par_iter()
        .enumerate()
        .map(|(i, t)| run_triplet(t, i, cfg))
        .collect::<Result<_, _>>()?;
    let aggregate = aggregate(triplets, &outcomes);
    Ok(Evaluation { ablation: cfg.engine.ablation, outcomes, aggregate })
}

pub fn aggregate(triplets: &[Triplet], outcomes: &[TripletOutcome]) -> Aggregate {
    let reports: Vec<_> = outcomes.iter().map(|o| &o.result.report).collect();
    let ious: Vec<f64> = outcomes.iter().map(TripletOutcome::iou).collect();
    let cds: Vec<f64> = reports.iter().filter_map(|r| r.chamfer_mean).collect();
    let jsds: Vec<f64> = reports.iter().map(|r| r.jsd).collect();
    let eds: Vec<f64> = reports.iter().map(|r| r.edit_distance as f64).collect();
    let truth: Vec<f64> = outcomes.iter().map(|o| o.truth_edit_distance as f64).collect();
    let invalid = reports.iter().filter(|r| r.invalid).count();
    let (bad, total) = outcomes
        .iter()
        .flat_map(|o| &o.result.trace)
        .flat_map(|r| &r.candidate_distances)
        .fold((0usize, 0usize), |(b, t), d| (b + usize::from(!d.is_finite()), t + 1));

    let finals: Vec<TsdfGrid> = outcomes
        .iter()
        .filter_map(|o| render(&o.result.final_seq, triplets[o.index].target.spec()).ok())
        .collect();
    let jsd_corpus = occupancy_histogram(finals.iter(), JSD_BINS)
        .ok()
        .zip(occupancy_histogram(triplets.iter().map(|t| &t.target), JSD_BINS).ok())
        .and_then(|(p, q)| jsd(&p, &q).ok())
        .unwrap_or(core::f64::consts::LN_2);

    let count = outcomes.len();
    Aggregate {
        count,
        iou_mean: mean(&ious).unwrap_or(0.0),
        chamfer_mean: mean(&cds),
        chamfer_median: median(&cds),
        jsd_mean: mean(&jsds).unwrap_or(0.0),
        jsd_corpus,
        invalid_rate: if count == 0 { 0.0 } else { invalid as f64 / count as f64 },
        candidate_invalid_rate: if total == 0 { 0.0 } else { bad as f64 / total as f64 },
        edit_distance_mean: mean(&eds).unwrap_or(0.0),
        edit_distance_median: median(&eds).unwrap_or(0.0),
        truth_edit_distance_median: median(&truth).unwrap_or(0.0),
        recovered: ious.iter().filter(|&&v| v >= RECOVERY_IOU).count(),
    }
}

pub fn eval_report(eval: &Evaluation, cfg: &EvalConfig) -> Report {
    let a = &eval.aggregate;
    let mut report = Report::default();
    let mut run = Section::new("eval");
    run.put("ablation", eval.ablation.name())
        .put("seed", cfg.engine.seed)
        .put("rounds", cfg.engine.max_rounds)
        .put("n", cfg.engine.n)
        .put("queue", cfg.engine.queue_capacity)
        .put("triplets", a.count);
    report.push(run);

    let mut agg = Section::new("aggregate");
    agg.put("iou_mean", a.iou_mean)
        .put_opt("chamfer_mean", a.chamfer_mean)
        .put_opt("chamfer_median", a.chamfer_median)
        .put("jsd_mean", a.jsd_mean)
        .put("jsd_corpus", a.jsd_corpus)
        .put("invalid_rate", a.invalid_rate)
        .put("candidate_invalid_rate", a.candidate_invalid_rate)
        .put("edit_distance_mean", a.edit_distance_mean)
        .put("edit_distance_median", a.edit_distance_median)
        .put("truth_edit_distance_median", a.truth_edit_distance_median)
        .put("recovered", a.recovered);
    report.push(agg);

    for o in &eval.outcomes {
        let mut s = metrics_section(&format!("triplet {}", crate::corpus::stem(o.index)), &o.result.report);
        s.put("seed", format_args!("{:016x}", o.seed))
            .put("truth_edit_distance", o.truth_edit_distance)
            .put("rounds_used", o.result.rounds_used)
            .put("stop", format_args!("{:?}", o.result.stop))
            .put_list("best_distances", o.best_distances())
            .put("final", sketchedit_core::serialize_sequence(&o.result.final_seq));
        report.push(s);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_mean() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&[]), None);
        assert_eq!(mean(&[1.0, 2.0]), Some(1.5));
    }
}
