//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sketchedit::eval::{eval_report, evaluate, EvalConfig, Evaluation, RECOVERY_IOU};
use sketchedit::synth::{synth, SynthSpec, Triplet};
use sketchedit_core::engine;
use sketchedit_core::generator::infill;
use sketchedit_core::geom::{render, sdf_difference, sdf_intersection, sdf_union, surface_points, GridSpec, TsdfGrid};
use sketchedit_core::mask::apply_mask;
use sketchedit_core::planner::relative_scores;
use sketchedit_core::random::{random_renderable, random_sequence, RandomSpec};
use sketchedit_core::segment::segment_ids;
use sketchedit_core::token::{to_tokens, Token};
use sketchedit_core::{
    edit_distance, parse_sequence, serialize_sequence, validate, Ablation, ConstructionSequence, GenPolicy,
    Granularity, PlanConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

struct Suite {
    failures: usize,
}

impl Suite {
    fn run(&mut self, id: &str, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let in_time = took <= budget;
        let pass = out.pass && in_time;
        self.failures += usize::from(!pass);
        let verdict = if pass { "PASS" } else { "FAIL" };
        let late = if in_time { String::new() } else { format!(", over the {budget:?} budget") };
        println!("criterion {id} [{name}]: {verdict} ({}; {:.2}s{late})", out.detail, took.as_secs_f64());
    }
}

fn seq_from(rng: &mut ChaCha8Rng, spec: &RandomSpec) -> ConstructionSequence {
    random_sequence(rng, spec)
}

fn sdf_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = 0;
    for _ in 0..10_000 {
        let [f, g, h]: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let ok = sdf_union(f, g) == sdf_union(g, f)
            && sdf_intersection(f, g) == sdf_intersection(g, f)
            && sdf_union(sdf_union(f, g), h) == sdf_union(f, sdf_union(g, h))
            && sdf_intersection(sdf_intersection(f, g), h) == sdf_intersection(f, sdf_intersection(g, h))
            && sdf_union(f, f) == f
            && sdf_intersection(f, f) == f
            && sdf_difference(f, g) == sdf_intersection(f, -g)
            && -sdf_union(f, g) == sdf_intersection(-f, -g);
        bad += usize::from(!ok);
    }
    check(bad == 0, format!("10000 triples, {bad} violations"))
}

fn grammar_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let spec = RandomSpec::default();
    let mut bad = 0;
    for _ in 0..1000 {
        let s = seq_from(&mut rng, &spec);
        let text = serialize_sequence(&s);
        let ok = parse_sequence(&text).is_ok_and(|p| p == s && serialize_sequence(&p) == text);
        bad += usize::from(!ok);
    }
    check(bad == 0, format!("1000 sequences, {bad} mismatches"))
}

// Full-matrix dynamic program, kept apart from the crate's two-row version.
fn reference_distance(a: &[Token], b: &[Token]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

fn short_sequence(rng: &mut ChaCha8Rng) -> ConstructionSequence {
    let spec = RandomSpec { max_pairs: 2, ..RandomSpec::default() };
    loop {
        let s = seq_from(rng, &spec);
        if to_tokens(&s).len() <= 60 {
            return s;
        }
    }
}

fn edit_distance_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = 0;
    for i in 0..500 {
        let a = short_sequence(&mut rng);
        let b = if i % 2 == 0 {
            short_sequence(&mut rng)
        } else {
            // a near neighbour: one extrusion distance moved
            let mut b = a.clone();
            let q = &mut b.pairs[0].extrusion.dist_pos;
            *q = sketchedit_core::QuantizedParam::new(q.bin().wrapping_add(rng.random_range(1..=40)).max(1));
            b
        };
        bad += usize::from(edit_distance(&a, &b) != reference_distance(&to_tokens(&a), &to_tokens(&b)));
    }
    check(bad == 0, format!("500 pairs of <= 60 tokens, {bad} disagreements"))
}

fn render_oracles() -> Outcome {
    use std::f64::consts::PI;
    let spec = GridSpec::default();
    let frac = |text: &str| render(&parse_sequence(text).unwrap(), &spec).unwrap().occupancy_fraction();
    let coord = |b: f64| -0.5 + b / 255.0;
    let dist = |b: f64| b / 255.0;

    // radius 64 bins, height 128 bins
    let cylinder = frac("SOL C 128 128 64 E 0 0 0 128 128 64 255 128 0 0 0 SEP EOS");
    let want_cyl = PI * dist(64.0).powi(2) * dist(128.0);
    // box of side (191-64) bins and depth 128 bins centred on its plane,
    // minus a through hole of radius 40
    let cut = frac(
        "SOL L 191 64 L 191 191 L 64 191 L 64 64 E 0 0 0 128 128 128 255 128 0 0 1 SEP \
         SOL C 128 128 40 E 0 0 0 128 128 0 255 255 0 2 0 SEP EOS",
    );
    let side = coord(191.0) - coord(64.0);
    let depth = dist(128.0);
    let want_cut = side * side * depth - PI * dist(40.0).powi(2) * depth;
    let e_cyl = (cylinder - want_cyl).abs() / want_cyl;
    let e_cut = (cut - want_cut).abs() / want_cut;

    let radius = 0.3;
    let sphere = TsdfGrid::from_fn(spec, |p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - radius).unwrap();
    let points = surface_points(&sphere, usize::MAX, 0).unwrap();
    let far = points
        .points
        .iter()
        .filter(|p| ((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - radius).abs() > spec.pitch())
        .count();
    check(
        e_cyl < 0.05 && e_cut < 0.05 && far == 0 && !points.is_empty(),
        format!(
            "cylinder error {:.2}%, cube minus cylinder error {:.2}%, sphere {}/{} points within one pitch",
            100.0 * e_cyl,
            100.0 * e_cut,
            points.len() - far,
            points.len()
        ),
    )
}

fn planner_correctness() -> Outcome {
    let spec = GridSpec::default();
    let plan = PlanConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut nonzero = 0;
    for _ in 0..100 {
        let s = random_renderable(&mut rng, &RandomSpec::default(), &spec, 0.01);
        let g = render(&s, &spec).unwrap();
        let iv = relative_scores(&s, &g, &g, &plan).unwrap();
        nonzero += usize::from(iv.entries.iter().any(|e| e.j != 0.0));
    }
    let cases = synth(&SynthSpec { corpus_size: 100, seed: 5, ..SynthSpec::default() }).unwrap();
    let top1 = cases
        .iter()
        .filter(|t| {
            let g = render(&t.original, &spec).unwrap();
            let iv = relative_scores(&t.original, &g, &t.target, &plan).unwrap();
            iv.top() == t.edited_segment
        })
        .count();
    check(
        nonzero == 0 && top1 >= 90,
        format!("self-scores non-zero for {nonzero}/100; edited segment ranked first in {top1}/100"),
    )
}

fn corpus() -> Vec<Triplet> {
    synth(&SynthSpec::default()).expect("default recipe synthesizes")
}

fn recovery(eval: &Evaluation) -> Outcome {
    let a = &eval.aggregate;
    let ratio_ok = a.edit_distance_median <= 2.0 * a.truth_edit_distance_median;
    check(
        a.recovered * 10 >= a.count * 8 && ratio_ok,
        format!(
            "IoU >= {RECOVERY_IOU} in {}/{}; median edit distance {} vs median truth {}",
            a.recovered, a.count, a.edit_distance_median, a.truth_edit_distance_median
        ),
    )
}

fn ablation_order(full: &Evaluation, queue: &Evaluation, verify: &Evaluation, plan: &Evaluation) -> Outcome {
    let (f, q, v, p) =
        (full.aggregate.iou_mean, queue.aggregate.iou_mean, verify.aggregate.iou_mean, plan.aggregate.iou_mean);
    let gap = 0.02;
    check(
        f - q >= gap && q - v >= gap && f - p >= gap,
        format!("mean IoU full {f:.3}, queue {q:.3}, verify {v:.3}, plan {p:.3}"),
    )
}

fn queue_invariants(runs: &[&Evaluation], triplets: &[Triplet]) -> Outcome {
    let mut increasing = 0;
    let mut too_long = 0;
    let mut total = 0;
    for eval in runs {
        for o in &eval.outcomes {
            total += 1;
            let best = o.best_distances();
            increasing += usize::from(best.windows(2).any(|w| w[1] > w[0]));
            too_long += usize::from(o.result.rounds_used > 10);
        }
    }
    let original = &triplets[0].original;
    let spec = *triplets[0].target.spec();
    let target = render(original, &spec).unwrap();
    let cfg = sketchedit_core::EngineConfig { spec, ..Default::default() };
    let fixed = engine::run(original, &target, &cfg, &PlanConfig::default(), &GenPolicy::default()).unwrap();
    let fixed_ok = fixed.final_seq == *original && fixed.rounds_used == 1;
    check(
        increasing == 0 && too_long == 0 && fixed_ok,
        format!(
            "{total} runs: best distance rose in {increasing}, over 10 rounds in {too_long}; fixed point {} in {} round(s)",
            if fixed.final_seq == *original { "unchanged" } else { "changed" },
            fixed.rounds_used
        ),
    )
}

/// The unmasked gaps must appear in order, anchored at both ends.
fn preserves_gaps(candidate: &[Token], gaps: &[&[Token]]) -> bool {
    if gaps.len() == 1 {
        return candidate == gaps[0];
    }
    let (first, last) = (gaps[0], gaps[gaps.len() - 1]);
    if !candidate.starts_with(first) || !candidate.ends_with(last) || candidate.len() < first.len() + last.len() {
        return false;
    }
    let mut pos = first.len();
    let end = candidate.len() - last.len();
    for gap in &gaps[1..gaps.len() - 1] {
        match (pos..=end.saturating_sub(gap.len())).find(|&i| candidate[i..].starts_with(gap)) {
            Some(i) => pos = i + gap.len(),
            None => return false,
        }
    }
    pos <= end
}

fn generator_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let spec = RandomSpec::default();
    let (mut candidates, mut invalid, mut altered) = (0usize, 0usize, 0usize);
    for trial in 0..1000u64 {
        let s = seq_from(&mut rng, &spec);
        let g = *[Granularity::Primitive, Granularity::Loop, Granularity::Pair].choose(&mut rng).unwrap();
        let ids: Vec<_> = segment_ids(&s, g).into_iter().filter(|_| rng.random_bool(0.3)).collect();
        let masked = apply_mask(&s, &ids).unwrap();
        let set = infill(&masked, &GenPolicy { n: 4, seed: trial, ..GenPolicy::default() }).unwrap();
        let gaps = masked.gaps();
        for c in set.sequences() {
            candidates += 1;
            let text = serialize_sequence(c);
            invalid += usize::from(!parse_sequence(&text).is_ok_and(|p| validate(&p).is_empty()));
            let tokens = to_tokens(c);
            altered += usize::from(!preserves_gaps(&tokens, &gaps) || masked.match_candidate(&tokens).is_none());
        }
    }
    check(
        invalid == 0 && altered == 0,
        format!("{candidates} candidates from 1000 trials: {invalid} invalid, {altered} touched unmasked tokens"),
    )
}

fn main() -> ExitCode {
    let mut suite = Suite { failures: 0 };
    let secs = Duration::from_secs;
    suite.run("1", "sdf algebra", secs(1), sdf_algebra);
    suite.run("2", "grammar round trip", secs(5), grammar_round_trip);
    suite.run("3", "edit distance oracle", secs(10), edit_distance_oracle);
    suite.run("4", "render oracles", secs(30), render_oracles);
    suite.run("5", "planner correctness", secs(180), planner_correctness);
    suite.run("9", "generator contract", secs(10), generator_contract);

    let start = Instant::now();
    let triplets = corpus();
    println!("  (synthesized {} triplets in {:.2}s)", triplets.len(), start.elapsed().as_secs_f64());
    let cfg = EvalConfig::default();
    let mut full = None;
    suite.run("6", "end-to-end recovery", secs(600), || {
        let eval = evaluate(&triplets, &cfg).unwrap();
        let out = recovery(&eval);
        full = Some(eval);
        out
    });
    let full = full.expect("criterion 6 ran");
    let mut arms = Vec::new();
    suite.run("7", "ablation ordering", secs(2400), || {
        for ablation in [Ablation::Queue, Ablation::Verify, Ablation::Plan] {
            arms.push(evaluate(&triplets, &cfg.with_ablation(ablation)).unwrap());
        }
        ablation_order(&full, &arms[0], &arms[1], &arms[2])
    });
    suite.run("8", "queue and convergence invariants", secs(60), || {
        let runs: Vec<&Evaluation> = std::iter::once(&full).chain(arms.iter()).collect();
        queue_invariants(&runs, &triplets)
    });
    suite.run("10", "determinism", secs(600), || {
        let first = eval_report(&full, &cfg).to_string();
        let again = eval_report(&evaluate(&triplets, &cfg).unwrap(), &cfg).to_string();
        check(first == again, format!("report of {} bytes, rerun identical: {}", first.len(), first == again))
    });

    let total = 10;
    println!("{}/{total} criteria passed", total - suite.failures);
    if suite.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
