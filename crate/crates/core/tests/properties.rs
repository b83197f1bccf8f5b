use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sketchedit_core::geom::{render, sdf_difference, sdf_intersection, sdf_union, GridSpec};
use sketchedit_core::mask::apply_mask;
use sketchedit_core::random::{random_sequence, RandomSpec};
use sketchedit_core::segment::segments;
use sketchedit_core::token::{to_tokens, tokenize};
use sketchedit_core::{
    edit_distance, parse_sequence, serialize_sequence, BoolOp, ConstructionSequence, Granularity,
};

fn seq_from(seed: u64) -> ConstructionSequence {
    random_sequence(&mut ChaCha8Rng::seed_from_u64(seed), &RandomSpec::default())
}

// Full-matrix Wagner-Fischer, written independently of the crate's two-row version.
fn reference_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn serialize_parse_round_trip(seed in any::<u64>()) {
        let seq = seq_from(seed);
        let text = serialize_sequence(&seq);
        let back = parse_sequence(&text).unwrap();
        prop_assert_eq!(serialize_sequence(&back), text);
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn edit_distance_matches_reference(a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (seq_from(a), seq_from(b));
        prop_assert_eq!(edit_distance(&x, &y), reference_distance(&to_tokens(&x), &to_tokens(&y)));
        prop_assert_eq!(edit_distance(&x, &x), 0);
    }

    #[test]
    fn csg_identities(f in -1.0f64..1.0, g in -1.0f64..1.0, h in -1.0f64..1.0) {
        prop_assert_eq!(sdf_union(f, g), sdf_union(g, f));
        prop_assert_eq!(sdf_intersection(f, g), sdf_intersection(g, f));
        prop_assert_eq!(sdf_union(sdf_union(f, g), h), sdf_union(f, sdf_union(g, h)));
        prop_assert_eq!(sdf_intersection(sdf_intersection(f, g), h), sdf_intersection(f, sdf_intersection(g, h)));
        prop_assert_eq!(sdf_union(f, f), f);
        prop_assert_eq!(sdf_difference(f, g), sdf_intersection(f, -g));
        prop_assert_eq!(-sdf_union(f, g), sdf_intersection(-f, -g));
    }

    #[test]
    fn segments_tile_the_content(seed in any::<u64>(), g in 0usize..3) {
        let seq = seq_from(seed);
        let granularity = [Granularity::Primitive, Granularity::Loop, Granularity::Pair][g];
        let segs = segments(&seq, granularity);
        let tokens = to_tokens(&seq);
        for w in segs.windows(2) {
            prop_assert!(w[0].span.end <= w[1].span.start);
        }
        // every numeric token belongs to exactly one segment
        for (i, t) in tokens.iter().enumerate() {
            let owners = segs.iter().filter(|s| s.span.contains(&i)).count();
            if matches!(t, sketchedit_core::Token::Num(_)) {
                prop_assert_eq!(owners, 1);
            }
        }
    }

    #[test]
    fn mask_then_unmask_is_identity(seed in any::<u64>(), pick in any::<u64>()) {
        let seq = seq_from(seed);
        let segs = segments(&seq, Granularity::Primitive);
        let chosen: Vec<_> = segs.iter().enumerate().filter(|(i, _)| pick >> (i % 64) & 1 == 1).map(|(_, s)| s.id).collect();
        let masked = apply_mask(&seq, &chosen).unwrap();
        prop_assert_eq!(masked.unmask(), seq.clone());
        let text = masked.to_text();
        prop_assert_eq!(text.matches("MASK").count(), chosen.len());
        prop_assert!(tokenize(&text).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn join_grows_and_cut_shrinks_occupancy(seed in any::<u64>()) {
        let spec = GridSpec::new(16, 0.2).unwrap();
        let mut base = seq_from(seed);
        base.pairs.truncate(1);
        let Ok(before) = render(&base, &spec) else { return Ok(()) };
        let extra = seq_from(seed ^ 0xabc).pairs[0].clone();
        for (op, grows) in [(BoolOp::Join, true), (BoolOp::Cut, false)] {
            let mut next = base.clone();
            let mut p = extra.clone();
            p.extrusion.bool_op = op;
            next.pairs.push(p);
            let Ok(after) = render(&next, &spec) else { continue };
            for (x, y) in before.values().iter().zip(after.values()) {
                if grows {
                    prop_assert!(!(*x < 0.0) || *y < 0.0);
                } else {
                    prop_assert!(!(*y < 0.0) || *x < 0.0);
                }
            }
        }
    }
}
