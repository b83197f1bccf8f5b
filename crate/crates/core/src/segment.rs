//! Segment addressing over the token stream.
//!
//! A segment is a contiguous token span that masking can replace. At
//! [`Granularity::Primitive`] the segments are the individual primitives and
//! each extrusion block; [`Granularity::Loop`] groups primitives by loop;
//! [`Granularity::Pair`] covers a whole sketch/extrusion pair. At every
//! level the segments are disjoint and cover every non-structural token.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::seq::ConstructionSequence;
use crate::token::{emit_extrusion, emit_primitive, Token};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Granularity {
    #[default]
    Primitive,
    Loop,
    Pair,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SegmentKind {
    Primitive { loop_idx: usize, prim: usize },
    Loop { loop_idx: usize },
    Extrusion,
    Pair,
}

impl SegmentKind {
    pub fn name(&self) -> &'static str {
        match self {
            SegmentKind::Primitive { .. } => "primitive",
            SegmentKind::Loop { .. } => "loop",
            SegmentKind::Extrusion => "extrusion",
            SegmentKind::Pair => "pair",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SegmentId {
    pub pair: usize,
    pub kind: SegmentKind,
}

impl SegmentId {
    pub fn primitive(pair: usize, loop_idx: usize, prim: usize) -> Self {
        SegmentId { pair, kind: SegmentKind::Primitive { loop_idx, prim } }
    }

    pub fn looped(pair: usize, loop_idx: usize) -> Self {
        SegmentId { pair, kind: SegmentKind::Loop { loop_idx } }
    }

    pub fn extrusion(pair: usize) -> Self {
        SegmentId { pair, kind: SegmentKind::Extrusion }
    }

    pub fn pair(pair: usize) -> Self {
        SegmentId { pair, kind: SegmentKind::Pair }
    }

    /// Granularities at which this id is a segment.
    pub fn fits(&self, g: Granularity) -> bool {
        match self.kind {
            SegmentKind::Primitive { .. } => g == Granularity::Primitive,
            SegmentKind::Loop { .. } => g == Granularity::Loop,
            SegmentKind::Extrusion => g != Granularity::Pair,
            SegmentKind::Pair => g == Granularity::Pair,
        }
    }
}

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SegmentKind::Primitive { loop_idx, prim } => write!(f, "p{}.l{}.s{}", self.pair, loop_idx, prim),
            SegmentKind::Loop { loop_idx } => write!(f, "p{}.l{}", self.pair, loop_idx),
            SegmentKind::Extrusion => write!(f, "p{}.ext", self.pair),
            SegmentKind::Pair => write!(f, "p{}", self.pair),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("malformed segment id")]
pub struct SegmentIdError;

impl core::str::FromStr for SegmentId {
    type Err = SegmentIdError;

    /// Inverse of `Display`: `p0`, `p0.ext`, `p0.l1`, `p0.l1.s2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('.');
        let index = |part: Option<&str>, prefix: char| -> Result<usize, SegmentIdError> {
            part.and_then(|p| p.strip_prefix(prefix)).and_then(|n| n.parse().ok()).ok_or(SegmentIdError)
        };
        let pair = index(parts.next(), 'p')?;
        let id = match parts.next() {
            None => SegmentId::pair(pair),
            Some("ext") => SegmentId::extrusion(pair),
            Some(l) => {
                let loop_idx = index(Some(l), 'l')?;
                match parts.next() {
                    None => SegmentId::looped(pair, loop_idx),
                    s => SegmentId::primitive(pair, loop_idx, index(s, 's')?),
                }
            }
        };
        match parts.next() {
            None => Ok(id),
            Some(_) => Err(SegmentIdError),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub id: SegmentId,
    /// Half-open token range in the serialized stream.
    pub span: Range<usize>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct LoopLayout {
    pub(crate) span: Range<usize>,
    pub(crate) prims: Vec<Range<usize>>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct PairLayout {
    pub(crate) span: Range<usize>,
    pub(crate) loops: Vec<LoopLayout>,
    pub(crate) extrusion: Range<usize>,
}

/// Serialized tokens plus the span of every addressable element.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub(crate) tokens: Vec<Token>,
    pub(crate) pairs: Vec<PairLayout>,
}

impl Layout {
    pub(crate) fn of(seq: &ConstructionSequence) -> Self {
        let mut tokens = Vec::new();
        let mut pairs = Vec::with_capacity(seq.pairs.len());
        for pair in &seq.pairs {
            let pair_start = tokens.len();
            let mut loops = Vec::with_capacity(pair.sketch.loops.len());
            for lp in &pair.sketch.loops {
                tokens.push(Token::Sol);
                let loop_start = tokens.len();
                let mut prims = Vec::with_capacity(lp.primitives.len());
                for p in &lp.primitives {
                    let s = tokens.len();
                    emit_primitive(p, &mut tokens);
                    prims.push(s..tokens.len());
                }
                loops.push(LoopLayout { span: loop_start..tokens.len(), prims });
            }
            let ext_start = tokens.len();
            emit_extrusion(&pair.extrusion, &mut tokens);
            let extrusion = ext_start..tokens.len();
            pairs.push(PairLayout { span: pair_start..tokens.len(), loops, extrusion });
            tokens.push(Token::Sep);
        }
        tokens.push(Token::Eos);
        Layout { tokens, pairs }
    }

    pub(crate) fn span(&self, id: &SegmentId) -> Option<Range<usize>> {
        let p = self.pairs.get(id.pair)?;
        match id.kind {
            SegmentKind::Primitive { loop_idx, prim } => p.loops.get(loop_idx)?.prims.get(prim).cloned(),
            SegmentKind::Loop { loop_idx } => p.loops.get(loop_idx).map(|l| l.span.clone()),
            SegmentKind::Extrusion => Some(p.extrusion.clone()),
            SegmentKind::Pair => Some(p.span.clone()),
        }
    }

    pub(crate) fn segments(&self, g: Granularity) -> Vec<Segment> {
        let mut out = Vec::new();
        for (pi, p) in self.pairs.iter().enumerate() {
            match g {
                Granularity::Primitive => {
                    for (li, l) in p.loops.iter().enumerate() {
                        for (k, r) in l.prims.iter().enumerate() {
                            out.push(Segment { id: SegmentId::primitive(pi, li, k), span: r.clone() });
                        }
                    }
                    out.push(Segment { id: SegmentId::extrusion(pi), span: p.extrusion.clone() });
                }
                Granularity::Loop => {
                    for (li, l) in p.loops.iter().enumerate() {
                        out.push(Segment { id: SegmentId::looped(pi, li), span: l.span.clone() });
                    }
                    out.push(Segment { id: SegmentId::extrusion(pi), span: p.extrusion.clone() });
                }
                Granularity::Pair => {
                    out.push(Segment { id: SegmentId::pair(pi), span: p.span.clone() });
                }
            }
        }
        out
    }
}

/// Segments of `seq` at the given granularity, in document order.
pub fn segments(seq: &ConstructionSequence, granularity: Granularity) -> Vec<Segment> {
    Layout::of(seq).segments(granularity)
}

/// All segment ids of `seq` at the given granularity, in document order.
pub fn segment_ids(seq: &ConstructionSequence, granularity: Granularity) -> Vec<SegmentId> {
    segments(seq, granularity).into_iter().map(|s| s.id).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::parse_sequence;

    const MINIMAL: &str = "SOL C 128 128 64 E 0 0 0 128 128 128 255 128 0 0 0 SEP EOS";

    #[test]
    fn minimal_partition() {
        let seq = parse_sequence(MINIMAL).unwrap();
        let prim = segments(&seq, Granularity::Primitive);
        assert_eq!(prim.len(), 2);
        assert_eq!(prim[0].span, 1..5);
        assert_eq!(prim[1].span, 5..17);
        assert_eq!(segments(&seq, Granularity::Pair).len(), 1);
        assert_eq!(segments(&seq, Granularity::Loop).len(), 2);
    }

    #[test]
    fn display_ids() {
        extern crate std;
        use std::string::ToString;
        assert_eq!(SegmentId::primitive(1, 0, 3).to_string(), "p1.l0.s3");
        assert_eq!(SegmentId::extrusion(0).to_string(), "p0.ext");
    }

    #[test]
    fn id_text_round_trip() {
        use std::string::ToString;
        for id in [SegmentId::primitive(1, 0, 3), SegmentId::looped(2, 1), SegmentId::extrusion(0), SegmentId::pair(4)] {
            assert_eq!(id.to_string().parse::<SegmentId>(), Ok(id));
        }
        for bad in ["", "x0", "p0.l", "p0.l1.s", "p0.l1.s2.x", "p0.ext.s1"] {
            assert_eq!(bad.parse::<SegmentId>(), Err(SegmentIdError), "{bad}");
        }
    }
}
