//! Masked sequences: a base sequence with some segments replaced by `MASK`.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use thiserror::Error;

use crate::segment::{Layout, Segment, SegmentId, SegmentKind};
use crate::seq::ConstructionSequence;
use crate::token::{parse_tokens, tokens_to_string, ParseError, Parser, Token};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MaskError {
    #[error("segment {0} does not exist in the sequence")]
    UnknownSegment(SegmentId),
    #[error("segments {0} and {1} overlap")]
    OverlappingSegments(SegmentId, SegmentId),
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FillError {
    #[error("expected {expected} fragments, got {got}")]
    Count { expected: usize, got: usize },
    #[error("fragment {index} is not a valid {kind}: {source}")]
    Fragment { index: usize, kind: &'static str, source: ParseError },
    #[error(transparent)]
    Sequence(ParseError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaskedSequence {
    base: ConstructionSequence,
    base_tokens: Vec<Token>,
    /// Masked segments ordered by span start.
    masked: Vec<Segment>,
}

/// Masks the given segments of `seq`. Ids may mix granularities as long as
/// their spans are disjoint.
pub fn apply_mask<'a>(
    seq: &ConstructionSequence,
    ids: impl IntoIterator<Item = &'a SegmentId>,
) -> Result<MaskedSequence, MaskError> {
    let layout = Layout::of(seq);
    let mut masked = Vec::new();
    for id in ids {
        let span = layout.span(id).ok_or(MaskError::UnknownSegment(*id))?;
        if masked.iter().any(|s: &Segment| s.id == *id) {
            continue;
        }
        masked.push(Segment { id: *id, span });
    }
    masked.sort_by_key(|s| (s.span.start, s.span.end));
    for w in masked.windows(2) {
        if w[1].span.start < w[0].span.end {
            return Err(MaskError::OverlappingSegments(w[0].id, w[1].id));
        }
    }
    Ok(MaskedSequence { base: seq.clone(), base_tokens: layout.tokens, masked })
}

impl MaskedSequence {
    pub fn base(&self) -> &ConstructionSequence {
        &self.base
    }

    pub fn base_tokens(&self) -> &[Token] {
        &self.base_tokens
    }

    pub fn masked(&self) -> &[Segment] {
        &self.masked
    }

    pub fn masked_ids(&self) -> Vec<SegmentId> {
        self.masked.iter().map(|s| s.id).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.masked.is_empty()
    }

    /// The stream with each masked span collapsed to one `MASK` token.
    pub fn tokens(&self) -> Vec<Token> {
        let mut out = Vec::with_capacity(self.base_tokens.len());
        let mut pos = 0;
        for s in &self.masked {
            out.extend_from_slice(&self.base_tokens[pos..s.span.start]);
            out.push(Token::Mask);
            pos = s.span.end;
        }
        out.extend_from_slice(&self.base_tokens[pos..]);
        out
    }

    pub fn to_text(&self) -> String {
        tokens_to_string(&self.tokens())
    }

    pub fn unmask(&self) -> ConstructionSequence {
        self.base.clone()
    }

    /// Original tokens of each masked span.
    pub fn original_fragments(&self) -> Vec<&[Token]> {
        self.masked.iter().map(|s| &self.base_tokens[s.span.clone()]).collect()
    }

    /// Unmasked token runs: one before each masked span plus the tail.
    pub fn gaps(&self) -> Vec<&[Token]> {
        let mut out = Vec::with_capacity(self.masked.len() + 1);
        let mut pos = 0;
        for s in &self.masked {
            out.push(&self.base_tokens[pos..s.span.start]);
            pos = s.span.end;
        }
        out.push(&self.base_tokens[pos..]);
        out
    }

    /// Replaces every mask with the corresponding fragment and parses the result.
    pub fn fill(&self, fragments: &[Vec<Token>]) -> Result<ConstructionSequence, FillError> {
        if fragments.len() != self.masked.len() {
            return Err(FillError::Count { expected: self.masked.len(), got: fragments.len() });
        }
        for (index, (seg, frag)) in self.masked.iter().zip(fragments).enumerate() {
            check_fragment(seg.id.kind, frag)
                .map_err(|source| FillError::Fragment { index, kind: seg.id.kind.name(), source })?;
        }
        parse_tokens(&self.assemble(fragments)).map_err(FillError::Sequence)
    }

    pub(crate) fn assemble(&self, fragments: &[Vec<Token>]) -> Vec<Token> {
        let mut out = Vec::with_capacity(self.base_tokens.len() + 8);
        let mut pos = 0;
        for (s, frag) in self.masked.iter().zip(fragments) {
            out.extend_from_slice(&self.base_tokens[pos..s.span.start]);
            out.extend_from_slice(frag);
            pos = s.span.end;
        }
        out.extend_from_slice(&self.base_tokens[pos..]);
        out
    }

    /// Finds how `candidate` decomposes into this stream's unmasked runs and
    /// one well-formed fragment per mask. Returns the fragment spans, or
    /// `None` when some unmasked token was altered.
    pub fn match_candidate(&self, candidate: &[Token]) -> Option<Vec<Range<usize>>> {
        let gaps = self.gaps();
        let head = gaps[0];
        if !candidate.starts_with(head) {
            return None;
        }
        let mut spans = Vec::with_capacity(self.masked.len());
        if self.match_from(candidate, head.len(), 0, &gaps, &mut spans) {
            Some(spans)
        } else {
            None
        }
    }

    fn match_from(
        &self,
        cand: &[Token],
        pos: usize,
        i: usize,
        gaps: &[&[Token]],
        spans: &mut Vec<Range<usize>>,
    ) -> bool {
        if i == self.masked.len() {
            return pos == cand.len();
        }
        let gap = gaps[i + 1];
        let last = i + 1 == self.masked.len();
        let kind = self.masked[i].id.kind;
        let mut end = pos + 1;
        while end + gap.len() <= cand.len() {
            let gap_ok = if last {
                end + gap.len() == cand.len() && cand[end..] == *gap
            } else {
                cand[end..end + gap.len()] == *gap
            };
            if gap_ok && check_fragment(kind, &cand[pos..end]).is_ok() {
                spans.push(pos..end);
                if self.match_from(cand, end + gap.len(), i + 1, gaps, spans) {
                    return true;
                }
                spans.pop();
            }
            end += 1;
        }
        false
    }
}

/// Checks that `tokens` is exactly one well-formed fragment of the given kind.
pub fn check_fragment(kind: SegmentKind, tokens: &[Token]) -> Result<(), ParseError> {
    let mut p = Parser::new(tokens);
    match kind {
        SegmentKind::Primitive { .. } => {
            p.primitive()?;
        }
        SegmentKind::Loop { .. } => {
            p.loop_body()?;
        }
        SegmentKind::Extrusion => {
            p.extrusion()?;
        }
        SegmentKind::Pair => {
            p.pair_body()?;
        }
    }
    if p.at_end() {
        Ok(())
    } else {
        Err(ParseError::Syntax { pos: tokens.len(), msg: "trailing tokens in fragment" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segment::{segment_ids, Granularity};
    use crate::token::{parse_sequence, to_tokens, tokenize};

    const TWO: &str = "SOL L 200 60 L 200 200 L 60 200 L 60 60 E 0 0 0 128 128 100 255 100 0 0 0 SEP \
                       SOL C 128 128 30 E 0 0 0 128 128 128 255 120 0 1 0 SEP EOS";

    #[test]
    fn empty_mask_is_identity() {
        let seq = parse_sequence(TWO).unwrap();
        let m = apply_mask(&seq, &[]).unwrap();
        assert_eq!(m.tokens(), to_tokens(&seq));
        assert_eq!(m.fill(&[]).unwrap(), seq);
    }

    #[test]
    fn mask_everything_leaves_markers() {
        let seq = parse_sequence(TWO).unwrap();
        for g in [Granularity::Primitive, Granularity::Loop, Granularity::Pair] {
            let ids = segment_ids(&seq, g);
            let m = apply_mask(&seq, &ids).unwrap();
            assert!(m.tokens().iter().all(|t| t.is_structural() || *t == Token::Mask));
            assert_eq!(m.unmask(), seq);
            let frags: Vec<Vec<Token>> = m.original_fragments().iter().map(|f| f.to_vec()).collect();
            assert_eq!(m.fill(&frags).unwrap(), seq);
        }
        let m = apply_mask(&seq, &segment_ids(&seq, Granularity::Pair)).unwrap();
        assert_eq!(m.to_text(), "MASK SEP MASK SEP EOS");
    }

    #[test]
    fn unknown_and_overlapping() {
        let seq = parse_sequence(TWO).unwrap();
        assert_eq!(
            apply_mask(&seq, &[SegmentId::extrusion(5)]),
            Err(MaskError::UnknownSegment(SegmentId::extrusion(5)))
        );
        let r = apply_mask(&seq, &[SegmentId::looped(0, 0), SegmentId::primitive(0, 0, 1)]);
        assert!(matches!(r, Err(MaskError::OverlappingSegments(..))));
    }

    #[test]
    fn fill_rejects_wrong_kind() {
        let seq = parse_sequence(TWO).unwrap();
        let m = apply_mask(&seq, &[SegmentId::primitive(0, 0, 0)]).unwrap();
        let bad = tokenize("C 1 2 3 L 4 5").unwrap();
        assert!(matches!(m.fill(&[bad]), Err(FillError::Fragment { .. })));
        let ok = tokenize("A 200 60 40 1").unwrap();
        assert!(m.fill(&[ok]).is_ok());
    }

    #[test]
    fn candidate_matching() {
        let seq = parse_sequence(TWO).unwrap();
        let m = apply_mask(&seq, &[SegmentId::primitive(0, 0, 1), SegmentId::extrusion(1)]).unwrap();
        let good = tokenize(&TWO.replace("L 200 200", "A 210 190 30 0").replace("120 0 1 0", "90 0 1 0")).unwrap();
        assert_eq!(m.match_candidate(&good).map(|s| s.len()), Some(2));
        let bad = tokenize(&TWO.replace("L 60 200", "L 61 200")).unwrap();
        assert_eq!(m.match_candidate(&bad), None);
    }
}
