//! Token-level Levenshtein distance between serialized sequences.

use alloc::vec::Vec;

use crate::seq::ConstructionSequence;
use crate::token::to_tokens;

/// Edit distance between the canonical token streams of two sequences,
/// structural markers included.
pub fn edit_distance(a: &ConstructionSequence, b: &ConstructionSequence) -> usize {
    levenshtein(&to_tokens(a), &to_tokens(b))
}

/// Unit-cost Levenshtein distance over arbitrary slices, two-row DP.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0usize; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::parse_sequence;

    #[test]
    fn basic() {
        assert_eq!(levenshtein(b"kitten", b"sitting"), 3);
        assert_eq!(levenshtein::<u8>(b"", b"abc"), 3);
        assert_eq!(levenshtein(b"abc", b"abc"), 0);
    }

    #[test]
    fn single_substitution() {
        let a = parse_sequence("SOL C 128 128 64 E 0 0 0 128 128 128 255 128 0 0 0 SEP EOS").unwrap();
        let b = parse_sequence("SOL C 128 128 65 E 0 0 0 128 128 128 255 128 0 0 0 SEP EOS").unwrap();
        assert_eq!(edit_distance(&a, &a), 0);
        assert_eq!(edit_distance(&a, &b), 1);
    }
}
