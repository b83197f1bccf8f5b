use std::path::Path;
use std::time::{Duration, Instant};

use sketchedit::external::ExternalGenerator;
use sketchedit::format::write_sequence;
use sketchedit_core::generator::Origin;
use sketchedit_core::mask::apply_mask;
use sketchedit_core::segment::SegmentId;
use sketchedit_core::{parse_sequence, ConstructionSequence, GenError, GenPolicy, Generator, MaskedSequence};

const SQUARE: &str = "SOL L 100 100 L 156 100 L 156 156 L 100 156 E 0 0 0 128 128 128 255 128 0 0 0 SEP EOS";

fn masked() -> MaskedSequence {
    let seq = parse_sequence(SQUARE).unwrap();
    apply_mask(&seq, &[SegmentId::primitive(0, 0, 1)]).unwrap()
}

/// A process answering every request with `valid` copies of the sequence in
/// `path` followed by enough garbage lines to make up `n`.
fn stub(path: &Path, valid: usize) -> String {
    format!(
        "while read cmd n seed; do read masked; i=0; \
         while [ $i -lt $n ]; do if [ $i -lt {valid} ]; then cat '{}'; else echo 'L L L'; fi; i=$((i+1)); done; \
         echo END; done",
        path.display()
    )
}

fn original_file(dir: &Path) -> (std::path::PathBuf, ConstructionSequence) {
    let seq = parse_sequence(SQUARE).unwrap();
    let path = dir.join("orig.seq");
    write_sequence(&path, &seq).unwrap();
    (path, seq)
}

fn origins(set: &sketchedit_core::CandidateSet) -> Vec<Origin> {
    set.candidates.iter().map(|c| c.origin).collect()
}

#[test]
fn echo_endpoint_returns_the_base() {
    let dir = tempfile::tempdir().unwrap();
    let (path, seq) = original_file(dir.path());
    let mut g = ExternalGenerator::new(stub(&path, 1000));
    let policy = GenPolicy { n: 4, ..GenPolicy::default() };
    for round in 0..2 {
        let set = g.infill(&masked(), &GenPolicy { seed: round, ..policy }).unwrap();
        assert_eq!(set.len(), 4);
        assert!(!set.fallback);
        assert!(set.sequences().all(|s| *s == seq));
        assert_eq!(origins(&set), vec![Origin::External; 4]);
    }
}

#[test]
fn garbage_is_fully_backfilled() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = original_file(dir.path());
    let mut g = ExternalGenerator::new(stub(&path, 0));
    let set = g.infill(&masked(), &GenPolicy { n: 5, ..GenPolicy::default() }).unwrap();
    assert_eq!(origins(&set), vec![Origin::Backfill; 5]);
    assert!(!set.fallback);
    let m = masked();
    for c in &set.candidates {
        assert!(sketchedit_core::validate(&c.seq).is_empty());
        assert!(m.match_candidate(&sketchedit_core::token::to_tokens(&c.seq)).is_some());
    }
}

#[test]
fn partial_reply_is_topped_up() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = original_file(dir.path());
    let mut g = ExternalGenerator::new(stub(&path, 3));
    let set = g.infill(&masked(), &GenPolicy { n: 8, ..GenPolicy::default() }).unwrap();
    let o = origins(&set);
    assert_eq!(o.iter().filter(|x| **x == Origin::External).count(), 3);
    assert_eq!(o.iter().filter(|x| **x == Origin::Backfill).count(), 5);
}

#[test]
fn unreachable_endpoint_falls_back() {
    let mut g = ExternalGenerator::new("exit 0");
    let set = g.infill(&masked(), &GenPolicy { n: 3, ..GenPolicy::default() }).unwrap();
    assert!(set.fallback);
    assert_eq!(origins(&set), vec![Origin::Backfill; 3]);
}

#[test]
fn silent_endpoint_times_out() {
    let mut g = ExternalGenerator::new("sleep 5").with_timeout(Duration::from_millis(200));
    let start = Instant::now();
    let reply = g.request("SOL MASK EOS", 2, 0);
    assert!(start.elapsed() < Duration::from_secs(3));
    assert!(matches!(reply.error, Some(GenError::EndpointUnavailable(_))), "{:?}", reply.error);
}

#[test]
fn short_or_long_replies_are_protocol_errors() {
    let mut short = ExternalGenerator::new("read a; read b; echo one; echo END; sleep 5");
    let reply = short.request("x", 2, 0);
    assert!(matches!(reply.error, Some(GenError::ProtocolError(_))), "{:?}", reply.error);
    assert_eq!(reply.lines, vec!["one".to_string()]);

    let mut long = ExternalGenerator::new("read a; read b; echo one; echo two; sleep 5");
    let reply = long.request("x", 1, 0);
    assert!(matches!(reply.error, Some(GenError::ProtocolError(_))), "{:?}", reply.error);
}

#[test]
fn request_line_format() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("request.txt");
    let cmd = format!("read a; read b; printf '%s\\n%s\\n' \"$a\" \"$b\" > '{}'; echo END", log.display());
    let mut g = ExternalGenerator::new(cmd);
    let reply = g.request(&masked().to_text(), 0, 42);
    assert!(reply.error.is_none(), "{:?}", reply.error);
    let sent = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = sent.lines().collect();
    assert_eq!(lines[0], "INFILL 0 42");
    assert_eq!(lines[1], masked().to_text());
    assert!(lines[1].contains("MASK"));
}
