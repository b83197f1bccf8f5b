//! Run reports: `[section]` headers followed by `key = value` lines.
//!
//! Reals are written with Rust's shortest round-trip formatting so a report
//! parses back to the exact values it was written from. Missing values are
//! written as `none`.

use std::fmt::{self, Display, Write};

use sketchedit_core::engine::{EditResult, RoundRecord};
use sketchedit_core::MetricsReport;
use thiserror::Error;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Section { name: name.into(), entries: Vec::new() }
    }

    pub fn put(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn put_opt(&mut self, key: &str, value: Option<impl Display>) -> &mut Self {
        match value {
            Some(v) => self.put(key, v),
            None => self.put(key, "none"),
        }
    }

    pub fn put_list<T: Display>(&mut self, key: &str, values: impl IntoIterator<Item = T>) -> &mut Self {
        let joined: Vec<String> = values.into_iter().map(|v| v.to_string()).collect();
        self.put(key, joined.join(" "))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Parses a value; `none` and absent keys give `None`.
    pub fn num<T: std::str::FromStr>(&self, key: &str) -> Option<T> {
        self.get(key).filter(|v| *v != "none").and_then(|v| v.parse().ok())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub sections: Vec<Section>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("line {0}: entry outside any section")]
    Orphan(usize),
    #[error("line {0}: expected `key = value`")]
    Malformed(usize),
}

impl Report {
    pub fn push(&mut self, section: Section) {
        self.sections.push(section);
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// Sections whose name starts with `prefix`, in order.
    pub fn sections_with<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Section> + 'a {
        self.sections.iter().filter(move |s| s.name.starts_with(prefix))
    }

    pub fn parse(text: &str) -> Result<Self, ReportError> {
        let mut report = Report::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                report.push(Section::new(name));
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ReportError::Malformed(no + 1))?;
            let section = report.sections.last_mut().ok_or(ReportError::Orphan(no + 1))?;
            section.entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(report)
    }
}

impl Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                f.write_char('\n')?;
            }
            writeln!(f, "[{}]", s.name)?;
            for (k, v) in &s.entries {
                writeln!(f, "{k} = {v}")?;
            }
        }
        Ok(())
    }
}

pub fn metrics_section(name: &str, m: &MetricsReport) -> Section {
    let mut s = Section::new(name);
    s.put_opt("iou", m.iou)
        .put_opt("chamfer_mean", m.chamfer_mean)
        .put("edit_distance", m.edit_distance)
        .put("invalid", m.invalid)
        .put("jsd", m.jsd)
        .put("objective", m.objective);
    s
}

pub fn round_section(r: &RoundRecord) -> Section {
    let mut s = Section::new(format!("round {}", r.round));
    s.put_list("selected", &r.selected)
        .put_list("influence", r.influence.entries.iter().map(|e| format!("{}:{}", e.id, e.j)))
        .put_list("candidate_distances", &r.candidate_distances)
        .put("queue_digest", format_args!("{:016x}", r.queue_digest))
        .put("current_distance", r.current_distance)
        .put("best_distance", r.best_distance);
    s
}

/// `[result]`, `[metrics]` and one `[round k]` section per round.
pub fn edit_sections(result: &EditResult) -> Vec<Section> {
    let mut head = Section::new("result");
    head.put("rounds_used", result.rounds_used)
        .put("stop", format_args!("{:?}", result.stop))
        .put("final", sketchedit_core::serialize_sequence(&result.final_seq));
    let mut out = vec![head, metrics_section("metrics", &result.report)];
    out.extend(result.trace.iter().map(round_section));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut r = Report::default();
        let mut a = Section::new("run");
        a.put("seed", 7).put("x", 0.1f64 + 0.2).put_opt("cd", None::<f64>).put_list("ids", [1, 2, 3]);
        r.push(a);
        r.push(Section::new("empty"));
        let text = r.to_string();
        assert_eq!(text, "[run]\nseed = 7\nx = 0.30000000000000004\ncd = none\nids = 1 2 3\n\n[empty]\n");
        let back = Report::parse(&text).unwrap();
        assert_eq!(back, r);
        let run = back.section("run").unwrap();
        assert_eq!(run.num::<f64>("x"), Some(0.1 + 0.2));
        assert_eq!(run.num::<f64>("cd"), None);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(Report::parse("a = 1"), Err(ReportError::Orphan(1)));
        assert_eq!(Report::parse("[s]\nnot a pair"), Err(ReportError::Malformed(2)));
    }
}
