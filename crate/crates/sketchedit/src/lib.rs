//! Standard-library companion to `sketchedit-core`: file formats, the
//! external generator bridge, synthetic triplet corpora, batch evaluation
//! and the `sketchedit` command-line tool.

pub mod cli;
pub mod corpus;
pub mod eval;
pub mod external;
pub mod format;
pub mod report;
pub mod synth;
