//! Geometry-driven editing of sketch-extrude construction sequences.
//!
//! The crate is `no_std` and only needs `alloc`. It contains the sequence
//! grammar, the tSDF renderer, shape metrics, and the
//! plan / generate / verify search loop. File formats, the external
//! generator bridge and the command-line tool live in the `sketchedit`
//! crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod edit_distance;
pub mod engine;
pub mod generator;
pub mod geom;
pub mod mask;
pub mod metrics;
pub mod planner;
pub mod quant;
pub mod random;
pub mod segment;
pub mod seq;
pub mod token;
pub mod validate;

mod hash;
mod math;

pub use edit_distance::{edit_distance, levenshtein};
pub use engine::{Ablation, EditResult, EngineConfig, EngineError, Latent, PriorityQueue};
pub use generator::{CandidateSet, GenError, GenPolicy, Generator, SurrogateGenerator};
pub use geom::{GridSpec, PointSet, TsdfGrid};
pub use mask::{MaskError, MaskedSequence};
pub use metrics::MetricsReport;
pub use planner::{InfluenceVector, PlanConfig};
pub use quant::{Channel, QuantizedParam};
pub use segment::{Granularity, Segment, SegmentId, SegmentKind};
pub use seq::{BoolOp, ConstructionSequence, ExtentType, Extrusion, Loop, Pair, Primitive, Sketch};
pub use token::{parse_sequence, serialize_sequence, ParseError, Token};
pub use validate::{validate, Violation};

