//! The construction-sequence data model.
//!
//! A sequence is an ordered list of sketch / extrusion pairs. Sketches hold
//! loops of primitives; every continuous value is a [`QuantizedParam`].
//! Line and arc loops start at the endpoint of their final primitive, so a
//! loop is closed by construction and only its non-degeneracy needs checking
//! (see [`crate::validate`]).

use alloc::vec::Vec;

use crate::quant::{Channel, QuantizedParam};

pub type Q = QuantizedParam;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Primitive {
    Line { end: [Q; 2] },
    Arc { end: [Q; 2], sweep: Q, ccw: bool },
    Circle { center: [Q; 2], radius: Q },
}

impl Primitive {
    pub fn line(x: u8, y: u8) -> Self {
        Primitive::Line { end: [Q::new(x), Q::new(y)] }
    }

    pub fn arc(x: u8, y: u8, sweep: u8, ccw: bool) -> Self {
        Primitive::Arc { end: [Q::new(x), Q::new(y)], sweep: Q::new(sweep), ccw }
    }

    pub fn circle(cx: u8, cy: u8, r: u8) -> Self {
        Primitive::Circle { center: [Q::new(cx), Q::new(cy)], radius: Q::new(r) }
    }

    /// Quantized endpoint for lines and arcs; `None` for circles.
    pub fn end_bins(&self) -> Option<[Q; 2]> {
        match self {
            Primitive::Line { end } | Primitive::Arc { end, .. } => Some(*end),
            Primitive::Circle { .. } => None,
        }
    }

    /// Endpoint in sketch coordinates.
    pub fn end_point(&self) -> Option<[f64; 2]> {
        self.end_bins().map(|e| point2(e))
    }

    pub fn is_circle(&self) -> bool {
        matches!(self, Primitive::Circle { .. })
    }

    /// Number of numeric fields this primitive carries in the token stream.
    pub fn field_count(&self) -> usize {
        match self {
            Primitive::Line { .. } => 2,
            Primitive::Arc { .. } => 4,
            Primitive::Circle { .. } => 3,
        }
    }
}

pub(crate) fn point2(bins: [Q; 2]) -> [f64; 2] {
    [bins[0].dequantize(Channel::Coord2D), bins[1].dequantize(Channel::Coord2D)]
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Loop {
    pub primitives: Vec<Primitive>,
}

impl Loop {
    pub fn new(primitives: Vec<Primitive>) -> Self {
        Loop { primitives }
    }

    /// Start point of a line/arc chain, i.e. the endpoint of the last primitive.
    pub fn start_point(&self) -> Option<[f64; 2]> {
        self.primitives.last().and_then(Primitive::end_point)
    }

    pub fn is_circle(&self) -> bool {
        self.primitives.len() == 1 && self.primitives[0].is_circle()
    }
}

/// A 2D profile. The first loop bounds material; later loops are holes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sketch {
    pub loops: Vec<Loop>,
}

impl Sketch {
    pub fn new(loops: Vec<Loop>) -> Self {
        Sketch { loops }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoolOp {
    New,
    Join,
    Cut,
    Intersect,
}

impl BoolOp {
    pub const ALL: [BoolOp; 4] = [BoolOp::New, BoolOp::Join, BoolOp::Cut, BoolOp::Intersect];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(usize::from(code)).copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtentType {
    OneSided,
    Symmetric,
    TwoSided,
}

impl ExtentType {
    pub const ALL: [ExtentType; 3] = [ExtentType::OneSided, ExtentType::Symmetric, ExtentType::TwoSided];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(usize::from(code)).copied()
    }
}

/// Numeric fields of an extrusion block, in token order.
pub const EXTRUSION_NUMERIC_FIELDS: usize = 9;
/// All fields of an extrusion block, including the two enum codes.
pub const EXTRUSION_FIELDS: usize = 11;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Extrusion {
    /// Sketch-plane orientation angles (θ, φ, γ).
    pub orientation: [Q; 3],
    /// Sketch-plane origin in model space.
    pub origin: [Q; 3],
    pub scale: Q,
    pub dist_pos: Q,
    pub dist_neg: Q,
    pub bool_op: BoolOp,
    pub extent: ExtentType,
}

impl Extrusion {
    /// Identity orientation, origin at the given bins, scale 1.
    pub fn simple(origin: [u8; 3], dist_pos: u8, dist_neg: u8, bool_op: BoolOp, extent: ExtentType) -> Self {
        Extrusion {
            orientation: [Q::MIN; 3],
            origin: origin.map(Q::new),
            scale: Q::MAX,
            dist_pos: Q::new(dist_pos),
            dist_neg: Q::new(dist_neg),
            bool_op,
            extent,
        }
    }

    /// The nine continuous fields in token order.
    pub fn numeric(&self) -> [Q; EXTRUSION_NUMERIC_FIELDS] {
        let [a, b, c] = self.orientation;
        let [x, y, z] = self.origin;
        [a, b, c, x, y, z, self.scale, self.dist_pos, self.dist_neg]
    }

    pub fn numeric_mut(&mut self, i: usize) -> &mut Q {
        match i {
            0..=2 => &mut self.orientation[i],
            3..=5 => &mut self.origin[i - 3],
            6 => &mut self.scale,
            7 => &mut self.dist_pos,
            8 => &mut self.dist_neg,
            _ => panic!("extrusion numeric field {i} out of range"),
        }
    }

    pub fn numeric_channel(i: usize) -> Channel {
        match i {
            0..=2 => Channel::Angle,
            3..=5 => Channel::Coord3D,
            6 => Channel::Scale,
            _ => Channel::Distance,
        }
    }

    /// Signed extent interval `[lo, hi]` along the sketch normal.
    pub fn interval(&self) -> (f64, f64) {
        let dp = self.dist_pos.dequantize(Channel::Distance);
        let dn = self.dist_neg.dequantize(Channel::Distance);
        match self.extent {
            ExtentType::OneSided => (0.0, dp),
            ExtentType::Symmetric => (-dp / 2.0, dp / 2.0),
            ExtentType::TwoSided => (-dn, dp),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pair {
    pub sketch: Sketch,
    pub extrusion: Extrusion,
}

impl Pair {
    pub fn new(sketch: Sketch, extrusion: Extrusion) -> Self {
        Pair { sketch, extrusion }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConstructionSequence {
    pub pairs: Vec<Pair>,
}

impl ConstructionSequence {
    pub fn new(pairs: Vec<Pair>) -> Self {
        ConstructionSequence { pairs }
    }

    pub fn primitive_count(&self) -> usize {
        self.pairs
            .iter()
            .flat_map(|p| p.sketch.loops.iter())
            .map(|l| l.primitives.len())
            .sum()
    }
}
