//! 8-bit parameter quantization.
//!
//! Every continuous parameter of a sequence is stored as one of 256 bins.
//! Each parameter belongs to a [`Channel`] that fixes the real interval the
//! bins span; bin 0 and bin 255 land exactly on the interval ends.

use core::fmt;

use crate::math::{round, TAU};

/// Number of quantization bins.
pub const BINS: u32 = 256;

/// A parameter quantized to one of 256 bins.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuantizedParam(u8);

impl QuantizedParam {
    pub const MIN: QuantizedParam = QuantizedParam(0);
    pub const MAX: QuantizedParam = QuantizedParam(255);

    pub const fn new(bin: u8) -> Self {
        QuantizedParam(bin)
    }

    /// Returns `None` when `bin` is outside `[0, 255]`.
    pub fn from_i64(bin: i64) -> Option<Self> {
        u8::try_from(bin).ok().map(QuantizedParam)
    }

    pub const fn bin(self) -> u8 {
        self.0
    }

    pub fn dequantize(self, channel: Channel) -> f64 {
        dequantize(self, channel)
    }
}

impl From<u8> for QuantizedParam {
    fn from(bin: u8) -> Self {
        QuantizedParam(bin)
    }
}

impl fmt::Display for QuantizedParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The real-valued range a quantized parameter lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Sketch-plane coordinates, `[-0.5, 0.5]`.
    Coord2D,
    /// Model-space coordinates, `[-0.5, 0.5]`.
    Coord3D,
    /// Angles in radians, `[0, 2π]`.
    Angle,
    /// Profile scale, `(0, 1]` (bin 0 maps to 0 and is rejected by validation).
    Scale,
    /// Lengths: extrusion distances and circle radii, `[0, 1]`.
    Distance,
}

impl Channel {
    pub const ALL: [Channel; 5] = [
        Channel::Coord2D,
        Channel::Coord3D,
        Channel::Angle,
        Channel::Scale,
        Channel::Distance,
    ];

    pub fn range(self) -> (f64, f64) {
        match self {
            Channel::Coord2D | Channel::Coord3D => (-0.5, 0.5),
            Channel::Angle => (0.0, TAU),
            Channel::Scale | Channel::Distance => (0.0, 1.0),
        }
    }

    /// Width of one bin in channel units.
    pub fn step(self) -> f64 {
        let (lo, hi) = self.range();
        (hi - lo) / f64::from(BINS - 1)
    }
}

pub fn dequantize(p: QuantizedParam, channel: Channel) -> f64 {
    let (lo, hi) = channel.range();
    lo + (hi - lo) * f64::from(p.0) / f64::from(BINS - 1)
}

/// Nearest bin for a real value; values outside the channel range clamp.
pub fn quantize(x: f64, channel: Channel) -> QuantizedParam {
    let (lo, hi) = channel.range();
    let t = round((x - lo) / (hi - lo) * f64::from(BINS - 1));
    QuantizedParam(t.clamp(0.0, 255.0) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coord_midpoint_bin() {
        let v = dequantize(QuantizedParam::new(128), Channel::Coord2D);
        assert!((v - (-0.5 + 128.0 / 255.0)).abs() < 1e-15);
        assert!((v - 0.00196).abs() < 1e-5);
    }

    #[test]
    fn angle_endpoints() {
        assert_eq!(dequantize(QuantizedParam::MIN, Channel::Angle), 0.0);
        assert!((dequantize(QuantizedParam::MAX, Channel::Angle) - TAU).abs() < 1e-12);
    }

    #[test]
    fn every_bin_round_trips_on_every_channel() {
        for ch in Channel::ALL {
            for b in 0..=255u8 {
                let p = QuantizedParam::new(b);
                assert_eq!(quantize(dequantize(p, ch), ch), p, "{ch:?} bin {b}");
            }
        }
    }

    #[test]
    fn quantize_clamps() {
        assert_eq!(quantize(7.0, Channel::Coord2D), QuantizedParam::MAX);
        assert_eq!(quantize(-7.0, Channel::Distance), QuantizedParam::MIN);
    }

    #[test]
    fn from_i64_rejects_out_of_range() {
        assert!(QuantizedParam::from_i64(256).is_none());
        assert!(QuantizedParam::from_i64(-1).is_none());
        assert_eq!(QuantizedParam::from_i64(255), Some(QuantizedParam::MAX));
    }
}
