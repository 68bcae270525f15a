//! Measurement directions and binary outcomes.

use crate::error::{Error, Result};

/// Tolerance on the unit-norm invariant of [`Direction`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// The canonical four-angle layout (degrees) used by the bench:
/// station-1 settings at 0 and 90, station-2 settings at 45 and 135.
pub const CANONICAL_ANGLES_DEG: [f64; 4] = [0.0, 90.0, 45.0, 135.0];

/// A unit vector in 3-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction([f64; 3]);

impl Direction {
    /// Builds a direction from components, rejecting non-unit vectors.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NonUnitDirection { x, y, z, norm });
        }
        Ok(Direction([x, y, z]))
    }

    /// Planar constructor: an angle in degrees maps to (cos, sin, 0).
    pub fn from_degrees(angle_deg: f64) -> Self {
        let rad = angle_deg.to_radians();
        Direction([rad.cos(), rad.sin(), 0.0])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    /// Dot product, clamped to [-1, 1] to absorb rounding of unit inputs.
    pub fn dot(&self, other: &Direction) -> f64 {
        let [x1, y1, z1] = self.0;
        let [x2, y2, z2] = other.0;
        (x1 * x2 + y1 * y2 + z1 * z2).clamp(-1.0, 1.0)
    }

    /// Angle of a planar direction, in radians. Errors off the z = 0 plane.
    pub fn planar_angle(&self) -> Result<f64> {
        let [x, y, z] = self.0;
        if z.abs() > UNIT_NORM_TOL {
            return Err(Error::NonPlanarDirection { z });
        }
        Ok(y.atan2(x))
    }
}

/// The two analyzer directions available at each station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettingMap {
    station1: [Direction; 2],
    station2: [Direction; 2],
}

impl SettingMap {
    pub fn new(station1: [Direction; 2], station2: [Direction; 2]) -> Self {
        SettingMap { station1, station2 }
    }

    /// Builds a planar map from four angles in degrees: a0, a1, b0, b1.
    pub fn from_degrees(a0: f64, a1: f64, b0: f64, b1: f64) -> Self {
        SettingMap {
            station1: [Direction::from_degrees(a0), Direction::from_degrees(a1)],
            station2: [Direction::from_degrees(b0), Direction::from_degrees(b1)],
        }
    }

    /// The canonical layout of [`CANONICAL_ANGLES_DEG`].
    pub fn canonical() -> Self {
        let [a0, a1, b0, b1] = CANONICAL_ANGLES_DEG;
        Self::from_degrees(a0, a1, b0, b1)
    }

    pub fn station1(&self, setting: crate::table::BinarySetting) -> &Direction {
        &self.station1[setting.bit() as usize]
    }

    pub fn station2(&self, setting: crate::table::BinarySetting) -> &Direction {
        &self.station2[setting.bit() as usize]
    }
}

/// A measurement outcome, one of the two admissible values -1 and +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Minus,
    Plus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_sign(sign: i8) -> Result<Self> {
        match sign {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(Error::InvalidDiscrete {
                what: "outcome",
                value: other as i64,
                expected: "-1 or +1",
            }),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.sign())
    }
}
