use std::fmt;

/// A signed angle in degrees, always held in `(-180, 180]`.
///
/// Headings and bearings use the compass convention: north is 0°, east is
/// +90°, angles grow clockwise.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct AngleDeg(f64);

impl AngleDeg {
    pub const ZERO: AngleDeg = AngleDeg(0.0);

    pub fn new(degrees: f64) -> Self {
        AngleDeg(normalize_deg(degrees))
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }

    /// Shortest signed rotation taking `other` onto `self`, in `(-180, 180]`.
    pub fn diff(self, other: AngleDeg) -> AngleDeg {
        AngleDeg::new(self.0 - other.0)
    }

    /// Compass bearing of the vector `(dx, dy)` (x east, y north).
    pub fn bearing(dx: f64, dy: f64) -> AngleDeg {
        AngleDeg::new(dx.atan2(dy).to_degrees())
    }
}

impl std::ops::Add for AngleDeg {
    type Output = AngleDeg;
    fn add(self, rhs: AngleDeg) -> AngleDeg {
        AngleDeg::new(self.0 + rhs.0)
    }
}

impl std::ops::Neg for AngleDeg {
    type Output = AngleDeg;
    fn neg(self) -> AngleDeg {
        AngleDeg::new(-self.0)
    }
}

impl fmt::Display for AngleDeg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.0)
    }
}

/// Wraps any finite angle into `(-180, 180]`.
pub fn normalize_deg(degrees: f64) -> f64 {
    let r = degrees.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}
