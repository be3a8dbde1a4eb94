//! Points of the open unit interval stored together with their complement.
//!
//! Integrands here are singular at both ends of (0, 1). Near the upper end
//! `1 - u` cannot be recovered from `u` once `u` rounds to 1, so every point
//! carries both coordinates and each is accurate relative to itself.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitPoint {
    /// The coordinate `u`.
    pub u: f64,
    /// The complement `1 - u`.
    pub c: f64,
}

impl UnitPoint {
    /// A point given by its lower coordinate.
    pub fn new(u: f64) -> Self {
        Self { u, c: 1.0 - u }
    }

    /// A point given by its distance from 1.
    pub fn from_complement(c: f64) -> Self {
        Self { u: 1.0 - c, c }
    }

    pub fn from_parts(u: f64, c: f64) -> Self {
        Self { u, c }
    }

    /// The point whose `ln u` equals `log_u` (which must be negative).
    pub fn from_ln(log_u: f64) -> Self {
        Self {
            u: log_u.exp(),
            c: -log_u.exp_m1(),
        }
    }

    /// The point whose `ln(1 - u)` equals `log_c`.
    pub fn from_ln_complement(log_c: f64) -> Self {
        Self {
            u: -log_c.exp_m1(),
            c: log_c.exp(),
        }
    }

    /// Mirror image `1 - u`.
    pub fn flip(self) -> Self {
        Self { u: self.c, c: self.u }
    }

    pub fn ln(self) -> f64 {
        if self.u < 0.5 {
            self.u.ln()
        } else {
            (-self.c).ln_1p()
        }
    }

    pub fn ln_complement(self) -> f64 {
        if self.c < 0.5 {
            self.c.ln()
        } else {
            (-self.u).ln_1p()
        }
    }

    pub fn is_interior(self) -> bool {
        self.u > 0.0 && self.c > 0.0
    }

    /// Affine interpolation `lo + t (hi - lo)` carried out on whichever
    /// coordinate is small, so the result keeps full relative accuracy.
    pub fn lerp(lo: Self, hi: Self, t: f64) -> Self {
        if lo.u + hi.u <= lo.c + hi.c {
            Self::new(lo.u + t * (hi.u - lo.u))
        } else {
            Self::from_complement(lo.c - t * (lo.c - hi.c))
        }
    }
}
