//! Panels of the graded mesh.
//!
//! Each half of (0, 1) is parameterized by `s >= 0` through
//! `x = e^(-s) / 2` (lower half) or `1 - x = e^(-s) / 2` (upper half). Panels
//! are uniform or dyadic in `s`, which makes them geometrically graded in `x`
//! toward each endpoint, and the grading can continue until the coordinate
//! underflows. Endpoint power singularities become exponential decay in `s`.

use super::gauss;
use crate::unit::UnitPoint;

/// Largest `s` used for an open endpoint: `e^(-700) / 2` is still a normal
/// double.
pub const S_MAX: f64 = 700.0;

/// Breakpoints of the coarsest mesh in `s`, clipped to each panel range.
const BASE_BREAKS: [f64; 12] = [
    0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    Lower,
    Upper,
}

/// A closed sub-interval `[lo, hi]` of `[0, 1]`; endpoints at 0 or 1 are
/// treated as open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: UnitPoint,
    pub hi: UnitPoint,
}

impl Interval {
    pub fn unit() -> Self {
        Self {
            lo: UnitPoint::from_parts(0.0, 1.0),
            hi: UnitPoint::from_parts(1.0, 0.0),
        }
    }

    pub fn new(lo: UnitPoint, hi: UnitPoint) -> Self {
        Self { lo, hi }
    }

    /// `[eps, 1 - eps]`.
    pub fn symmetric_window(eps: f64) -> Self {
        Self {
            lo: UnitPoint::new(eps),
            hi: UnitPoint::from_complement(eps),
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo.u < self.hi.u || self.lo.c > self.hi.c)
    }
}

fn s_of(x: f64) -> f64 {
    if x <= 0.0 {
        S_MAX
    } else {
        (-(2.0 * x).ln()).clamp(0.0, S_MAX)
    }
}

/// A panel `[s0, s1]` of one half. `open` marks a panel that touches an
/// open endpoint at `s = S_MAX`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub half: Half,
    pub s0: f64,
    pub s1: f64,
    pub open: bool,
}

/// A quadrature node: position, combined weight (including the Jacobian).
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub x: UnitPoint,
    pub w: f64,
    pub s: f64,
}

impl Panel {
    pub fn point(&self, s: f64) -> UnitPoint {
        let t = 0.5 * (-s).exp();
        match self.half {
            Half::Lower => UnitPoint::from_parts(t, 1.0 - t),
            Half::Upper => UnitPoint::from_parts(1.0 - t, t),
        }
    }

    fn jacobian(s: f64) -> f64 {
        0.5 * (-s).exp()
    }

    /// Gauss nodes on `[a, b]` of this panel's `s` range.
    pub fn nodes_on(&self, a: f64, b: f64) -> [Node; gauss::ORDER] {
        let r = gauss::rule();
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        std::array::from_fn(|k| {
            let s = mid + half * r.nodes[k];
            Node {
                x: self.point(s),
                w: r.weights[k] * half * Self::jacobian(s),
                s,
            }
        })
    }

    pub fn nodes(&self) -> [Node; gauss::ORDER] {
        self.nodes_on(self.s0, self.s1)
    }

    /// The part of the panel (in `s`) lying below the point with parameter
    /// `s` in the ordering of `x`.
    pub fn below(&self, s: f64) -> (f64, f64) {
        match self.half {
            Half::Lower => (s, self.s1),
            Half::Upper => (self.s0, s),
        }
    }

    pub fn split(&self) -> (Panel, Panel) {
        let m = 0.5 * (self.s0 + self.s1);
        (
            Panel { s1: m, open: false, ..*self },
            Panel { s0: m, open: self.open, ..*self },
        )
    }

    /// `parts` equal pieces in `s`, ordered by increasing `x`.
    pub fn subdivide(&self, parts: usize) -> Vec<Panel> {
        let h = (self.s1 - self.s0) / parts as f64;
        let mut pieces: Vec<Panel> = (0..parts)
            .map(|i| {
                let s0 = self.s0 + h * i as f64;
                let s1 = if i + 1 == parts { self.s1 } else { s0 + h };
                Panel {
                    half: self.half,
                    s0,
                    s1,
                    open: self.open && i + 1 == parts,
                }
            })
            .collect();
        if self.half == Half::Lower {
            pieces.reverse();
        }
        pieces
    }
}

/// Base panels covering `interval`, ordered by increasing `x`.
pub fn base_panels(interval: Interval) -> Vec<Panel> {
    let mut panels = Vec::new();
    if interval.is_empty() {
        return panels;
    }
    // Lower half: x in [lo, min(hi, 1/2)].
    if interval.lo.u < 0.5 {
        let s_top = if interval.hi.u < 0.5 { s_of(interval.hi.u) } else { 0.0 };
        let s_bottom = s_of(interval.lo.u);
        let open = interval.lo.u <= 0.0;
        let mut lower = panels_between(Half::Lower, s_top, s_bottom, open);
        lower.reverse();
        panels.extend(lower);
    }
    // Upper half: x in [max(lo, 1/2), hi].
    if interval.hi.u > 0.5 {
        let s_bottom = if interval.lo.u > 0.5 { s_of(interval.lo.c) } else { 0.0 };
        let s_top = s_of(interval.hi.c);
        let open = interval.hi.c <= 0.0;
        panels.extend(panels_between(Half::Upper, s_bottom, s_top, open));
    }
    panels
}

fn panels_between(half: Half, a: f64, b: f64, open: bool) -> Vec<Panel> {
    let mut breaks = vec![a];
    breaks.extend(BASE_BREAKS.iter().copied().filter(|&s| s > a && s < b));
    breaks.push(b);
    breaks.dedup();
    let count = breaks.len().saturating_sub(1);
    breaks
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] > w[0])
        .map(|(i, w)| Panel {
            half,
            s0: w[0],
            s1: w[1],
            open: open && i + 1 == count,
        })
        .collect()
}
