//! Product-rule integration over the unit square.
//!
//! Off-diagonal panel pairs use the tensor Gauss rule. A diagonal cell is
//! split along `x = y` into two triangles, each integrated as an iterated
//! integral whose inner range ends on the diagonal, so integrands with a
//! kink on the diagonal (such as the bridge kernel) stay smooth on every
//! piece. Accuracy is checked by comparing against the mesh with every
//! panel bisected.

use rayon::prelude::*;

use super::mesh::{base_panels, Interval, Node, Panel};
use super::{rounding_floor, Estimate, QuadratureSpec};
use crate::error::{Error, Result};
use crate::unit::UnitPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// `g(v, w) = g(w, v)`: only the triangle `v <= w` is evaluated.
    Symmetric,
    General,
}

/// `∫∫_{(0,1)^2} g(v, w) dv dw`.
pub fn integrate_2d<G>(g: G, symmetry: Symmetry, spec: &QuadratureSpec) -> Result<Estimate>
where
    G: Fn(UnitPoint, UnitPoint) -> f64 + Sync,
{
    integrate_2d_on(g, symmetry, Interval::unit(), spec)
}

/// `∫∫_{I x I} g(v, w) dv dw`.
pub fn integrate_2d_on<G>(
    g: G,
    symmetry: Symmetry,
    interval: Interval,
    spec: &QuadratureSpec,
) -> Result<Estimate>
where
    G: Fn(UnitPoint, UnitPoint) -> f64 + Sync,
{
    spec.validate()?;
    let base = base_panels(interval);
    let mut coarse = level_sum(&g, symmetry, &base, 0);
    for level in 1..=spec.max_levels() {
        let fine = level_sum(&g, symmetry, &base, level);
        if !fine.total.is_finite() {
            return Err(Error::Quadrature("integrand produced a non-finite value".into()));
        }
        let diff = (fine.total - coarse.total).abs();
        let tol = spec.abs_tol.max(spec.rel_tol * fine.total.abs());
        if diff <= tol {
            if fine.outer.abs() > tol {
                return Err(Error::Quadrature(format!(
                    "integrand does not decay toward the boundary (outermost cells carry {:.3e})",
                    fine.outer
                )));
            }
            return Ok(Estimate {
                value: fine.total,
                error: diff.max(rounding_floor(fine.total)),
            });
        }
        coarse = fine;
    }
    Err(Error::Quadrature(format!(
        "2-D refinement exhausted after {} levels (last value {:.6e})",
        spec.max_levels(),
        coarse.total
    )))
}

struct LevelSum {
    total: f64,
    /// Part of the total coming from cells that touch an open edge.
    outer: f64,
}

fn level_sum<G>(g: &G, symmetry: Symmetry, base: &[Panel], level: u32) -> LevelSum
where
    G: Fn(UnitPoint, UnitPoint) -> f64 + Sync,
{
    let panels: Vec<Panel> = base.iter().flat_map(|p| p.subdivide(1 << level)).collect();
    let nodes: Vec<[Node; 15]> = panels.iter().map(|p| p.nodes()).collect();

    let pair = |x: UnitPoint, y: UnitPoint| -> f64 {
        // x lies below y.
        match symmetry {
            Symmetry::Symmetric => 2.0 * g(x, y),
            Symmetry::General => g(x, y) + g(y, x),
        }
    };

    // One column per upper panel q: the cells (p, q) with p < q plus the
    // diagonal cell. Columns are reduced in a fixed order.
    let columns: Vec<(f64, f64)> = (0..panels.len())
        .into_par_iter()
        .map(|q| {
            let pq = &panels[q];
            let mut col = 0.0;
            let mut outer = 0.0;
            for (p, pp) in panels[..q].iter().enumerate() {
                let mut cell = 0.0;
                for y in nodes[q].iter() {
                    let mut inner = 0.0;
                    for x in nodes[p].iter() {
                        inner += x.w * pair(x.x, y.x);
                    }
                    cell += y.w * inner;
                }
                col += cell;
                if pp.open || pq.open {
                    outer += cell;
                }
            }
            let mut diag = 0.0;
            for y in nodes[q].iter() {
                let (a, b) = pq.below(y.s);
                let mut inner = 0.0;
                for x in pq.nodes_on(a, b).iter() {
                    inner += x.w * pair(x.x, y.x);
                }
                diag += y.w * inner;
            }
            col += diag;
            if pq.open {
                outer += diag;
            }
            (col, outer)
        })
        .collect();

    let mut total = 0.0;
    let mut outer = 0.0;
    for (c, o) in columns {
        total += c;
        outer += o;
    }
    LevelSum { total, outer }
}
