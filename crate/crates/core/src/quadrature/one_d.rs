//! Globally adaptive 1-D integration on the graded mesh.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::mesh::{base_panels, Interval, Panel};
use super::{Estimate, QuadratureSpec};
use crate::error::{Error, Result};
use crate::unit::UnitPoint;

/// Evaluation budget per integral; far above what any integrand here needs.
const MAX_PANELS: usize = 200_000;

struct Work<const M: usize> {
    panel: Panel,
    depth: u32,
    value: [f64; M],
    error: f64,
}

impl<const M: usize> PartialEq for Work<M> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const M: usize> Eq for Work<M> {}
impl<const M: usize> PartialOrd for Work<M> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const M: usize> Ord for Work<M> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss<const M: usize, F>(f: &F, panel: &Panel) -> [f64; M]
where
    F: Fn(UnitPoint) -> [f64; M],
{
    let mut acc = [0.0; M];
    for node in panel.nodes() {
        let v = f(node.x);
        for i in 0..M {
            acc[i] += node.w * v[i];
        }
    }
    acc
}

fn assess<const M: usize, F>(f: &F, panel: Panel, depth: u32) -> Work<M>
where
    F: Fn(UnitPoint) -> [f64; M],
{
    let whole = gauss(f, &panel);
    let (l, r) = panel.split();
    let left = gauss(f, &l);
    let right = gauss(f, &r);
    let mut value = [0.0; M];
    let mut error = 0.0f64;
    for i in 0..M {
        value[i] = left[i] + right[i];
        error = error.max((value[i] - whole[i]).abs());
    }
    if error.is_nan() {
        error = f64::INFINITY;
    }
    Work { panel, depth, value, error }
}

fn tolerance<const M: usize>(spec: &QuadratureSpec, total: &[f64; M]) -> f64 {
    let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    spec.abs_tol.max(spec.rel_tol * scale)
}

/// Integrates a vector-valued function over `interval`; all components share
/// the mesh and every evaluation.
pub fn integrate_vec<const M: usize, F>(
    f: F,
    interval: Interval,
    spec: &QuadratureSpec,
) -> Result<[Estimate; M]>
where
    F: Fn(UnitPoint) -> [f64; M],
{
    spec.validate()?;
    let mut heap: BinaryHeap<Work<M>> = base_panels(interval)
        .into_iter()
        .map(|p| assess(&f, p, 0))
        .collect();
    let mut processed = heap.len();

    loop {
        let mut total = [0.0; M];
        let mut err = 0.0;
        for w in heap.iter() {
            for i in 0..M {
                total[i] += w.value[i];
            }
            err += w.error;
        }
        let tol = tolerance(spec, &total);
        if !err.is_finite() || total.iter().any(|v| !v.is_finite()) {
            return Err(Error::Quadrature(
                "integrand produced a non-finite value".into(),
            ));
        }
        if err <= tol {
            check_open_tails(&f, &heap, tol)?;
            let mut out = [Estimate { value: 0.0, error: 0.0 }; M];
            for i in 0..M {
                out[i] = Estimate { value: total[i], error: err };
            }
            return Ok(out);
        }
        let worst = heap.pop().expect("heap is never empty while refining");
        if worst.depth >= spec.max_depth || processed >= MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "refinement exhausted (depth {}, {} panels) with error estimate {:.3e} above tolerance {:.3e}",
                worst.depth, processed, err, tol
            )));
        }
        let (l, r) = worst.panel.split();
        heap.push(assess(&f, l, worst.depth + 1));
        heap.push(assess(&f, r, worst.depth + 1));
        processed += 2;
    }
}

/// An integrand that has not decayed by the open end of the mesh is either
/// divergent or too singular for the mesh; either way the sum is not an
/// approximation of the integral.
fn check_open_tails<const M: usize, F>(f: &F, heap: &BinaryHeap<Work<M>>, tol: f64) -> Result<()>
where
    F: Fn(UnitPoint) -> [f64; M],
{
    for w in heap.iter().filter(|w| w.panel.open) {
        let v = gauss(f, &w.panel);
        let mag = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if mag > tol {
            return Err(Error::Quadrature(format!(
                "integrand does not decay toward the endpoint (outermost panel carries {mag:.3e})"
            )));
        }
    }
    Ok(())
}

pub fn integrate<F>(f: F, interval: Interval, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(UnitPoint) -> f64,
{
    let [e] = integrate_vec(|x| [f(x)], interval, spec)?;
    Ok(e)
}
