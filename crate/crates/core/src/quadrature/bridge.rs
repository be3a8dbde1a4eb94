//! Quadratic forms of the bridge kernel.
//!
//! For functions `F_1..F_M` on (0, 1) and a nondecreasing coordinate change
//! `m`, [`bridge_gram`] computes every
//! `G_ij = ∫∫ K(m(x), m(y)) F_i(x) F_j(y) dx dy`.
//! For `x < y` the kernel factors as `m(x) (1 - m(y))`, so the cells off the
//! diagonal reduce to prefix sums of panel moments and only diagonal cells
//! need nested evaluation. The cost is linear in the number of panels.

use rayon::prelude::*;

use super::mesh::{base_panels, Interval, Node, Panel};
use super::one_d;
use super::{rounding_floor, QuadratureSpec};
use crate::error::{Error, Result};
use crate::unit::UnitPoint;

/// Matrix of kernel forms with entrywise error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gram<const M: usize> {
    pub value: [[f64; M]; M],
    pub error: [[f64; M]; M],
}

/// A function sample used by the kernel forms: the kernel coordinate `m(x)`
/// and the function values there. `None` marks a point whose image is not
/// representable (deep in an endpoint tail) and contributes nothing.
pub type KernelSample<const M: usize> = Option<(UnitPoint, [f64; M])>;

struct Level<const M: usize> {
    value: [[f64; M]; M],
    outer: [[f64; M]; M],
}

pub fn bridge_gram<const M: usize, F>(f: F, interval: Interval, spec: &QuadratureSpec) -> Result<Gram<M>>
where
    F: Fn(UnitPoint) -> KernelSample<M> + Sync,
{
    spec.validate()?;
    let base = base_panels(interval);
    let mut coarse = level(&f, &base, 0);
    for lv in 1..=spec.max_levels() {
        let fine = level(&f, &base, lv);
        if fine.value.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Quadrature("kernel form produced a non-finite value".into()));
        }
        let mut ok = true;
        let mut error = [[0.0; M]; M];
        let mut tol = [[0.0; M]; M];
        for i in 0..M {
            for j in 0..M {
                let scale = (fine.value[i][i] * fine.value[j][j]).abs().sqrt();
                tol[i][j] = spec.abs_tol.max(spec.rel_tol * scale);
                let diff = (fine.value[i][j] - coarse.value[i][j]).abs();
                error[i][j] = diff.max(rounding_floor(scale));
                ok &= diff <= tol[i][j];
            }
        }
        if ok {
            for i in 0..M {
                for j in 0..M {
                    if fine.outer[i][j].abs() > tol[i][j] {
                        return Err(Error::Quadrature(format!(
                            "kernel form does not converge at the boundary (outermost cells carry {:.3e})",
                            fine.outer[i][j]
                        )));
                    }
                }
            }
            return Ok(Gram { value: fine.value, error });
        }
        coarse = fine;
    }
    Err(Error::Quadrature(format!(
        "kernel form refinement exhausted after {} levels",
        spec.max_levels()
    )))
}

struct PanelMoments<const M: usize> {
    /// `Σ w m F_i` over the panel.
    lower: [f64; M],
    /// `Σ w (1 - m) F_i` over the panel.
    upper: [f64; M],
    /// Contribution of the diagonal cell.
    diag: [[f64; M]; M],
}

fn weighted<const M: usize, F>(f: &F, nodes: &[Node]) -> Vec<(f64, UnitPoint, [f64; M])>
where
    F: Fn(UnitPoint) -> KernelSample<M>,
{
    nodes
        .iter()
        .filter_map(|n| f(n.x).map(|(m, v)| (n.w, m, v)))
        .collect()
}

fn panel_moments<const M: usize, F>(f: &F, panel: &Panel) -> PanelMoments<M>
where
    F: Fn(UnitPoint) -> KernelSample<M>,
{
    let nodes = panel.nodes();
    let mut lower = [0.0; M];
    let mut upper = [0.0; M];
    let mut diag = [[0.0; M]; M];
    for node in nodes.iter() {
        let Some((m_y, fy)) = f(node.x) else { continue };
        for i in 0..M {
            lower[i] += node.w * m_y.u * fy[i];
            upper[i] += node.w * m_y.c * fy[i];
        }
        // Inner integral of m(x) F_i(x) over the part of the panel below y.
        let (a, b) = panel.below(node.s);
        let mut inner = [0.0; M];
        for (w, m_x, fx) in weighted(f, &panel.nodes_on(a, b)) {
            for i in 0..M {
                inner[i] += w * m_x.u * fx[i];
            }
        }
        // Weight the outer factor first: F may be huge where w (1 - m) is tiny.
        let outer_w = node.w * m_y.c;
        let gy: [f64; M] = std::array::from_fn(|j| outer_w * fy[j]);
        for i in 0..M {
            for j in 0..M {
                diag[i][j] += inner[i] * gy[j] + inner[j] * gy[i];
            }
        }
    }
    PanelMoments { lower, upper, diag }
}

fn level<const M: usize, F>(f: &F, base: &[Panel], lv: u32) -> Level<M>
where
    F: Fn(UnitPoint) -> KernelSample<M> + Sync,
{
    let panels: Vec<Panel> = base.iter().flat_map(|p| p.subdivide(1 << lv)).collect();
    let moments: Vec<PanelMoments<M>> = panels.par_iter().map(|p| panel_moments(f, p)).collect();

    let mut value = [[0.0; M]; M];
    let mut outer = [[0.0; M]; M];
    let mut prefix = [0.0; M];
    let mut prefix_open = [0.0; M];
    for (panel, mom) in panels.iter().zip(&moments) {
        for i in 0..M {
            for j in 0..M {
                let cross = prefix[i] * mom.upper[j] + prefix[j] * mom.upper[i];
                let cross_open = prefix_open[i] * mom.upper[j] + prefix_open[j] * mom.upper[i];
                value[i][j] += cross + mom.diag[i][j];
                if panel.open {
                    outer[i][j] += cross + mom.diag[i][j];
                } else {
                    outer[i][j] += cross_open;
                }
            }
        }
        for i in 0..M {
            prefix[i] += mom.lower[i];
            if panel.open {
                prefix_open[i] += mom.lower[i];
            }
        }
    }
    Level { value, outer }
}

/// The three forms `<f1, f1>`, `<f1, f1 f2>`, `<f1 f2, f1 f2>` under
/// `<f, g> = ∫∫ f(x) g(y) K(x, y) dx dy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaForms {
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
    pub error: f64,
}

impl OmegaForms {
    /// `Ω1 Ω3 - Ω2^2`, nonnegative by Cauchy-Schwarz for the kernel's
    /// semi-inner product.
    pub fn gap(&self) -> f64 {
        self.omega1 * self.omega3 - self.omega2 * self.omega2
    }
}

pub fn omega_forms<F1, F2>(f1: F1, f2: F2, spec: &QuadratureSpec) -> Result<OmegaForms>
where
    F1: Fn(UnitPoint) -> f64 + Sync,
    F2: Fn(UnitPoint) -> f64 + Sync,
{
    let g = bridge_gram(
        |x| {
            let a = f1(x);
            Some((x, [a, a * f2(x)]))
        },
        Interval::unit(),
        spec,
    )?;
    let error = g.error.iter().flatten().fold(0.0f64, |m, e| m.max(*e));
    Ok(OmegaForms {
        omega1: g.value[0][0],
        omega2: g.value[0][1],
        omega3: g.value[1][1],
        error,
    })
}

/// `α(u) = (1/(1-u)) ∫_u^1 (1-v) J(v) H'(v) dv`.
pub fn alpha_profile<J, H>(j_density: J, h_prime: H, u: UnitPoint, spec: &QuadratureSpec) -> Result<f64>
where
    J: Fn(UnitPoint) -> f64,
    H: Fn(UnitPoint) -> f64,
{
    if !u.is_interior() {
        return Err(Error::Domain(format!("alpha profile needs 0 < u < 1, got {}", u.u)));
    }
    let upper = Interval::new(u, UnitPoint::from_parts(1.0, 0.0));
    let e = one_d::integrate(|v| v.c * j_density(v) * h_prime(v), upper, spec)?;
    Ok(e.value / u.c)
}

/// `∫_0^1 α(u)^2 du`, the single-integral form of the asymptotic variance of
/// the L-moment with weight `J` and transform derivative `H'`.
pub fn alpha_profile_variance<J, H>(j_density: J, h_prime: H, spec: &QuadratureSpec) -> Result<f64>
where
    J: Fn(UnitPoint) -> f64,
    H: Fn(UnitPoint) -> f64,
{
    let inner_spec = QuadratureSpec {
        abs_tol: spec.abs_tol * 1e-2,
        rel_tol: spec.rel_tol * 1e-2,
        ..*spec
    };
    let failure = std::cell::RefCell::new(None);
    let e = one_d::integrate(
        |u| match alpha_profile(&j_density, &h_prime, u, &inner_spec) {
            Ok(a) => a * a,
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                0.0
            }
        },
        Interval::unit(),
        spec,
    )?;
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    Ok(e.value)
}
