//! Integration on the open unit interval and square.
//!
//! Every integrand met by the estimators is smooth inside (0, 1) and singular
//! only at the boundary, with integrable power or logarithmic behaviour. The
//! rules here never evaluate at 0 or 1: 15-point Gauss-Legendre panels sit on
//! a mesh graded geometrically toward both endpoints (see [`mesh`]).
//!
//! Kernel double integrals `<f, g> = ∫∫ f(x) g(y) K(x, y)` with the bridge
//! kernel `K(v, w) = min(v, w) - v w` are handled by [`bridge_gram`], which
//! uses the product structure of `K` off the diagonal to reduce the work to
//! nested 1-D sums.

mod bridge;
mod gauss;
pub mod mesh;
mod one_d;
mod two_d;

pub use bridge::{
    alpha_profile, alpha_profile_variance, bridge_gram, omega_forms, Gram, OmegaForms,
};
pub use mesh::Interval;
pub use one_d::{integrate as integrate_1d_on, integrate_vec as integrate_1d_vec_on};
pub use two_d::{integrate_2d, integrate_2d_on, Symmetry};

use crate::error::{Error, Result};
use crate::unit::UnitPoint;
use serde::{Deserialize, Serialize};

/// Tolerances and refinement limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections applied to any panel of the base mesh.
    pub max_depth: u32,
}

impl QuadratureSpec {
    pub fn default_1d() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_depth: 40,
        }
    }

    pub fn default_2d() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            max_depth: 40,
        }
    }

    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default_1d()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_depth >= 1) {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerances must be positive and max_depth >= 1: {self:?}"
            )));
        }
        Ok(())
    }

    /// Number of uniform refinements of the base mesh the 2-D rules may use.
    pub(crate) fn max_levels(&self) -> u32 {
        self.max_depth.min(5)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::default_1d()
    }
}

/// An integral value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// The Brownian-bridge covariance `K(v, w) = min(v, w) - v w`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BridgeKernel;

impl BridgeKernel {
    pub fn eval(v: f64, w: f64) -> f64 {
        v.min(w) - v * w
    }

    /// `K` at two points with accurate complements: `min(v,w) (1 - max(v,w))`.
    pub fn eval_points(v: UnitPoint, w: UnitPoint) -> f64 {
        // Near 1 the lower coordinates may both round to 1.0; the complements
        // still order the points.
        if v.u < w.u || (v.u == w.u && v.c >= w.c) {
            v.u * w.c
        } else {
            w.u * v.c
        }
    }
}

/// `∫_0^1 f(u) du`.
pub fn integrate_1d<F>(f: F, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(UnitPoint) -> f64,
{
    one_d::integrate(f, Interval::unit(), spec)
}

/// Smallest error worth reporting for a sum of magnitude `scale`.
pub(crate) fn rounding_floor(scale: f64) -> f64 {
    64.0 * f64::EPSILON * scale.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{std_normal_pdf, std_normal_quantile, EULER_GAMMA};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default_1d()
    }

    #[test]
    fn kernel_properties() {
        for i in 0..=20 {
            for j in 0..=20 {
                let (v, w) = (i as f64 / 20.0, j as f64 / 20.0);
                let k = BridgeKernel::eval(v, w);
                assert_eq!(k, BridgeKernel::eval(w, v));
                assert!((0.0..=0.25).contains(&k));
                if i == 0 || j == 0 || i == 20 || j == 20 {
                    assert_eq!(k, 0.0);
                }
                let kp = BridgeKernel::eval_points(UnitPoint::new(v), UnitPoint::new(w));
                assert!((kp - k).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn one_d_examples() {
        let one = integrate_1d(|_| 1.0, &spec()).unwrap();
        assert!((one.value - 1.0).abs() < 1e-13);
        let i1 = integrate_1d(|u| u.ln_complement(), &spec()).unwrap();
        assert!((i1.value + 1.0).abs() < 1e-10);
        let k1 = integrate_1d(|u| (-u.ln()).ln(), &spec()).unwrap();
        assert!((k1.value + EULER_GAMMA).abs() < 1e-9, "{k1:?}");
    }

    #[test]
    fn one_d_power_singularities() {
        for &s in &[-0.3, -0.7, -0.9, 0.5, 2.0] {
            let e = integrate_1d(|u| u.u.powf(s), &spec()).unwrap();
            assert!((e.value - 1.0 / (s + 1.0)).abs() < 1e-9, "s={s} {e:?}");
            let e = integrate_1d(|u| u.c.powf(s), &spec()).unwrap();
            assert!((e.value - 1.0 / (s + 1.0)).abs() < 1e-9, "s={s} {e:?}");
        }
    }

    #[test]
    fn one_d_reports_divergence() {
        assert!(matches!(integrate_1d(|u| 1.0 / u.u, &spec()), Err(Error::Quadrature(_))));
        assert!(matches!(integrate_1d(|u| 1.0 / u.c, &spec()), Err(Error::Quadrature(_))));
    }

    #[test]
    fn one_d_windows() {
        let iv = Interval::new(UnitPoint::new(0.25), UnitPoint::new(0.75));
        let e = integrate_1d_on(|u| u.u * u.u, iv, &spec()).unwrap();
        assert!((e.value - (0.75f64.powi(3) - 0.25f64.powi(3)) / 3.0).abs() < 1e-14);
        let iv = Interval::symmetric_window(1e-6);
        let e = integrate_1d_on(|u| 1.0 / u.u, iv, &spec()).unwrap();
        let want = (1.0 - 1e-6f64).ln() - (1e-6f64).ln();
        assert!((e.value - want).abs() < 1e-9);
    }

    #[test]
    fn one_d_vector_components_share_mesh() {
        let [a, b] = integrate_1d_vec_on(
            |u| {
                let z = if u.u < 0.5 {
                    std_normal_quantile(u.u).unwrap()
                } else {
                    -std_normal_quantile(u.c).unwrap()
                };
                [z, z * z]
            },
            Interval::unit(),
            &spec(),
        )
        .unwrap();
        assert!(a.value.abs() < 1e-10);
        assert!((b.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_d_examples() {
        let s2 = QuadratureSpec::default_2d();
        let k = integrate_2d(BridgeKernel::eval_points, Symmetry::Symmetric, &s2).unwrap();
        assert!((k.value - 1.0 / 12.0).abs() < 1e-9, "{k:?}");
        let e = integrate_2d(
            |v, w| BridgeKernel::eval_points(v, w) / v.c / w.c,
            Symmetry::Symmetric,
            &s2,
        )
        .unwrap();
        assert!((e.value - 1.0).abs() < 1e-7, "{e:?}");
        // K(v, w) / (φ(z_v) φ(z_w)) written as a product of two bounded
        // factors, min(v,w)/φ and (1 - max(v,w))/φ, so it cannot overflow.
        let z = |p: UnitPoint| {
            if p.u < 0.5 {
                std_normal_quantile(p.u).unwrap()
            } else {
                -std_normal_quantile(p.c).unwrap()
            }
        };
        let n = integrate_2d(
            |v, w| {
                let (lo, hi) = if v.u <= w.u { (v, w) } else { (w, v) };
                (lo.u / std_normal_pdf(z(lo))) * (hi.c / std_normal_pdf(z(hi)))
            },
            Symmetry::Symmetric,
            &s2,
        )
        .unwrap();
        assert!((n.value - 1.0).abs() < 1e-6, "{n:?}");
    }

    #[test]
    fn two_d_general_matches_symmetric_and_separable() {
        let s2 = QuadratureSpec::default_2d();
        let g = |v: UnitPoint, w: UnitPoint| v.u * w.u * w.u;
        let e = integrate_2d(g, Symmetry::General, &s2).unwrap();
        assert!((e.value - 1.0 / 6.0).abs() < 1e-12);
        let kink = |v: UnitPoint, w: UnitPoint| (v.u - w.u).abs();
        let e = integrate_2d(kink, Symmetry::Symmetric, &s2).unwrap();
        assert!((e.value - 1.0 / 3.0).abs() < 1e-12);
    }
}
