//! Parameter-free integrals of the weight function.
//!
//! Every constant is an integral against `J(u) du`. Substituting the
//! Kumaraswamy quantile `u = Q(p)` turns `J(u) du` into `dp`, so all
//! integrals are computed in `p` on (0, 1), where the weight is flat and
//! only the transform carries the endpoint behaviour.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{normal_score, Family};
use crate::numerics::std_normal_pdf;
use crate::quadrature::{bridge_gram, integrate_1d_vec_on, Interval, QuadratureSpec};
use crate::unit::UnitPoint;
use crate::weights::KumaraswamyShape;

/// Integration domain in `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    /// The whole interval (0, 1).
    Full,
    /// `[eps, 1 - eps]`.
    Window(f64),
}

impl Truncation {
    /// Windows that reproduce the published efficiency tables, which were
    /// evidently computed on a truncated domain.
    pub fn reference(family: Family) -> Self {
        match family {
            Family::Pareto => Truncation::Window(1e-5),
            Family::Lognormal | Family::Frechet => Truncation::Window(1e-6),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Truncation::Full => Ok(()),
            Truncation::Window(eps) if eps > 0.0 && eps < 0.5 => Ok(()),
            Truncation::Window(eps) => Err(Error::InvalidParameter(format!(
                "truncation window must satisfy 0 < eps < 1/2, got {eps}"
            ))),
        }
    }

    /// The domain mapped into `p = cdf_J(u)`.
    fn p_interval(&self, shape: &KumaraswamyShape) -> Interval {
        match *self {
            Truncation::Full => Interval::unit(),
            Truncation::Window(eps) => Interval::new(
                shape.cdf_at(UnitPoint::new(eps)),
                shape.cdf_at(UnitPoint::from_complement(eps)),
            ),
        }
    }

    fn key(&self) -> u64 {
        match *self {
            Truncation::Full => 0,
            Truncation::Window(eps) => eps.to_bits(),
        }
    }
}

/// Truncation and tolerances used for the weight constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationOptions {
    pub truncation: Truncation,
    pub one_d: QuadratureSpec,
    pub two_d: QuadratureSpec,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            truncation: Truncation::Full,
            one_d: QuadratureSpec {
                abs_tol: 1e-13,
                rel_tol: 1e-12,
                max_depth: 40,
            },
            two_d: QuadratureSpec {
                abs_tol: 1e-11,
                rel_tol: 1e-9,
                max_depth: 40,
            },
        }
    }
}

impl IntegrationOptions {
    pub fn with_truncation(truncation: Truncation) -> Self {
        Self {
            truncation,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.truncation.validate()?;
        self.one_d.validate()?;
        self.two_d.validate()
    }

    fn key(&self) -> [u64; 7] {
        [
            self.truncation.key(),
            self.one_d.abs_tol.to_bits(),
            self.one_d.rel_tol.to_bits(),
            self.one_d.max_depth as u64,
            self.two_d.abs_tol.to_bits(),
            self.two_d.rel_tol.to_bits(),
            self.two_d.max_depth as u64,
        ]
    }
}

/// Points whose image under the weight quantile is closer to an endpoint
/// than this are dropped: the transforms are not representable there.
const EDGE: f64 = 1e-290;

fn weight_point(shape: &KumaraswamyShape, p: UnitPoint) -> Option<UnitPoint> {
    let u = shape.quantile_at(p);
    (u.u > EDGE && u.c > EDGE).then_some(u)
}

/// `(∫ J g_1, ∫ J g_2)` over the truncation domain.
fn weighted_pair<G>(g: G, shape: &KumaraswamyShape, opts: &IntegrationOptions) -> Result<[f64; 2]>
where
    G: Fn(UnitPoint) -> [f64; 2],
{
    let [a, b] = integrate_1d_vec_on(
        |p| weight_point(shape, p).map_or([0.0, 0.0], &g),
        opts.truncation.p_interval(shape),
        &opts.one_d,
    )?;
    Ok([a.value, b.value])
}

/// Entries `<F_i, F_j>` of the bridge-kernel Gram matrix for the values
/// `F(u) = [f1(u), f1(u) f2(u)]`, integrated against `J(v) J(w)`.
fn weighted_gram<F>(f: F, shape: &KumaraswamyShape, opts: &IntegrationOptions) -> Result<([f64; 3], f64)>
where
    F: Fn(UnitPoint) -> [f64; 2] + Sync,
{
    let g = bridge_gram(
        |p| weight_point(shape, p).map(|u| (u, f(u))),
        opts.truncation.p_interval(shape),
        &opts.two_d,
    )?;
    let error = g.error.iter().flatten().fold(0.0f64, |m, e| m.max(*e));
    Ok(([g.value[0][0], g.value[0][1], g.value[1][1]], error))
}

fn infinite_variance(what: &str, shape: &KumaraswamyShape) -> Error {
    Error::Quadrature(format!(
        "{what} diverges for a = {}, b = {}: the asymptotic variance is infinite \
         (use a truncation window or a different weight shape)",
        shape.a(),
        shape.b()
    ))
}

/// A standardized member `F0` of a location-scale family.
pub trait StandardLocationScale: Sync {
    fn name(&self) -> &'static str;
    fn quantile(&self, u: UnitPoint) -> f64;
    /// `f0(F0^{-1}(u))`.
    fn density_at_quantile(&self, u: UnitPoint) -> f64;
    /// Whether the kernel integrals are infinite on the full domain.
    fn variance_diverges(&self, shape: &KumaraswamyShape) -> bool;
}

/// The standard normal, the location-scale base of the lognormal model.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardNormal;

impl StandardLocationScale for StandardNormal {
    fn name(&self) -> &'static str {
        "normal"
    }

    fn quantile(&self, u: UnitPoint) -> f64 {
        normal_score(u)
    }

    fn density_at_quantile(&self, u: UnitPoint) -> f64 {
        std_normal_pdf(normal_score(u))
    }

    fn variance_diverges(&self, shape: &KumaraswamyShape) -> bool {
        // J(u) / phi(z(u)) behaves like u^(a-2) / |z| at 0 and
        // (1-u)^(b-2) / |z| at 1.
        shape.a() <= 0.5 || shape.b() <= 0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocationScaleConstants {
    pub c1: f64,
    pub c2: f64,
    /// `c2 - c1^2`.
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaTriple {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    /// Largest estimated absolute error of the three.
    pub error: f64,
}

impl LambdaTriple {
    pub fn gap(&self) -> f64 {
        self.lambda1 * self.lambda3 - self.lambda2 * self.lambda2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParetoIntegrals {
    /// `∫ J(u) log(1 - u) du`.
    pub i1: f64,
    /// `∫∫ J(v) J(w) K(v, w) / ((1 - v)(1 - w)) dv dw`.
    pub i2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrechetMoments {
    pub kappa1: f64,
    pub kappa2: f64,
    /// `kappa2 - kappa1^2`.
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrechetConstants {
    pub kappa1: f64,
    pub kappa2: f64,
    pub tau: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub psi3: f64,
    pub error: f64,
}

impl FrechetConstants {
    pub fn psi_gap(&self) -> f64 {
        self.psi1 * self.psi3 - self.psi2 * self.psi2
    }

    pub fn moments(&self) -> FrechetMoments {
        FrechetMoments {
            kappa1: self.kappa1,
            kappa2: self.kappa2,
            tau: self.tau,
        }
    }
}

/// `c_k = ∫ J(u) F0^{-1}(u)^k du` for `k = 1, 2`.
pub fn location_scale_constants(
    f0: &dyn StandardLocationScale,
    shape: &KumaraswamyShape,
    opts: &IntegrationOptions,
) -> Result<LocationScaleConstants> {
    opts.validate()?;
    let [c1, c2] = weighted_pair(
        |u| {
            let z = f0.quantile(u);
            [z, z * z]
        },
        shape,
        opts,
    )?;
    Ok(LocationScaleConstants { c1, c2, eta: c2 - c1 * c1 })
}

/// `Λ1..Λ3`: kernel forms of `f1 = J / f0(F0^{-1})` and `f1 F0^{-1}`.
pub fn lambda_triple(
    f0: &dyn StandardLocationScale,
    shape: &KumaraswamyShape,
    opts: &IntegrationOptions,
) -> Result<LambdaTriple> {
    opts.validate()?;
    if opts.truncation == Truncation::Full && f0.variance_diverges(shape) {
        return Err(infinite_variance("the Λ kernel integral", shape));
    }
    let ([lambda1, lambda2, lambda3], error) = weighted_gram(
        |u| {
            let f1 = 1.0 / f0.density_at_quantile(u);
            [f1, f1 * f0.quantile(u)]
        },
        shape,
        opts,
    )?;
    Ok(LambdaTriple {
        lambda1,
        lambda2,
        lambda3,
        error,
    })
}

/// `I1 = ∫ J(u) log(1 - u) du`.
pub fn pareto_i1(shape: &KumaraswamyShape, opts: &IntegrationOptions) -> Result<f64> {
    opts.validate()?;
    let [i1, _] = weighted_pair(|u| [u.ln_complement(), 0.0], shape, opts)?;
    Ok(i1)
}

pub fn pareto_integrals(shape: &KumaraswamyShape, opts: &IntegrationOptions) -> Result<ParetoIntegrals> {
    let i1 = pareto_i1(shape, opts)?;
    // J(u) / (1 - u) ~ (1-u)^(b-2) at the upper end.
    if opts.truncation == Truncation::Full && shape.b() <= 0.5 {
        return Err(infinite_variance("the Pareto kernel integral", shape));
    }
    let ([i2, _, _], _) = weighted_gram(|u| [1.0 / u.c, 0.0], shape, opts)?;
    Ok(ParetoIntegrals { i1, i2 })
}

/// `κ_k = ∫ J(u) (log(-log u))^k du`.
pub fn frechet_moments(shape: &KumaraswamyShape, opts: &IntegrationOptions) -> Result<FrechetMoments> {
    opts.validate()?;
    let [kappa1, kappa2] = weighted_pair(
        |u| {
            let l = (-u.ln()).ln();
            [l, l * l]
        },
        shape,
        opts,
    )?;
    Ok(FrechetMoments {
        kappa1,
        kappa2,
        tau: kappa2 - kappa1 * kappa1,
    })
}

/// `κ1, κ2, τ` and the kernel forms `Ψ1..Ψ3` of `J / (u log u)` and
/// `J log(-log u) / (u log u)`.
pub fn frechet_constants(shape: &KumaraswamyShape, opts: &IntegrationOptions) -> Result<FrechetConstants> {
    let m = frechet_moments(shape, opts)?;
    // J(u) / (u log u) ~ u^(a-2) / |log u| at 0 and (1-u)^(b-2) at 1.
    if opts.truncation == Truncation::Full && (shape.a() < 0.5 || shape.b() <= 0.5) {
        return Err(infinite_variance("the Ψ kernel integral", shape));
    }
    if opts.truncation == Truncation::Full && shape.a() == 0.5 {
        // The tail beyond u = δ is of order 1 / |log δ|, which no mesh reaches.
        return Err(Error::Quadrature(
            "the Ψ kernel integral converges only logarithmically at a = 0.5; \
             use a truncation window"
                .into(),
        ));
    }
    let ([psi1, psi2, psi3], error) = weighted_gram(
        |u| {
            let ln_u = u.ln();
            let f1 = 1.0 / (u.u * ln_u);
            [f1, f1 * (-ln_u).ln()]
        },
        shape,
        opts,
    )?;
    Ok(FrechetConstants {
        kappa1: m.kappa1,
        kappa2: m.kappa2,
        tau: m.tau,
        psi1,
        psi2,
        psi3,
        error,
    })
}

type CacheKey = (&'static str, u64, u64, [u64; 7]);

/// Memo of shape-dependent constants; each entry is computed at most once
/// and concurrent readers of the same entry wait for it.
struct ShapeCache<T> {
    map: Mutex<HashMap<CacheKey, Arc<OnceLock<Result<T>>>>>,
}

impl<T: Clone> ShapeCache<T> {
    fn new() -> Self {
        Self {
            map: Mutex::new(HashMap::new()),
        }
    }

    fn get(
        &self,
        tag: &'static str,
        shape: &KumaraswamyShape,
        opts: &IntegrationOptions,
        compute: impl FnOnce() -> Result<T>,
    ) -> Result<T> {
        let key = (tag, shape.a().to_bits(), shape.b().to_bits(), opts.key());
        let cell = {
            let mut map = self.map.lock().unwrap_or_else(|e| e.into_inner());
            Arc::clone(map.entry(key).or_default())
        };
        cell.get_or_init(compute).clone()
    }
}

static LOCATION_SCALE: LazyLock<ShapeCache<LocationScaleConstants>> = LazyLock::new(ShapeCache::new);
static LAMBDA: LazyLock<ShapeCache<LambdaTriple>> = LazyLock::new(ShapeCache::new);
static PARETO_I1: LazyLock<ShapeCache<f64>> = LazyLock::new(ShapeCache::new);
static PARETO: LazyLock<ShapeCache<ParetoIntegrals>> = LazyLock::new(ShapeCache::new);
static FRECHET_MOMENTS: LazyLock<ShapeCache<FrechetMoments>> = LazyLock::new(ShapeCache::new);
static FRECHET: LazyLock<ShapeCache<FrechetConstants>> = LazyLock::new(ShapeCache::new);

/// Cached forms of the constant functions above.
pub mod cached {
    use super::*;

    pub fn location_scale_constants(
        f0: &dyn StandardLocationScale,
        shape: &KumaraswamyShape,
        opts: &IntegrationOptions,
    ) -> Result<LocationScaleConstants> {
        LOCATION_SCALE.get(f0.name(), shape, opts, || super::location_scale_constants(f0, shape, opts))
    }

    pub fn lambda_triple(
        f0: &dyn StandardLocationScale,
        shape: &KumaraswamyShape,
        opts: &IntegrationOptions,
    ) -> Result<LambdaTriple> {
        LAMBDA.get(f0.name(), shape, opts, || super::lambda_triple(f0, shape, opts))
    }

    pub fn pareto_i1(shape: &KumaraswamyShape, opts: &IntegrationOptions) -> Result<f64> {
        PARETO_I1.get("pareto", shape, opts, || super::pareto_i1(shape, opts))
    }

    pub fn pareto_integrals(shape: &KumaraswamyShape, opts: &IntegrationOptions) -> Result<ParetoIntegrals> {
        PARETO.get("pareto", shape, opts, || super::pareto_integrals(shape, opts))
    }

    pub fn frechet_moments(shape: &KumaraswamyShape, opts: &IntegrationOptions) -> Result<FrechetMoments> {
        FRECHET_MOMENTS.get("frechet", shape, opts, || super::frechet_moments(shape, opts))
    }

    pub fn frechet_constants(shape: &KumaraswamyShape, opts: &IntegrationOptions) -> Result<FrechetConstants> {
        FRECHET.get("frechet", shape, opts, || super::frechet_constants(shape, opts))
    }
}
