//! L-estimators with Kumaraswamy weights: sample L-moments, closed-form
//! estimators for the three severity families, their asymptotic
//! covariances and efficiencies relative to maximum likelihood.

mod constants;
mod covariance;

pub use constants::{
    cached, frechet_constants, frechet_moments, lambda_triple, location_scale_constants, pareto_i1,
    pareto_integrals, FrechetConstants, FrechetMoments, IntegrationOptions, LambdaTriple,
    LocationScaleConstants, ParetoIntegrals, StandardLocationScale, StandardNormal, Truncation,
};
pub use covariance::{
    are_frechet, are_location_scale, are_pareto, det, frechet_covariance, frechet_covariance_closed_form,
    frechet_jacobian, frechet_sigma, location_scale_covariance, location_scale_covariance_closed_form,
    location_scale_jacobian, location_scale_sigma, Matrix2,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{h_transforms, Family, ModelParams, ModelSpec};
use crate::sample::SortedSample;
use crate::weights::{weight_vector, KumaraswamyShape};

/// Sample L-moments `μ̂_j = (1/n) Σ J(i/(n+1)) h_j(X_(i))`; the second is
/// absent for the one-parameter Pareto model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LMomentPair {
    pub mu1: f64,
    pub mu2: Option<f64>,
}

impl LMomentPair {
    /// `μ̂2 - μ̂1^2`, the sample proxy of the scale.
    pub fn variance_proxy(&self) -> Option<f64> {
        self.mu2.map(|m2| m2 - self.mu1 * self.mu1)
    }
}

/// How a fit was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Method {
    Kumaraswamy { a: f64, b: f64 },
    Mle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Diagnostics {
    pub lmoments: Option<LMomentPair>,
    /// `μ̂2 - μ̂1^2` for the two-parameter fits.
    pub variance_proxy: Option<f64>,
    pub warnings: Vec<String>,
}

/// A fitted model with its estimated asymptotic covariance divided by `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub method: Method,
    pub spec: ModelSpec,
    pub params: ModelParams,
    pub n: usize,
    /// `S / n` evaluated at the estimates; `None` when the asymptotic
    /// variance is infinite for the chosen weight.
    pub cov_over_n: Option<Vec<Vec<f64>>>,
    /// Asymptotic efficiency relative to maximum likelihood; 0 when the
    /// variance is infinite and 1 for the likelihood fit itself.
    pub are_vs_mle: f64,
    pub diagnostics: Diagnostics,
}

impl FitResult {
    pub fn shape(&self) -> Option<KumaraswamyShape> {
        match self.method {
            Method::Kumaraswamy { a, b } => KumaraswamyShape::new(a, b).ok(),
            Method::Mle => None,
        }
    }
}

fn weighted_sum(weights: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    weights.iter().zip(values).map(|(w, v)| w * v).sum::<f64>() / weights.len() as f64
}

/// Sample L-moments with the family's log transforms.
pub fn sample_lmoments(sample: &SortedSample, shape: &KumaraswamyShape, spec: &ModelSpec) -> Result<LMomentPair> {
    spec.check_sample(sample)?;
    let w = weight_vector(sample.n(), *shape)?;
    let h = h_transforms(spec);
    let logs: Vec<f64> = sample.values().iter().map(|&x| h.h(1, x)).collect();
    let mu1 = weighted_sum(&w.weights, logs.iter().copied());
    let mu2 = (h.count() == 2).then(|| weighted_sum(&w.weights, logs.iter().map(|l| l * l)));
    Ok(LMomentPair { mu1, mu2 })
}

/// Sample L-moments of the raw observations, `h1(x) = x` and `h2(x) = x^2`.
pub fn sample_lmoments_raw(sample: &SortedSample, shape: &KumaraswamyShape) -> Result<LMomentPair> {
    let w = weight_vector(sample.n(), *shape)?;
    let v = sample.values();
    Ok(LMomentPair {
        mu1: weighted_sum(&w.weights, v.iter().copied()),
        mu2: Some(weighted_sum(&w.weights, v.iter().map(|x| x * x))),
    })
}

fn require_mu2(lm: &LMomentPair) -> Result<(f64, f64)> {
    let mu2 = lm
        .mu2
        .ok_or_else(|| Error::InvalidParameter("a two-parameter fit needs two L-moments".into()))?;
    let gap = mu2 - lm.mu1 * lm.mu1;
    if gap > 0.0 && gap.is_finite() {
        Ok((mu2, gap))
    } else {
        Err(Error::NegativeVarianceProxy { mu1: lm.mu1, mu2, gap })
    }
}

/// Location and scale solving `μ1 = θ + c1 σ`, `μ2 = θ^2 + 2 θ σ c1 + σ^2 c2`.
pub fn estimate_location_scale(lm: &LMomentPair, c: &LocationScaleConstants) -> Result<(f64, f64)> {
    let (_, gap) = require_mu2(lm)?;
    let sigma = (gap / c.eta).sqrt();
    Ok((lm.mu1 - c.c1 * sigma, sigma))
}

/// Generic location-scale fit on the raw observations.
pub fn fit_raw_location_scale(
    sample: &SortedSample,
    shape: &KumaraswamyShape,
    f0: &dyn StandardLocationScale,
    opts: &IntegrationOptions,
) -> Result<(f64, f64)> {
    let lm = sample_lmoments_raw(sample, shape)?;
    let c = cached::location_scale_constants(f0, shape, opts)?;
    estimate_location_scale(&lm, &c)
}

/// Population L-moments of a fitted model under the weight `J`.
pub fn population_lmoments(
    params: &ModelParams,
    shape: &KumaraswamyShape,
    opts: &IntegrationOptions,
) -> Result<LMomentPair> {
    Ok(match *params {
        ModelParams::Pareto { alpha } => LMomentPair {
            mu1: -cached::pareto_i1(shape, opts)? / alpha,
            mu2: None,
        },
        ModelParams::Lognormal { theta, sigma } => {
            let c = cached::location_scale_constants(&StandardNormal, shape, opts)?;
            LMomentPair {
                mu1: theta + c.c1 * sigma,
                mu2: Some(theta * theta + 2.0 * theta * sigma * c.c1 + sigma * sigma * c.c2),
            }
        }
        ModelParams::Frechet { alpha, sigma } => {
            let k = cached::frechet_moments(shape, opts)?;
            let ls = sigma.ln();
            LMomentPair {
                mu1: ls - k.kappa1 / alpha,
                mu2: Some(ls * ls - 2.0 * ls * k.kappa1 / alpha + k.kappa2 / (alpha * alpha)),
            }
        }
    })
}

/// Whether the kernel integrals of `family` are infinite on the full domain.
pub fn variance_diverges(family: Family, shape: &KumaraswamyShape, opts: &IntegrationOptions) -> bool {
    if opts.truncation != Truncation::Full {
        return false;
    }
    match family {
        Family::Pareto => shape.b() <= 0.5,
        Family::Lognormal => StandardNormal.variance_diverges(shape),
        Family::Frechet => shape.a() < 0.5 || shape.b() <= 0.5,
    }
}

fn infinite_variance_warning(shape: &KumaraswamyShape) -> String {
    format!(
        "asymptotic variance is infinite for a = {}, b = {}; covariance omitted",
        shape.a(),
        shape.b()
    )
}

fn to_rows(m: Matrix2) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.to_vec()).collect()
}

/// Lognormal fit (location-scale on `log(x - x0)`).
pub fn fit_location_scale(
    sample: &SortedSample,
    shape: &KumaraswamyShape,
    spec: &ModelSpec,
    opts: &IntegrationOptions,
) -> Result<FitResult> {
    if spec.family != Family::Lognormal {
        return Err(Error::InvalidParameter(format!(
            "location-scale fit applies to the lognormal family, not {}",
            spec.family.name()
        )));
    }
    if sample.n() < 2 {
        return Err(Error::Degenerate("a two-parameter fit needs at least 2 observations".into()));
    }
    let lm = sample_lmoments(sample, shape, spec)?;
    let c = cached::location_scale_constants(&StandardNormal, shape, opts)?;
    let (theta, sigma) = estimate_location_scale(&lm, &c)?;
    let params = ModelParams::lognormal(theta, sigma)?;
    let mut diagnostics = Diagnostics {
        lmoments: Some(lm),
        variance_proxy: lm.variance_proxy(),
        warnings: vec![],
    };
    let n = sample.n();
    let (cov_over_n, are_vs_mle) = if variance_diverges(Family::Lognormal, shape, opts) {
        diagnostics.warnings.push(infinite_variance_warning(shape));
        (None, 0.0)
    } else {
        let l = cached::lambda_triple(&StandardNormal, shape, opts)?;
        let s = location_scale_covariance(theta, sigma, &c, &l);
        (Some(to_rows(scale(s, 1.0 / n as f64))), are_location_scale(&c, &l))
    };
    Ok(FitResult {
        method: Method::Kumaraswamy { a: shape.a(), b: shape.b() },
        spec: *spec,
        params,
        n,
        cov_over_n,
        are_vs_mle,
        diagnostics,
    })
}

fn scale(m: Matrix2, f: f64) -> Matrix2 {
    [[m[0][0] * f, m[0][1] * f], [m[1][0] * f, m[1][1] * f]]
}

/// Pareto shape fit `α̂ = -I1 / μ̂` with `h(x) = log(x / x0)`.
pub fn fit_pareto(
    sample: &SortedSample,
    shape: &KumaraswamyShape,
    spec: &ModelSpec,
    opts: &IntegrationOptions,
) -> Result<FitResult> {
    if spec.family != Family::Pareto {
        return Err(Error::InvalidParameter(format!(
            "Pareto fit called with a {} model",
            spec.family.name()
        )));
    }
    let lm = sample_lmoments(sample, shape, spec)?;
    if !(lm.mu1 > 0.0) {
        return Err(Error::Degenerate(
            "every observation equals the threshold; the Pareto shape is not identified".into(),
        ));
    }
    let i1 = cached::pareto_i1(shape, opts)?;
    let alpha = -i1 / lm.mu1;
    let params = ModelParams::pareto(alpha)?;
    let mut diagnostics = Diagnostics {
        lmoments: Some(lm),
        ..Default::default()
    };
    let n = sample.n();
    let (cov_over_n, are_vs_mle) = if variance_diverges(Family::Pareto, shape, opts) {
        diagnostics.warnings.push(infinite_variance_warning(shape));
        (None, 0.0)
    } else {
        let p = cached::pareto_integrals(shape, opts)?;
        let v = alpha * alpha * p.i2 / (p.i1 * p.i1);
        (Some(vec![vec![v / n as f64]]), are_pareto(&p))
    };
    Ok(FitResult {
        method: Method::Kumaraswamy { a: shape.a(), b: shape.b() },
        spec: *spec,
        params,
        n,
        cov_over_n,
        are_vs_mle,
        diagnostics,
    })
}

/// Fréchet fit with `h1 = log x`, `h2 = (log x)^2`.
pub fn fit_frechet(sample: &SortedSample, shape: &KumaraswamyShape, opts: &IntegrationOptions) -> Result<FitResult> {
    let spec = ModelSpec::frechet();
    if sample.n() < 2 {
        return Err(Error::Degenerate("a two-parameter fit needs at least 2 observations".into()));
    }
    let lm = sample_lmoments(sample, shape, &spec)?;
    let (_, gap) = require_mu2(&lm)?;
    let k = cached::frechet_moments(shape, opts)?;
    let alpha = (k.tau / gap).sqrt();
    let sigma = (lm.mu1 + k.kappa1 / alpha).exp();
    let params = ModelParams::frechet(alpha, sigma)?;
    let mut diagnostics = Diagnostics {
        lmoments: Some(lm),
        variance_proxy: Some(gap),
        warnings: vec![],
    };
    let n = sample.n();
    let (cov_over_n, are_vs_mle) = if variance_diverges(Family::Frechet, shape, opts) {
        diagnostics.warnings.push(infinite_variance_warning(shape));
        (None, 0.0)
    } else {
        let f = cached::frechet_constants(shape, opts)?;
        let s = frechet_covariance(alpha, sigma, &f);
        (Some(to_rows(scale(s, 1.0 / n as f64))), are_frechet(&f))
    };
    Ok(FitResult {
        method: Method::Kumaraswamy { a: shape.a(), b: shape.b() },
        spec,
        params,
        n,
        cov_over_n,
        are_vs_mle,
        diagnostics,
    })
}

/// Dispatches to the family's L-estimator.
pub fn fit(
    sample: &SortedSample,
    shape: &KumaraswamyShape,
    spec: &ModelSpec,
    opts: &IntegrationOptions,
) -> Result<FitResult> {
    match spec.family {
        Family::Pareto => fit_pareto(sample, shape, spec, opts),
        Family::Lognormal => fit_location_scale(sample, shape, spec, opts),
        Family::Frechet => fit_frechet(sample, shape, opts),
    }
}

/// Asymptotic efficiency of the L-estimator relative to maximum likelihood.
pub fn are(family: Family, shape: &KumaraswamyShape, opts: &IntegrationOptions) -> Result<f64> {
    match family {
        Family::Pareto => Ok(are_pareto(&cached::pareto_integrals(shape, opts)?)),
        Family::Lognormal => {
            let c = cached::location_scale_constants(&StandardNormal, shape, opts)?;
            let l = cached::lambda_triple(&StandardNormal, shape, opts)?;
            Ok(are_location_scale(&c, &l))
        }
        Family::Frechet => Ok(are_frechet(&cached::frechet_constants(shape, opts)?)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreCell {
    pub a: f64,
    pub b: f64,
    pub are: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreGrid {
    pub family: Family,
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    /// Row `i` holds the cells for `a_values[i]`.
    pub cells: Vec<Vec<AreCell>>,
}

impl AreGrid {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.cells[i][j].are
    }
}

/// Efficiencies over a grid of shapes; a failing cell records its error
/// without aborting the others.
pub fn are_grid(family: Family, a_values: &[f64], b_values: &[f64], opts: &IntegrationOptions) -> Result<AreGrid> {
    opts.validate()?;
    let pairs: Vec<(f64, f64)> = a_values
        .iter()
        .flat_map(|&a| b_values.iter().map(move |&b| (a, b)))
        .collect();
    let flat: Vec<AreCell> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let r = KumaraswamyShape::new(a, b).and_then(|s| are(family, &s, opts));
            match r {
                Ok(v) => AreCell { a, b, are: Some(v), error: None },
                Err(e) => AreCell { a, b, are: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let cells = flat.chunks(b_values.len().max(1)).map(|c| c.to_vec()).collect();
    Ok(AreGrid {
        family,
        a_values: a_values.to_vec(),
        b_values: b_values.to_vec(),
        cells,
    })
}
