//! Maximum likelihood fits of the three families and their asymptotic
//! covariances, the baseline for every efficiency comparison.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lfit::{Diagnostics, FitResult, Method};
use crate::models::{Family, ModelParams, ModelSpec};
use crate::numerics::{find_root_decreasing, EULER_GAMMA, PI};
use crate::sample::SortedSample;

/// Asymptotic covariance of the likelihood estimator for one observation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MleCovariance {
    pub matrix: Vec<Vec<f64>>,
    pub det: f64,
}

impl MleCovariance {
    pub fn dim(&self) -> usize {
        self.matrix.len()
    }
}

/// `S_MLE` at the given parameters.
pub fn mle_covariance(params: &ModelParams) -> MleCovariance {
    match *params {
        ModelParams::Pareto { alpha } => MleCovariance {
            matrix: vec![vec![alpha * alpha]],
            det: alpha * alpha,
        },
        ModelParams::Lognormal { sigma, .. } => {
            let s2 = sigma * sigma;
            MleCovariance {
                matrix: vec![vec![s2, 0.0], vec![0.0, 0.5 * s2]],
                det: 0.5 * s2 * s2,
            }
        }
        ModelParams::Frechet { alpha, sigma } => {
            let f = 6.0 / (PI * PI);
            let g = EULER_GAMMA - 1.0;
            let off = f * g * sigma;
            let m11 = f * alpha * alpha;
            let m22 = f * (sigma / alpha).powi(2) * (g * g + PI * PI / 6.0);
            MleCovariance {
                matrix: vec![vec![m11, off], vec![off, m22]],
                det: f * sigma * sigma,
            }
        }
    }
}

fn result(spec: ModelSpec, params: ModelParams, n: usize) -> FitResult {
    let cov = mle_covariance(&params);
    let cov_over_n = cov
        .matrix
        .iter()
        .map(|r| r.iter().map(|v| v / n as f64).collect())
        .collect();
    FitResult {
        method: Method::Mle,
        spec,
        params,
        n,
        cov_over_n: Some(cov_over_n),
        are_vs_mle: 1.0,
        diagnostics: Diagnostics::default(),
    }
}

/// `α̂ = n / Σ log(x / x0)`.
pub fn mle_pareto(sample: &SortedSample, spec: &ModelSpec) -> Result<FitResult> {
    require_family(spec, Family::Pareto)?;
    spec.check_sample(sample)?;
    let total: f64 = sample.values().iter().map(|x| (x / spec.x0).ln()).sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate(
            "every observation equals the threshold; the Pareto shape is not identified".into(),
        ));
    }
    let params = ModelParams::pareto(sample.n() as f64 / total)?;
    Ok(result(*spec, params, sample.n()))
}

/// Mean and root-mean-square deviation (divisor `n`) of `log(x - x0)`.
pub fn mle_lognormal(sample: &SortedSample, spec: &ModelSpec) -> Result<FitResult> {
    require_family(spec, Family::Lognormal)?;
    spec.check_sample(sample)?;
    if sample.n() < 2 {
        return Err(Error::Degenerate("a two-parameter fit needs at least 2 observations".into()));
    }
    let logs: Vec<f64> = sample.values().iter().map(|x| (x - spec.x0).ln()).collect();
    let n = logs.len() as f64;
    let theta = logs.iter().sum::<f64>() / n;
    let sigma = (logs.iter().map(|l| (l - theta).powi(2)).sum::<f64>() / n).sqrt();
    if !(sigma > 0.0) {
        return Err(Error::Degenerate("the logs of the sample have zero variance".into()));
    }
    let params = ModelParams::lognormal(theta, sigma)?;
    Ok(result(*spec, params, sample.n()))
}

/// Profile score of the Fréchet likelihood in `α`, evaluated with every
/// power taken relative to the smallest observation so that no term exceeds 1.
pub struct FrechetScore {
    /// `log x_i - mean(log x)`.
    centred: Vec<f64>,
    /// `log(x_min / x_i) <= 0`.
    rel: Vec<f64>,
    ln_min: f64,
}

impl FrechetScore {
    pub fn new(sample: &SortedSample) -> Result<Self> {
        ModelSpec::frechet().check_sample(sample)?;
        let logs: Vec<f64> = sample.values().iter().map(|x| x.ln()).collect();
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        let ln_min = logs[0];
        Ok(Self {
            centred: logs.iter().map(|l| l - mean).collect(),
            rel: logs.iter().map(|l| ln_min - l).collect(),
            ln_min,
        })
    }

    /// `ξ(α) = 1/α + Σ x^-α log x / Σ x^-α - mean(log x)`.
    pub fn xi(&self, alpha: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (c, r) in self.centred.iter().zip(&self.rel) {
            let t = (alpha * r).exp();
            num += t * c;
            den += t;
        }
        1.0 / alpha + num / den
    }

    /// `σ̂ = (mean x^-α)^(-1/α)`.
    pub fn sigma(&self, alpha: f64) -> f64 {
        let mean = self.rel.iter().map(|r| (alpha * r).exp()).sum::<f64>() / self.rel.len() as f64;
        (self.ln_min - mean.ln() / alpha).exp()
    }
}

/// Fréchet fit: `α̂` is the zero of the decreasing profile score.
pub fn mle_frechet(sample: &SortedSample) -> Result<FitResult> {
    let score = FrechetScore::new(sample)?;
    let spread = score.centred.iter().map(|c| c * c).sum::<f64>() / score.centred.len() as f64;
    if !(spread > 0.0) {
        return Err(Error::Degenerate(
            "constant sample: the Fréchet score 1/α has no zero".into(),
        ));
    }
    // For a Fréchet sample the sd of log x is π / (α √6).
    let guess = PI / (6.0 * spread).sqrt();
    let alpha = find_root_decreasing(|a| score.xi(a), 0.1 * guess, 10.0 * guess, 1e-10)
        .map_err(|e| Error::Degenerate(format!("the Fréchet score has no zero ({e})")))?;
    let params = ModelParams::frechet(alpha, score.sigma(alpha))?;
    Ok(result(ModelSpec::frechet(), params, sample.n()))
}

/// Dispatches to the family's likelihood fit.
pub fn mle(sample: &SortedSample, spec: &ModelSpec) -> Result<FitResult> {
    match spec.family {
        Family::Pareto => mle_pareto(sample, spec),
        Family::Lognormal => mle_lognormal(sample, spec),
        Family::Frechet => mle_frechet(sample),
    }
}

fn require_family(spec: &ModelSpec, family: Family) -> Result<()> {
    if spec.family == family {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{} likelihood fit called with a {} model",
            family.name(),
            spec.family.name()
        )))
    }
}
