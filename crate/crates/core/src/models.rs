//! Severity families: distribution and quantile functions, inverse-CDF
//! sampling, and the log transforms used by the L-estimators.

use rand::distr::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};
use crate::sample::SortedSample;
use crate::unit::UnitPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Single-parameter Pareto with known threshold.
    Pareto,
    Lognormal,
    /// Fréchet with location fixed at 0.
    Frechet,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Pareto => "pareto",
            Family::Lognormal => "lognormal",
            Family::Frechet => "frechet",
        }
    }

    /// Number of estimated parameters.
    pub fn dim(&self) -> usize {
        match self {
            Family::Pareto => 1,
            _ => 2,
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pareto" | "pareto1" | "paretoi" => Ok(Family::Pareto),
            "lognormal" | "ln" => Ok(Family::Lognormal),
            "frechet" | "fréchet" => Ok(Family::Frechet),
            other => Err(Error::InvalidParameter(format!("unknown model family '{other}'"))),
        }
    }
}

/// A family together with its fixed threshold.
///
/// `x0` is the known Pareto scale, the lognormal threshold (observations
/// enter through `log(x - x0)`), and unused for the Fréchet family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub x0: f64,
}

impl ModelSpec {
    pub fn pareto(x0: f64) -> Result<Self> {
        if !(x0 > 0.0 && x0.is_finite()) {
            return Err(Error::InvalidParameter(format!("Pareto threshold must be positive, got {x0}")));
        }
        Ok(Self { family: Family::Pareto, x0 })
    }

    pub fn lognormal(x0: f64) -> Result<Self> {
        if !x0.is_finite() {
            return Err(Error::InvalidParameter(format!("lognormal threshold must be finite, got {x0}")));
        }
        Ok(Self { family: Family::Lognormal, x0 })
    }

    pub fn frechet() -> Self {
        Self { family: Family::Frechet, x0: 0.0 }
    }

    pub fn new(family: Family, x0: Option<f64>) -> Result<Self> {
        match family {
            Family::Pareto => Self::pareto(x0.ok_or_else(|| {
                Error::InvalidParameter("the Pareto model needs its threshold x0".into())
            })?),
            Family::Lognormal => Self::lognormal(x0.unwrap_or(0.0)),
            Family::Frechet => Ok(Self::frechet()),
        }
    }

    /// Checks that `x` lies in the support, where the log transforms are
    /// defined. The Pareto threshold itself is allowed (its transform is 0).
    pub fn check_support(&self, index: usize, x: f64) -> Result<()> {
        let ok = match self.family {
            Family::Pareto => x >= self.x0,
            Family::Lognormal => x > self.x0,
            Family::Frechet => x > 0.0,
        };
        if ok && x.is_finite() {
            Ok(())
        } else {
            let detail = match self.family {
                Family::Pareto => format!("Pareto needs x >= x0 = {}", self.x0),
                Family::Lognormal => format!("lognormal needs x > x0 = {}", self.x0),
                Family::Frechet => "Frechet needs x > 0".to_string(),
            };
            Err(Error::Support { index, value: x, detail })
        }
    }

    pub fn check_sample(&self, sample: &SortedSample) -> Result<()> {
        // Sorted ascending, so the smallest value decides.
        self.check_support(0, sample.min())?;
        if !sample.max().is_finite() {
            return Err(Error::Support {
                index: sample.n() - 1,
                value: sample.max(),
                detail: "observations must be finite".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModelParams {
    Pareto { alpha: f64 },
    Lognormal { theta: f64, sigma: f64 },
    Frechet { alpha: f64, sigma: f64 },
}

impl ModelParams {
    pub fn pareto(alpha: f64) -> Result<Self> {
        positive("alpha", alpha)?;
        Ok(Self::Pareto { alpha })
    }

    pub fn lognormal(theta: f64, sigma: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta must be finite, got {theta}")));
        }
        positive("sigma", sigma)?;
        Ok(Self::Lognormal { theta, sigma })
    }

    pub fn frechet(alpha: f64, sigma: f64) -> Result<Self> {
        positive("alpha", alpha)?;
        positive("sigma", sigma)?;
        Ok(Self::Frechet { alpha, sigma })
    }

    /// Builds parameters of `family` from a vector in canonical order:
    /// `(alpha)`, `(theta, sigma)` or `(alpha, sigma)`.
    pub fn from_vec(family: Family, v: &[f64]) -> Result<Self> {
        match (family, v) {
            (Family::Pareto, [alpha]) => Self::pareto(*alpha),
            (Family::Lognormal, [theta, sigma]) => Self::lognormal(*theta, *sigma),
            (Family::Frechet, [alpha, sigma]) => Self::frechet(*alpha, *sigma),
            _ => Err(Error::InvalidParameter(format!(
                "{} parameters need {} values, got {}",
                family.name(),
                family.dim(),
                v.len()
            ))),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Self::Pareto { .. } => Family::Pareto,
            Self::Lognormal { .. } => Family::Lognormal,
            Self::Frechet { .. } => Family::Frechet,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        match *self {
            Self::Pareto { alpha } => vec![alpha],
            Self::Lognormal { theta, sigma } => vec![theta, sigma],
            Self::Frechet { alpha, sigma } => vec![alpha, sigma],
        }
    }

    pub fn names(&self) -> &'static [&'static str] {
        param_names(self.family())
    }
}

pub fn param_names(family: Family) -> &'static [&'static str] {
    match family {
        Family::Pareto => &["alpha"],
        Family::Lognormal => &["theta", "sigma"],
        Family::Frechet => &["alpha", "sigma"],
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_pair(spec: &ModelSpec, params: &ModelParams) -> Result<()> {
    if spec.family != params.family() {
        return Err(Error::InvalidParameter(format!(
            "parameters for {} supplied to a {} model",
            params.family().name(),
            spec.family.name()
        )));
    }
    Ok(())
}

/// Distribution function, returned with its complement.
pub fn cdf_point(spec: &ModelSpec, params: &ModelParams, x: f64) -> Result<UnitPoint> {
    check_pair(spec, params)?;
    let below = match spec.family {
        Family::Pareto | Family::Lognormal => x <= spec.x0,
        Family::Frechet => x <= 0.0,
    };
    if x.is_nan() || (below && !(spec.family == Family::Pareto && x == spec.x0)) {
        return Err(Error::Support {
            index: 0,
            value: x,
            detail: format!("below the lower end of the {} support", spec.family.name()),
        });
    }
    Ok(match *params {
        ModelParams::Pareto { alpha } => {
            // 1 - (x/x0)^(-alpha)
            UnitPoint::from_ln_complement(-alpha * (x / spec.x0).ln())
        }
        ModelParams::Lognormal { theta, sigma } => {
            let z = ((x - spec.x0).ln() - theta) / sigma;
            UnitPoint::from_parts(std_normal_cdf(z), std_normal_sf(z))
        }
        ModelParams::Frechet { alpha, sigma } => {
            // exp(-(sigma/x)^alpha)
            UnitPoint::from_ln(-(alpha * (sigma / x).ln()).exp())
        }
    })
}

pub fn cdf(spec: &ModelSpec, params: &ModelParams, x: f64) -> Result<f64> {
    Ok(cdf_point(spec, params, x)?.u)
}

/// Normal score of an interior point, accurate in both tails.
pub(crate) fn normal_score(u: UnitPoint) -> f64 {
    if u.u <= 0.5 {
        std_normal_quantile(u.u).unwrap_or(f64::NEG_INFINITY)
    } else {
        -std_normal_quantile(u.c).unwrap_or(f64::NEG_INFINITY)
    }
}

/// Quantile at a point carrying its own complement.
pub fn quantile_point(spec: &ModelSpec, params: &ModelParams, u: UnitPoint) -> Result<f64> {
    check_pair(spec, params)?;
    if !u.is_interior() {
        return Err(Error::Domain(format!("quantile needs 0 < u < 1, got {}", u.u)));
    }
    Ok(match *params {
        ModelParams::Pareto { alpha } => spec.x0 * (-u.ln_complement() / alpha).exp(),
        ModelParams::Lognormal { theta, sigma } => spec.x0 + (theta + sigma * normal_score(u)).exp(),
        ModelParams::Frechet { alpha, sigma } => sigma * (-u.ln()).powf(-1.0 / alpha),
    })
}

pub fn quantile(spec: &ModelSpec, params: &ModelParams, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("quantile needs 0 < u < 1, got {u}")));
    }
    quantile_point(spec, params, UnitPoint::new(u))
}

/// Mixes a seed with stream coordinates (SplitMix64 finalizer); used to key
/// independent generator streams.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut z = master;
    for &p in parts {
        z = splitmix(z ^ splitmix(p.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    splitmix(z)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n` draws by inverse-CDF sampling from a ChaCha stream keyed by `seed`,
/// sorted ascending.
pub fn sample(spec: &ModelSpec, params: &ModelParams, n: usize, seed: u64) -> Result<SortedSample> {
    check_pair(spec, params)?;
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n)
        .map(|_| {
            let u: f64 = Open01.sample(&mut rng);
            quantile_point(spec, params, UnitPoint::new(u))
        })
        .collect::<Result<Vec<f64>>>()?;
    SortedSample::new(values, format!("seed {seed}"))
}

/// The transforms `h_j` applied to observations and the derivatives of the
/// composed functions `H_j = h_j ∘ F^{-1}` on (0, 1).
///
/// Pareto uses the single transform `log(x / x0)`; the lognormal family uses
/// `log(x - x0)` and its square; the Fréchet family uses `log x` and its
/// square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HTransforms {
    spec: ModelSpec,
}

pub fn h_transforms(spec: &ModelSpec) -> HTransforms {
    HTransforms { spec: *spec }
}

impl HTransforms {
    pub fn count(&self) -> usize {
        self.spec.family.dim()
    }

    /// `log x` shifted or scaled by the threshold.
    fn log_x(&self, x: f64) -> f64 {
        match self.spec.family {
            Family::Pareto => (x / self.spec.x0).ln(),
            Family::Lognormal => (x - self.spec.x0).ln(),
            Family::Frechet => x.ln(),
        }
    }

    /// `h_j(x)` for `j = 1, 2`.
    pub fn h(&self, j: usize, x: f64) -> f64 {
        let l = self.log_x(x);
        match j {
            1 => l,
            2 => l * l,
            _ => panic!("transform index must be 1 or 2"),
        }
    }

    /// `H_j(u) = h_j(F^{-1}(u))`.
    pub fn h_of_quantile(&self, j: usize, params: &ModelParams, u: UnitPoint) -> f64 {
        let h1 = match *params {
            ModelParams::Pareto { alpha } => -u.ln_complement() / alpha,
            ModelParams::Lognormal { theta, sigma } => theta + sigma * normal_score(u),
            ModelParams::Frechet { alpha, sigma } => sigma.ln() - (-u.ln()).ln() / alpha,
        };
        if j == 1 {
            h1
        } else {
            h1 * h1
        }
    }

    /// `H_j'(u)`.
    pub fn h_prime(&self, j: usize, params: &ModelParams, u: UnitPoint) -> f64 {
        let d1 = match *params {
            ModelParams::Pareto { alpha } => 1.0 / (alpha * u.c),
            ModelParams::Lognormal { sigma, .. } => sigma / std_normal_pdf(normal_score(u)),
            ModelParams::Frechet { alpha, .. } => -1.0 / (alpha * u.u * u.ln()),
        };
        if j == 1 {
            d1
        } else {
            2.0 * self.h_of_quantile(1, params, u) * d1
        }
    }
}
