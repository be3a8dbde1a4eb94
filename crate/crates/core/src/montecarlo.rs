//! Batched Monte Carlo comparison of the estimators: standardized means and
//! finite-sample relative efficiencies with their across-batch spread.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lfit::{are, fit, IntegrationOptions};
use crate::mlefit::{mle, mle_covariance, MleCovariance};
use crate::models::{derive_seed, sample, ModelParams, ModelSpec};
use crate::weights::KumaraswamyShape;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Estimator {
    Mle,
    Kumaraswamy { a: f64, b: f64 },
}

impl Estimator {
    pub fn shape(a: f64, b: f64) -> Result<Self> {
        KumaraswamyShape::new(a, b)?;
        Ok(Self::Kumaraswamy { a, b })
    }

    pub fn label(&self) -> String {
        match self {
            Estimator::Mle => "MLE".into(),
            Estimator::Kumaraswamy { a, b } => format!("J({a},{b})"),
        }
    }

    fn fit(&self, data: &crate::SortedSample, spec: &ModelSpec, opts: &IntegrationOptions) -> Result<Vec<f64>> {
        let r = match *self {
            Estimator::Mle => mle(data, spec)?,
            Estimator::Kumaraswamy { a, b } => fit(data, &KumaraswamyShape::new(a, b)?, spec, opts)?,
        };
        Ok(r.params.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub spec: ModelSpec,
    pub truth: ModelParams,
    pub estimators: Vec<Estimator>,
    pub n_values: Vec<usize>,
    pub reps_per_batch: usize,
    pub batches: usize,
    pub master_seed: u64,
    #[serde(skip)]
    pub integration: IntegrationOptions,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.truth.family() != self.spec.family {
            return bad("true parameters do not match the model family");
        }
        if self.estimators.is_empty() {
            return bad("at least one estimator is required");
        }
        if self.n_values.is_empty() || self.n_values.iter().any(|&n| n < 2) {
            return bad("every sample size must be at least 2");
        }
        if self.reps_per_batch < 2 {
            return bad("reps_per_batch must be at least 2");
        }
        if self.batches < 2 {
            return bad("batches must be at least 2 for a standard error");
        }
        if self.truth.to_vec().contains(&0.0) {
            return bad("standardized means need nonzero true parameters");
        }
        self.integration.validate()
    }
}

/// Summary for one estimator at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRow {
    pub estimator: Estimator,
    pub n: usize,
    pub parameters: Vec<String>,
    /// Across-batch mean of `mean(estimate) / true value`, per parameter.
    pub std_mean: Vec<f64>,
    /// Across-batch standard deviation of the same.
    pub std_mean_se: Vec<f64>,
    pub re: f64,
    pub re_se: f64,
    /// Replicates whose fit failed; they are excluded from the statistics.
    pub failures: usize,
    /// Large-sample limit of the RE; `None` if it could not be computed.
    pub asymptotic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub rows: Vec<SimulationRow>,
}

/// `(det(S_MLE / n))^(1/k) / (det M)^(1/k)` where `M` is the empirical mean
/// squared error matrix about the truth.
pub fn relative_efficiency(estimates: &[Vec<f64>], truth: &[f64], mle_cov: &MleCovariance, n: usize) -> Result<f64> {
    let k = truth.len();
    if estimates.len() < 2 {
        return Err(Error::Degenerate("relative efficiency needs at least 2 estimates".into()));
    }
    if !(k == 1 || k == 2) || mle_cov.dim() != k || estimates.iter().any(|e| e.len() != k) {
        return Err(Error::InvalidParameter("dimension mismatch in relative efficiency".into()));
    }
    let m = estimates.len() as f64;
    let mut mse = [[0.0; 2]; 2];
    for e in estimates {
        for i in 0..k {
            for j in 0..k {
                mse[i][j] += (e[i] - truth[i]) * (e[j] - truth[j]) / m;
            }
        }
    }
    let det_m = if k == 1 {
        mse[0][0]
    } else {
        mse[0][0] * mse[1][1] - mse[0][1] * mse[1][0]
    };
    if !(det_m > 0.0) {
        return Err(Error::Degenerate("the empirical error matrix is singular".into()));
    }
    let kf = k as f64;
    let numerator = mle_cov.det / (n as f64).powi(k as i32);
    Ok((numerator / det_m).powf(1.0 / kf))
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}

/// Runs every batch; each replicate draws one sample from its own seeded
/// stream and fits all estimators to it, so the result does not depend on
/// the number of worker threads.
pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    let truth = config.truth.to_vec();
    let k = truth.len();
    let mle_cov = mle_covariance(&config.truth);
    let ne = config.estimators.len();
    let mut rows = Vec::new();

    for &n in &config.n_values {
        let jobs: Vec<(usize, usize)> = (0..config.batches)
            .flat_map(|b| (0..config.reps_per_batch).map(move |r| (b, r)))
            .collect();
        let fits: Vec<Vec<Option<Vec<f64>>>> = jobs
            .par_iter()
            .map(|&(b, r)| {
                let seed = derive_seed(config.master_seed, &[n as u64, b as u64, r as u64]);
                match sample(&config.spec, &config.truth, n, seed) {
                    Ok(data) => config
                        .estimators
                        .iter()
                        .map(|e| e.fit(&data, &config.spec, &config.integration).ok())
                        .collect(),
                    Err(_) => vec![None; ne],
                }
            })
            .collect();

        for (ei, est) in config.estimators.iter().enumerate() {
            let mut failures = 0;
            let mut batch_means: Vec<Vec<f64>> = vec![Vec::new(); k];
            let mut batch_re = Vec::new();
            for batch in fits.chunks(config.reps_per_batch) {
                let ok: Vec<Vec<f64>> = batch.iter().filter_map(|f| f[ei].clone()).collect();
                failures += batch.len() - ok.len();
                if ok.is_empty() {
                    continue;
                }
                for j in 0..k {
                    let mean = ok.iter().map(|e| e[j]).sum::<f64>() / ok.len() as f64;
                    batch_means[j].push(mean / truth[j]);
                }
                if let Ok(re) = relative_efficiency(&ok, &truth, &mle_cov, n) {
                    batch_re.push(re);
                }
            }
            let (std_mean, std_mean_se) = batch_means.iter().map(|v| mean_sd(v)).unzip();
            let (re, re_se) = if batch_re.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                mean_sd(&batch_re)
            };
            let asymptotic = match *est {
                Estimator::Mle => Some(1.0),
                Estimator::Kumaraswamy { a, b } => KumaraswamyShape::new(a, b)
                    .and_then(|s| are(config.spec.family, &s, &config.integration))
                    .ok(),
            };
            rows.push(SimulationRow {
                estimator: *est,
                n,
                parameters: config.truth.names().iter().map(|s| s.to_string()).collect(),
                std_mean,
                std_mean_se,
                re,
                re_se,
                failures,
                asymptotic,
            });
        }
    }
    Ok(SimulationReport {
        config: config.clone(),
        rows,
    })
}

/// One CSV line per (estimator, n, parameter).
pub fn write_report_csv<W: Write>(report: &SimulationReport, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "estimator", "a", "b", "n", "parameter", "std_mean", "std_mean_se", "re", "re_se", "failures", "asymptotic",
    ])
    .map_err(io)?;
    for row in &report.rows {
        let (a, b) = match row.estimator {
            Estimator::Mle => (String::new(), String::new()),
            Estimator::Kumaraswamy { a, b } => (a.to_string(), b.to_string()),
        };
        for (j, name) in row.parameters.iter().enumerate() {
            w.write_record([
                row.estimator.label(),
                a.clone(),
                b.clone(),
                row.n.to_string(),
                name.clone(),
                row.std_mean[j].to_string(),
                row.std_mean_se[j].to_string(),
                row.re.to_string(),
                row.re_se.to_string(),
                row.failures.to_string(),
                row.asymptotic.map_or(String::new(), |v| v.to_string()),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}
