//! Kolmogorov-Smirnov test against a fully specified model and
//! quantile-quantile data for plotting.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{cdf_point, quantile_point, ModelParams, ModelSpec};
use crate::numerics::kolmogorov_pvalue;
use crate::sample::SortedSample;
use crate::weights::plotting_position;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub d: f64,
    pub p_value: f64,
    /// `p_value < 0.05`.
    pub reject_at_5pct: bool,
    pub n: usize,
}

/// One-sample test with the parameters treated as known.
pub fn ks_test(sample: &SortedSample, spec: &ModelSpec, params: &ModelParams) -> Result<KsResult> {
    spec.check_sample(sample)?;
    let n = sample.n() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sample.values().iter().enumerate() {
        let f = cdf_point(spec, params, x)?;
        let above = (i + 1) as f64 / n - f.u;
        // F - (i-1)/n = (1 - (i-1)/n) - (1 - F), taken from the complement
        // so the upper tail keeps its digits.
        let below = (n - i as f64) / n - f.c;
        d = d.max(above).max(below);
    }
    let d = d.clamp(0.0, 1.0);
    let p_value = kolmogorov_pvalue(d, sample.n());
    Ok(KsResult {
        d,
        p_value,
        reject_at_5pct: p_value < 0.05,
        n: sample.n(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QqPoint {
    pub theoretical: f64,
    pub empirical: f64,
}

/// Pairs `(F^-1(i/(n+1)), X_(i))`.
pub fn qq_data(sample: &SortedSample, spec: &ModelSpec, params: &ModelParams) -> Result<Vec<QqPoint>> {
    let n = sample.n();
    sample
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            Ok(QqPoint {
                theoretical: quantile_point(spec, params, plotting_position(i + 1, n))?,
                empirical: x,
            })
        })
        .collect()
}

/// Two-column CSV with a header.
pub fn write_qq_csv<W: Write>(points: &[QqPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theoretical", "empirical"]).map_err(io_error)?;
    for p in points {
        w.write_record([p.theoretical.to_string(), p.empirical.to_string()])
            .map_err(io_error)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

fn io_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
