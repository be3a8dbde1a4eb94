use std::io::Write;

use serde_json::{json, Map, Value};

use kumlest::dataset::{load_csv, replace_max, Column, Header, LossDataset};
use kumlest::gof::{ks_test, qq_data, write_qq_csv, KsResult};
use kumlest::lfit::{are_grid, fit, FitResult, IntegrationOptions, Method, Truncation};
use kumlest::mlefit::mle;
use kumlest::models::{Family, ModelParams, ModelSpec};
use kumlest::montecarlo::{run_simulation, write_report_csv, Estimator, SimulationConfig};
use kumlest::weights::{plotting_position, weight_vector, KumaraswamyShape};
use kumlest::{Error, Result, SortedSample};

use crate::args::{
    AreArgs, DataArgs, FitArgs, Format, IntegrationArgs, KsArgs, ModelArgs, OutputArgs, SimulateArgs, WeightsArgs,
};

fn list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{what}: {t:?} is not a number")))
        })
        .collect()
}

fn shape_arg(s: &str) -> Result<KumaraswamyShape> {
    match list(s, "--weights")?.as_slice() {
        [a, b] => KumaraswamyShape::new(*a, *b),
        _ => Err(Error::Config(format!("--weights expects A,B, got {s:?}"))),
    }
}

fn model_spec(m: &ModelArgs) -> Result<ModelSpec> {
    let family: Family = m.model.parse()?;
    ModelSpec::new(family, m.x0)
}

fn integration(args: &IntegrationArgs, family: Family) -> Result<IntegrationOptions> {
    let t = match args.window.as_deref() {
        None => Truncation::Full,
        Some("reference") => Truncation::reference(family),
        Some(s) => Truncation::Window(
            s.parse()
                .map_err(|_| Error::Config(format!("--window expects a number or 'reference', got {s:?}")))?,
        ),
    };
    let opts = IntegrationOptions::with_truncation(t);
    opts.validate()?;
    Ok(opts)
}

fn load(path: &std::path::Path, column: &str, header: &str) -> Result<LossDataset> {
    let column: Column = column.parse()?;
    let header: Header = header.parse()?;
    load_csv(path, &column, header)
}

fn load_data(d: &DataArgs) -> Result<SortedSample> {
    let mut data = load(&d.input, &d.column, &d.header)?;
    if let Some(v) = d.replace_max {
        data = replace_max(&data, v)?;
    }
    data.to_sample()
}

fn emit(out: &OutputArgs, json: Value, csv: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    match out.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &json).map_err(|e| Error::Io(e.to_string()))?;
            buf.push(b'\n');
        }
        Format::Csv => csv(&mut buf)?,
    }
    match &out.out {
        Some(path) => std::fs::write(path, &buf).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(&buf).map_err(|e| Error::Io(e.to_string())),
    }
}

fn csv_writer(buf: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::Writer::from_writer(buf)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn params_json(p: &ModelParams) -> Value {
    let mut m = Map::new();
    for (name, v) in p.names().iter().zip(p.to_vec()) {
        m.insert(name.to_string(), json!(v));
    }
    Value::Object(m)
}

fn ks_json(k: &KsResult) -> Value {
    json!({"d": k.d, "p": k.p_value, "reject": k.reject_at_5pct})
}

struct FitRecord {
    fit: FitResult,
    ks: KsResult,
}

impl FitRecord {
    fn ab(&self) -> (Option<f64>, Option<f64>) {
        match self.fit.method {
            Method::Kumaraswamy { a, b } => (Some(a), Some(b)),
            Method::Mle => (None, None),
        }
    }

    fn to_json(&self) -> Value {
        let (a, b) = self.ab();
        json!({
            "model": self.fit.spec.family.name(),
            "a": a,
            "b": b,
            "params": params_json(&self.fit.params),
            "cov_over_n": self.fit.cov_over_n,
            "are": self.fit.are_vs_mle,
            "ks": ks_json(&self.ks),
            "warnings": self.fit.diagnostics.warnings,
        })
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let spec = model_spec(&args.model)?;
    let opts = integration(&args.integration, spec.family)?;
    let data = load_data(&args.data)?;
    if args.weights.is_empty() && !args.mle {
        return Err(Error::Config("nothing to fit: give --weights A,B and/or --mle".into()));
    }
    let mut records = Vec::new();
    if args.mle {
        let f = mle(&data, &spec)?;
        let ks = ks_test(&data, &spec, &f.params)?;
        records.push(FitRecord { fit: f, ks });
    }
    for w in &args.weights {
        let f = fit(&data, &shape_arg(w)?, &spec, &opts)?;
        let ks = ks_test(&data, &spec, &f.params)?;
        records.push(FitRecord { fit: f, ks });
    }
    let json = if records.len() == 1 {
        records[0].to_json()
    } else {
        Value::Array(records.iter().map(FitRecord::to_json).collect())
    };
    emit(&args.output, json, |buf| {
        let mut w = csv_writer(buf);
        let names = kumlest::models::param_names(spec.family);
        let mut head = vec!["model", "a", "b"];
        head.extend(names.iter().copied());
        head.extend(["are", "ks_d", "ks_p", "reject"]);
        w.write_record(&head).map_err(csv_err)?;
        for r in &records {
            let (a, b) = r.ab();
            let mut row = vec![
                spec.family.name().to_string(),
                a.map_or(String::new(), |v| v.to_string()),
                b.map_or(String::new(), |v| v.to_string()),
            ];
            row.extend(r.fit.params.to_vec().iter().map(|v| v.to_string()));
            row.extend([
                r.fit.are_vs_mle.to_string(),
                r.ks.d.to_string(),
                r.ks.p_value.to_string(),
                r.ks.reject_at_5pct.to_string(),
            ]);
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    })
}

pub fn cmd_are(args: &AreArgs) -> Result<()> {
    let family: Family = args.model.parse()?;
    let opts = integration(&args.integration, family)?;
    let pick = |single: Option<f64>, grid: &Option<String>, name: &str| -> Result<Vec<f64>> {
        match (single, grid) {
            (Some(v), _) => Ok(vec![v]),
            (None, Some(g)) => list(g, name),
            (None, None) => Err(Error::Config(format!("give --{name} or --{name}-grid"))),
        }
    };
    let a_values = pick(args.a, &args.a_grid, "a")?;
    let b_values = pick(args.b, &args.b_grid, "b")?;
    let grid = are_grid(family, &a_values, &b_values, &opts)?;
    let json = json!({
        "model": family.name(),
        "truncation": opts.truncation,
        "a_values": grid.a_values,
        "b_values": grid.b_values,
        "cells": grid.cells,
    });
    emit(&args.output, json, |buf| {
        let mut w = csv_writer(buf);
        w.write_record(["a", "b", "are", "error"]).map_err(csv_err)?;
        for c in grid.cells.iter().flatten() {
            w.write_record([
                c.a.to_string(),
                c.b.to_string(),
                c.are.map_or(String::new(), |v| v.to_string()),
                c.error.clone().unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    })
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let spec = model_spec(&args.model)?;
    let truth = ModelParams::from_vec(spec.family, &list(&args.params, "--params")?)?;
    let mut estimators = Vec::new();
    if args.mle {
        estimators.push(Estimator::Mle);
    }
    for w in &args.weights {
        let s = shape_arg(w)?;
        estimators.push(Estimator::shape(s.a(), s.b())?);
    }
    let n_values = args
        .n
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("--n: {t:?} is not a sample size")))
        })
        .collect::<Result<Vec<_>>>()?;
    let config = SimulationConfig {
        spec,
        truth,
        estimators,
        n_values,
        reps_per_batch: args.reps,
        batches: args.batches,
        master_seed: args.seed,
        integration: integration(&args.integration, spec.family)?,
    };
    let report = run_simulation(&config)?;
    let json = serde_json::to_value(&report).map_err(|e| Error::Io(e.to_string()))?;
    emit(&args.output, json, |buf| write_report_csv(&report, buf))
}

pub fn cmd_ks(args: &KsArgs) -> Result<()> {
    let spec = model_spec(&args.model)?;
    let data = load_data(&args.data)?;
    let params = match (&args.params, &args.weights, args.mle) {
        (Some(p), _, _) => ModelParams::from_vec(spec.family, &list(p, "--params")?)?,
        (None, Some(w), false) => {
            let opts = integration(&args.integration, spec.family)?;
            fit(&data, &shape_arg(w)?, &spec, &opts)?.params
        }
        (None, None, true) => mle(&data, &spec)?.params,
        _ => return Err(Error::Config("give exactly one of --params, --weights A,B or --mle".into())),
    };
    let k = ks_test(&data, &spec, &params)?;
    if let Some(path) = &args.qq_out {
        let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        write_qq_csv(&qq_data(&data, &spec, &params)?, file)?;
    }
    let json = json!({
        "model": spec.family.name(),
        "params": params_json(&params),
        "d": k.d,
        "p_value": k.p_value,
        "reject_at_5pct": k.reject_at_5pct,
        "n": k.n,
    });
    emit(&args.output, json, |buf| {
        let mut w = csv_writer(buf);
        w.write_record(["d", "p_value", "reject_at_5pct", "n"]).map_err(csv_err)?;
        w.write_record([k.d.to_string(), k.p_value.to_string(), k.reject_at_5pct.to_string(), k.n.to_string()])
            .map_err(csv_err)?;
        w.flush().map_err(|e| Error::Io(e.to_string()))
    })
}

pub fn cmd_weights(args: &WeightsArgs) -> Result<()> {
    let shape = KumaraswamyShape::new(args.a, args.b)?;
    let data = match &args.input {
        Some(p) => Some(load(p, &args.column, &args.header)?.to_sample()?),
        None => None,
    };
    let n = match (&data, args.n) {
        (Some(d), Some(n)) if d.n() != n => {
            return Err(Error::Config(format!("--n {n} does not match the {} observations", d.n())))
        }
        (Some(d), _) => d.n(),
        (None, Some(n)) => n,
        (None, None) => return Err(Error::Config("give --n or --input".into())),
    };
    let w = weight_vector(n, shape)?;
    let rows: Vec<Value> = w
        .weights
        .iter()
        .enumerate()
        .map(|(i, &wi)| {
            let mut row = json!({"i": i + 1, "u": plotting_position(i + 1, n).u, "weight": wi});
            if let Some(d) = &data {
                let x = d.values()[i];
                row["x"] = json!(x);
                row["weighted"] = json!(wi * x);
            }
            row
        })
        .collect();
    let json = json!({"a": args.a, "b": args.b, "n": n, "mean_weight": w.mean(), "rows": rows});
    emit(&args.output, json, |buf| {
        let mut wr = csv_writer(buf);
        let mut head = vec!["i", "u", "weight"];
        if data.is_some() {
            head.extend(["x", "weighted"]);
        }
        wr.write_record(&head).map_err(csv_err)?;
        for (i, &wi) in w.weights.iter().enumerate() {
            let mut rec = vec![(i + 1).to_string(), plotting_position(i + 1, n).u.to_string(), wi.to_string()];
            if let Some(d) = &data {
                let x = d.values()[i];
                rec.extend([x.to_string(), (wi * x).to_string()]);
            }
            wr.write_record(&rec).map_err(csv_err)?;
        }
        wr.flush().map_err(|e| Error::Io(e.to_string()))
    })
}
