//! Checks shared by the property suite and the acceptance report. Each check
//! takes its inputs explicitly and returns a description of the failure.

#![allow(dead_code)]

use kumlest::lfit::{
    self, fit, fit_frechet, fit_location_scale, fit_pareto, frechet_constants, lambda_triple, location_scale_constants,
    pareto_integrals, population_lmoments, sample_lmoments, IntegrationOptions, StandardNormal, Truncation,
};
use kumlest::mlefit::{mle, mle_lognormal, mle_pareto};
use kumlest::models::{h_transforms, sample, Family, ModelParams, ModelSpec};
use kumlest::montecarlo::{run_simulation, Estimator, SimulationConfig};
use kumlest::quadrature::{alpha_profile_variance, bridge_gram, omega_forms, Interval, QuadratureSpec};
use kumlest::unit::UnitPoint;
use kumlest::weights::{weight_vector, KumaraswamyShape};
use kumlest::{Error, SortedSample};

pub const GRID_A: [f64; 10] = [0.3, 0.5, 0.8, 1.0, 1.2, 2.0, 4.0, 5.0, 7.0, 10.0];
pub const GRID_B: [f64; 10] = [0.3, 0.5, 0.8, 1.0, 1.3, 2.0, 5.0, 7.0, 15.0, 20.0];

pub type Check = std::result::Result<(), String>;

pub fn shape(a: f64, b: f64) -> KumaraswamyShape {
    KumaraswamyShape::new(a, b).unwrap()
}

pub fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1e-300)
}

pub fn spec_for(family: Family) -> ModelSpec {
    match family {
        Family::Pareto => ModelSpec::pareto(1.0).unwrap(),
        Family::Lognormal => ModelSpec::lognormal(0.0).unwrap(),
        Family::Frechet => ModelSpec::frechet(),
    }
}

/// η > 0, Λ1 > 0, Λ1Λ3 > Λ2², τ > 0 and Ψ1Ψ3 > Ψ2² on the table grid.
pub fn corollary_positivity(opts: &IntegrationOptions) -> Check {
    let mut bad = Vec::new();
    for &a in &GRID_A {
        for &b in &GRID_B {
            let sh = shape(a, b);
            let c = location_scale_constants(&StandardNormal, &sh, opts).map_err(|e| e.to_string())?;
            let l = lambda_triple(&StandardNormal, &sh, opts).map_err(|e| e.to_string())?;
            let f = frechet_constants(&sh, opts).map_err(|e| e.to_string())?;
            if !(c.eta > 0.0 && l.lambda1 > 0.0 && l.gap() > 0.0 && f.tau > 0.0 && f.psi_gap() > 0.0) {
                bad.push(format!("({a},{b})"));
            }
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(format!("non-positive at {}", bad.join(" ")))
    }
}

/// A step function on (0, 1).
#[derive(Debug, Clone)]
pub struct Step {
    /// Strictly increasing interior breakpoints.
    pub breaks: Vec<f64>,
    /// One value per piece, `breaks.len() + 1` in all.
    pub values: Vec<f64>,
}

impl Step {
    pub fn new(mut breaks: Vec<f64>, values: Vec<f64>) -> Self {
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let values = values.into_iter().cycle().take(breaks.len() + 1).collect();
        Self { breaks, values }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.breaks.partition_point(|&b| b <= x)]
    }

    /// `<f, f> = ∫ G² - (∫ G)²` with `G(t) = ∫_t^1 f`; `G` is piecewise linear.
    pub fn exact_form(&self) -> f64 {
        let mut knots = vec![0.0];
        knots.extend(&self.breaks);
        knots.push(1.0);
        let m = self.values.len();
        let mut g = vec![0.0; m + 1];
        for i in (0..m).rev() {
            g[i] = g[i + 1] + self.values[i] * (knots[i + 1] - knots[i]);
        }
        let (mut s1, mut s2) = (0.0, 0.0);
        for i in 0..m {
            let h = knots[i + 1] - knots[i];
            s1 += h * (g[i] + g[i + 1]) / 2.0;
            s2 += h * (g[i] * g[i] + g[i] * g[i + 1] + g[i + 1] * g[i + 1]) / 3.0;
        }
        s2 - s1 * s1
    }
}

/// Piecewise-linear map sending the coarsest panel boundaries of the
/// quadrature mesh onto knots that include every breakpoint, so each panel
/// sees a polynomial integrand. Needs at most 7 breakpoints.
struct KnotMap {
    t: Vec<f64>,
    x: Vec<f64>,
}

impl KnotMap {
    fn new(breaks: &[f64]) -> Self {
        let lower = [2.0f64, 1.0, 0.5].map(|s| (-s).exp() / 2.0);
        let mut t = vec![0.0];
        t.extend(lower);
        t.push(0.5);
        t.extend(lower.iter().rev().map(|v| 1.0 - v));
        t.push(1.0);
        let interior = t.len() - 2;
        assert!(breaks.len() <= interior, "at most {interior} breakpoints");
        let mut x = vec![0.0];
        x.extend(breaks);
        x.push(1.0);
        while x.len() < t.len() {
            let i = (0..x.len() - 1)
                .max_by(|&i, &j| (x[i + 1] - x[i]).total_cmp(&(x[j + 1] - x[j])))
                .unwrap();
            x.insert(i + 1, 0.5 * (x[i] + x[i + 1]));
        }
        Self { t, x }
    }

    /// `(φ(t), φ'(t))`.
    fn eval(&self, t: f64) -> (f64, f64) {
        let i = (self.t.partition_point(|&v| v <= t).max(1) - 1).min(self.t.len() - 2);
        let slope = (self.x[i + 1] - self.x[i]) / (self.t[i + 1] - self.t[i]);
        (self.x[i] + slope * (t - self.t[i]), slope)
    }
}

/// Kernel form of a step function: nonnegative and equal to the exact value.
pub fn step_function_form(step: &Step) -> Check {
    let map = KnotMap::new(&step.breaks);
    let spec = QuadratureSpec::with_tolerances(1e-13, 1e-11);
    let g = bridge_gram(
        |t: UnitPoint| {
            let (x, dx) = map.eval(t.u);
            Some((UnitPoint::new(x), [step.eval(x) * dx]))
        },
        Interval::unit(),
        &spec,
    )
    .map_err(|e| e.to_string())?;
    let q = g.value[0][0];
    let exact = step.exact_form();
    if q < -1e-12 {
        return Err(format!("<f,f> = {q:e} < 0 for {step:?}"));
    }
    if (q - exact).abs() > 1e-10 * exact.max(1.0) {
        return Err(format!("<f,f> = {q} but exact {exact} for {step:?}"));
    }
    Ok(())
}

/// `f1(x) = 1 + p x^q` and `f2(x) = exp(r x) + s x²`, linearly independent of
/// `f1 f2` whenever `r != 0`.
pub fn cauchy_schwarz_strict(p: f64, q: f64, r: f64, s: f64) -> Check {
    let f1 = move |x: UnitPoint| 1.0 + p * x.u.powf(q);
    let f2 = move |x: UnitPoint| (r * x.u).exp() + s * x.u * x.u;
    let o = omega_forms(f1, f2, &QuadratureSpec::with_tolerances(1e-13, 1e-11)).map_err(|e| e.to_string())?;
    let scale = o.omega1 * o.omega3;
    if !(o.gap() > 1e-9 * scale) {
        return Err(format!("Ω1Ω3 - Ω2² = {:e} (Ω = {o:?}) for p={p} q={q} r={r} s={s}", o.gap()));
    }
    Ok(())
}

/// `f2 ≡ c` makes `f1 f2` a multiple of `f1`: equality in Cauchy-Schwarz.
pub fn cauchy_schwarz_equality(p: f64, q: f64, c: f64) -> Check {
    let f1 = move |x: UnitPoint| 1.0 + p * x.u.powf(q);
    let o = omega_forms(f1, move |_| c, &QuadratureSpec::with_tolerances(1e-13, 1e-11)).map_err(|e| e.to_string())?;
    if o.gap().abs() > 1e-12 {
        return Err(format!("Ω1Ω3 - Ω2² = {:e} for p={p} q={q} c={c}", o.gap()));
    }
    Ok(())
}

/// Asymptotic variances of both sample L-moments from the single-integral
/// α-profile form and from the Gram constants.
pub fn profile_vs_gram(params: &ModelParams, sh: &KumaraswamyShape) -> std::result::Result<Vec<(f64, f64)>, String> {
    let opts = IntegrationOptions::default();
    let spec = spec_for(params.family());
    let h = h_transforms(&spec);
    let one_d = QuadratureSpec::with_tolerances(1e-12, 1e-9);
    let j = |u: UnitPoint| sh.density_at(u);
    let e = |r: kumlest::Result<f64>| r.map_err(|e| e.to_string());
    let mut out = Vec::new();
    for idx in 1..=h.count() {
        let profile = e(alpha_profile_variance(j, |u| h.h_prime(idx, params, u), &one_d))?;
        let gram = match (*params, idx) {
            (ModelParams::Pareto { alpha }, _) => e(pareto_integrals(sh, &opts).map(|p| p.i2))? / (alpha * alpha),
            (ModelParams::Lognormal { theta, sigma }, i) => {
                let l = lambda_triple(&StandardNormal, sh, &opts).map_err(|e| e.to_string())?;
                if i == 1 {
                    sigma * sigma * l.lambda1
                } else {
                    4.0 * sigma * sigma * (theta * theta * l.lambda1 + 2.0 * theta * sigma * l.lambda2 + sigma * sigma * l.lambda3)
                }
            }
            (ModelParams::Frechet { alpha, sigma }, i) => {
                let f = frechet_constants(sh, &opts).map_err(|e| e.to_string())?;
                if i == 1 {
                    f.psi1 / (alpha * alpha)
                } else {
                    let ls = sigma.ln();
                    4.0 / (alpha * alpha) * (ls * ls * f.psi1 - 2.0 * ls * f.psi2 / alpha + f.psi3 / (alpha * alpha))
                }
            }
        };
        out.push((profile, gram));
    }
    Ok(out)
}

pub fn profile_matches_gram(params: &ModelParams, sh: &KumaraswamyShape) -> Check {
    for (i, (p, g)) in profile_vs_gram(params, sh)?.into_iter().enumerate() {
        if rel(p, g) > 1e-5 {
            return Err(format!("{params:?} {sh:?} moment {}: profile {p} vs double integral {g}", i + 1));
        }
    }
    Ok(())
}

/// At `a = b = 1` the Pareto and lognormal L-fits equal the likelihood fits.
pub fn uniform_fit_is_mle(family: Family, params: &ModelParams, n: usize, seed: u64) -> Check {
    let spec = match family {
        Family::Pareto => ModelSpec::pareto(2.5).unwrap(),
        _ => ModelSpec::lognormal(0.0).unwrap(),
    };
    let s = sample(&spec, params, n, seed).map_err(|e| e.to_string())?;
    let opts = IntegrationOptions::default();
    let u = KumaraswamyShape::uniform();
    let (l, m) = match family {
        Family::Pareto => (fit_pareto(&s, &u, &spec, &opts), mle_pareto(&s, &spec)),
        _ => (fit_location_scale(&s, &u, &spec, &opts), mle_lognormal(&s, &spec)),
    };
    let (l, m) = (l.map_err(|e| e.to_string())?.params.to_vec(), m.map_err(|e| e.to_string())?.params.to_vec());
    for (x, y) in l.iter().zip(&m) {
        if (x - y).abs() > 1e-9 * y.abs().max(1.0) {
            return Err(format!("{family:?} n={n} seed={seed}: L-fit {l:?} vs MLE {m:?}"));
        }
    }
    Ok(())
}

/// Scaling by `c`: Pareto with its threshold (any shape), lognormal and
/// Fréchet at the uniform weight, and the Fréchet likelihood fit.
pub fn scaling_equivariance(sh: &KumaraswamyShape, c: f64, n: usize, seed: u64) -> Check {
    let opts = IntegrationOptions::default();
    let e = |r: kumlest::Result<lfit::FitResult>| r.map(|f| f.params.to_vec()).map_err(|e| e.to_string());
    let close = |x: f64, y: f64, what: &str| {
        if rel(x, y) > 1e-11 {
            Err(format!("{what}: {x} vs {y} (shape {sh:?}, c={c}, seed={seed})"))
        } else {
            Ok(())
        }
    };

    let p1 = ModelSpec::pareto(2.0).unwrap();
    let pc = ModelSpec::pareto(2.0 * c).unwrap();
    let s = sample(&p1, &ModelParams::pareto(1.3).unwrap(), n, seed).map_err(|e| e.to_string())?;
    let a = e(fit_pareto(&s, sh, &p1, &opts))?;
    let b = e(fit_pareto(&s.scaled(c), sh, &pc, &opts))?;
    close(b[0], a[0], "Pareto alpha")?;

    let u = KumaraswamyShape::uniform();
    let ln = ModelSpec::lognormal(0.0).unwrap();
    let s = sample(&ln, &ModelParams::lognormal(2.0, 0.8).unwrap(), n, seed).map_err(|e| e.to_string())?;
    let a = e(fit_location_scale(&s, &u, &ln, &opts))?;
    let b = e(fit_location_scale(&s.scaled(c), &u, &ln, &opts))?;
    close(b[0], a[0] + c.ln(), "lognormal theta")?;
    close(b[1], a[1], "lognormal sigma")?;

    let s = sample(&ModelSpec::frechet(), &ModelParams::frechet(2.0, 3.0).unwrap(), n, seed).map_err(|e| e.to_string())?;
    let a = e(fit_frechet(&s, &u, &opts))?;
    let b = e(fit_frechet(&s.scaled(c), &u, &opts))?;
    close(b[0], a[0], "Frechet alpha")?;
    close(b[1], a[1] * c, "Frechet sigma")?;
    let a = e(mle(&s, &ModelSpec::frechet()))?;
    let b = e(mle(&s.scaled(c), &ModelSpec::frechet()))?;
    close(b[0], a[0], "Frechet MLE alpha")?;
    close(b[1], a[1] * c, "Frechet MLE sigma")
}

/// With non-uniform weights the log-scale shift `s = log c` moves the proxy
/// `μ2 - μ1²` by `2 s μ1 (1 - W) + s² (W - W²)`, `W` the mean weight.
pub fn proxy_shift_formula(sample_: &SortedSample, sh: &KumaraswamyShape, c: f64) -> Check {
    let ln = ModelSpec::lognormal(0.0).unwrap();
    let w = weight_vector(sample_.n(), *sh).map_err(|e| e.to_string())?.mean();
    let s = c.ln();
    let lm = sample_lmoments(sample_, sh, &ln).map_err(|e| e.to_string())?;
    let lc = sample_lmoments(&sample_.scaled(c), sh, &ln).map_err(|e| e.to_string())?;
    let want = lm.variance_proxy().unwrap() + 2.0 * s * lm.mu1 * (1.0 - w) + s * s * (w - w * w);
    let got = lc.variance_proxy().unwrap();
    let scale = lc.mu2.unwrap().abs().max(1.0);
    if (got - want).abs() > 1e-12 * scale {
        return Err(format!("proxy {got} vs {want} for {sh:?} c={c}"));
    }
    Ok(())
}

/// Population L-moments at the fitted parameters reproduce the sample ones.
/// A negative variance proxy is not a failure of the identity and passes.
pub fn moment_round_trip(params: &ModelParams, sh: &KumaraswamyShape, n: usize, seed: u64) -> Check {
    let spec = spec_for(params.family());
    let opts = IntegrationOptions::default();
    let s = sample(&spec, params, n, seed).map_err(|e| e.to_string())?;
    let f = match fit(&s, sh, &spec, &opts) {
        Ok(f) => f,
        Err(Error::NegativeVarianceProxy { .. }) => return Ok(()),
        Err(e) => return Err(e.to_string()),
    };
    let pop = population_lmoments(&f.params, sh, &opts).map_err(|e| e.to_string())?;
    let lm = f.diagnostics.lmoments.unwrap();
    if (pop.mu1 - lm.mu1).abs() > 1e-9 * lm.mu1.abs().max(1.0) {
        return Err(format!("mu1 {} vs {} ({params:?}, {sh:?}, seed {seed})", pop.mu1, lm.mu1));
    }
    if let (Some(a), Some(b)) = (pop.mu2, lm.mu2) {
        if (a - b).abs() > 1e-9 * b.abs().max(1.0) {
            return Err(format!("mu2 {a} vs {b} ({params:?}, {sh:?}, seed {seed})"));
        }
    }
    Ok(())
}

/// Identical reports on one worker and on `threads` workers.
pub fn simulation_determinism(family: Family, seed: u64, threads: usize) -> Check {
    let (spec, truth) = match family {
        Family::Pareto => (ModelSpec::pareto(1.0).unwrap(), ModelParams::pareto(0.75).unwrap()),
        Family::Lognormal => (ModelSpec::lognormal(0.0).unwrap(), ModelParams::lognormal(5.0, 3.0).unwrap()),
        Family::Frechet => (ModelSpec::frechet(), ModelParams::frechet(2.0, 2.0).unwrap()),
    };
    let config = SimulationConfig {
        spec,
        truth,
        estimators: vec![Estimator::Mle, Estimator::shape(1.2, 1.3).unwrap()],
        n_values: vec![40, 90],
        reps_per_batch: 25,
        batches: 3,
        master_seed: seed,
        integration: IntegrationOptions::with_truncation(Truncation::reference(family)),
    };
    let pool = |t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
    let a = pool(1).install(|| run_simulation(&config)).map_err(|e| e.to_string())?;
    let b = pool(threads).install(|| run_simulation(&config)).map_err(|e| e.to_string())?;
    if a != b {
        return Err(format!("{family:?} seed {seed}: reports differ between 1 and {threads} workers"));
    }
    Ok(())
}
