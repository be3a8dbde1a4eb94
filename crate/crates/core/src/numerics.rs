//! Special functions, constants and scalar root finding shared by the
//! estimators.

use crate::error::{Error, Result};
use statrs::function::erf;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const PI: f64 = std::f64::consts::PI;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Named view of the constants, for callers that want them as a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub euler_gamma: f64,
    pub pi: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            euler_gamma: EULER_GAMMA,
            pi: PI,
        }
    }
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, accurate in both tails.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Upper tail `1 - Phi(x)` without cancellation.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of the standard normal distribution function.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("normal quantile needs 0 < p < 1, got {p}")));
    }
    if p > 0.5 {
        // 1 - p is exact here, and the lower-tail branch keeps relative accuracy.
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

fn lower_quantile(p: f64) -> f64 {
    let x = -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p);
    let dens = std_normal_pdf(x);
    if dens > 0.0 {
        x - (std_normal_cdf(x) - p) / dens
    } else {
        x
    }
}

// ---------------------------------------------------------------------------
// Kolmogorov distribution
// ---------------------------------------------------------------------------

/// Largest half-width of the exact-method matrix before switching to the
/// tail formula (only reached for large n and far-tail statistics).
const EXACT_MAX_K: usize = 150;

/// `P(D_n >= d)` for the one-sample Kolmogorov statistic under a fully
/// specified continuous null.
///
/// Exact Marsaglia-Tsang-Wang matrix-power evaluation for `n <= 10_000`. In
/// the far tail with large `n` their closed tail formula is used instead (p
/// below about 1e-3 there). Beyond `n = 10_000` the limiting distribution with
/// Stephens' finite-n correction is used.
pub fn kolmogorov_pvalue(d: f64, n: usize) -> f64 {
    assert!(n >= 1, "kolmogorov_pvalue needs n >= 1");
    if d.is_nan() {
        return f64::NAN;
    }
    if d <= 0.0 {
        return 1.0;
    }
    if d >= 1.0 {
        return 0.0;
    }
    let nf = n as f64;
    if n > 10_000 {
        let sn = nf.sqrt();
        return kolmogorov_asymptotic_sf((sn + 0.12 + 0.11 / sn) * d);
    }
    let s = d * d * nf;
    let k = (nf * d) as usize + 1;
    if k > EXACT_MAX_K && s > 3.76 {
        let rate = 2.000_071 + 0.331 / nf.sqrt() + 1.409 / nf;
        return (2.0 * (-rate * s).exp()).min(1.0);
    }
    (1.0 - mtw_cdf(n, d)).clamp(0.0, 1.0)
}

/// Limiting survival function `P(K > lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2)`.
pub fn kolmogorov_asymptotic_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // The alternating series converges slowly here; use the theta-function
        // form of the distribution function instead.
        let c = PI * PI / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            cdf += (-j * j * c).exp();
        }
        cdf *= (2.0 * PI).sqrt() / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `P(D_n < d)` by the Marsaglia-Tsang-Wang (2003) algorithm.
fn mtw_cdf(n: usize, d: f64) -> f64 {
    let nf = n as f64;
    let k = (nf * d) as usize + 1;
    let m = 2 * k - 1;
    let h = k as f64 - nf * d;

    let mut hm = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i + 1 >= j {
                hm[i * m + j] = 1.0;
            }
        }
    }
    for i in 0..m {
        hm[i * m] -= h.powi(i as i32 + 1);
        hm[(m - 1) * m + i] -= h.powi((m - i) as i32);
    }
    if 2.0 * h - 1.0 > 0.0 {
        hm[(m - 1) * m] += (2.0 * h - 1.0).powi(m as i32);
    }
    for i in 0..m {
        for j in 0..m {
            if i + 1 > j {
                for g in 1..=(i + 1 - j) {
                    hm[i * m + j] /= g as f64;
                }
            }
        }
    }

    let (q, mut eq) = matrix_power(&hm, m, n);
    let mut s = q[(k - 1) * m + k - 1];
    for i in 1..=n {
        s = s * i as f64 / nf;
        if s < 1e-140 {
            s *= 1e140;
            eq -= 140;
        }
    }
    s * 10f64.powi(eq)
}

fn matrix_multiply(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        for l in 0..m {
            let ail = a[i * m + l];
            if ail == 0.0 {
                continue;
            }
            let brow = &b[l * m..(l + 1) * m];
            let crow = &mut c[i * m..(i + 1) * m];
            for (cv, bv) in crow.iter_mut().zip(brow) {
                *cv += ail * bv;
            }
        }
    }
    c
}

/// `A^n` with a decimal exponent carried separately to avoid overflow.
fn matrix_power(a: &[f64], m: usize, n: usize) -> (Vec<f64>, i32) {
    if n == 1 {
        return (a.to_vec(), 0);
    }
    let (half, e_half) = matrix_power(a, m, n / 2);
    let sq = matrix_multiply(&half, &half, m);
    let (mut v, mut ev) = if n.is_multiple_of(2) {
        (sq, 2 * e_half)
    } else {
        (matrix_multiply(a, &sq, m), 2 * e_half)
    };
    if v[(m / 2) * m + m / 2] > 1e140 {
        for x in v.iter_mut() {
            *x *= 1e-140;
        }
        ev += 140;
    }
    (v, ev)
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

const MAX_EXPANSIONS: usize = 5;
const EXPANSION_FACTOR: f64 = 10.0;

/// Root of a strictly decreasing function.
///
/// The bracket is widened (geometrically for positive endpoints) until
/// `f(lo) > 0 > f(hi)`, then bisected and finished with secant steps.
pub fn find_root_decreasing<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("invalid bracket [{lo}, {hi}]")));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);

    let mut expansions = 0;
    while !(f_lo > 0.0) && expansions < MAX_EXPANSIONS {
        lo = if lo > 0.0 {
            lo / EXPANSION_FACTOR
        } else {
            lo - (hi - lo) * (EXPANSION_FACTOR - 1.0)
        };
        f_lo = f(lo);
        expansions += 1;
    }
    expansions = 0;
    while !(f_hi < 0.0) && expansions < MAX_EXPANSIONS {
        hi = if hi > 0.0 {
            hi * EXPANSION_FACTOR
        } else {
            hi + (hi - lo) * (EXPANSION_FACTOR - 1.0)
        };
        f_hi = f(hi);
        expansions += 1;
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::Bracket { lo, hi });
    }

    let mut best = if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    loop {
        let width = hi - lo;
        let mid = lo + 0.5 * width;
        if width <= 1e-10 * mid.abs().max(1.0) || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm > 0.0 {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }

    // Secant polish inside the final bracket.
    let (mut x0, mut f0, mut x1, mut f1) = (lo, f_lo, hi, f_hi);
    for _ in 0..8 {
        if best.1.abs() <= tol * 1e-3 || f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !(x2 >= lo && x2 <= hi) {
            break;
        }
        let f2 = f(x2);
        if f2.abs() < best.1.abs() {
            best = (x2, f2);
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
    }
    Ok(best.0)
}
