//! Asymptotic covariance `S = D Σ D'` of the L-estimators and their
//! efficiencies relative to maximum likelihood.

use super::constants::{FrechetConstants, LambdaTriple, LocationScaleConstants, ParetoIntegrals};
use crate::numerics::PI;

pub type Matrix2 = [[f64; 2]; 2];

fn sandwich(d: Matrix2, s: Matrix2) -> Matrix2 {
    let mut ds = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            ds[i][j] = d[i][0] * s[0][j] + d[i][1] * s[1][j];
        }
    }
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = ds[i][0] * d[j][0] + ds[i][1] * d[j][1];
        }
    }
    let off = 0.5 * (out[0][1] + out[1][0]);
    out[0][1] = off;
    out[1][0] = off;
    out
}

/// Covariance `Σ` of the two sample L-moments of `log X` for location
/// `theta` and scale `sigma`.
pub fn location_scale_sigma(theta: f64, sigma: f64, l: &LambdaTriple) -> Matrix2 {
    let s11 = sigma * sigma * l.lambda1;
    let s12 = 2.0 * theta * sigma * sigma * l.lambda1 + 2.0 * sigma.powi(3) * l.lambda2;
    let s22 = 4.0 * theta * theta * sigma * sigma * l.lambda1
        + 8.0 * theta * sigma.powi(3) * l.lambda2
        + 4.0 * sigma.powi(4) * l.lambda3;
    [[s11, s12], [s12, s22]]
}

/// Jacobian of `(θ̂, σ̂)` with respect to `(μ̂1, μ̂2)`.
pub fn location_scale_jacobian(theta: f64, sigma: f64, c: &LocationScaleConstants) -> Matrix2 {
    let f = 1.0 / (sigma * c.eta);
    [
        [f * (c.c1 * theta + c.c2 * sigma), -0.5 * f * c.c1],
        [-f * (theta + c.c1 * sigma), 0.5 * f],
    ]
}

pub fn location_scale_covariance(theta: f64, sigma: f64, c: &LocationScaleConstants, l: &LambdaTriple) -> Matrix2 {
    sandwich(
        location_scale_jacobian(theta, sigma, c),
        location_scale_sigma(theta, sigma, l),
    )
}

/// The same covariance in closed form; it does not involve `θ`.
pub fn location_scale_covariance_closed_form(sigma: f64, c: &LocationScaleConstants, l: &LambdaTriple) -> Matrix2 {
    let (c1, c2) = (c.c1, c.c2);
    let (l1, l2, l3) = (l.lambda1, l.lambda2, l.lambda3);
    let f = sigma * sigma / (c.eta * c.eta);
    let off = -l1 * c1 * c2 + c2 * l2 + c1 * c1 * l2 - c1 * l3;
    [
        [f * (l1 * c2 * c2 - 2.0 * c1 * c2 * l2 + c1 * c1 * l3), f * off],
        [f * off, f * (l1 * c1 * c1 - 2.0 * c1 * l2 + l3)],
    ]
}

/// Covariance `Σ` of the two sample L-moments of `log X` under the Fréchet
/// model.
pub fn frechet_sigma(alpha: f64, sigma: f64, f: &FrechetConstants) -> Matrix2 {
    let ls = sigma.ln();
    let a2 = alpha * alpha;
    let s11 = f.psi1 / a2;
    let s12 = 2.0 * ls * f.psi1 / a2 - 2.0 * f.psi2 / (a2 * alpha);
    let s22 = 4.0 * ls * ls * f.psi1 / a2 - 8.0 * ls * f.psi2 / (a2 * alpha) + 4.0 * f.psi3 / (a2 * a2);
    [[s11, s12], [s12, s22]]
}

/// Jacobian of `(α̂, σ̂)` with respect to `(μ̂1, μ̂2)`.
pub fn frechet_jacobian(alpha: f64, sigma: f64, f: &FrechetConstants) -> Matrix2 {
    let ls = sigma.ln();
    [
        [alpha * alpha * (alpha * ls - f.kappa1) / f.tau, -alpha.powi(3) / (2.0 * f.tau)],
        [
            sigma * (f.kappa2 - alpha * ls * f.kappa1) / f.tau,
            alpha * sigma * f.kappa1 / (2.0 * f.tau),
        ],
    ]
}

pub fn frechet_covariance(alpha: f64, sigma: f64, f: &FrechetConstants) -> Matrix2 {
    sandwich(frechet_jacobian(alpha, sigma, f), frechet_sigma(alpha, sigma, f))
}

pub fn frechet_covariance_closed_form(alpha: f64, sigma: f64, f: &FrechetConstants) -> Matrix2 {
    let (k1, k2) = (f.kappa1, f.kappa2);
    let (p1, p2, p3) = (f.psi1, f.psi2, f.psi3);
    let t2 = f.tau * f.tau;
    let off = sigma * (p2 * k2 - p3 * k1 + p2 * k1 * k1 - p1 * k1 * k2) / t2;
    [
        [alpha * alpha * (p1 * k1 * k1 - 2.0 * p2 * k1 + p3) / t2, off],
        [
            off,
            sigma * sigma / (alpha * alpha) * (p3 * k1 * k1 - 2.0 * p2 * k1 * k2 + p1 * k2 * k2) / t2,
        ],
    ]
}

/// `I1^2 / I2`.
pub fn are_pareto(p: &ParetoIntegrals) -> f64 {
    p.i1 * p.i1 / p.i2
}

/// `(det S_MLE / det S)^(1/2)` with `det S_MLE = σ^4 / 2`.
pub fn are_location_scale(c: &LocationScaleConstants, l: &LambdaTriple) -> f64 {
    (c.eta * c.eta / (2.0 * l.gap())).sqrt()
}

/// `(det S_MLE / det S)^(1/2)` with `det S_MLE = 6 σ^2 / π^2`.
pub fn are_frechet(f: &FrechetConstants) -> f64 {
    (6.0 / (PI * PI) * f.tau * f.tau / f.psi_gap()).sqrt()
}

pub fn det(m: &Matrix2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}
