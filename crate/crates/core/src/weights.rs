//! Kumaraswamy weight-generating density and the weight vectors it induces
//! on order statistics.

use crate::error::{Error, Result};
use crate::unit::UnitPoint;
use serde::{Deserialize, Serialize};

/// Shape pair `(a, b)` of the Kumaraswamy density
/// `J(u) = a b u^(a-1) (1 - u^a)^(b-1)` on (0, 1).
///
/// `a` controls the weight given to the lower tail, `b` the upper tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KumaraswamyShape {
    a: f64,
    b: f64,
}

impl KumaraswamyShape {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Kumaraswamy shapes must be positive and finite, got a={a}, b={b}"
            )));
        }
        Ok(Self { a, b })
    }

    /// The uniform weight `J = 1`, under which the L-moments are ordinary
    /// sample moments.
    pub fn uniform() -> Self {
        Self { a: 1.0, b: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn is_uniform(&self) -> bool {
        self.a == 1.0 && self.b == 1.0
    }

    /// `ln J(u)` with both tails handled in log space.
    pub fn ln_density_at(&self, u: UnitPoint) -> f64 {
        let ln_u = u.ln();
        let mut ln_j = self.a.ln() + self.b.ln();
        if self.a != 1.0 {
            ln_j += (self.a - 1.0) * ln_u;
        }
        if self.b != 1.0 {
            ln_j += (self.b - 1.0) * ln_one_minus_pow(ln_u, self.a);
        }
        ln_j
    }

    /// `J(u)` at a point carrying its own complement.
    pub fn density_at(&self, u: UnitPoint) -> f64 {
        self.ln_density_at(u).exp()
    }

    /// Distribution function at `u`, returned with its complement.
    pub fn cdf_at(&self, u: UnitPoint) -> UnitPoint {
        if u.u <= 0.0 {
            return UnitPoint::from_parts(0.0, 1.0);
        }
        if u.c <= 0.0 {
            return UnitPoint::from_parts(1.0, 0.0);
        }
        UnitPoint::from_ln_complement(self.b * ln_one_minus_pow(u.ln(), self.a))
    }

    /// Quantile `(1 - (1 - p)^(1/b))^(1/a)`, returned with its complement.
    pub fn quantile_at(&self, p: UnitPoint) -> UnitPoint {
        // s = (1 - p)^(1/b); `inner` is the point 1 - s.
        let inner = UnitPoint::from_ln(p.ln_complement() / self.b).flip();
        UnitPoint::from_ln(inner.ln() / self.a)
    }
}

/// `ln(1 - u^a)` from `ln u`, accurate whether `u^a` is near 0 or near 1.
fn ln_one_minus_pow(ln_u: f64, a: f64) -> f64 {
    let t = a * ln_u;
    if t < -std::f64::consts::LN_2 {
        (-t.exp()).ln_1p()
    } else {
        (-t.exp_m1()).ln()
    }
}

/// Kumaraswamy density `J(u; a, b)` for `0 < u < 1`.
pub fn density(u: f64, shape: KumaraswamyShape) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("weight density needs 0 < u < 1, got {u}")));
    }
    Ok(shape.density_at(UnitPoint::new(u)))
}

/// Kumaraswamy distribution function `1 - (1 - u^a)^b` on `[0, 1]`.
pub fn cdf(u: f64, shape: KumaraswamyShape) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("weight cdf needs 0 <= u <= 1, got {u}")));
    }
    Ok(shape.cdf_at(UnitPoint::new(u)).u)
}

/// Kumaraswamy quantile function on `[0, 1]`.
pub fn quantile(p: f64, shape: KumaraswamyShape) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("weight quantile needs 0 <= p <= 1, got {p}")));
    }
    Ok(shape.quantile_at(UnitPoint::new(p)).u)
}

/// Plotting position `i / (n + 1)` for the `i`-th of `n` order statistics
/// (1-based), with an exact complement.
pub fn plotting_position(i: usize, n: usize) -> UnitPoint {
    let m = (n + 1) as f64;
    UnitPoint::from_parts(i as f64 / m, (n + 1 - i) as f64 / m)
}

/// Weights `w_i = J(i / (n + 1))` applied to the order statistics.
///
/// The weights are deliberately not renormalized: the L-moment is
/// `(1/n) sum w_i h(X_(i))` and the weights only approximately average to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    pub shape: KumaraswamyShape,
    pub weights: Vec<f64>,
}

impl WeightVector {
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Mean of the weights, `(1/n) sum w_i`.
    pub fn mean(&self) -> f64 {
        self.weights.iter().sum::<f64>() / self.n() as f64
    }
}

pub fn weight_vector(n: usize, shape: KumaraswamyShape) -> Result<WeightVector> {
    if n == 0 {
        return Err(Error::InvalidParameter("weight vector needs n >= 1".into()));
    }
    let weights = (1..=n)
        .map(|i| shape.density_at(plotting_position(i, n)))
        .collect();
    Ok(WeightVector { shape, weights })
}
