//! Two evaluations of `J(α) = ∫₀¹ t/√(1−t) · α²/(1+α²t²)^(5/4) dt`:
//! direct quadrature and the hypergeometric closed form.

use crate::error::{Error, Result};
use crate::specfun::{gauss_2f1, GaussLegendre};

const NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesComparison {
    pub alpha: f64,
    /// The integral by quadrature.
    pub lhs: f64,
    /// `(4/3)·x·₂F₁[1, 1/4; 7/4; x]` with `x = α²/(1+α²)`.
    pub rhs: f64,
    /// `(2/3)·x·₂F₁[1, 3/2; 7/4; x]`, which does not equal the integral.
    pub printed: f64,
}

impl SeriesComparison {
    pub fn discrepancy(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// The integral, split at ½: geometric panels toward 0 resolve the `1/α`
/// scale of the integrand, and `t = 1 − v²` removes the endpoint singularity.
pub fn j_by_quadrature(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let rule = GaussLegendre::cached(NODES);
    let a2 = alpha * alpha;
    let f = |t: f64| t / (1.0 - t).sqrt() * a2 * (1.0 + a2 * t * t).powf(-1.25);
    let mut breaks = vec![0.5];
    let floor = 1e-3 / alpha.max(1.0);
    while *breaks.last().unwrap() > floor {
        let next = 0.25 * breaks.last().unwrap();
        breaks.push(next);
    }
    breaks.push(0.0);
    let near_zero: f64 = breaks.windows(2).map(|w| rule.integrate(w[1], w[0], f)).sum();
    // t = 1 − v², v ∈ [0, 1/√2]
    let near_one = rule.integrate(0.0, std::f64::consts::FRAC_1_SQRT_2, |v| {
        let t = 1.0 - v * v;
        2.0 * t * a2 * (1.0 + a2 * t * t).powf(-1.25)
    });
    Ok(near_zero + near_one)
}

pub fn series_vs_quadrature(alpha: f64) -> Result<SeriesComparison> {
    let lhs = j_by_quadrature(alpha)?;
    let x = alpha * alpha / (1.0 + alpha * alpha);
    let rhs = 4.0 / 3.0 * x * gauss_2f1(1.0, 0.25, 1.75, x)?;
    let printed = 2.0 / 3.0 * x * gauss_2f1(1.0, 1.5, 1.75, x)?;
    Ok(SeriesComparison { alpha, lhs, rhs, printed })
}
