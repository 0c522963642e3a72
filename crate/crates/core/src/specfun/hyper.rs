//! Real Gauss hypergeometric function ₂F₁ and the moment integrals
//! `∫₀¹ tᵐ (1−t)^(−1/2) dt`.

use super::gfun::gamma;
use super::quad::{doubling, GaussLegendre, QuadSpec};
use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 0.95;
const MAX_TERMS: usize = 100_000;
const TERM_TOL: f64 = 1e-17;
/// Geometric panels toward each endpoint in the Euler integral.
const EULER_PANELS: usize = 60;

fn is_nonpositive_integer(c: f64) -> bool {
    c <= 0.0 && c == c.round()
}

/// ₂F₁[a, b; c; x] for real parameters and x < 1.
///
/// Sums the power series for 0 ≤ x ≤ 0.95, maps x < 0 into (0, 1) by
/// Pfaff's transformation `F(a,b;c;x) = (1−x)^(−a) F(a, c−b; c; x/(x−1))`,
/// and uses Euler's integral representation for 0.95 < x < 1.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::Domain(format!(
            "2F1 is undefined for c = {c} (nonpositive integer)"
        )));
    }
    if !x.is_finite() || x >= 1.0 {
        return Err(Error::NonConvergence(format!(
            "2F1 series diverges at x = {x} (need x < 1)"
        )));
    }
    if x < 0.0 {
        let z = x / (x - 1.0);
        return Ok((1.0 - x).powf(-a) * f2f1_unit(a, c - b, c, z)?);
    }
    f2f1_unit(a, b, c, x)
}

/// Evaluates F for 0 ≤ x < 1.
fn f2f1_unit(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if x <= SERIES_LIMIT {
        series(a, b, c, x)
    } else if c > b && b > 0.0 {
        euler_integral(a, b, c, x)
    } else if c > a && a > 0.0 {
        euler_integral(b, a, c, x)
    } else {
        Err(Error::NonConvergence(format!(
            "2F1[{a}, {b}; {c}; {x}]: no convergent representation near x = 1"
        )))
    }
}

/// Direct summation with the term recurrence
/// `t_{k+1} = t_k (a+k)(b+k) / ((c+k)(k+1)) x`.
pub fn series(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small = 0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        // two consecutive negligible terms guard against a lucky cancellation
        if term.abs() <= TERM_TOL * sum.abs() {
            small += 1;
            if small == 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence(format!(
        "2F1[{a}, {b}; {c}; {x}] series exceeded {MAX_TERMS} terms"
    )))
}

/// `Γ(c)/(Γ(b)Γ(c−b)) ∫₀¹ t^(b−1) (1−t)^(c−b−1) (1−xt)^(−a) dt`, c > b > 0.
fn euler_integral(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let p = b - 1.0;
    let q = c - b - 1.0;
    let h = |t: f64| (1.0 - x * t).powf(-a);
    let quad = QuadSpec::new(24, 1e-14)?;
    let integral = doubling(&quad, |n| {
        let rule = GaussLegendre::cached(n);
        let mut acc = 0.0;
        // [0, 1/2]: panels [2^-(k+2), 2^-(k+1)] with an exact power-law remainder
        let mut hi = 0.5;
        for _ in 0..EULER_PANELS {
            let lo = 0.5 * hi;
            acc += rule.integrate(lo, hi, |t| t.powf(p) * (1.0 - t).powf(q) * h(t));
            hi = lo;
        }
        acc += hi.powf(p + 1.0) / (p + 1.0) * h(0.0);
        // [1/2, 1] mirrored in s = 1 − t
        let mut hi = 0.5;
        for _ in 0..EULER_PANELS {
            let lo = 0.5 * hi;
            acc += rule.integrate(lo, hi, |s| s.powf(q) * (1.0 - s).powf(p) * h(1.0 - s));
            hi = lo;
        }
        acc + hi.powf(q + 1.0) / (q + 1.0) * h(1.0)
    })?;
    Ok(gamma(c) / (gamma(b) * gamma(c - b)) * integral)
}

/// Pfaff's transformation in the `a` form: `(1−x)^(−a) F(a, c−b; c; x/(x−1))`.
pub fn pfaff_a(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let z = x / (x - 1.0);
    Ok((1.0 - x).powf(-a) * gauss_2f1(a, c - b, c, z)?)
}

/// Pfaff's transformation in the `b` form: `(1−x)^(−b) F(c−a, b; c; x/(x−1))`.
pub fn pfaff_b(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let z = x / (x - 1.0);
    Ok((1.0 - x).powf(-b) * gauss_2f1(c - a, b, c, z)?)
}

/// `∫₀¹ tᵐ (1−t)^(−1/2) dt = 2 ∏_{l=1}^m 2l/(2l+1)`.
pub fn moment_integral(m: u32) -> f64 {
    (1..=m).fold(2.0, |acc, l| {
        let l = l as f64;
        acc * 2.0 * l / (2.0 * l + 1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::quad::sqrt_singular_integral;
    use proptest::prelude::*;

    #[test]
    fn trivial_values() {
        assert_eq!(gauss_2f1(1.3, -0.4, 2.2, 0.0).unwrap(), 1.0);
        // F(1,1;2;x) = −ln(1−x)/x
        let x = 0.5;
        let v = gauss_2f1(1.0, 1.0, 2.0, x).unwrap();
        assert!((v + (1.0 - x).ln() / x).abs() < 1e-15);
        // terminating series: F(−2, b; c; x) is a quadratic
        let v = gauss_2f1(-2.0, 1.5, 3.0, 0.7).unwrap();
        let exact = 1.0 - 2.0 * 1.5 / 3.0 * 0.7 + (2.0 * 1.5 * 2.5) / (3.0 * 4.0 * 2.0) * 0.49;
        assert!((v - exact).abs() < 1e-14, "{v} vs {exact}");
    }

    #[test]
    fn near_one_matches_closed_form() {
        for &x in &[0.96, 0.99, 0.999] {
            let v = gauss_2f1(1.0, 1.0, 2.0, x).unwrap();
            let exact = -(1.0 - x as f64).ln() / x;
            assert!((v - exact).abs() < 1e-12 * exact, "x={x}: {v} vs {exact}");
        }
        // F(½,½;3/2;z²) = asin(z)/z and F(½,1;3/2;z²) = atanh(z)/z
        for &z2 in &[0.97f64, 0.995] {
            let z = z2.sqrt();
            let v = gauss_2f1(0.5, 0.5, 1.5, z2).unwrap();
            assert!((v - z.asin() / z).abs() < 1e-12);
            let v = gauss_2f1(0.5, 1.0, 1.5, z2).unwrap();
            assert!((v - z.atanh() / z).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(gauss_2f1(1.0, 1.0, -2.0, 0.1), Err(Error::Domain(_))));
        assert!(matches!(gauss_2f1(1.0, 1.0, 2.0, 1.0), Err(Error::NonConvergence(_))));
    }

    #[test]
    fn pfaff_at_minus_four() {
        let (a, b, c) = (1.0, 1.5, 1.75);
        let l = pfaff_b(a, b, c, -4.0).unwrap();
        let r = pfaff_a(a, b, c, -4.0).unwrap();
        assert!((l - r).abs() < 1e-10, "{l} vs {r}");
    }

    #[test]
    fn moments() {
        assert_eq!(moment_integral(0), 2.0);
        assert!((moment_integral(1) - 4.0 / 3.0).abs() < 1e-15);
        let q = QuadSpec::default();
        for m in 0..8 {
            let quad = sqrt_singular_integral(|t| t.powi(m as i32), 1.0, &q).unwrap();
            assert!((quad - moment_integral(m)).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn pfaff_forms_agree(
            a in 0.1f64..3.0, b in 0.1f64..3.0, dc in 0.1f64..3.0, x in -30.0f64..0.5
        ) {
            let c = a.max(b) + dc;
            let direct = gauss_2f1(a, b, c, x).unwrap();
            let other = pfaff_b(a, b, c, x).unwrap();
            prop_assert!((direct - other).abs() <= 1e-10 * direct.abs().max(1.0),
                "{} vs {}", direct, other);
        }
    }
}
