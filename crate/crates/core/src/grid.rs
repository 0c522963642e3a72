//! Uniform grids and composite quadrature of sampled functions.

use crate::error::{Error, Result};

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            let mut xs: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
            xs[n - 1] = b;
            xs
        }
    }
}

/// `n` logarithmically spaced points from `a` to `b` inclusive (a, b > 0).
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect();
    if n >= 2 {
        v[0] = a;
        v[n - 1] = b;
    }
    v
}

/// Spacing of a uniform grid; errors if the grid is too short or not uniform.
pub fn uniform_step(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::GridMismatch(format!(
            "grid needs at least 2 points, got {}",
            xs.len()
        )));
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::GridMismatch("grid must be increasing".into()));
    }
    let bad = xs
        .windows(2)
        .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0));
    if bad {
        return Err(Error::GridMismatch("grid is not uniform".into()));
    }
    Ok(h)
}

/// Errors unless every slice has length `n`.
pub fn same_len(n: usize, others: &[&[f64]]) -> Result<()> {
    for (i, o) in others.iter().enumerate() {
        if o.len() != n {
            return Err(Error::GridMismatch(format!(
                "array {i} has length {}, expected {n}",
                o.len()
            )));
        }
    }
    Ok(())
}

/// Composite trapezoid rule.
pub fn trapezoid(f: &[f64], h: f64) -> f64 {
    if f.len() < 2 {
        return 0.0;
    }
    let inner: f64 = f[1..f.len() - 1].iter().sum();
    h * (inner + 0.5 * (f[0] + f[f.len() - 1]))
}

/// Composite Simpson rule; with an odd number of intervals the last three
/// are handled by Simpson's 3/8 rule.
pub fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    match n {
        0 | 1 => 0.0,
        2 => trapezoid(f, h),
        _ if n % 2 == 1 => simpson_even_intervals(f, h),
        4 => three_eighths(f, h),
        _ => simpson_even_intervals(&f[..n - 3], h) + three_eighths(&f[n - 4..], h),
    }
}

fn simpson_even_intervals(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    let mut acc = f[0] + f[n - 1];
    for (i, v) in f.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

fn three_eighths(f: &[f64], h: f64) -> f64 {
    3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3])
}

/// Running integral `∫_{x₀}^{x_i} f` at every sample.
///
/// Even indices use composite Simpson; odd indices add the third-order
/// half-panel rule `h(5f₀ + 8f₁ − f₂)/12` to the preceding even value.
pub fn cumulative_simpson(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    let mut i = 0;
    while i + 2 < n {
        out[i + 1] = out[i] + h * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]) / 12.0;
        out[i + 2] = out[i] + h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        // trailing odd sample: integrate the last quadratic backwards
        out[i + 1] = out[i] + h * (5.0 * f[i + 1] + 8.0 * f[i] - f[i - 1]) / 12.0;
    }
    out
}
