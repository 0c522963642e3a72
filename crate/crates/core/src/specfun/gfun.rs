//! The slope transform `G(x) = ∫₀ˣ (1+t²)^(−5/4) dt`, its inverse and the
//! constants `c₀ = ∫_ℝ (1+t²)^(−5/4) dt` and `c* = 2/c₀`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::quad::{doubling, GaussLegendre, QuadSpec};
use crate::error::{Error, Result};

/// `(1+t²)^(−5/4)`, the integrand of G.
#[inline]
pub fn g_density(t: f64) -> f64 {
    (1.0 + t * t).powf(-1.25)
}

fn gl_smooth<F: Fn(f64) -> f64>(a: f64, b: f64, f: F, q: &QuadSpec) -> f64 {
    doubling(q, |n| GaussLegendre::cached(n).integrate(a, b, &f))
        .expect("smooth integrand on a bounded interval converges")
}

/// `∫_t^∞ (1+τ²)^(−5/4) dτ` for t ≥ 0.
///
/// For t ≥ 1 the substitution τ = q⁻² maps the tail onto the bounded smooth
/// integral `2∫₀^{1/√t} q²(1+q⁴)^(−5/4) dq`.
pub fn g_tail_with(t: f64, q: &QuadSpec) -> f64 {
    debug_assert!(t >= 0.0);
    if t.is_infinite() {
        return 0.0;
    }
    let tail_from = |t: f64| {
        let top = 1.0 / t.sqrt();
        2.0 * gl_smooth(0.0, top, |q| q * q * (1.0 + q.powi(4)).powf(-1.25), q)
    };
    if t >= 1.0 {
        tail_from(t)
    } else {
        tail_from(1.0) + gl_smooth(t, 1.0, g_density, q)
    }
}

/// [`g_tail_with`] with the default quadrature.
pub fn g_tail(t: f64) -> f64 {
    g_tail_with(t, &QuadSpec::default())
}

/// G(x) with an explicit quadrature configuration.
pub fn g_of_with(x: f64, q: &QuadSpec) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ax = x.abs();
    let v = if ax <= 1.0 {
        gl_smooth(0.0, ax, g_density, q)
    } else {
        0.5 * c0() - g_tail_with(ax, q)
    };
    v.copysign(x)
}

/// G(x) = ∫₀ˣ (1+t²)^(−5/4) dt. Odd, strictly increasing, |G| < c₀/2.
pub fn g_of(x: f64) -> f64 {
    g_of_with(x, &QuadSpec::default())
}

/// G⁻¹(y) for |y| < c₀/2, by Newton's method safeguarded with a bisection bracket.
pub fn g_inv(y: f64) -> Result<f64> {
    let half = 0.5 * c0();
    if !y.is_finite() || y.abs() >= half {
        return Err(Error::Domain(format!(
            "G^-1 is defined on (-c0/2, c0/2) = (-{half}, {half}), got {y}"
        )));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let target = y.abs();
    let mut lo = 0.0;
    let mut hi = 1.0;
    while g_of(hi) < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NonConvergence(format!(
                "G^-1 bracket overflow for y = {y}"
            )));
        }
    }
    // Far field: the tail behaves like (2/3) x^(-3/2).
    let mut x = if target > g_of(1.0) {
        let tail = half - target;
        (2.0 / (3.0 * tail)).powf(2.0 / 3.0).clamp(lo, hi)
    } else {
        target
    };
    for _ in 0..200 {
        let r = g_of(x) - target;
        if r == 0.0 {
            break;
        }
        if r > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let mut next = x - r * (1.0 + x * x).powf(1.25);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let dx = (next - x).abs();
        x = next;
        if dx <= 4.0 * f64::EPSILON * x.max(1e-300) || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(x.copysign(y))
}

/// c₀ = ∫_ℝ (1+t²)^(−5/4) dt by quadrature: `2(∫₀¹ + ∫₁^∞)`.
pub fn c0_quadrature(q: &QuadSpec) -> f64 {
    2.0 * (gl_smooth(0.0, 1.0, g_density, q) + g_tail_with(1.0, q))
}

/// c₀ = √π·Γ(3/4)/Γ(5/4).
pub fn c0_gamma() -> f64 {
    PI.sqrt() * gamma(0.75) / gamma(1.25)
}

/// c₀ by quadrature at the default configuration (computed once).
pub fn c0() -> f64 {
    static C0: OnceLock<f64> = OnceLock::new();
    *C0.get_or_init(|| c0_quadrature(&QuadSpec::default()))
}

/// The solvability threshold c* = 2/c₀.
pub fn c_star() -> f64 {
    2.0 / c0()
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) by the Lanczos approximation (g = 7), with reflection for x < ½.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}
