//! Elastica curves in the plane: the limit curve of the minimizers as the
//! obstacle height approaches c*, the elliptic curvature laws solving
//! `κ″ + ½κ³ = 0`, and the arclength-parametrized curves γ_α they generate.

use crate::error::{Error, Result};
use crate::grid;
use crate::shooting::Shooting;
use crate::specfun::{c0, elliptic_k_half, g_inv, g_tail, jacobi_cn_sn_dn, GaussLegendre};

const LENGTH_SLACK: f64 = 1e-12;
const NODES: usize = 48;

/// A curve sampled on a uniform arclength grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarCurve {
    pub ss: Vec<f64>,
    pub pts: Vec<[f64; 2]>,
    pub theta: Vec<f64>,
    pub kappa: Vec<f64>,
    pub length: f64,
}

impl PlanarCurve {
    /// `max | |Δp|/Δs − 1 |` over consecutive samples.
    pub fn speed_defect(&self) -> f64 {
        self.pts
            .windows(2)
            .zip(self.ss.windows(2))
            .map(|(p, s)| (dist(p[0], p[1]) / (s[1] - s[0]) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Signed curvature of the circle through three consecutive samples,
    /// at the interior samples.
    pub fn fd_curvature(&self) -> Vec<f64> {
        self.pts
            .windows(3)
            .map(|w| {
                let (a, b, c) = (w[0], w[1], w[2]);
                let cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
                2.0 * cross / (dist(a, b) * dist(b, c) * dist(a, c))
            })
            .collect()
    }

    pub fn end(&self) -> [f64; 2] {
        *self.pts.last().expect("curves have at least three samples")
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn check_samples(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 samples, got {n}")));
    }
    Ok(())
}

/// `∫₀^q 2(1+p⁴)^(−3/4) dp`, which equals `∫_{1/q²}^∞ (1+r²)^(−3/4) dr`.
fn tail_length_q(q: f64) -> f64 {
    tail_length_nodes(q, NODES)
}

fn tail_length_nodes(q: f64, nodes: usize) -> f64 {
    GaussLegendre::cached(nodes).integrate(0.0, q, |p| 2.0 * (1.0 + p.powi(4)).powf(-0.75))
}

/// `∫_t^1 (1+r²)^(−3/4) dr` for `0 ≤ t ≤ 1`.
fn core_length(t: f64) -> f64 {
    core_length_nodes(t, NODES)
}

fn core_length_nodes(t: f64, nodes: usize) -> f64 {
    GaussLegendre::cached(nodes).integrate(t, 1.0, |r| (1.0 + r * r).powf(-0.75))
}

/// Length of the half limit curve, `(1/(2c₀))∫_ℝ (1+t²)^(−3/4) dt`, by
/// Gauss–Legendre quadrature with `nodes` points on each of two panels.
pub fn limit_length_quadrature(nodes: usize) -> f64 {
    (tail_length_nodes(1.0, nodes) + core_length_nodes(0.0, nodes)) / c0()
}

/// Length of the half limit curve, `√2·K(1/√2)/c₀`.
pub fn limit_length() -> f64 {
    std::f64::consts::SQRT_2 * elliptic_k_half() / c0()
}

/// The limit profile `U₀(x) = 2/(c₀(1 + G⁻¹(c₀/2 − c₀x)²)^(1/4))` on `[0, ½]`.
pub fn limit_profile(x: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&x) {
        return Err(Error::Domain(format!("limit profile is defined on [0, 1/2], got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let c = c0();
    let y = 0.5 * c - c * x;
    // G⁻¹ is unbounded as its argument approaches c₀/2
    if y >= 0.5 * c * (1.0 - 1e-15) {
        return Ok(0.0);
    }
    let t = g_inv(y)?;
    Ok(2.0 / (c * (1.0 + t * t).powf(0.25)))
}

/// Slope parameter `q = 1/√t` (slope t ≥ 1) or slope `t < 1` at arclength
/// `s` from the left end of the limit curve.
enum SlopeAt {
    Steep(f64),
    Flat(f64),
}

fn slope_at(s: f64) -> SlopeAt {
    let target = s * c0();
    let s1 = tail_length_q(1.0);
    if target <= 0.0 {
        SlopeAt::Steep(0.0)
    } else if target <= s1 {
        // S(q) increasing with S′(q) = 2(1+q⁴)^(−3/4) ∈ [2^(1/4), 2]
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut q = 0.5 * target;
        for _ in 0..100 {
            let f = tail_length_q(q) - target;
            if f > 0.0 {
                hi = q;
            } else {
                lo = q;
            }
            let step = f / (2.0 * (1.0 + q.powi(4)).powf(-0.75));
            let mut next = q - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - q).abs() <= 1e-16 * q.max(1e-300) {
                return SlopeAt::Steep(next);
            }
            q = next;
        }
        SlopeAt::Steep(q)
    } else {
        let target = target - s1;
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut t = (1.0 - target).clamp(0.0, 1.0);
        for _ in 0..100 {
            // core_length decreasing in t
            let f = core_length(t) - target;
            if f > 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let mut next = t + f * (1.0 + t * t).powf(0.75);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-16 {
                return SlopeAt::Flat(next);
            }
            t = next;
        }
        SlopeAt::Flat(t)
    }
}

/// The limit curve γ_U on `[0, L_U]`, sampled at `n` equally spaced
/// arclengths and built from the graph of `U₀` in the slope variable.
pub fn singular_curve(n: usize) -> Result<PlanarCurve> {
    check_samples(n)?;
    let c = c0();
    let length = limit_length();
    let ss = grid::linspace(0.0, length, n);
    let mut pts = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    let mut kappa = Vec::with_capacity(n);
    for &s in &ss {
        let (p, th, k) = match slope_at(s) {
            SlopeAt::Steep(q) if q == 0.0 => ([0.0, 0.0], std::f64::consts::FRAC_PI_2, 0.0),
            SlopeAt::Steep(q) => {
                let root = (1.0 + q.powi(4)).powf(0.25);
                let t = 1.0 / (q * q);
                let x = g_tail(t) / c;
                ([x, 2.0 * q / (c * root)], std::f64::consts::FRAC_PI_2 - (q * q).atan(), -c * q / root)
            }
            SlopeAt::Flat(t) => {
                let root = (1.0 + t * t).powf(0.25);
                let x = g_tail(t) / c;
                ([x, 2.0 / (c * root)], t.atan(), -c / root)
            }
        };
        pts.push(p);
        theta.push(th);
        kappa.push(k);
    }
    Ok(PlanarCurve { ss, pts, theta, kappa, length })
}

/// `κ_U(s) = c₀·cn(c₀s/√2 + K)` at modulus `1/√2`.
pub fn kappa_u(s: f64) -> Result<f64> {
    let length = limit_length();
    if !(s >= -LENGTH_SLACK && s <= length + LENGTH_SLACK) {
        return Err(Error::Domain(format!("kappa_U needs s in [0, {length}], got {s}")));
    }
    let c = c0();
    Ok(c * jacobi_cn_sn_dn(c * s / std::f64::consts::SQRT_2 + elliptic_k_half()).cn)
}

/// Curvature law `k_α(τ) = A·cn(Aτ/√2 + K)` with `A = 2I(α)(1+α²)^(1/4)/√α`,
/// on `[0, L_α]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureLaw {
    pub alpha: f64,
    pub amplitude: f64,
    pub length: f64,
}

impl CurvatureLaw {
    pub fn new(alpha: f64, shooting: &Shooting) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        let i = shooting.integral_i(alpha)?;
        let amplitude = 2.0 * i * (1.0 + alpha * alpha).powf(0.25) / alpha.sqrt();
        let length = shooting.arclength_half(alpha)?;
        Ok(Self { alpha, amplitude, length })
    }

    fn phase(&self, tau: f64) -> f64 {
        self.amplitude * tau / std::f64::consts::SQRT_2 + elliptic_k_half()
    }

    pub fn eval(&self, tau: f64) -> Result<f64> {
        if !(tau >= -LENGTH_SLACK * self.length.max(1.0) && tau <= self.length * (1.0 + LENGTH_SLACK)) {
            return Err(Error::Domain(format!(
                "k_alpha needs tau in [0, {}], got {tau}",
                self.length
            )));
        }
        Ok(self.amplitude * jacobi_cn_sn_dn(self.phase(tau)).cn)
    }

    /// Closed-form turning angle `∫₀^τ k_α = 2·asin(sn/√2) − π/2`.
    pub fn turning(&self, tau: f64) -> f64 {
        let sn = jacobi_cn_sn_dn(self.phase(tau)).sn;
        2.0 * (sn / std::f64::consts::SQRT_2).asin() - std::f64::consts::FRAC_PI_2
    }

    /// `k_α′(0) = −A²/2`.
    pub fn initial_slope(&self) -> f64 {
        -0.5 * self.amplitude * self.amplitude
    }
}

pub fn k_alpha(tau: f64, alpha: f64) -> Result<f64> {
    CurvatureLaw::new(alpha, &Shooting::default())?.eval(tau)
}

/// γ_α on `[0, L_α]`: turning angle by cumulative Simpson of `k_α`, points
/// by cumulative Simpson of the unit tangent, rotated by `Q_α` so that the
/// initial tangent is `(1, α)/√(1+α²)`.
pub fn reconstruct_gamma_alpha(alpha: f64, n: usize) -> Result<PlanarCurve> {
    reconstruct_gamma_alpha_with(alpha, n, &Shooting::default())
}

pub fn reconstruct_gamma_alpha_with(alpha: f64, n: usize, shooting: &Shooting) -> Result<PlanarCurve> {
    check_samples(n)?;
    let law = CurvatureLaw::new(alpha, shooting)?;
    let ss = grid::linspace(0.0, law.length, n);
    let h = ss[1] - ss[0];
    let kappa = ss.iter().map(|&t| law.eval(t)).collect::<Result<Vec<_>>>()?;
    let turn = grid::cumulative_simpson(&kappa, h);
    let cos: Vec<f64> = turn.iter().map(|t| t.cos()).collect();
    let sin: Vec<f64> = turn.iter().map(|t| t.sin()).collect();
    let px = grid::cumulative_simpson(&cos, h);
    let py = grid::cumulative_simpson(&sin, h);
    let r = (1.0 + alpha * alpha).sqrt();
    let (qc, qs) = (1.0 / r, alpha / r);
    let pts = px.iter().zip(&py).map(|(x, y)| [qc * x - qs * y, qs * x + qc * y]).collect();
    let lift = alpha.atan();
    let theta = turn.iter().map(|t| t + lift).collect();
    Ok(PlanarCurve { ss, pts, theta, kappa, length: law.length })
}

/// Distance from `p` to the segment `[a, b]`.
fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}

fn one_sided(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter()
        .map(|&p| {
            if b.len() == 1 {
                return dist(p, b[0]);
            }
            b.windows(2).map(|w| segment_distance(p, w[0], w[1])).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Hausdorff distance between two polylines, measured from the vertices of
/// each to the segments of the other.
pub fn hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    one_sided(a, b).max(one_sided(b, a))
}

/// Hausdorff distance between γ_α and the left half of the graph of the
/// shooting profile `(x, u(x; α))`.
pub fn graph_distance(alpha: f64, n: usize) -> Result<f64> {
    let s = Shooting::default();
    let curve = reconstruct_gamma_alpha_with(alpha, n, &s)?;
    let odd = if n % 2 == 1 { n } else { n + 1 };
    let p = s.reconstruct_profile(alpha, odd)?;
    let graph: Vec<[f64; 2]> = p.xs[..=p.mid()].iter().zip(&p.u).map(|(&x, &u)| [x, u]).collect();
    Ok(hausdorff(&curve.pts, &graph))
}

/// `sup_s |γ_α((L_α/L_U)s) − γ_U(s)|` over `n` equally spaced `s`.
pub fn convergence_gap(alpha: f64, n: usize) -> Result<f64> {
    let limit = singular_curve(n)?;
    let curve = reconstruct_gamma_alpha(alpha, n)?;
    // both grids are uniform with n samples, so index k pairs τ_k = (L_α/L_U)s_k
    Ok(curve.pts.iter().zip(&limit.pts).map(|(&a, &b)| dist(a, b)).fold(0.0, f64::max))
}

/// `sup_x |u(x; α) − U₀(x)|` over the left half of an `n`-point grid.
/// Convergence of the graphs is not known; this is a measurement.
pub fn graph_gap(alpha: f64, n: usize) -> Result<f64> {
    let n = if n % 2 == 1 { n } else { n + 1 };
    let p = Shooting::default().reconstruct_profile(alpha, n)?;
    let mut sup: f64 = 0.0;
    for k in 0..=p.mid() {
        sup = sup.max((p.u[k] - limit_profile(p.xs[k])?).abs());
    }
    Ok(sup)
}
