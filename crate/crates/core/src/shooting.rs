//! Shooting for the symmetric boundary value problem
//! `u(0) = u″(0) = 0`, `u′(½) = 0`, `u‴(½⁻)` free.
//!
//! Starting from `u′(0) = α`, `u″(0) = 0`, `u‴(0) = β`, the transformed slope
//! `y = G(u′)` satisfies a linear equation whose zero is reached at the time
//! map `Z_{α,β}`. Requiring `Z = ½` fixes `β = β*(α)`, and the solution on
//! `[0, ½]` then has a closed form in the parameter `ρ = √(α − u′)`:
//!
//! ```text
//! x(ρ) = (√α/I) ∫₀^ρ g(α − r²) dr,   u(ρ) = (√α/I) ∫₀^ρ (α − r²) g(α − r²) dr,
//! ```
//!
//! with `g(t) = (1+t²)^(−5/4)` and `I = I(α)`.

use crate::error::{Error, Result};
use crate::grid;
use crate::specfun::gfun::{c_star, g_density};
use crate::specfun::quad::{singular_panels, sqrt_singular_integral, GaussLegendre, QuadSpec, MAX_NODES};

/// Smallest initial slope accepted by the shooting formulas.
pub const ALPHA_MIN: f64 = 1e-8;

/// Default residual tolerance of [`Shooting::solve_alpha`].
pub const SOLVE_TOL: f64 = 1e-10;

/// Initial data `u′(0) = alpha`, `u‴(0) = beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootParams {
    pub alpha: f64,
    pub beta: f64,
}

/// Sampled symmetric solution on a uniform grid of [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ShotProfile {
    pub alpha: f64,
    pub beta_star: f64,
    pub xs: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub d2u: Vec<f64>,
    /// `u‴` away from ½; the sample at ½ holds the left limit.
    pub d3u: Vec<f64>,
    pub d3u_left_half: f64,
    pub height: f64,
    pub arclength_half: f64,
    /// Exact energy `4I(αI − J)/α` of the continuous profile.
    pub energy: f64,
}

impl ShotProfile {
    /// Index of the sample at x = ½.
    pub fn mid(&self) -> usize {
        (self.xs.len() - 1) / 2
    }

    pub fn step(&self) -> f64 {
        self.xs[1] - self.xs[0]
    }

    /// Energy of the samples by composite Simpson.
    pub fn grid_energy(&self) -> f64 {
        let f: Vec<f64> = self
            .d2u
            .iter()
            .zip(&self.du)
            .map(|(b, a)| b * b * (1.0 + a * a).powf(-2.5))
            .collect();
        grid::simpson(&f, self.step())
    }

    /// One-sided second-order difference of `u″` at ½⁻.
    pub fn fd_third_derivative_left(&self) -> f64 {
        let m = self.mid();
        let f = &self.d2u;
        (3.0 * f[m] - 4.0 * f[m - 1] + f[m - 2]) / (2.0 * self.step())
    }
}

/// Shooting formulas with a fixed quadrature configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Shooting {
    pub quad: QuadSpec,
}

impl Shooting {
    pub fn new(quad: QuadSpec) -> Self {
        Self { quad }
    }

    fn check_alpha(alpha: f64) -> Result<()> {
        if !alpha.is_finite() || alpha < ALPHA_MIN {
            return Err(Error::Domain(format!(
                "initial slope must be finite and at least {ALPHA_MIN}, got {alpha}"
            )));
        }
        Ok(())
    }

    /// `I(α) = √α ∫₀^α (α−s)^(−1/2) (1+s²)^(−5/4) ds`.
    pub fn integral_i(&self, alpha: f64) -> Result<f64> {
        Self::check_alpha(alpha)?;
        Ok(alpha.sqrt() * sqrt_singular_integral(g_density, alpha, &self.quad)?)
    }

    /// `J(α) = √α ∫₀^α (α−x)^(−1/2) x (1+x²)^(−5/4) dx`.
    pub fn integral_j(&self, alpha: f64) -> Result<f64> {
        Self::check_alpha(alpha)?;
        Ok(alpha.sqrt() * sqrt_singular_integral(|t| t * g_density(t), alpha, &self.quad)?)
    }

    /// `β*(α) = −2 (1+α²)^(5/2) (I(α)/√α)²`, the value of `u‴(0)` that puts
    /// the first critical point of `u` at x = ½.
    pub fn beta_star(&self, alpha: f64) -> Result<f64> {
        let r = self.integral_i(alpha)? / alpha.sqrt();
        Ok(-2.0 * (1.0 + alpha * alpha).powf(2.5) * r * r)
    }

    /// Position of the first zero of `u′` for the data `(α, β)`, β < 0.
    pub fn time_map(&self, alpha: f64, beta: f64) -> Result<f64> {
        if !(beta < 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time map needs a finite beta < 0, got {beta}"
            )));
        }
        let r = self.integral_i(alpha)? / alpha.sqrt();
        Ok((1.0 + alpha * alpha).powf(1.25) / (2f64.sqrt() * (-beta).sqrt()) * r)
    }

    /// `u(½; α) = J(α) / (2 I(α))`.
    pub fn height(&self, alpha: f64) -> Result<f64> {
        Ok(self.integral_j(alpha)? / (2.0 * self.integral_i(alpha)?))
    }

    /// Arclength of the graph over [0, ½].
    pub fn arclength_half(&self, alpha: f64) -> Result<f64> {
        let i = self.integral_i(alpha)?;
        let k = sqrt_singular_integral(|t| (1.0 + t * t).powf(-0.75), alpha, &self.quad)?;
        Ok(alpha.sqrt() * k / (2.0 * i))
    }

    /// Left limit of `u‴` at ½, `β*(α)/(1+α²)^(5/2) = −2I(α)²/α`.
    pub fn third_derivative_jump(&self, alpha: f64) -> Result<f64> {
        let i = self.integral_i(alpha)?;
        Ok(-2.0 * i * i / alpha)
    }

    /// The alternative closed form `β*(α)/(1+α²)^(5/4)`; reported next to
    /// [`Self::third_derivative_jump`] for comparison only.
    pub fn third_derivative_alt_form(&self, alpha: f64) -> Result<f64> {
        Ok(self.beta_star(alpha)? / (1.0 + alpha * alpha).powf(1.25))
    }

    /// Exact energy of the shooting profile, `4I(αI − J)/α`.
    pub fn energy(&self, alpha: f64) -> Result<f64> {
        let i = self.integral_i(alpha)?;
        let j = self.integral_j(alpha)?;
        Ok(4.0 * i * (alpha * i - j) / alpha)
    }

    /// The unique α with `height(α) = H`, for 0 < H < c*.
    pub fn solve_alpha(&self, h: f64) -> Result<f64> {
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::Domain(format!("obstacle height must be positive, got {h}")));
        }
        let cs = c_star();
        if h >= cs {
            return Err(Error::NoSolution { height: h, threshold: cs });
        }
        let mut lo = 1e-6;
        while self.height(lo)? > h {
            lo /= 4.0;
            if lo < ALPHA_MIN {
                return Err(Error::Domain(format!(
                    "height {h} is below the resolvable range (alpha < {ALPHA_MIN})"
                )));
            }
        }
        let mut hi = 1.0f64.max(lo);
        while self.height(hi)? < h {
            lo = hi;
            hi *= 4.0;
            if hi > 1e18 {
                return Err(Error::NonConvergence(format!(
                    "height {h} is within {:.3e} of c*; slope bracket exceeded 1e18",
                    cs - h
                )));
            }
        }
        self.solve_alpha_in(h, lo, hi)
    }

    /// Solves `height(α) = H` inside a given bracket.
    pub fn solve_alpha_in(&self, h: f64, lo: f64, hi: f64) -> Result<f64> {
        let f = |a: f64| self.height(a).map(|v| v - h);
        let (mut lo, mut hi) = (lo, hi);
        let (flo, fhi) = (f(lo)?, f(hi)?);
        if flo == 0.0 {
            return Ok(lo);
        }
        if fhi == 0.0 {
            return Ok(hi);
        }
        if flo.signum() == fhi.signum() {
            return Err(Error::InvalidParameter(format!(
                "[{lo}, {hi}] does not bracket height {h}"
            )));
        }
        // bisection in log α down to a 1% bracket
        while hi / lo > 1.01 {
            let mid = (lo * hi).sqrt();
            if f(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Newton polish with a central-difference slope, kept inside the bracket
        let mut a = (lo * hi).sqrt();
        let mut r = f(a)?;
        for _ in 0..60 {
            if r == 0.0 {
                break;
            }
            if r < 0.0 {
                lo = a;
            } else {
                hi = a;
            }
            let d = 1e-5 * a;
            let slope = (f(a + d)? - f(a - d)?) / (2.0 * d);
            let mut next = a - r / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = (lo * hi).sqrt();
            }
            let step = (next - a).abs();
            a = next;
            r = f(a)?;
            if r.abs() <= 1e-15 || step <= 1e-15 * a {
                break;
            }
        }
        if r.abs() > SOLVE_TOL {
            return Err(Error::NonConvergence(format!(
                "height residual {r:e} at alpha = {a} exceeds {SOLVE_TOL:e}"
            )));
        }
        Ok(a)
    }

    /// Samples the solution with initial slope α on `n` (odd, ≥ 3) uniform
    /// points of [0, 1].
    pub fn reconstruct_profile(&self, alpha: f64, n: usize) -> Result<ShotProfile> {
        Self::check_alpha(alpha)?;
        if n < 3 || n % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "profile grid needs an odd number of points >= 3, got {n}"
            )));
        }
        let i = self.integral_i(alpha)?;
        let j = self.integral_j(alpha)?;
        let table = ProfileTable::new(alpha, i, &self.quad)?;
        let xs = grid::linspace(0.0, 1.0, n);
        let m = (n - 1) / 2;
        let gamma = -2.0 * i * i / alpha;
        let c2 = -2.0 * i / alpha.sqrt();

        let mut u = vec![0.0; n];
        let mut du = vec![0.0; n];
        let mut d2u = vec![0.0; n];
        let mut d3u = vec![0.0; n];
        for k in 0..=m {
            let d = if k == 0 {
                alpha.sqrt()
            } else if k == m {
                0.0
            } else {
                table.invert(xs[k])?
            };
            let rho = alpha.sqrt() - d;
            let w = ProfileTable::slope(alpha.sqrt(), d);
            let s = 1.0 + w * w;
            let y = if k == m { j / (2.0 * i) } else { table.eval(d).1 };
            let b = c2 * rho * s.powf(1.25);
            u[k] = y;
            du[k] = w;
            d2u[k] = b;
            d3u[k] = s.powf(2.5) * gamma + 2.5 * b * b * w / s;
        }
        for k in m + 1..n {
            let r = n - 1 - k;
            u[k] = u[r];
            du[k] = -du[r];
            d2u[k] = d2u[r];
            d3u[k] = -d3u[r];
        }
        u[n - 1] = 0.0;
        let beta_star = -2.0 * (1.0 + alpha * alpha).powf(2.5) * i * i / alpha;
        Ok(ShotProfile {
            alpha,
            beta_star,
            xs,
            u,
            du,
            d2u,
            d3u,
            d3u_left_half: gamma,
            height: j / (2.0 * i),
            arclength_half: self.arclength_half(alpha)?,
            energy: 4.0 * i * (alpha * i - j) / alpha,
        })
    }
}

/// Cumulative values of `x` and `u` at panel breaks. The table is
/// parametrized by `d = √α − ρ`, so that `u′ = α − ρ² = d(2√α − d)` keeps
/// full relative accuracy next to x = ½ even for very large α.
struct ProfileTable {
    root: f64,
    scale: f64,
    /// Decreasing from √α (x = 0) to 0 (x = ½).
    breaks: Vec<f64>,
    xcum: Vec<f64>,
    ucum: Vec<f64>,
    nodes: usize,
}

impl ProfileTable {
    fn new(alpha: f64, i: f64, q: &QuadSpec) -> Result<Self> {
        // same grading as the t-panels of the singular integrals, mapped by d = √α − √(α − t)
        let root = alpha.sqrt();
        let dist = |t: f64| t / (root + (alpha - t).sqrt());
        let (tb, a) = singular_panels(alpha);
        let mut breaks = vec![root];
        if a > 0.0 {
            breaks.push(dist(a));
            for &t in tb.iter().rev().skip(1) {
                breaks.push(dist(t));
            }
        } else {
            breaks.push(0.0);
        }
        breaks.dedup();
        let scale = root / i;
        let mut nodes = q.nodes;
        let mut table = Self::build(root, scale, &breaks, nodes);
        loop {
            if nodes >= MAX_NODES {
                return Err(Error::NonConvergence(
                    "profile table did not converge".into(),
                ));
            }
            let finer = Self::build(root, scale, &breaks, 2 * nodes);
            let dx = (finer.0.last().unwrap() - table.0.last().unwrap()).abs();
            let du = (finer.1.last().unwrap() - table.1.last().unwrap()).abs();
            table = finer;
            nodes *= 2;
            if dx <= q.tol && du <= q.tol * table.1.last().unwrap().abs().max(1e-300) {
                break;
            }
        }
        Ok(Self {
            root,
            scale,
            breaks,
            xcum: table.0,
            ucum: table.1,
            nodes,
        })
    }

    fn slope(root: f64, d: f64) -> f64 {
        d * (2.0 * root - d)
    }

    fn build(root: f64, scale: f64, breaks: &[f64], nodes: usize) -> (Vec<f64>, Vec<f64>) {
        let rule = GaussLegendre::cached(nodes);
        let mut xc = vec![0.0];
        let mut uc = vec![0.0];
        for w in breaks.windows(2) {
            let (dx, du) = Self::panel(&rule, root, w[0], w[1]);
            xc.push(xc.last().unwrap() + scale * dx);
            uc.push(uc.last().unwrap() + scale * du);
        }
        (xc, uc)
    }

    /// Integrals of `g(u′)` and `u′ g(u′)` as d decreases from `a` to `b`.
    fn panel(rule: &GaussLegendre, root: f64, a: f64, b: f64) -> (f64, f64) {
        let half = 0.5 * (a - b);
        let mid = 0.5 * (a + b);
        let (mut sx, mut su) = (0.0, 0.0);
        for (z, wt) in rule.nodes.iter().zip(&rule.weights) {
            let w = Self::slope(root, mid + half * z);
            let g = g_density(w);
            sx += wt * g;
            su += wt * w * g;
        }
        (sx * half, su * half)
    }

    fn locate(&self, d: f64) -> usize {
        let k = self.breaks.partition_point(|&b| b >= d);
        k.saturating_sub(1).min(self.breaks.len() - 2)
    }

    /// `(x, u)` at distance `d`.
    fn eval(&self, d: f64) -> (f64, f64) {
        let k = self.locate(d);
        let rule = GaussLegendre::cached(self.nodes);
        let (dx, du) = Self::panel(&rule, self.root, self.breaks[k], d);
        (
            self.xcum[k] + self.scale * dx,
            self.ucum[k] + self.scale * du,
        )
    }

    /// d with x(d) = x, by Newton's method inside the containing panel.
    fn invert(&self, x: f64) -> Result<f64> {
        let k = self
            .xcum
            .partition_point(|&v| v <= x)
            .saturating_sub(1)
            .min(self.breaks.len() - 2);
        // x increases as d decreases
        let (mut hi, mut lo) = (self.breaks[k], self.breaks[k + 1]);
        let span = self.xcum[k + 1] - self.xcum[k];
        let mut d = hi - (hi - lo) * ((x - self.xcum[k]) / span).clamp(0.0, 1.0);
        for _ in 0..100 {
            let r = self.eval(d).0 - x;
            // x(d) is a sum of panel integrals, so its rounding floor is a few ulps of x
            if r.abs() <= 8.0 * f64::EPSILON * x {
                return Ok(d);
            }
            if r < 0.0 {
                hi = d;
            } else {
                lo = d;
            }
            let slope = -self.scale * g_density(Self::slope(self.root, d));
            let mut next = d - r / slope;
            if !(next >= lo && next <= hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - d).abs();
            d = next;
            if step <= 1e-15 * d.max(1e-300) || hi - lo <= 1e-15 * hi {
                return Ok(d);
            }
        }
        Err(Error::NonConvergence(format!(
            "inversion of x(d) failed at x = {x}"
        )))
    }
}
