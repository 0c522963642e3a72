//! Obstacle-constrained L² gradient flow of the discrete bending energy with
//! Navier boundary conditions `u = u″ = 0`.
//!
//! The discrete energy on a uniform grid is
//! `W_h(u) = h Σ_{0<i<n−1} (D²u_i)² / (1 + (D¹u_i)²)^(5/2)` with central
//! differences, and [`gradient_w`] is its exact gradient scaled by `1/h`,
//! i.e. `D²(2D²u/S^(5/2)) + D¹(5(D²u)²D¹u/S^(7/2))`. Odd reflection across
//! each endpoint supplies the ghost values, which makes `D²u` vanish there.

mod banded;

pub use banded::BandSpd;

use crate::error::{Error, Result};
use crate::grid;
use crate::obstacle::ObstacleSC;
use crate::shooting::Shooting;
use crate::specfun::{c0, c_star, g_inv};

/// Time discretization of the flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// `u ← max(u − dt·∇W(u), ψ)`; requires `dt ≤ 0.1·h⁴·(1+min|u′|²)^(5/2)/16`.
    ExplicitEuler,
    /// Projected step `v = argmin_{v≥ψ} ⟨∇W(u), v−u⟩ + ½‖v−u‖²_M` with
    /// `M = I/dt + σ·T²` (T the Dirichlet second difference), solved by a
    /// primal–dual active set method. A step is retried with `dt/2` when it
    /// would raise the energy.
    SemiImplicit { sigma: f64 },
}

/// Relative energy increase accepted as rounding noise.
pub const ENERGY_SLACK: f64 = 1e-13;

/// Stability safety factor of the explicit scheme.
pub const EXPLICIT_SAFETY: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub proj_tol: f64,
    pub record_every: usize,
    pub scheme: Scheme,
    /// Largest number of consecutive halvings of dt within one step.
    pub max_halvings: u32,
}

impl FlowConfig {
    pub fn semi_implicit(n: usize, dt: f64, t_end: f64) -> Self {
        Self {
            n,
            dt,
            t_end,
            proj_tol: 1e-12,
            record_every: 10,
            scheme: Scheme::SemiImplicit { sigma: 2.0 },
            max_halvings: 40,
        }
    }

    pub fn explicit(n: usize, dt: f64, t_end: f64) -> Self {
        Self {
            scheme: Scheme::ExplicitEuler,
            ..Self::semi_implicit(n, dt, t_end)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 7 {
            return Err(Error::InvalidParameter(format!(
                "flow grid needs at least 7 points, got {}",
                self.n
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if !(self.proj_tol >= 0.0) {
            return Err(Error::InvalidParameter("proj_tol must be nonnegative".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be positive".into()));
        }
        if let Scheme::SemiImplicit { sigma } = self.scheme {
            if !(sigma >= 0.0) {
                return Err(Error::InvalidParameter(format!("sigma must be nonnegative, got {sigma}")));
            }
        }
        Ok(())
    }
}

/// A time-stamped state of the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub u: Vec<f64>,
    pub energy: f64,
    pub contact: Vec<bool>,
    pub slope_max: f64,
}

impl FlowState {
    pub fn new(t: f64, u: Vec<f64>, psi: &[f64], proj_tol: f64) -> Result<Self> {
        let h = 1.0 / (u.len() - 1) as f64;
        let energy = discrete_energy(&u, h);
        let contact = u.iter().zip(psi).map(|(a, b)| a - b <= proj_tol).collect();
        let slope_max = slope_max(&u, h);
        Ok(Self { t, u, energy, contact, slope_max })
    }

    pub fn contact_count(&self) -> usize {
        self.contact.iter().filter(|&&c| c).count()
    }

    /// `max |u(x) − u(1−x)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.u.len();
        (0..n / 2).map(|i| (self.u[i] - self.u[n - 1 - i]).abs()).fold(0.0, f64::max)
    }
}

fn check_grid(u: &[f64], xs: &[f64]) -> Result<f64> {
    if xs.len() < 7 {
        return Err(Error::InvalidParameter(format!(
            "gradient needs at least 7 grid points, got {}",
            xs.len()
        )));
    }
    grid::same_len(xs.len(), &[u])?;
    grid::uniform_step(xs)
}

/// `W_h(u)`; trapezoid weights with vanishing endpoint integrand.
pub fn discrete_energy(u: &[f64], h: f64) -> f64 {
    let n = u.len();
    let mut acc = 0.0;
    for i in 1..n - 1 {
        let d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
        let d1 = (u[i + 1] - u[i - 1]) / (2.0 * h);
        acc += d2 * d2 * (1.0 + d1 * d1).powf(-2.5);
    }
    h * acc
}

/// Largest |u′| with central differences inside and second-order one-sided
/// differences at the endpoints.
pub fn slope_max(u: &[f64], h: f64) -> f64 {
    let n = u.len();
    let mut m: f64 = ((-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)).abs();
    m = m.max(((3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h)).abs());
    for i in 1..n - 1 {
        m = m.max(((u[i + 1] - u[i - 1]) / (2.0 * h)).abs());
    }
    m
}

/// Discrete L² gradient of `W_h`, zero at the endpoints.
pub fn gradient_w(u: &[f64], xs: &[f64]) -> Result<Vec<f64>> {
    let h = check_grid(u, xs)?;
    Ok(gradient_h(u, h))
}

fn gradient_h(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    // A = 2D²u/S^(5/2), B = 5(D²u)²D¹u/S^(7/2); both vanish at the endpoints
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for i in 1..n - 1 {
        let d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
        let d1 = (u[i + 1] - u[i - 1]) / (2.0 * h);
        let s = 1.0 + d1 * d1;
        a[i] = 2.0 * d2 * s.powf(-2.5);
        b[i] = 5.0 * d2 * d2 * d1 * s.powf(-3.5);
    }
    let mut g = vec![0.0; n];
    for j in 1..n - 1 {
        g[j] = (a[j + 1] - 2.0 * a[j] + a[j - 1]) / (h * h) + (b[j + 1] - b[j - 1]) / (2.0 * h);
    }
    g
}

/// Discrete H² seminorm `(∫ (a″ − b″)²)^(1/2)`: central differences inside,
/// `(2f₀ − 5f₁ + 4f₂ − f₃)/h²` at the ends, composite Simpson.
pub fn h2_distance(a: &[f64], b: &[f64], xs: &[f64]) -> Result<f64> {
    let h = grid::uniform_step(xs)?;
    grid::same_len(xs.len(), &[a, b])?;
    let n = xs.len();
    if n < 4 {
        return Err(Error::InvalidParameter("h2 distance needs at least 4 points".into()));
    }
    let f: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mut d2 = vec![0.0; n];
    for i in 1..n - 1 {
        d2[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
    }
    d2[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
    d2[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (h * h);
    let sq: Vec<f64> = d2.iter().map(|v| v * v).collect();
    Ok(grid::simpson(&sq, h).max(0.0).sqrt())
}

/// `M*(u₀) = G⁻¹(√W(u₀)/2)`, the a priori bound on |u′| along the flow.
pub fn slope_bound(u0: &[f64], xs: &[f64]) -> Result<f64> {
    let h = grid::uniform_step(xs)?;
    grid::same_len(xs.len(), &[u0])?;
    let w = discrete_energy(u0, h);
    if w >= c0() * c0() {
        return Err(Error::Domain(format!(
            "slope bound needs W(u0) < c0^2 = {}, got {w}",
            c0() * c0()
        )));
    }
    g_inv(0.5 * w.sqrt())
}

/// Largest stable explicit step for the current state.
pub fn explicit_dt_bound(u: &[f64], h: f64) -> f64 {
    let n = u.len();
    let min_slope = (1..n - 1)
        .map(|i| ((u[i + 1] - u[i - 1]) / (2.0 * h)).abs())
        .fold(f64::INFINITY, f64::min);
    EXPLICIT_SAFETY * h.powi(4) * (1.0 + min_slope * min_slope).powf(2.5) / 16.0
}

/// Diagnostics of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub dt_used: f64,
    pub rejected: u32,
    pub active_set_iterations: u32,
}

/// Advances the state by one step of at most `dt`.
pub fn step(
    state: &FlowState,
    dt: f64,
    cfg: &FlowConfig,
    psi: &[f64],
) -> Result<(FlowState, StepInfo)> {
    let n = state.u.len();
    let h = 1.0 / (n - 1) as f64;
    let g = gradient_h(&state.u, h);
    match cfg.scheme {
        Scheme::ExplicitEuler => {
            let bound = explicit_dt_bound(&state.u, h);
            if dt > bound * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "explicit step {dt:e} exceeds the stability bound {bound:e}"
                )));
            }
            let mut v: Vec<f64> = state
                .u
                .iter()
                .zip(&g)
                .zip(psi)
                .map(|((u, g), p)| (u - dt * g).max(*p))
                .collect();
            v[0] = 0.0;
            v[n - 1] = 0.0;
            let next = FlowState::new(state.t + dt, v, psi, cfg.proj_tol)?;
            Ok((next, StepInfo { dt_used: dt, rejected: 0, active_set_iterations: 0 }))
        }
        Scheme::SemiImplicit { sigma } => {
            let mut tau = dt;
            for rejected in 0..=cfg.max_halvings {
                if let Ok((v, its)) = prox_step(&state.u, &g, psi, tau, sigma, h) {
                    let next = FlowState::new(state.t + tau, v, psi, cfg.proj_tol)?;
                    // rounding noise dominates the energy change near equilibrium
                    if next.energy <= state.energy + ENERGY_SLACK * state.energy.max(1.0) {
                        return Ok((
                            next,
                            StepInfo { dt_used: tau, rejected, active_set_iterations: its },
                        ));
                    }
                }
                tau *= 0.5;
            }
            Err(Error::Instability(format!(
                "no energy-decreasing step after {} halvings of dt = {dt:e} at t = {}",
                cfg.max_halvings, state.t
            )))
        }
    }
}

/// `M = I/dt + σT²` on the interior unknowns.
fn prox_matrix(m: usize, dt: f64, sigma: f64, h: f64) -> BandSpd {
    let h4 = h.powi(4);
    let mut a = BandSpd::zeros(m, 2);
    for i in 0..m {
        // T² of the Dirichlet second difference: rows (1, −4, 6, −4, 1)/h⁴, corner 5/h⁴
        let diag = if i == 0 || i == m - 1 { 5.0 } else { 6.0 };
        a.set(i, i, 1.0 / dt + sigma * diag / h4);
        if i >= 1 {
            a.set(i, i - 1, -4.0 * sigma / h4);
        }
        if i >= 2 {
            a.set(i, i - 2, sigma / h4);
        }
    }
    a
}

/// Solves `min ½dᵀMd + gᵀd` subject to `u + d ≥ ψ` on the interior nodes
/// by the primal–dual active set method.
fn prox_step(u: &[f64], g: &[f64], psi: &[f64], dt: f64, sigma: f64, h: f64) -> Result<(Vec<f64>, u32)> {
    let n = u.len();
    let m = n - 2;
    let mat = prox_matrix(m, dt, sigma, h);
    let lower: Vec<f64> = (1..n - 1).map(|i| psi[i] - u[i]).collect();
    let gi: Vec<f64> = g[1..n - 1].to_vec();
    // predict the active set from the explicit step
    let mut active: Vec<bool> = (0..m).map(|k| -dt * gi[k] < lower[k]).collect();
    let c = 1.0 / dt;
    for it in 1..=100u32 {
        let free: Vec<usize> = (0..m).filter(|&k| !active[k]).collect();
        let mut d = vec![0.0; m];
        for k in 0..m {
            if active[k] {
                d[k] = lower[k];
            }
        }
        // rhs = −g_F − M_{F,A} d_A
        let md_a = mat.mul(&d);
        let rhs: Vec<f64> = free.iter().map(|&k| -gi[k] - md_a[k]).collect();
        let sol = mat.restrict(&free).solve(&rhs)?;
        for (&k, v) in free.iter().zip(sol) {
            d[k] = v;
        }
        let md = mat.mul(&d);
        let mut changed = false;
        for k in 0..m {
            let lambda = if active[k] { md[k] + gi[k] } else { 0.0 };
            let now = lambda + c * (lower[k] - d[k]) > 0.0;
            changed |= now != active[k];
            active[k] = now;
        }
        if !changed {
            let mut v = vec![0.0; n];
            for k in 0..m {
                v[k + 1] = if active[k] { psi[k + 1] } else { u[k + 1] + d[k] };
            }
            return Ok((v, it));
        }
    }
    Err(Error::NonConvergence("active set iteration did not settle".into()))
}

/// Result of [`run_flow`].
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRun {
    pub xs: Vec<f64>,
    pub states: Vec<FlowState>,
    pub m_star: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    /// Largest energy increase over any accepted step (≤ 0 for a dissipative run).
    pub max_energy_increase: f64,
    /// Largest symmetry defect over all steps.
    pub max_symmetry_defect: f64,
    /// Largest |u′| over all steps.
    pub max_slope: f64,
    /// Smallest `u − ψ` over all steps.
    pub min_gap: f64,
}

impl FlowRun {
    pub fn last(&self) -> &FlowState {
        self.states.last().expect("a run records at least its initial state")
    }
}

/// Checks the hypotheses on an initial datum: zero boundary values, u₀ ≥ ψ,
/// symmetry, and `W(u₀) < c₀²`.
pub fn check_initial(u0: &[f64], xs: &[f64], obs: &ObstacleSC, proj_tol: f64) -> Result<()> {
    let h = check_grid(u0, xs)?;
    let n = u0.len();
    if u0[0].abs() > 1e-14 || u0[n - 1].abs() > 1e-14 {
        return Err(Error::Inadmissible(format!(
            "boundary values must vanish, got {} and {}",
            u0[0],
            u0[n - 1]
        )));
    }
    let gap = u0
        .iter()
        .zip(xs)
        .map(|(u, &x)| u - obs.psi(x))
        .fold(f64::INFINITY, f64::min);
    if gap < -proj_tol {
        return Err(Error::Inadmissible(format!("datum dips below the obstacle by {}", -gap)));
    }
    let asym = (0..n / 2).map(|i| (u0[i] - u0[n - 1 - i]).abs()).fold(0.0, f64::max);
    if asym > 1e-12 {
        return Err(Error::Inadmissible(format!("datum is not symmetric (defect {asym:e})")));
    }
    let w = discrete_energy(u0, h);
    if w >= c0() * c0() {
        return Err(Error::Inadmissible(format!(
            "energy {w} is not below c0^2 = {}",
            c0() * c0()
        )));
    }
    Ok(())
}

/// Runs the flow from `u0` until `cfg.t_end`, recording every
/// `cfg.record_every` steps and the final state.
pub fn run_flow(u0: &[f64], cfg: &FlowConfig, obs: &ObstacleSC) -> Result<FlowRun> {
    cfg.validate()?;
    if u0.len() != cfg.n {
        return Err(Error::GridMismatch(format!(
            "initial datum has {} points, config expects {}",
            u0.len(),
            cfg.n
        )));
    }
    let xs = grid::linspace(0.0, 1.0, cfg.n);
    check_initial(u0, &xs, obs, cfg.proj_tol)?;
    let psi = obs.sample(&xs);
    let m_star = slope_bound(u0, &xs)?;
    let mut state = FlowState::new(0.0, u0.to_vec(), &psi, cfg.proj_tol)?;
    let mut run = FlowRun {
        xs,
        states: vec![state.clone()],
        m_star,
        steps: 0,
        rejected_steps: 0,
        max_energy_increase: f64::NEG_INFINITY,
        max_symmetry_defect: state.symmetry_defect(),
        max_slope: state.slope_max,
        min_gap: gap(&state.u, &psi),
    };
    let h = 1.0 / (cfg.n - 1) as f64;
    let mut dt = cfg.dt;
    let mut increases = 0;
    while state.t < cfg.t_end * (1.0 - 1e-14) {
        if let Scheme::ExplicitEuler = cfg.scheme {
            dt = dt.min(explicit_dt_bound(&state.u, h));
        }
        let tau = dt.min(cfg.t_end - state.t);
        let (next, info) = step(&state, tau, cfg, &psi)?;
        let rise = next.energy - state.energy;
        if rise > 1e-8 {
            increases += 1;
            if increases >= 10 {
                return Err(Error::Instability(format!(
                    "energy increased for 10 consecutive steps (t = {})",
                    next.t
                )));
            }
        } else {
            increases = 0;
        }
        run.max_energy_increase = run.max_energy_increase.max(rise);
        run.rejected_steps += info.rejected as usize;
        run.steps += 1;
        // recover the configured step gradually after rejections
        if matches!(cfg.scheme, Scheme::SemiImplicit { .. }) {
            dt = (2.0 * info.dt_used).min(cfg.dt);
        }
        state = next;
        run.max_symmetry_defect = run.max_symmetry_defect.max(state.symmetry_defect());
        run.max_slope = run.max_slope.max(state.slope_max);
        run.min_gap = run.min_gap.min(gap(&state.u, &psi));
        if run.steps % cfg.record_every == 0 {
            run.states.push(state.clone());
        }
    }
    if run.states.last().map(|s| s.t) != Some(state.t) {
        run.states.push(state);
    }
    Ok(run)
}

fn gap(u: &[f64], psi: &[f64]) -> f64 {
    u.iter().zip(psi).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min)
}

/// Seeded admissible initial datum for obstacle height `h`:
/// `A sin(πx) + ε₁ sin(3πx) + ε₂ sin(5πx)` with `A = h(1+δ)`, lifted to the
/// obstacle where it dips below.
///
/// Tall obstacles make every sine cap too expensive (`W ≥ c₀²`); there the
/// datum is the shooting profile of a slightly taller obstacle, which lies
/// above ψ because it is concave and vanishes at the ends.
pub fn initial_datum(xs: &[f64], obs: &ObstacleSC, seed: u64) -> Result<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;
    let h = grid::uniform_step(xs)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let height = obs.psi_half;
    let delta: f64 = rng.gen_range(0.05..0.15);
    let e1: f64 = rng.gen_range(-0.01..0.01) * height;
    let e2: f64 = rng.gen_range(-0.01..0.01) * height;
    let a = height * (1.0 + delta);
    let n = xs.len();
    let mut u: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let v = a * (PI * x).sin() + e1 * (3.0 * PI * x).sin() + e2 * (5.0 * PI * x).sin();
            v.max(obs.psi(x))
        })
        .collect();
    u[0] = 0.0;
    u[n - 1] = 0.0;
    if discrete_energy(&u, h) >= 0.98 * c0() * c0() {
        let taller = height + delta * (c_star() - height);
        let s = Shooting::default();
        let alpha = s.solve_alpha(taller)?;
        u = s.reconstruct_profile(alpha, n)?.u;
    }
    // exact mirror symmetry of the samples
    for i in 0..n / 2 {
        let m = 0.5 * (u[i] + u[n - 1 - i]);
        u[i] = m;
        u[n - 1 - i] = m;
    }
    Ok(u)
}
