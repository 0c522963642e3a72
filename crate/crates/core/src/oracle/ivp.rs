//! Adaptive Dormand–Prince 5(4) integration of the Euler–Lagrange equation
//! written as a first-order system in `(u, u′, u″, u‴)`.

use crate::error::{Error, Result};
use crate::shooting::ShootParams;

pub type State = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for IvpConfig {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 200_000 }
    }
}

/// Where and why the integration stopped early.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowUp {
    pub x: f64,
    pub step: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub xs: Vec<f64>,
    pub states: Vec<State>,
    pub blow_up: Option<BlowUp>,
    pub rejected: usize,
}

impl Trajectory {
    pub fn last(&self) -> (f64, State) {
        (*self.xs.last().unwrap(), *self.states.last().unwrap())
    }
}

/// `u⁗` from the differentiated first integral
/// `u‴/S^(5/2) − (5/2)u″²u′/S^(7/2) = const`, `S = 1 + u′²`.
pub fn rhs(y: &State) -> State {
    let (p, q, r) = (y[1], y[2], y[3]);
    let s = 1.0 + p * p;
    let u4 = 10.0 * p * q * r / s + 2.5 * q * q * q / s - 17.5 * p * p * q * q * q / (s * s);
    [p, q, r, u4]
}

/// The first integral, equal to `β/(1+α²)^(5/2)` along the trajectory.
pub fn conserved(y: &State) -> f64 {
    let s = 1.0 + y[1] * y[1];
    y[3] * s.powf(-2.5) - 2.5 * y[2] * y[2] * y[1] * s.powf(-3.5)
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step; returns the fifth-order state and the error estimate.
fn dp_step(y: &State, h: f64) -> (State, State) {
    let mut k = [[0.0; 4]; 7];
    let _ = C;
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for d in 0..4 {
                ys[d] += h * A[s][j] * kj[d];
            }
        }
        k[s] = rhs(&ys);
    }
    let mut y5 = *y;
    let mut err = [0.0; 4];
    for s in 0..7 {
        for d in 0..4 {
            y5[d] += h * B5[s] * k[s][d];
            err[d] += h * (B5[s] - B4[s]) * k[s][d];
        }
    }
    (y5, err)
}

fn error_norm(err: &State, y0: &State, y1: &State, cfg: &IvpConfig) -> f64 {
    let mut acc = 0.0;
    for d in 0..4 {
        let sc = cfg.atol + cfg.rtol * y0[d].abs().max(y1[d].abs());
        acc += (err[d] / sc).powi(2);
    }
    (acc / 4.0).sqrt()
}

pub fn initial_state(params: ShootParams) -> State {
    [0.0, params.alpha, 0.0, params.beta]
}

fn check_config(cfg: &IvpConfig) -> Result<()> {
    if !(cfg.rtol > 0.0 && cfg.atol > 0.0) || cfg.max_steps == 0 {
        return Err(Error::InvalidParameter("ivp tolerances and step budget must be positive".into()));
    }
    Ok(())
}

/// Integrates from `x = 0` with the initial data `(0, α, 0, β)` up to
/// `x_end`. Step-size collapse or an exploding slope stops the run and is
/// reported in [`Trajectory::blow_up`].
pub fn ivp_integrate(params: ShootParams, x_end: f64, cfg: &IvpConfig) -> Result<Trajectory> {
    integrate_from(0.0, initial_state(params), x_end, cfg, None)
}

/// Integrates until `u′` first changes sign from positive to negative and
/// returns that point.
pub fn turning_point(params: ShootParams, x_max: f64, cfg: &IvpConfig) -> Result<f64> {
    let mut hit = None;
    let traj = integrate_from(0.0, initial_state(params), x_max, cfg, Some(&mut hit))?;
    hit.ok_or_else(|| {
        Error::NonConvergence(format!(
            "u' does not vanish before x = {} (blow-up: {:?})",
            traj.last().0,
            traj.blow_up
        ))
    })
}

fn integrate_from(
    x0: f64,
    y0: State,
    x_end: f64,
    cfg: &IvpConfig,
    mut event: Option<&mut Option<f64>>,
) -> Result<Trajectory> {
    check_config(cfg)?;
    let mut x = x0;
    let mut y = y0;
    let mut traj = Trajectory { xs: vec![x], states: vec![y], blow_up: None, rejected: 0 };
    let mut h = 1e-3 * (x_end - x0).abs().max(1e-3);
    let mut steps = 0;
    while x < x_end {
        if steps >= cfg.max_steps {
            return Err(Error::NonConvergence(format!("step budget exhausted at x = {x}")));
        }
        let h_min = 1e-13 * x.abs().max(1.0);
        if h < h_min || y.iter().any(|v| !v.is_finite()) || y[1].abs() > 1e12 {
            traj.blow_up = Some(BlowUp { x, step: h, slope: y[1] });
            return Ok(traj);
        }
        let step = h.min(x_end - x);
        let (yn, err) = dp_step(&y, step);
        let e = if yn.iter().all(|v| v.is_finite()) { error_norm(&err, &y, &yn, cfg) } else { f64::INFINITY };
        if e <= 1.0 {
            if let Some(slot) = event.as_deref_mut() {
                if slot.is_none() && y[1] > 0.0 && yn[1] <= 0.0 {
                    *slot = Some(locate_turn(x, &y, step));
                    traj.xs.push(x + step);
                    traj.states.push(yn);
                    return Ok(traj);
                }
            }
            x += step;
            y = yn;
            traj.xs.push(x);
            traj.states.push(y);
            steps += 1;
            let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
            h = step * fac;
        } else {
            traj.rejected += 1;
            let fac = if e.is_finite() { (0.9 * e.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h = step * fac;
        }
    }
    Ok(traj)
}

/// Root of `u′` inside an accepted step, by regula falsi (Illinois) on the
/// fraction of the step.
fn locate_turn(x: f64, y: &State, h: f64) -> f64 {
    let f = |theta: f64| if theta == 0.0 { y[1] } else { dp_step(y, theta * h).0[1] };
    let (mut a, mut b) = (0.0, 1.0);
    let (mut fa, mut fb) = (f(a), f(b));
    let mut side = 0;
    for _ in 0..200 {
        let m = (a * fb - b * fa) / (fb - fa);
        let fm = f(m);
        if fm == 0.0 || (b - a) < 1e-16 {
            return x + m * h;
        }
        if fm > 0.0 {
            a = m;
            fa = fm;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = m;
            fb = fm;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    x + 0.5 * (a + b) * h
}

/// Fate of the shooting trajectory continued past ½.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Continuation {
    /// The slope blows up at `x` before reaching 1.
    BlowUp { x: f64 },
    /// The trajectory reaches `x = 1` with the value `u(1)`.
    Reaches { u1: f64 },
}

pub fn continuation(params: ShootParams, cfg: &IvpConfig) -> Result<Continuation> {
    let traj = ivp_integrate(params, 1.0, cfg)?;
    Ok(match traj.blow_up {
        Some(b) => Continuation::BlowUp { x: b.x },
        None => Continuation::Reaches { u1: traj.last().1[0] },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shooting::Shooting;

    fn shot(alpha: f64) -> ShootParams {
        ShootParams { alpha, beta: Shooting::default().beta_star(alpha).unwrap() }
    }

    #[test]
    fn polynomial_free_case() {
        // α = β = 0 stays at rest; β alone starts as βx³/6
        let t = ivp_integrate(ShootParams { alpha: 0.0, beta: 0.0 }, 1.0, &IvpConfig::default()).unwrap();
        assert!(t.last().1.iter().all(|v| *v == 0.0));
        let t = ivp_integrate(ShootParams { alpha: 0.0, beta: 1e-6 }, 0.1, &IvpConfig::default()).unwrap();
        let u = t.last().1[0];
        assert!((u - 1e-6 * 1e-3 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn turning_point_matches_time_map() {
        for alpha in [0.2, 1.0, 5.0] {
            let x = turning_point(shot(alpha), 2.0, &IvpConfig::default()).unwrap();
            assert!((x - 0.5).abs() < 1e-6, "{alpha}: {x}");
        }
    }

    #[test]
    fn first_integral_is_conserved() {
        let p = shot(1.0);
        let t = ivp_integrate(p, 0.5, &IvpConfig::default()).unwrap();
        let c = p.beta / 2f64.powf(2.5);
        for y in &t.states {
            assert!((conserved(y) - c).abs() < 1e-9 * c.abs().max(1.0));
        }
    }

    #[test]
    fn height_and_jump_match_shooting() {
        let s = Shooting::default();
        let alpha = 1.0;
        let t = ivp_integrate(shot(alpha), 0.5, &IvpConfig::default()).unwrap();
        let (_, y) = t.last();
        assert!((y[0] - s.height(alpha).unwrap()).abs() < 1e-8);
        assert!(y[1].abs() < 1e-7);
        assert!((y[3] - s.third_derivative_jump(alpha).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn error_shrinks_with_tolerance() {
        let s = Shooting::default();
        let alpha = 1.0;
        let h = s.height(alpha).unwrap();
        let errs: Vec<f64> = [1e-5, 1e-7, 1e-9]
            .iter()
            .map(|&rtol| {
                let cfg = IvpConfig { rtol, atol: rtol * 1e-2, ..IvpConfig::default() };
                (ivp_integrate(shot(alpha), 0.5, &cfg).unwrap().last().1[0] - h).abs()
            })
            .collect();
        assert!(errs[1] < 0.5 * errs[0] && errs[2] < 0.5 * errs[1], "{errs:?}");
    }

    #[test]
    fn continuation_past_half_blows_up() {
        let t = ivp_integrate(shot(0.5), 1.0, &IvpConfig::default()).unwrap();
        let b = t.blow_up.expect("singular continuation");
        assert!(b.x > 0.5 && b.x < 1.0, "{b:?}");
        assert!(matches!(continuation(shot(0.5), &IvpConfig::default()).unwrap(), Continuation::BlowUp { .. }));
    }

    #[test]
    fn bad_config() {
        let cfg = IvpConfig { rtol: 0.0, ..IvpConfig::default() };
        assert!(ivp_integrate(shot(1.0), 0.5, &cfg).is_err());
    }
}
