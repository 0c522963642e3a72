//! The obstacle problem over symmetric graphs: classification by the
//! threshold c*, the minimizer, and checks of its first-order optimality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid;
use crate::shooting::{Shooting, ShotProfile};
use crate::specfun::c_star;

/// Symmetric cone obstacle: linear from `ψ(0) = psi0 < 0` to `ψ(½) = psi_half > 0`,
/// reflected about x = ½.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleSC {
    pub psi0: f64,
    pub psi_half: f64,
}

impl ObstacleSC {
    pub fn new(psi0: f64, psi_half: f64) -> Result<Self> {
        if !(psi0 < 0.0) || !psi0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "obstacle needs psi(0) < 0, got {psi0}"
            )));
        }
        if !(psi_half > 0.0) || !psi_half.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "obstacle needs psi(1/2) > 0, got {psi_half}"
            )));
        }
        Ok(Self { psi0, psi_half })
    }

    pub fn psi(&self, x: f64) -> f64 {
        let x = if x > 0.5 { 1.0 - x } else { x };
        (1.0 - 2.0 * x) * self.psi0 + 2.0 * x * self.psi_half
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.psi(x)).collect()
    }
}

/// Outcome of [`classify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub solvable: bool,
    pub threshold: f64,
    pub margin: f64,
}

/// A minimizer exists exactly when `ψ(½) < c*`.
pub fn classify(obs: &ObstacleSC) -> Classification {
    let threshold = c_star();
    Classification {
        solvable: obs.psi_half < threshold,
        threshold,
        margin: threshold - obs.psi_half,
    }
}

/// The minimizer of the energy above `obs`, sampled on `n` points.
pub fn minimize(obs: &ObstacleSC, n: usize, shooting: &Shooting) -> Result<ShotProfile> {
    let c = classify(obs);
    if !c.solvable {
        return Err(Error::NoSolution {
            height: obs.psi_half,
            threshold: c.threshold,
        });
    }
    let alpha = shooting.solve_alpha(obs.psi_half)?;
    shooting.reconstruct_profile(alpha, n)
}

/// A grid function together with its first two derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Jet<'a> {
    pub u: &'a [f64],
    pub du: &'a [f64],
    pub d2u: &'a [f64],
}

impl<'a> Jet<'a> {
    pub fn of(p: &'a ShotProfile) -> Self {
        Self {
            u: &p.u,
            du: &p.du,
            d2u: &p.d2u,
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        grid::same_len(n, &[self.u, self.du, self.d2u])
    }
}

/// Owned counterpart of [`Jet`].
#[derive(Debug, Clone, PartialEq)]
pub struct OwnedJet {
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub d2u: Vec<f64>,
}

impl OwnedJet {
    pub fn view(&self) -> Jet<'_> {
        Jet {
            u: &self.u,
            du: &self.du,
            d2u: &self.d2u,
        }
    }
}

/// Simpson over [0, 1]; when x = ½ is a sample the halves are integrated
/// separately since `u‴` jumps there.
fn integrate(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    if n % 2 == 1 && n >= 5 {
        let m = (n - 1) / 2;
        grid::simpson(&f[..=m], h) + grid::simpson(&f[m..], h)
    } else {
        grid::simpson(f, h)
    }
}

/// `∫₀¹ u″² (1+u′²)^(−5/2) dx` by composite Simpson.
pub fn energy(u: &[f64], du: &[f64], d2u: &[f64], xs: &[f64]) -> Result<f64> {
    let h = grid::uniform_step(xs)?;
    grid::same_len(xs.len(), &[u, du, d2u])?;
    let f: Vec<f64> = du
        .iter()
        .zip(d2u)
        .map(|(a, b)| b * b * (1.0 + a * a).powf(-2.5))
        .collect();
    Ok(integrate(&f, h))
}

/// `W′(u)(v − u)`: the first variation at `u` in the direction `φ = v − u`.
pub fn first_variation(u: Jet<'_>, v: Jet<'_>, xs: &[f64]) -> Result<f64> {
    let h = grid::uniform_step(xs)?;
    u.check(xs.len())?;
    v.check(xs.len())?;
    let f: Vec<f64> = (0..xs.len())
        .map(|k| {
            let p = u.du[k];
            let s = 1.0 + p * p;
            let dphi = v.du[k] - u.du[k];
            let d2phi = v.d2u[k] - u.d2u[k];
            2.0 * u.d2u[k] * d2phi * s.powf(-2.5) - 5.0 * u.d2u[k].powi(2) * p * dphi * s.powf(-3.5)
        })
        .collect();
    Ok(integrate(&f, h))
}

/// Sup over the interior of (0, ½) of the deviation of the conserved quantity
/// `2u‴/(1+u′²)^(5/2) − 5u″²u′/(1+u′²)^(7/2)` from `2β*/(1+α²)^(5/2)`, with
/// `u‴` from central differences of `u″`.
pub fn residual_el(p: &ShotProfile) -> f64 {
    let h = p.step();
    let m = p.mid();
    let target = 2.0 * p.beta_star / (1.0 + p.alpha * p.alpha).powf(2.5);
    (1..m)
        .map(|k| {
            let d3 = (p.d2u[k + 1] - p.d2u[k - 1]) / (2.0 * h);
            let q = 1.0 + p.du[k] * p.du[k];
            let val = 2.0 * d3 * q.powf(-2.5) - 5.0 * p.d2u[k].powi(2) * p.du[k] * q.powf(-3.5);
            (val - target).abs()
        })
        .fold(0.0, f64::max)
}

/// Distance of the profile to the obstacle away from and at the contact point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactReport {
    /// `min (u − ψ)` over samples other than x = ½.
    pub min_gap_off_contact: f64,
    /// `u(½) − ψ(½)`.
    pub gap_at_half: f64,
    pub min_gap: f64,
}

pub fn contact_report(p: &ShotProfile, obs: &ObstacleSC) -> ContactReport {
    let m = p.mid();
    let mut off = f64::INFINITY;
    let mut all = f64::INFINITY;
    for (k, (&x, &u)) in p.xs.iter().zip(&p.u).enumerate() {
        let g = u - obs.psi(x);
        all = all.min(g);
        if k != m {
            off = off.min(g);
        }
    }
    ContactReport {
        min_gap_off_contact: off,
        gap_at_half: p.u[m] - obs.psi_half,
        min_gap: all,
    }
}

/// Smooth symmetric test directions for the variational inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Direction {
    /// `amp·(b_c(x) + b_c(1−x))` with the C⁵ bump `b_c(x) = (1 − ((x−c)/w)²)⁶₊`.
    Bump { center: f64, width: f64, amp: f64 },
    /// `lambda·(A·sin(πx) − u)`: a step toward an admissible arch.
    TowardArch { lambda: f64, amp: f64 },
    /// `lambda·(4A·x(1−x) − u)`: a step toward an admissible parabola.
    TowardParabola { lambda: f64, amp: f64 },
}

fn bump(x: f64, c: f64, w: f64) -> (f64, f64, f64) {
    let z = (x - c) / w;
    if z.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let s = 1.0 - z * z;
    let d = -12.0 * z * s.powi(5) / w;
    let d2 = (-12.0 * s.powi(5) + 120.0 * z * z * s.powi(4)) / (w * w);
    (s.powi(6), d, d2)
}

impl Direction {
    /// `(φ, φ′, φ″)` at x, where `(u, u′, u″)` is the base point.
    pub fn eval(&self, x: f64, base: (f64, f64, f64)) -> (f64, f64, f64) {
        use std::f64::consts::PI;
        match *self {
            Direction::Bump { center, width, amp } => {
                let (a0, a1, a2) = bump(x, center, width);
                let (b0, b1, b2) = bump(1.0 - x, center, width);
                (amp * (a0 + b0), amp * (a1 - b1), amp * (a2 + b2))
            }
            Direction::TowardArch { lambda, amp } => {
                let (s, c) = (PI * x).sin_cos();
                (
                    lambda * (amp * s - base.0),
                    lambda * (amp * PI * c - base.1),
                    lambda * (-amp * PI * PI * s - base.2),
                )
            }
            Direction::TowardParabola { lambda, amp } => (
                lambda * (4.0 * amp * x * (1.0 - x) - base.0),
                lambda * (4.0 * amp * (1.0 - 2.0 * x) - base.1),
                lambda * (-8.0 * amp - base.2),
            ),
        }
    }

    /// The sampled competitor `v = u + φ`.
    pub fn apply(&self, p: &ShotProfile) -> OwnedJet {
        let n = p.xs.len();
        let mut v = OwnedJet {
            u: vec![0.0; n],
            du: vec![0.0; n],
            d2u: vec![0.0; n],
        };
        for k in 0..n {
            let base = (p.u[k], p.du[k], p.d2u[k]);
            let (f0, f1, f2) = self.eval(p.xs[k], base);
            v.u[k] = base.0 + f0;
            v.du[k] = base.1 + f1;
            v.d2u[k] = base.2 + f2;
        }
        v.u[0] = 0.0;
        v.u[n - 1] = 0.0;
        v
    }
}

/// `count` seeded admissible directions at the profile: nonnegative bumps
/// (any position), and steps toward admissible arches and parabolas.
pub fn random_directions(p: &ShotProfile, obs: &ObstacleSC, count: usize, seed: u64) -> Vec<Direction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = obs.psi_half;
    (0..count)
        .map(|i| match i % 3 {
            0 => {
                let center: f64 = rng.gen_range(0.1..0.9);
                let room = center.min(1.0 - center);
                Direction::Bump {
                    center,
                    width: rng.gen_range(0.1..=room.max(0.1)),
                    amp: rng.gen_range(1e-3..0.2),
                }
            }
            1 => Direction::TowardArch {
                lambda: rng.gen_range(1e-3..1.0),
                amp: h * rng.gen_range(1.0..2.0),
            },
            _ => Direction::TowardParabola {
                lambda: rng.gen_range(1e-3..1.0),
                amp: h.max(p.height) * rng.gen_range(1.0..2.0),
            },
        })
        .collect()
}

/// Grid on which the variational inequality is checked; at this size the
/// Simpson error of the first variation is below 1e-9 for the seeded directions.
pub const VI_GRID: usize = 2001;

/// `W′(u)(v − u)` for each seeded direction.
pub fn variational_inequality(p: &ShotProfile, obs: &ObstacleSC, count: usize, seed: u64) -> Result<Vec<f64>> {
    let u = Jet::of(p);
    random_directions(p, obs, count, seed)
        .iter()
        .map(|d| {
            let v = d.apply(p);
            first_variation(u, v.view(), &p.xs)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(h: f64) -> ObstacleSC {
        ObstacleSC::new(-0.1, h).unwrap()
    }

    #[test]
    fn cone_formula() {
        let o = obs(0.4);
        assert_eq!(o.psi(0.0), -0.1);
        assert_eq!(o.psi(0.5), 0.4);
        assert!((o.psi(0.25) - 0.15).abs() < 1e-15);
        assert!((o.psi(0.8) - o.psi(0.2)).abs() < 1e-15);
        assert!(ObstacleSC::new(0.1, 0.4).is_err());
        assert!(ObstacleSC::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn classification() {
        assert!(classify(&obs(0.5)).solvable);
        assert!(!classify(&obs(c_star())).solvable);
        assert!(!classify(&obs(0.9)).solvable);
        let c = classify(&obs(0.3));
        assert!((c.margin - (c_star() - 0.3)).abs() < 1e-15);
        let e = minimize(&obs(0.9), 101, &Shooting::default()).unwrap_err();
        assert!(matches!(e, Error::NoSolution { .. }));
    }

    #[test]
    fn minimizer_structure() {
        let s = Shooting::default();
        for &h in &[0.1, 0.16, 0.3, 0.6] {
            let o = obs(h);
            let p = minimize(&o, 401, &s).unwrap();
            assert!((p.height - h).abs() < 1e-10);
            let c = contact_report(&p, &o);
            assert!(c.min_gap_off_contact > 0.0);
            assert!(c.gap_at_half.abs() < 1e-10);
            assert!(p.d2u.iter().all(|&v| v <= 1e-12) && p.d2u[p.mid()] < 0.0);
        }
        let p = minimize(&obs(0.16), 101, &s).unwrap();
        assert!((p.alpha - 0.5).abs() < 0.02);
    }

    #[test]
    fn energy_values() {
        let xs = grid::linspace(0.0, 1.0, 101);
        let z = vec![0.0; 101];
        assert_eq!(energy(&z, &z, &z, &xs).unwrap(), 0.0);
        assert!(energy(&z, &z, &z[..50], &xs).is_err());
        let p = Shooting::default().reconstruct_profile(1.0, 801).unwrap();
        let e = energy(&p.u, &p.du, &p.d2u, &p.xs).unwrap();
        assert!((e - p.energy).abs() < 1e-8 * p.energy);
        // Simpson and trapezoid differ by O(h²)
        let f: Vec<f64> = (0..p.xs.len())
            .map(|k| p.d2u[k].powi(2) * (1.0 + p.du[k].powi(2)).powf(-2.5))
            .collect();
        let t = grid::trapezoid(&f, p.step());
        assert!((t - e).abs() < 10.0 * p.step().powi(2));
    }

    #[test]
    fn bump_increases_energy() {
        let s = Shooting::default();
        let o = obs(0.3);
        let p = minimize(&o, 801, &s).unwrap();
        for eps in [1e-2, 1e-3] {
            let dd = Direction::Bump { center: 0.5, width: 0.3, amp: eps };
            let v = dd.apply(&p);
            let e = energy(&v.u, &v.du, &v.d2u, &p.xs).unwrap();
            assert!(e > p.grid_energy());
        }
    }

    #[test]
    fn first_variation_zero_and_gateaux() {
        let s = Shooting::default();
        let p = s.reconstruct_profile(1.0, 801).unwrap();
        let u = Jet::of(&p);
        assert_eq!(first_variation(u, u, &p.xs).unwrap(), 0.0);
        let d = Direction::TowardArch { lambda: 1.0, amp: 0.4 };
        let v = d.apply(&p);
        let fv = first_variation(u, v.view(), &p.xs).unwrap();
        let e0 = p.grid_energy();
        let mut errs = Vec::new();
        for eps in [1e-2, 5e-3, 2.5e-3] {
            let w = Direction::TowardArch { lambda: eps, amp: 0.4 }.apply(&p);
            let e = energy(&w.u, &w.du, &w.d2u, &p.xs).unwrap();
            errs.push(((e - e0) / eps - fv).abs());
        }
        // first order in ε
        assert!(errs[0] / errs[1] > 1.8 && errs[1] / errs[2] > 1.8, "{errs:?}");
    }

    #[test]
    fn variational_inequality_holds() {
        let s = Shooting::default();
        for &h in &[0.1, 0.3, 0.6] {
            let o = obs(h);
            let p = minimize(&o, VI_GRID, &s).unwrap();
            let vals = variational_inequality(&p, &o, 50, 7).unwrap();
            let worst = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(worst >= -1e-6, "h = {h}: {worst}");
            // exact value for a bump: 4|u‴(½⁻)|·φ(½), here φ(½) = 2·amp
            let d = Direction::Bump { center: 0.5, width: 0.2, amp: 0.01 };
            let fv = first_variation(Jet::of(&p), d.apply(&p).view(), &p.xs).unwrap();
            assert!((fv - 4.0 * p.d3u_left_half.abs() * 0.02).abs() < 1e-6);
        }
    }

    #[test]
    fn euler_lagrange_residual() {
        let s = Shooting::default();
        let r1 = residual_el(&s.reconstruct_profile(1.0, 1001).unwrap());
        let r2 = residual_el(&s.reconstruct_profile(1.0, 2001).unwrap());
        assert!(r2 <= 1e-4);
        assert!(r1 / r2 > 3.0, "{r1} {r2}");
        // a straight line misses the conserved value by exactly |2γ|
        let mut p = s.reconstruct_profile(1.0, 101).unwrap();
        p.du.iter_mut().for_each(|v| *v = 1.0);
        p.d2u.iter_mut().for_each(|v| *v = 0.0);
        let expect = (2.0 * p.beta_star / 2f64.powf(2.5)).abs();
        assert!((residual_el(&p) - expect).abs() < 1e-12);
    }

    #[test]
    fn classify_is_monotone() {
        let hs = grid::linspace(0.01, 1.2, 200);
        let mut seen_unsolvable = false;
        for h in hs {
            let c = classify(&obs(h));
            if seen_unsolvable {
                assert!(!c.solvable);
            }
            seen_unsolvable |= !c.solvable;
        }
    }

    #[test]
    fn uniqueness_probe() {
        let s = Shooting::default();
        // height 0.45 is reached at α ≈ 2
        let h = 0.45;
        let a = s.solve_alpha_in(h, 1e-6, 1e3).unwrap();
        let b = s.solve_alpha_in(h, 1.0, 1e3).unwrap();
        assert!((a - b).abs() < 1e-9);
        assert!(s.solve_alpha_in(h, 1e-6, 1.0).is_err());
    }
}
