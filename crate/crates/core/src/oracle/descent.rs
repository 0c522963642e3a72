//! Direct minimization of a discrete bending energy over symmetric grid
//! functions above the obstacle.
//!
//! The unknowns are the values on the left half grid including ½; the right
//! half is their mirror image. The energy uses five-point fourth-order
//! differences, `W = h Σ (D²u_i)² / (1 + (D¹u_i)²)^(5/2)`, with ghost values
//! from odd reflection so that `u = u″ = 0` at both ends.
//! Each iteration solves the bound-constrained quadratic model with a
//! finite-difference Hessian by a primal–dual active set method and then
//! backtracks along the feasible segment.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::obstacle::{classify, ObstacleSC};

const ROUNDING: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentConfig {
    pub n: usize,
    pub max_iters: usize,
    pub step0: f64,
    pub shrink: f64,
    pub grad_tol: f64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self { n: 401, max_iters: 200, step0: 1.0, shrink: 0.5, grad_tol: 1e-3 }
    }
}

impl DescentConfig {
    fn validate(&self) -> Result<()> {
        if self.n < 7 || self.n % 2 == 0 {
            return Err(Error::InvalidParameter(format!("descent grid must be odd and ≥ 7, got {}", self.n)));
        }
        if self.max_iters == 0 || !(self.step0 > 0.0) || !(self.grad_tol > 0.0) {
            return Err(Error::InvalidParameter("descent parameters must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidParameter(format!("shrink must lie in (0, 1), got {}", self.shrink)));
        }
        Ok(())
    }
}

/// Starting guess for [`direct_minimize_from`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    /// `max(1.1·H·sin(πx), ψ)`.
    Arch,
    /// `max(4.4·H·x(1−x), ψ)`.
    Parabola,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentResult {
    pub xs: Vec<f64>,
    pub u: Vec<f64>,
    pub energy: f64,
    pub energy_history: Vec<f64>,
    /// Sup norm of the projected L² gradient at the returned iterate.
    pub projected_gradient: f64,
    pub iterations: usize,
    pub converged: bool,
}

const W2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const W1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];

/// Node index and sign of position `j` after odd reflection across both ends.
fn fold(j: isize, n: usize) -> (usize, f64) {
    let last = n as isize - 1;
    if j < 0 {
        ((-j) as usize, -1.0)
    } else if j > last {
        ((2 * last - j) as usize, -1.0)
    } else {
        (j as usize, 1.0)
    }
}

fn stencils(u: &[f64], i: usize, h: f64) -> (f64, f64) {
    let n = u.len();
    let (mut d2, mut d1) = (0.0, 0.0);
    for k in 0..5 {
        let (j, sign) = fold(i as isize + k as isize - 2, n);
        d2 += W2[k] * sign * u[j];
        d1 += W1[k] * sign * u[j];
    }
    (d2 / (12.0 * h * h), d1 / (12.0 * h))
}

/// Oracle discrete energy of a full-grid function with zero boundary values:
/// five-point fourth-order differences, odd reflection at both ends.
pub fn oracle_energy(u: &[f64], h: f64) -> f64 {
    let n = u.len();
    let mut acc = 0.0;
    for i in 1..n - 1 {
        let (d2, d1) = stencils(u, i, h);
        acc += d2 * d2 * (1.0 + d1 * d1).powf(-2.5);
    }
    h * acc
}

fn oracle_gradient_full(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    let mut g = vec![0.0; n];
    for i in 1..n - 1 {
        let (d2, d1) = stencils(u, i, h);
        let p = 1.0 + d1 * d1;
        let a = 2.0 * d2 * p.powf(-2.5) / (12.0 * h * h);
        let b = -5.0 * d2 * d2 * d1 * p.powf(-3.5) / (12.0 * h);
        for k in 0..5 {
            let (j, sign) = fold(i as isize + k as isize - 2, n);
            g[j] += h * sign * (a * W2[k] + b * W1[k]);
        }
    }
    g
}

struct HalfGrid {
    n: usize,
    mid: usize,
    h: f64,
}

impl HalfGrid {
    fn expand(&self, v: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.n];
        for k in 1..=self.mid {
            u[k] = v[k - 1];
            u[self.n - 1 - k] = v[k - 1];
        }
        u
    }

    fn energy(&self, v: &[f64]) -> f64 {
        oracle_energy(&self.expand(v), self.h)
    }

    fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let g = oracle_gradient_full(&self.expand(v), self.h);
        (1..=self.mid)
            .map(|k| if k == self.mid { g[k] } else { g[k] + g[self.n - 1 - k] })
            .collect()
    }

    fn hessian(&self, v: &[f64]) -> DMatrix<f64> {
        let m = v.len();
        let mut hs = DMatrix::zeros(m, m);
        let mut w = v.to_vec();
        for j in 0..m {
            let e = 1e-6 * v[j].abs().max(1e-2);
            w[j] = v[j] + e;
            let gp = self.gradient(&w);
            w[j] = v[j] - e;
            let gm = self.gradient(&w);
            w[j] = v[j];
            for i in 0..m {
                hs[(i, j)] = (gp[i] - gm[i]) / (2.0 * e);
            }
        }
        (&hs + hs.transpose()) * 0.5
    }
}

/// Sup norm of the projected gradient, scaled to the L² gradient.
fn projected_norm(g: &[f64], v: &[f64], lower: &[f64], h: f64) -> f64 {
    g.iter()
        .zip(v.iter().zip(lower))
        .map(|(&gi, (&vi, &li))| if vi - li <= 1e-14 && gi > 0.0 { 0.0 } else { gi.abs() })
        .fold(0.0, f64::max)
        / h
}

/// `min gᵀd + ½dᵀMd` subject to `d ≥ l` by primal–dual active sets.
fn bounded_newton_step(m: &DMatrix<f64>, g: &[f64], l: &[f64]) -> Result<Vec<f64>> {
    let k = g.len();
    let scale = (0..k).map(|i| m[(i, i)]).sum::<f64>() / k as f64;
    // start from the bounds that are attained and pushed against
    let mut active: Vec<bool> = (0..k).map(|i| l[i] >= -1e-14 && g[i] > 0.0).collect();
    let mut d = vec![0.0; k];
    for it in 0..60 {
        let free: Vec<usize> = (0..k).filter(|&i| !active[i]).collect();
        for i in 0..k {
            d[i] = if active[i] { l[i] } else { 0.0 };
        }
        if !free.is_empty() {
            let mut sub = DMatrix::zeros(free.len(), free.len());
            let mut rhs = DVector::zeros(free.len());
            for (a, &i) in free.iter().enumerate() {
                let mut r = -g[i];
                for j in 0..k {
                    if active[j] {
                        r -= m[(i, j)] * l[j];
                    }
                }
                rhs[a] = r;
                for (b, &j) in free.iter().enumerate() {
                    sub[(a, b)] = m[(i, j)];
                }
            }
            let chol = sub
                .cholesky()
                .ok_or_else(|| Error::NonConvergence("model Hessian lost definiteness".into()))?;
            let sol = chol.solve(&rhs);
            for (a, &i) in free.iter().enumerate() {
                d[i] = sol[a];
            }
        }
        let md = m * DVector::from_column_slice(&d);
        let mut changed = false;
        for i in 0..k {
            let lambda = if active[i] { md[i] + g[i] } else { 0.0 };
            let now = lambda + scale * (l[i] - d[i]) > 0.0;
            changed |= now != active[i];
            active[i] = now;
        }
        if !changed && it > 0 {
            return Ok(d);
        }
    }
    Err(Error::NonConvergence("active set did not settle".into()))
}

/// Minimizes the oracle energy from the arch start.
pub fn direct_minimize(obs: &ObstacleSC, cfg: &DescentConfig) -> Result<DescentResult> {
    direct_minimize_from(obs, cfg, Start::Arch)
}

pub fn direct_minimize_from(obs: &ObstacleSC, cfg: &DescentConfig, start: Start) -> Result<DescentResult> {
    cfg.validate()?;
    let class = classify(obs);
    if !class.solvable {
        return Err(Error::NoSolution { height: obs.psi_half, threshold: class.threshold });
    }
    let n = cfg.n;
    let h = 1.0 / (n - 1) as f64;
    let grid = HalfGrid { n, mid: (n - 1) / 2, h };
    let xs: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let lower: Vec<f64> = (1..=grid.mid).map(|k| obs.psi(xs[k])).collect();
    let big = obs.psi_half;
    let mut v: Vec<f64> = (1..=grid.mid)
        .map(|k| {
            let x = xs[k];
            let s = match start {
                Start::Arch => 1.1 * big * (std::f64::consts::PI * x).sin(),
                Start::Parabola => 4.4 * big * x * (1.0 - x),
            };
            s.max(lower[k - 1])
        })
        .collect();
    let mut energy = grid.energy(&v);
    let mut history = vec![energy];
    let mut g = grid.gradient(&v);
    let mut pg = projected_norm(&g, &v, &lower, h);
    let mut iterations = 0;
    while pg > cfg.grad_tol && iterations < cfg.max_iters {
        iterations += 1;
        let mut hs = grid.hessian(&v);
        let diag_max = (0..hs.nrows()).map(|i| hs[(i, i)].abs()).fold(0.0, f64::max);
        let mut shift = 0.0;
        let d = loop {
            if shift > 0.0 {
                for i in 0..hs.nrows() {
                    hs[(i, i)] += shift;
                }
            }
            let l: Vec<f64> = lower.iter().zip(&v).map(|(a, b)| a - b).collect();
            match bounded_newton_step(&hs, &g, &l) {
                Ok(d) => break d,
                Err(_) if shift < diag_max => {
                    // undo and retry with a larger Levenberg shift
                    for i in 0..hs.nrows() {
                        hs[(i, i)] -= shift;
                    }
                    shift = if shift == 0.0 { 1e-8 * diag_max } else { 10.0 * shift };
                }
                Err(e) => return Err(e),
            }
        };
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        let mut t = cfg.step0.min(1.0);
        let mut accepted = None;
        for _ in 0..80 {
            let trial: Vec<f64> = v.iter().zip(&d).zip(&lower).map(|((a, b), l)| (a + t * b).max(*l)).collect();
            let e = grid.energy(&trial);
            // slack for rounding once the decrease drops below machine precision
            if e <= energy + 1e-4 * t * slope + ROUNDING * energy {
                accepted = Some((trial, e));
                break;
            }
            t *= cfg.shrink;
        }
        let Some((trial, e)) = accepted else { break };
        v = trial;
        energy = e;
        history.push(energy);
        g = grid.gradient(&v);
        pg = projected_norm(&g, &v, &lower, h);
    }
    Ok(DescentResult {
        u: grid.expand(&v),
        xs,
        energy,
        energy_history: history,
        projected_gradient: pg,
        iterations,
        converged: pg <= cfg.grad_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shooting::Shooting;

    #[test]
    fn gradient_matches_energy_differences() {
        let n = 21;
        let h = 1.0 / 20.0;
        let grid = HalfGrid { n, mid: 10, h };
        let v: Vec<f64> = (1..=10).map(|k| 0.4 * (std::f64::consts::PI * k as f64 * h).sin() + 0.01 * k as f64 * h).collect();
        let g = grid.gradient(&v);
        for j in 0..10 {
            let e = 1e-6;
            let mut p = v.clone();
            p[j] += e;
            let mut m = v.clone();
            m[j] -= e;
            let fd = (grid.energy(&p) - grid.energy(&m)) / (2.0 * e);
            assert!((fd - g[j]).abs() < 1e-6 * g[j].abs().max(1.0), "{j}: {fd} {}", g[j]);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let obs = ObstacleSC::new(-0.1, 0.3).unwrap();
        let cfg = DescentConfig { n: 400, ..DescentConfig::default() };
        assert!(direct_minimize(&obs, &cfg).is_err());
        let cfg = DescentConfig { shrink: 1.0, ..DescentConfig::default() };
        assert!(direct_minimize(&obs, &cfg).is_err());
        let tall = ObstacleSC::new(-0.1, 0.9).unwrap();
        assert!(matches!(direct_minimize(&tall, &DescentConfig::default()), Err(Error::NoSolution { .. })));
    }

    #[test]
    fn agrees_with_shooting_and_is_unique() {
        let s = Shooting::default();
        let obs = ObstacleSC::new(-0.1, 0.3).unwrap();
        let cfg = DescentConfig { n: 201, ..DescentConfig::default() };
        let a = direct_minimize_from(&obs, &cfg, Start::Arch).unwrap();
        let b = direct_minimize_from(&obs, &cfg, Start::Parabola).unwrap();
        assert!(a.converged && b.converged);
        assert!(a.energy_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + ROUNDING)));
        let p = s.reconstruct_profile(s.solve_alpha(0.3).unwrap(), 201).unwrap();
        let sup = a.u.iter().zip(&p.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(sup < 5e-3, "{sup}");
        assert!(a.energy >= p.energy - 1e-4);
        assert!((a.energy - p.energy).abs() <= 1e-4);
        let diff = a.u.iter().zip(&b.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff <= 2.0 * cfg.grad_tol, "{diff}");
    }
}
