//! Gauss–Legendre rules and the square-root endpoint integrator.
//!
//! All integrals of the form `∫₀^α f(t) / √(α − t) dt` in this crate go
//! through [`sqrt_singular_integral`]. The endpoint singularity is removed
//! exactly by the substitution `t = α − (α − a)σ²` on the last panel, and the
//! remaining smooth panels are integrated with fixed-order Gauss–Legendre. The
//! order is doubled until two successive evaluations agree.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest rule order the node-doubling loop may reach.
pub const MAX_NODES: usize = 4096;

/// Default Gauss–Legendre order per panel.
pub const DEFAULT_NODES: usize = 128;

/// Environment variable that overrides [`DEFAULT_NODES`] in [`QuadSpec::from_env`].
pub const NODES_ENV: &str = "ELASTICA_QUAD_NODES";

/// Quadrature configuration: starting order and relative tolerance of the
/// node-doubling loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub nodes: usize,
    pub tol: f64,
}

impl QuadSpec {
    pub fn new(nodes: usize, tol: f64) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs at least 2 nodes, got {nodes}"
            )));
        }
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerance must be positive, got {tol}"
            )));
        }
        Ok(Self { nodes, tol })
    }

    /// Default configuration with the node count taken from `ELASTICA_QUAD_NODES` when set.
    pub fn from_env() -> Result<Self> {
        let nodes = match std::env::var(NODES_ENV) {
            Ok(raw) => raw.trim().parse::<usize>().map_err(|_| {
                Error::InvalidParameter(format!("{NODES_ENV}={raw:?} is not a positive integer"))
            })?,
            Err(_) => DEFAULT_NODES,
        };
        Self::new(nodes, Self::default().tol)
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            nodes: DEFAULT_NODES,
            tol: 1e-13,
        }
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the rule by Newton iteration on the Legendre polynomial.
    pub fn compute(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared, lazily computed rule of order `n`.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&n) {
            return Arc::clone(rule);
        }
        let rule = Arc::new(GaussLegendre::compute(n));
        cache
            .lock()
            .expect("rule cache poisoned")
            .entry(n)
            .or_insert(rule)
            .clone()
    }

    /// ∫_a^b f(x) dx with this rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre over consecutive panels `[breaks[i], breaks[i+1]]`.
pub fn integrate_panels<F: Fn(f64) -> f64>(breaks: &[f64], nodes: usize, f: &F) -> f64 {
    let rule = GaussLegendre::cached(nodes);
    breaks
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], f))
        .sum()
}

/// Runs `eval(n)` with n, 2n, 4n, ... nodes until two successive values
/// agree to the relative tolerance of `q`.
pub fn doubling<E: Fn(usize) -> f64>(q: &QuadSpec, eval: E) -> Result<f64> {
    let mut n = q.nodes;
    let mut prev = eval(n);
    while n < MAX_NODES {
        n *= 2;
        let next = eval(n);
        if !next.is_finite() {
            return Err(Error::NonConvergence(format!(
                "quadrature produced a non-finite value with {n} nodes"
            )));
        }
        if (next - prev).abs() <= q.tol * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence(format!(
        "quadrature did not reach relative tolerance {} with {MAX_NODES} nodes",
        q.tol
    )))
}

/// Smooth panel breaks on `[0, alpha/2]` graded geometrically away from 0,
/// so that integrands with an O(1) feature near t = 0 are resolved for any α.
/// Returns `(breaks, a)` where `[a, alpha]` is left for the singular panel.
pub(crate) fn singular_panels(alpha: f64) -> (Vec<f64>, f64) {
    if alpha <= 2.0 {
        return (vec![0.0], 0.0);
    }
    let a = 0.5 * alpha;
    let mut breaks = vec![0.0];
    let mut b = 1.0;
    while b < a {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(a);
    (breaks, a)
}

fn sqrt_singular_fixed<F: Fn(f64) -> f64>(f: &F, alpha: f64, n: usize) -> f64 {
    let (breaks, a) = singular_panels(alpha);
    let regular = integrate_panels(&breaks, n, &|t| f(t) / (alpha - t).sqrt());
    // t = alpha - (alpha - a) s^2 on [a, alpha]; with a = 0 this is t = alpha (1 - s^2).
    let width = alpha - a;
    let rule = GaussLegendre::cached(n);
    let singular = 2.0 * width.sqrt() * rule.integrate(0.0, 1.0, |s| f(alpha - width * s * s));
    regular + singular
}

/// ∫₀^α f(t) / √(α − t) dt for f continuous on [0, α].
///
/// With α ≤ 2 this is exactly `2√α ∫₀¹ f(α(1 − s²)) ds`; for larger α the
/// interval `[0, α/2]` is split into geometrically growing smooth panels first.
pub fn sqrt_singular_integral<F: Fn(f64) -> f64>(f: F, alpha: f64, q: &QuadSpec) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "singular integral needs a finite alpha > 0, got {alpha}"
        )));
    }
    doubling(q, |n| sqrt_singular_fixed(&f, alpha, n))
}
