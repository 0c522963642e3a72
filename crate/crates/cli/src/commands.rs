use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use elastica_core::curves::{
    convergence_gap, graph_distance, kappa_u, limit_length, limit_length_quadrature, reconstruct_gamma_alpha_with,
    singular_curve, CurvatureLaw, PlanarCurve,
};
use elastica_core::flow::{h2_distance, initial_datum, run_flow, FlowConfig};
use elastica_core::grid;
use elastica_core::obstacle::{classify, contact_report, minimize, variational_inequality, ObstacleSC, VI_GRID};
use elastica_core::oracle::{self, DescentConfig, IvpConfig};
use elastica_core::shooting::{ShootParams, Shooting};
use elastica_core::specfun::{
    c0_gamma, c0_quadrature, elliptic_k_half, gauss_2f1, jacobi_cn_sn_dn, pfaff_b, GaussLegendre, QuadSpec,
};
use elastica_core::Error;

use crate::output::{self, Series, Table};
use crate::report::{Check, RunReport};
use crate::Failure;

/// Values printed in the literature for the two constants.
pub const C0_PRINTED: f64 = 2.396280469;
pub const C_STAR_PRINTED: f64 = 0.8346262684;

/// Artifact format selected with `--format`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Svg,
}

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct Context {
    pub quad: QuadSpec,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Context {
    pub fn new(quad: QuadSpec, out: Option<PathBuf>, format: Format) -> Self {
        Self { quad, out, format }
    }

    pub fn shooting(&self) -> Shooting {
        Shooting::new(self.quad)
    }

    fn emit_table(&self, stem: &str, t: &Table) -> Result<(), Failure> {
        let Some(dir) = &self.out else { return Ok(()) };
        match self.format {
            Format::Json => output::write(dir, &format!("{stem}.json"), &t.to_json())?,
            Format::Csv | Format::Svg => output::write(dir, &format!("{stem}.csv"), &t.to_csv())?,
        }
        Ok(())
    }

    fn emit_svg(&self, name: &str, title: &str, series: &[Series<'_>]) -> Result<(), Failure> {
        if let (Some(dir), Format::Svg) = (&self.out, self.format) {
            output::write(dir, name, &output::svg(title, series))?;
        }
        Ok(())
    }

    pub fn emit_report(&self, r: &RunReport) -> Result<(), Failure> {
        if let Some(dir) = &self.out {
            output::write(dir, "report.json", &r.to_json())?;
        }
        Ok(())
    }
}

fn k_by_quadrature() -> f64 {
    GaussLegendre::cached(64).integrate(0.0, std::f64::consts::FRAC_PI_2, |t| {
        1.0 / (1.0 - 0.5 * t.sin().powi(2)).sqrt()
    })
}

pub fn constants(ctx: &Context) -> Result<RunReport, Failure> {
    let q = ctx.quad;
    let doubled = QuadSpec::new((2 * q.nodes).min(elastica_core::specfun::quad::MAX_NODES), q.tol)?;
    let c0 = c0_quadrature(&q);
    let c0_doubled = c0_quadrature(&doubled);
    let c0_g = c0_gamma();
    let c_star = 2.0 / c0;
    let k = elliptic_k_half();
    let k_quad = k_by_quadrature();
    let l_u = limit_length();
    let l_u_quad = limit_length_quadrature(q.nodes);
    let l_u_doubled = limit_length_quadrature(doubled.nodes);
    let mut r = RunReport::new("constants");
    r.input("quad_nodes", q.nodes)
        .output("c0", c0)
        .output("c0_gamma", c0_g)
        .output("c_star", c_star)
        .output("c_star_gamma", 2.0 / c0_g)
        .output("K", k)
        .output("K_quadrature", k_quad)
        .output("L_U", l_u)
        .output("L_U_quadrature", l_u_quad);
    r.check(Check::at_most("c0_printed", (c0 - C0_PRINTED).abs(), 1e-9))
        .check(Check::at_most("c_star_printed", (c_star - C_STAR_PRINTED).abs(), 1e-9))
        .check(Check::at_most("c0_quadrature_vs_gamma", (c0 - c0_g).abs(), 1e-12))
        .check(Check::at_most("c0_node_doubling", (c0 - c0_doubled).abs(), 1e-12))
        .check(Check::at_most("c_star_quadrature_vs_gamma", (c_star - 2.0 / c0_g).abs(), 1e-12))
        .check(Check::at_most("K_agm_vs_quadrature", (k - k_quad).abs(), 1e-12))
        .check(Check::at_most("L_U_node_doubling", (l_u_quad - l_u_doubled).abs(), 1e-9))
        .check(Check::at_most("L_U_elliptic_vs_quadrature", (l_u - l_u_quad).abs(), 1e-9));
    ctx.emit_report(&r)?;
    Ok(r)
}

pub struct SolveArgs {
    pub height: f64,
    pub grid: usize,
    pub psi0: f64,
}

pub fn solve(ctx: &Context, a: &SolveArgs) -> Result<RunReport, Failure> {
    if a.grid < 5 || a.grid % 2 == 0 {
        return Err(Failure::Invalid(format!("--grid must be odd and at least 5, got {}", a.grid)));
    }
    let s = ctx.shooting();
    let obs = ObstacleSC::new(a.psi0, a.height)?;
    let p = minimize(&obs, a.grid, &s)?;
    let contact = contact_report(&p, &obs);
    let z = s.time_map(p.alpha, p.beta_star)?;
    let mut r = RunReport::new("solve");
    r.input("height", a.height).input("grid", a.grid).input("psi0", a.psi0);
    r.output("alpha", p.alpha)
        .output("beta_star", p.beta_star)
        .output("energy", p.energy)
        .output("grid_energy", p.grid_energy())
        .output("d3u_left_limit", p.d3u_left_half)
        .output("d3u_alt_form", s.third_derivative_alt_form(p.alpha)?)
        .output("arclength_half", p.arclength_half)
        .output("threshold", classify(&obs).threshold)
        .output("min_gap_off_contact", contact.min_gap_off_contact);
    r.check(Check::at_most("time_map_residual", (z - 0.5).abs(), 1e-8))
        .check(Check::at_most("height_residual", (p.height - a.height).abs(), 1e-9))
        .check(Check::at_most("contact_at_half", contact.gap_at_half.abs(), 1e-9))
        .check(Check::holds("no_contact_elsewhere", contact.min_gap_off_contact > 0.0))
        .check(Check::holds("d3u_left_limit_negative", p.d3u_left_half < 0.0));
    let psi = obs.sample(&p.xs);
    let mut t = Table::new(&["x", "u", "du", "d2u", "d3u", "psi"]);
    for k in 0..p.xs.len() {
        t.push(vec![p.xs[k], p.u[k], p.du[k], p.d2u[k], p.d3u[k], psi[k]]);
    }
    ctx.emit_table("profile", &t)?;
    let up: Vec<[f64; 2]> = p.xs.iter().zip(&p.u).map(|(&x, &u)| [x, u]).collect();
    let pp: Vec<[f64; 2]> = p.xs.iter().zip(&psi).map(|(&x, &v)| [x, v]).collect();
    ctx.emit_svg(
        "profile.svg",
        &format!("minimizer for obstacle height {}", a.height),
        &[Series { label: "u", color: "black", pts: &up }, Series { label: "psi", color: "gray", pts: &pp }],
    )?;
    ctx.emit_report(&r)?;
    Ok(r)
}

pub struct SweepArgs {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub count: usize,
}

pub fn sweep_table(s: &Shooting, a: &SweepArgs) -> Result<Table, Failure> {
    if !(a.alpha_min > 0.0 && a.alpha_max > a.alpha_min && a.alpha_max.is_finite()) {
        return Err(Failure::Invalid(format!(
            "need 0 < alpha-min < alpha-max, got {} and {}",
            a.alpha_min, a.alpha_max
        )));
    }
    if a.count < 2 {
        return Err(Failure::Invalid(format!("--count must be at least 2, got {}", a.count)));
    }
    let alphas = grid::logspace(a.alpha_min, a.alpha_max, a.count);
    let rows = alphas
        .par_iter()
        .map(|&alpha| -> Result<Vec<f64>, Error> {
            Ok(vec![
                alpha,
                s.height(alpha)?,
                s.beta_star(alpha)?,
                s.arclength_half(alpha)?,
                s.third_derivative_jump(alpha)?,
            ])
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut t = Table::new(&["alpha", "height", "beta_star", "L_alpha", "d3u_limit"]);
    for row in rows {
        t.push(row);
    }
    Ok(t)
}

pub fn sweep(ctx: &Context, a: &SweepArgs) -> Result<RunReport, Failure> {
    let s = ctx.shooting();
    let t = sweep_table(&s, a)?;
    let heights = t.column("height").expect("column exists");
    let betas = t.column("beta_star").expect("column exists");
    let violations = heights.windows(2).filter(|w| !(w[1] > w[0])).count();
    let last = *heights.last().expect("count ≥ 2");
    let mut r = RunReport::new("sweep");
    r.input("alpha_min", a.alpha_min).input("alpha_max", a.alpha_max).input("count", a.count);
    r.output("last_height", last)
        .output("c_star_minus_last_height", 2.0 / c0_quadrature(&ctx.quad) - last)
        .output("monotonicity_violations", violations);
    r.check(Check::at_most("height_monotonicity_violations", violations as f64, 0.0))
        .check(Check::holds("beta_star_negative", betas.iter().all(|b| *b < 0.0)));
    ctx.emit_table("sweep", &t)?;
    let curve: Vec<[f64; 2]> = t.rows.iter().map(|row| [row[0].log10(), row[1]]).collect();
    ctx.emit_svg("sweep.svg", "height against log10 alpha", &[Series { label: "height", color: "black", pts: &curve }])?;
    ctx.emit_report(&r)?;
    Ok(r)
}

pub struct FlowArgs {
    pub height: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub tol: f64,
    pub record_every: usize,
    pub explicit: bool,
    pub psi0: f64,
}

pub fn flow(ctx: &Context, a: &FlowArgs) -> Result<RunReport, Failure> {
    if a.n % 2 == 0 {
        return Err(Failure::Invalid(format!("--n must be odd, got {}", a.n)));
    }
    let s = ctx.shooting();
    let obs = ObstacleSC::new(a.psi0, a.height)?;
    let target = minimize(&obs, a.n, &s)?;
    let xs = &target.xs;
    let u0 = initial_datum(xs, &obs, a.seed)?;
    let mut cfg = if a.explicit {
        FlowConfig::explicit(a.n, a.dt, a.t_end)
    } else {
        FlowConfig::semi_implicit(a.n, a.dt, a.t_end)
    };
    cfg.record_every = a.record_every;
    let run = run_flow(&u0, &cfg, &obs)?;
    let mut t = Table::new(&["t", "energy", "slope_max", "h2_dist_to_minimizer", "contact_count"]);
    for st in &run.states {
        t.push(vec![st.t, st.energy, st.slope_max, h2_distance(&st.u, &target.u, xs)?, st.contact_count() as f64]);
    }
    let d0 = t.rows[0][3];
    let last = run.last();
    let d_end = h2_distance(&last.u, &target.u, xs)?;
    let mut r = RunReport::new("flow");
    r.input("height", a.height)
        .input("n", a.n)
        .input("dt", a.dt)
        .input("t_end", a.t_end)
        .input("seed", a.seed)
        .input("tol", a.tol)
        .input("scheme", if a.explicit { "explicit" } else { "semi-implicit" });
    r.output("initial_energy", run.states[0].energy)
        .output("final_energy", last.energy)
        .output("minimizer_energy", target.energy)
        .output("m_star", run.m_star)
        .output("max_slope", run.max_slope)
        .output("steps", run.steps)
        .output("rejected_steps", run.rejected_steps)
        .output("initial_h2_distance", d0)
        .output("final_h2_distance", d_end);
    r.check(Check::at_most("energy_increase_per_step", run.max_energy_increase.max(0.0), 1e-8))
        .check(Check::at_most("constraint_violation", (-run.min_gap).max(0.0), cfg.proj_tol))
        .check(Check::at_most("symmetry_drift", run.max_symmetry_defect, 1e-9))
        .check(Check::at_most("slope_bound", run.max_slope, run.m_star * 1.01))
        .check(Check::holds("h2_distance_decreased", d_end < d0))
        .check(Check::at_most("final_h2_distance", d_end, a.tol));
    ctx.emit_table("trajectory", &t)?;
    let psi = obs.sample(xs);
    let mut fin = Table::new(&["x", "u0", "u", "minimizer", "psi"]);
    for k in 0..xs.len() {
        fin.push(vec![xs[k], u0[k], last.u[k], target.u[k], psi[k]]);
    }
    ctx.emit_table("final", &fin)?;
    let pts = |v: &[f64]| -> Vec<[f64; 2]> { xs.iter().zip(v).map(|(&x, &u)| [x, u]).collect() };
    let (p0, p1, pm) = (pts(&u0), pts(&last.u), pts(&target.u));
    ctx.emit_svg(
        "flow.svg",
        "gradient flow: initial, final and minimizer",
        &[
            Series { label: "u0", color: "gray", pts: &p0 },
            Series { label: "u(t_end)", color: "black", pts: &p1 },
            Series { label: "minimizer", color: "red", pts: &pm },
        ],
    )?;
    ctx.emit_report(&r)?;
    Ok(r)
}

pub struct CurvesArgs {
    pub alpha: f64,
    pub samples: usize,
}

fn curve_table(c: &PlanarCurve) -> Table {
    let mut t = Table::new(&["s", "x", "y", "theta", "kappa"]);
    for k in 0..c.ss.len() {
        t.push(vec![c.ss[k], c.pts[k][0], c.pts[k][1], c.theta[k], c.kappa[k]]);
    }
    t
}

pub fn curves(ctx: &Context, a: &CurvesArgs) -> Result<RunReport, Failure> {
    if a.samples < 3 {
        return Err(Failure::Invalid(format!("--samples must be at least 3, got {}", a.samples)));
    }
    let s = ctx.shooting();
    let gamma = reconstruct_gamma_alpha_with(a.alpha, a.samples, &s)?;
    let limit = singular_curve(a.samples)?;
    let gap = convergence_gap(a.alpha, a.samples)?;
    let height = s.height(a.alpha)?;
    let end = gamma.end();
    let mut r = RunReport::new("curves");
    r.input("alpha", a.alpha).input("samples", a.samples);
    r.output("convergence_gap", gap)
        .output("L_alpha", gamma.length)
        .output("L_U", limit.length)
        .output("height", height)
        .output("end_x", end[0])
        .output("end_y", end[1]);
    r.check(Check::at_most("endpoint_x", (end[0] - 0.5).abs(), 1e-6))
        .check(Check::at_most("endpoint_y", (end[1] - height).abs(), 1e-6))
        .check(Check::at_most("unit_speed", gamma.speed_defect(), 1e-6));
    ctx.emit_table("gamma_alpha", &curve_table(&gamma))?;
    ctx.emit_table("gamma_u", &curve_table(&limit))?;
    let title = format!("curve for alpha = {} and limit curve", a.alpha);
    let series = [
        Series { label: "gamma_alpha", color: "black", pts: &gamma.pts },
        Series { label: "gamma_U", color: "red", pts: &limit.pts },
    ];
    if let Some(dir) = &ctx.out {
        // the overlay is the main artifact of this command, so it is always written
        output::write(dir, "curves.svg", &output::svg(&title, &series))?;
    }
    ctx.emit_report(&r)?;
    Ok(r)
}

pub struct VerifyArgs {
    pub seed: u64,
    /// Added to c₀ before it is compared with independent evaluations.
    pub perturb_c0: f64,
}

pub fn verify(ctx: &Context, a: &VerifyArgs) -> Result<RunReport, Failure> {
    let s = ctx.shooting();
    let mut r = RunReport::new("verify");
    r.input("seed", a.seed).input("perturb_c0", a.perturb_c0);

    // constants: the value under test against independent evaluations
    let c0 = c0_quadrature(&ctx.quad) + a.perturb_c0;
    r.check(Check::at_most("c0_quadrature_vs_gamma", (c0 - c0_gamma()).abs(), 1e-12));
    let l_u = std::f64::consts::SQRT_2 * elliptic_k_half() / c0;
    r.check(Check::at_most(
        "L_U_elliptic_vs_quadrature",
        (l_u - limit_length_quadrature(ctx.quad.nodes)).abs(),
        1e-9,
    ));
    r.check(Check::at_most("kappa_U_end_equals_minus_c0", (kappa_u(limit_length())? + c0).abs(), 1e-10));

    // time map against re-integration of the initial value problem
    let ivp = IvpConfig::default();
    let mut worst: f64 = 0.0;
    let mut drift: f64 = 0.0;
    for alpha in [0.2, 1.0, 5.0] {
        let params = ShootParams { alpha, beta: s.beta_star(alpha)? };
        worst = worst.max((oracle::turning_point(params, 2.0, &ivp)? - 0.5).abs());
        let traj = oracle::ivp_integrate(params, 0.5, &ivp)?;
        let c = params.beta / (1.0 + alpha * alpha).powf(2.5);
        for y in &traj.states {
            drift = drift.max((oracle::ivp::conserved(y) - c).abs() / c.abs().max(1.0));
        }
    }
    r.check(Check::at_most("time_map_vs_ivp", worst, 1e-6));
    r.check(Check::at_most("ivp_first_integral", drift, 1e-9));

    // shooting against direct minimization
    for h in [0.1, 0.3, 0.6] {
        let obs = ObstacleSC::new(-0.1, h)?;
        let p = minimize(&obs, 401, &s)?;
        let d = oracle::direct_minimize(&obs, &DescentConfig { n: 401, ..DescentConfig::default() })?;
        let sup = d.u.iter().zip(&p.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        r.check(Check::at_most(&format!("direct_sup_distance_H{h}"), sup, 5e-3));
        r.check(Check::at_most(&format!("direct_energy_gap_H{h}"), (d.energy - p.energy).abs(), 1e-4));
        let fine = minimize(&obs, VI_GRID, &s)?;
        let vi = variational_inequality(&fine, &obs, 50, a.seed)?;
        let low = vi.iter().cloned().fold(f64::INFINITY, f64::min);
        r.check(Check::at_most(&format!("variational_inequality_H{h}"), (-low).max(0.0), 1e-6));
    }

    // the integral J against its hypergeometric closed form
    let mut worst: f64 = 0.0;
    for alpha in [0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
        worst = worst.max(oracle::series_vs_quadrature(alpha)?.discrepancy());
    }
    r.check(Check::at_most("hypergeometric_identity", worst, 1e-8));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (pa, pb) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
        let pc = f64::max(pa, pb) + rng.gen_range(0.1..3.0);
        let x = rng.gen_range(-30.0..0.5);
        let direct = gauss_2f1(pa, pb, pc, x)?;
        worst = worst.max((direct - pfaff_b(pa, pb, pc, x)?).abs() / direct.abs().max(1.0));
    }
    r.check(Check::at_most("pfaff_self_consistency", worst, 1e-10));

    // elliptic identities
    r.check(Check::at_most("K_agm_vs_quadrature", (elliptic_k_half() - k_by_quadrature()).abs(), 1e-12));
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let e = jacobi_cn_sn_dn(0.37 * k as f64 - 3.0);
        worst = worst
            .max((e.cn * e.cn + e.sn * e.sn - 1.0).abs())
            .max((e.dn * e.dn + 0.5 * e.sn * e.sn - 1.0).abs());
    }
    r.check(Check::at_most("jacobi_pythagorean", worst, 1e-14));
    let law = CurvatureLaw::new(1e3, &s)?;
    let lu = limit_length();
    let mut sup: f64 = 0.0;
    for x in grid::linspace(0.0, lu.min(law.length), 200) {
        sup = sup.max((law.eval(x)? - kappa_u(x)?).abs());
    }
    r.check(Check::at_most("k_alpha_to_kappa_U_alpha_1e3", sup, 1e-2));
    r.check(Check::at_most("graph_vs_curve_alpha_1", graph_distance(1.0, 2001)?, 1e-4));
    ctx.emit_report(&r)?;
    Ok(r)
}
