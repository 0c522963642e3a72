//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};

use elastica_core::curves::{convergence_gap, graph_distance};
use elastica_core::grid;
use elastica_core::obstacle::{minimize, variational_inequality, ObstacleSC, VI_GRID};
use elastica_core::oracle::{self, Continuation, DescentConfig, IvpConfig};
use elastica_core::shooting::{ShootParams, Shooting};
use elastica_core::specfun::{c0_gamma, c0_quadrature, gauss_2f1, pfaff_b, QuadSpec};
use elastica_core::Error;
use elastica_cli::commands::{self, FlowArgs, SolveArgs};
use elastica_cli::{exit, Context, Format};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Criterion = fn() -> Result<Outcome, Error>;

fn ctx() -> Context {
    Context::new(QuadSpec::default(), None, Format::Csv)
}

fn shooting() -> Shooting {
    Shooting::new(QuadSpec::default())
}

fn constants() -> Result<Outcome, Error> {
    let t = Instant::now();
    let q = QuadSpec::default();
    let (cq, cg) = (c0_quadrature(&q), c0_gamma());
    let secs = t.elapsed().as_secs_f64();
    let worst_c0 = (cq - commands::C0_PRINTED).abs().max((cg - commands::C0_PRINTED).abs());
    let worst_cs = (2.0 / cq - commands::C_STAR_PRINTED).abs().max((2.0 / cg - commands::C_STAR_PRINTED).abs());
    Ok(outcome(
        worst_c0 <= 1e-9 && worst_cs <= 1e-9 && secs < 1.0,
        format!("|c0 - 2.396280469| = {worst_c0:.2e}, |c* - 0.8346262684| = {worst_cs:.2e}, {secs:.3} s"),
    ))
}

fn solve_code(height: f64) -> i32 {
    match commands::solve(&ctx(), &SolveArgs { height, grid: 401, psi0: -0.1 }) {
        Ok(r) if r.all_pass() => exit::SUCCESS,
        Ok(_) => exit::NUMERICAL,
        Err(e) => e.exit_code(),
    }
}

fn threshold_classification() -> Result<Outcome, Error> {
    let c_star = 2.0 / c0_quadrature(&QuadSpec::default());
    let mut wrong = Vec::new();
    for h in [0.1, 0.3, 0.6, 0.83] {
        if solve_code(h) != exit::SUCCESS {
            wrong.push(format!("{h} not solved"));
        }
    }
    for h in [commands::C_STAR_PRINTED, c_star, 0.9, 1.2] {
        let code = solve_code(h);
        if code != exit::NO_SOLUTION {
            wrong.push(format!("{h} gave exit {code} instead of NoSolution"));
        }
    }
    let below = solve_code(c_star * (1.0 - 1e-6));
    if below != exit::SUCCESS {
        wrong.push(format!("c*(1 - 1e-6) gave exit {below}"));
    }
    Ok(outcome(wrong.is_empty(), if wrong.is_empty() { "dichotomy holds".into() } else { wrong.join("; ") }))
}

fn slope_for_height_016() -> Result<Outcome, Error> {
    let t = Instant::now();
    let alpha = shooting().solve_alpha(0.16)?;
    let secs = t.elapsed().as_secs_f64();
    Ok(outcome((0.48..=0.52).contains(&alpha) && secs < 1.0, format!("alpha(0.16) = {alpha:.6}, {secs:.3} s")))
}

fn time_map_consistency() -> Result<Outcome, Error> {
    let t = Instant::now();
    let s = shooting();
    let mut worst: f64 = 0.0;
    for alpha in grid::logspace(1e-2, 1e2, 20) {
        worst = worst.max((s.time_map(alpha, s.beta_star(alpha)?)? - 0.5).abs());
    }
    let secs = t.elapsed().as_secs_f64();
    Ok(outcome(worst <= 1e-8 && secs < 5.0, format!("max |Z - 1/2| = {worst:.2e}, {secs:.3} s")))
}

fn limit_behavior() -> Result<Outcome, Error> {
    let s = shooting();
    let c0 = c0_quadrature(&QuadSpec::default());
    let dh = (s.height(1e4)? - 2.0 / c0).abs();
    let di = (s.integral_i(1e4)? - c0 / 2.0).abs();
    let dj = (s.integral_j(1e4)? - 2.0).abs();
    Ok(outcome(
        dh <= 1e-2 && di <= 1e-2 && dj <= 1e-2,
        format!("height {dh:.2e}, I {di:.2e}, J {dj:.2e} from their limits"),
    ))
}

fn monotonicity() -> Result<Outcome, Error> {
    let s = shooting();
    let alphas = grid::logspace(1e-2, 1e4, 200);
    let hs: Vec<f64> = alphas.iter().map(|&a| s.height(a)).collect::<Result<_, _>>()?;
    let js: Vec<f64> = alphas.iter().map(|&a| s.integral_j(a)).collect::<Result<_, _>>()?;
    let bad = |v: &[f64]| v.windows(2).filter(|w| !(w[1] > w[0])).count();
    let (bh, bj) = (bad(&hs), bad(&js));
    Ok(outcome(bh == 0 && bj == 0, format!("violations: height {bh}, J {bj}")))
}

fn regularity_loss() -> Result<Outcome, Error> {
    let s = shooting();
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.5, 1.0, 5.0] {
        let mut errs = Vec::new();
        let mut limit = 0.0;
        for n in [101, 201, 401, 801] {
            let p = s.reconstruct_profile(alpha, n)?;
            limit = p.d3u_left_half;
            errs.push((p.fd_third_derivative_left() - limit).abs());
        }
        let order = errs.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min);
        pass &= limit < 0.0 && order >= 1.0;
        parts.push(format!("alpha {alpha}: u'''(1/2-) = {limit:.6}, order {order:.2}"));
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn oracle_equivalence() -> Result<Outcome, Error> {
    let t = Instant::now();
    let s = shooting();
    let (mut sup, mut de): (f64, f64) = (0.0, 0.0);
    for h in [0.1, 0.3, 0.6] {
        let obs = ObstacleSC::new(-0.1, h)?;
        let p = minimize(&obs, 401, &s)?;
        let d = oracle::direct_minimize(&obs, &DescentConfig { n: 401, ..DescentConfig::default() })?;
        sup = sup.max(d.u.iter().zip(&p.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        de = de.max((d.energy - p.energy).abs());
    }
    let secs = t.elapsed().as_secs_f64();
    Ok(outcome(
        sup <= 5e-3 && de <= 1e-4 && secs < 60.0,
        format!("sup distance {sup:.2e}, energy gap {de:.2e}, {secs:.2} s"),
    ))
}

fn variational_inequality_check() -> Result<Outcome, Error> {
    let s = shooting();
    let mut low = f64::INFINITY;
    for (k, h) in [0.1, 0.3, 0.6, 0.83].into_iter().enumerate() {
        let obs = ObstacleSC::new(-0.1, h)?;
        let p = minimize(&obs, VI_GRID, &s)?;
        let v = variational_inequality(&p, &obs, 50, 1000 + k as u64)?;
        low = v.into_iter().fold(low, f64::min);
    }
    Ok(outcome(low >= -1e-6, format!("min W'(u)(v - u) = {low:.3e}")))
}

fn hypergeometric() -> Result<Outcome, Error> {
    let mut worst: f64 = 0.0;
    for alpha in [0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
        worst = worst.max(oracle::series_vs_quadrature(alpha)?.discrepancy());
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut pf: f64 = 0.0;
    for _ in 0..20 {
        let (a, b) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
        let c = f64::max(a, b) + rng.gen_range(0.1..3.0);
        let x = rng.gen_range(-30.0..0.5);
        let f = gauss_2f1(a, b, c, x)?;
        pf = pf.max((f - pfaff_b(a, b, c, x)?).abs() / f.abs().max(1.0));
    }
    Ok(outcome(worst <= 1e-8 && pf <= 1e-10, format!("J identity {worst:.2e}, Pfaff {pf:.2e}")))
}

fn gradient_flow() -> Result<Outcome, Error> {
    let t = Instant::now();
    let args = FlowArgs {
        height: 0.3,
        n: 201,
        dt: 1e-4,
        t_end: 0.3,
        seed: 42,
        tol: 1e-2,
        record_every: 10,
        explicit: false,
        psi0: -0.1,
    };
    let r = commands::flow(&ctx(), &args).map_err(|e| Error::NonConvergence(e.to_string()))?;
    let secs = t.elapsed().as_secs_f64();
    let detail = r
        .checks
        .iter()
        .map(|c| format!("{} {:.2e}{}", c.name, c.measured, if c.pass { "" } else { " (failed)" }))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(outcome(r.all_pass() && secs < 300.0, format!("{detail}; {secs:.2} s")))
}

fn curve_convergence() -> Result<Outcome, Error> {
    let gaps: Vec<f64> =
        [1e1, 1e2, 1e3, 1e4].iter().map(|&a| convergence_gap(a, 2001)).collect::<Result<_, _>>()?;
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let last = gaps[3];
    let g = graph_distance(1.0, 2001)?;
    Ok(outcome(
        decreasing && last <= 1e-2 && g <= 1e-4,
        format!("gaps [{}], graph distance at alpha 1 {g:.2e}", gaps.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")),
    ))
}

fn singularity_witness() -> Result<Outcome, Error> {
    let s = shooting();
    let cfg = IvpConfig::default();
    let at_half = oracle::continuation(ShootParams { alpha: 0.5, beta: s.beta_star(0.5)? }, &cfg)?;
    let collapse = matches!(at_half, Continuation::BlowUp { x } if x > 0.5 && x < 1.0);
    let mut prev: Option<f64> = None;
    let mut roots = 0;
    let mut blow_ups = 0;
    for alpha in grid::logspace(1e-2, 1e2, 50) {
        match oracle::continuation(ShootParams { alpha, beta: s.beta_star(alpha)? }, &cfg)? {
            Continuation::BlowUp { .. } => {
                blow_ups += 1;
                prev = None;
            }
            Continuation::Reaches { u1 } => {
                if u1.abs() <= 1e-8 || prev.is_some_and(|p| p * u1 <= 0.0) {
                    roots += 1;
                }
                prev = Some(u1);
            }
        }
    }
    Ok(outcome(
        collapse && roots == 0,
        format!("alpha 0.5: {at_half:?}; sweep: {blow_ups}/50 blow up, {roots} zero crossings of u(1)"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 13] = [
        ("constants", constants),
        ("threshold classification", threshold_classification),
        ("alpha for height 0.16", slope_for_height_016),
        ("shooting self-consistency", time_map_consistency),
        ("limit behavior", limit_behavior),
        ("monotonicity", monotonicity),
        ("regularity loss", regularity_loss),
        ("oracle equivalence", oracle_equivalence),
        ("variational inequality", variational_inequality_check),
        ("hypergeometric identity", hypergeometric),
        ("gradient flow", gradient_flow),
        ("curve convergence", curve_convergence),
        ("singularity witness", singularity_witness),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        failed += usize::from(!o.pass);
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
