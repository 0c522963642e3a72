use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use elastica_cli::commands::{self, CurvesArgs, FlowArgs, SolveArgs, SweepArgs, VerifyArgs};
use elastica_cli::{exit, report_exit_code, Context, Failure, Format, RunReport};
use elastica_core::specfun::QuadSpec;

#[derive(Parser, Debug)]
#[command(name = "elastica", version, about = "Elastic graphs above a symmetric cone obstacle")]
struct Cli {
    /// Directory for report.json and data files; nothing is written without it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Format of the data files written to --out.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print c0, c*, K(1/sqrt 2) and the limit length, each computed two ways.
    Constants,
    /// Symmetric minimizer for one obstacle height.
    Solve {
        #[arg(long)]
        height: f64,
        /// Number of grid points on [0, 1] (odd).
        #[arg(long, default_value_t = 401)]
        grid: usize,
        #[arg(long, default_value_t = -0.1, allow_negative_numbers = true)]
        psi0: f64,
    },
    /// Tabulate height, beta*, half length and the third derivative jump over alpha.
    Sweep {
        #[arg(long, default_value_t = 1e-2)]
        alpha_min: f64,
        #[arg(long, default_value_t = 1e3)]
        alpha_max: f64,
        #[arg(long, default_value_t = 64)]
        count: usize,
    },
    /// Run the discrete gradient flow from a perturbed admissible datum.
    Flow {
        #[arg(long)]
        height: f64,
        #[arg(long, default_value_t = 201)]
        n: usize,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        #[arg(long, default_value_t = 0.3)]
        t_end: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Required H2 distance to the minimizer at t_end.
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        #[arg(long, default_value_t = 10)]
        record_every: usize,
        /// Use explicit Euler under the stability restriction instead of the semi-implicit scheme.
        #[arg(long)]
        explicit: bool,
        #[arg(long, default_value_t = -0.1, allow_negative_numbers = true)]
        psi0: f64,
    },
    /// Arclength parametrized curve for alpha next to the limit curve.
    Curves {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
    },
    /// Cross-check the main computations against independent routes.
    Verify {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 0.0, hide = true, allow_negative_numbers = true)]
        perturb_c0: f64,
    },
}

fn run(cli: Cli) -> Result<RunReport, Failure> {
    let quad = QuadSpec::from_env()?;
    let ctx = Context::new(quad, cli.out, cli.format);
    match cli.command {
        Command::Constants => commands::constants(&ctx),
        Command::Solve { height, grid, psi0 } => commands::solve(&ctx, &SolveArgs { height, grid, psi0 }),
        Command::Sweep { alpha_min, alpha_max, count } => {
            commands::sweep(&ctx, &SweepArgs { alpha_min, alpha_max, count })
        }
        Command::Flow { height, n, dt, t_end, seed, tol, record_every, explicit, psi0 } => commands::flow(
            &ctx,
            &FlowArgs { height, n, dt, t_end, seed, tol, record_every, explicit, psi0 },
        ),
        Command::Curves { alpha, samples } => commands::curves(&ctx, &CurvesArgs { alpha, samples }),
        Command::Verify { seed, perturb_c0 } => commands::verify(&ctx, &VerifyArgs { seed, perturb_c0 }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { exit::INVALID } else { exit::SUCCESS };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(r) => {
            print!("{}", r.to_json());
            for c in r.checks.iter().filter(|c| !c.pass) {
                eprintln!("check failed: {} (measured {:e}, tolerance {:e})", c.name, c.measured, c.tolerance);
            }
            ExitCode::from(report_exit_code(&r) as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
