use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use psifrac_cli::commands::{self, SolveFlags, Thresholds};
use psifrac_cli::CliError;

#[derive(Parser)]
#[command(
    name = "psifrac",
    version,
    about = "Impulsive Ψ-Hilfer fractional differential equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file; writes solution.csv and report.json
    Solve {
        problem: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Disable data-parallel loops
        #[arg(long)]
        sequential: bool,
    },
    /// Print the existence/uniqueness conditions as JSON
    Check {
        problem: PathBuf,
        /// Lipschitz constant to test instead of the declared one
        #[arg(long = "L")]
        l: Option<f64>,
    },
    /// Residual diagnostics of a solution written by `solve`
    Residual {
        problem: PathBuf,
        solution: PathBuf,
        /// integral,differential,jump
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
    },
    /// Grid-refinement study
    Convergence {
        problem: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Nodes per segment on the coarsest level
        #[arg(long)]
        nodes: Option<usize>,
        /// Check the integral semigroup law instead of solving
        #[arg(long)]
        semigroup: bool,
    },
    /// Evaluate I^{μ;Ψ}h for tabulated h (CSV with columns t,h)
    Operators {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        mu: f64,
        /// identity | power:<rho> | log | expr:<formula in t>
        #[arg(long, default_value = "identity")]
        psi: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t: Vec<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout();
    let result = match cli.command {
        Command::Solve {
            problem,
            out,
            nodes,
            tol,
            max_iter,
            sequential,
        } => {
            let flags = SolveFlags {
                nodes,
                tol,
                max_iter,
                sequential,
            };
            commands::cmd_solve(&problem, &out, flags, &mut stdout)
        }
        Command::Check { problem, l } => commands::cmd_check(&problem, l, &mut stdout),
        Command::Residual {
            problem,
            solution,
            thresholds,
        } => match thresholds.as_deref() {
            None => commands::cmd_residual(&problem, &solution, Thresholds::default(), &mut stdout),
            Some(&[integral, differential, jump]) => {
                let th = Thresholds {
                    integral,
                    differential,
                    jump,
                };
                commands::cmd_residual(&problem, &solution, th, &mut stdout)
            }
            Some(_) => Err(CliError::config(
                "--thresholds",
                "expected integral,differential,jump",
            )),
        },
        Command::Convergence {
            problem,
            levels,
            nodes,
            semigroup,
        } => commands::cmd_convergence(&problem, levels, nodes, semigroup, &mut stdout),
        Command::Operators { data, mu, psi, t } => {
            commands::cmd_operators(&data, mu, &psi, &t, &mut stdout)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("psifrac: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
