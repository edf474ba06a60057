use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mixzone::flatlab::{flat_admissible_c, flat_fields, flat_gamma, flat_hull_sweep, FlatConfig};
use mixzone::kernel::{kernel_closed_form, lambda_average, muskat_limit, KernelPoint};
use mixzone_cli::config::parse_config;
use mixzone_cli::simulate::{run_simulate, SimulateError};
use mixzone_cli::verify::{run_verify, Suite};
use mixzone_cli::{init_threads_from_env, EXIT_FAILURE, EXIT_USAGE};
use serde_json::json;

#[derive(Parser)]
#[command(name = "mixzone", version, about = "Mixing-zone interface simulator and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the interface described by a JSON config and write trace, snapshots and meta.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value = "mixzone-out")]
        out: PathBuf,
    },
    /// Run an invariant suite and print a JSON report.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form straight-interface zone: γ, admissible c and hull margins.
    FlatDemo {
        #[arg(long, allow_hyphen_values = true)]
        mu1: f64,
        #[arg(long, allow_hyphen_values = true)]
        mu2: f64,
        /// +1 stable, -1 unstable.
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long)]
        c: f64,
        /// Interior λ levels for the hull check.
        #[arg(long, default_value_t = 9)]
        levels: usize,
    },
    /// Evaluate the double-averaged kernel at one point.
    KernelEval {
        #[arg(long, allow_hyphen_values = true)]
        dx: f64,
        #[arg(long, allow_hyphen_values = true)]
        df: f64,
        #[arg(long)]
        eps: f64,
    },
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE as u8)
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads_from_env() {
        return usage(e);
    }
    match cli.command {
        Command::Simulate { config, out } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return usage(format!("{}: {e}", config.display())),
            };
            let cfg = match parse_config(&text) {
                Ok(c) => c,
                Err(e) => return usage(e),
            };
            let base = config.parent().map(PathBuf::from).unwrap_or_default();
            match run_simulate(&cfg, &base, &out) {
                Ok(outcome) => {
                    print_json(&outcome.measured);
                    if outcome.ok() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_FAILURE as u8)
                    }
                }
                Err(SimulateError::Config(e)) => usage(e),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_FAILURE as u8)
                }
            }
        }
        Command::Verify { suite, out } => match run_verify(suite) {
            Ok(report) => {
                print_json(&report);
                if let Some(p) = out {
                    if let Err(e) = mixzone_cli::output::write_json(&p, &report) {
                        eprintln!("error: {}: {e}", p.display());
                        return ExitCode::from(EXIT_FAILURE as u8);
                    }
                }
                if report.pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_FAILURE as u8)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_FAILURE as u8)
            }
        },
        Command::FlatDemo { mu1, mu2, sigma, c, levels } => {
            let cfg = match FlatConfig::new(mu1, mu2, sigma, c) {
                Ok(cfg) => cfg,
                Err(e) => return usage(e),
            };
            let (interval, row) = match (flat_admissible_c(mu1, mu2, sigma), flat_hull_sweep(mu1, mu2, sigma, &[c], levels)) {
                (Ok(i), Ok(rows)) => (i, rows[0]),
                (Err(e), _) | (_, Err(e)) => return usage(e),
            };
            let profile: Vec<_> = (0..=8)
                .map(|i| {
                    let lambda = c * (-1.0 + 0.25 * i as f64);
                    flat_fields(&cfg, c, 0.0, lambda).expect("λ inside the zone")
                })
                .collect();
            print_json(&json!({
                "config": cfg,
                "tangent": cfg.tangent(),
                "gamma": flat_gamma(&cfg),
                "admissible_c": interval,
                "hull": row,
                "profile_at_t1": profile,
            }));
            ExitCode::SUCCESS
        }
        Command::KernelEval { dx, df, eps } => {
            if !(eps > 0.0 && eps.is_finite()) || !dx.is_finite() || !df.is_finite() {
                return usage("need finite dx, df and eps > 0");
            }
            print_json(&json!({
                "dx": dx,
                "df": df,
                "eps": eps,
                "kernel": kernel_closed_form(KernelPoint::new(dx, df), eps),
                "lambda_average": lambda_average(dx, df, eps),
                "sharp_limit": if dx == 0.0 && df == 0.0 { None } else { Some(muskat_limit(dx, df)) },
            }));
            ExitCode::SUCCESS
        }
    }
}
