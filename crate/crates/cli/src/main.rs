//! `nucleolus`: exact and heuristic (happy) nucleolus computation from the
//! command line.
//!
//! Exit codes: 0 success, 1 a verified claim failed, 2 bad input, 3 a size
//! guard fired.

mod error;
mod exact;
mod report;
mod routing;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nucleolus::mps::TotalValueMode;
use nucleolus::setcover::{self, SetCoverInstance};

use error::{io_context, CliError, CliResult};
use report::RunReport;
use routing::{EvalOptions, HeuristicArgs};

#[derive(Parser, Debug)]
#[command(name = "nucleolus", version, about = "Nucleolus and happy nucleolus of cooperative cost games")]
struct Cli {
    /// Write a JSON run report (timings, outputs, summary) to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// More log output; repeat for debug detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Nucleolus,
    Happy,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact (happy) nucleolus of an explicit, set cover or routing game.
    Exact {
        /// Game JSON; its type is detected from the keys.
        #[arg(required_unless_present = "fixture", conflicts_with = "fixture")]
        input: Option<PathBuf>,
        /// A built-in set cover instance instead of a file.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(setcover::FIXTURES))]
        fixture: Option<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Happy)]
        mode: ModeArg,
        /// Solve the fractional game of a set cover instance.
        #[arg(long)]
        fractional: bool,
        /// Allocation JSON; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the counterexample claims on the built-in (or given) instances.
    VerifyPaper {
        /// Cost change applied to the dominated set; 0 skips that check.
        #[arg(long, default_value_t = 1)]
        perturb: u32,
        /// Set cover JSON replacing the built-in triangle.
        #[arg(long)]
        triangle: Option<PathBuf>,
        /// Set cover JSON replacing the built-in three triangles.
        #[arg(long)]
        three_triangles: Option<PathBuf>,
        /// Set cover JSON replacing the built-in dominated-set instance.
        #[arg(long)]
        frac_dominated: Option<PathBuf>,
    },
    /// Random Euclidean routing instance on the unit square.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        capacity: usize,
        #[arg(long, env = "NUCLEOLUS_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Heuristic happy nucleolus of a routing instance.
    Heuristic {
        input: PathBuf,
        #[command(flatten)]
        args: HeuristicArgs,
        /// Allocation JSON; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Convergence CSV (`iter,l1_rel_change`).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Heuristic on every instance of a directory, optionally against the
    /// exact reference.
    Eval {
        instances: PathBuf,
        /// Compute exact references and relative errors.
        #[arg(long)]
        exact_ref: bool,
        /// Reuse allocations and references already in the output directory.
        #[arg(long)]
        reuse: bool,
        /// Width of the error histogram bins.
        #[arg(long, default_value_t = 0.01)]
        bin_width: f64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        args: HeuristicArgs,
    },
}

fn read_cover(path: &Path) -> CliResult<SetCoverInstance> {
    let text = io_context(std::fs::read_to_string(path), path)?;
    setcover::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn fixture_or_file(name: &str, path: &Option<PathBuf>) -> CliResult<SetCoverInstance> {
    match path {
        Some(p) => read_cover(p),
        None => Ok(setcover::fixture(name)?),
    }
}

fn run(cli: &Cli, report: &mut RunReport) -> CliResult<()> {
    match &cli.command {
        Command::Exact {
            input,
            fixture,
            mode,
            fractional,
            out,
        } => {
            let game = match (input, fixture) {
                (Some(path), _) => exact::detect(&io_context(std::fs::read_to_string(path), path)?)
                    .map_err(|e| match e {
                        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
                        other => other,
                    })?,
                (None, Some(name)) => exact::GameInput::SetCover(setcover::fixture(name)?),
                (None, None) => return Err(CliError::Input("give an input file or --fixture".into())),
            };
            let mode = match mode {
                ModeArg::Nucleolus => TotalValueMode::Nucleolus,
                ModeArg::Happy => TotalValueMode::Happy,
            };
            let result = report.time("solve", || exact::solve(game, mode, *fractional))?;
            if cli.verbose > 0 {
                for (i, s) in result.stages.iter().enumerate() {
                    eprintln!("stage {}: xi = {}, fixed {:?}", i + 1, s.xi, s.fixed);
                }
            }
            let text = serde_json::to_string_pretty(&result)? + "\n";
            match out {
                Some(path) => report.write(path, &text)?,
                None => print!("{text}"),
            }
            report.set("game", result.game.clone());
            report.set("total", result.total.clone());
            report.set("stages", result.stage_count);
            Ok(())
        }
        Command::VerifyPaper {
            perturb,
            triangle,
            three_triangles,
            frac_dominated,
        } => {
            let fixtures = verify::Fixtures {
                triangle: fixture_or_file("triangle", triangle)?,
                three_triangles: fixture_or_file("three_triangles", three_triangles)?,
                frac_dominated: fixture_or_file("frac_dominated", frac_dominated)?,
            };
            let claims = report.time("verify", || verify::verify(&fixtures, *perturb))?;
            for c in &claims {
                println!("{}", c.line());
            }
            let failed: Vec<&str> = claims
                .iter()
                .filter(|c| c.outcome == verify::Outcome::Fail)
                .map(|c| c.name.as_str())
                .collect();
            report.set("claims", serde_json::to_value(&claims)?);
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verification(failed.join("; ")))
            }
        }
        Command::Gen { n, capacity, seed, out } => routing::gen(*n, *capacity, *seed, out, report),
        Command::Heuristic { input, args, out, trace } => {
            routing::heuristic(input, args, out.as_deref(), trace.as_deref(), report)
        }
        Command::Eval {
            instances,
            exact_ref,
            reuse,
            bin_width,
            out,
            args,
        } => routing::eval(
            &EvalOptions {
                instances,
                out,
                exact_ref: *exact_ref,
                reuse: *reuse,
                bin_width: *bin_width,
                args,
            },
            report,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let mut report = RunReport::new(std::env::args().collect());
    let outcome = run(&cli, &mut report);
    if let Some(path) = &cli.report {
        let written = serde_json::to_string_pretty(&report)
            .map_err(CliError::from)
            .and_then(|text| io_context(std::fs::write(path, text + "\n"), path));
        if let Err(e) = written {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    }
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
