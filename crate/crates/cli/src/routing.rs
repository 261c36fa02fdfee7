//! `gen`, `heuristic` and `eval`: random routing instances, the heuristic,
//! and its comparison against the exact reference.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde_json::json;

use nucleolus::game::rational::to_f64;
use nucleolus::vrp::{
    convergence_csv, error_csv, exact_happy_nucleolus_smallcap, relative_errors, run_heuristic, AllocationOutput,
    ExactReference, HeuristicConfig, HeuristicResult, StageBackend, VrpInstance,
};

use crate::error::{io_context, CliError, CliResult};
use crate::report::RunReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Packing,
    Exact,
}

/// Flags mirroring the heuristic configuration.
#[derive(Clone, Debug, Args)]
pub struct HeuristicArgs {
    #[arg(long, default_value_t = 12)]
    pub iterations: usize,
    /// Accuracy of the packing solver.
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    /// Weight of the total in the stage objective.
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 8)]
    pub threads: usize,
    /// First iteration with local search.
    #[arg(long, default_value_t = 7)]
    pub post_opt_start: usize,
    /// Iterations a tour may stay irrelevant before it is pruned.
    #[arg(long, default_value_t = 3)]
    pub prune_age: usize,
    /// Packing solver restarts per stage.
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_fix: f64,
    #[arg(long, value_enum, default_value_t = BackendArg::Packing)]
    pub backend: BackendArg,
    #[arg(long, env = "NUCLEOLUS_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl HeuristicArgs {
    pub fn config(&self) -> HeuristicConfig {
        HeuristicConfig {
            iterations: self.iterations,
            eps: self.eps,
            gamma: self.gamma,
            threads: self.threads,
            post_opt_start: self.post_opt_start,
            prune_age: self.prune_age,
            restarts: self.restarts,
            seed: self.seed,
            tol_fix: self.tol_fix,
            backend: match self.backend {
                BackendArg::Packing => StageBackend::Packing,
                BackendArg::Exact => StageBackend::Exact,
            },
        }
    }
}

pub fn read_instance(path: &Path) -> CliResult<VrpInstance> {
    let text = io_context(std::fs::read_to_string(path), path)?;
    VrpInstance::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn gen(n: usize, capacity: usize, seed: u64, out: &Path, report: &mut RunReport) -> CliResult<()> {
    let inst = report.time("generate", || nucleolus::vrp::random_instance(n, capacity, seed))?;
    report.seed = Some(seed);
    report.write(out, &(inst.to_json()? + "\n"))?;
    report.set("players", n);
    report.set("capacity", capacity);
    Ok(())
}

fn heuristic_output(result: &HeuristicResult) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(&AllocationOutput::from_result(result))? + "\n")
}

pub fn heuristic(
    input: &Path,
    args: &HeuristicArgs,
    out: Option<&Path>,
    trace: Option<&Path>,
    report: &mut RunReport,
) -> CliResult<()> {
    let inst = read_instance(input)?;
    let config = args.config();
    report.seed = Some(config.seed);
    let result = report.time("heuristic", || run_heuristic(&inst, &config))?;
    let text = heuristic_output(&result)?;
    match out {
        Some(path) => report.write(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(path) = trace {
        report.write(path, &convergence_csv(&result.trace))?;
    }
    report.set("players", inst.n());
    report.set("total", result.y.iter().sum::<f64>());
    report.set("pool", result.pool.len());
    if let Some(last) = result.trace.last() {
        report.set("last_l1_rel_change", last.l1_rel_change);
    }
    Ok(())
}

/// `bin_lo,bin_hi,count` rows of width `width` from 0 up to the largest
/// finite value.
pub fn histogram_csv(values: &[f64], width: f64) -> String {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let top = finite.iter().copied().fold(0.0, f64::max);
    let bins = ((top / width).floor() as usize + 1).max(1);
    let mut counts = vec![0usize; bins];
    for v in finite {
        counts[((v / width).floor() as usize).min(bins - 1)] += 1;
    }
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for (i, c) in counts.iter().enumerate() {
        writeln!(out, "{},{},{c}", i as f64 * width, (i + 1) as f64 * width).expect("write to string");
    }
    out
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        sorted[m / 2]
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0
    }
}

pub struct EvalOptions<'a> {
    pub instances: &'a Path,
    pub out: &'a Path,
    pub exact_ref: bool,
    /// Reuse `<stem>.exact.json` and `<stem>.alloc.json` already in `out`.
    pub reuse: bool,
    pub bin_width: f64,
    pub args: &'a HeuristicArgs,
}

fn instance_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in io_context(std::fs::read_dir(dir), dir)? {
        let path = io_context(entry, dir)?.path();
        if path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::Input(format!("no .json instances in {}", dir.display())));
    }
    Ok(files)
}

fn load_or<T: serde::de::DeserializeOwned + serde::Serialize>(
    path: &Path,
    reuse: bool,
    report: &mut RunReport,
    compute: impl FnOnce(&mut RunReport) -> CliResult<T>,
) -> CliResult<T> {
    if reuse && path.exists() {
        let text = io_context(std::fs::read_to_string(path), path)?;
        return serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())));
    }
    let value = compute(report)?;
    report.write(path, &(serde_json::to_string_pretty(&value)? + "\n"))?;
    Ok(value)
}

pub fn eval(opts: &EvalOptions<'_>, report: &mut RunReport) -> CliResult<()> {
    let config = opts.args.config();
    report.seed = Some(config.seed);
    if !(opts.bin_width > 0.0) {
        return Err(CliError::Input("--bin-width must be positive".into()));
    }
    let mut all_errors = Vec::new();
    let mut per_instance = Vec::new();
    let mut max_last_change = 0.0f64;
    for path in instance_files(opts.instances)? {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance").to_string();
        let inst = read_instance(&path)?;
        let alloc_path = opts.out.join(format!("{stem}.alloc.json"));
        let alloc: AllocationOutput = load_or(&alloc_path, opts.reuse, report, |report| {
            let result = report.time(&format!("{stem}: heuristic"), || run_heuristic(&inst, &config))?;
            report.write(&opts.out.join(format!("{stem}.convergence.csv")), &convergence_csv(&result.trace))?;
            Ok(AllocationOutput::from_result(&result))
        })?;
        let last = alloc.trace.last().map_or(0.0, |t| t.l1_rel_change);
        max_last_change = max_last_change.max(last);
        let mut entry = json!({ "instance": stem, "last_l1_rel_change": last });
        if opts.exact_ref {
            let ref_path = opts.out.join(format!("{stem}.exact.json"));
            let reference = load_or(&ref_path, opts.reuse, report, |report| {
                report.time(&format!("{stem}: exact reference"), || exact_happy_nucleolus_smallcap(&inst)).map_err(CliError::from)
            });
            match reference {
                Ok(reference) => {
                    let reference: ExactReference = reference;
                    let exact: Vec<f64> = reference.allocation.iter().map(to_f64).collect();
                    let errors = relative_errors(&exact, &alloc.values);
                    report.write(&opts.out.join(format!("{stem}.errors.csv")), &error_csv(&exact, &alloc.values))?;
                    entry["mean_rel_error"] = json!(errors.iter().sum::<f64>() / errors.len() as f64);
                    all_errors.extend(errors);
                }
                Err(CliError::Guard(msg)) => {
                    eprintln!("notice: {stem}: no exact reference ({msg}); convergence only");
                    entry["reference"] = json!("skipped");
                }
                Err(e) => return Err(e),
            }
        }
        per_instance.push(entry);
    }
    report.set("instances", per_instance);
    report.set("max_last_l1_rel_change", max_last_change);
    if !all_errors.is_empty() {
        report.write(&opts.out.join("histogram.csv"), &histogram_csv(&all_errors, opts.bin_width))?;
        let mut sorted = all_errors.clone();
        sorted.sort_by(f64::total_cmp);
        report.set("mean_rel_error", all_errors.iter().sum::<f64>() / all_errors.len() as f64);
        report.set("median_rel_error", median(&sorted));
        report.set("max_rel_error", *sorted.last().expect("nonempty"));
    }
    Ok(())
}
