mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qubo_prep::engine::{reconstruct_solution, run_to_fixed_point, EngineOptions};
use qubo_prep::generator::{
    derive_seed, design_row, design_table, desk_sizes, generate_instance, paper_sizes, GeneratorSpec,
};
use qubo_prep::io::{read_instance, write_instance_with_comments};
use qubo_prep::oracle::{brute_force_solve, check_equivalence, OracleError, DEFAULT_N_LIMIT};
use qubo_prep::QuboInstance;

use report::{summary, ReductionDoc, RunReport};

#[derive(Parser)]
#[command(name = "qubo-prep", version, about = "Reduce QUBO instances before solving them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate benchmark instances
    Generate(GenerateArgs),
    /// Reduce an instance (or a directory of them) to a fixed point
    Reduce(ReduceArgs),
    /// Check a reduction against the original by exhaustive search
    Verify(VerifyArgs),
    /// Solve a small instance exactly
    Solve(SolveArgs),
    /// Summarize run reports written by `reduce`
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    /// 100 variables with 500 and 1000 edges
    Desk,
    /// 1000 to 10000 variables
    Paper,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, required_unless_present = "suite", conflicts_with = "suite")]
    size: Option<usize>,
    #[arg(long, required_unless_present = "suite", conflicts_with = "suite")]
    edges: Option<usize>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=16))]
    design_row: u64,
    /// Every size of the suite crossed with all 16 design rows
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file, or directory with --suite
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct ReduceArgs {
    /// Instance file
    #[arg(required_unless_present = "suite")]
    input: Option<PathBuf>,
    /// Reduced instance (default: INPUT with extension .reduced.qubo)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Solution map and log (default: INPUT with extension .map.json)
    #[arg(long)]
    map: Option<PathBuf>,
    /// Run report (default: INPUT with extension .report.json)
    #[arg(long)]
    report: Option<PathBuf>,
    /// Reduce every .qubo file in this directory
    #[arg(long, conflicts_with = "input", requires = "out_dir")]
    suite: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Parallel workers for --suite
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    max_passes: Option<usize>,
    #[arg(long)]
    no_residual: bool,
    #[arg(long)]
    emit_inequalities: bool,
    /// Number the survivors 1..k in the reduced file
    #[arg(long)]
    renumber: bool,
    /// Print the report as JSON instead of a table
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    original: PathBuf,
    reduced: PathBuf,
    map: PathBuf,
    #[arg(long, default_value_t = DEFAULT_N_LIMIT)]
    limit: usize,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Reduce first, solve what is left and rebuild the full solution
    #[arg(long)]
    preprocess: bool,
    #[arg(long, default_value_t = DEFAULT_N_LIMIT)]
    limit: usize,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Only print the totals
    #[arg(long)]
    summary_only: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Reduce(a) => reduce(a),
        Command::Verify(a) => verify(a),
        Command::Solve(a) => solve(a),
        Command::Report(a) => show_reports(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn generate(a: GenerateArgs) -> Result<ExitCode> {
    if let Some(suite) = a.suite {
        let sizes = match suite {
            Suite::Desk => desk_sizes(),
            Suite::Paper => paper_sizes(),
        };
        fs::create_dir_all(&a.output).with_context(|| format!("creating {}", a.output.display()))?;
        let mut written = 0;
        for (si, size) in sizes.iter().enumerate() {
            for row in design_table() {
                let seed = derive_seed(a.seed, (si * 16 + row.id) as u64);
                let spec = GeneratorSpec::from_row(&row, size.n, size.edges, seed);
                let path = a.output.join(format!("{}_r{:02}.qubo", size.id, row.id));
                write_generated(&spec, &path)?;
                written += 1;
            }
        }
        println!("wrote {written} instances to {}", a.output.display());
    } else {
        let row = design_row(a.design_row as usize)?;
        let (n, edges) = (a.size.unwrap_or_default(), a.edges.unwrap_or_default());
        let spec = GeneratorSpec::from_row(&row, n, edges, a.seed);
        write_generated(&spec, &a.output)?;
        println!("wrote {}", a.output.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn write_generated(spec: &GeneratorSpec, path: &Path) -> Result<()> {
    let q = generate_instance(spec)?;
    write_instance_with_comments(&q, &spec.describe(), path)
        .with_context(|| format!("writing {}", path.display()))
}

struct Outputs {
    reduced: PathBuf,
    map: PathBuf,
    report: PathBuf,
}

fn reduce(a: ReduceArgs) -> Result<ExitCode> {
    let opts = EngineOptions {
        max_passes: a.max_passes,
        enable_residual: !a.no_residual,
        emit_inequalities: a.emit_inequalities,
        ..EngineOptions::default()
    };
    if a.max_passes == Some(0) {
        bail!("--max-passes must be at least 1");
    }
    if let Some(dir) = &a.suite {
        return reduce_suite(&a, dir, &opts);
    }
    let input = a.input.as_deref().expect("clap requires input or --suite");
    let out = Outputs {
        reduced: a.output.clone().unwrap_or_else(|| input.with_extension("reduced.qubo")),
        map: a.map.clone().unwrap_or_else(|| input.with_extension("map.json")),
        report: a.report.clone().unwrap_or_else(|| input.with_extension("report.json")),
    };
    let report = reduce_one(input, &out, &opts, a.renumber)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.table());
    }
    Ok(ExitCode::SUCCESS)
}

fn reduce_one(input: &Path, out: &Outputs, opts: &EngineOptions, renumber: bool) -> Result<RunReport> {
    let q = load(input)?;
    let start = Instant::now();
    let r = run_to_fixed_point(&q, opts)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let name = input.display().to_string();
    let report = RunReport::new(&name, q.offset(), &r, ms);

    let reduced = if renumber { r.map.compact(&r.reduced) } else { r.reduced.clone() };
    let note = format!(
        "reduced from {name}: {} of {} variables left",
        r.map.survivors.len(),
        q.n()
    );
    write_instance_with_comments(&reduced, &[note], &out.reduced)
        .with_context(|| format!("writing {}", out.reduced.display()))?;
    let doc = ReductionDoc {
        source: name,
        original_offset: q.offset(),
        reduced_offset: r.reduced.offset(),
        renumbered: renumber,
        map: r.map,
        log: r.log,
    };
    write_json(&out.map, &doc)?;
    write_json(&out.report, &report)?;
    Ok(report)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn reduce_suite(a: &ReduceArgs, dir: &Path, opts: &EngineOptions) -> Result<ExitCode> {
    let out_dir = a.out_dir.as_deref().expect("clap requires --out-dir with --suite");
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut inputs: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qubo"))
        .collect();
    inputs.sort();
    if inputs.is_empty() {
        bail!("no .qubo files in {}", dir.display());
    }
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, inputs.len());

    // files are handed out one at a time; each run stays single-threaded
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunReport>>>> = Mutex::new((0..inputs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(input) = inputs.get(k) else { break };
                let stem = input.file_stem().unwrap_or_default().to_string_lossy();
                let out = Outputs {
                    reduced: out_dir.join(format!("{stem}.reduced.qubo")),
                    map: out_dir.join(format!("{stem}.map.json")),
                    report: out_dir.join(format!("{stem}.report.json")),
                };
                let r = reduce_one(input, &out, opts, a.renumber);
                results.lock().unwrap()[k] = Some(r);
            });
        }
    });
    let mut reports = Vec::new();
    for (input, r) in inputs.iter().zip(results.into_inner().unwrap()) {
        let r = r.expect("every file is processed");
        reports.push(r.with_context(|| format!("reducing {}", input.display()))?);
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        for r in &reports {
            println!(
                "{:<40} {:>6} -> {:>6} {:>7.2}%",
                r.instance, r.n, r.survivors, r.percent_reduction
            );
        }
        print!("\n{}", summary(&reports));
    }
    Ok(ExitCode::SUCCESS)
}

fn load(path: &Path) -> Result<QuboInstance> {
    read_instance(path).with_context(|| format!("reading {}", path.display()))
}

fn read_doc(path: &Path) -> Result<ReductionDoc> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let original = load(&a.original)?;
    let reduced = load(&a.reduced)?;
    let doc = read_doc(&a.map)?;
    if doc.map.n != original.n() {
        bail!("the map covers {} variables but the original has {}", doc.map.n, original.n());
    }
    let reduced = if doc.renumbered { doc.map.expand(&reduced) } else { reduced };
    let report = match check_equivalence(&original, &reduced, &doc.map, a.limit) {
        Err(OracleError::TooLarge { n, limit }) => {
            eprintln!("refusing to verify: {n} variables exceed the exhaustive-search limit of {limit}");
            return Ok(ExitCode::from(2));
        }
        r => r?,
    };
    if report.passed {
        println!("ok: {}", report.message);
        return Ok(ExitCode::SUCCESS);
    }
    println!("FAILED: {}", report.message);
    if let Some(c) = report.counterexample {
        println!("reduced assignment  {}", bits(&c.reduced_assignment));
        println!("reconstructed       {}", bits(&c.reconstructed));
        println!("original value      {} (optimum {})", c.original_value, report.original_optimum);
    }
    Ok(ExitCode::from(1))
}

fn bits(x: &[u8]) -> String {
    x.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" ")
}

fn solve(a: SolveArgs) -> Result<ExitCode> {
    let q = load(&a.instance)?;
    let (optimum, x, remnant) = if a.preprocess {
        let r = run_to_fixed_point(&q, &EngineOptions::default())?;
        let rest = r.map.compact(&r.reduced);
        let opt = solve_exact(&rest, a.limit)?;
        let x = reconstruct_solution(&r.map, &opt.1)?;
        (opt.0, x, Some(rest.n()))
    } else {
        let (value, x) = solve_exact(&q, a.limit)?;
        (value, x, None)
    };
    println!("optimum {optimum}");
    println!("assignment {}", bits(&x));
    if let Some(k) = remnant {
        println!("remnant {k}");
    }
    Ok(ExitCode::SUCCESS)
}

fn solve_exact(q: &QuboInstance, limit: usize) -> Result<(qubo_prep::Coeff, Vec<u8>)> {
    let r = brute_force_solve(q, limit)?;
    let first = r.optima.into_iter().next().expect("the unfiltered search always has an optimum");
    Ok((r.optimum, first))
}

fn show_reports(a: ReportArgs) -> Result<ExitCode> {
    let mut reports = Vec::new();
    for path in &a.reports {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let r: RunReport = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        reports.push(r);
    }
    if !a.summary_only {
        for r in &reports {
            println!("{}", r.table());
        }
    }
    if reports.len() > 1 || a.summary_only {
        print!("{}", summary(&reports));
    }
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn design_row_range_is_enforced() {
        let parsed = Cli::try_parse_from(["qubo-prep", "generate", "--size", "10", "--edges", "20", "--design-row", "17", "-o", "x"]);
        assert!(parsed.is_err());
    }
}
