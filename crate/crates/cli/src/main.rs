use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mplreach::bench::{
    gen_irreducible, instance_rng, run_benchmark, standard_sets, to_json, write_csv, BenchConfig, SetProfile,
};
use mplreach::difflogic::encode_bounded;
use mplreach::dlsolver::to_smtlib;
use mplreach::maxplus::{completeness_threshold, eigenvalue, is_irreducible, transient_cyclicity};
use mplreach::pwa::pwa_generate;
use mplreach::reach::{
    reach_explicit, reach_symbolic, Direction, Engine, ReachOptions, ReachResult, ReachSpec, Strategy,
};
use mplreach::{Dbm, MaxPlusMatrix};

#[derive(Parser)]
#[command(name = "mplreach", version, about = "Reachability analysis of max-plus linear systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether Y is reachable from X within N events.
    Reach(ReachArgs),
    /// Print the piecewise-affine regions of a matrix.
    Pwa(PwaArgs),
    /// Eigenvalue, transient, cyclicity and completeness threshold.
    Spectrum(SpectrumArgs),
    /// Run the random-instance benchmark.
    Bench(BenchArgs),
    /// Write a random irreducible instance and the standard sets to files.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Explicit,
    Smt,
    SmtExtern,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Forward,
    Backward,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Sequential,
    OneShot,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Fixed5,
    Half,
}

impl From<ProfileArg> for SetProfile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Fixed5 => SetProfile::Fixed5,
            ProfileArg::Half => SetProfile::Half,
        }
    }
}

#[derive(Args)]
struct ReachArgs {
    /// Matrix file: dimension on the first line, then rows (`-inf` or `.` for ε).
    #[arg(short = 'A', long = "matrix")]
    matrix: PathBuf,
    /// Initial set, one constraint per line such as `x1 - x2 >= 3`.
    #[arg(short = 'X', long = "initial")]
    initial: PathBuf,
    /// Target set, same format.
    #[arg(short = 'Y', long = "target")]
    target: PathBuf,
    /// Horizon; defaults to the completeness threshold.
    #[arg(short = 'N', long = "horizon")]
    horizon: Option<usize>,
    #[arg(long, value_enum, default_value = "explicit")]
    engine: EngineArg,
    #[arg(long, value_enum, default_value = "forward")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "sequential")]
    strategy: StrategyArg,
    /// Also test X ∩ Y at k = 0.
    #[arg(long)]
    check_k0: bool,
    /// Drop reach-set parts contained in another part.
    #[arg(long)]
    subsume: bool,
    /// Allow constraints on a single variable (`x2 - x0 <= 4`).
    #[arg(long)]
    allow_x0: bool,
    /// External solver command for `smt-extern`.
    #[arg(long, default_value = "z3 -in")]
    solver_cmd: String,
    /// Use integer difference logic when the problem is integral and non-strict.
    #[arg(long)]
    idl: bool,
    /// Write the full bounded formula as an SMT-LIB2 script.
    #[arg(long)]
    dump_smt2: Option<PathBuf>,
    /// Print the witness trajectory as JSON.
    #[arg(long)]
    witness: bool,
    /// Print the whole result as JSON.
    #[arg(long)]
    json: bool,
    /// Give up after this many seconds.
    #[arg(long)]
    timeout: Option<f64>,
}

#[derive(Args)]
struct PwaArgs {
    #[arg(short = 'A', long = "matrix")]
    matrix: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(short = 'A', long = "matrix")]
    matrix: PathBuf,
    /// Largest power examined when looking for periodicity.
    #[arg(long, default_value_t = mplreach::maxplus::DEFAULT_POWER_CAP)]
    cap: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Dimension pairs, e.g. "(8,3),(8,8)".
    #[arg(long, default_value = "(8,8)")]
    pairs: String,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "fixed5")]
    profile: ProfileArg,
    /// Inclusive range of the finite entries, e.g. "1..20".
    #[arg(long, default_value = "1..20")]
    range: String,
    /// Algorithms 1-8 to run, e.g. "1,6".
    #[arg(long, default_value = "1,2,3,4,5,6,7,8")]
    algorithms: String,
    /// Largest per-instance horizon.
    #[arg(long, default_value_t = 200)]
    cap: usize,
    /// Fixed horizon for every instance instead of its threshold.
    #[arg(long)]
    horizon: Option<usize>,
    /// Per-run time limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Run instances one after another.
    #[arg(long)]
    sequential: bool,
    /// CSV output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(short)]
    n: usize,
    #[arg(short)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, default_value = "1..20")]
    range: String,
    #[arg(long, value_enum, default_value = "fixed5")]
    profile: ProfileArg,
    /// Directory receiving A.txt, X.txt and Y.txt.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_matrix(path: &Path) -> Result<MaxPlusMatrix> {
    MaxPlusMatrix::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_set(path: &Path, n: usize, allow_x0: bool) -> Result<Dbm> {
    Dbm::parse_set(&read(path)?, n, allow_x0)
        .with_context(|| format!("parsing {}", path.display()))?
        .with_context(|| format!("{} describes the empty set", path.display()))
}

fn parse_range(s: &str) -> Result<(i64, i64)> {
    let (lo, hi) = s.split_once("..").context("range must look like 1..20")?;
    Ok((lo.trim().parse()?, hi.trim().trim_start_matches('=').parse()?))
}

fn parse_pairs(s: &str) -> Result<Vec<(usize, usize)>> {
    let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut out = Vec::new();
    for chunk in cleaned.split(')') {
        let chunk = chunk.trim_start_matches(',');
        if chunk.is_empty() {
            continue;
        }
        let inner = chunk.strip_prefix('(').with_context(|| format!("bad pair near {chunk:?}"))?;
        let (n, m) = inner.split_once(',').with_context(|| format!("bad pair ({inner})"))?;
        out.push((n.parse()?, m.parse()?));
    }
    if out.is_empty() {
        bail!("no (n,m) pairs given");
    }
    Ok(out)
}

fn parse_algorithms(s: &str) -> Result<Vec<usize>> {
    let algs = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(bad) = algs.iter().find(|&&a| !(1..=8).contains(&a)) {
        bail!("algorithm {bad} is not in 1..=8");
    }
    Ok(algs)
}

fn print_result(r: &ReachResult, args: &ReachArgs, extra: Option<(usize, usize)>) -> Result<()> {
    if args.json {
        println!("{}", serde_json::to_string_pretty(r)?);
        return Ok(());
    }
    println!("reachable: {}", r.reachable);
    match (r.reachable, r.emptied, r.step) {
        (true, _, Some(k)) => println!("step: {k}"),
        (false, true, Some(k)) => println!("backward set empty at step {k}"),
        _ => {}
    }
    if let Some((vars, checks)) = extra {
        println!("solver variables: {vars}, checks: {checks}");
    }
    if !r.set_sizes.is_empty() {
        let sizes: Vec<String> = r.set_sizes.iter().map(|s| s.to_string()).collect();
        println!("reach-set sizes: {}", sizes.join(" "));
    }
    if args.witness {
        match &r.witness {
            Some(w) => {
                let rendered: Vec<Vec<String>> =
                    w.iter().map(|x| x.iter().map(|v| v.to_string()).collect()).collect();
                println!("{}", serde_json::to_string(&rendered)?);
            }
            None if r.reachable => println!("witness: only the smt engines produce one"),
            None => {}
        }
    }
    Ok(())
}

fn cmd_reach(args: ReachArgs) -> Result<()> {
    let a = load_matrix(&args.matrix)?;
    let n = a.dim();
    let x = load_set(&args.initial, n, args.allow_x0)?;
    let y = load_set(&args.target, n, args.allow_x0)?;
    let horizon = match args.horizon {
        Some(h) => h,
        None => {
            let p = transient_cyclicity(&a, mplreach::maxplus::DEFAULT_POWER_CAP)
                .context("no horizon given and the completeness threshold is unavailable")?;
            completeness_threshold(&p).max(1)
        }
    };
    let direction = match args.mode {
        ModeArg::Forward => Direction::Forward,
        ModeArg::Backward => Direction::Backward,
    };
    let strategy = match args.strategy {
        StrategyArg::Sequential => Strategy::Sequential,
        StrategyArg::OneShot => Strategy::OneShot,
    };
    let spec = ReachSpec::new(a, x, y, horizon).with(direction, strategy);
    if let Some(path) = &args.dump_smt2 {
        let fragments = encode_bounded(&spec)?;
        fs::write(path, to_smtlib(&fragments, args.idl))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let options = ReachOptions {
        check_k0: args.check_k0,
        subsume: args.subsume,
        deadline: args.timeout.map(|s| Instant::now() + Duration::from_secs_f64(s)),
    };
    match args.engine {
        EngineArg::Explicit => {
            let r = reach_explicit(&spec, &options)?;
            print_result(&r, &args, None)
        }
        EngineArg::Smt | EngineArg::SmtExtern => {
            let engine = match args.engine {
                EngineArg::Smt => Engine::Internal,
                _ => Engine::External {
                    command: args.solver_cmd.clone(),
                    prefer_integer: args.idl,
                },
            };
            let run = reach_symbolic(&spec, &engine, &options)?;
            print_result(&run.result, &args, Some((run.variables, run.checks)))
        }
    }
}

fn cmd_pwa(args: PwaArgs) -> Result<()> {
    let a = load_matrix(&args.matrix)?;
    let pwa = pwa_generate(&a)?;
    if args.json {
        let regions: Vec<_> = pwa.regions.iter().map(|r| r.summary()).collect();
        println!("{}", serde_json::to_string_pretty(&regions)?);
        return Ok(());
    }
    for r in &pwa.regions {
        let g: Vec<String> = r.g_one_based().iter().map(|g| g.to_string()).collect();
        println!("region g = ({})", g.join(","));
        for (i, (&gi, off)) in r.g.iter().zip(&r.offsets).enumerate() {
            println!("  x{}' = x{} + {}", i + 1, gi + 1, off);
        }
        let text = r.region.to_set_text();
        if text.is_empty() {
            println!("  where true");
        }
        for line in text.lines() {
            println!("  where {line}");
        }
    }
    Ok(())
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<()> {
    let a = load_matrix(&args.matrix)?;
    if !is_irreducible(&a) {
        bail!("matrix is reducible; transient and cyclicity are defined for irreducible matrices");
    }
    let lambda = eigenvalue(&a)?;
    let p = transient_cyclicity(&a, args.cap)?;
    if args.json {
        let v = serde_json::json!({
            "lambda": lambda.to_string(),
            "transient": p.transient,
            "cyclicity": p.cyclicity,
            "threshold": completeness_threshold(&p),
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        println!("lambda: {lambda}");
        println!("transient: {}", p.transient);
        println!("cyclicity: {}", p.cyclicity);
        println!("threshold: {}", completeness_threshold(&p));
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        pairs: parse_pairs(&args.pairs)?,
        instances_per_pair: args.count,
        value_range: parse_range(&args.range)?,
        seed: args.seed,
        horizon_cap: args.cap,
        horizon: args.horizon,
        profile: args.profile.into(),
        algorithms: parse_algorithms(&args.algorithms)?,
        timeout: args.timeout.map(Duration::from_secs_f64),
        parallel: !args.sequential,
    };
    let rows = run_benchmark(&cfg)?;
    let text = if args.json {
        to_json(&rows, &cfg) + "\n"
    } else {
        let mut buf = Vec::new();
        write_csv(&rows, &cfg, &mut buf)?;
        String::from_utf8(buf)?
    };
    match &args.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let mut rng = instance_rng(args.seed, args.n, args.m, args.index);
    let a = gen_irreducible(args.n, args.m, parse_range(&args.range)?, &mut rng)?;
    let (x, y) = standard_sets(args.n, args.profile.into())?;
    fs::create_dir_all(&args.out_dir)?;
    for (name, text) in [
        ("A.txt", a.to_text()),
        ("X.txt", x.to_set_text()),
        ("Y.txt", y.to_set_text()),
    ] {
        let path = args.out_dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("wrote A.txt, X.txt, Y.txt to {}", args.out_dir.display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Reach(a) => cmd_reach(a),
        Command::Pwa(a) => cmd_pwa(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gen(a) => cmd_gen(a),
    }
}
