use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dioph_core::arith::{fmt_rational, is_prime};
use dioph_core::bounds::{self, FactorResult};
use dioph_core::harness::{
    self, build_sharpness_config, check_lemma, emit, fmt_g, parse_rational, quadratic_sharpness_search,
    report_csv, series_csv, sharpness_series, verify_inequality, ExperimentConfig, FactorChoice, SubsetMode,
};
use dioph_core::position::{distributive_constant_of, position_report_of};
use dioph_core::projective::Hypersurface;
use dioph_core::{Field, RationalPlace};

#[derive(Parser)]
#[command(
    name = "dioph",
    version,
    about = "Bound factors, position data and inequality experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound factors with their case and maximizing j.
    Factor(FactorArgs),
    /// General position, minimal subgeneral m and index of a hyperplane family.
    Position(FamilyArgs),
    /// Distributive constant of a hyperplane family.
    Distributive(FamilyArgs),
    /// Evaluate the inequality on the points of a config; CSV output.
    Verify(VerifyArgs),
    /// Ratio of the left-hand side to the height along the sharpness points.
    Sharpness(SharpnessArgs),
    /// Randomized checks of the weighted Chebyshev inequality and its corollary.
    CheckLemma(LemmaArgs),
}

#[derive(Args)]
struct FactorArgs {
    #[arg(long)]
    m: u64,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    delta: u64,
    /// Use the index-κ factor instead of the subgeneral one.
    #[arg(long)]
    kappa: Option<u64>,
    /// Sweep m from n up to --m.
    #[arg(long)]
    all: bool,
    /// Add the Levin and Schlickewei factors.
    #[arg(long)]
    compare: bool,
}

#[derive(Args)]
struct FamilyArgs {
    /// A linear form such as "x0 - 2*x1"; repeat for each hyperplane.
    #[arg(long = "poly")]
    polys: Vec<String>,
    /// Read the family from a config instead (every place of S).
    #[arg(long, conflicts_with = "polys")]
    config: Option<PathBuf>,
    /// Ambient dimension; inferred from the forms when omitted.
    #[arg(long)]
    n: Option<usize>,
    /// Work over Q(sqrt(d)).
    #[arg(long)]
    d: Option<i64>,
}

#[derive(Args)]
struct VerifyArgs {
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<String>,
    /// subgeneral | index | general_position | levin | schlickewei | <rational>
    #[arg(long)]
    factor: Option<String>,
    #[arg(long)]
    height_floor: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    kappa: Option<u64>,
    #[arg(long)]
    delta: Option<u64>,
    /// all | max
    #[arg(long)]
    subsets: Option<String>,
}

#[derive(Args)]
struct SharpnessArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    delta: u64,
    #[arg(long, default_value_t = 2)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    smin: u32,
    #[arg(long, default_value_t = 30)]
    smax: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also search quadratic points over Q(sqrt(d)) on the line.
    #[arg(long)]
    search_d: Option<i64>,
    #[arg(long, default_value_t = 3)]
    search_bound: i64,
}

#[derive(Args)]
struct LemmaArgs {
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = harness::DEFAULT_SEED)]
    seed: u64,
}

enum Outcome {
    Ok,
    Violation,
}

type CliResult = Result<Outcome, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Factor(a) => run_factor(&a),
        Command::Position(a) => run_position(&a),
        Command::Distributive(a) => run_distributive(&a),
        Command::Verify(a) => run_verify(&a),
        Command::Sharpness(a) => run_sharpness(&a),
        Command::CheckLemma(a) => run_check_lemma(&a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn env_seed() -> Result<Option<u64>, String> {
    match std::env::var("DIOPH_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("DIOPH_SEED = `{s}` is not an unsigned integer")),
        Err(_) => Ok(None),
    }
}

fn describe(r: &FactorResult) -> String {
    format!("{} (case {}, j={})", fmt_rational(&r.value), r.case, r.argmax_j)
}

fn factor_line(m: u64, a: &FactorArgs) -> Result<String, String> {
    let r = match a.kappa {
        Some(k) => bounds::factor_index(m, a.n, a.delta, k),
        None => bounds::factor_subgeneral(m, a.n, a.delta),
    }
    .map_err(|e| e.to_string())?;
    if !a.compare {
        return Ok(describe(&r));
    }
    let levin = bounds::levin_factor(m, a.n, a.delta).map_or("n/a".into(), |v| fmt_rational(&v));
    let schl = bounds::schlickewei_factor(a.n, a.delta).map_or("n/a".into(), |v| fmt_rational(&v));
    Ok(format!(
        "{} | levin {levin} | schlickewei {schl}",
        fmt_rational(&r.value)
    ))
}

fn run_factor(a: &FactorArgs) -> CliResult {
    if !a.all {
        println!("{}", factor_line(a.m, a)?);
        return Ok(Outcome::Ok);
    }
    if a.m < a.n {
        return Err(format!("m = {} must be at least n = {}", a.m, a.n));
    }
    for m in a.n..=a.m {
        println!("m={m} n={} delta={}: {}", a.n, a.delta, factor_line(m, a)?);
    }
    Ok(Outcome::Ok)
}

/// Hyperplanes per place, either from --poly flags or from a config.
fn load_family(a: &FamilyArgs) -> Result<Vec<(String, usize, Vec<Hypersurface>)>, String> {
    if let Some(path) = &a.config {
        let c = ExperimentConfig::load(path).map_err(|e| e.to_string())?;
        return Ok(c
            .family
            .per_place
            .iter()
            .filter(|(_, ds)| !ds.is_empty())
            .map(|(v, ds)| {
                (
                    v.to_string(),
                    c.n(),
                    ds.iter().map(|d| d.hypersurface.clone()).collect(),
                )
            })
            .collect());
    }
    if a.polys.is_empty() {
        return Err("give at least one --poly or a --config".into());
    }
    let field = match a.d {
        Some(d) => Field::quadratic(d).map_err(|e| e.to_string())?,
        None => Field::Rational,
    };
    let n = match a.n {
        Some(n) => n,
        None => {
            let mut n = 1;
            for p in &a.polys {
                let poly =
                    dioph_core::poly::parse_polynomial(p, field, 0).map_err(|e| format!("`{p}`: {e}"))?;
                n = n.max(poly.nvars().saturating_sub(1));
            }
            n
        }
    };
    let hs = a
        .polys
        .iter()
        .map(|p| Hypersurface::parse(p, field, n).map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(vec![(RationalPlace::Infinity.to_string(), n, hs)])
}

fn fmt_subset(s: &Option<Vec<usize>>) -> String {
    match s {
        None => "-".into(),
        Some(v) => format!(
            "{{{}}}",
            v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
        ),
    }
}

fn run_position(a: &FamilyArgs) -> CliResult {
    let fams = load_family(a)?;
    let single = a.config.is_none();
    for (v, n, hs) in fams {
        let r = position_report_of(&hs, n).map_err(|e| e.to_string())?;
        let prefix = if single {
            String::new()
        } else {
            format!("place {v}: ")
        };
        println!(
            "{prefix}general {} | min_m {} | kappa {}",
            r.general, r.min_m, r.kappa
        );
        if !r.general {
            println!(
                "{prefix}witnesses: general {} | min_m {} | kappa {}",
                fmt_subset(&r.general_witness),
                fmt_subset(&r.min_m_witness),
                fmt_subset(&r.kappa_witness)
            );
        }
    }
    Ok(Outcome::Ok)
}

fn run_distributive(a: &FamilyArgs) -> CliResult {
    let fams = load_family(a)?;
    let single = a.config.is_none();
    for (v, n, hs) in fams {
        let c = distributive_constant_of(&hs, n).map_err(|e| e.to_string())?;
        if single {
            println!("{}", fmt_rational(&c));
        } else {
            println!("place {v}: {}", fmt_rational(&c));
        }
    }
    Ok(Outcome::Ok)
}

fn run_verify(a: &VerifyArgs) -> CliResult {
    if !a.config.exists() {
        return Err(format!("{}: no such file", a.config.display()));
    }
    let mut c = ExperimentConfig::load(&a.config).map_err(|e| e.to_string())?;
    if let Some(e) = &a.epsilon {
        let r = parse_rational(e)?;
        if r <= dioph_core::numfield::int(0) {
            return Err("epsilon must be positive".into());
        }
        c.run.epsilon = r;
    }
    if let Some(f) = &a.factor {
        c.run.factor = f.parse::<FactorChoice>()?;
    }
    if let Some(h) = a.height_floor {
        c.run.height_floor = h;
    }
    if let Some(seed) = env_seed()?.or(a.seed) {
        c.run.seed = seed;
    }
    c.run.m = a.m.or(c.run.m);
    c.run.kappa = a.kappa.or(c.run.kappa);
    c.run.delta = a.delta.or(c.run.delta);
    if let Some(s) = &a.subsets {
        c.run.subsets = match s.as_str() {
            "all" => SubsetMode::All,
            "max" => SubsetMode::MaxAdmissible,
            other => return Err(format!("unknown subsets mode `{other}`")),
        };
    }
    let report = verify_inequality(&c).map_err(|e| e.to_string())?;
    emit(a.out.as_deref(), &report_csv(&report)).map_err(|e| e.to_string())?;
    for f in &report.failures {
        eprintln!("point {}: {}", f.point, f.message);
    }
    eprintln!(
        "factor {} + epsilon {}",
        fmt_rational(&report.factor),
        fmt_rational(&report.epsilon)
    );
    eprintln!("{}", report.summary());
    Ok(if report.violations() > 0 {
        Outcome::Violation
    } else {
        Outcome::Ok
    })
}

fn say(to_stderr: bool, line: &str) {
    if to_stderr {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
}

fn run_sharpness(a: &SharpnessArgs) -> CliResult {
    if !is_prime(a.p) {
        return Err(format!("p = {} is not prime", a.p));
    }
    if a.smin < 1 || a.smin > a.smax {
        return Err("need 1 <= smin <= smax".into());
    }
    let c = build_sharpness_config(a.n, a.delta, a.p).map_err(|e| e.to_string())?;
    let series = sharpness_series(&c, a.smin..=a.smax).map_err(|e| e.to_string())?;
    emit(a.out.as_deref().map(Path::new), &series_csv(&series)).map_err(|e| e.to_string())?;
    let quiet = a.out.is_none();
    let target = 2.0 * a.delta as f64 * a.n as f64;
    if let Some(last) = series.last() {
        say(
            quiet,
            &format!(
                "final s={} ratio {} | gap {}",
                last.s,
                fmt_g(last.ratio),
                fmt_g((last.ratio - target).abs())
            ),
        );
    }
    if !series.skipped.is_empty() {
        say(
            quiet,
            &format!("skipped support hits at s = {:?}", series.skipped),
        );
    }
    if let Some(d) = a.search_d {
        let found =
            quadratic_sharpness_search(&c, d, a.smin..=a.smax, a.search_bound).map_err(|e| e.to_string())?;
        say(quiet, "quadratic search (exploratory): s,point,h,lhs,ratio");
        for q in found {
            say(
                quiet,
                &format!(
                    "{},{},{},{},{}",
                    q.s,
                    q.point,
                    fmt_g(q.h),
                    fmt_g(q.lhs),
                    fmt_g(q.ratio)
                ),
            );
        }
    }
    Ok(Outcome::Ok)
}

fn run_check_lemma(a: &LemmaArgs) -> CliResult {
    if a.trials < 1 {
        return Err("trials must be at least 1".into());
    }
    let seed = env_seed()?.unwrap_or(a.seed);
    let s = check_lemma(a.trials, seed).map_err(|e| e.to_string())?;
    println!("{s}");
    Ok(if s.violations > 0 {
        Outcome::Violation
    } else {
        Outcome::Ok
    })
}
