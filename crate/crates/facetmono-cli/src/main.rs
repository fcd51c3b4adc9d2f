//! Command-line interface: sampling, expectation estimates, monotonicity
//! scans, and the half-sphere workflows.
//!
//! Exit codes: 0 success, 1 usage or parameter error, 2 a quadrature scan
//! found a non-monotone gap (regression signal), 3 numeric failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use facetmono::estimators::{ScanMethod, ScanReport};
use facetmono::{monotonicity_scan, DistributionSpec, Error as CoreError, Estimate};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const DEFAULT_SEED: u64 = 42;
const SEED_ENV: &str = "FACETMONO_SEED";

#[derive(Parser)]
#[command(
    name = "facetmono",
    version,
    about = "Facet statistics of random convex hulls: Monte Carlo and quadrature estimators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a point cloud and write it as CSV
    Sample(SampleArgs),
    /// Estimate the expected facet number at one n
    Expect(ExpectArgs),
    /// Estimate over a range of n and check strict monotonicity
    Scan(ScanArgs),
    /// Half-sphere model: expectation or scan for the spherical hull
    Sphere(SphereArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "UPPER")]
enum ClassArg {
    G,
    H,
    B,
    U,
    S,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Mc,
    Quad,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct SpecArgs {
    /// Distribution class
    #[arg(long, value_enum, ignore_case = true)]
    class: ClassArg,
    /// Ambient dimension d (class S points live on the d-sphere in d+1
    /// coordinates)
    #[arg(long)]
    d: usize,
    /// Shape parameter for classes H (beta > d/2) and B (beta > -1)
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Shape parameter for class S (alpha > -1)
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Scale parameter (classes G, H, B, U)
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

impl SpecArgs {
    fn build(&self) -> Result<DistributionSpec, CliError> {
        let need_beta =
            || self.beta.ok_or_else(|| CliError::Usage("this class requires --beta".into()));
        let spec = match self.class {
            ClassArg::G => DistributionSpec::gaussian(self.d, self.sigma),
            ClassArg::H => DistributionSpec::heavy_tail(self.d, need_beta()?, self.sigma),
            ClassArg::B => DistributionSpec::beta_ball(self.d, need_beta()?, self.sigma),
            ClassArg::U => DistributionSpec::sphere_uniform(self.d, self.sigma),
            ClassArg::S => {
                let alpha = self
                    .alpha
                    .ok_or_else(|| CliError::Usage("class S requires --alpha".into()))?;
                DistributionSpec::half_sphere(self.d, alpha)
            }
        };
        spec.map_err(CliError::from)
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Number of points
    #[arg(long)]
    n: usize,
    /// Master seed (env FACETMONO_SEED overrides the default)
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExpectArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Number of points
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Monte Carlo replicates
    #[arg(long, default_value_t = 100_000)]
    replicates: u64,
    /// Absolute error budget of the quadrature estimate
    #[arg(long, default_value_t = 1e-8)]
    abs_tol: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo worker threads (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Range of n as `min:max`, inclusive
    #[arg(long, value_parser = parse_range)]
    n_range: (usize, usize),
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, default_value_t = 100_000)]
    replicates: u64,
    #[arg(long, default_value_t = 1e-8)]
    abs_tol: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SphereArgs {
    /// Height exponent alpha > -1 of the half-sphere density
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Sphere dimension d (points carry d+1 coordinates)
    #[arg(long)]
    d: usize,
    /// Single n (mutually exclusive with --n-range)
    #[arg(long, conflicts_with = "n_range")]
    n: Option<usize>,
    /// Range of n as `min:max`, inclusive
    #[arg(long, value_parser = parse_range)]
    n_range: Option<(usize, usize)>,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, default_value_t = 100_000)]
    replicates: u64,
    #[arg(long, default_value_t = 1e-8)]
    abs_tol: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_range(raw: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = raw
        .split_once(':')
        .ok_or_else(|| format!("expected min:max, got {raw:?}"))?;
    let lo: usize = lo.trim().parse().map_err(|_| format!("bad range start {lo:?}"))?;
    let hi: usize = hi.trim().parse().map_err(|_| format!("bad range end {hi:?}"))?;
    if lo >= hi {
        return Err(format!("range start {lo} must be below end {hi}"));
    }
    Ok((lo, hi))
}

enum CliError {
    Usage(String),
    Numeric(String),
    MonotoneViolation,
    Io(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(_)
            | CoreError::Domain(_)
            | CoreError::Precondition(_)
            | CoreError::Parse(_) => CliError::Usage(e.to_string()),
            CoreError::Range(_)
            | CoreError::QuadratureNoConvergence { .. }
            | CoreError::DegenerateReplicate { .. }
            | CoreError::Numeric(_) => CliError::Numeric(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::MonotoneViolation => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => format!("error: {m}"),
            CliError::Numeric(m) => format!("numeric failure: {m}"),
            CliError::MonotoneViolation => {
                "monotonicity violation: a quadrature scan reported monotone=false".into()
            }
            CliError::Io(m) => format!("io error: {m}"),
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={raw:?} is not a valid u64"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            std::io::stdout().flush().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

/// Runs `f` inside a rayon pool of the requested size (or the default pool).
fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match workers {
        None => Ok(f()),
        Some(w) => {
            if w == 0 {
                return Err(CliError::Usage("--workers must be positive".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn cmd_sample(args: &SampleArgs) -> Result<(), CliError> {
    let spec = args.spec.build()?;
    let seed = resolve_seed(args.seed)?;
    let cloud = spec.sample(args.n, seed)?;
    let mut buf = Vec::new();
    cloud.write_csv(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
    let text = String::from_utf8(buf).expect("csv is utf-8");
    write_output(&args.out, &text)?;
    eprintln!("seed: {seed}");
    Ok(())
}

/// Monte Carlo result (with its resample count) and/or quadrature result,
/// depending on the method choice.
type ExpectPair = (Option<(Estimate, u64)>, Option<Estimate>);

fn estimate_expect(
    spec: &DistributionSpec,
    n: usize,
    method: MethodArg,
    replicates: u64,
    abs_tol: f64,
    seed: u64,
) -> Result<ExpectPair, CoreError> {
    let mc = if matches!(method, MethodArg::Mc | MethodArg::Both) {
        Some(facetmono::estimators::expect_mc_detailed(spec, n, replicates, seed)?)
    } else {
        None
    };
    let quad = if matches!(method, MethodArg::Quad | MethodArg::Both) {
        let est = if spec.class() == facetmono::Class::S {
            facetmono::sphere::spherical_expect_quad(spec, n, abs_tol)?
        } else {
            facetmono::expect_quad(spec, n, abs_tol)?
        };
        Some(est)
    } else {
        None
    };
    Ok((mc, quad))
}

/// Agreement of the two routes in units of their combined error
/// (4 Monte Carlo standard errors plus the quadrature bound).
fn agreement_units(mc: &Estimate, quad: &Estimate) -> f64 {
    (quad.value - mc.value).abs() / (4.0 * mc.error + quad.error).max(f64::MIN_POSITIVE)
}

fn render_expect(
    mc: Option<(Estimate, u64)>,
    quad: Option<Estimate>,
    seed: u64,
    format: FormatArg,
) -> String {
    match (mc, quad) {
        (Some((mc, resamples)), Some(quad)) => {
            let units = agreement_units(&mc, &quad);
            match format {
                FormatArg::Json => {
                    let value = serde_json::json!({
                        "mc": ScanReport::single(mc, seed, resamples),
                        "quad": ScanReport::single(quad, seed, 0),
                        "agreement_units": [units],
                    });
                    let mut s =
                        serde_json::to_string_pretty(&value).expect("report serialization");
                    s.push('\n');
                    s
                }
                FormatArg::Csv => {
                    let mut out = String::new();
                    out.push_str("n,mc_value,mc_error,quad_value,quad_error,agreement_units\n");
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        mc.n, mc.value, mc.error, quad.value, quad.error, units
                    ));
                    out
                }
            }
        }
        (Some((mc, resamples)), None) => {
            let report = ScanReport::single(mc, seed, resamples);
            match format {
                FormatArg::Json => report.to_json(),
                FormatArg::Csv => report.to_csv(),
            }
        }
        (None, Some(quad)) => {
            let report = ScanReport::single(quad, seed, 0);
            match format {
                FormatArg::Json => report.to_json(),
                FormatArg::Csv => report.to_csv(),
            }
        }
        (None, None) => unreachable!("at least one method is always selected"),
    }
}

fn cmd_expect(args: &ExpectArgs) -> Result<(), CliError> {
    let spec = args.spec.build()?;
    let seed = resolve_seed(args.seed)?;
    let (mc, quad) = with_workers(args.workers, || {
        estimate_expect(&spec, args.n, args.method, args.replicates, args.abs_tol, seed)
    })?
    .map_err(CliError::from)?;
    let text = render_expect(mc, quad, seed, args.output.format);
    write_output(&args.output.out, &text)
}

#[allow(clippy::too_many_arguments)]
fn run_scan(
    spec: &DistributionSpec,
    (n_min, n_max): (usize, usize),
    method: MethodArg,
    replicates: u64,
    abs_tol: f64,
    seed: u64,
    workers: Option<usize>,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let scan_one = |m: ScanMethod| -> Result<ScanReport, CliError> {
        with_workers(workers, || monotonicity_scan(spec, n_min, n_max, m, seed))?
            .map_err(CliError::from)
    };
    let (text, quad_monotone) = match method {
        MethodArg::Mc => {
            let report = scan_one(ScanMethod::Mc { replicates })?;
            if !report.monotone {
                eprintln!(
                    "note: some Monte Carlo gaps are unresolved at this replicate count; \
                     see the error columns"
                );
            }
            let text = match output.format {
                FormatArg::Json => report.to_json(),
                FormatArg::Csv => report.to_csv(),
            };
            (text, None)
        }
        MethodArg::Quad => {
            let report = scan_one(ScanMethod::Quad { abs_tol })?;
            let monotone = report.monotone;
            let text = match output.format {
                FormatArg::Json => report.to_json(),
                FormatArg::Csv => report.to_csv(),
            };
            (text, Some(monotone))
        }
        MethodArg::Both => {
            let mc = scan_one(ScanMethod::Mc { replicates })?;
            let quad = scan_one(ScanMethod::Quad { abs_tol })?;
            let monotone = quad.monotone;
            let units: Vec<f64> = mc
                .estimates
                .iter()
                .zip(&quad.estimates)
                .map(|(m, q)| agreement_units(m, q))
                .collect();
            let text = match output.format {
                FormatArg::Json => {
                    let value = serde_json::json!({
                        "mc": mc,
                        "quad": quad,
                        "agreement_units": units,
                    });
                    let mut s =
                        serde_json::to_string_pretty(&value).expect("report serialization");
                    s.push('\n');
                    s
                }
                FormatArg::Csv => {
                    let mut out = String::new();
                    out.push_str("n,mc_value,mc_error,quad_value,quad_error,agreement_units\n");
                    for ((m, q), u) in mc.estimates.iter().zip(&quad.estimates).zip(&units) {
                        out.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            m.n, m.value, m.error, q.value, q.error, u
                        ));
                    }
                    out
                }
            };
            (text, Some(monotone))
        }
    };
    write_output(&output.out, &text)?;
    if quad_monotone == Some(false) {
        return Err(CliError::MonotoneViolation);
    }
    Ok(())
}

fn cmd_scan(args: &ScanArgs) -> Result<(), CliError> {
    let spec = args.spec.build()?;
    let seed = resolve_seed(args.seed)?;
    run_scan(
        &spec,
        args.n_range,
        args.method,
        args.replicates,
        args.abs_tol,
        seed,
        args.workers,
        &args.output,
    )
}

fn cmd_sphere(args: &SphereArgs) -> Result<(), CliError> {
    let spec = DistributionSpec::half_sphere(args.d, args.alpha)?;
    let seed = resolve_seed(args.seed)?;
    match (args.n, args.n_range) {
        (Some(n), None) => {
            let (mc, quad) = with_workers(args.workers, || {
                estimate_expect(&spec, n, args.method, args.replicates, args.abs_tol, seed)
            })?
            .map_err(CliError::from)?;
            let text = render_expect(mc, quad, seed, args.output.format);
            write_output(&args.output.out, &text)
        }
        (None, Some(range)) => run_scan(
            &spec,
            range,
            args.method,
            args.replicates,
            args.abs_tol,
            seed,
            args.workers,
            &args.output,
        ),
        _ => Err(CliError::Usage("provide exactly one of --n or --n-range".into())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Expect(args) => cmd_expect(args),
        Command::Scan(args) => cmd_scan(args),
        Command::Sphere(args) => cmd_sphere(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
