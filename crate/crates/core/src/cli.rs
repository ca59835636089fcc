//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::annulus::{annulus, Mode};
use crate::bump::BumpSpec;
use crate::diophantine::{
    check_density_condition, dimension, find_witnesses, sample_support, verify_support_chain, ApproxTarget,
    DensityCondition, HKind,
};
use crate::error::{Error, Result};
use crate::fm::{FmOperator, FmParams, FmTemplate};
use crate::gauss::{divisors, GaussInt};
use crate::measure::{decay_scan, Measure, MeasureSpec};
use crate::quadrature::gl_rule;
use crate::report::{self, RunManifest};
use crate::search::{build_measure, SearchConfig};
use crate::stats::{divisor_bound_stat, prime_count_stat, prime_ratio_spread};
use crate::window::WindowSpec;

pub const DEFAULT_SEED: u64 = 0x005a_1e2d;

#[derive(Debug, Parser, Serialize)]
#[command(name = "salem2d", version, about = "Gaussian-integer Fourier coefficients, staged Salem measures and scans")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Worker threads; falls back to SALEM2D_THREADS, then to all cores.
    #[arg(long, global = true, env = "SALEM2D_THREADS")]
    threads: Option<usize>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
enum Command {
    /// All Gaussian divisors of ℓ.
    Divisors(DivisorsArgs),
    /// Gaussian primes with sup-norm in (M/2, M].
    Primes(PrimesArgs),
    /// Dyadic maxima of ln|D(ℓ)| ln ln|ℓ| / ln|ℓ|.
    DivisorStats(DivisorStatsArgs),
    /// |P(M)| ln M / M² for a list of M.
    PrimeStats(PrimeStatsArgs),
    /// Normalization, transform and decay checks of the bump.
    BumpSelftest(BumpArgs),
    /// One Fourier coefficient of F_M.
    FmCoeff(FmCoeffArgs),
    /// Dyadic shell maxima of weighted |F̂_M(ℓ)|.
    FmScan(FmScanArgs),
    /// Run the stage search and write a measure spec.
    BuildMeasure(BuildArgs),
    /// Sample |μ̂_k|/g on dyadic shells.
    DecayScan(DecayArgs),
    /// Density of a spec at a point.
    DensityEval(DensityEvalArgs),
    /// Witness table for a point.
    Membership(MembershipArgs),
    /// Support-chain witnesses for sampled density-positive points.
    VerifySupport(VerifyArgs),
    /// |Q(M)| ε(M)^a h(M) / M^a for a list of M.
    DensityCheck(DensityCheckArgs),
    /// min(2, 4/(1+τ)).
    Dimension(DimensionArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum ModeArg {
    All,
    Primes,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::All => Mode::All,
            ModeArg::Primes => Mode::Primes,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum HKindArg {
    Const,
    Log,
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let v = parse_reals(s)?;
    match v[..] {
        [a, b] => Ok([a, b]),
        _ => Err(format!("expected two comma-separated numbers, got {s:?}")),
    }
}

fn parse_ball(s: &str) -> std::result::Result<[f64; 3], String> {
    let v = parse_reals(s)?;
    match v[..] {
        [a, b, c] => Ok([a, b, c]),
        _ => Err(format!("expected cx,cy,r, got {s:?}")),
    }
}

fn parse_reals(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"))).collect()
}

fn parse_gauss(s: &str) -> std::result::Result<GaussInt, String> {
    s.parse::<GaussInt>().map_err(|e| e.to_string())
}

#[derive(Debug, Args, Serialize)]
struct OutArg {
    /// Output file; a manifest is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct DivisorsArgs {
    #[arg(long, value_parser = parse_gauss, allow_hyphen_values = true)]
    ell: GaussInt,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args, Serialize)]
struct PrimesArgs {
    #[arg(long = "M")]
    m: f64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args, Serialize)]
struct DivisorStatsArgs {
    /// Largest sup-norm scanned.
    #[arg(long, default_value_t = 2000)]
    max: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args, Serialize)]
struct PrimeStatsArgs {
    #[arg(long = "M-list", value_delimiter = ',', default_values_t = [32.0, 64.0, 128.0, 256.0, 512.0, 1024.0])]
    m_list: Vec<f64>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args, Serialize)]
struct BumpArgs {
    #[arg(long = "K", default_value_t = crate::bump::DEFAULT_K)]
    k: u32,
}

#[derive(Debug, Args, Serialize)]
struct FmArgs {
    #[arg(long = "M")]
    m: f64,
    #[arg(long)]
    tau: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::All)]
    mode: ModeArg,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0,0")]
    theta: [f64; 2],
}

impl FmArgs {
    fn operator(&self) -> Result<FmOperator> {
        FmOperator::new(FmParams::new(self.m, self.tau).with_mode(self.mode.into()).with_theta(self.theta))
    }
}

#[derive(Debug, Args, Serialize)]
struct FmCoeffArgs {
    #[command(flatten)]
    fm: FmArgs,
    #[arg(long, value_parser = parse_gauss, allow_hyphen_values = true)]
    ell: GaussInt,
}

#[derive(Debug, Args, Serialize)]
struct FmScanArgs {
    #[command(flatten)]
    fm: FmArgs,
    /// Largest |ℓ| scanned.
    #[arg(long, default_value_t = 512)]
    max_l: i64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args, Serialize)]
struct BuildArgs {
    #[arg(long)]
    tau: f64,
    /// Window ball as cx,cy,r.
    #[arg(long, value_parser = parse_ball, allow_hyphen_values = true, default_value = "0,0,1")]
    ball: [f64; 3],
    /// Number of stages.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::All)]
    mode: ModeArg,
    /// Largest verification grid in points.
    #[arg(long, default_value_t = 1 << 24)]
    grid_budget: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct DecayArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 6)]
    shells: usize,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args, Serialize)]
struct DensityEvalArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    x: [f64; 2],
}

#[derive(Debug, Args, Serialize)]
struct MembershipArgs {
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    x: [f64; 2],
    #[arg(long)]
    tau: f64,
    #[arg(long)]
    qmax: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::All)]
    mode: ModeArg,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0,0")]
    theta: [f64; 2],
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 10_000_000)]
    max_proposals: u64,
}

#[derive(Debug, Args, Serialize)]
struct DensityCheckArgs {
    #[arg(long)]
    a: f64,
    #[arg(long, value_enum, default_value_t = HKindArg::Const)]
    h_kind: HKindArg,
    /// Constant factor of h.
    #[arg(long, default_value_t = 1.0)]
    h_const: f64,
    #[arg(long = "M-list", value_delimiter = ',', required = true)]
    m_list: Vec<f64>,
    #[arg(long, default_value_t = 2.0)]
    tau: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::All)]
    mode: ModeArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args, Serialize)]
struct DimensionArgs {
    #[arg(long)]
    tau: f64,
}

/// `a+bi` with the shortest round-trip decimal for each part.
pub fn fmt_complex(z: Complex64) -> String {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    let re = if z.re == 0.0 { 0.0 } else { z.re };
    if im < 0.0 {
        format!("{re}-{}i", -im)
    } else {
        format!("{re}+{im}i")
    }
}

struct Ctx {
    argv: Vec<String>,
    config: String,
    seed: u64,
    started: Instant,
}

impl Ctx {
    fn emit(&self, out: &Path, contents: &str, op: &str) -> Result<()> {
        let mut m = RunManifest::new(self.argv.clone(), &self.config, self.seed);
        let secs = self.started.elapsed().as_secs_f64();
        m.wall_clock_seconds = secs;
        m.timings.push(report::OpTiming { op: op.to_owned(), seconds: secs });
        report::write_with_manifest(out, contents, &m)?;
        Ok(())
    }
}

fn to_json(v: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn load_measure(path: &Path) -> Result<Measure> {
    let text = std::fs::read_to_string(path)?;
    Measure::new(MeasureSpec::from_json(&text)?)
}

/// Run with explicit arguments, writing to `stdout`/`stderr`; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 3;
        }
    };
    let ctx = Ctx {
        argv: args.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        config: serde_json::to_string(&cli.command).unwrap_or_default(),
        seed: cli.seed,
        started: Instant::now(),
    };
    match pool.install(|| dispatch(&cli.command, &ctx)) {
        Ok(stdout) => {
            print!("{stdout}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Run a parsed command and return what it prints on success.
fn dispatch(cmd: &Command, ctx: &Ctx) -> Result<String> {
    match cmd {
        Command::Divisors(a) => {
            let d = divisors(a.ell)?;
            let doc =
                json!({ "schema_version": report::SCHEMA_VERSION, "ell": a.ell, "count": d.len(), "divisors": d });
            finish(ctx, &a.out, to_json(&doc)?, "divisors")
        }
        Command::Primes(a) => {
            let ann = annulus(a.m, Mode::Primes)?;
            let doc = json!({
                "schema_version": report::SCHEMA_VERSION,
                "M": a.m,
                "count": ann.len(),
                "primes": ann.members(),
            });
            finish(ctx, &a.out, to_json(&doc)?, "primes")
        }
        Command::DivisorStats(a) => {
            let st = divisor_bound_stat(a.max)?;
            let summary = format!("global_max {} at {}\n", report::fmt_real(st.global_max), st.global_argmax);
            finish_table(ctx, &a.out, &st.rows, summary, "divisor-stats")
        }
        Command::PrimeStats(a) => {
            let rows = prime_count_stat(&a.m_list)?;
            let summary = format!("spread {}\n", report::fmt_real(prime_ratio_spread(&rows)));
            finish_table(ctx, &a.out, &rows, summary, "prime-stats")
        }
        Command::BumpSelftest(a) => bump_selftest(a.k),
        Command::FmCoeff(a) => {
            let f = a.fm.operator()?;
            Ok(fmt_complex(f.coeff(a.ell)?) + "\n")
        }
        Command::FmScan(a) => {
            let f = a.fm.operator()?;
            let rows = f.bound_scan(a.max_l)?;
            let summary = format!("max {}\n", report::fmt_real(crate::fm::scan_max(&rows)));
            finish_table(ctx, &a.out, &rows, summary, "fm-scan")
        }
        Command::BuildMeasure(a) => {
            let window = WindowSpec::new([a.ball[0], a.ball[1]], a.ball[2], BumpSpec::default())?;
            let cfg = SearchConfig { grid_budget: a.grid_budget, ..SearchConfig::default() };
            let spec = build_measure(window, FmTemplate::new(a.tau, a.mode.into()), a.k, &cfg)?;
            let text = spec.to_json()? + "\n";
            ctx.emit(&a.out, &text, "build-measure")?;
            let mut s = String::new();
            for st in &spec.stages {
                let _ = writeln!(s, "M={} delta={} grid_margin={}", st.m, st.delta, st.grid_margin.unwrap_or(f64::NAN));
            }
            Ok(s)
        }
        Command::DecayScan(a) => {
            let mut m = load_measure(&a.spec)?;
            let rep = decay_scan(&mut m, a.shells, a.samples)?;
            let text = report::decay_report_csv(&rep)?;
            match &a.out.out {
                Some(p) => {
                    ctx.emit(p, &text, "decay-scan")?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
        Command::DensityEval(a) => {
            let m = load_measure(&a.spec)?;
            Ok(format!("{}\n", m.density(a.x)))
        }
        Command::Membership(a) => {
            let t = ApproxTarget::new(a.tau, a.qmax).with_mode(a.mode.into()).with_theta(a.theta);
            let ws = find_witnesses(a.x, &t)?;
            finish_table(ctx, &a.out, &ws, String::new(), "membership")
        }
        Command::VerifySupport(a) => {
            let m = load_measure(&a.spec)?;
            let pts = sample_support(&m, a.samples, ctx.seed, a.max_proposals)?;
            let mut chains = Vec::with_capacity(pts.len());
            for x in &pts {
                chains.push(json!({ "x": x, "chain": verify_support_chain(&m, *x)? }));
            }
            let doc = json!({
                "schema_version": report::SCHEMA_VERSION,
                "seed": ctx.seed,
                "samples": pts.len(),
                "passed": chains.len(),
                "points": chains,
            });
            to_json(&doc)
        }
        Command::DensityCheck(a) => {
            let h = match a.h_kind {
                HKindArg::Const => HKind::Const(a.h_const),
                HKindArg::Log => HKind::Log(a.h_const),
            };
            let t = ApproxTarget::new(a.tau, 1.0).with_mode(a.mode.into());
            let rows = check_density_condition(&t, &DensityCondition { a: a.a, h, m_list: a.m_list.clone() })?;
            let failed = rows.iter().filter(|r| !r.holds).count();
            finish_table(ctx, &a.out, &rows, format!("failed {failed}\n"), "density-check")
        }
        Command::Dimension(a) => Ok(format!("{}\n", dimension(a.tau)?)),
    }
}

fn finish(ctx: &Ctx, out: &OutArg, text: String, op: &str) -> Result<String> {
    match &out.out {
        Some(p) => {
            ctx.emit(p, &text, op)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn finish_table<R: report::CsvRecord>(
    ctx: &Ctx,
    out: &OutArg,
    rows: &[R],
    summary: String,
    op: &str,
) -> Result<String> {
    let text = report::to_csv(rows)?;
    match &out.out {
        Some(p) => {
            ctx.emit(p, &text, op)?;
            Ok(summary)
        }
        None => Ok(text + &summary),
    }
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    tol: f64,
    pass: bool,
}

fn bump_selftest(k: u32) -> Result<String> {
    let spec = BumpSpec::new(k)?;
    let mut checks = Vec::new();
    let mass = gl_rule(20).composite(-1.0, 1.0, 8, |t| spec.phi1(t));
    checks.push(Check { name: "unit_mass", value: (mass - 1.0).abs(), tol: 1e-12, pass: (mass - 1.0).abs() <= 1e-12 });
    let h0 = (spec.phi_hat1(0.0)? - 1.0).abs();
    checks.push(Check { name: "transform_at_zero", value: h0, tol: 1e-10, pass: h0 <= 1e-10 });
    let mut parts: f64 = 0.0;
    for t in [4.0, 5.5, 8.0, 13.25] {
        parts = parts.max((spec.phi_hat1(t)? - spec.phi_hat1_quadrature(t)?).abs());
    }
    checks.push(Check { name: "parts_vs_quadrature", value: parts, tol: 1e-9, pass: parts <= 1e-9 });
    let b = spec.decay_bound();
    let mut worst: f64 = 0.0;
    let mut t = 0.05;
    while t < 200.0 {
        worst = worst.max(spec.phi_hat1(t)?.abs() / b.eval(t));
        t *= 1.07;
    }
    checks.push(Check { name: "decay_bound_ratio", value: worst, tol: 1.0, pass: worst <= 1.0 });
    let pass = checks.iter().all(|c| c.pass);
    let doc = json!({ "schema_version": report::SCHEMA_VERSION, "K": k, "checks": checks, "pass": pass });
    let text = to_json(&doc)?;
    if pass {
        Ok(text)
    } else {
        Err(Error::Verification(format!("bump self-test failed:\n{text}")))
    }
}
