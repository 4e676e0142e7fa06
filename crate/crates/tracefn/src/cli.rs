//! Command-line front end: one subcommand per subsystem, machine-readable
//! CSV/JSON output, optional config file, and a tau-table cache.
//!
//! Exit codes: 0 success, 1 domain error (bad mathematical input),
//! 2 I/O or configuration error.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cusp::CuspFormCoeffs;
use crate::error::{Error, Result};
use crate::ff::PrimeField;
use crate::fourier::{fourier, fourier_naive};
use crate::kernel::KernelSpec;
use crate::kloosterman::kl_ring;
use crate::lattice::{
    count_divisor_pairs, count_units_in_box, lattice_sum, IdealLattice, Profile,
};
use crate::mobius::{fm_scan, pgl2_order};
use crate::nf::{NfElement, NumberField, Rat};
use crate::trace::TraceFunction;
use crate::twist::{exponent_fit, run_twist, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Optional config file mirroring the flags; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub cache_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub kernel: Option<String>,
    pub p: Option<u64>,
    pub tau: Option<f64>,
    pub degree: Option<u32>,
    #[serde(rename = "D")]
    pub d_datum: Option<i64>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path.extension().map_or(false, |e| e == "json");
        if is_json {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "tracefn",
    version,
    about = "Trace functions on prime fields: Fourier-Mobius scans, Kloosterman sums, \
             ideal-lattice counts, and Hecke-eigenvalue twist experiments"
)]
pub struct Cli {
    /// Optional TOML/JSON config mirroring the flags (flags win).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for the parallel scans (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed reserved for randomized modes; current subcommands are
    /// deterministic and ignore it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Cache directory (overrides TRACEFN_CACHE).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// csv or json where a choice exists.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print a kernel's value table (columns x, re, im), optionally of
    /// its unitary Fourier transform.
    Table(TableArgs),
    /// Exhaustive correlation scan over PGL2(F_p): the empirical
    /// symmetry group of the kernel's Fourier transform.
    FmScan(FmScanArgs),
    /// Ring Kloosterman sum over Z/c: pairs s1 s2 = d weighted by
    /// e((a s1 + b s2)/c).
    Kl(KlArgs),
    /// Ideal-lattice counting: Poisson main-term comparison, unit
    /// counts, divisor-pair counts.
    Lattice(LatticeArgs),
    /// Twisted sums sum_n lambda(n) K(n) V(n/p) over a prime grid with
    /// a power-saving exponent fit.
    Twist(TwistArgs),
    /// Ramanujan tau table: exact coefficients, CSV export, binary cache.
    Tau(TauArgs),
    /// Wall-clock timings for the transform, the group scan, and a
    /// Kloosterman grid.
    Bench,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    /// Kernel spec, e.g. 'kloosterman:2' or 'prod(legendre,mult:4)'.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Odd prime modulus.
    #[arg(long)]
    pub p: Option<u64>,
    /// Emit the Fourier transform of the kernel instead.
    #[arg(long)]
    pub fourier: bool,
}

#[derive(Args, Debug)]
pub struct FmScanArgs {
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub p: Option<u64>,
    /// Detection threshold in (0,1); members are classes with |C| >= tau.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Args, Debug)]
pub struct KlArgs {
    #[arg(long)]
    pub a: i64,
    #[arg(long)]
    pub b: i64,
    #[arg(long, default_value_t = 1)]
    pub d: i64,
    #[arg(long)]
    pub c: i64,
}

#[derive(Args, Debug)]
pub struct LatticeArgs {
    #[command(subcommand)]
    pub cmd: LatticeCommand,
}

#[derive(Subcommand, Debug)]
pub enum LatticeCommand {
    /// Compare the lattice sum of a smooth profile with its Poisson
    /// main term (R^n / Nm(I)) f^(0).
    VerifyLpc(VerifyLpcArgs),
    /// Count generators of (m0) with |m|_inf < radius.
    CountUnits(CountUnitsArgs),
    /// Count ordered pairs m n = k in the ideal with both factors in
    /// the box.
    CountDivisors(CountDivisorsArgs),
}

#[derive(Args, Debug)]
pub struct FieldArgs {
    /// Field degree: 1 (rationals) or 2 (quadratic).
    #[arg(long)]
    pub degree: Option<u32>,
    /// Squarefree datum D of Q(sqrt(D)); required when degree = 2.
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<i64>,
}

#[derive(Args, Debug)]
pub struct VerifyLpcArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// Ideal generator, written 'a' or 'a,b' (rationals allowed: '1/5').
    #[arg(long, default_value = "1")]
    pub generator: String,
    /// Scaling parameter R.
    #[arg(long)]
    pub radius: f64,
    /// gaussian or bump.
    #[arg(long, default_value = "gaussian")]
    pub profile: String,
}

#[derive(Args, Debug)]
pub struct CountUnitsArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// The element m0 generating the ideal, written 'a' or 'a,b'.
    #[arg(long)]
    pub m0: String,
    #[arg(long)]
    pub radius: f64,
}

#[derive(Args, Debug)]
pub struct CountDivisorsArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value = "1")]
    pub generator: String,
    /// The product k (must lie in the ideal squared), written 'a' or 'a,b'.
    #[arg(long)]
    pub k: String,
    #[arg(long)]
    pub radius: f64,
}

#[derive(Args, Debug)]
pub struct TwistArgs {
    /// Eigenform; 'delta' (weight 12, level 1) is the one built in.
    #[arg(long, default_value = "delta")]
    pub form: String,
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub pmin: u64,
    #[arg(long)]
    pub pmax: u64,
    /// Thin the grid to at most this many primes (log-spaced).
    #[arg(long)]
    pub max_primes: Option<usize>,
    /// Where to write the JSON summary (CSV rows go to --out/stdout).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TauArgs {
    /// Table extent N.
    #[arg(long)]
    pub n: usize,
    /// Also write/update the binary cache for this extent.
    #[arg(long)]
    pub cache: bool,
}

/// Entry point for the binary.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version with success exits
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: Cli) -> Result<()> {
    let file_cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(n) = cli.threads.or(file_cfg.threads) {
        // best effort; a pool may already exist in this process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cache_dir = cli
        .cache_dir
        .clone()
        .or(file_cfg.cache_dir.clone())
        .or_else(|| std::env::var_os("TRACEFN_CACHE").map(PathBuf::from))
        .unwrap_or_else(|| std::env::temp_dir().join("tracefn-cache"));
    let format = cli.format.or(file_cfg.format);

    let output = match &cli.command {
        Command::Table(args) => {
            let kernel = resolve(args.kernel.clone(), file_cfg.kernel.clone(), "--kernel")?;
            let p = resolve(args.p, file_cfg.p, "--p")?;
            table_command(&kernel, p, args.fourier, format)?
        }
        Command::FmScan(args) => {
            let kernel = resolve(args.kernel.clone(), file_cfg.kernel.clone(), "--kernel")?;
            let p = resolve(args.p, file_cfg.p, "--p")?;
            let tau = args.tau.or(file_cfg.tau).unwrap_or(0.5);
            fm_scan_command(&kernel, p, tau, format)?
        }
        Command::Kl(args) => kl_command(args)?,
        Command::Lattice(args) => lattice_command(args, &file_cfg)?,
        Command::Twist(args) => {
            return twist_command(args, &file_cfg, &cache_dir, cli.out.as_deref());
        }
        Command::Tau(args) => tau_command(args, &cache_dir)?,
        Command::Bench => bench_command()?,
    };

    write_output(cli.out.as_deref(), &output)
}

fn resolve<T>(flag: Option<T>, cfg: Option<T>, name: &str) -> Result<T> {
    flag.or(cfg)
        .ok_or_else(|| Error::Config(format!("{name} is required (flag or config file)")))
}

fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn build_kernel(spec: &str, p: u64) -> Result<TraceFunction> {
    let field = Arc::new(PrimeField::new(p)?);
    KernelSpec::parse(spec)?.build(field)
}

/// CSV table of a kernel: columns x, re, im.
pub fn table_csv(k: &TraceFunction) -> String {
    let mut s = String::from("x,re,im\n");
    for (x, v) in k.values().iter().enumerate() {
        s.push_str(&format!("{x},{},{}\n", v.re, v.im));
    }
    s
}

#[derive(Serialize)]
struct TableJson {
    p: u64,
    kind: String,
    conductor_bound: f64,
    fourier_eligible: bool,
    values: Vec<[f64; 2]>,
}

/// JSON table of a kernel; values as [re, im] pairs.
pub fn table_json(k: &TraceFunction) -> String {
    let doc = TableJson {
        p: k.p(),
        kind: k.kind().label(),
        conductor_bound: k.conductor_bound(),
        fourier_eligible: k.fourier_eligible(),
        values: k.values().iter().map(|v| [v.re, v.im]).collect(),
    };
    serde_json::to_string(&doc).expect("table serializes")
}

fn table_command(
    kernel: &str,
    p: u64,
    transform: bool,
    format: Option<OutputFormat>,
) -> Result<String> {
    let mut k = build_kernel(kernel, p)?;
    if transform {
        k = fourier(&k);
    }
    Ok(match format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => table_csv(&k),
        OutputFormat::Json => table_json(&k) + "\n",
    })
}

fn fm_scan_command(
    kernel: &str,
    p: u64,
    tau: f64,
    format: Option<OutputFormat>,
) -> Result<String> {
    let k = build_kernel(kernel, p)?;
    let report = fm_scan(&k, tau)?;
    if !report.threshold_gap_ok() {
        eprintln!(
            "warning: threshold separation is thin (min member {:?} vs max non-member {}); \
             small p or a large conductor can blur the gap",
            report.min_member_value(),
            report.max_nonmember
        );
    }
    Ok(match format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => report.to_json() + "\n",
        OutputFormat::Csv => {
            let mut s = String::from("a,b,c,d,abs_corr\n");
            for (m, v) in report.members.iter().zip(&report.values) {
                s.push_str(&format!("{},{},{},{},{v}\n", m[0], m[1], m[2], m[3]));
            }
            s
        }
    })
}

fn kl_command(args: &KlArgs) -> Result<String> {
    let v = kl_ring(args.a, args.b, args.d, args.c)?;
    let mut s = String::from("a,b,d,c,re,im,abs\n");
    s.push_str(&format!(
        "{},{},{},{},{},{},{}\n",
        args.a,
        args.b,
        args.d,
        args.c,
        v.re,
        v.im,
        v.norm()
    ));
    Ok(s)
}

/// Parse 'a' or 'a,b' with rational components like '3/2'.
pub fn parse_element(s: &str) -> Result<NfElement> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.is_empty() || parts.len() > 2 {
        return Err(Error::Config(format!("bad element '{s}' (want 'a' or 'a,b')")));
    }
    let x = parse_rat(parts[0])?;
    let y = if parts.len() == 2 {
        parse_rat(parts[1])?
    } else {
        Rat::new(0, 1)
    };
    Ok(NfElement::new(x, y))
}

fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = |_| Error::Config(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().map_err(bad)?;
            let d: i128 = d.trim().parse().map_err(bad)?;
            if d == 0 {
                return Err(Error::Config(format!("zero denominator in '{s}'")));
            }
            Ok(Rat::new(n, d))
        }
        None => Ok(Rat::from_integer(s.parse().map_err(bad)?)),
    }
}

fn field_from_args(args: &FieldArgs, cfg: &FileConfig) -> Result<NumberField> {
    let degree = args.degree.or(cfg.degree).unwrap_or(1);
    NumberField::from_spec(degree, args.d.or(cfg.d_datum))
}

#[derive(Serialize)]
struct LpcJson<'a> {
    inputs: LpcInputs<'a>,
    value: f64,
    main_term: f64,
    ratio: f64,
    dual_total: f64,
    error_bound: f64,
}

#[derive(Serialize)]
struct LpcInputs<'a> {
    degree: u32,
    #[serde(rename = "D")]
    d: i64,
    generator: &'a str,
    norm: f64,
    radius: f64,
    profile: &'a str,
}

fn lattice_command(args: &LatticeArgs, cfg: &FileConfig) -> Result<String> {
    match &args.cmd {
        LatticeCommand::VerifyLpc(a) => {
            let field = field_from_args(&a.field, cfg)?;
            let lat = IdealLattice::principal(field.clone(), parse_element(&a.generator)?)?;
            let profile = Profile::from_name(&a.profile)?;
            let rep = lattice_sum(&lat, profile, a.radius)?;
            let doc = LpcJson {
                inputs: LpcInputs {
                    degree: field.degree(),
                    d: field.datum(),
                    generator: &a.generator,
                    norm: lat.norm_f64(),
                    radius: a.radius,
                    profile: profile.name(),
                },
                value: rep.value,
                main_term: rep.main_term,
                ratio: if rep.main_term != 0.0 {
                    rep.value / rep.main_term
                } else {
                    0.0
                },
                dual_total: rep.dual_total,
                error_bound: rep.error_bound,
            };
            Ok(serde_json::to_string(&doc).expect("serializes") + "\n")
        }
        LatticeCommand::CountUnits(a) => {
            let field = field_from_args(&a.field, cfg)?;
            let m0 = parse_element(&a.m0)?;
            let count = count_units_in_box(&field, m0, a.radius)?;
            Ok(format!(
                "{{\"inputs\":{{\"degree\":{},\"D\":{},\"m0\":\"{}\",\"radius\":{}}},\"count\":{}}}\n",
                field.degree(),
                field.datum(),
                a.m0,
                a.radius,
                count
            ))
        }
        LatticeCommand::CountDivisors(a) => {
            let field = field_from_args(&a.field, cfg)?;
            let lat = IdealLattice::principal(field.clone(), parse_element(&a.generator)?)?;
            let k = parse_element(&a.k)?;
            let count = count_divisor_pairs(&lat, k, a.radius)?;
            Ok(format!(
                "{{\"inputs\":{{\"degree\":{},\"D\":{},\"generator\":\"{}\",\"k\":\"{}\",\"radius\":{}}},\"count\":{}}}\n",
                field.degree(),
                field.datum(),
                a.generator,
                a.k,
                a.radius,
                count
            ))
        }
    }
}

/// CSV rows of a twist run: p, re, im, abs, trivial, ratio.
pub fn twist_csv(run: &crate::twist::TwistRun) -> String {
    let mut s = String::from("p,re,im,abs,trivial,ratio\n");
    for r in &run.rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.p, r.re, r.im, r.abs, r.trivial, r.ratio
        ));
    }
    s
}

fn twist_command(
    args: &TwistArgs,
    cfg: &FileConfig,
    cache_dir: &Path,
    out: Option<&Path>,
) -> Result<()> {
    if args.form != "delta" {
        return Err(Error::Config(format!(
            "unknown form '{}'; 'delta' is the built-in eigenform",
            args.form
        )));
    }
    let kernel = resolve(args.kernel.clone(), cfg.kernel.clone(), "--kernel")?;
    let spec = KernelSpec::parse(&kernel)?;
    let mut primes: Vec<u64> = (args.pmin..=args.pmax)
        .filter(|&n| crate::ff::is_prime(n) && n > 2)
        .collect();
    if let Some(cap) = args.max_primes {
        primes = thin_log_spaced(&primes, cap);
    }
    if primes.is_empty() {
        return Err(Error::Config(format!(
            "no odd primes in [{}, {}]",
            args.pmin, args.pmax
        )));
    }
    let window = Window::default();
    let need = window.required_extent(*primes.last().unwrap());
    let coeffs = load_or_build_tau(cache_dir, need)?;
    let run = run_twist(&coeffs, &spec, &primes, &window)?;
    let fit = exponent_fit(&run)?;

    write_output(out, &twist_csv(&run))?;
    let summary = format!(
        "{{\"delta_emp\":{},\"stderr\":{},\"pass\":{},\"grid\":{:?}}}\n",
        fit.delta_emp,
        fit.stderr,
        fit.passed(),
        primes
    );
    match &args.summary {
        Some(path) => write_output(Some(path), &summary),
        None => {
            eprint!("{summary}");
            Ok(())
        }
    }
}

/// Keep at most `cap` entries, approximately log-spaced.
pub fn thin_log_spaced(primes: &[u64], cap: usize) -> Vec<u64> {
    if primes.len() <= cap || cap == 0 {
        return primes.to_vec();
    }
    let lo = (primes[0] as f64).ln();
    let hi = (primes[primes.len() - 1] as f64).ln();
    let mut out: Vec<u64> = Vec::with_capacity(cap);
    for i in 0..cap {
        let target = (lo + (hi - lo) * i as f64 / (cap - 1) as f64).exp();
        let p = *primes
            .iter()
            .min_by(|&&a, &&b| {
                let da = (a as f64 - target).abs();
                let db = (b as f64 - target).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
    out
}

/// Load the tau table from cache or build and cache it. Cache files are
/// keyed by extent, rounded up to 10^4 blocks so nearby requests share.
pub fn load_or_build_tau(cache_dir: &Path, need: usize) -> Result<CuspFormCoeffs> {
    let bucket = need.div_ceil(10_000).max(1) * 10_000;
    let path = cache_dir.join(format!("tau_{bucket}.bin"));
    if path.exists() {
        match CuspFormCoeffs::read_cache(&path) {
            Ok(c) if c.extent() >= need => return Ok(c),
            _ => {} // stale or corrupt; rebuild below
        }
    }
    let coeffs = CuspFormCoeffs::extend_tau(bucket)?;
    coeffs.write_cache(&path)?;
    Ok(coeffs)
}

fn tau_command(args: &TauArgs, cache_dir: &Path) -> Result<String> {
    let coeffs = if args.cache {
        load_or_build_tau(cache_dir, args.n)?
    } else {
        CuspFormCoeffs::extend_tau(args.n)?
    };
    let mut s = String::from("n,tau\n");
    for n in 1..=args.n.min(coeffs.extent()) {
        s.push_str(&format!("{n},{}\n", coeffs.tau(n)?));
    }
    Ok(s)
}

#[derive(Serialize)]
struct DftBench {
    p: u64,
    fast_ms: f64,
    naive_ms: Option<f64>,
    speedup: Option<f64>,
}

#[derive(Serialize)]
struct ScanBench {
    p: u64,
    elements: u64,
    elapsed_ms: f64,
}

#[derive(Serialize)]
struct KlGridBench {
    c_max: u64,
    elapsed_ms: f64,
}

#[derive(Serialize)]
struct BenchReport {
    dft: Vec<DftBench>,
    fm_scan: Vec<ScanBench>,
    kl_grid: KlGridBench,
}

fn bench_command() -> Result<String> {
    let mut dft = Vec::new();
    for &p in &[10_007u64, 100_003] {
        let field = Arc::new(PrimeField::new(p)?);
        let k = TraceFunction::legendre(field)?;
        let t0 = Instant::now();
        let fast = fourier(&k);
        let fast_ms = t0.elapsed().as_secs_f64() * 1e3;
        let naive_ms = if p <= 20_000 {
            let t1 = Instant::now();
            let slow = fourier_naive(&k);
            let ms = t1.elapsed().as_secs_f64() * 1e3;
            // spot check agreement while we have both tables
            for x in (0..p).step_by(997) {
                assert!((fast.value(x) - slow.value(x)).norm() < 1e-8);
            }
            Some(ms)
        } else {
            None
        };
        dft.push(DftBench {
            p,
            fast_ms,
            naive_ms,
            speedup: naive_ms.map(|n| n / fast_ms),
        });
    }

    let mut scans = Vec::new();
    for &p in &[53u64, 101] {
        let field = Arc::new(PrimeField::new(p)?);
        let k = TraceFunction::kloosterman(field, 2)?;
        let t0 = Instant::now();
        let report = fm_scan(&k, 0.5)?;
        let elapsed = t0.elapsed().as_secs_f64() * 1e3;
        debug_assert!(!report.members.is_empty());
        scans.push(ScanBench {
            p,
            elements: pgl2_order(p),
            elapsed_ms: elapsed,
        });
    }

    let c_max = 10_000u64;
    let t0 = Instant::now();
    use rayon::prelude::*;
    let total: f64 = (1..=c_max)
        .into_par_iter()
        .map(|c| kl_ring(1, 1, 1, c as i64).map(|v| v.norm()).unwrap_or(0.0))
        .sum();
    let kl_elapsed = t0.elapsed().as_secs_f64() * 1e3;
    debug_assert!(total > 0.0);

    let report = BenchReport {
        dft,
        fm_scan: scans,
        kl_grid: KlGridBench {
            c_max,
            elapsed_ms: kl_elapsed,
        },
    };
    Ok(serde_json::to_string_pretty(&report).expect("serializes") + "\n")
}
