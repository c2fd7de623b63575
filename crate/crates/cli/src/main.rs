//! Command-line front end: ordinal patterns, allowed-set enumeration,
//! commuter enclosures, range gaps, the threshold table, invariant suites,
//! and plot-data emitters.
//!
//! Exit codes: 0 success, 1 verification failure, 2 domain error (ties,
//! undefined quantities), 64 usage.

mod cache;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use tentmorph::bounds::{self, BoundsError};
use tentmorph::commuter::{CommuterError, CommuterEvaluator};
use tentmorph::numerics::{Rational, UnitPoint};
use tentmorph::patterns::{self, PatternError};
use tentmorph::tentmap::{TentMap, TentMapError};
use tentmorph::verify::{self, Suite};

const EXIT_VERIFICATION: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "tentmorph",
    version,
    about = "Exact ordinal-pattern analysis for symmetric tent maps",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
    Text,
}

#[derive(Args, Clone)]
struct CacheOpts {
    /// Single-file JSON result cache (overridden by TENTMORPH_CACHE).
    #[arg(long, value_name = "PATH")]
    cache: Option<PathBuf>,
    /// Recompute, and audit any existing cache entry against the fresh
    /// bytes.
    #[arg(long)]
    no_cache: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the ordinal pattern of a point.
    Pat {
        /// Tent-map height as an exact rational in (1/2, 1].
        #[arg(long)]
        mu: Rational,
        /// Starting point in [0, 1].
        #[arg(long)]
        x: UnitPoint,
        /// Pattern length.
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        out: OutFormat,
    },
    /// Enumerate the allowed patterns of one length.
    Allow {
        #[arg(long)]
        mu: Rational,
        #[arg(long)]
        n: usize,
        /// Highest length accepted.
        #[arg(long, default_value_t = patterns::DEFAULT_MAX_PATTERN_LEN)]
        max_n: usize,
        #[arg(long, value_enum, default_value_t = OutFormat::Json)]
        out: OutFormat,
        #[command(flatten)]
        cache: CacheOpts,
    },
    /// Evaluate the commuter enclosure at a point.
    Commuter {
        #[arg(long)]
        mu: Rational,
        #[arg(long)]
        x: UnitPoint,
        #[arg(long, default_value_t = 40)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = OutFormat::Json)]
        out: OutFormat,
    },
    /// List certified gaps in the range of the commuter.
    Gaps {
        #[arg(long)]
        mu: Rational,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 40)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        out: OutFormat,
    },
    /// Compute threshold-table rows (exact and estimated columns).
    Table1 {
        #[arg(long, default_value_t = 4)]
        nmin: usize,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
        /// Bisection tolerance (tightened automatically near rendering
        /// boundaries).
        #[arg(long, default_value = "1e-7")]
        tol: Rational,
        /// Compare against the embedded reference values; nonzero exit on
        /// mismatch.
        #[arg(long)]
        check: bool,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        out: OutFormat,
        #[command(flatten)]
        cache: CacheOpts,
    },
    /// Run named invariant suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Emit conjecture-evidence rows over a grid of heights.
    Conjectures {
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 40)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        out: OutFormat,
    },
    /// Emit plot data: 1 = iterate polylines, 2 = commuter graph,
    /// 3 = conjecture evidence.
    Figure {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
        #[arg(long, default_value = "3/4")]
        mu: Rational,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
    },
}

/// Failures mapped onto the exit-code contract.
enum Failure {
    Usage(String),
    Domain(String),
    Verification(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Domain(_) => EXIT_DOMAIN,
            Failure::Verification(_) => EXIT_VERIFICATION,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<TentMapError> for Failure {
    fn from(e: TentMapError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<PatternError> for Failure {
    fn from(e: PatternError) -> Self {
        match e {
            PatternError::Tie { .. } => Failure::Domain(e.to_string()),
            PatternError::TentMap(inner) => Failure::Usage(inner.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<CommuterError> for Failure {
    fn from(e: CommuterError) -> Self {
        match e {
            CommuterError::NotAPreimage { .. } => Failure::Domain(e.to_string()),
            CommuterError::NonPositiveEpsilon(_) => Failure::Usage(e.to_string()),
            CommuterError::TentMap(inner) => Failure::Usage(inner.to_string()),
        }
    }
}

impl From<BoundsError> for Failure {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::NoThreshold
            | BoundsError::NOutOfRange { .. }
            | BoundsError::InvalidTolerance(_)
            | BoundsError::GridTooSmall(_)
            | BoundsError::EstimateUndefined(_) => Failure::Usage(e.to_string()),
            BoundsError::TentMap(inner) => Failure::Usage(inner.to_string()),
            BoundsError::Pattern(inner) => inner.into(),
            BoundsError::NonMonotonePredicate(_)
            | BoundsError::BracketNotFound(_)
            | BoundsError::RenderAmbiguous(_)
            | BoundsError::NegativeRadicand(_) => Failure::Domain(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = err.print();
                return ExitCode::SUCCESS;
            }
            let _ = err.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli.command) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(command: Command) -> Result<String, Failure> {
    match command {
        Command::Pat { mu, x, n, out } => cmd_pat(&mu, &x, n, out),
        Command::Allow { mu, n, max_n, out, cache } => cmd_allow(&mu, n, max_n, out, &cache),
        Command::Commuter { mu, x, depth, out } => cmd_commuter(&mu, &x, depth, out),
        Command::Gaps { mu, levels, depth, out } => cmd_gaps(&mu, levels, depth, out),
        Command::Table1 { nmin, nmax, tol, check, out, cache } => {
            cmd_table1(nmin, nmax, &tol, check, out, &cache)
        }
        Command::Verify { suite } => cmd_verify(&suite),
        Command::Conjectures { grid, depth, out } => cmd_conjectures(grid, depth, out),
        Command::Figure { which, mu, depth, grid } => cmd_figure(which, &mu, depth, grid),
    }
}

fn require(cond: bool, message: &str) -> Result<(), Failure> {
    if cond {
        Ok(())
    } else {
        Err(Failure::Usage(message.to_string()))
    }
}

#[derive(serde::Serialize)]
struct PatOutput {
    mu: String,
    x: String,
    n: usize,
    pattern: String,
}

fn cmd_pat(mu: &Rational, x: &UnitPoint, n: usize, out: OutFormat) -> Result<String, Failure> {
    require(n >= 1, "--n must be at least 1")?;
    let map = TentMap::new(mu.clone())?;
    let pi = patterns::pat(x, &map, n)?;
    Ok(match out {
        OutFormat::Text => format!("{pi}\n"),
        OutFormat::Json => {
            let payload = PatOutput {
                mu: mu.to_string(),
                x: x.to_string(),
                n,
                pattern: pi.to_string(),
            };
            format!("{}\n", serde_json::to_string(&payload).expect("serializable"))
        }
        OutFormat::Csv => format!("pattern\n{pi}\n"),
    })
}

fn cmd_allow(
    mu: &Rational,
    n: usize,
    max_n: usize,
    out: OutFormat,
    cache_opts: &CacheOpts,
) -> Result<String, Failure> {
    // The cached value is the serialized pattern set, independent of the
    // requested output format.
    let params = cache::key_params(
        "allow",
        &[("mu", mu.to_string()), ("n", n.to_string()), ("max_n", max_n.to_string())],
    );
    let value = with_cache(cache_opts, &params, || {
        let map = TentMap::new(mu.clone())?;
        let enumeration = patterns::enumerate_allowed_with_limit(&map, n, max_n)?;
        if enumeration.diagnostics.degenerate_laps_skipped > 0 {
            eprintln!(
                "note: {} lap(s) skipped: orbit coordinates coincide there, so no pattern is realized",
                enumeration.diagnostics.degenerate_laps_skipped
            );
        }
        Ok(serde_json::to_string(&enumeration.patterns).expect("serializable"))
    })?;
    Ok(match out {
        OutFormat::Json => format!("{value}\n"),
        OutFormat::Text | OutFormat::Csv => {
            let patterns: tentmorph::patterns::PatternSet = serde_json::from_str(&value)
                .map_err(|e| Failure::Domain(format!("corrupt cached pattern set: {e}")))?;
            let mut s = if out == OutFormat::Csv { String::from("pattern\n") } else { String::new() };
            for pi in patterns.iter() {
                let _ = writeln!(s, "{pi}");
            }
            s
        }
    })
}

#[derive(serde::Serialize)]
struct CommuterOutput {
    mu: String,
    x: String,
    depth: usize,
    enclosure: tentmorph::numerics::Enclosure,
}

fn cmd_commuter(
    mu: &Rational,
    x: &UnitPoint,
    depth: usize,
    out: OutFormat,
) -> Result<String, Failure> {
    require(depth >= 1, "--depth must be at least 1")?;
    let evaluator = CommuterEvaluator::new(mu.clone())?;
    let enclosure = evaluator.eval(x, depth);
    Ok(match out {
        OutFormat::Json => {
            let payload = CommuterOutput {
                mu: mu.to_string(),
                x: x.to_string(),
                depth,
                enclosure: enclosure.clone(),
            };
            format!("{}\n", serde_json::to_string(&payload).expect("serializable"))
        }
        OutFormat::Text => format!("{enclosure}\n"),
        OutFormat::Csv => format!(
            "mu,x,depth,lo,hi\n{mu},{x},{depth},{},{}\n",
            enclosure.lo, enclosure.hi
        ),
    })
}

fn cmd_gaps(mu: &Rational, levels: usize, depth: usize, out: OutFormat) -> Result<String, Failure> {
    require(levels >= 1, "--levels must be at least 1")?;
    require(levels <= 24, "--levels above 24 would list millions of gaps")?;
    require(depth >= 1, "--depth must be at least 1")?;
    let evaluator = CommuterEvaluator::new(mu.clone())?;
    let gaps = evaluator.range_gaps(levels, depth);
    Ok(match out {
        OutFormat::Json => format!("{}\n", serde_json::to_string(&gaps).expect("serializable")),
        OutFormat::Csv | OutFormat::Text => {
            let mut s = String::from("level,index,center,radius_lo,radius_hi\n");
            for g in &gaps {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    g.level, g.index, g.center, g.radius_lo, g.radius_hi
                );
            }
            s
        }
    })
}

fn cmd_table1(
    nmin: usize,
    nmax: usize,
    tol: &Rational,
    check: bool,
    out: OutFormat,
    cache_opts: &CacheOpts,
) -> Result<String, Failure> {
    require(
        nmin != 3,
        "sigma_3 = 231 is allowed at every height, so n = 3 has no threshold; start at --nmin 4",
    )?;
    // The cached value is the serialized row list, independent of the
    // requested output format.
    let params = cache::key_params(
        "table1",
        &[
            ("nmin", nmin.to_string()),
            ("nmax", nmax.to_string()),
            ("tol", tol.to_string()),
        ],
    );
    let value = with_cache(cache_opts, &params, || {
        let rows = bounds::table1(nmin, nmax, tol)?;
        Ok(serde_json::to_string(&rows).expect("serializable"))
    })?;
    let rows: Vec<bounds::AvoidanceRow> = serde_json::from_str(&value)
        .map_err(|e| Failure::Domain(format!("corrupt cached table rows: {e}")))?;
    if check {
        let mut mismatches = Vec::new();
        for row in &rows {
            let Some((_, expect_exact, expect_estimate)) =
                bounds::TABLE1_REFERENCE.iter().find(|(n, _, _)| *n == row.n)
            else {
                continue;
            };
            if row.mu_exact_6dp != *expect_exact {
                mismatches.push(format!(
                    "n={}: exact {} != reference {expect_exact}",
                    row.n, row.mu_exact_6dp
                ));
            }
            if row.mu_estimate_6dp.as_deref() != *expect_estimate {
                mismatches.push(format!(
                    "n={}: estimate {:?} != reference {expect_estimate:?}",
                    row.n, row.mu_estimate_6dp
                ));
            }
        }
        if !mismatches.is_empty() {
            return Err(Failure::Verification(format!(
                "reference check failed:\n{}",
                mismatches.join("\n")
            )));
        }
    }
    Ok(render_table1(&rows, out))
}

fn render_table1(rows: &[bounds::AvoidanceRow], out: OutFormat) -> String {
    match out {
        OutFormat::Json => format!("{}\n", serde_json::to_string(rows).expect("serializable")),
        OutFormat::Csv | OutFormat::Text => {
            let mut s = String::from(
                "n,mu_exact_lo,mu_exact_hi,mu_exact_6dp,mu_estimate_6dp,estimate_defined\n",
            );
            for row in rows {
                let estimate = row.mu_estimate_6dp.clone().unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    row.n,
                    row.mu_exact_lo,
                    row.mu_exact_hi,
                    row.mu_exact_6dp,
                    estimate,
                    row.estimate_defined
                );
            }
            s
        }
    }
}

fn cmd_verify(suite: &str) -> Result<String, Failure> {
    let suite: Suite = suite.parse().map_err(Failure::Usage)?;
    let checks = verify::run_suite(suite);
    let mut s = String::new();
    let mut failures = 0usize;
    for check in &checks {
        if check.passed {
            let _ = writeln!(s, "{}: PASS", check.name);
        } else {
            failures += 1;
            let _ = writeln!(s, "{}: FAIL ({})", check.name, check.detail);
        }
    }
    let _ = writeln!(s, "{} checks, {failures} failed", checks.len());
    if failures > 0 {
        print!("{s}");
        return Err(Failure::Verification(format!("{failures} checks failed")));
    }
    Ok(s)
}

fn cmd_conjectures(grid: usize, depth: usize, out: OutFormat) -> Result<String, Failure> {
    require(depth >= 1, "--depth must be at least 1")?;
    let rows = bounds::conjecture_evidence(grid, depth)?;
    Ok(render_conjectures(&rows, out))
}

fn render_conjectures(rows: &[bounds::ConjectureRow], out: OutFormat) -> String {
    match out {
        OutFormat::Json => format!("{}\n", serde_json::to_string(rows).expect("serializable")),
        OutFormat::Csv | OutFormat::Text => {
            let mut s = String::from(
                "mu,h_peak_lo,h_peak_hi,conj3_bound,conj3_ok,shortest_certified_sigma_n\n",
            );
            for row in rows {
                let sigma =
                    row.shortest_certified_sigma.map(|n| n.to_string()).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{sigma}",
                    row.mu, row.peak.lo, row.peak.hi, row.conj3_bound, row.conj3_ok
                );
            }
            s
        }
    }
}

fn cmd_figure(
    which: u8,
    mu: &Rational,
    depth: Option<usize>,
    grid: Option<usize>,
) -> Result<String, Failure> {
    match which {
        1 => {
            let map = TentMap::new(mu.clone())?;
            let mut s = String::from("iterate,x,y,x_dec12,y_dec12\n");
            for k in 1..=3usize {
                let plm = map.iterate(k);
                for b in plm.breakpoints() {
                    let y = plm.eval(b);
                    let _ =
                        writeln!(s, "{k},{b},{y},{},{}", b.to_decimal(12), y.to_decimal(12));
                }
            }
            Ok(s)
        }
        2 => {
            let depth = depth.unwrap_or(30);
            let grid = grid.unwrap_or(2000);
            require(depth >= 1, "--depth must be at least 1")?;
            require(grid >= 2, "--grid must be at least 2")?;
            let evaluator = CommuterEvaluator::new(mu.clone())?;
            let den = Rational::from_integer(grid as i64 - 1);
            let mut s = String::from("x,lo,hi,x_dec12,lo_dec12,hi_dec12\n");
            for j in 0..grid {
                let x = Rational::from_integer(j as i64) / den.clone();
                let point = UnitPoint::new(x.clone()).expect("grid point in [0,1]");
                let enc = evaluator.eval(&point, depth);
                let _ = writeln!(
                    s,
                    "{x},{},{},{},{},{}",
                    enc.lo,
                    enc.hi,
                    x.to_decimal(12),
                    enc.lo.to_decimal(12),
                    enc.hi.to_decimal(12)
                );
            }
            Ok(s)
        }
        3 => {
            let depth = depth.unwrap_or(40);
            let grid = grid.unwrap_or(200);
            require(depth >= 1, "--depth must be at least 1")?;
            let rows = bounds::conjecture_evidence(grid, depth)?;
            Ok(render_conjectures(&rows, OutFormat::Csv))
        }
        _ => unreachable!("clap range-checks --which"),
    }
}

/// Run `compute` through the cache policy: replay hits, store misses, and
/// audit recomputation against any stored bytes under `--no-cache`.
fn with_cache(
    opts: &CacheOpts,
    params: &str,
    compute: impl FnOnce() -> Result<String, Failure>,
) -> Result<String, Failure> {
    let path = cache::resolve_path(opts.cache.as_deref());
    let key = cache::cache_key(params);

    if opts.no_cache {
        let fresh = compute()?;
        if let Some(path) = path {
            if path.exists() {
                let file = cache::load(&path).map_err(Failure::Domain)?;
                if let Some(entry) = file.entries.get(&key) {
                    if entry.value != fresh {
                        return Err(Failure::Verification(format!(
                            "cache audit mismatch for key {key} in {}: stored bytes differ from recomputation",
                            path.display()
                        )));
                    }
                }
            }
        }
        return Ok(fresh);
    }

    let Some(path) = path else {
        return compute();
    };
    let mut file = cache::load(&path).map_err(Failure::Domain)?;
    if let Some(entry) = file.entries.get(&key) {
        return Ok(entry.value.clone());
    }
    let fresh = compute()?;
    file.entries.insert(
        key,
        cache::CacheEntry {
            params: params.to_string(),
            created_at: cache::now_epoch_seconds(),
            value: fresh.clone(),
        },
    );
    file.version = cache::MODULE_VERSION.to_string();
    cache::store(&path, &file).map_err(Failure::Domain)?;
    Ok(fresh)
}
