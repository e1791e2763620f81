//! Command-line front end.
//!
//! [`run`] parses arguments and writes to caller-supplied streams so the whole
//! interface can be driven from tests; `main` only forwards the process
//! environment.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;

use crate::analysis::{
    self, check_bounds_range, delta_rows, elliptic_theta, estimate_a, xi_series_value, CSV_HEADER,
    DEFAULT_POINTS, OUTPUT_DIGITS,
};
use crate::error::{Error, Result};
use crate::exactmath::{
    format_rational, format_significant, HighPrecisionReal, DEFAULT_PRECISION, MIN_PRECISION,
};
use crate::recurrence::{build_htable, build_htable_cached, HTable};
use crate::series::{ode_lower_series, pde_residual, scaled_tan_series, xi_bivariate};
use crate::trees::{decode, encode, enumerate_morse_trees, EncodedPair, MorseTree};

/// Environment variable naming the default cache file.
pub const CACHE_ENV: &str = "MORSE_CENSUS_CACHE";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Largest `n` the oracle accepts without `--extended`.
pub const ORACLE_BUDGET: usize = 3;
/// Largest `n` the oracle accepts with `--extended`.
pub const ORACLE_EXTENDED_BUDGET: usize = 4;

const ELLIPTIC_POINTS: [f64; 3] = [0.05, 0.1, 0.2];
const ELLIPTIC_TOL: f64 = 1e-12;
const ELLIPTIC_ACCURACY: f64 = 1e-8;
const ARNOLD_START: usize = 10;

#[derive(Debug, Parser)]
#[command(
    name = "morse-census",
    version,
    about = "Count excellent Morse functions on the 2-sphere and check their bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print h(n) and g(n) for 0 <= n <= max-n
    Census {
        #[arg(long, default_value_t = 10)]
        max_n: usize,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Print the asymptotic remainder delta_n at sample points
    Table {
        /// Comma-separated sample points, each >= 1
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        points: Option<Vec<usize>>,
        #[arg(long, default_value_t = DEFAULT_PRECISION, value_parser = parse_precision)]
        precision: u32,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Run one of the verification suites
    Verify {
        #[arg(value_enum)]
        which: Verifier,
        /// Largest n for bounds, conjecture, arnold (default 200) and elliptic (default 50)
        #[arg(long)]
        max_n: Option<usize>,
        /// Largest tan index k for the two-route comparison
        #[arg(long, default_value_t = 50)]
        max_k: usize,
        /// v-exponent bound V of the PDE residual
        #[arg(long, default_value_t = 25)]
        order: usize,
        #[arg(long, default_value_t = DEFAULT_PRECISION, value_parser = parse_precision)]
        precision: u32,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Compare brute-force Morse-tree enumeration with the recurrence
    Oracle {
        n: usize,
        /// Allow n = 4 (slow)
        #[arg(long)]
        extended: bool,
    },
    /// Encode a Morse tree (`n=<int>` then `a-b` lines) as a planar tree and permutation
    Encode {
        /// Input file; stdin when omitted
        input: Option<PathBuf>,
    },
    /// Decode a planar tree and permutation back into a Morse tree
    Decode {
        /// Input file; stdin when omitted
        input: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CacheArgs {
    /// Cache file for the H table (default: $MORSE_CENSUS_CACHE)
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Verifier {
    Bounds,
    Pde,
    Tan,
    Elliptic,
    Conjecture,
    Arnold,
}

fn parse_precision(s: &str) -> std::result::Result<u32, String> {
    let p: u32 = s.parse().map_err(|e| format!("{e}"))?;
    if p < MIN_PRECISION {
        return Err(format!("precision must be at least {MIN_PRECISION} bits"));
    }
    Ok(p)
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::MalformedCache { .. } => EXIT_IO,
        Error::Consistency(_) => EXIT_FAILURE,
        Error::Domain(_)
        | Error::Range { .. }
        | Error::Budget { .. }
        | Error::NotInImage(_)
        | Error::Parse(_)
        | Error::Usage(_) => EXIT_USAGE,
    }
}

/// Streams and environment for one invocation.
pub struct Context<'a> {
    pub default_cache: Option<PathBuf>,
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the exit code.
pub fn run<I, T>(args: I, ctx: &mut Context<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(ctx.stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(ctx.stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(cli.command, ctx) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILURE,
        Err(e) => {
            let _ = writeln!(ctx.stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(command: Command, ctx: &mut Context<'_>) -> Result<bool> {
    match command {
        Command::Census {
            max_n,
            output,
            cache,
        } => census(max_n, output.format, &cache, ctx),
        Command::Table {
            points,
            precision,
            output,
            cache,
        } => table(points, precision, output.format, &cache, ctx),
        Command::Verify {
            which,
            max_n,
            max_k,
            order,
            precision,
            cache,
        } => verify(which, max_n, max_k, order, precision, &cache, ctx),
        Command::Oracle { n, extended } => oracle(n, extended, ctx),
        Command::Encode { input } => {
            let text = read_input(input.as_deref(), ctx)?;
            let pair = encode(&MorseTree::parse(&text)?);
            write!(ctx.stdout, "{pair}")?;
            Ok(true)
        }
        Command::Decode { input } => {
            let text = read_input(input.as_deref(), ctx)?;
            let tree = decode(&EncodedPair::parse(&text)?)?;
            write!(ctx.stdout, "{tree}")?;
            Ok(true)
        }
    }
}

fn read_input(path: Option<&Path>, ctx: &mut Context<'_>) -> Result<String> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", p.display()),
            ))
        }),
        None => {
            let mut text = String::new();
            ctx.stdin.read_to_string(&mut text)?;
            Ok(text)
        }
    }
}

fn load_table(weight_bound: usize, cache: &CacheArgs, ctx: &mut Context<'_>) -> Result<HTable> {
    let path = cache.cache.clone().or_else(|| ctx.default_cache.clone());
    let built = build_htable_cached(weight_bound, path.as_deref())?;
    for w in &built.warnings {
        writeln!(ctx.stderr, "warning: {w}")?;
    }
    Ok(built.table)
}

fn census(max_n: usize, format: Format, cache: &CacheArgs, ctx: &mut Context<'_>) -> Result<bool> {
    let table = load_table(2 * max_n, cache, ctx)?;
    let rows = (0..=max_n)
        .map(|n| Ok((n, format_rational(table.h(n)?), table.g(n)?.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let out = &mut *ctx.stdout;
    match format {
        Format::Text => {
            for (n, h, g) in &rows {
                writeln!(out, "n={n} h={h} g={g}")?;
            }
        }
        Format::Csv => {
            writeln!(out, "n,h,g")?;
            for (n, h, g) in &rows {
                writeln!(out, "{n},{h},{g}")?;
            }
        }
        Format::Json => {
            let records: Vec<_> = rows
                .iter()
                .map(|(n, h, g)| serde_json::json!({ "n": n, "h": h, "g": g }))
                .collect();
            writeln!(out, "{}", to_json(&records))?;
        }
    }
    Ok(true)
}

fn to_json(records: &[serde_json::Value]) -> String {
    serde_json::to_string_pretty(records).expect("JSON values serialize")
}

fn table(
    points: Option<Vec<usize>>,
    precision: u32,
    format: Format,
    cache: &CacheArgs,
    ctx: &mut Context<'_>,
) -> Result<bool> {
    let points = points.unwrap_or_else(|| DEFAULT_POINTS.to_vec());
    if points.is_empty() {
        return Err(Error::Usage("--points needs at least one value".into()));
    }
    if points.contains(&0) {
        return Err(Error::Usage("sample points must be >= 1".into()));
    }
    let max = *points.iter().max().expect("non-empty");
    let table = load_table(2 * max, cache, ctx)?;
    let rows = delta_rows(&points, &table, precision)?;
    let out = &mut *ctx.stdout;
    let sig = |x: f64| format_significant(x, OUTPUT_DIGITS);
    match format {
        Format::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for r in &rows {
                writeln!(out, "{}", r.csv_line())?;
            }
        }
        Format::Json => {
            let records: Vec<_> = rows.iter().map(|r| r.to_json()).collect();
            writeln!(out, "{}", to_json(&records))?;
        }
        Format::Text => {
            writeln!(
                out,
                "{:>5}  {:>16}  {:>16}  {:>16}  {:>16}",
                "n", "h", "log_h", "delta", "delta_over_n"
            )?;
            for r in &rows {
                writeln!(
                    out,
                    "{:>5}  {:>16}  {:>16}  {:>16}  {:>16}",
                    r.n,
                    sig(r.h.to_f64().unwrap_or(f64::NAN)),
                    sig(r.log_h.to_f64()),
                    sig(r.delta.to_f64()),
                    sig(r.delta_over_n.to_f64()),
                )?;
            }
            let distinct: BTreeSet<usize> = points.iter().copied().collect();
            if distinct.len() >= 4 {
                let a = estimate_a(&rows, precision)?;
                writeln!(
                    out,
                    "heuristic least-squares fit delta_n ~ a n + b log n + c: a = {}",
                    sig(a.to_f64())
                )?;
            }
        }
    }
    Ok(true)
}

fn verify(
    which: Verifier,
    max_n: Option<usize>,
    max_k: usize,
    order: usize,
    precision: u32,
    cache: &CacheArgs,
    ctx: &mut Context<'_>,
) -> Result<bool> {
    match which {
        Verifier::Bounds => {
            let n_max = max_n.unwrap_or(200);
            let table = load_table(2 * n_max, cache, ctx)?;
            let checks = check_bounds_range(&table, n_max)?;
            let fail = |name: &str, n: usize| format!("bounds: FAIL at n = {n}: {name}");
            for c in &checks {
                let broken = [
                    (!c.lower, "u_n <= h(n)"),
                    (!c.upper_catalan, "h(n) <= C_n"),
                    (!c.upper_estimate, "g(n) <= 4^n (2n+1)!/(n+1)"),
                    (!c.integral, "(2n+1)! h(n) integral"),
                ]
                .into_iter()
                .find(|(b, _)| *b);
                if let Some((_, name)) = broken {
                    writeln!(ctx.stdout, "{}", fail(name, c.n))?;
                    writeln!(
                        ctx.stdout,
                        "h({}) = {}",
                        c.n,
                        format_rational(table.h(c.n)?)
                    )?;
                    return Ok(false);
                }
            }
            writeln!(
                ctx.stdout,
                "bounds: pass for 0 <= n <= {n_max} (u_n <= h(n) <= C_n, g(n) <= 4^n (2n+1)!/(n+1), (2n+1)! h(n) integral)"
            )?;
            Ok(true)
        }
        Verifier::Conjecture => {
            let n_max = max_n.unwrap_or(200);
            let table = load_table(2 * n_max, cache, ctx)?;
            for n in 1..=n_max {
                if !analysis::check_conjecture_a(n, &table)? {
                    writeln!(ctx.stdout, "conjecture: FAIL at n = {n}: g(n) >= (2n+1)!")?;
                    writeln!(ctx.stdout, "h({n}) = {}", format_rational(table.h(n)?))?;
                    return Ok(false);
                }
            }
            writeln!(
                ctx.stdout,
                "conjecture: pass for 1 <= n <= {n_max} (g(n) < (2n+1)!)"
            )?;
            Ok(true)
        }
        Verifier::Tan => {
            let bern = scaled_tan_series(max_k);
            let ode = ode_lower_series(max_k);
            if let Some(i) = (0..=bern.order()).find(|&i| bern.coeff(i) != ode.coeff(i)) {
                writeln!(
                    ctx.stdout,
                    "tan: FAIL at t^{i}: bernoulli {} vs ode {}",
                    bern.coeff(i).map(format_rational).unwrap_or_default(),
                    ode.coeff(i).map(format_rational).unwrap_or_default()
                )?;
                return Ok(false);
            }
            writeln!(
                ctx.stdout,
                "tan: pass for k <= {max_k} (Bernoulli formula equals ODE solution exactly)"
            )?;
            Ok(true)
        }
        Verifier::Pde => {
            let table = load_table(order, cache, ctx)?;
            let residual = pde_residual(&xi_bivariate(&table, order)?);
            if let Some(((a, b), c)) = residual.terms().next() {
                writeln!(
                    ctx.stdout,
                    "pde: FAIL: residual coefficient of u^{a} v^{b} is {}",
                    format_rational(c)
                )?;
                return Ok(false);
            }
            writeln!(
                ctx.stdout,
                "pde: pass at V = {order} (every retained residual coefficient is 0)"
            )?;
            Ok(true)
        }
        Verifier::Elliptic => {
            let n_max = max_n.unwrap_or(50);
            let table = load_table(2 * n_max, cache, ctx)?;
            let mut ok = true;
            for xi in ELLIPTIC_POINTS {
                let theta = elliptic_theta(xi, ELLIPTIC_TOL)?;
                let back = xi_series_value(&table, n_max, theta)?;
                let err = (back - xi).abs();
                let verdict = if err <= ELLIPTIC_ACCURACY {
                    "pass"
                } else {
                    "FAIL"
                };
                ok &= err <= ELLIPTIC_ACCURACY;
                writeln!(
                    ctx.stdout,
                    "elliptic: {verdict} xi* = {xi} theta = {} |error| = {}",
                    format_significant(theta, OUTPUT_DIGITS),
                    format_significant(err, 3)
                )?;
            }
            Ok(ok)
        }
        Verifier::Arnold => {
            let n_max = max_n.unwrap_or(200);
            if n_max < ARNOLD_START + 1 {
                return Err(Error::Usage(format!(
                    "arnold needs --max-n > {ARNOLD_START}"
                )));
            }
            let table = load_table(2 * n_max, cache, ctx)?;
            let two = HighPrecisionReal::from_i64(2, precision);
            let mut prev: Option<HighPrecisionReal> = None;
            for n in ARNOLD_START..=n_max {
                let r = analysis::arnold_ratio(n, &table, precision)?;
                if prev.as_ref().is_some_and(|p| &r <= p) || r >= two {
                    writeln!(
                        ctx.stdout,
                        "arnold: FAIL at n = {n}: ratio {} (previous {})",
                        format_significant(r.to_f64(), OUTPUT_DIGITS),
                        prev.map(|p| format_significant(p.to_f64(), OUTPUT_DIGITS))
                            .unwrap_or_default()
                    )?;
                    return Ok(false);
                }
                prev = Some(r);
            }
            let last = prev.expect("at least one ratio").to_f64();
            writeln!(
                ctx.stdout,
                "arnold: pass log g(n)/(n log n) strictly increasing and < 2 for {ARNOLD_START} <= n <= {n_max} (value {} at n = {n_max}); the limit is exactly 2, which no finite n reaches",
                format_significant(last, OUTPUT_DIGITS)
            )?;
            Ok(true)
        }
    }
}

fn oracle(n: usize, extended: bool, ctx: &mut Context<'_>) -> Result<bool> {
    let budget = if extended {
        ORACLE_EXTENDED_BUDGET
    } else {
        ORACLE_BUDGET
    };
    if n > budget {
        return Err(Error::Budget { n, budget });
    }
    let trees = enumerate_morse_trees(n)?;
    let recurrence = build_htable(2 * n).g(n)?;
    let mut images = BTreeSet::new();
    let mut round_trips = true;
    for t in &trees {
        let pair = encode(t);
        round_trips &= decode(&pair).ok().as_ref() == Some(t);
        images.insert(pair);
    }
    let injective = round_trips && images.len() == trees.len();
    let agree = recurrence == trees.len().into();
    writeln!(
        ctx.stdout,
        "oracle={} recurrence={recurrence} injective={}",
        trees.len(),
        if injective { "yes" } else { "no" }
    )?;
    Ok(agree && injective)
}
