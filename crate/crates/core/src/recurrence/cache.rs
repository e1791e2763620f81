//! Persisted tables.
//!
//! Line-oriented ASCII: a header `morse-htable v1 W=<int>` followed by one
//! `x y p/q` line per entry in (weight, x) order. Writes go to a sibling
//! temporary file that is renamed over the target, and a `.lock` file created
//! with `create_new` keeps concurrent writers out.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_traits::Signed;

use super::{build_htable, HTable};
use crate::error::{Error, Result};
use crate::exactmath::{format_rational, parse_rational};

pub const CACHE_MAGIC: &str = "morse-htable v1";

pub fn write_cache_to<W: Write>(table: &HTable, mut out: W) -> io::Result<()> {
    writeln!(out, "{CACHE_MAGIC} W={}", table.weight_bound())?;
    for (x, y, v) in table.entries() {
        writeln!(out, "{x} {y} {}", format_rational(v))?;
    }
    out.flush()
}

/// Parses a table; `origin` only labels error messages.
pub fn read_cache_from<R: BufRead>(input: R, origin: &Path) -> Result<HTable> {
    let malformed = |line: usize, reason: String| Error::MalformedCache {
        path: origin.to_path_buf(),
        line,
        reason,
    };
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(malformed(1, "empty file".into())),
    };
    let weight_bound: usize = header
        .strip_prefix(CACHE_MAGIC)
        .and_then(|rest| rest.strip_prefix(" W="))
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| malformed(1, format!("bad header {header:?}")))?;

    let mut rows: Vec<Vec<_>> = vec![Vec::new(); weight_bound / 2 + 1];
    let mut lineno = 1;
    for w in 0..=weight_bound {
        for y in (0..=w / 2).rev() {
            let x = w - 2 * y;
            lineno += 1;
            let line = match lines.next() {
                Some(line) => line?,
                None => return Err(malformed(lineno, format!("missing entry ({x}, {y})"))),
            };
            let mut fields = line.split(' ');
            let (fx, fy, fv) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
                (Some(a), Some(b), Some(c), None) => (a, b, c),
                _ => {
                    return Err(malformed(
                        lineno,
                        format!("expected `x y p/q`, got {line:?}"),
                    ))
                }
            };
            if fx != x.to_string() || fy != y.to_string() {
                return Err(malformed(
                    lineno,
                    format!("expected entry ({x}, {y}), found ({fx}, {fy})"),
                ));
            }
            let value = parse_rational(fv).map_err(|e| malformed(lineno, e.to_string()))?;
            if !value.is_positive() {
                return Err(malformed(lineno, format!("non-positive entry {fv}")));
            }
            rows[y].push(value);
        }
    }
    if let Some(extra) = lines.next() {
        let extra = extra?;
        if !extra.is_empty() || lines.next().is_some() {
            return Err(malformed(
                lineno + 1,
                "trailing data after last entry".into(),
            ));
        }
    }
    Ok(HTable::from_rows(weight_bound, rows))
}

/// Reads a cache file; `Ok(None)` when it does not exist.
pub fn read_cache(path: &Path) -> Result<Option<HTable>> {
    match File::open(path) {
        Ok(f) => read_cache_from(BufReader::new(f), path).map(Some),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Atomically replaces `path` with `table`.
pub fn write_cache(table: &HTable, path: &Path) -> Result<()> {
    let lock = LockFile::acquire(path)?;
    let tmp = sibling(path, ".tmp");
    let result = (|| -> io::Result<()> {
        let f = File::create(&tmp)?;
        write_cache_to(table, BufWriter::new(&f))?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    drop(lock);
    Ok(result?)
}

/// Result of a cache-backed build.
#[derive(Debug)]
pub struct CachedBuild {
    pub table: HTable,
    /// Weight bound found in the cache before this build, if any.
    pub loaded_weight: Option<usize>,
    /// Whether the cache file was (re)written.
    pub wrote: bool,
    /// Non-fatal problems, e.g. an unwritable cache location.
    pub warnings: Vec<String>,
}

/// Builds the table through `weight_bound`, reading and extending the cache
/// at `path` when given.
///
/// A malformed cache is a hard error; a cache that cannot be written only
/// produces a warning.
pub fn build_htable_cached(weight_bound: usize, path: Option<&Path>) -> Result<CachedBuild> {
    let Some(path) = path else {
        return Ok(CachedBuild {
            table: build_htable(weight_bound),
            loaded_weight: None,
            wrote: false,
            warnings: Vec::new(),
        });
    };
    let cached = read_cache(path)?;
    let loaded_weight = cached.as_ref().map(HTable::weight_bound);
    let (table, grew) = match cached {
        Some(t) if t.weight_bound() >= weight_bound => (t.restrict(weight_bound), false),
        Some(t) => (t.extend(weight_bound), true),
        None => (build_htable(weight_bound), true),
    };
    let mut warnings = Vec::new();
    let mut wrote = false;
    if grew {
        match write_cache(&table, path) {
            Ok(()) => wrote = true,
            Err(e) => warnings.push(format!(
                "could not update cache {}: {e}; continuing without it",
                path.display()
            )),
        }
    }
    Ok(CachedBuild {
        table,
        loaded_weight,
        wrote,
        warnings,
    })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

struct LockFile(PathBuf);

impl LockFile {
    fn acquire(path: &Path) -> Result<Self> {
        let lock = sibling(path, ".lock");
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(_) => Ok(LockFile(lock)),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(Error::Io(io::Error::new(
                io::ErrorKind::WouldBlock,
                format!(
                    "{} exists; another writer holds the cache (remove it if stale)",
                    lock.display()
                ),
            ))),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for LockFile {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}
