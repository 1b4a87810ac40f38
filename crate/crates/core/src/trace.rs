//! Access-trace data model: trace records, the plain-text trace format,
//! and reproducible synthetic trace generation.
//!
//! Trace files are UTF-8 text with one access per line, `R <addr>` or
//! `W <addr>`, where `<addr>` is a byte address in decimal or 0x-prefixed
//! hex. Lines starting with `#` and blank lines are skipped.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::kv;

/// Identifier of a fixed-size data page.
pub type PageId = u64;

/// Request type of a memory access.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Read,
    Write,
}

/// One trace record: an operation on a byte address.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemoryAccess {
    pub op: Op,
    pub address: u64,
}

impl MemoryAccess {
    /// The page this address falls in, for the given page size in bytes.
    pub fn page(&self, page_size: u64) -> PageId {
        self.address / page_size
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("line {line}: unknown op token `{token}` (expected R or W)")]
    UnknownOp { line: u64, token: String },
    #[error("line {line}: bad address `{text}`")]
    BadAddress { line: u64, text: String },
    #[error("line {line}: expected `<R|W> <address>`")]
    Malformed { line: u64 },
    #[error("i/o error after {records} records: {source}")]
    Io { records: u64, source: io::Error },
    #[error("synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("synthetic spec file: {0}")]
    SpecFile(String),
}

/// Decodes one trace line. Returns `None` for comment and blank lines.
pub fn parse_trace_line(line: &str, line_no: u64) -> Result<Option<MemoryAccess>, TraceError> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut fields = trimmed.split_whitespace();
    let op = match fields.next() {
        Some("R") => Op::Read,
        Some("W") => Op::Write,
        Some(tok) => {
            return Err(TraceError::UnknownOp {
                line: line_no,
                token: tok.to_string(),
            })
        }
        None => return Err(TraceError::Malformed { line: line_no }),
    };
    let addr_text = fields
        .next()
        .ok_or(TraceError::Malformed { line: line_no })?;
    if fields.next().is_some() {
        return Err(TraceError::Malformed { line: line_no });
    }
    let address = parse_address(addr_text).ok_or_else(|| TraceError::BadAddress {
        line: line_no,
        text: addr_text.to_string(),
    })?;
    Ok(Some(MemoryAccess { op, address }))
}

fn parse_address(text: &str) -> Option<u64> {
    if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).ok()
    } else {
        text.parse::<u64>().ok()
    }
}

/// End-of-stream summary used for memory capacity sizing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TraceStats {
    pub accesses: u64,
    pub distinct_pages: u64,
}

/// Streams a trace, feeding each access to `sink` in file order.
///
/// Memory use is bounded by the number of distinct pages, not the trace
/// length. Parse errors carry the line number; I/O failures report how
/// many records were delivered before the failure.
pub fn read_trace<R, F>(reader: R, page_size: u64, mut sink: F) -> Result<TraceStats, TraceError>
where
    R: BufRead,
    F: FnMut(MemoryAccess),
{
    let mut stats = TraceStats::default();
    let mut pages = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| TraceError::Io {
            records: stats.accesses,
            source,
        })?;
        if let Some(access) = parse_trace_line(&line, i as u64 + 1)? {
            stats.accesses += 1;
            pages.insert(access.page(page_size));
            sink(access);
        }
    }
    stats.distinct_pages = pages.len() as u64;
    Ok(stats)
}

/// Writes accesses in the text trace format (hex addresses).
pub fn write_trace<W, I>(mut writer: W, accesses: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = MemoryAccess>,
{
    for a in accesses {
        let op = match a.op {
            Op::Read => 'R',
            Op::Write => 'W',
        };
        writeln!(writer, "{} {:#x}", op, a.address)?;
    }
    Ok(())
}

/// Parameters of a reproducible synthetic trace.
///
/// The first `ceil(hot_fraction * n_pages)` page ids form the hot set; each
/// access draws a hot page with probability `hot_access_fraction`, else a
/// uniform cold page. The op is a read with probability `read_ratio`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_accesses: u64,
    pub n_pages: u64,
    pub hot_fraction: f64,
    pub hot_access_fraction: f64,
    pub read_ratio: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), TraceError> {
        let err = |msg: &str| Err(TraceError::InvalidSpec(msg.to_string()));
        if self.n_accesses == 0 {
            return err("n_accesses must be >= 1");
        }
        if self.n_pages == 0 {
            return err("n_pages must be >= 1");
        }
        if !(self.hot_fraction > 0.0 && self.hot_fraction <= 1.0) {
            return err("hot_fraction must be in (0, 1]");
        }
        if !(self.hot_access_fraction > 0.0 && self.hot_access_fraction <= 1.0) {
            return err("hot_access_fraction must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.read_ratio) {
            return err("read_ratio must be in [0, 1]");
        }
        Ok(())
    }

    fn hot_pages(&self) -> u64 {
        let hot = (self.hot_fraction * self.n_pages as f64).ceil() as u64;
        hot.clamp(1, self.n_pages)
    }
}

/// Generates a synthetic trace, feeding each access to `sink`.
///
/// The same spec and page size always produce the identical sequence.
pub fn generate_synthetic<F>(
    spec: &SyntheticSpec,
    page_size: u64,
    mut sink: F,
) -> Result<TraceStats, TraceError>
where
    F: FnMut(MemoryAccess),
{
    spec.validate()?;
    let hot_pages = spec.hot_pages();
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let mut pages = HashSet::new();
    for _ in 0..spec.n_accesses {
        let hot = hot_pages == spec.n_pages || rng.random_bool(spec.hot_access_fraction);
        let page = if hot {
            rng.random_range(0..hot_pages)
        } else {
            rng.random_range(hot_pages..spec.n_pages)
        };
        let op = if rng.random_bool(spec.read_ratio) {
            Op::Read
        } else {
            Op::Write
        };
        let offset = rng.random_range(0..page_size);
        let access = MemoryAccess {
            op,
            address: page * page_size + offset,
        };
        pages.insert(page);
        sink(access);
    }
    Ok(TraceStats {
        accesses: spec.n_accesses,
        distinct_pages: pages.len() as u64,
    })
}

/// Where a run's accesses come from.
#[derive(Clone, Debug)]
pub enum TraceSource {
    File(PathBuf),
    Synthetic(SyntheticSpec),
}

impl TraceSource {
    /// Streams the source once, in order. Both variants can be streamed
    /// repeatedly and yield the same sequence every time.
    pub fn for_each<F>(&self, page_size: u64, sink: F) -> Result<TraceStats, TraceError>
    where
        F: FnMut(MemoryAccess),
    {
        match self {
            TraceSource::File(path) => {
                let file =
                    File::open(path).map_err(|source| TraceError::Io { records: 0, source })?;
                read_trace(BufReader::new(file), page_size, sink)
            }
            TraceSource::Synthetic(spec) => generate_synthetic(spec, page_size, sink),
        }
    }
}

impl fmt::Display for TraceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceSource::File(path) => write!(f, "file:{}", path.display()),
            TraceSource::Synthetic(s) => write!(
                f,
                "synthetic:n={},pages={},hot={},hotacc={},rr={},seed={}",
                s.n_accesses,
                s.n_pages,
                s.hot_fraction,
                s.hot_access_fraction,
                s.read_ratio,
                s.seed
            ),
        }
    }
}

/// Parses a synthetic-spec file (flat `key = value` lines).
///
/// Recognized keys: `n_accesses`, `n_pages`, `hot_fraction`,
/// `hot_access_fraction`, `read_ratio`, `seed`, and an optional
/// `page_size` (bytes, default 4096) used to synthesize addresses.
pub fn parse_synthetic_spec_str(text: &str) -> Result<(SyntheticSpec, u64), TraceError> {
    let mut spec = SyntheticSpec {
        n_accesses: 0,
        n_pages: 0,
        hot_fraction: 1.0,
        hot_access_fraction: 1.0,
        read_ratio: 0.5,
        seed: 0,
    };
    let mut page_size = 4096u64;
    let lines = kv::parse_kv_lines(text).map_err(TraceError::SpecFile)?;
    for kv::KvLine { key, value, line } in lines {
        let bad = |what: &str| TraceError::SpecFile(format!("line {line}: bad {what} `{value}`"));
        match key.as_str() {
            "n_accesses" => spec.n_accesses = value.parse().map_err(|_| bad("count"))?,
            "n_pages" => spec.n_pages = value.parse().map_err(|_| bad("count"))?,
            "hot_fraction" => spec.hot_fraction = value.parse().map_err(|_| bad("ratio"))?,
            "hot_access_fraction" => {
                spec.hot_access_fraction = value.parse().map_err(|_| bad("ratio"))?
            }
            "read_ratio" => spec.read_ratio = value.parse().map_err(|_| bad("ratio"))?,
            "seed" => spec.seed = value.parse().map_err(|_| bad("seed"))?,
            "page_size" => page_size = value.parse().map_err(|_| bad("page size"))?,
            other => {
                return Err(TraceError::SpecFile(format!(
                    "line {line}: unknown key `{other}`"
                )))
            }
        }
    }
    if page_size == 0 {
        return Err(TraceError::SpecFile("page_size must be >= 1".to_string()));
    }
    spec.validate()?;
    Ok((spec, page_size))
}
