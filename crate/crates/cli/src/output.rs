//! File layout shared by every subcommand: CSV with a `#`-prefixed JSON
//! header line holding the full configuration, or JSON with the configuration
//! embedded.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

pub use panet::ingest::format_sig as fmt;

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a C,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<&'a R>,
}

pub fn header_line<C: Serialize>(command: &str, config: &C) -> Result<String> {
    let env: Envelope<'_, C, ()> = Envelope {
        tool: "panet",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        result: None,
    };
    Ok(format!("# {}", serde_json::to_string(&env)?))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Header line, column names, then one line per row.
pub fn write_csv<W: Write, I>(mut out: W, header: &str, columns: &str, rows: I) -> io::Result<()>
where
    I: IntoIterator<Item = String>,
{
    writeln!(out, "{header}")?;
    writeln!(out, "{columns}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    out.flush()
}

pub fn write_csv_file<I>(path: &Path, header: &str, columns: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = String>,
{
    write_csv(create(path)?, header, columns, rows).with_context(|| format!("writing {}", path.display()))
}

pub fn json_report<C: Serialize, R: Serialize>(command: &str, config: &C, result: &R) -> Result<String> {
    let env = Envelope {
        tool: "panet",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        result: Some(result),
    };
    Ok(serde_json::to_string_pretty(&env)? + "\n")
}

/// Write to `path`, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = create(p)?;
            f.write_all(text.as_bytes())?;
            f.flush()?;
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// Worker pool capped by `PA_NET_THREADS` when set.
pub fn pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("PA_NET_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("PA_NET_THREADS={v:?} is not a thread count"))?;
        builder = builder.num_threads(n.max(1));
    }
    Ok(builder.build()?)
}
