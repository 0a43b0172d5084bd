use anyhow::{bail, Context, Result};
use std::path::{Path, PathBuf};

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// `--out` wins over `outputs.dir` (relative to the config); the directory is created.
pub fn resolve_out_dir(cli: Option<&Path>, from_config: Option<&str>, base_dir: &Path) -> Result<PathBuf> {
    let dir = match (cli, from_config) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(d)) => base_dir.join(d),
        (None, None) => bail!("no output directory: pass --out or set outputs.dir"),
    };
    if dir.exists() && !dir.is_dir() {
        bail!("output path {} exists and is not a directory", dir.display());
    }
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir)
}

pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| fmt(v)))?;
    }
    Ok(w.into_inner().context("flushing csv buffer")?)
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

/// Thread count from `COULOMBFLOW_THREADS`, default 1.
pub fn env_threads() -> Result<usize> {
    match std::env::var("COULOMBFLOW_THREADS") {
        Err(_) => Ok(1),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => bail!("COULOMBFLOW_THREADS: expected a positive integer, got \"{s}\""),
        },
    }
}

pub fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    if threads == 0 {
        bail!("thread count must be positive");
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().context("building thread pool")
}
