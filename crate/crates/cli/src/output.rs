//! On-disk formats for a run directory.
//!
//! Per run: `<agent>_seed<N>.csv` (one row per episode), a `.visits.csv`
//! file with the state-visit histogram at every checkpoint, and optionally
//! a `.jsonl` mirror of the rows. The directory also holds `policies.csv`
//! describing the arms.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use betadqn_core::agent::{MetricsRow, MetricsStream};
use betadqn_core::policy::PolicySpec;
use serde::{Deserialize, Serialize};

pub const POLICIES_FILE: &str = "policies.csv";
pub const VISITS_SUFFIX: &str = ".visits.csv";

/// Flat CSV form of [`MetricsRow`]. Empty cells stand for "not applicable".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub step: usize,
    pub episode: usize,
    pub arm: Option<usize>,
    #[serde(rename = "return")]
    pub episode_return: f64,
    pub expl_ratio: f64,
    pub eval_return: Option<f64>,
    pub eval_success: Option<f64>,
    pub eval_step: Option<usize>,
    pub length: usize,
    pub success: u8,
    pub epsilon: Option<f64>,
    /// Window selection counts per arm, `;`-separated.
    pub arm_counts: String,
}

impl From<&MetricsRow> for CsvRow {
    fn from(r: &MetricsRow) -> Self {
        Self {
            step: r.step,
            episode: r.episode,
            arm: r.arm,
            episode_return: r.episode_return,
            expl_ratio: r.exploration_ratio,
            eval_return: r.eval.map(|e| e.mean_return),
            eval_success: r.eval.map(|e| e.success_rate),
            eval_step: r.eval.map(|e| e.step),
            length: r.length,
            success: r.success as u8,
            epsilon: r.epsilon,
            arm_counts: r.arm_counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";"),
        }
    }
}

impl CsvRow {
    pub fn arm_counts(&self) -> Result<Vec<usize>> {
        if self.arm_counts.is_empty() {
            return Ok(Vec::new());
        }
        self.arm_counts.split(';').map(|c| c.parse().with_context(|| format!("bad arm count {c:?}"))).collect()
    }
}

/// Writes to `<path>.partial` and renames on success, so a crashed run never
/// leaves a file that looks complete.
fn write_atomically(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let mut w = BufWriter::new(File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?);
    body(&mut w)?;
    w.flush()?;
    drop(w);
    std::fs::rename(&tmp, path).with_context(|| format!("renaming {}", tmp.display()))?;
    Ok(())
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    if rows.is_empty() {
        bail!("run produced no episodes");
    }
    write_atomically(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        for r in rows {
            csv.serialize(CsvRow::from(r))?;
        }
        csv.flush()?;
        Ok(())
    })
}

pub fn read_metrics(path: &Path) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    rdr.deserialize().map(|r| r.with_context(|| format!("parsing {}", path.display()))).collect()
}

pub fn write_jsonl(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    write_atomically(path, |w| {
        for r in rows {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitRecord {
    pub step: usize,
    pub x: usize,
    pub y: usize,
    pub count: u64,
}

/// Long-format visit histograms: one line per (checkpoint, cell).
pub fn write_visits(path: &Path, stream: &MetricsStream) -> Result<()> {
    let (w, _) = stream.grid;
    write_atomically(path, |out| {
        let mut csv = csv::Writer::from_writer(out);
        for snap in &stream.visits {
            for (i, &count) in snap.counts.iter().enumerate() {
                csv.serialize(VisitRecord { step: snap.step, x: i % w, y: i / w, count })?;
            }
        }
        csv.flush()?;
        Ok(())
    })
}

/// Visit matrix (`height` rows of `width` counts) at the last checkpoint.
pub fn read_final_visits(path: &Path) -> Result<Vec<Vec<u64>>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let recs: Vec<VisitRecord> = rdr.deserialize().collect::<Result<_, _>>()?;
    let Some(last) = recs.iter().map(|r| r.step).max() else {
        bail!("{} holds no visits", path.display());
    };
    let width = recs.iter().map(|r| r.x).max().unwrap_or(0) + 1;
    let height = recs.iter().map(|r| r.y).max().unwrap_or(0) + 1;
    let mut grid = vec![vec![0u64; width]; height];
    for r in recs.iter().filter(|r| r.step == last) {
        grid[r.y][r.x] = r.count;
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRecord {
    pub arm: usize,
    pub kind: String,
    pub param: f64,
}

pub fn write_policies(path: &Path, policies: &[PolicySpec]) -> Result<()> {
    write_atomically(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        for (arm, p) in policies.iter().enumerate() {
            let kind = match p {
                PolicySpec::Cov(_) => "cov",
                PolicySpec::Cor(_) => "cor",
            };
            csv.serialize(PolicyRecord { arm, kind: kind.into(), param: p.param() })?;
        }
        csv.flush()?;
        Ok(())
    })
}

pub fn read_policies(path: &Path) -> Result<Vec<PolicySpec>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for rec in rdr.deserialize::<PolicyRecord>() {
        let rec = rec?;
        out.push(match rec.kind.as_str() {
            "cov" => PolicySpec::Cov(rec.param),
            "cor" => PolicySpec::Cor(rec.param),
            other => bail!("unknown policy kind {other:?}"),
        });
    }
    Ok(out)
}

/// A per-run metrics file found in a run directory.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RunFile {
    pub agent: String,
    pub seed: u64,
    pub path: PathBuf,
}

impl RunFile {
    pub fn visits_path(&self) -> PathBuf {
        self.path.with_file_name(format!("{}_seed{}{VISITS_SUFFIX}", self.agent, self.seed))
    }
}

/// Parses `<agent>_seed<N>.csv`.
pub fn parse_run_name(name: &str) -> Option<(String, u64)> {
    let stem = name.strip_suffix(".csv")?;
    let (agent, seed) = stem.rsplit_once("_seed")?;
    if agent.is_empty() {
        return None;
    }
    Some((agent.to_string(), seed.parse().ok()?))
}

pub fn list_runs(dir: &Path) -> Result<Vec<RunFile>> {
    let mut runs = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        if let Some((agent, seed)) = parse_run_name(name) {
            runs.push(RunFile { agent, seed, path });
        }
    }
    runs.sort();
    Ok(runs)
}
