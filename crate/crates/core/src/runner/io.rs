//! Output files. Every CSV starts with a `# schema_version=N` line; floats
//! are written in the shortest decimal form that parses back to the same
//! bits.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EnsembleOutput, PeakInterval, RatioSet, RunSpec, SnapshotStats, SEED_RULE};
use crate::error::{Error, Result};
use crate::majorization::LorenzStats;
use crate::spectrum::RatioHistogram;

pub const SCHEMA_VERSION: u32 = 1;

const LORENZ_MEAN: &str = "lorenz_mean.csv";
const LORENZ_SNAPSHOTS: &str = "lorenz_snapshots.csv";
const RATIOS: &str = "ratios.csv";
const HIST: &str = "hist.csv";
const PARITY_RATIOS: &str = "parity_ratios.csv";
const PARITY_HIST: &str = "parity_hist.csv";
const MANIFEST: &str = "manifest.json";

pub fn format_float(x: f64) -> String {
    format!("{x}")
}

fn parse_float(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

fn parse_int(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad integer {s:?}")))
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub(crate) fn write_csv(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let body = String::from_utf8(body).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(format!("# schema_version={SCHEMA_VERSION}\n{body}"))
}

/// Checks the schema line and header and returns the data rows.
pub(crate) fn read_csv(text: &str, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let version = first
        .trim()
        .strip_prefix("# schema_version=")
        .ok_or_else(|| Error::Parse("missing schema_version line".into()))?;
    if parse_int(version)? != SCHEMA_VERSION as usize {
        return Err(Error::Parse(format!(
            "unsupported schema_version {version}"
        )));
    }
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let got: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if got != header {
        return Err(Error::Parse(format!(
            "expected columns {header:?}, got {got:?}"
        )));
    }
    let rows = r.records().collect::<std::result::Result<Vec<_>, _>>()?;
    if let Some(bad) = rows.iter().find(|row| row.len() != header.len()) {
        return Err(Error::Parse(format!(
            "row with {} fields, expected {}",
            bad.len(),
            header.len()
        )));
    }
    Ok(rows)
}

const LORENZ_HEADER: [&str; 5] = ["k", "k_over_N", "mean_F", "stddev_F", "stderr_F"];

fn lorenz_rows(stats: &LorenzStats) -> impl Iterator<Item = Vec<String>> + '_ {
    let n = stats.len();
    let se = stats.stderr();
    (0..n).map(move |i| {
        vec![
            (i + 1).to_string(),
            format_float((i + 1) as f64 / n as f64),
            format_float(stats.mean[i]),
            opt_float(stats.stddev.as_ref().map(|s| s[i])),
            opt_float(se.as_ref().map(|s| s[i])),
        ]
    })
}

/// `k, k_over_N, mean_F, stddev_F, stderr_F`; the spread columns are empty
/// for a single sample.
pub fn lorenz_csv(stats: &LorenzStats) -> Result<String> {
    write_csv(&LORENZ_HEADER, lorenz_rows(stats))
}

fn stats_from_rows(
    rows: &[&csv::StringRecord],
    offset: usize,
    samples: usize,
) -> Result<LorenzStats> {
    let mut mean = Vec::with_capacity(rows.len());
    let mut sd = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if parse_int(&row[offset])? != i + 1 {
            return Err(Error::Parse(format!("k out of sequence at row {}", i + 1)));
        }
        mean.push(parse_float(&row[offset + 2])?);
        let s = &row[offset + 3];
        sd.push(if s.is_empty() {
            None
        } else {
            Some(parse_float(s)?)
        });
    }
    let stddev = if sd.iter().all(Option::is_some) {
        Some(sd.into_iter().map(Option::unwrap).collect())
    } else if sd.iter().all(Option::is_none) {
        None
    } else {
        return Err(Error::Parse("stddev column partially empty".into()));
    };
    Ok(LorenzStats {
        mean,
        stddev,
        samples,
    })
}

/// Inverse of [`lorenz_csv`]; the sample count is not part of the file.
pub fn parse_lorenz_csv(text: &str, samples: usize) -> Result<LorenzStats> {
    let rows = read_csv(text, &LORENZ_HEADER)?;
    stats_from_rows(&rows.iter().collect::<Vec<_>>(), 0, samples)
}

const SNAPSHOT_HEADER: [&str; 6] = ["time", "k", "k_over_N", "mean_F", "stddev_F", "stderr_F"];

/// Lorenz statistics of every snapshot, with a leading `time` column.
pub fn lorenz_snapshots_csv(snapshots: &[SnapshotStats]) -> Result<String> {
    let rows = snapshots.iter().flat_map(|s| {
        lorenz_rows(&s.stats).map(move |mut r| {
            r.insert(0, s.time.to_string());
            r
        })
    });
    write_csv(&SNAPSHOT_HEADER, rows)
}

pub fn parse_lorenz_snapshots_csv(text: &str, samples: usize) -> Result<Vec<SnapshotStats>> {
    let rows = read_csv(text, &SNAPSHOT_HEADER)?;
    let mut out = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let time = parse_int(&rows[i][0])?;
        let group: Vec<&csv::StringRecord> = rows[i..]
            .iter()
            .take_while(|r| &r[0] == &rows[i][0])
            .collect();
        i += group.len();
        out.push(SnapshotStats {
            time,
            stats: stats_from_rows(&group, 1, samples)?,
        });
    }
    Ok(out)
}

pub fn ratios_csv(ratios: &[(usize, f64)]) -> Result<String> {
    write_csv(
        &["sample_id", "ratio"],
        ratios
            .iter()
            .map(|&(s, r)| vec![s.to_string(), format_float(r)]),
    )
}

pub fn parse_ratios_csv(text: &str) -> Result<Vec<(usize, f64)>> {
    read_csv(text, &["sample_id", "ratio"])?
        .iter()
        .map(|r| Ok((parse_int(&r[0])?, parse_float(&r[1])?)))
        .collect()
}

pub fn hist_csv(h: &RatioHistogram) -> Result<String> {
    let rows = h
        .edges
        .windows(2)
        .zip(&h.density)
        .map(|(w, &d)| vec![format_float(w[0]), format_float(w[1]), format_float(d)]);
    write_csv(&["bin_lo", "bin_hi", "density"], rows)
}

/// `(bin_lo, bin_hi, density)` rows.
pub fn parse_hist_csv(text: &str) -> Result<Vec<(f64, f64, f64)>> {
    read_csv(text, &["bin_lo", "bin_hi", "density"])?
        .iter()
        .map(|r| {
            Ok((
                parse_float(&r[0])?,
                parse_float(&r[1])?,
                parse_float(&r[2])?,
            ))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Scalars needed to read a run back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub samples: usize,
    pub dimension: usize,
    pub compressed: bool,
    pub peak_stddev: Option<f64>,
    pub peak_interval: Option<PeakInterval>,
    pub ratio_spectra: Option<usize>,
    pub ratio_excluded: Option<usize>,
    pub parity_spectra: Option<usize>,
    pub parity_excluded: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub code_version: String,
    pub seed_rule: String,
    pub config: RunSpec,
    pub summary: RunSummary,
    pub files: Vec<FileDigest>,
}

fn digest(name: &str, body: &str) -> FileDigest {
    FileDigest {
        name: name.to_string(),
        bytes: body.len(),
        sha256: hex::encode(Sha256::digest(body.as_bytes())),
    }
}

/// Writes the run's files into `dir` (created if needed) and returns the
/// manifest written alongside them.
pub fn write_outputs(out: &EnsembleOutput, dir: &Path) -> Result<RunManifest> {
    let mut files: Vec<(&str, String)> = Vec::new();
    if let Some(last) = out.final_stats() {
        files.push((LORENZ_MEAN, lorenz_csv(last)?));
        files.push((LORENZ_SNAPSHOTS, lorenz_snapshots_csv(&out.snapshots)?));
    }
    if let Some(r) = &out.ratios {
        files.push((RATIOS, ratios_csv(&r.ratios)?));
        if !r.ratios.is_empty() {
            files.push((HIST, hist_csv(&r.histogram(&out.edges())?)?));
        }
    }
    if let Some(r) = &out.parity_ratios {
        files.push((PARITY_RATIOS, ratios_csv(&r.ratios)?));
        if !r.ratios.is_empty() {
            files.push((PARITY_HIST, hist_csv(&r.histogram(&out.edges())?)?));
        }
    }
    fs::create_dir_all(dir)?;
    for (name, body) in &files {
        fs::write(dir.join(name), body)?;
    }
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        seed_rule: SEED_RULE.to_string(),
        config: out.run.clone(),
        summary: RunSummary {
            label: out.label.clone(),
            samples: out.run.samples(),
            dimension: out.dimension,
            compressed: out.compressed,
            peak_stddev: out.final_stats().and_then(LorenzStats::peak_stddev),
            peak_interval: out.peak_interval,
            ratio_spectra: out.ratios.as_ref().map(|r| r.spectra),
            ratio_excluded: out.ratios.as_ref().map(|r| r.excluded),
            parity_spectra: out.parity_ratios.as_ref().map(|r| r.spectra),
            parity_excluded: out.parity_ratios.as_ref().map(|r| r.excluded),
        },
        files: files.iter().map(|(n, b)| digest(n, b)).collect(),
    };
    fs::write(
        dir.join(MANIFEST),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(manifest)
}

/// Reads a run written by [`write_outputs`], verifying every digest.
pub fn read_outputs(dir: &Path) -> Result<EnsembleOutput> {
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST))?)?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "unsupported schema_version {}",
            manifest.schema_version
        )));
    }
    let mut texts = std::collections::BTreeMap::new();
    for f in &manifest.files {
        let body = fs::read_to_string(dir.join(&f.name))?;
        if digest(&f.name, &body) != *f {
            return Err(Error::Parse(format!(
                "{} does not match its manifest digest",
                f.name
            )));
        }
        texts.insert(f.name.as_str(), body);
    }
    let s = &manifest.summary;
    let snapshots = match texts.get(LORENZ_SNAPSHOTS) {
        Some(t) => parse_lorenz_snapshots_csv(t, s.samples)?,
        None => Vec::new(),
    };
    let ratio_set =
        |file: &str, spectra: Option<usize>, excluded: Option<usize>| -> Result<Option<RatioSet>> {
            match (texts.get(file), spectra, excluded) {
                (Some(t), Some(spectra), Some(excluded)) => Ok(Some(RatioSet {
                    ratios: parse_ratios_csv(t)?,
                    excluded,
                    spectra,
                })),
                (None, None, None) => Ok(None),
                _ => Err(Error::Parse(format!(
                    "{file} and the manifest summary disagree"
                ))),
            }
        };
    Ok(EnsembleOutput {
        label: s.label.clone(),
        dimension: s.dimension,
        compressed: s.compressed,
        peak_interval: s.peak_interval,
        ratios: ratio_set(RATIOS, s.ratio_spectra, s.ratio_excluded)?,
        parity_ratios: ratio_set(PARITY_RATIOS, s.parity_spectra, s.parity_excluded)?,
        snapshots,
        run: manifest.config,
    })
}
