//! Grading a run against reference ensembles, and the batch verdict table.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::io::{format_float, read_csv, write_csv, write_outputs};
use super::{
    derive_seed, run_ensemble_with, run_reference_with, Analysis, BootstrapConfig, EnsembleConfig,
    EnsembleOutput, HistogramConfig, ReferenceConfig,
};
use crate::error::{Error, Result};
use crate::families::FamilySpec;
use crate::majorization::deviation_z;
use crate::spectrum::{distribution_distance, histogram_distance, ReferenceModel};

/// The twelve circuit families of the verdict table.
pub const TABLE1_FAMILIES: [&str; 12] = [
    "G3-rn-rs", "G2-rn-rs", "G1-rn-rs", "G2-rn-0", "MG-rn-rs", "MG-rn-0", "MG-nn-rs", "MG-nn-0",
    "Dn-all-0", "D3-all-0", "D2-all-0", "D2-nn-0",
];

/// Declared verdict thresholds.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Ave-H is YES when the largest per-k deviation of the mean curves is
    /// below this many combined standard errors.
    pub ave_max_z: f64,
    /// Fluc-H is YES when the ratio of peak stddevs lies in this band.
    pub fluc_band: (f64, f64),
    /// Minimum total-variation gap between the two spectral references.
    pub spec_margin: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            ave_max_z: 3.0,
            fluc_band: (0.8, 1.25),
            spec_margin: 0.02,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum SpecVerdict {
    /// Nearer the random-state (Wigner-Dyson-like) reference.
    RmtLike,
    PoissonLike,
    /// Distances within the margin of each other.
    Inconclusive,
    /// Every gap ratio was excluded as degenerate.
    Singular,
    /// No spectra to compare.
    Unavailable,
}

impl fmt::Display for SpecVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpecVerdict::RmtLike => "GUE-like",
            SpecVerdict::PoissonLike => "Poisson-like",
            SpecVerdict::Inconclusive => "inconclusive",
            SpecVerdict::Singular => "singular",
            SpecVerdict::Unavailable => "n/a",
        })
    }
}

impl FromStr for SpecVerdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "GUE-like" => Ok(SpecVerdict::RmtLike),
            "Poisson-like" => Ok(SpecVerdict::PoissonLike),
            "inconclusive" => Ok(SpecVerdict::Inconclusive),
            "singular" => Ok(SpecVerdict::Singular),
            "n/a" => Ok(SpecVerdict::Unavailable),
            _ => Err(Error::Parse(format!("unknown spectral verdict {s:?}"))),
        }
    }
}

/// Scalar results of one comparison, one line of `verdicts.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct VerdictRow {
    pub family: String,
    pub lorenz_reference: String,
    pub spectral_reference: String,
    pub max_z: Option<f64>,
    pub ave_h: Option<bool>,
    pub peak_stddev: Option<f64>,
    pub peak_stddev_ref: Option<f64>,
    pub fluc_ratio: Option<f64>,
    pub fluc_h: Option<bool>,
    pub tv_rmt: Option<f64>,
    pub tv_poisson: Option<f64>,
    /// Share of gap ratios excluded as degenerate.
    pub excluded_fraction: Option<f64>,
    pub spec: SpecVerdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub row: VerdictRow,
    /// `mean_a - mean_b` per `k` (empty without Lorenz data).
    pub deviation: Vec<f64>,
    /// `|deviation| / √(se_a² + se_b²)` per `k`.
    pub z: Vec<f64>,
}

/// Grades `a` against reference runs: Lorenz means and fluctuations against
/// `lorenz_ref`, gap ratios against `spectral_ref` (default `lorenz_ref`) and
/// against `poisson` (default: the analytic uncorrelated-level law).
///
/// Parity-sector ratios of `a` are used in place of its full-cut ratios when
/// present.
pub fn compare_runs(
    a: &EnsembleOutput,
    lorenz_ref: &EnsembleOutput,
    spectral_ref: Option<&EnsembleOutput>,
    poisson: Option<&EnsembleOutput>,
    th: &Thresholds,
) -> Result<CompareReport> {
    let spectral_ref = spectral_ref.unwrap_or(lorenz_ref);
    let mut row = VerdictRow {
        family: a.label.clone(),
        lorenz_reference: lorenz_ref.label.clone(),
        spectral_reference: spectral_ref.label.clone(),
        max_z: None,
        ave_h: None,
        peak_stddev: None,
        peak_stddev_ref: None,
        fluc_ratio: None,
        fluc_h: None,
        tv_rmt: None,
        tv_poisson: None,
        excluded_fraction: None,
        spec: SpecVerdict::Unavailable,
    };
    let (mut deviation, mut z) = (Vec::new(), Vec::new());

    if let (Some(x), Some(y)) = (a.final_stats(), lorenz_ref.final_stats()) {
        if x.len() != y.len() {
            return Err(Error::Config(format!(
                "grid mismatch: {} has {} Lorenz points, {} has {}",
                a.label,
                x.len(),
                lorenz_ref.label,
                y.len()
            )));
        }
        deviation = x.mean.iter().zip(&y.mean).map(|(p, q)| p - q).collect();
        if let (Some(sa), Some(sb)) = (x.stderr(), y.stderr()) {
            z = (0..x.len())
                .map(|k| deviation_z(x.mean[k] - y.mean[k], sa[k].hypot(sb[k])))
                .collect::<Vec<_>>();
            let m = z.iter().copied().fold(0.0, f64::max);
            row.max_z = Some(m);
            row.ave_h = Some(m < th.ave_max_z);
        }
        row.peak_stddev = x.peak_stddev();
        row.peak_stddev_ref = y.peak_stddev();
        if let (Some(p), Some(q)) = (row.peak_stddev, row.peak_stddev_ref) {
            let ratio = p / q;
            row.fluc_ratio = Some(ratio);
            row.fluc_h = Some(ratio >= th.fluc_band.0 && ratio <= th.fluc_band.1);
        }
    }

    let mine = a.parity_ratios.as_ref().or(a.ratios.as_ref());
    if let (Some(mine), Some(theirs)) = (mine, spectral_ref.ratios.as_ref()) {
        row.excluded_fraction = Some(mine.excluded_fraction());
        if mine.is_singular() {
            row.spec = SpecVerdict::Singular;
        } else {
            let edges = a.edges();
            let h = mine.histogram(&edges)?;
            let tv_rmt = histogram_distance(&h, &theirs.histogram(&edges)?)?;
            let tv_poisson = match poisson.and_then(|p| p.ratios.as_ref()) {
                Some(p) => histogram_distance(&h, &p.histogram(&edges)?)?,
                None => distribution_distance(&h, ReferenceModel::Poisson)?,
            };
            row.spec = if tv_rmt + th.spec_margin <= tv_poisson {
                SpecVerdict::RmtLike
            } else if tv_poisson + th.spec_margin <= tv_rmt {
                SpecVerdict::PoissonLike
            } else {
                SpecVerdict::Inconclusive
            };
            row.tv_rmt = Some(tv_rmt);
            row.tv_poisson = Some(tv_poisson);
        }
    }
    Ok(CompareReport { row, deviation, z })
}

const VERDICT_HEADER: [&str; 13] = [
    "family",
    "lorenz_reference",
    "spectral_reference",
    "max_z",
    "ave_h",
    "peak_stddev",
    "peak_stddev_ref",
    "fluc_ratio",
    "fluc_h",
    "tv_rmt",
    "tv_poisson",
    "excluded_fraction",
    "spec",
];

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn yes_no(x: Option<bool>) -> String {
    x.map(|b| if b { "YES" } else { "NO" }.to_string())
        .unwrap_or_default()
}

pub fn verdicts_csv<'a>(rows: impl IntoIterator<Item = &'a VerdictRow>) -> Result<String> {
    let rows = rows.into_iter().map(|r| {
        vec![
            r.family.clone(),
            r.lorenz_reference.clone(),
            r.spectral_reference.clone(),
            opt(r.max_z),
            yes_no(r.ave_h),
            opt(r.peak_stddev),
            opt(r.peak_stddev_ref),
            opt(r.fluc_ratio),
            yes_no(r.fluc_h),
            opt(r.tv_rmt),
            opt(r.tv_poisson),
            opt(r.excluded_fraction),
            r.spec.to_string(),
        ]
    });
    write_csv(&VERDICT_HEADER, rows)
}

pub fn parse_verdicts_csv(text: &str) -> Result<Vec<VerdictRow>> {
    let float = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("bad number {s:?}")))
        }
    };
    let flag = |s: &str| -> Result<Option<bool>> {
        match s {
            "" => Ok(None),
            "YES" => Ok(Some(true)),
            "NO" => Ok(Some(false)),
            _ => Err(Error::Parse(format!("bad verdict {s:?}"))),
        }
    };
    read_csv(text, &VERDICT_HEADER)?
        .iter()
        .map(|r| {
            Ok(VerdictRow {
                family: r[0].to_string(),
                lorenz_reference: r[1].to_string(),
                spectral_reference: r[2].to_string(),
                max_z: float(&r[3])?,
                ave_h: flag(&r[4])?,
                peak_stddev: float(&r[5])?,
                peak_stddev_ref: float(&r[6])?,
                fluc_ratio: float(&r[7])?,
                fluc_h: flag(&r[8])?,
                tv_rmt: float(&r[9])?,
                tv_poisson: float(&r[10])?,
                excluded_fraction: float(&r[11])?,
                spec: r[12].parse()?,
            })
        })
        .collect()
}

/// Per-`k` deviations of a comparison: `k, k_over_N, diff, z`.
pub fn deviations_csv(report: &CompareReport) -> Result<String> {
    let n = report.deviation.len();
    let rows = (0..n).map(|k| {
        vec![
            (k + 1).to_string(),
            format_float((k + 1) as f64 / n as f64),
            format_float(report.deviation[k]),
            report
                .z
                .get(k)
                .map(|&z| format_float(z))
                .unwrap_or_default(),
        ]
    });
    write_csv(&["k", "k_over_N", "diff", "z"], rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Config {
    pub n: usize,
    pub gates: usize,
    pub samples: usize,
    pub seed: u64,
    /// Families run in addition to the twelve table rows.
    pub extra: Vec<String>,
    pub histogram: HistogramConfig,
    pub bootstrap: BootstrapConfig,
    pub thresholds: Thresholds,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            n: 8,
            gates: crate::families::ASYMPTOTIC_GATES,
            samples: 5000,
            seed: 2019,
            extra: vec!["G1-rn-0".into()],
            histogram: HistogramConfig::default(),
            bootstrap: BootstrapConfig::default(),
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Table1Result {
    /// Family runs: the table rows in order, then the extras.
    pub runs: Vec<EnsembleOutput>,
    /// `Haar-n`, `Haar-(n-1)`, `Haar-(n-2)`.
    pub references: Vec<EnsembleOutput>,
    /// One report per entry of `runs`.
    pub reports: Vec<CompareReport>,
}

impl Table1Result {
    pub fn run(&self, label: &str) -> Option<&EnsembleOutput> {
        self.runs
            .iter()
            .chain(&self.references)
            .find(|r| r.label == label)
    }

    pub fn report(&self, label: &str) -> Option<&CompareReport> {
        self.reports.iter().find(|r| r.row.family == label)
    }
}

/// Runs every table family and the Haar references and grades each family.
/// Parity-conserving families are graded on parity-compressed Lorenz curves
/// against `Haar-(n-1)` and on parity-sector spectra against `Haar-(n-2)`.
pub fn table1(cfg: &Table1Config, workers: usize) -> Result<Table1Result> {
    if cfg.n < 4 {
        return Err(Error::Config("the verdict table needs n ≥ 4".into()));
    }
    let mut references = Vec::new();
    for n in [cfg.n, cfg.n - 1, cfg.n - 2] {
        let mut r = ReferenceConfig::haar(n, cfg.samples, 0);
        r.seed = derive_seed(cfg.seed, &r.reference.label());
        r.histogram = cfg.histogram;
        r.bootstrap = cfg.bootstrap;
        if n % 2 == 1 {
            r.analyses = vec![Analysis::Lorenz, Analysis::Fluctuations];
        }
        references.push(run_reference_with(&r, workers)?);
    }

    let mut runs = Vec::new();
    let mut reports = Vec::new();
    let names = TABLE1_FAMILIES
        .iter()
        .map(|s| s.to_string())
        .chain(cfg.extra.iter().cloned());
    for name in names {
        let spec = FamilySpec::parse(&name, cfg.n)?;
        let label = spec.label();
        let mut c = EnsembleConfig::new(&label, cfg.n, cfg.samples, derive_seed(cfg.seed, &label));
        c.gates = cfg.gates;
        c.histogram = cfg.histogram;
        c.bootstrap = cfg.bootstrap;
        if spec.conserves_parity() {
            c.analyses.push(Analysis::ParitySpectrum);
        }
        let out = run_ensemble_with(&c, workers)?;
        let (lorenz_ref, spectral_ref) = if spec.conserves_parity() {
            (&references[1], &references[2])
        } else {
            (&references[0], &references[0])
        };
        reports.push(compare_runs(
            &out,
            lorenz_ref,
            Some(spectral_ref),
            None,
            &cfg.thresholds,
        )?);
        runs.push(out);
    }
    Ok(Table1Result {
        runs,
        references,
        reports,
    })
}

/// Writes each run into its own subdirectory plus `verdicts.csv`.
pub fn write_table1(result: &Table1Result, dir: &Path) -> Result<()> {
    for out in result.runs.iter().chain(&result.references) {
        write_outputs(out, &dir.join(&out.label))?;
    }
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("verdicts.csv"),
        verdicts_csv(result.reports.iter().map(|r| &r.row))?,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::run_reference_with;

    #[test]
    fn self_comparison_is_exact() {
        let mut r = ReferenceConfig::haar(4, 50, 9);
        r.bootstrap.resamples = 20;
        let h = run_reference_with(&r, 1).unwrap();
        let rep = compare_runs(&h, &h, None, None, &Thresholds::default()).unwrap();
        assert!(rep.deviation.iter().all(|&d| d == 0.0));
        assert_eq!(rep.row.max_z, Some(0.0));
        assert_eq!(rep.row.ave_h, Some(true));
        assert_eq!(rep.row.fluc_ratio, Some(1.0));
        assert_eq!(rep.row.tv_rmt, Some(0.0));
    }

    #[test]
    fn grid_mismatch() {
        let mut r = ReferenceConfig::haar(3, 5, 1);
        r.analyses = vec![Analysis::Lorenz];
        let a = run_reference_with(&r, 1).unwrap();
        let b = run_reference_with(&ReferenceConfig::haar(4, 5, 1), 1).unwrap();
        assert!(matches!(
            compare_runs(&a, &b, None, None, &Thresholds::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn verdict_csv_round_trip() {
        let row = VerdictRow {
            family: "G3-rn-rs".into(),
            lorenz_reference: "Haar-8".into(),
            spectral_reference: "Haar-8".into(),
            max_z: Some(1.25),
            ave_h: Some(true),
            peak_stddev: Some(0.01),
            peak_stddev_ref: Some(0.011),
            fluc_ratio: Some(0.01 / 0.011),
            fluc_h: Some(true),
            tv_rmt: None,
            tv_poisson: None,
            excluded_fraction: Some(1.0),
            spec: SpecVerdict::Singular,
        };
        let text = verdicts_csv([&row]).unwrap();
        assert_eq!(parse_verdicts_csv(&text).unwrap(), vec![row]);
    }
}
