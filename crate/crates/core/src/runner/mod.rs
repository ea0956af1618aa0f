//! Seeded, parallel ensembles over circuit families and reference states.
//!
//! Every sample draws from its own ChaCha8 stream (see [`SEED_RULE`]), so the
//! result of sample `s` does not depend on which worker ran it. Samples are
//! simulated in chunks on a rayon pool and folded into the accumulators in
//! index order, which makes the outputs bit-identical for any worker count.

mod compare;
mod io;

pub use compare::{
    compare_runs, deviations_csv, parse_verdicts_csv, table1, verdicts_csv, write_table1,
    CompareReport, SpecVerdict, Table1Config, Table1Result, Thresholds, VerdictRow,
    TABLE1_FAMILIES,
};
pub use io::{
    format_float, hist_csv, lorenz_csv, lorenz_snapshots_csv, parse_hist_csv, parse_lorenz_csv,
    parse_lorenz_snapshots_csv, parse_ratios_csv, ratios_csv, read_outputs, write_outputs,
    FileDigest, RunManifest, RunSummary, SCHEMA_VERSION,
};

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::families::{
    execute, sample_circuit_with, FamilySpec, PairSelection, SamplingOptions, SnapshotSchedule,
};
use crate::majorization::{bootstrap_peak_stddev, CumulantVector, LorenzAccumulator, LorenzStats};
use crate::simcore::{check_qubit_count, Cut, StateVector};
use crate::spectrum::{
    histogram, parity_split_spectra, uniform_edges, GapRatios, RatioHistogram, SpectrumSample,
    DEFAULT_BINS, DEFAULT_RANGE, DEGENERACY_TOL,
};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "CIRCMAJ_WORKERS";

pub const SEED_RULE: &str = "sample s draws from ChaCha8 keyed with SHA-256(\"circmaj-seed-v1\" || seed as 8 \
little-endian bytes), stream s, word position 0; the bootstrap uses stream 2^64-1 of the same key; batch runs derive \
each run's seed as the first 8 bytes (little endian) of SHA-256(\"circmaj-run-v1\" || master seed as 8 little-endian \
bytes || label)";

const CHUNK: usize = 256;
const BOOTSTRAP_STREAM: u64 = u64::MAX;

fn stream_key(seed: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"circmaj-seed-v1");
    h.update(seed.to_le_bytes());
    h.finalize().into()
}

/// Random stream of sample `s` under master seed `seed`.
pub fn sample_rng(seed: u64, s: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(stream_key(seed));
    rng.set_stream(s);
    rng
}

/// Seed of the run called `label` inside a batch keyed by `master`.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(b"circmaj-run-v1");
    h.update(master.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Lorenz,
    Fluctuations,
    Spectrum,
    ParitySpectrum,
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Analysis::Lorenz => "lorenz",
            Analysis::Fluctuations => "fluctuations",
            Analysis::Spectrum => "spectrum",
            Analysis::ParitySpectrum => "parity_spectrum",
        })
    }
}

impl FromStr for Analysis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "lorenz" => Ok(Analysis::Lorenz),
            "fluctuations" => Ok(Analysis::Fluctuations),
            "spectrum" => Ok(Analysis::Spectrum),
            "parity_spectrum" => Ok(Analysis::ParitySpectrum),
            _ => Err(Error::Config(format!("unknown analysis {s:?}"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramConfig {
    pub bins: usize,
    pub range: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            range: DEFAULT_RANGE,
        }
    }
}

impl HistogramConfig {
    pub fn edges(&self) -> Vec<f64> {
        uniform_edges(self.bins, self.range)
    }

    fn validate(&self) -> Result<()> {
        if self.bins == 0 || !(self.range > 0.0 && self.range.is_finite()) {
            return Err(Error::Config(
                "histogram needs bins ≥ 1 and a positive finite range".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub confidence: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            resamples: 1000,
            confidence: 0.99,
        }
    }
}

fn default_gates() -> usize {
    crate::families::ASYMPTOTIC_GATES
}

fn default_analyses() -> Vec<Analysis> {
    vec![Analysis::Lorenz, Analysis::Fluctuations, Analysis::Spectrum]
}

/// One circuit-family ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    /// `A-B-C` family name.
    pub family: String,
    pub n: usize,
    /// Gates per realization; ignored by the diagonal families.
    #[serde(default = "default_gates")]
    pub gates: usize,
    pub samples: usize,
    pub seed: u64,
    /// Snapshot times; the family's default grid when absent. Time 0 is
    /// always recorded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<Vec<usize>>,
    #[serde(default = "default_analyses")]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub cnot_pairs: PairSelection,
    #[serde(default)]
    pub histogram: HistogramConfig,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
}

impl EnsembleConfig {
    pub fn new(family: &str, n: usize, samples: usize, seed: u64) -> Self {
        Self {
            family: family.to_string(),
            n,
            gates: default_gates(),
            samples,
            seed,
            snapshots: None,
            analyses: default_analyses(),
            cnot_pairs: PairSelection::default(),
            histogram: HistogramConfig::default(),
            bootstrap: BootstrapConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn spec(&self) -> Result<FamilySpec> {
        FamilySpec::parse(&self.family, self.n)
    }

    pub fn schedule(&self) -> Result<SnapshotSchedule> {
        let spec = self.spec()?;
        match &self.snapshots {
            Some(t) => SnapshotSchedule::new(t.clone(), spec.steps(self.gates)),
            None => Ok(spec.default_snapshots(self.gates)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let spec = self.spec()?;
        check_common(
            self.samples,
            &self.analyses,
            &self.histogram,
            &self.bootstrap,
        )?;
        self.schedule()?;
        if self.analyses.contains(&Analysis::ParitySpectrum) && !spec.conserves_parity() {
            return Err(Error::Config(format!(
                "{} does not conserve parity",
                spec.label()
            )));
        }
        Ok(())
    }
}

fn check_common(
    samples: usize,
    analyses: &[Analysis],
    h: &HistogramConfig,
    b: &BootstrapConfig,
) -> Result<()> {
    if samples == 0 {
        return Err(Error::Config("samples must be at least 1".into()));
    }
    if analyses.is_empty() {
        return Err(Error::Config("at least one analysis is required".into()));
    }
    h.validate()?;
    if b.resamples == 0 || !(b.confidence > 0.0 && b.confidence < 1.0) {
        return Err(Error::Config(
            "bootstrap needs resamples ≥ 1 and confidence in (0, 1)".into(),
        ));
    }
    Ok(())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReferenceKind {
    /// Haar-random `n`-qubit states.
    Haar { n: usize },
    /// Independent uniform levels in `(0, 1)`.
    PoissonLevels { levels: usize },
}

impl ReferenceKind {
    pub fn label(&self) -> String {
        match self {
            ReferenceKind::Haar { n } => format!("Haar-{n}"),
            ReferenceKind::PoissonLevels { levels } => format!("Poisson-{levels}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub reference: ReferenceKind,
    pub samples: usize,
    pub seed: u64,
    #[serde(default = "default_analyses")]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub histogram: HistogramConfig,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
}

impl ReferenceConfig {
    pub fn haar(n: usize, samples: usize, seed: u64) -> Self {
        Self {
            reference: ReferenceKind::Haar { n },
            samples,
            seed,
            analyses: default_analyses(),
            histogram: HistogramConfig::default(),
            bootstrap: BootstrapConfig::default(),
        }
    }

    pub fn poisson(levels: usize, samples: usize, seed: u64) -> Self {
        Self {
            reference: ReferenceKind::PoissonLevels { levels },
            samples,
            seed,
            analyses: vec![Analysis::Spectrum],
            histogram: HistogramConfig::default(),
            bootstrap: BootstrapConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_common(
            self.samples,
            &self.analyses,
            &self.histogram,
            &self.bootstrap,
        )?;
        if self.analyses.contains(&Analysis::ParitySpectrum) {
            return Err(Error::Config(
                "reference ensembles have no parity sectors".into(),
            ));
        }
        match self.reference {
            ReferenceKind::Haar { n } => {
                check_qubit_count(n)?;
                if n % 2 == 1 && self.analyses.contains(&Analysis::Spectrum) {
                    return Err(Error::Config(format!(
                        "Haar-{n} has no balanced cut for the spectrum analysis"
                    )));
                }
                Ok(())
            }
            ReferenceKind::PoissonLevels { levels } => {
                if self
                    .analyses
                    .iter()
                    .any(|a| matches!(a, Analysis::Lorenz | Analysis::Fluctuations))
                {
                    return Err(Error::Config(
                        "Poisson levels support only the spectrum analysis".into(),
                    ));
                }
                if levels < 3 {
                    return Err(Error::TooFew {
                        need: 3,
                        got: levels,
                    });
                }
                Ok(())
            }
        }
    }
}

/// Configuration echo stored in the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunSpec {
    Ensemble(EnsembleConfig),
    Reference(ReferenceConfig),
}

impl RunSpec {
    pub fn label(&self) -> Result<String> {
        match self {
            RunSpec::Ensemble(c) => Ok(c.spec()?.label()),
            RunSpec::Reference(c) => Ok(c.reference.label()),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            RunSpec::Ensemble(c) => c.seed,
            RunSpec::Reference(c) => c.seed,
        }
    }

    pub fn samples(&self) -> usize {
        match self {
            RunSpec::Ensemble(c) => c.samples,
            RunSpec::Reference(c) => c.samples,
        }
    }

    pub fn analyses(&self) -> &[Analysis] {
        match self {
            RunSpec::Ensemble(c) => &c.analyses,
            RunSpec::Reference(c) => &c.analyses,
        }
    }

    pub fn histogram(&self) -> HistogramConfig {
        match self {
            RunSpec::Ensemble(c) => c.histogram,
            RunSpec::Reference(c) => c.histogram,
        }
    }

    fn bootstrap(&self) -> BootstrapConfig {
        match self {
            RunSpec::Ensemble(c) => c.bootstrap,
            RunSpec::Reference(c) => c.bootstrap,
        }
    }

    fn wants(&self, a: Analysis) -> bool {
        self.analyses().contains(&a)
    }

    fn wants_lorenz(&self) -> bool {
        self.wants(Analysis::Lorenz) || self.wants(Analysis::Fluctuations)
    }
}

/// Pooled gap ratios of an ensemble, tagged with their sample index.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatioSet {
    pub ratios: Vec<(usize, f64)>,
    /// Ratios dropped because a gap was degenerate.
    pub excluded: usize,
    /// Spectra contributing (parity runs contribute two per sample).
    pub spectra: usize,
}

impl RatioSet {
    fn push(&mut self, s: usize, g: &GapRatios) {
        self.ratios.extend(g.ratios.iter().map(|&r| (s, r)));
        self.excluded += g.excluded;
        self.spectra += 1;
    }

    pub fn values(&self) -> Vec<f64> {
        self.ratios.iter().map(|&(_, r)| r).collect()
    }

    /// No ratio survived the degeneracy filter.
    pub fn is_singular(&self) -> bool {
        self.ratios.is_empty()
    }

    /// Share of all ratios dropped for degeneracy.
    pub fn excluded_fraction(&self) -> f64 {
        let total = self.excluded + self.ratios.len();
        if total == 0 {
            0.0
        } else {
            self.excluded as f64 / total as f64
        }
    }

    pub fn histogram(&self, edges: &[f64]) -> Result<RatioHistogram> {
        histogram(&self.values(), edges)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotStats {
    pub time: usize,
    pub stats: LorenzStats,
}

/// Percentile bootstrap interval of the peak cumulant stddev at the final
/// snapshot.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakInterval {
    pub lo: f64,
    pub hi: f64,
    pub confidence: f64,
    pub resamples: usize,
}

/// Everything an ensemble run produces.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleOutput {
    pub run: RunSpec,
    pub label: String,
    /// Length of the Lorenz curves (0 without a Lorenz analysis).
    pub dimension: usize,
    /// Lorenz curves taken on the parity-compressed state.
    pub compressed: bool,
    pub snapshots: Vec<SnapshotStats>,
    pub peak_interval: Option<PeakInterval>,
    pub ratios: Option<RatioSet>,
    pub parity_ratios: Option<RatioSet>,
}

impl EnsembleOutput {
    /// Lorenz statistics at the last snapshot.
    pub fn final_stats(&self) -> Option<&LorenzStats> {
        self.snapshots.last().map(|s| &s.stats)
    }

    pub fn snapshot(&self, time: usize) -> Option<&LorenzStats> {
        self.snapshots
            .iter()
            .find(|s| s.time == time)
            .map(|s| &s.stats)
    }

    pub fn edges(&self) -> Vec<f64> {
        self.run.histogram().edges()
    }

    pub fn histogram(&self) -> Option<Result<RatioHistogram>> {
        self.ratios.as_ref().map(|r| r.histogram(&self.edges()))
    }

    pub fn parity_histogram(&self) -> Option<Result<RatioHistogram>> {
        self.parity_ratios
            .as_ref()
            .map(|r| r.histogram(&self.edges()))
    }
}

struct SampleRecord {
    curves: Vec<CumulantVector>,
    spectrum: Option<SpectrumSample>,
    parity: Option<(SpectrumSample, SpectrumSample)>,
}

fn lorenz_curve(state: &StateVector, compress: bool) -> Result<CumulantVector> {
    if compress {
        Ok(state.compress_parity()?.probabilities().cumulants())
    } else {
        Ok(state.probabilities().cumulants())
    }
}

struct Reducer {
    times: Vec<usize>,
    acc: Vec<LorenzAccumulator>,
    finals: Option<Vec<CumulantVector>>,
    ratios: Option<RatioSet>,
    parity: Option<RatioSet>,
    next: usize,
}

impl Reducer {
    fn push(&mut self, rec: SampleRecord) -> Result<()> {
        let s = self.next;
        self.next += 1;
        if !self.acc.is_empty() {
            if rec.curves.len() != self.acc.len() {
                return Err(Error::LengthMismatch(self.acc.len(), rec.curves.len()));
            }
            for (a, c) in self.acc.iter_mut().zip(&rec.curves) {
                a.push(c)?;
            }
            if let Some(f) = self.finals.as_mut() {
                f.push(rec.curves.last().expect("nonempty").clone());
            }
        }
        if let (Some(set), Some(sp)) = (self.ratios.as_mut(), rec.spectrum.as_ref()) {
            set.push(s, &sp.ratios);
        }
        if let (Some(set), Some((even, odd))) = (self.parity.as_mut(), rec.parity.as_ref()) {
            set.push(s, &even.ratios);
            set.push(s, &odd.ratios);
        }
        Ok(())
    }
}

fn run_samples<F>(
    run: RunSpec,
    times: Vec<usize>,
    dimension: usize,
    compressed: bool,
    workers: usize,
    sim: F,
) -> Result<EnsembleOutput>
where
    F: Fn(u64) -> Result<SampleRecord> + Sync,
{
    let label = run.label()?;
    let samples = run.samples();
    let lorenz = run.wants_lorenz();
    let boot = run.bootstrap();
    let keep_finals = run.wants(Analysis::Fluctuations) && samples >= 2;
    let mut red = Reducer {
        acc: if lorenz {
            times
                .iter()
                .map(|_| LorenzAccumulator::new(dimension))
                .collect()
        } else {
            Vec::new()
        },
        times,
        finals: keep_finals.then(|| Vec::with_capacity(samples)),
        ratios: run.wants(Analysis::Spectrum).then(RatioSet::default),
        parity: run.wants(Analysis::ParitySpectrum).then(RatioSet::default),
        next: 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    for start in (0..samples).step_by(CHUNK) {
        let end = (start + CHUNK).min(samples);
        let batch: Vec<Result<SampleRecord>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|s| sim(s as u64))
                .collect()
        });
        for rec in batch {
            red.push(rec?)?;
        }
    }

    let peak_interval = match red.finals.as_ref() {
        Some(curves) => {
            let mut rng = sample_rng(run.seed(), BOOTSTRAP_STREAM);
            let (lo, hi) =
                bootstrap_peak_stddev(curves, boot.resamples, boot.confidence, &mut rng)?;
            Some(PeakInterval {
                lo,
                hi,
                confidence: boot.confidence,
                resamples: boot.resamples,
            })
        }
        None => None,
    };
    let snapshots = red
        .times
        .iter()
        .zip(red.acc)
        .map(|(&time, a)| {
            Ok(SnapshotStats {
                time,
                stats: a.finish()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleOutput {
        run,
        label,
        dimension: if lorenz { dimension } else { 0 },
        compressed,
        snapshots,
        peak_interval,
        ratios: red.ratios,
        parity_ratios: red.parity,
    })
}

/// Runs a circuit-family ensemble on [`default_workers`] threads.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleOutput> {
    run_ensemble_with(config, default_workers())
}

pub fn run_ensemble_with(config: &EnsembleConfig, workers: usize) -> Result<EnsembleOutput> {
    config.validate()?;
    let spec = config.spec()?;
    let schedule = config.schedule()?;
    let options = SamplingOptions {
        cnot_pairs: config.cnot_pairs,
    };
    let run = RunSpec::Ensemble(config.clone());
    let lorenz = run.wants_lorenz();
    let spectrum = run.wants(Analysis::Spectrum);
    let parity = run.wants(Analysis::ParitySpectrum);
    let compress = spec.conserves_parity();
    let dimension = if compress {
        1 << (spec.n() - 1)
    } else {
        1 << spec.n()
    };
    let times: Vec<usize> = std::iter::once(0)
        .chain(schedule.times().iter().copied())
        .collect();

    let sim = |s: u64| -> Result<SampleRecord> {
        let mut rng = sample_rng(config.seed, s);
        let circuit = sample_circuit_with(&spec, config.gates, &options, &mut rng)?;
        let mut curves = Vec::with_capacity(times.len());
        let state = execute(&circuit, &schedule, &mut rng, |_, st| {
            if lorenz {
                curves.push(lorenz_curve(st, compress)?);
            }
            Ok(())
        })?;
        Ok(SampleRecord {
            curves,
            spectrum: if spectrum {
                Some(SpectrumSample::of_state(&state, &Cut::Balanced)?)
            } else {
                None
            },
            parity: if parity {
                let p = parity_split_spectra(&state, &Cut::Balanced)?;
                Some((p.even, p.odd))
            } else {
                None
            },
        })
    };
    run_samples(
        run.clone(),
        times.clone(),
        dimension,
        compress,
        workers,
        sim,
    )
}

/// Runs a reference ensemble on [`default_workers`] threads.
pub fn run_reference(config: &ReferenceConfig) -> Result<EnsembleOutput> {
    run_reference_with(config, default_workers())
}

pub fn run_reference_with(config: &ReferenceConfig, workers: usize) -> Result<EnsembleOutput> {
    config.validate()?;
    let run = RunSpec::Reference(config.clone());
    let lorenz = run.wants_lorenz();
    let spectrum = run.wants(Analysis::Spectrum);
    match config.reference {
        ReferenceKind::Haar { n } => {
            let sim = |s: u64| -> Result<SampleRecord> {
                let mut rng = sample_rng(config.seed, s);
                let state = StateVector::haar_random(n, &mut rng)?;
                Ok(SampleRecord {
                    curves: if lorenz {
                        vec![lorenz_curve(&state, false)?]
                    } else {
                        Vec::new()
                    },
                    spectrum: if spectrum {
                        Some(SpectrumSample::of_state(&state, &Cut::Balanced)?)
                    } else {
                        None
                    },
                    parity: None,
                })
            };
            run_samples(run.clone(), vec![0], 1 << n, false, workers, sim)
        }
        ReferenceKind::PoissonLevels { levels } => {
            let sim = |s: u64| -> Result<SampleRecord> {
                let mut rng = sample_rng(config.seed, s);
                let mut l: Vec<f64> = (0..levels).map(|_| rng.random::<f64>()).collect();
                l.sort_by(f64::total_cmp);
                Ok(SampleRecord {
                    curves: Vec::new(),
                    spectrum: Some(SpectrumSample::from_levels(l, DEGENERACY_TOL)?),
                    parity: None,
                })
            };
            run_samples(run.clone(), Vec::new(), 0, false, workers, sim)
        }
    }
}
