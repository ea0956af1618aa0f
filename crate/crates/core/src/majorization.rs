//! Cumulants (Lorenz curves), the majorization order and ensemble statistics
//! of Lorenz curves.
//!
//! For a probability vector `p` of length `N`, the cumulant `F(k)` is the sum
//! of its `k` largest entries. `x` majorizes `y` when `F_x(k) ≥ F_y(k)` for
//! every `k`; the Lorenz curve is `F(k)` plotted against `k/N`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::simcore::ProbabilityVector;

/// Default tolerance when comparing raw (single-realization) curves.
pub const RAW_TOL: f64 = 1e-12;

/// Partial sums of the descending-sorted probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulantVector(Vec<f64>);

impl CumulantVector {
    /// Wraps precomputed cumulants after checking they are nondecreasing,
    /// concave and end at one.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let Some(&last) = values.last() else {
            return Err(Error::TooFew { need: 1, got: 0 });
        };
        if (last - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidProbabilities(format!(
                "last cumulant is {last}"
            )));
        }
        let mut prev_inc = f64::INFINITY;
        let mut prev = 0.0;
        for &v in &values {
            let inc = v - prev;
            if inc < -1e-12 || inc > prev_inc + 1e-12 {
                return Err(Error::InvalidProbabilities(
                    "cumulants not nondecreasing and concave".into(),
                ));
            }
            prev_inc = inc;
            prev = v;
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Abscissae `k/N`, `k = 1..=N`.
    pub fn abscissae(&self) -> Vec<f64> {
        let n = self.0.len() as f64;
        (1..=self.0.len()).map(|k| k as f64 / n).collect()
    }
}

impl ProbabilityVector {
    pub fn cumulants(&self) -> CumulantVector {
        CumulantVector(sorted_partial_sums(self.as_slice()))
    }
}

fn sorted_partial_sums(p: &[f64]) -> Vec<f64> {
    let mut sorted = p.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    sorted
        .into_iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

/// Cumulants of a raw probability slice; rejects negative entries and sums
/// farther than `1e-10` from one.
pub fn cumulants(p: &[f64]) -> Result<CumulantVector> {
    ProbabilityVector::new(p.to_vec()).map(|pv| pv.cumulants())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum MajorizationOrder {
    XMajorizesY,
    YMajorizesX,
    Equal,
    Incomparable,
}

impl MajorizationOrder {
    pub fn reversed(self) -> Self {
        match self {
            MajorizationOrder::XMajorizesY => MajorizationOrder::YMajorizesX,
            MajorizationOrder::YMajorizesX => MajorizationOrder::XMajorizesY,
            other => other,
        }
    }
}

/// Majorization order with a uniform tolerance.
pub fn compare(x: &CumulantVector, y: &CumulantVector, tol: f64) -> Result<MajorizationOrder> {
    compare_pointwise(x, y, &vec![tol; x.len()])
}

/// Majorization order with a per-index tolerance: `Equal` when every
/// `|F_x - F_y| ≤ tol`, `XMajorizesY` when `F_x ≥ F_y - tol` everywhere and
/// `F_x > F_y + tol` somewhere, symmetrically for `YMajorizesX`, and
/// `Incomparable` otherwise.
pub fn compare_pointwise(
    x: &CumulantVector,
    y: &CumulantVector,
    tol: &[f64],
) -> Result<MajorizationOrder> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if tol.len() != x.len() {
        return Err(Error::LengthMismatch(tol.len(), x.len()));
    }
    let (mut x_above, mut y_above) = (false, false);
    for ((a, b), t) in x.0.iter().zip(&y.0).zip(tol) {
        let d = a - b;
        if d > *t {
            x_above = true;
        } else if d < -*t {
            y_above = true;
        }
    }
    Ok(match (x_above, y_above) {
        (false, false) => MajorizationOrder::Equal,
        (true, false) => MajorizationOrder::XMajorizesY,
        (false, true) => MajorizationOrder::YMajorizesX,
        (true, true) => MajorizationOrder::Incomparable,
    })
}

/// Per-index mean and spread of an ensemble of Lorenz curves.
#[derive(Clone, Debug, PartialEq)]
pub struct LorenzStats {
    pub mean: Vec<f64>,
    /// Sample standard deviation (divisor `samples - 1`); `None` for a
    /// single sample.
    pub stddev: Option<Vec<f64>>,
    pub samples: usize,
}

impl LorenzStats {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Standard error of the mean, `stddev / √samples`.
    pub fn stderr(&self) -> Option<Vec<f64>> {
        let s = (self.samples as f64).sqrt();
        self.stddev
            .as_ref()
            .map(|sd| sd.iter().map(|x| x / s).collect())
    }

    /// Largest per-index standard deviation.
    pub fn peak_stddev(&self) -> Option<f64> {
        self.stddev
            .as_ref()
            .map(|sd| sd.iter().copied().fold(0.0, f64::max))
    }

    pub fn mean_curve(&self) -> CumulantVector {
        CumulantVector(self.mean.clone())
    }
}

/// Sum with recursive halving; the order depends only on the input length.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

fn check_lengths(curves: &[CumulantVector]) -> Result<usize> {
    let len = curves
        .first()
        .map(CumulantVector::len)
        .ok_or(Error::TooFew { need: 1, got: 0 })?;
    if let Some(c) = curves.iter().find(|c| c.len() != len) {
        return Err(Error::LengthMismatch(len, c.len()));
    }
    Ok(len)
}

/// Mean and sample standard deviation of at least two curves.
pub fn ensemble_stats(curves: &[CumulantVector]) -> Result<LorenzStats> {
    if curves.len() < 2 {
        return Err(Error::TooFew {
            need: 2,
            got: curves.len(),
        });
    }
    let len = check_lengths(curves)?;
    let m = curves.len() as f64;
    let mut mean = Vec::with_capacity(len);
    let mut stddev = Vec::with_capacity(len);
    let mut column = vec![0.0; curves.len()];
    for k in 0..len {
        column.iter_mut().zip(curves).for_each(|(c, v)| *c = v.0[k]);
        let mu = pairwise_sum(&column) / m;
        column.iter_mut().for_each(|c| *c = (*c - mu) * (*c - mu));
        mean.push(mu);
        stddev.push((pairwise_sum(&column) / (m - 1.0)).sqrt());
    }
    Ok(LorenzStats {
        mean,
        stddev: Some(stddev),
        samples: curves.len(),
    })
}

/// Like [`ensemble_stats`] but accepts a single curve, reporting no spread.
pub fn ensemble_mean(curves: &[CumulantVector]) -> Result<LorenzStats> {
    match curves.len() {
        1 => Ok(LorenzStats {
            mean: curves[0].0.clone(),
            stddev: None,
            samples: 1,
        }),
        _ => ensemble_stats(curves),
    }
}

/// Streaming counterpart of [`ensemble_stats`] (Welford updates). Feed
/// curves in a fixed order to get reproducible bits.
#[derive(Clone, Debug)]
pub struct LorenzAccumulator {
    mean: Vec<f64>,
    m2: Vec<f64>,
    samples: usize,
}

impl LorenzAccumulator {
    pub fn new(len: usize) -> Self {
        Self {
            mean: vec![0.0; len],
            m2: vec![0.0; len],
            samples: 0,
        }
    }

    pub fn push(&mut self, curve: &CumulantVector) -> Result<()> {
        if curve.len() != self.mean.len() {
            return Err(Error::LengthMismatch(self.mean.len(), curve.len()));
        }
        self.samples += 1;
        let m = self.samples as f64;
        for ((mu, m2), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(&curve.0) {
            let d = x - *mu;
            *mu += d / m;
            *m2 += d * (x - *mu);
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn finish(self) -> Result<LorenzStats> {
        let samples = self.samples;
        match samples {
            0 => Err(Error::TooFew { need: 1, got: 0 }),
            1 => Ok(LorenzStats {
                mean: self.mean,
                stddev: None,
                samples,
            }),
            _ => {
                let d = (samples - 1) as f64;
                let stddev = self.m2.iter().map(|v| (v.max(0.0) / d).sqrt()).collect();
                Ok(LorenzStats {
                    mean: self.mean,
                    stddev: Some(stddev),
                    samples,
                })
            }
        }
    }
}

/// First place where a later curve rose above an earlier one.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct StepViolation {
    pub earlier: usize,
    pub later: usize,
    /// Zero-based cumulant index.
    pub k: usize,
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepwiseReport {
    pub ordered: bool,
    pub first_violation: Option<StepViolation>,
}

/// Checks that every earlier curve majorizes every later one:
/// `F_later(k) ≤ F_earlier(k) + tol(earlier, later, k)`. Pairs are scanned
/// in `(earlier, later)` lexicographic order.
fn stepwise_by<T>(curves: &[&[f64]], tol: T) -> StepwiseReport
where
    T: Fn(usize, usize, usize) -> f64,
{
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            for (k, (a, b)) in curves[i].iter().zip(curves[j]).enumerate() {
                let excess = b - a;
                if excess > tol(i, j, k) {
                    return StepwiseReport {
                        ordered: false,
                        first_violation: Some(StepViolation {
                            earlier: i,
                            later: j,
                            k,
                            excess,
                        }),
                    };
                }
            }
        }
    }
    StepwiseReport {
        ordered: true,
        first_violation: None,
    }
}

/// Stepwise check of time-ordered curves with a uniform tolerance.
pub fn stepwise_order(curves: &[CumulantVector], tol: f64) -> Result<StepwiseReport> {
    if !curves.is_empty() {
        check_lengths(curves)?;
    }
    let views: Vec<&[f64]> = curves.iter().map(|c| c.as_slice()).collect();
    Ok(stepwise_by(&views, |_, _, _| tol))
}

/// Stepwise check of time-ordered ensemble means; the tolerance at each index
/// is `n_se` combined standard errors, `n_se · √(se_a² + se_b²)`, but never
/// below [`RAW_TOL`] (the last cumulant is 1 in every sample, so its spread is
/// pure rounding).
pub fn stepwise_order_stats(stats: &[LorenzStats], n_se: f64) -> Result<StepwiseReport> {
    let len = stats.first().map(LorenzStats::len).unwrap_or(0);
    if let Some(s) = stats.iter().find(|s| s.len() != len) {
        return Err(Error::LengthMismatch(len, s.len()));
    }
    let se: Vec<Vec<f64>> = stats
        .iter()
        .map(|s| {
            s.stderr().ok_or(Error::TooFew {
                need: 2,
                got: s.samples,
            })
        })
        .collect::<Result<_>>()?;
    let views: Vec<&[f64]> = stats.iter().map(|s| s.mean.as_slice()).collect();
    Ok(stepwise_by(&views, |i, j, k| {
        (n_se * se[i][k].hypot(se[j][k])).max(RAW_TOL)
    }))
}

/// `|d| / se`, with deviations within [`RAW_TOL`] scoring zero and any larger
/// deviation against a vanishing error scoring infinity.
pub fn deviation_z(d: f64, se: f64) -> f64 {
    if d.abs() <= RAW_TOL {
        0.0
    } else if se > 0.0 {
        d.abs() / se
    } else {
        f64::INFINITY
    }
}

/// Largest [`deviation_z`] of `F_a - F_b` against `√(se_a² + se_b²)` over
/// all indices.
pub fn max_mean_deviation(a: &LorenzStats, b: &LorenzStats) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let sa = a.stderr().ok_or(Error::TooFew {
        need: 2,
        got: a.samples,
    })?;
    let sb = b.stderr().ok_or(Error::TooFew {
        need: 2,
        got: b.samples,
    })?;
    Ok((0..a.len())
        .map(|k| deviation_z(a.mean[k] - b.mean[k], sa[k].hypot(sb[k])))
        .fold(0.0, f64::max))
}

/// Linear interpolation of a curve given on `k/N`, `k = 1..=N`, anchored at
/// `(0, 0)`.
fn interpolate(curve: &[f64], x: f64) -> f64 {
    let n = curve.len() as f64;
    let pos = x * n;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    let at = |k: usize| {
        if k == 0 {
            0.0
        } else {
            curve[(k - 1).min(curve.len() - 1)]
        }
    };
    if frac == 0.0 {
        at(lo)
    } else {
        at(lo) * (1.0 - frac) + at(lo + 1) * frac
    }
}

/// Sup-norm distance between two Lorenz curves of possibly different
/// lengths, measured on the coarser curve's `k/N` grid with the finer curve
/// linearly interpolated (exact when the grids nest).
pub fn lorenz_sup_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::TooFew { need: 1, got: 0 });
    }
    let (coarse, fine) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let n = coarse.len() as f64;
    Ok(coarse
        .iter()
        .enumerate()
        .map(|(k, &f)| (f - interpolate(fine, (k + 1) as f64 / n)).abs())
        .fold(0.0, f64::max))
}

/// Percentile bootstrap interval for the peak per-index standard deviation
/// of an ensemble of curves.
pub fn bootstrap_peak_stddev<R: Rng + ?Sized>(
    curves: &[CumulantVector],
    resamples: usize,
    confidence: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if curves.len() < 2 {
        return Err(Error::TooFew {
            need: 2,
            got: curves.len(),
        });
    }
    if resamples == 0 || !(0.0..1.0).contains(&confidence) {
        return Err(Error::Config(
            "bootstrap needs resamples ≥ 1 and confidence in [0, 1)".into(),
        ));
    }
    let len = check_lengths(curves)?;
    let m = curves.len();
    let mut peaks = Vec::with_capacity(resamples);
    let mut sum = vec![0.0; len];
    let mut sq = vec![0.0; len];
    for _ in 0..resamples {
        sum.iter_mut().for_each(|x| *x = 0.0);
        sq.iter_mut().for_each(|x| *x = 0.0);
        for _ in 0..m {
            let c = &curves[rng.random_range(0..m)].0;
            for k in 0..len {
                sum[k] += c[k];
                sq[k] += c[k] * c[k];
            }
        }
        let mf = m as f64;
        let peak = (0..len)
            .map(|k| ((sq[k] - sum[k] * sum[k] / mf).max(0.0) / (mf - 1.0)).sqrt())
            .fold(0.0, f64::max);
        peaks.push(peak);
    }
    peaks.sort_by(f64::total_cmp);
    let alpha = (1.0 - confidence) / 2.0;
    let pick = |q: f64| peaks[((q * resamples as f64).floor() as usize).min(resamples - 1)];
    Ok((pick(alpha), pick(1.0 - alpha)))
}
