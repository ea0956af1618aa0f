//! Entanglement-spectrum statistics.
//!
//! Eigenvalues of a balanced-cut reduced density matrix are sorted ascending,
//! consecutive gaps `ε_i = λ_{i+1} - λ_i` are formed and the ratios
//! `r_i = ε_{i+1} / ε_i` are histogrammed. Correlated (random-matrix)
//! spectra follow the Wigner-Dyson surmise
//!
//! ```text
//! P_WD(r) = (r + r²)^β / (Z (1 + r + r²)^(1 + 3β/2))
//! ```
//!
//! with `(β, Z) = (1, 8/27)` (GOE) or `(2, 4π/(81√3))` (GUE), and
//! uncorrelated levels follow `P(r) = 1 / (1 + r)²`. At the matrix sizes used
//! here finite-size effects matter, so circuit ensembles are graded against
//! empirical references built from Haar-random states and from independent
//! uniform levels.

mod eigen;

pub use eigen::{eigenvalues_hermitian, hermitian_eigen, HermitianEigen};

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::simcore::{Cut, StateVector};

/// Gaps below this (relative to unit trace) count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Off-block elements above this break the parity split.
pub const PARITY_BLOCK_TOL: f64 = 1e-8;

pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_RANGE: f64 = 5.0;

/// Gap ratios of one spectrum, with degenerate pairs set aside.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GapRatios {
    pub ratios: Vec<f64>,
    /// Ratios dropped because one of their two gaps was below tolerance.
    pub excluded: usize,
}

impl GapRatios {
    /// True when nothing survived the degeneracy filter.
    pub fn all_degenerate(&self) -> bool {
        self.ratios.is_empty() && self.excluded > 0
    }
}

/// Ratios `ε_{i+1}/ε_i` of an ascending spectrum. A ratio is emitted only when
/// both of its gaps are at least `degeneracy_tol`, so every emitted ratio is
/// positive and `ratios.len() + excluded = levels - 2`.
pub fn gap_ratios(levels: &[f64], degeneracy_tol: f64) -> Result<GapRatios> {
    if levels.len() < 3 {
        return Err(Error::TooFew {
            need: 3,
            got: levels.len(),
        });
    }
    if levels.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("levels must be sorted ascending".into()));
    }
    let gaps: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let mut out = GapRatios::default();
    for w in gaps.windows(2) {
        if w[0] < degeneracy_tol || w[1] < degeneracy_tol {
            out.excluded += 1;
        } else {
            out.ratios.push(w[1] / w[0]);
        }
    }
    Ok(out)
}

/// `min(r, 1/r)`, the bounded ratio used for summary means.
pub fn folded_ratio(r: f64) -> f64 {
    r.min(1.0 / r)
}

/// One spectrum with its ratios.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSample {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub ratios: GapRatios,
}

impl SpectrumSample {
    /// Spectra with fewer than three levels carry no ratios.
    pub fn from_levels(eigenvalues: Vec<f64>, degeneracy_tol: f64) -> Result<Self> {
        let ratios = if eigenvalues.len() < 3 {
            GapRatios::default()
        } else {
            gap_ratios(&eigenvalues, degeneracy_tol)?
        };
        Ok(Self {
            eigenvalues,
            ratios,
        })
    }

    /// Spectrum of the reduced density matrix across `cut`.
    pub fn of_state(state: &StateVector, cut: &Cut) -> Result<Self> {
        let rho = state.partial_trace(cut)?;
        Self::from_levels(eigenvalues_hermitian(&rho)?, DEGENERACY_TOL)
    }
}

/// Spectra of the two local-parity blocks of a reduced density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ParitySpectra {
    pub even: SpectrumSample,
    pub odd: SpectrumSample,
}

/// For a state supported on even global parity, the reduced density matrix
/// is block diagonal in the parity of the kept qubits; returns the spectrum
/// of each block.
pub fn parity_split_spectra(state: &StateVector, cut: &Cut) -> Result<ParitySpectra> {
    let rho = state.partial_trace(cut)?;
    let d = rho.dim();
    let (even, odd): (Vec<usize>, Vec<usize>) = (0..d).partition(|a| a.count_ones() % 2 == 0);
    let mut off: f64 = 0.0;
    for &i in &even {
        for &j in &odd {
            off = off.max(rho.get(i, j).norm());
        }
    }
    if off > PARITY_BLOCK_TOL {
        return Err(Error::SymmetryViolation(off));
    }
    Ok(ParitySpectra {
        even: SpectrumSample::from_levels(
            eigenvalues_hermitian(&rho.submatrix(&even))?,
            DEGENERACY_TOL,
        )?,
        odd: SpectrumSample::from_levels(
            eigenvalues_hermitian(&rho.submatrix(&odd))?,
            DEGENERACY_TOL,
        )?,
    })
}

/// Balanced-cut spectra of Haar-random `n`-qubit states.
pub fn haar_reference<R: Rng + ?Sized>(
    n: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<SpectrumSample>> {
    if n % 2 != 0 {
        return Err(Error::Config(format!(
            "Haar spectral reference needs even n, got {n}"
        )));
    }
    (0..samples)
        .map(|_| SpectrumSample::of_state(&StateVector::haar_random(n, rng)?, &Cut::Balanced))
        .collect()
}

/// Spectra made of `levels` independent uniform points in `(0, 1)`.
pub fn poisson_reference<R: Rng + ?Sized>(
    levels: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<SpectrumSample>> {
    if levels < 3 {
        return Err(Error::TooFew {
            need: 3,
            got: levels,
        });
    }
    (0..samples)
        .map(|_| {
            let mut l: Vec<f64> = (0..levels).map(|_| rng.random::<f64>()).collect();
            l.sort_by(f64::total_cmp);
            SpectrumSample::from_levels(l, DEGENERACY_TOL)
        })
        .collect()
}

/// Reference distributions for gap ratios.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum ReferenceModel {
    WignerDysonGoe,
    WignerDysonGue,
    Poisson,
    /// Balanced-cut spectra of Haar-random `n`-qubit states (empirical).
    HaarEmpirical(usize),
    /// Independent uniform levels (empirical).
    PoissonEmpirical(usize),
}

impl ReferenceModel {
    /// `(β, Z)` of the Wigner-Dyson surmise.
    pub fn wigner_dyson_parameters(self) -> Option<(f64, f64)> {
        match self {
            ReferenceModel::WignerDysonGoe => Some((1.0, 8.0 / 27.0)),
            ReferenceModel::WignerDysonGue => Some((2.0, 4.0 / 81.0 * PI / 3f64.sqrt())),
            _ => None,
        }
    }

    pub fn is_analytic(self) -> bool {
        matches!(
            self,
            ReferenceModel::WignerDysonGoe
                | ReferenceModel::WignerDysonGue
                | ReferenceModel::Poisson
        )
    }
}

/// Density `P(r)` of an analytic model.
pub fn reference_density(model: ReferenceModel, r: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::NegativeArgument(r));
    }
    if let Some((beta, z)) = model.wigner_dyson_parameters() {
        return Ok((r + r * r).powf(beta) / (z * (1.0 + r + r * r).powf(1.0 + 1.5 * beta)));
    }
    match model {
        ReferenceModel::Poisson => Ok(1.0 / ((1.0 + r) * (1.0 + r))),
        other => Err(Error::NoAnalyticDensity(format!("{other:?}"))),
    }
}

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// `∫_a^b P(r) dr` for an analytic model.
pub fn model_mass(model: ReferenceModel, a: f64, b: f64) -> Result<f64> {
    if !model.is_analytic() {
        return Err(Error::NoAnalyticDensity(format!("{model:?}")));
    }
    let f = |r: f64| reference_density(model, r).unwrap_or(0.0);
    Ok(integrate(&f, a, b, 1e-12))
}

/// Mean of `min(r, 1/r)` under an analytic model. Both surmises are invariant
/// under `r → 1/r`, so this is `2 ∫_0^1 r P(r) dr`.
pub fn model_mean_folded_ratio(model: ReferenceModel) -> Result<f64> {
    if !model.is_analytic() {
        return Err(Error::NoAnalyticDensity(format!("{model:?}")));
    }
    let f = |r: f64| r * reference_density(model, r).unwrap_or(0.0);
    Ok(2.0 * integrate(&f, 0.0, 1.0, 1e-13))
}

/// Density-normalized histogram of ratios. `density[i] · width[i]` is the
/// fraction of all ratios falling in bin `i`, so the bins integrate to the
/// in-range fraction; the rest is reported in `underflow`/`overflow`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioHistogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub total: usize,
    pub underflow: f64,
    pub overflow: f64,
}

impl RatioHistogram {
    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Fraction of ratios per bin.
    pub fn masses(&self) -> Vec<f64> {
        self.density
            .iter()
            .zip(self.widths())
            .map(|(d, w)| d * w)
            .collect()
    }

    pub fn in_range_fraction(&self) -> f64 {
        self.masses().iter().sum()
    }
}

/// `bins` equal-width bins on `[0, range]`.
pub fn uniform_edges(bins: usize, range: f64) -> Vec<f64> {
    (0..=bins).map(|i| range * i as f64 / bins as f64).collect()
}

pub fn default_edges() -> Vec<f64> {
    uniform_edges(DEFAULT_BINS, DEFAULT_RANGE)
}

/// Bins are half-open `[lo, hi)`; values at or above the last edge overflow.
pub fn histogram(ratios: &[f64], edges: &[f64]) -> Result<RatioHistogram> {
    if ratios.is_empty() {
        return Err(Error::TooFew { need: 1, got: 0 });
    }
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(
            "bin edges must be strictly ascending, at least two".into(),
        ));
    }
    let bins = edges.len() - 1;
    let mut counts = vec![0usize; bins];
    let (mut under, mut over) = (0usize, 0usize);
    for &r in ratios {
        if r < edges[0] {
            under += 1;
        } else if r >= edges[bins] {
            over += 1;
        } else {
            // first edge strictly above r, minus one
            let i = edges.partition_point(|&e| e <= r) - 1;
            counts[i] += 1;
        }
    }
    let total = ratios.len();
    let t = total as f64;
    let density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| c as f64 / (t * (w[1] - w[0])))
        .collect();
    Ok(RatioHistogram {
        edges: edges.to_vec(),
        density,
        total,
        underflow: under as f64 / t,
        overflow: over as f64 / t,
    })
}

/// Total-variation distance between two histograms on the same bins, with
/// the under/overflow masses as two extra cells.
pub fn histogram_distance(a: &RatioHistogram, b: &RatioHistogram) -> Result<f64> {
    if a.edges.len() != b.edges.len()
        || a.edges
            .iter()
            .zip(&b.edges)
            .any(|(x, y)| (x - y).abs() > 1e-12)
    {
        return Err(Error::Config("histograms have different bins".into()));
    }
    let cells: f64 = a
        .masses()
        .iter()
        .zip(b.masses())
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(0.5 * (cells + (a.underflow - b.underflow).abs() + (a.overflow - b.overflow).abs()))
}

/// Total-variation distance between a histogram and an analytic model
/// integrated over the same bins (plus under/overflow cells).
pub fn distribution_distance(h: &RatioHistogram, model: ReferenceModel) -> Result<f64> {
    let first = h.edges[0];
    let below = if first > 0.0 {
        model_mass(model, 0.0, first)?
    } else {
        0.0
    };
    let masses = h
        .edges
        .windows(2)
        .map(|w| model_mass(model, w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;
    let above = (1.0 - below - masses.iter().sum::<f64>()).max(0.0);
    let cells: f64 = h
        .masses()
        .iter()
        .zip(&masses)
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(0.5 * (cells + (h.underflow - below).abs() + (h.overflow - above).abs()))
}

/// All emitted ratios of a collection of spectra, tagged with their sample
/// index.
pub fn pooled_ratios<'a, I>(spectra: I) -> Vec<(usize, f64)>
where
    I: IntoIterator<Item = &'a SpectrumSample>,
{
    spectra
        .into_iter()
        .enumerate()
        .flat_map(|(s, sp)| sp.ratios.ratios.iter().map(move |&r| (s, r)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn ratio_examples() {
        let g = gap_ratios(&[0.0, 1.0, 3.0, 7.0], DEGENERACY_TOL).unwrap();
        assert_eq!(g.ratios, vec![2.0, 2.0]);
        assert_eq!(g.excluded, 0);
        let eq: Vec<f64> = (0..10).map(|i| i as f64 * 0.125).collect();
        let g = gap_ratios(&eq, DEGENERACY_TOL).unwrap();
        assert!(g.ratios.iter().all(|&r| r == 1.0));
        let g = gap_ratios(&[0.0, 0.0, 1.0, 3.0], DEGENERACY_TOL).unwrap();
        assert_eq!(g.ratios, vec![2.0]);
        assert_eq!(g.excluded, 1);
        let g = gap_ratios(&[0.5, 0.5, 0.5], DEGENERACY_TOL).unwrap();
        assert!(g.all_degenerate());
        assert!(gap_ratios(&[0.0, 1.0], DEGENERACY_TOL).is_err());
    }

    #[test]
    fn density_spot_values() {
        assert_eq!(
            reference_density(ReferenceModel::Poisson, 0.0).unwrap(),
            1.0
        );
        assert_eq!(
            reference_density(ReferenceModel::WignerDysonGue, 0.0).unwrap(),
            0.0
        );
        let gue1 = reference_density(ReferenceModel::WignerDysonGue, 1.0).unwrap();
        assert!((gue1 - 3f64.sqrt() / PI).abs() < 1e-14);
        assert!(reference_density(ReferenceModel::Poisson, -0.1).is_err());
        assert!(reference_density(ReferenceModel::HaarEmpirical(8), 1.0).is_err());
    }

    #[test]
    fn surmises_normalize() {
        for m in [
            ReferenceModel::WignerDysonGoe,
            ReferenceModel::WignerDysonGue,
            ReferenceModel::Poisson,
        ] {
            let total = model_mass(m, 0.0, 1000.0).unwrap();
            assert!(total >= 0.999 && total <= 1.0 + 1e-9, "{m:?}: {total}");
        }
        // Poisson closed form ∫_0^R = R / (1 + R)
        let p = model_mass(ReferenceModel::Poisson, 0.0, 5.0).unwrap();
        assert!((p - 5.0 / 6.0).abs() < 1e-10);
    }

    #[test]
    fn folded_ratio_means() {
        // ⟨r̃⟩ = 2 ln 2 - 1 for uncorrelated levels
        let p = model_mean_folded_ratio(ReferenceModel::Poisson).unwrap();
        assert!((p - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-9);
        // ⟨r̃⟩ = 2√3/π - 1/2 for the GUE surmise
        let g = model_mean_folded_ratio(ReferenceModel::WignerDysonGue).unwrap();
        assert!((g - (2.0 * 3f64.sqrt() / PI - 0.5)).abs() < 1e-9);
    }

    #[test]
    fn histogram_examples() {
        let h = histogram(&[0.5], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(h.density, vec![1.0, 0.0]);
        let h = histogram(&[1.5; 7], &default_edges()).unwrap();
        assert_eq!(h.density.iter().filter(|&&d| d > 0.0).count(), 1);
        let h = histogram(&[0.5, 7.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(h.overflow, 0.25);
        assert!((h.in_range_fraction() - 0.75).abs() < 1e-15);
        assert!(histogram(&[], &[0.0, 1.0]).is_err());
        assert_eq!(histogram_distance(&h, &h).unwrap(), 0.0);
    }

    #[test]
    fn parity_split_examples() {
        let bell = StateVector::from_amplitudes(vec![
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap();
        let p = parity_split_spectra(&bell, &Cut::Balanced).unwrap();
        assert!((p.even.eigenvalues[0] - 0.5).abs() < 1e-15);
        assert!((p.odd.eigenvalues[0] - 0.5).abs() < 1e-15);

        let z = StateVector::zero(6).unwrap();
        let p = parity_split_spectra(&z, &Cut::Balanced).unwrap();
        assert_eq!(p.even.eigenvalues.len(), 4);
        assert!((p.even.eigenvalues[3] - 1.0).abs() < 1e-15);
        assert!(p.even.eigenvalues[..3].iter().all(|x| x.abs() < 1e-15));
        assert!(p.odd.eigenvalues.iter().all(|x| x.abs() < 1e-15));

        // |+⟩|0⟩ mixes parities on the kept qubit
        let plus0 = StateVector::from_amplitudes(vec![
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::new(0.0, 0.0),
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::new(0.0, 0.0),
        ])
        .unwrap();
        assert!(matches!(
            parity_split_spectra(&plus0, &Cut::Balanced),
            Err(Error::SymmetryViolation(_))
        ));
    }

    #[test]
    fn reference_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let h2 = haar_reference(2, 10, &mut rng).unwrap();
        assert!(h2
            .iter()
            .all(|s| s.eigenvalues.len() == 2 && s.ratios.ratios.is_empty()));
        let h4 = haar_reference(4, 10, &mut rng).unwrap();
        assert!(h4
            .iter()
            .all(|s| s.eigenvalues.len() == 4 && s.ratios.ratios.len() == 2));
        assert!(haar_reference(5, 1, &mut rng).is_err());
        let p3 = poisson_reference(3, 10, &mut rng).unwrap();
        assert!(p3.iter().all(|s| s.ratios.ratios.len() == 1));
        let a = poisson_reference(16, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = poisson_reference(16, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
}
