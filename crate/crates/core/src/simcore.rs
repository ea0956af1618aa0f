//! Dense `n`-qubit pure states and the in-place kernels that act on them.
//!
//! Qubit `0` is the most significant bit of a basis index. All kernels sweep
//! the amplitude array with strides; no operator is ever expanded to its full
//! `2^n × 2^n` form.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 14;

/// Tolerance for accepting a caller-supplied gate as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// Allowed deviation of `‖ψ‖²` from one when a state is inspected.
pub const NORM_TOL: f64 = 1e-9;

/// Odd-parity amplitudes at or above this modulus block parity compression.
pub const PARITY_TOL: f64 = 1e-10;

pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

/// Largest entry of `|U†U - I|` for a row-major `dim × dim` matrix.
pub fn unitarity_deviation(entries: &[C64], dim: usize) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..dim {
                acc += entries[k * dim + i].conj() * entries[k * dim + j];
            }
            if i == j {
                acc -= 1.0;
            }
            dev = dev.max(acc.norm());
        }
    }
    dev
}

pub fn check_qubit_count(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "qubit count {n} outside 1..={MAX_QUBITS}"
        )))
    }
}

/// Bit mask selecting qubit `q` in an `n`-qubit basis index.
#[inline]
pub fn qubit_mask(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

/// Pure state of `n` qubits as `2^n` complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two (at least 2)
    /// and the vector must be normalized within [`NORM_TOL`].
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Config(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        check_qubit_count(n)?;
        let state = Self { n, amps };
        state.check_norm()?;
        Ok(state)
    }

    /// Tensor product of `n` independent single-qubit states, each uniform on
    /// the Bloch sphere (two standard complex Gaussians, normalized).
    pub fn random_product<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_qubit_count(n)?;
        let mut amps = vec![C64::new(1.0, 0.0)];
        for _ in 0..n {
            let q = random_qubit(rng);
            amps = amps.iter().flat_map(|&a| [a * q[0], a * q[1]]).collect();
        }
        Ok(Self { n, amps })
    }

    /// Unitarily invariant random state: `2^n` standard complex Gaussians,
    /// normalized.
    pub fn haar_random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_qubit_count(n)?;
        let mut amps: Vec<C64> = (0..1usize << n).map(|_| complex_gaussian(rng)).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Fails with [`Error::NormDrift`] when `|‖ψ‖² - 1| > 1e-9`. The state is
    /// never renormalized behind the caller's back.
    pub fn check_norm(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            Err(Error::NormDrift(norm))
        } else {
            Ok(())
        }
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q < self.n {
            Ok(())
        } else {
            Err(Error::QubitOutOfRange {
                index: q,
                n: self.n,
            })
        }
    }

    /// Applies a 2×2 unitary to qubit `q`.
    pub fn apply_one_qubit(&mut self, u: &Mat2, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let flat: Vec<C64> = u.iter().flatten().copied().collect();
        let dev = unitarity_deviation(&flat, 2);
        if dev > UNITARY_TOL {
            return Err(Error::NonUnitary(dev));
        }
        self.apply_one_qubit_unchecked(u, q);
        Ok(())
    }

    /// Kernel behind [`Self::apply_one_qubit`]; `u` must be unitary and `q`
    /// in range.
    pub(crate) fn apply_one_qubit_unchecked(&mut self, u: &Mat2, q: usize) {
        let stride = qubit_mask(self.n, q);
        let [[u00, u01], [u10, u11]] = *u;
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = u00 * x0 + u01 * x1;
                *a1 = u10 * x0 + u11 * x1;
            }
        }
    }

    /// Applies a 4×4 unitary to the ordered pair `(q1, q2)`; the local basis
    /// of `u` is `|b1 b2⟩` with `b1` the bit of `q1`.
    pub fn apply_two_qubit(&mut self, u: &Mat4, q1: usize, q2: usize) -> Result<()> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(Error::DuplicateQubit(q1));
        }
        let flat: Vec<C64> = u.iter().flatten().copied().collect();
        let dev = unitarity_deviation(&flat, 4);
        if dev > UNITARY_TOL {
            return Err(Error::NonUnitary(dev));
        }
        self.apply_two_qubit_unchecked(u, q1, q2);
        Ok(())
    }

    pub(crate) fn apply_two_qubit_unchecked(&mut self, u: &Mat4, q1: usize, q2: usize) {
        let m1 = qubit_mask(self.n, q1);
        let m2 = qubit_mask(self.n, q2);
        let both = m1 | m2;
        for i in 0..self.amps.len() {
            if i & both != 0 {
                continue;
            }
            let idx = [i, i | m2, i | m1, i | both];
            let x = idx.map(|j| self.amps[j]);
            for (row, &j) in u.iter().zip(idx.iter()) {
                self.amps[j] = row[0] * x[0] + row[1] * x[1] + row[2] * x[2] + row[3] * x[3];
            }
        }
    }

    /// Applies `diag(e^{iφ_0}, …, e^{iφ_{2^r-1}})` on the ordered qubit list;
    /// the first listed qubit is the most significant bit of the phase index.
    pub fn apply_diagonal(&mut self, phases: &[f64], qubits: &[usize]) -> Result<()> {
        let r = qubits.len();
        if r == 0 || r > self.n {
            return Err(Error::Config(format!(
                "diagonal arity {r} outside 1..={}",
                self.n
            )));
        }
        if phases.len() != 1 << r {
            return Err(Error::LengthMismatch(phases.len(), 1 << r));
        }
        for (k, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..k].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        self.apply_diagonal_unchecked(phases, qubits);
        Ok(())
    }

    pub(crate) fn apply_diagonal_unchecked(&mut self, phases: &[f64], qubits: &[usize]) {
        let factors: Vec<C64> = phases.iter().map(|&phi| C64::cis(phi)).collect();
        let masks: Vec<usize> = qubits.iter().map(|&q| qubit_mask(self.n, q)).collect();
        for (i, a) in self.amps.iter_mut().enumerate() {
            let local = masks
                .iter()
                .fold(0usize, |acc, &m| (acc << 1) | usize::from(i & m != 0));
            *a *= factors[local];
        }
    }

    /// `p_i = |ψ_i|²`.
    pub fn probabilities(&self) -> ProbabilityVector {
        ProbabilityVector(self.amps.iter().map(|a| a.norm_sqr()).collect())
    }

    /// Reduced density matrix of the kept qubits.
    pub fn partial_trace(&self, cut: &Cut) -> Result<ReducedDensityMatrix> {
        let keep = cut.kept_qubits(self.n)?;
        let traced: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        let dk = 1usize << keep.len();
        let dc = 1usize << traced.len();
        let keep_masks: Vec<usize> = keep.iter().map(|&q| qubit_mask(self.n, q)).collect();
        let traced_masks: Vec<usize> = traced.iter().map(|&q| qubit_mask(self.n, q)).collect();

        // Ψ[a][c] = ψ(a ⊗ c), so ρ = Ψ Ψ†.
        let mut psi = vec![C64::new(0.0, 0.0); dk * dc];
        for (i, &amp) in self.amps.iter().enumerate() {
            let a = local_index(i, &keep_masks);
            let c = local_index(i, &traced_masks);
            psi[a * dc + c] = amp;
        }
        let mut rho = vec![C64::new(0.0, 0.0); dk * dk];
        for a in 0..dk {
            let row_a = &psi[a * dc..(a + 1) * dc];
            for b in a..dk {
                let row_b = &psi[b * dc..(b + 1) * dc];
                let v: C64 = row_a.iter().zip(row_b).map(|(x, y)| x * y.conj()).sum();
                rho[a * dk + b] = v;
                rho[b * dk + a] = v.conj();
            }
        }
        Ok(ReducedDensityMatrix {
            dim: dk,
            entries: rho,
        })
    }

    /// Drops the odd-parity half of the amplitudes (basis states with an odd
    /// number of ones), returning the `2^(n-1)` even-parity amplitudes in
    /// ascending index order as an `(n-1)`-qubit vector. The tensor structure
    /// of the result carries no physical meaning.
    pub fn compress_parity(&self) -> Result<StateVector> {
        if self.n < 2 {
            return Err(Error::Config(
                "parity compression needs at least 2 qubits".into(),
            ));
        }
        let mut kept = Vec::with_capacity(self.amps.len() / 2);
        for (i, &a) in self.amps.iter().enumerate() {
            if i.count_ones() % 2 == 0 {
                kept.push(a);
            } else if a.norm() >= PARITY_TOL {
                return Err(Error::ParityViolation {
                    index: i,
                    modulus: a.norm(),
                });
            }
        }
        let norm = kept.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > 1e-12 {
            let s = norm.sqrt();
            kept.iter_mut().for_each(|a| *a /= s);
        }
        Ok(StateVector {
            n: self.n - 1,
            amps: kept,
        })
    }
}

/// Packs the bits selected by `masks` (first mask most significant).
#[inline]
pub(crate) fn local_index(i: usize, masks: &[usize]) -> usize {
    masks
        .iter()
        .fold(0usize, |acc, &m| (acc << 1) | usize::from(i & m != 0))
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_qubit<R: Rng + ?Sized>(rng: &mut R) -> [C64; 2] {
    let a = complex_gaussian(rng);
    let b = complex_gaussian(rng);
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    [a / norm, b / norm]
}

/// Which qubits survive a partial trace.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Cut {
    /// Keep qubits `0..n/2`; requires even `n`.
    #[default]
    Balanced,
    /// Keep exactly these qubits, in this order.
    Keep(Vec<usize>),
}

impl Cut {
    pub fn kept_qubits(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            Cut::Balanced => {
                if n % 2 != 0 {
                    Err(Error::Config(format!(
                        "balanced cut needs an even qubit count, got {n}; give an explicit cut"
                    )))
                } else {
                    Ok((0..n / 2).collect())
                }
            }
            Cut::Keep(qs) => {
                if qs.is_empty() || qs.len() >= n {
                    return Err(Error::Config(format!(
                        "cut must keep between 1 and {} qubits",
                        n - 1
                    )));
                }
                for (k, &q) in qs.iter().enumerate() {
                    if q >= n {
                        return Err(Error::QubitOutOfRange { index: q, n });
                    }
                    if qs[..k].contains(&q) {
                        return Err(Error::DuplicateQubit(q));
                    }
                }
                Ok(qs.clone())
            }
        }
    }
}

/// Probabilities in the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Validates non-negativity and normalization within `1e-10`.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidProbabilities("empty vector".into()));
        }
        if let Some((i, &x)) = p.iter().enumerate().find(|(_, x)| !(**x >= 0.0)) {
            return Err(Error::InvalidProbabilities(format!("entry {i} is {x}")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidProbabilities(format!("sum is {total}")));
        }
        Ok(Self(p))
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

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Hermitian, unit-trace matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensityMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl ReducedDensityMatrix {
    pub fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::LengthMismatch(entries.len(), dim * dim));
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest `|M_ij - conj(M_ji)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// Principal submatrix on the given (ordered) row/column indices.
    pub fn submatrix(&self, idx: &[usize]) -> ReducedDensityMatrix {
        let d = idx.len();
        let mut entries = Vec::with_capacity(d * d);
        for &i in idx {
            for &j in idx {
                entries.push(self.get(i, j));
            }
        }
        ReducedDensityMatrix { dim: d, entries }
    }
}
