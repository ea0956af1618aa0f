//! Gate matrices: the fixed generators, Haar-random matchgates and random
//! diagonal phase gates.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::simcore::{complex_gaussian, unitarity_deviation, Mat2, Mat4};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Named gates of the `G1`/`G2`/`G3` generator sets.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum FixedGate {
    H,
    Not,
    /// `diag(1, i)`
    S,
    /// `diag(1, e^{iπ/4})`
    T,
    /// Control is the first qubit of the pair.
    Cnot,
}

impl FixedGate {
    pub fn name(self) -> &'static str {
        match self {
            FixedGate::H => "H",
            FixedGate::Not => "NOT",
            FixedGate::S => "S",
            FixedGate::T => "T",
            FixedGate::Cnot => "CNOT",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            FixedGate::Cnot => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for FixedGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FixedGate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "H" => Ok(FixedGate::H),
            "NOT" | "X" => Ok(FixedGate::Not),
            "S" => Ok(FixedGate::S),
            "T" => Ok(FixedGate::T),
            "CNOT" | "CX" => Ok(FixedGate::Cnot),
            _ => Err(Error::Config(format!("unknown gate {s:?}"))),
        }
    }
}

/// A one- or two-qubit unitary.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum GateMatrix {
    One(Mat2),
    Two(Mat4),
}

impl GateMatrix {
    pub fn dim(&self) -> usize {
        match self {
            GateMatrix::One(_) => 2,
            GateMatrix::Two(_) => 4,
        }
    }

    pub fn entries(&self) -> Vec<C64> {
        match self {
            GateMatrix::One(m) => m.iter().flatten().copied().collect(),
            GateMatrix::Two(m) => m.iter().flatten().copied().collect(),
        }
    }

    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.entries(), self.dim())
    }
}

pub fn hadamard() -> Mat2 {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

pub fn not() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn phase(theta: f64) -> Mat2 {
    [[ONE, ZERO], [ZERO, C64::cis(theta)]]
}

pub fn cnot() -> Mat4 {
    let mut u = [[ZERO; 4]; 4];
    u[0][0] = ONE;
    u[1][1] = ONE;
    u[2][3] = ONE;
    u[3][2] = ONE;
    u
}

pub fn fixed_gate(gate: FixedGate) -> GateMatrix {
    match gate {
        FixedGate::H => GateMatrix::One(hadamard()),
        FixedGate::Not => GateMatrix::One(not()),
        FixedGate::S => GateMatrix::One(phase(FRAC_PI_2)),
        FixedGate::T => GateMatrix::One(phase(FRAC_PI_4)),
        FixedGate::Cnot => GateMatrix::Two(cnot()),
    }
}

pub fn det2(m: &Mat2) -> C64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Haar-random element of U(2): Gram-Schmidt on the columns of a complex
/// Gaussian matrix. Gram-Schmidt leaves a positive real diagonal in the
/// triangular factor, which is the phase fixing that makes the result exactly
/// Haar distributed.
pub fn haar_u2<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let z = [
        [complex_gaussian(rng), complex_gaussian(rng)],
        [complex_gaussian(rng), complex_gaussian(rng)],
    ];
    let (c0, c1) = ([z[0][0], z[1][0]], [z[0][1], z[1][1]]);
    let n0 = (c0[0].norm_sqr() + c0[1].norm_sqr()).sqrt();
    let e0 = [c0[0] / n0, c0[1] / n0];
    let proj = e0[0].conj() * c1[0] + e0[1].conj() * c1[1];
    let v = [c1[0] - proj * e0[0], c1[1] - proj * e0[1]];
    let n1 = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let e1 = [v[0] / n1, v[1] / n1];
    [[e0[0], e1[0]], [e0[1], e1[1]]]
}

/// Two-qubit gate acting as `A` on `span{|00⟩, |11⟩}` and as `B` on
/// `span{|01⟩, |10⟩}`, with `det A = det B`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Matchgate {
    a: Mat2,
    b: Mat2,
    g: Mat4,
}

impl Matchgate {
    pub fn new(a: Mat2, b: Mat2) -> Result<Self> {
        let gap = (det2(&a) - det2(&b)).norm();
        if gap > 1e-10 {
            return Err(Error::Config(format!(
                "matchgate blocks differ in determinant by {gap:.3e}"
            )));
        }
        Ok(Self {
            a,
            b,
            g: assemble_matchgate(&a, &b),
        })
    }

    pub fn a(&self) -> &Mat2 {
        &self.a
    }

    pub fn b(&self) -> &Mat2 {
        &self.b
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.g
    }
}

/// Places `a` on basis indices {0, 3} and `b` on {1, 2} of a 4×4 matrix.
pub fn assemble_matchgate(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut g = [[ZERO; 4]; 4];
    let even = [0, 3];
    let odd = [1, 2];
    for i in 0..2 {
        for j in 0..2 {
            g[even[i]][even[j]] = a[i][j];
            g[odd[i]][odd[j]] = b[i][j];
        }
    }
    g
}

/// `A` and `B` Haar-random in U(2); `B` is then multiplied by the global
/// phase `e^{iθ/2}`, `θ = arg(det A / det B)`, so the determinants agree.
pub fn random_matchgate<R: Rng + ?Sized>(rng: &mut R) -> Matchgate {
    let a = haar_u2(rng);
    let mut b = haar_u2(rng);
    let theta = (det2(&a) / det2(&b)).arg();
    let fix = C64::cis(theta / 2.0);
    b.iter_mut().flatten().for_each(|x| *x *= fix);
    Matchgate {
        a,
        b,
        g: assemble_matchgate(&a, &b),
    }
}

/// Phase angles of a diagonal gate `diag(e^{iφ_1}, …, e^{iφ_{2^r}})`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalPhases {
    phases: Vec<f64>,
}

impl DiagonalPhases {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.len() < 2 || !phases.len().is_power_of_two() {
            return Err(Error::Config(format!(
                "{} phases is not 2^r for r ≥ 1",
                phases.len()
            )));
        }
        if let Some(&bad) = phases.iter().find(|p| !(0.0..TAU).contains(*p)) {
            return Err(Error::Config(format!("phase {bad} outside [0, 2π)")));
        }
        Ok(Self { phases })
    }

    pub fn arity(&self) -> usize {
        self.phases.len().trailing_zeros() as usize
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }
}

/// `2^r` independent angles, uniform on `[0, 2π)`.
pub fn random_diagonal<R: Rng + ?Sized>(r: usize, rng: &mut R) -> Result<DiagonalPhases> {
    if !(1..=crate::simcore::MAX_QUBITS).contains(&r) {
        return Err(Error::Config(format!("diagonal arity {r} out of range")));
    }
    let phases = (0..1usize << r)
        .map(|_| rng.random::<f64>() * TAU)
        .collect();
    Ok(DiagonalPhases { phases })
}
