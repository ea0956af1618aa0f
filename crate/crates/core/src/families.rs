//! Circuit families, their `A-B-C` names, random realizations and execution
//! with probability snapshots.
//!
//! `A` is the gate family (`G1`, `G2`, `G3`, `MG`, `D2`, `D3`, `Dn`), `B` the
//! connectivity (`nn` ring neighbours, `rn` random pairs, `all` every
//! `r`-subset) and `C` the input (`rs` random product state, `0` for
//! `|0…0⟩`).

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{self, random_diagonal, random_matchgate, DiagonalPhases, FixedGate, Matchgate};
use crate::simcore::{check_qubit_count, ProbabilityVector, StateVector};

/// Default circuit length for the sequential families.
pub const ASYMPTOTIC_GATES: usize = 500;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// {CNOT, H, NOT}
    G1,
    /// {CNOT, H, S}
    G2,
    /// {CNOT, H, T}
    G3,
    /// Matchgates.
    Mg,
    D2,
    D3,
    /// One diagonal gate on all `n` qubits.
    Dn,
}

impl Family {
    pub fn is_diagonal(self) -> bool {
        matches!(self, Family::D2 | Family::D3 | Family::Dn)
    }

    /// Arity of the diagonal gates for an `n`-qubit register.
    pub fn diagonal_arity(self, n: usize) -> Option<usize> {
        match self {
            Family::D2 => Some(2),
            Family::D3 => Some(3),
            Family::Dn => Some(n),
            _ => None,
        }
    }

    fn generators(self) -> Option<[FixedGate; 3]> {
        match self {
            Family::G1 => Some([FixedGate::Cnot, FixedGate::H, FixedGate::Not]),
            Family::G2 => Some([FixedGate::Cnot, FixedGate::H, FixedGate::S]),
            Family::G3 => Some([FixedGate::Cnot, FixedGate::H, FixedGate::T]),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::G1 => "G1",
            Family::G2 => "G2",
            Family::G3 => "G3",
            Family::Mg => "MG",
            Family::D2 => "D2",
            Family::D3 => "D3",
            Family::Dn => "Dn",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g1" => Ok(Family::G1),
            "g2" => Ok(Family::G2),
            "g3" => Ok(Family::G3),
            "mg" => Ok(Family::Mg),
            "d2" => Ok(Family::D2),
            "d3" => Ok(Family::D3),
            "dn" => Ok(Family::Dn),
            _ => Err(Error::Config(format!("unknown circuit family {s:?}"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Connectivity {
    /// Nearest neighbours on a ring.
    Nn,
    /// Uniformly random qubits/pairs.
    Rn,
    /// Every `r`-subset once (diagonal families).
    All,
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Connectivity::Nn => "nn",
            Connectivity::Rn => "rn",
            Connectivity::All => "all",
        })
    }
}

impl FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nn" => Ok(Connectivity::Nn),
            "rn" | "rnd" => Ok(Connectivity::Rn),
            "all" => Ok(Connectivity::All),
            _ => Err(Error::Config(format!("unknown connectivity {s:?}"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Initial {
    /// Independent Haar-random single-qubit factors.
    RandomProduct,
    Zero,
}

impl fmt::Display for Initial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Initial::RandomProduct => "rs",
            Initial::Zero => "0",
        })
    }
}

impl FromStr for Initial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rs" => Ok(Initial::RandomProduct),
            "0" | "zero" => Ok(Initial::Zero),
            _ => Err(Error::Config(format!("unknown initial state {s:?}"))),
        }
    }
}

/// A validated `{family, connectivity, initial state}` triple on `n` qubits.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct FamilySpec {
    family: Family,
    connectivity: Connectivity,
    initial: Initial,
    n: usize,
}

impl FamilySpec {
    pub fn new(
        family: Family,
        connectivity: Connectivity,
        initial: Initial,
        n: usize,
    ) -> Result<Self> {
        check_qubit_count(n)?;
        let bad = |why: &str| {
            Err(Error::Config(format!(
                "{family}-{connectivity}-{initial}: {why}"
            )))
        };
        let allowed = match family {
            Family::G1 | Family::G2 | Family::G3 => connectivity == Connectivity::Rn,
            Family::Mg => matches!(connectivity, Connectivity::Rn | Connectivity::Nn),
            Family::D2 => matches!(connectivity, Connectivity::All | Connectivity::Nn),
            Family::D3 | Family::Dn => connectivity == Connectivity::All,
        };
        if !allowed {
            return bad("connectivity not available for this family");
        }
        if family.is_diagonal() && initial != Initial::Zero {
            return bad("diagonal circuits always start from |0…0⟩");
        }
        let min_n = match (family, connectivity) {
            (Family::D3, _) | (Family::D2, Connectivity::Nn) => 3,
            (Family::Dn, _) => 1,
            _ => 2,
        };
        if n < min_n {
            return bad(&format!("needs at least {min_n} qubits"));
        }
        Ok(Self {
            family,
            connectivity,
            initial,
            n,
        })
    }

    /// Parses an `A-B-C` name (case-insensitive).
    pub fn parse(label: &str, n: usize) -> Result<Self> {
        let parts: Vec<&str> = label.trim().split('-').collect();
        let [a, b, c] = parts[..] else {
            return Err(Error::Config(format!(
                "expected an A-B-C family name, got {label:?}"
            )));
        };
        Self::new(a.parse()?, b.parse()?, c.parse()?, n)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn connectivity(&self) -> Connectivity {
        self.connectivity
    }

    pub fn initial(&self) -> Initial {
        self.initial
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Matchgate circuits on `|0…0⟩` never leave the even-parity sector.
    pub fn conserves_parity(&self) -> bool {
        self.family == Family::Mg && self.initial == Initial::Zero
    }

    /// Number of diagonal gates of a diagonal family (Hadamards excluded).
    pub fn diagonal_gate_count(&self) -> Option<usize> {
        let r = self.family.diagonal_arity(self.n)?;
        Some(match self.connectivity {
            Connectivity::Nn => self.n,
            _ => binomial(self.n, r),
        })
    }

    /// Number of time steps of a realization requested with `length` gates.
    pub fn steps(&self, length: usize) -> usize {
        self.diagonal_gate_count().unwrap_or(length)
    }

    /// Snapshot grid used when none is configured.
    pub fn default_snapshots(&self, length: usize) -> SnapshotSchedule {
        let total = self.steps(length);
        let mut times: Vec<usize> = match self.family {
            f if f.is_diagonal() => (1..=total).collect(),
            Family::Mg => {
                let mut t = vec![1, 3, 5, 9, 13, 17, 30];
                t.extend((1..).map(|k| 50 * k).take_while(|&x| x <= total));
                t
            }
            _ => (1..).map(|k| 25 * k).take_while(|&x| x <= total).collect(),
        };
        times.retain(|&t| t <= total);
        if total > 0 && times.last() != Some(&total) {
            times.push(total);
        }
        SnapshotSchedule { times }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.family, self.connectivity, self.initial)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Lexicographic `r`-subsets of `0..n`.
fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, r));
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + n - r) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// How CNOT (control, target) pairs are drawn. Both are uniform over ordered
/// pairs in distribution; they consume the random stream differently.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSelection {
    /// Uniform control, then a uniform distinct target.
    #[default]
    Ordered,
    /// Uniform unordered pair, then a fair coin for which is the control.
    UnorderedRoleFlip,
}

impl FromStr for PairSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ordered" => Ok(PairSelection::Ordered),
            "unordered" | "unordered-role-flip" | "role-flip" => {
                Ok(PairSelection::UnorderedRoleFlip)
            }
            _ => Err(Error::Config(format!("unknown CNOT pair selection {s:?}"))),
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct SamplingOptions {
    pub cnot_pairs: PairSelection,
}

/// One gate of a realization with its target qubits.
#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    /// H, NOT, S or T.
    One {
        gate: FixedGate,
        target: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    /// The lower-indexed qubit takes the first tensor slot.
    Matchgate {
        gate: Matchgate,
        q1: usize,
        q2: usize,
    },
    Diagonal {
        phases: DiagonalPhases,
        qubits: Vec<usize>,
    },
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::One { gate, .. } => gate.name(),
            Op::Cnot { .. } => "CNOT",
            Op::Matchgate { .. } => "MG",
            Op::Diagonal { .. } => "W",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Op::One { target, .. } => vec![*target],
            Op::Cnot { control, target } => vec![*control, *target],
            Op::Matchgate { q1, q2, .. } => vec![*q1, *q2],
            Op::Diagonal { qubits, .. } => qubits.clone(),
        }
    }

    /// Targets were validated when the circuit was sampled.
    pub fn apply(&self, state: &mut StateVector) {
        match self {
            Op::One { gate, target } => {
                let u = match gate {
                    FixedGate::H => gates::hadamard(),
                    FixedGate::Not => gates::not(),
                    FixedGate::S => gates::phase(std::f64::consts::FRAC_PI_2),
                    FixedGate::T => gates::phase(std::f64::consts::FRAC_PI_4),
                    FixedGate::Cnot => unreachable!("CNOT is a two-qubit op"),
                };
                state.apply_one_qubit_unchecked(&u, *target);
            }
            Op::Cnot { control, target } => {
                state.apply_two_qubit_unchecked(&gates::cnot(), *control, *target)
            }
            Op::Matchgate { gate, q1, q2 } => {
                state.apply_two_qubit_unchecked(gate.matrix(), *q1, *q2)
            }
            Op::Diagonal { phases, qubits } => {
                state.apply_diagonal_unchecked(phases.phases(), qubits)
            }
        }
    }
}

/// A sampled circuit. Time is counted in `body` gates; `prologue` runs before
/// time 0 and `epilogue` closes the circuit. Diagonal families put their
/// Hadamard layers in `prologue`/`epilogue`.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitRealization {
    spec: FamilySpec,
    prologue: Vec<Op>,
    body: Vec<Op>,
    epilogue: Vec<Op>,
}

impl CircuitRealization {
    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn body(&self) -> &[Op] {
        &self.body
    }

    /// Every gate in application order, Hadamard layers included.
    pub fn ops(&self) -> impl Iterator<Item = &Op> {
        self.prologue.iter().chain(&self.body).chain(&self.epilogue)
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.body.len()
    }

    pub fn is_empty(&self) -> bool {
        self.body.is_empty()
    }

    pub fn initial(&self) -> Initial {
        self.spec.initial
    }
}

/// Samples a realization. `length` is ignored by the diagonal families,
/// whose gate count is fixed.
pub fn sample_circuit<R: Rng + ?Sized>(
    spec: &FamilySpec,
    length: usize,
    rng: &mut R,
) -> Result<CircuitRealization> {
    sample_circuit_with(spec, length, &SamplingOptions::default(), rng)
}

pub fn sample_circuit_with<R: Rng + ?Sized>(
    spec: &FamilySpec,
    length: usize,
    options: &SamplingOptions,
    rng: &mut R,
) -> Result<CircuitRealization> {
    let n = spec.n;
    if let Some(r) = spec.family.diagonal_arity(n) {
        let mut subsets = match spec.connectivity {
            Connectivity::Nn => (0..n)
                .map(|i| vec![i.min((i + 1) % n), i.max((i + 1) % n)])
                .collect(),
            _ => combinations(n, r),
        };
        subsets.shuffle(rng);
        let body = subsets
            .into_iter()
            .map(|qubits| {
                Ok(Op::Diagonal {
                    phases: random_diagonal(r, rng)?,
                    qubits,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let layer = || {
            (0..n)
                .map(|q| Op::One {
                    gate: FixedGate::H,
                    target: q,
                })
                .collect::<Vec<_>>()
        };
        return Ok(CircuitRealization {
            spec: *spec,
            prologue: layer(),
            body,
            epilogue: layer(),
        });
    }

    if length == 0 {
        return Err(Error::Config(format!("{spec} needs at least one gate")));
    }
    let mut body = Vec::with_capacity(length);
    match spec.family.generators() {
        Some(set) => {
            for _ in 0..length {
                let op = match set[rng.random_range(0..3)] {
                    FixedGate::Cnot => {
                        let (control, target) = match options.cnot_pairs {
                            PairSelection::Ordered => ordered_pair(n, rng),
                            PairSelection::UnorderedRoleFlip => {
                                let (a, b) = unordered_pair(n, rng);
                                if rng.random::<bool>() {
                                    (a, b)
                                } else {
                                    (b, a)
                                }
                            }
                        };
                        Op::Cnot { control, target }
                    }
                    gate => Op::One {
                        gate,
                        target: rng.random_range(0..n),
                    },
                };
                body.push(op);
            }
        }
        None => {
            for _ in 0..length {
                let (q1, q2) = match spec.connectivity {
                    Connectivity::Nn => {
                        let i = rng.random_range(0..n);
                        let j = (i + 1) % n;
                        (i.min(j), i.max(j))
                    }
                    _ => unordered_pair(n, rng),
                };
                body.push(Op::Matchgate {
                    gate: random_matchgate(rng),
                    q1,
                    q2,
                });
            }
        }
    }
    Ok(CircuitRealization {
        spec: *spec,
        prologue: Vec::new(),
        body,
        epilogue: Vec::new(),
    })
}

fn ordered_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Uniform over the `n(n-1)/2` pairs, returned as `(low, high)`.
fn unordered_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let (a, b) = ordered_pair(n, rng);
    (a.min(b), a.max(b))
}

/// Gate counts at which the state is observed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnapshotSchedule {
    times: Vec<usize>,
}

impl SnapshotSchedule {
    /// Times must be positive and strictly ascending; `total` bounds the last
    /// one.
    pub fn new(times: Vec<usize>, total: usize) -> Result<Self> {
        if times.first() == Some(&0) {
            return Err(Error::Config(
                "snapshot times must be positive (time 0 is always recorded)".into(),
            ));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "snapshot times must be strictly ascending".into(),
            ));
        }
        if let Some(&last) = times.last() {
            if last > total {
                return Err(Error::Config(format!(
                    "snapshot {last} beyond the circuit's {total} gates"
                )));
            }
        }
        Ok(Self { times })
    }

    pub fn empty() -> Self {
        Self { times: Vec::new() }
    }

    pub fn times(&self) -> &[usize] {
        &self.times
    }
}

/// Initial state of a realization; random product states consume `rng`.
pub fn initial_state<R: Rng + ?Sized>(spec: &FamilySpec, rng: &mut R) -> Result<StateVector> {
    match spec.initial {
        Initial::Zero => StateVector::zero(spec.n),
        Initial::RandomProduct => StateVector::random_product(spec.n, rng),
    }
}

/// Runs `circuit` from a freshly drawn initial state, calling `observe` at
/// time 0 and at every scheduled time, and returns the final state.
///
/// When the circuit has an epilogue (the closing Hadamard layer of diagonal
/// circuits), the observed state at time `t` is the first `t` body gates
/// followed by the epilogue, so every snapshot is a complete circuit.
pub fn execute<R, F>(
    circuit: &CircuitRealization,
    schedule: &SnapshotSchedule,
    rng: &mut R,
    mut observe: F,
) -> Result<StateVector>
where
    R: Rng + ?Sized,
    F: FnMut(usize, &StateVector) -> Result<()>,
{
    if let Some(&last) = schedule.times.last() {
        if last > circuit.len() {
            return Err(Error::Config(format!(
                "snapshot {last} beyond the circuit's {} gates",
                circuit.len()
            )));
        }
    }
    let mut state = initial_state(&circuit.spec, rng)?;
    circuit.prologue.iter().for_each(|op| op.apply(&mut state));

    let mut emit = |t: usize, state: &StateVector| -> Result<()> {
        if circuit.epilogue.is_empty() {
            state.check_norm()?;
            observe(t, state)
        } else {
            let mut view = state.clone();
            circuit.epilogue.iter().for_each(|op| op.apply(&mut view));
            view.check_norm()?;
            observe(t, &view)
        }
    };

    emit(0, &state)?;
    let mut next = schedule.times.iter().peekable();
    for (i, op) in circuit.body.iter().enumerate() {
        op.apply(&mut state);
        if next.peek() == Some(&&(i + 1)) {
            next.next();
            emit(i + 1, &state)?;
        }
    }
    circuit.epilogue.iter().for_each(|op| op.apply(&mut state));
    state.check_norm()?;
    Ok(state)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: usize,
    pub probabilities: ProbabilityVector,
}

/// Probabilities at time 0 and at every scheduled time.
pub fn run_circuit<R: Rng + ?Sized>(
    circuit: &CircuitRealization,
    schedule: &SnapshotSchedule,
    rng: &mut R,
) -> Result<Vec<Snapshot>> {
    let mut out = Vec::with_capacity(schedule.times.len() + 1);
    execute(circuit, schedule, rng, |time, state| {
        out.push(Snapshot {
            time,
            probabilities: state.probabilities(),
        });
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(s: &str, n: usize) -> FamilySpec {
        FamilySpec::parse(s, n).unwrap()
    }

    #[test]
    fn parses_and_prints_names() {
        for name in [
            "G3-rn-rs", "G2-rn-0", "MG-nn-rs", "MG-rn-0", "D2-all-0", "D2-nn-0", "D3-all-0",
            "Dn-all-0",
        ] {
            assert_eq!(spec(name, 8).label(), name);
        }
        assert_eq!(spec("mg-RN-zero", 8).label(), "MG-rn-0");
        assert_eq!(spec("dn-all-0", 8).family(), Family::Dn);
    }

    #[test]
    fn rejects_invalid_combinations() {
        for bad in [
            "D3-all-rs",
            "G1-all-rs",
            "G3-nn-rs",
            "MG-all-0",
            "D3-nn-0",
            "X1-rn-rs",
            "G1-rn",
            "G1-rn-rs-x",
        ] {
            assert!(
                matches!(FamilySpec::parse(bad, 8), Err(Error::Config(_))),
                "{bad}"
            );
        }
        assert!(FamilySpec::parse("G1-rn-rs", 15).is_err());
    }

    #[test]
    fn combinations_are_complete() {
        assert_eq!(combinations(8, 2).len(), 28);
        assert_eq!(combinations(8, 3).len(), 56);
        assert_eq!(combinations(4, 4), vec![vec![0, 1, 2, 3]]);
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn diagonal_gate_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let count =
            |s: &str, rng: &mut ChaCha8Rng| sample_circuit(&spec(s, 8), 0, rng).unwrap().len();
        assert_eq!(count("D2-all-0", &mut rng), 28);
        assert_eq!(count("D3-all-0", &mut rng), 56);
        assert_eq!(count("Dn-all-0", &mut rng), 1);
        assert_eq!(count("D2-nn-0", &mut rng), 8);
    }

    #[test]
    fn diagonal_circuits_are_bracketed_by_hadamards() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for s in ["D2-all-0", "D3-all-0", "Dn-all-0", "D2-nn-0"] {
            let c = sample_circuit(&spec(s, 8), 0, &mut rng).unwrap();
            let ops: Vec<&Op> = c.ops().collect();
            let k = ops.len();
            for q in 0..8 {
                assert_eq!(
                    ops[q],
                    &Op::One {
                        gate: FixedGate::H,
                        target: q
                    }
                );
                assert_eq!(
                    ops[k - 8 + q],
                    &Op::One {
                        gate: FixedGate::H,
                        target: q
                    }
                );
            }
            assert!(c.body().iter().all(|op| matches!(op, Op::Diagonal { .. })));
        }
    }

    #[test]
    fn d2_all_covers_every_pair_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = sample_circuit(&spec("D2-all-0", 6), 0, &mut rng).unwrap();
        let mut pairs: Vec<Vec<usize>> = c.body().iter().map(Op::qubits).collect();
        pairs.sort();
        assert_eq!(pairs, combinations(6, 2));
        let nn = sample_circuit(&spec("D2-nn-0", 6), 0, &mut rng).unwrap();
        let mut ring: Vec<Vec<usize>> = nn.body().iter().map(Op::qubits).collect();
        ring.sort();
        assert_eq!(
            ring,
            vec![
                vec![0, 1],
                vec![0, 5],
                vec![1, 2],
                vec![2, 3],
                vec![3, 4],
                vec![4, 5]
            ]
        );
    }

    #[test]
    fn sequential_families_use_their_generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = sample_circuit(&spec("G1-rn-rs", 5), 300, &mut rng).unwrap();
        assert_eq!(c.len(), 300);
        assert!(c
            .body()
            .iter()
            .all(|op| ["CNOT", "H", "NOT"].contains(&op.name())));
        for op in c.body() {
            if let Op::Cnot { control, target } = op {
                assert_ne!(control, target);
                assert!(*control < 5 && *target < 5);
            }
        }
        let m = sample_circuit(&spec("MG-nn-0", 5), 200, &mut rng).unwrap();
        for op in m.body() {
            let q = op.qubits();
            assert!(q[0] < q[1]);
            assert!(q[1] - q[0] == 1 || (q[0] == 0 && q[1] == 4));
        }
        assert!(sample_circuit(&spec("G3-rn-rs", 5), 0, &mut rng).is_err());
    }

    #[test]
    fn default_snapshot_grids() {
        assert_eq!(
            spec("G3-rn-rs", 8).default_snapshots(175).times(),
            &[25, 50, 75, 100, 125, 150, 175]
        );
        assert_eq!(
            spec("G3-rn-rs", 8).default_snapshots(60).times(),
            &[25, 50, 60]
        );
        assert_eq!(
            spec("MG-rn-rs", 8).default_snapshots(30).times(),
            &[1, 3, 5, 9, 13, 17, 30]
        );
        assert_eq!(spec("Dn-all-0", 8).default_snapshots(500).times(), &[1]);
        assert_eq!(spec("D2-nn-0", 8).default_snapshots(500).times().len(), 8);
    }

    #[test]
    fn schedule_validation() {
        assert!(SnapshotSchedule::new(vec![1, 2, 3], 3).is_ok());
        assert!(SnapshotSchedule::new(vec![0, 2], 3).is_err());
        assert!(SnapshotSchedule::new(vec![2, 2], 3).is_err());
        assert!(SnapshotSchedule::new(vec![1, 4], 3).is_err());
    }

    #[test]
    fn empty_schedule_gives_time_zero_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = sample_circuit(&spec("G3-rn-rs", 4), 20, &mut rng).unwrap();
        let snaps = run_circuit(&c, &SnapshotSchedule::empty(), &mut rng).unwrap();
        assert_eq!(snaps.len(), 1);
        assert_eq!(snaps[0].time, 0);
    }

    #[test]
    fn diagonal_time_zero_is_the_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = spec("D3-all-0", 5);
        let c = sample_circuit(&s, 0, &mut rng).unwrap();
        let snaps = run_circuit(&c, &s.default_snapshots(0), &mut rng).unwrap();
        assert_eq!(snaps.len(), 11);
        assert!((snaps[0].probabilities.as_slice()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matchgates_on_zero_stay_even() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for s in ["MG-rn-0", "MG-nn-0"] {
            let sp = spec(s, 8);
            let c = sample_circuit(&sp, 200, &mut rng).unwrap();
            let snaps = run_circuit(&c, &sp.default_snapshots(200), &mut rng).unwrap();
            for snap in &snaps {
                for (i, &p) in snap.probabilities.as_slice().iter().enumerate() {
                    if i.count_ones() % 2 == 1 {
                        assert_eq!(p, 0.0);
                    }
                }
            }
        }
    }
}
