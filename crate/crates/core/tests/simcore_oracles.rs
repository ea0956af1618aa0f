//! Strided kernels and the partial trace against dense constructions built
//! bit by bit from the basis convention (qubit 0 = most significant bit).

use circmaj::gates::{self, haar_u2, random_diagonal, random_matchgate};
use circmaj::simcore::{Cut, Mat4, StateVector};
use circmaj::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bit(i: usize, n: usize, q: usize) -> usize {
    (i >> (n - 1 - q)) & 1
}

fn others_equal(i: usize, j: usize, n: usize, qs: &[usize]) -> bool {
    (0..n)
        .filter(|q| !qs.contains(q))
        .all(|q| bit(i, n, q) == bit(j, n, q))
}

fn local(i: usize, n: usize, qs: &[usize]) -> usize {
    qs.iter().fold(0, |acc, &q| 2 * acc + bit(i, n, q))
}

/// Dense `2^n × 2^n` embedding of a `2^r × 2^r` gate acting on `qs`.
fn embed(u: &[C64], qs: &[usize], n: usize) -> Vec<C64> {
    let d = 1 << n;
    let r = 1 << qs.len();
    let mut m = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            if others_equal(i, j, n, qs) {
                m[i * d + j] = u[local(i, n, qs) * r + local(j, n, qs)];
            }
        }
    }
    m
}

fn matvec(m: &[C64], v: &[C64]) -> Vec<C64> {
    let d = v.len();
    (0..d)
        .map(|i| (0..d).map(|j| m[i * d + j] * v[j]).sum())
        .collect()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Random 4×4 unitary by Gram-Schmidt on Gaussian columns.
fn random_u4(rng: &mut ChaCha8Rng) -> Mat4 {
    let mut cols: Vec<[C64; 4]> = Vec::new();
    for _ in 0..4 {
        let mut v = [C64::new(0.0, 0.0); 4];
        for x in v.iter_mut() {
            *x = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        for c in &cols {
            let p: C64 = (0..4).map(|k| c[k].conj() * v[k]).sum();
            for k in 0..4 {
                v[k] -= p * c[k];
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.map(|x| x / norm));
    }
    let mut u = [[C64::new(0.0, 0.0); 4]; 4];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..4 {
            u[i][j] = c[i];
        }
    }
    u
}

#[test]
fn one_qubit_kernel_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for n in 1..=4 {
        for q in 0..n {
            for _ in 0..5 {
                let u = haar_u2(&mut rng);
                let mut s = StateVector::haar_random(n, &mut rng).unwrap();
                let flat: Vec<C64> = u.iter().flatten().copied().collect();
                let expect = matvec(&embed(&flat, &[q], n), s.amplitudes());
                s.apply_one_qubit(&u, q).unwrap();
                assert!(max_diff(s.amplitudes(), &expect) < 1e-10, "n={n} q={q}");
            }
        }
    }
}

#[test]
fn two_qubit_kernel_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for n in 2..=4 {
        for q1 in 0..n {
            for q2 in 0..n {
                if q1 == q2 {
                    continue;
                }
                let gates = [
                    random_u4(&mut rng),
                    *random_matchgate(&mut rng).matrix(),
                    gates::cnot(),
                ];
                for u in gates {
                    let mut s = StateVector::haar_random(n, &mut rng).unwrap();
                    let flat: Vec<C64> = u.iter().flatten().copied().collect();
                    let expect = matvec(&embed(&flat, &[q1, q2], n), s.amplitudes());
                    s.apply_two_qubit(&u, q1, q2).unwrap();
                    assert!(
                        max_diff(s.amplitudes(), &expect) < 1e-10,
                        "n={n} ({q1},{q2})"
                    );
                }
            }
        }
    }
}

#[test]
fn diagonal_kernel_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for n in 1..=4 {
        for r in 1..=n {
            let mut qs: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(qs.as_mut_slice(), &mut rng);
            qs.truncate(r);
            let d = random_diagonal(r, &mut rng).unwrap();
            let k = 1 << r;
            let mut u = vec![C64::new(0.0, 0.0); k * k];
            for (i, &phi) in d.phases().iter().enumerate() {
                u[i * k + i] = C64::cis(phi);
            }
            let mut s = StateVector::haar_random(n, &mut rng).unwrap();
            let expect = matvec(&embed(&u, &qs, n), s.amplitudes());
            s.apply_diagonal(d.phases(), &qs).unwrap();
            assert!(max_diff(s.amplitudes(), &expect) < 1e-10, "n={n} qs={qs:?}");
        }
    }
}

#[test]
fn diagonal_gates_commute() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let n = 5;
    let a = random_diagonal(2, &mut rng).unwrap();
    let b = random_diagonal(3, &mut rng).unwrap();
    let s = StateVector::haar_random(n, &mut rng).unwrap();
    let mut x = s.clone();
    x.apply_diagonal(a.phases(), &[0, 3]).unwrap();
    x.apply_diagonal(b.phases(), &[3, 1, 4]).unwrap();
    let mut y = s;
    y.apply_diagonal(b.phases(), &[3, 1, 4]).unwrap();
    y.apply_diagonal(a.phases(), &[0, 3]).unwrap();
    assert!(max_diff(x.amplitudes(), y.amplitudes()) < 1e-12);
}

#[test]
fn norm_survives_long_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let n = 8;
    let mut s = StateVector::random_product(n, &mut rng).unwrap();
    for _ in 0..500 {
        let q1 = rng.random_range(0..n);
        let q2 = (q1 + rng.random_range(1..n)) % n;
        match rng.random_range(0..3) {
            0 => s.apply_one_qubit(&haar_u2(&mut rng), q1).unwrap(),
            1 => s
                .apply_two_qubit(random_matchgate(&mut rng).matrix(), q1, q2)
                .unwrap(),
            _ => s
                .apply_diagonal(random_diagonal(2, &mut rng).unwrap().phases(), &[q1, q2])
                .unwrap(),
        }
    }
    assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
}

/// `ρ_A(a, b) = Σ_c ψ(a, c) ψ*(b, c)` from the full density matrix.
fn dense_partial_trace(s: &StateVector, keep: &[usize]) -> Vec<C64> {
    let n = s.num_qubits();
    let d = 1 << n;
    let amps = s.amplitudes();
    let full: Vec<C64> = (0..d * d)
        .map(|k| amps[k / d] * amps[k % d].conj())
        .collect();
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let dk = 1 << keep.len();
    let mut rho = vec![C64::new(0.0, 0.0); dk * dk];
    for i in 0..d {
        for j in 0..d {
            if local(i, n, &traced) == local(j, n, &traced) {
                rho[local(i, n, keep) * dk + local(j, n, keep)] += full[i * d + j];
            }
        }
    }
    rho
}

#[test]
fn partial_trace_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for keep in [
        vec![0, 1],
        vec![2, 3],
        vec![0, 2],
        vec![3, 1],
        vec![1],
        vec![0, 1, 3],
    ] {
        for _ in 0..5 {
            let s = StateVector::haar_random(4, &mut rng).unwrap();
            let rho = s.partial_trace(&Cut::Keep(keep.clone())).unwrap();
            assert!(
                max_diff(rho.entries(), &dense_partial_trace(&s, &keep)) < 1e-8,
                "{keep:?}"
            );
            assert!((rho.trace().re - 1.0).abs() < 1e-10);
            assert!(rho.hermiticity_deviation() < 1e-10);
        }
    }
    let s = StateVector::haar_random(4, &mut rng).unwrap();
    let bal = s.partial_trace(&Cut::Balanced).unwrap();
    assert!(max_diff(bal.entries(), &dense_partial_trace(&s, &[0, 1])) < 1e-8);
}

#[test]
fn haar_probability_moments() {
    // Haar: E p_i = 1/N and E Σ p_i² = 2/(N+1).
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let (n, m) = (5, 20000);
    let d = 1usize << n;
    let (mut p0, mut ipr) = (Vec::with_capacity(m), Vec::with_capacity(m));
    for _ in 0..m {
        let p = StateVector::haar_random(n, &mut rng)
            .unwrap()
            .probabilities()
            .into_inner();
        p0.push(p[0]);
        ipr.push(p.iter().map(|x| x * x).sum::<f64>());
    }
    let check = |xs: &[f64], target: f64| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let se = (var / xs.len() as f64).sqrt();
        assert!(
            (mean - target).abs() < 4.0 * se,
            "mean {mean}, target {target}, se {se}"
        );
    };
    check(&p0, 1.0 / d as f64);
    check(&ipr, 2.0 / (d as f64 + 1.0));
}

#[test]
fn product_state_first_amplitude() {
    // Each qubit contributes an independent E|⟨0|φ⟩|² = 1/2 on the Bloch sphere.
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let (n, m) = (3, 40000);
    let xs: Vec<f64> = (0..m)
        .map(|_| {
            StateVector::random_product(n, &mut rng)
                .unwrap()
                .amplitudes()[0]
                .norm_sqr()
        })
        .collect();
    let mean = xs.iter().sum::<f64>() / m as f64;
    // E x² = (1/3)^n for a product of squared Bloch cosines.
    let var = (1.0f64 / 3.0).powi(n as i32) - 0.125f64.powi(2);
    assert!(
        (mean - 0.125).abs() < 4.0 * (var / m as f64).sqrt(),
        "{mean}"
    );
}

#[test]
fn parity_compression_keeps_even_amplitudes() {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut s = StateVector::zero(4).unwrap();
    for _ in 0..40 {
        let q = rng.random_range(0..3);
        s.apply_two_qubit(random_matchgate(&mut rng).matrix(), q, q + 1)
            .unwrap();
    }
    let c = s.compress_parity().unwrap();
    assert_eq!(c.num_qubits(), 3);
    let even: Vec<C64> = (0..16)
        .filter(|i: &usize| i.count_ones() % 2 == 0)
        .map(|i| s.amplitudes()[i])
        .collect();
    assert!(max_diff(c.amplitudes(), &even) < 1e-12);
}
