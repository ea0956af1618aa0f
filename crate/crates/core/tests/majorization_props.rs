use circmaj::majorization::{
    compare, cumulants, deviation_z, ensemble_stats, lorenz_sup_distance, stepwise_order,
    CumulantVector, LorenzAccumulator, MajorizationOrder,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn normalize(w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn probs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3f64..1.0, 2..max_len).prop_map(normalize)
}

/// Replaces `p_i, p_j` by their `t`-weighted mixture, a doubly stochastic map.
fn t_transform(p: &[f64], i: usize, j: usize, t: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[i] = t * p[i] + (1.0 - t) * p[j];
    q[j] = (1.0 - t) * p[i] + t * p[j];
    q
}

fn at_least(x: &CumulantVector, y: &CumulantVector) -> bool {
    matches!(
        compare(x, y, TOL).unwrap(),
        MajorizationOrder::XMajorizesY | MajorizationOrder::Equal
    )
}

proptest! {
    #[test]
    fn cumulants_ignore_order(p in probs(64), seed in any::<u64>()) {
        let mut q = p.clone();
        q.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(cumulants(&p).unwrap(), cumulants(&q).unwrap());
    }

    #[test]
    fn cumulants_are_increasing_concave_and_end_at_one(p in probs(64)) {
        let f = cumulants(&p).unwrap();
        let v = f.as_slice();
        prop_assert!((v[v.len() - 1] - 1.0).abs() < 1e-12);
        prop_assert!(v[0] >= 1.0 / v.len() as f64 - 1e-15);
        let inc: Vec<f64> = std::iter::once(v[0]).chain(v.windows(2).map(|w| w[1] - w[0])).collect();
        prop_assert!(inc.iter().all(|&d| d >= -1e-15));
        prop_assert!(inc.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        prop_assert!(CumulantVector::from_values(v.to_vec()).is_ok());
    }

    #[test]
    fn delta_and_uniform_bound_everything(p in probs(64)) {
        let n = p.len();
        let mut delta = vec![0.0; n];
        delta[0] = 1.0;
        let f = cumulants(&p).unwrap();
        prop_assert!(at_least(&cumulants(&delta).unwrap(), &f));
        prop_assert!(at_least(&f, &cumulants(&vec![1.0 / n as f64; n]).unwrap()));
    }

    #[test]
    fn mixing_moves_down_the_order(p in probs(32), i in 0usize..32, j in 0usize..32, t in 0.0f64..1.0) {
        let (i, j) = (i % p.len(), j % p.len());
        let q = t_transform(&p, i, j, t);
        prop_assert!(at_least(&cumulants(&p).unwrap(), &cumulants(&q).unwrap()));
    }

    #[test]
    fn order_is_transitive(p in probs(32), moves in prop::collection::vec((0usize..32, 0usize..32, 0.0f64..1.0), 2..6)) {
        let mut chain = vec![p.clone()];
        for (i, j, t) in moves {
            let last = chain.last().unwrap();
            let next = t_transform(last, i % p.len(), j % p.len(), t);
            chain.push(next);
        }
        let first = cumulants(&chain[0]).unwrap();
        let last = cumulants(chain.last().unwrap()).unwrap();
        prop_assert!(at_least(&first, &last));
        let curves: Vec<CumulantVector> = chain.iter().map(|c| cumulants(c).unwrap()).collect();
        prop_assert!(stepwise_order(&curves, TOL).unwrap().ordered);
    }

    #[test]
    fn comparison_is_antisymmetric(p in probs(16), q in probs(16)) {
        let n = p.len().min(q.len());
        let (p, q) = (normalize(p[..n].to_vec()), normalize(q[..n].to_vec()));
        let (x, y) = (cumulants(&p).unwrap(), cumulants(&q).unwrap());
        prop_assert_eq!(compare(&x, &y, TOL).unwrap(), compare(&y, &x, TOL).unwrap().reversed());
        prop_assert_eq!(compare(&x, &x, TOL).unwrap(), MajorizationOrder::Equal);
    }

    #[test]
    fn accumulator_matches_batch_statistics(ps in prop::collection::vec(prop::collection::vec(1e-3f64..1.0, 8).prop_map(normalize), 2..40)) {
        let curves: Vec<CumulantVector> = ps.iter().map(|p| cumulants(p).unwrap()).collect();
        let batch = ensemble_stats(&curves).unwrap();
        let mut acc = LorenzAccumulator::new(8);
        curves.iter().for_each(|c| acc.push(c).unwrap());
        let stream = acc.finish().unwrap();
        prop_assert_eq!(stream.samples, batch.samples);
        for k in 0..8 {
            prop_assert!((stream.mean[k] - batch.mean[k]).abs() < 1e-12);
            let (a, b) = (stream.stddev.as_ref().unwrap()[k], batch.stddev.as_ref().unwrap()[k]);
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn splitting_every_probability_keeps_the_curve(p in probs(32)) {
        // Halving each entry doubles the grid and reproduces the same curve.
        let fine: Vec<f64> = p.iter().flat_map(|&x| [x / 2.0, x / 2.0]).collect();
        let a = cumulants(&p).unwrap();
        let b = cumulants(&fine).unwrap();
        prop_assert!(lorenz_sup_distance(a.as_slice(), b.as_slice()).unwrap() < 1e-12);
        prop_assert!(lorenz_sup_distance(b.as_slice(), a.as_slice()).unwrap() < 1e-12);
    }

    #[test]
    fn sup_distance_is_a_metric_on_one_grid(p in probs(16), q in probs(16), r in probs(16)) {
        let n = p.len().min(q.len()).min(r.len());
        let [a, b, c] = [p, q, r].map(|v| cumulants(&normalize(v[..n].to_vec())).unwrap());
        let d = |x: &CumulantVector, y: &CumulantVector| lorenz_sup_distance(x.as_slice(), y.as_slice()).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-15);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-15);
    }
}

#[test]
fn crossing_curves_are_incomparable() {
    let x = cumulants(&[0.5, 0.25, 0.25, 0.0]).unwrap();
    let y = cumulants(&[0.4, 0.4, 0.2, 0.0]).unwrap();
    assert_eq!(
        compare(&x, &y, TOL).unwrap(),
        MajorizationOrder::Incomparable
    );
    let short = cumulants(&[1.0, 0.0]).unwrap();
    assert!(compare(&x, &short, TOL).is_err());
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(cumulants(&[0.5, 0.6]).is_err());
    assert!(cumulants(&[1.5, -0.5]).is_err());
    assert!(CumulantVector::from_values(vec![0.2, 0.8, 1.0]).is_err());
    assert!(CumulantVector::from_values(vec![0.5, 0.9]).is_err());
    assert!(ensemble_stats(&[cumulants(&[1.0]).unwrap()]).is_err());
}

#[test]
fn deviation_scores() {
    assert_eq!(deviation_z(1e-13, 0.0), 0.0);
    assert_eq!(deviation_z(1e-3, 0.0), f64::INFINITY);
    assert_eq!(deviation_z(-0.02, 0.01), 2.0);
}
