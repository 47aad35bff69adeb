mod common;

use cheapmix::choquet::*;
use cheapmix::polya::*;
use cheapmix::ProbabilityVector;
use proptest::prelude::*;
use rand::Rng;

/// Vertices pulled from the standard basis toward random points; always
/// affinely independent and extreme.
fn random_frame<R: Rng>(rng: &mut R, j: usize) -> Vec<ProbabilityVector> {
    (0..j)
        .map(|k| {
            let t = rng.random_range(0.0..0.45);
            let u = common::uniform_simplex(rng, j);
            let v: Vec<f64> = (0..j)
                .map(|i| (1.0 - t) * f64::from(u8::from(i == k)) + t * u[i])
                .collect();
            ProbabilityVector::new(&v).unwrap()
        })
        .collect()
}

#[test]
fn thousand_round_trips() {
    let mut rng = common::rng(200);
    let mut worst: f64 = 0.0;
    for inst in 0..1000 {
        let j = rng.random_range(2..=6);
        let frame = make_frame(&random_frame(&mut rng, j)).unwrap();
        let w = common::uniform_simplex(&mut rng, j);
        let mut p = vec![0.0; j];
        for (wk, v) in w.iter().zip(frame.vertices()) {
            for (pi, &x) in p.iter_mut().zip(v.as_slice()) {
                *pi += wk * x;
            }
        }
        let p = ProbabilityVector::new(&p).unwrap();
        let lu = choquet_measure(&p, &frame).unwrap();
        let nn = choquet_measure_nnls(&p, &frame).unwrap();
        let back = reconstruct(&lu, &frame).unwrap();
        for i in 0..j {
            worst = worst
                .max((back[i] - p[i]).abs())
                .max((lu.weights[i] - nn.weights[i]).abs())
                .max((lu.weights[i] - w[i]).abs());
        }
        assert!(worst < 1e-8, "instance {inst}: {worst:e}");
    }
}

#[test]
fn exterior_points_are_rejected() {
    let mut rng = common::rng(201);
    for _ in 0..50 {
        let frame = make_frame(&random_frame(&mut rng, 3)).unwrap();
        assert!(matches!(
            choquet_measure(&ProbabilityVector::vertex(3, 0).unwrap(), &frame),
            Err(cheapmix::Error::OutsideHull { .. })
        ));
    }
}

/// Beta–binomial posterior means along each atom's path, from raw counts.
fn urn_oracle(counts: &[u64], level_params: &[f64]) -> Vec<f64> {
    let m = counts.len();
    let depth = (m as f64).log2().ceil() as usize;
    let mut cells = counts.to_vec();
    cells.resize(1 << depth, 0);
    let mut w = vec![1.0; 1 << depth];
    for level in 0..depth {
        let width = 1 << (depth - level);
        let a = level_params[level];
        for (cell, wc) in w.iter_mut().enumerate() {
            let node = cell / width * width;
            let half = width / 2;
            let left: u64 = cells[node..node + half].iter().sum();
            let right: u64 = cells[node + half..node + width].iter().sum();
            let here = if cell - node < half { left } else { right };
            *wc *= (a + here as f64) / (2.0 * a + (left + right) as f64);
        }
    }
    w.truncate(m);
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

#[test]
fn posterior_matches_urn_oracle() {
    let mut rng = common::rng(202);
    for m in 2..=9 {
        let emb = AtomEmbedding::new(m).unwrap();
        let params = build_params(rng.random_range(0.1..=1.0), emb.depth.max(1)).unwrap();
        let data: Vec<usize> = (0..rng.random_range(0..300)).map(|_| rng.random_range(0..m)).collect();
        let mut counts = vec![0u64; m];
        data.iter().for_each(|&a| counts[a] += 1);
        let prior = PolyaTreePosterior::prior(params.clone(), emb).unwrap();
        let est = weight_estimate(&posterior_update(&prior, &data, &emb).unwrap(), &emb).unwrap();
        let want = urn_oracle(&counts, &params.level_params);
        for (a, b) in est.weights.as_slice().iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn hand_examples() {
    for m in [2, 4] {
        let emb = AtomEmbedding::new(m).unwrap();
        let prior = PolyaTreePosterior::prior(build_params(1.0, emb.depth).unwrap(), emb).unwrap();
        let w = weight_estimate(&prior, &emb).unwrap();
        assert!(w.weights.as_slice().iter().all(|&x| x == 1.0 / m as f64));
    }
    let emb = AtomEmbedding::new(2).unwrap();
    let prior = PolyaTreePosterior::prior(build_params(1.0, 1).unwrap(), emb).unwrap();
    let post = posterior_update(&prior, &[0, 0, 0, 1], &emb).unwrap();
    assert_eq!(weight_estimate(&post, &emb).unwrap().weights[0], 0.55);
    assert!((minimax_rate(1000, 1.0).unwrap() - 0.1904).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn update_order_and_sharding_do_not_matter(data in prop::collection::vec(0usize..5, 0..80), split in 0usize..80, rot in 0usize..80) {
        let emb = AtomEmbedding::new(5).unwrap();
        let prior = PolyaTreePosterior::prior(build_params(0.7, 4).unwrap(), emb).unwrap();
        let all = posterior_update(&prior, &data, &emb).unwrap();
        let mut rotated = data.clone();
        if !data.is_empty() {
            rotated.rotate_left(rot % data.len());
        }
        prop_assert_eq!(&all, &posterior_update(&prior, &rotated, &emb).unwrap());
        let cut = split.min(data.len());
        let a = posterior_update(&prior, &data[..cut], &emb).unwrap();
        let b = posterior_update(&prior, &data[cut..], &emb).unwrap();
        prop_assert_eq!(&all, &a.merge(&b).unwrap());
        for level in 0..=emb.depth {
            let s: f64 = all.cell_masses(level).unwrap().iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn choquet_weights_reconstruct(w in prop::collection::vec(0.01f64..1.0, 4), seed in 0u64..1000) {
        let mut rng = common::rng(seed);
        let frame = make_frame(&random_frame(&mut rng, 4)).unwrap();
        let w = ProbabilityVector::new(&w).unwrap();
        let p = reconstruct(&ChoquetMeasure { weights: w.clone() }, &frame).unwrap();
        let got = choquet_measure(&p, &frame).unwrap();
        prop_assert!(got.weights.total_variation(&w) < 1e-9);
    }
}
