mod common;

use cheapmix::hull::*;
use cheapmix::simplex::{sample, SamplerSpec};
use proptest::prelude::*;
use rand::Rng;

fn extreme_flags(ps: &PointSet, set: &ExtremalSet) -> Vec<bool> {
    let mut flags = vec![false; ps.len()];
    for &i in &set.indices {
        flags[i] = true;
    }
    flags
}

#[test]
fn planar_sets_match_orientation_oracle() {
    let mut rng = common::rng(100);
    for inst in 0..100 {
        let n = rng.random_range(3..25);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let ps = PointSet::from_rows(&pts).unwrap();
        let got = extreme_flags(&ps, &extremal_set(&ps, DEFAULT_EXTREME_TOL).unwrap());
        assert_eq!(got, common::extreme_2d(&pts), "instance {inst}");
    }
}

#[test]
fn uniform_triangle_sample_matches_oracle() {
    let pts = sample(&SamplerSpec::uniform(3, 7).unwrap(), 200).unwrap();
    let ps = PointSet::from_probability_vectors(&pts).unwrap();
    let set = extremal_set(&ps, DEFAULT_EXTREME_TOL).unwrap();
    let planar: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0], p[1]]).collect();
    assert_eq!(extreme_flags(&ps, &set), common::extreme_2d(&planar));
    assert!(set.f0 >= 3);
}

#[test]
fn tetrahedral_sets_match_oracle() {
    let mut rng = common::rng(101);
    for _ in 0..30 {
        let n = rng.random_range(4..16);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| common::uniform_simplex(&mut rng, 4)[..3].to_vec())
            .collect();
        let ps = PointSet::from_rows(&pts).unwrap();
        let got = extreme_flags(&ps, &extremal_set(&ps, DEFAULT_EXTREME_TOL).unwrap());
        assert_eq!(got, common::extreme_3d(&pts));
    }
}

#[test]
fn segment_points_have_two_extremes() {
    let mut rng = common::rng(102);
    for _ in 0..20 {
        let n = rng.random_range(2..200);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let t: f64 = rng.random();
                vec![t, 1.0 - t]
            })
            .collect();
        let ps = PointSet::from_rows(&pts).unwrap();
        let set = extremal_set(&ps, DEFAULT_EXTREME_TOL).unwrap();
        assert_eq!(set.f0, 2.min(ps.len()));
        let xs: Vec<f64> = set.indices.iter().map(|&i| ps.point(i)[0]).collect();
        let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        assert!(xs.contains(&lo) && xs.contains(&hi));
    }
}

#[test]
fn uniform_hulls_have_at_least_j_vertices() {
    for j in 2..=5 {
        for s in 0..5 {
            let pts = sample(&SamplerSpec::uniform(j, s).unwrap(), 50).unwrap();
            let ps = PointSet::from_probability_vectors(&pts).unwrap();
            assert!(extremal_set(&ps, DEFAULT_EXTREME_TOL).unwrap().f0 >= j);
        }
    }
}

#[test]
fn convex_combinations_are_inside() {
    let mut rng = common::rng(103);
    let pts = sample(&SamplerSpec::uniform(5, 3).unwrap(), 12).unwrap();
    let ps = PointSet::from_probability_vectors(&pts).unwrap();
    for _ in 0..1000 {
        let w = common::uniform_simplex(&mut rng, pts.len());
        let mut q = vec![0.0; 5];
        for (wk, p) in w.iter().zip(&pts) {
            for (qi, &v) in q.iter_mut().zip(p.as_slice()) {
                *qi += wk * v;
            }
        }
        assert!(point_to_hull_distance(&q, &ps).unwrap() < 1e-9);
    }
}

#[test]
fn both_solvers_agree_on_distances() {
    let mut rng = common::rng(104);
    for _ in 0..100 {
        let pts: Vec<Vec<f64>> = (0..10).map(|_| common::uniform_simplex(&mut rng, 4)).collect();
        let ps = PointSet::from_rows(&pts).unwrap();
        let q: Vec<f64> = (0..4).map(|_| rng.random::<f64>() - 0.2).collect();
        let a = point_to_hull_distance_with(&q, &ps, HullSolver::MinNormPoint).unwrap();
        let b = point_to_hull_distance_with(&q, &ps, HullSolver::AwayStepFrankWolfe).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn towers_match_vertex_orderings() {
    for j in 2..=MAX_TOWER_J {
        assert_eq!(count_towers(j).unwrap().towers, common::permutations(j));
    }
    assert_eq!(count_towers(2).unwrap().towers, 2);
    assert_eq!(count_towers(3).unwrap().towers, 6);
    assert!((c_constant(3).unwrap() - 0.1875).abs() < 1e-12);
}

#[test]
fn pca_reconstructs_full_rank_data() {
    let mut rng = common::rng(105);
    let data: Vec<Vec<f64>> = (0..20).map(|_| common::uniform_simplex(&mut rng, 4)).collect();
    let d = attainable_dim(&data).unwrap();
    assert_eq!(d, 3);
    let proj = pca_project(&data, d).unwrap();
    for (row, z) in data.iter().zip(&proj.rows) {
        for (a, b) in row.iter().zip(proj.reconstruct(z)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
    let ratio: f64 = proj.explained_variance_ratio.iter().sum();
    assert!((ratio - 1.0).abs() < 1e-12);
}

fn cloud(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 2..max_n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adding_interior_points_keeps_the_extremes(pts in cloud(15), w in prop::collection::vec(0.01f64..1.0, 15)) {
        let ps = PointSet::from_rows(&pts).unwrap();
        let before: Vec<Vec<f64>> = extremal_set(&ps, DEFAULT_EXTREME_TOL).unwrap()
            .indices.iter().map(|&i| ps.point(i).to_vec()).collect();
        let s: f64 = w[..pts.len()].iter().sum();
        let mut inner = vec![0.0; 3];
        for (wk, p) in w.iter().zip(&pts) {
            for (q, v) in inner.iter_mut().zip(p) {
                *q += wk / s * v;
            }
        }
        let mut more = pts.clone();
        more.push(inner);
        let ps2 = PointSet::from_rows(&more).unwrap();
        let after: Vec<Vec<f64>> = extremal_set(&ps2, DEFAULT_EXTREME_TOL).unwrap()
            .indices.iter().map(|&i| ps2.point(i).to_vec()).collect();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn hausdorff_is_a_metric_on_hulls(a in cloud(8), b in cloud(8), c in cloud(8)) {
        let (a, b, c) = (
            PointSet::from_rows(&a).unwrap(),
            PointSet::from_rows(&b).unwrap(),
            PointSet::from_rows(&c).unwrap(),
        );
        let ab = hausdorff(&a, &b).unwrap();
        prop_assert!((ab - hausdorff(&b, &a).unwrap()).abs() < 1e-9);
        prop_assert!(hausdorff(&a, &a).unwrap() < 1e-9);
        prop_assert!(ab <= hausdorff(&a, &c).unwrap() + hausdorff(&c, &b).unwrap() + 1e-7);
    }

    #[test]
    fn extremes_are_invariant_under_relabeling(pts in cloud(12), rot in 0usize..12) {
        let ps = PointSet::from_rows(&pts).unwrap();
        let mut shifted = pts.clone();
        shifted.rotate_left(rot % pts.len());
        let ps2 = PointSet::from_rows(&shifted).unwrap();
        let mut a: Vec<Vec<f64>> = extremal_set(&ps, DEFAULT_EXTREME_TOL).unwrap()
            .indices.iter().map(|&i| ps.point(i).to_vec()).collect();
        let mut b: Vec<Vec<f64>> = extremal_set(&ps2, DEFAULT_EXTREME_TOL).unwrap()
            .indices.iter().map(|&i| ps2.point(i).to_vec()).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn screened_set_matches_the_definition(
        corners in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 4), 1..4),
        weights in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 2..40),
    ) {
        // Points in the hull of a few corners, so the cloud is often flat.
        let rows: Vec<Vec<f64>> = weights
            .iter()
            .map(|w| {
                let w = &w[..corners.len()];
                let s: f64 = w.iter().sum::<f64>().max(1e-12);
                (0..4)
                    .map(|t| corners.iter().zip(w).map(|(c, wk)| c[t] * wk / s).sum())
                    .collect()
            })
            .collect();
        let ps = PointSet::from_rows(&rows).unwrap();
        prop_assume!(ps.len() >= 2);
        let flags = extreme_flags(&ps, &extremal_set(&ps, DEFAULT_EXTREME_TOL).unwrap());
        for (i, &f) in flags.iter().enumerate() {
            prop_assert_eq!(f, is_extreme(i, &ps, DEFAULT_EXTREME_TOL).unwrap(), "point {}", i);
        }
    }
}
