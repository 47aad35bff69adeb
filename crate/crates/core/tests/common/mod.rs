#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Uniform point of the simplex by sorted spacings.
pub fn uniform_simplex<R: Rng>(rng: &mut R, j: usize) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..j - 1).map(|_| rng.random::<f64>()).collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|w| w[1] - w[0]).collect()
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(p: &[f64], a: &[f64], b: &[f64]) -> bool {
    cross(a, b, p).abs() < 1e-12
        && (p[0] - a[0]) * (p[0] - b[0]) <= 1e-12
        && (p[1] - a[1]) * (p[1] - b[1]) <= 1e-12
}

fn in_triangle(p: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> bool {
    let d1 = cross(a, b, p);
    let d2 = cross(b, c, p);
    let d3 = cross(c, a, p);
    let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(neg && pos)
}

/// Planar extremality by Carathéodory: a point is interior to the hull of
/// the others iff it lies in a triangle or segment spanned by them, or
/// coincides with one of them.
pub fn extreme_2d(pts: &[Vec<f64>]) -> Vec<bool> {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let others: Vec<&Vec<f64>> = (0..n).filter(|&k| k != i).map(|k| &pts[k]).collect();
            let p = &pts[i];
            if others.iter().any(|q| q[0] == p[0] && q[1] == p[1]) {
                return false;
            }
            for a in 0..others.len() {
                for b in a + 1..others.len() {
                    if on_segment(p, others[a], others[b]) {
                        return false;
                    }
                    for c in b + 1..others.len() {
                        if in_triangle(p, others[a], others[b], others[c]) {
                            return false;
                        }
                    }
                }
            }
            true
        })
        .collect()
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn sub3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn in_tetra(p: &[f64], v: [&[f64]; 4]) -> bool {
    let (e1, e2, e3) = (sub3(v[1], v[0]), sub3(v[2], v[0]), sub3(v[3], v[0]));
    let d = det3(e1, e2, e3);
    if d.abs() < 1e-14 {
        return false;
    }
    let r = sub3(p, v[0]);
    let l1 = det3(r, e2, e3) / d;
    let l2 = det3(e1, r, e3) / d;
    let l3 = det3(e1, e2, r) / d;
    l1 >= 0.0 && l2 >= 0.0 && l3 >= 0.0 && l1 + l2 + l3 <= 1.0
}

/// Extremality of generic points in ℝ³ by the tetrahedron test.
pub fn extreme_3d(pts: &[Vec<f64>]) -> Vec<bool> {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let o: Vec<&[f64]> = (0..n).filter(|&k| k != i).map(|k| pts[k].as_slice()).collect();
            for a in 0..o.len() {
                for b in a + 1..o.len() {
                    for c in b + 1..o.len() {
                        for d in c + 1..o.len() {
                            if in_tetra(&pts[i], [o[a], o[b], o[c], o[d]]) {
                                return false;
                            }
                        }
                    }
                }
            }
            true
        })
        .collect()
}

/// Maximal flags of the (J−1)-simplex as vertex orderings: J!.
pub fn permutations(j: usize) -> u64 {
    fn heap(k: usize, a: &mut Vec<usize>, count: &mut u64) {
        if k <= 1 {
            *count += 1;
            return;
        }
        for i in 0..k {
            heap(k - 1, a, count);
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
    }
    let mut a: Vec<usize> = (0..j).collect();
    let mut count = 0;
    heap(j, &mut a, &mut count);
    count
}

pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

/// Smallest over assignments of the largest matched total variation.
pub fn matched_tv(est: &[Vec<f64>], truth: &[Vec<f64>]) -> f64 {
    fn go(k: usize, used: &mut Vec<bool>, est: &[Vec<f64>], truth: &[Vec<f64>], cur: f64, best: &mut f64) {
        if k == truth.len() {
            *best = best.min(cur);
            return;
        }
        for e in 0..est.len() {
            if !used[e] {
                used[e] = true;
                go(k + 1, used, est, truth, cur.max(tv(&est[e], &truth[k])), best);
                used[e] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, &mut vec![false; est.len()], est, truth, 0.0, &mut best);
    best
}
