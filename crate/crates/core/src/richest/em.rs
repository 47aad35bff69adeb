//! Maximum likelihood for the admixture model
//! `x_i ~ Mult(N_i, π_i)`, `π_i = Σ_ℓ φ_{i,ℓ} f_ℓ`, by EM.

use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::seed;

use super::docword::DocTermMatrix;

/// Added to every M-step numerator.
pub const SMOOTHING: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 500;
pub const DEFAULT_REL_TOL: f64 = 1e-8;
pub const DEFAULT_RESTARTS: usize = 5;
/// Relative loglik decrease tolerated as rounding before a run is declared
/// non-monotone.
pub const MONOTONE_SLACK: f64 = 1e-9;

const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmOptions {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_iters: DEFAULT_MAX_ITERS,
            rel_tol: DEFAULT_REL_TOL,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            exec: Execution::default(),
        }
    }
}

/// A fitted admixture: `phi` is n×L, `f` is L×J, rows on the simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmixtureModel {
    pub phi: Vec<Vec<f64>>,
    pub f: Vec<Vec<f64>>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Index of the winning restart.
    pub restart: usize,
    /// Loglik after initialization and after every iteration.
    pub loglik_trace: Vec<f64>,
    /// Largest decrease seen across all restarts (0 when monotone).
    pub max_loglik_drop: f64,
    pub smoothing: f64,
}

impl AdmixtureModel {
    pub fn components(&self) -> usize {
        self.f.len()
    }

    pub fn n_terms(&self) -> usize {
        self.f.first().map_or(0, Vec::len)
    }

    /// `π̂_i = φ̂_i F̂`.
    pub fn doc_distribution(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_terms()];
        for (&w, row) in self.phi[i].iter().zip(&self.f) {
            for (o, &v) in out.iter_mut().zip(row) {
                *o += w * v;
            }
        }
        out
    }
}

fn matrix_csv(rows: &[Vec<f64>], prefix: &str) -> String {
    let cols = rows.first().map_or(0, Vec::len);
    let header: Vec<String> = (0..cols).map(|c| format!("{prefix}{c}")).collect();
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

impl AdmixtureModel {
    pub fn phi_csv(&self) -> String {
        matrix_csv(&self.phi, "component_")
    }

    pub fn f_csv(&self) -> String {
        matrix_csv(&self.f, "term_")
    }
}

/// Compressed row and column views of the counts.
struct Sparse {
    n: usize,
    j: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    x: Vec<f64>,
    col_ptr: Vec<usize>,
    /// Row index and CSR position of each CSC entry.
    csc_row: Vec<usize>,
    csc_pos: Vec<usize>,
    /// `Σ_i [ln N_i! − Σ_j ln x_ij!]`.
    log_coef: f64,
}

impl Sparse {
    fn new(m: &DocTermMatrix) -> Self {
        let (n, j) = (m.n_docs(), m.n_terms());
        let mut row_ptr = vec![0; n + 1];
        let mut col = Vec::with_capacity(m.nnz());
        let mut x = Vec::with_capacity(m.nnz());
        let mut log_coef = 0.0;
        for &(d, t, c) in m.triplets() {
            row_ptr[d + 1] += 1;
            col.push(t);
            x.push(c as f64);
            log_coef -= ln_gamma(c as f64 + 1.0);
        }
        for d in 0..n {
            row_ptr[d + 1] += row_ptr[d];
            log_coef += ln_gamma(m.doc_totals()[d] as f64 + 1.0);
        }
        let mut col_ptr = vec![0; j + 1];
        for &t in &col {
            col_ptr[t + 1] += 1;
        }
        for t in 0..j {
            col_ptr[t + 1] += col_ptr[t];
        }
        let mut fill = col_ptr.clone();
        let mut csc_row = vec![0; col.len()];
        let mut csc_pos = vec![0; col.len()];
        for d in 0..n {
            for p in row_ptr[d]..row_ptr[d + 1] {
                let slot = &mut fill[col[p]];
                csc_row[*slot] = d;
                csc_pos[*slot] = p;
                *slot += 1;
            }
        }
        Sparse {
            n,
            j,
            row_ptr,
            col,
            x,
            col_ptr,
            csc_row,
            csc_pos,
            log_coef,
        }
    }

    fn chunks(len: usize) -> usize {
        len.div_ceil(CHUNK)
    }
}

/// Parameters in working layout: `phi` n×L and `ft` J×L, both row-major.
struct Params {
    l: usize,
    phi: Vec<f64>,
    ft: Vec<f64>,
}

/// Computes `w_ij = x_ij / π_ij` at every nonzero and returns the loglik.
fn e_step(s: &Sparse, p: &Params, exec: Execution, w: &mut Vec<f64>) -> f64 {
    let l = p.l;
    let parts = exec.map(Sparse::chunks(s.n), |c| {
        let docs = c * CHUNK..((c + 1) * CHUNK).min(s.n);
        let mut ws = Vec::with_capacity(s.row_ptr[docs.end] - s.row_ptr[docs.start]);
        let mut ll = 0.0;
        for d in docs {
            let phi = &p.phi[d * l..(d + 1) * l];
            for q in s.row_ptr[d]..s.row_ptr[d + 1] {
                let f = &p.ft[s.col[q] * l..(s.col[q] + 1) * l];
                let pi: f64 = phi.iter().zip(f).map(|(a, b)| a * b).sum();
                ll += s.x[q] * pi.ln();
                ws.push(s.x[q] / pi);
            }
        }
        (ws, ll)
    });
    w.clear();
    let mut ll = s.log_coef;
    for (ws, part) in parts {
        w.extend_from_slice(&ws);
        ll += part;
    }
    ll
}

/// Simultaneous update of Φ and F from the weights of the current E-step.
fn m_step(s: &Sparse, p: &Params, w: &[f64], exec: Execution) -> Params {
    let l = p.l;
    let phi_parts = exec.map(Sparse::chunks(s.n), |c| {
        let docs = c * CHUNK..((c + 1) * CHUNK).min(s.n);
        let mut out = Vec::with_capacity(docs.len() * l);
        for d in docs {
            let mut acc = vec![0.0; l];
            for q in s.row_ptr[d]..s.row_ptr[d + 1] {
                let f = &p.ft[s.col[q] * l..(s.col[q] + 1) * l];
                for (a, &v) in acc.iter_mut().zip(f) {
                    *a += w[q] * v;
                }
            }
            let phi = &p.phi[d * l..(d + 1) * l];
            for (a, &v) in acc.iter_mut().zip(phi) {
                *a = *a * v + SMOOTHING;
            }
            let sum: f64 = acc.iter().sum();
            out.extend(acc.iter().map(|a| a / sum));
        }
        out
    });
    let ft_parts = exec.map(Sparse::chunks(s.j), |c| {
        let terms = c * CHUNK..((c + 1) * CHUNK).min(s.j);
        let mut out = Vec::with_capacity(terms.len() * l);
        for t in terms {
            let mut acc = vec![0.0; l];
            for e in s.col_ptr[t]..s.col_ptr[t + 1] {
                let d = s.csc_row[e];
                let wq = w[s.csc_pos[e]];
                for (a, &v) in acc.iter_mut().zip(&p.phi[d * l..(d + 1) * l]) {
                    *a += wq * v;
                }
            }
            for (a, &v) in acc.iter_mut().zip(&p.ft[t * l..(t + 1) * l]) {
                *a = *a * v + SMOOTHING;
            }
            out.extend(acc);
        }
        out
    });
    let phi = phi_parts.concat();
    let mut ft = ft_parts.concat();
    normalize_columns(&mut ft, l);
    Params { l, phi, ft }
}

fn normalize_columns(ft: &mut [f64], l: usize) {
    let mut sums = vec![0.0; l];
    for row in ft.chunks(l) {
        for (s, &v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    for row in ft.chunks_mut(l) {
        for (v, s) in row.iter_mut().zip(&sums) {
            *v /= s;
        }
    }
}

/// Parameters implied by Dirichlet(1) responsibilities at every nonzero.
fn init_params(s: &Sparse, l: usize, seed: u64) -> Params {
    let mut rng = seed::rng(seed);
    let mut phi = vec![SMOOTHING; s.n * l];
    let mut ft = vec![SMOOTHING; s.j * l];
    let mut r = vec![0.0; l];
    for d in 0..s.n {
        for q in s.row_ptr[d]..s.row_ptr[d + 1] {
            for v in r.iter_mut() {
                *v = Exp1.sample(&mut rng);
            }
            let sum: f64 = r.iter().sum();
            for (k, &v) in r.iter().enumerate() {
                let mass = s.x[q] * v / sum;
                phi[d * l + k] += mass;
                ft[s.col[q] * l + k] += mass;
            }
        }
    }
    for row in phi.chunks_mut(l) {
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= sum);
    }
    normalize_columns(&mut ft, l);
    Params { l, phi, ft }
}

struct Run {
    params: Params,
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
    max_drop: f64,
}

fn run(s: &Sparse, l: usize, opts: &EmOptions, restart: usize, exec: Execution) -> Result<Run> {
    iterate(s, init_params(s, l, seed::derive(opts.seed, &[restart as u64])), opts, restart, exec)
}

fn iterate(s: &Sparse, mut params: Params, opts: &EmOptions, restart: usize, exec: Execution) -> Result<Run> {
    let mut w = Vec::with_capacity(s.x.len());
    let mut ll = e_step(s, &params, exec, &mut w);
    let mut trace = vec![ll];
    let mut max_drop: f64 = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        params = m_step(s, &params, &w, exec);
        let next = e_step(s, &params, exec, &mut w);
        iterations += 1;
        if !next.is_finite() {
            return Err(Error::Numeric(format!(
                "loglik became {next} at iteration {iterations}"
            )));
        }
        let drop = ll - next;
        max_drop = max_drop.max(drop);
        if drop > MONOTONE_SLACK * ll.abs().max(1.0) {
            return Err(Error::Numeric(format!(
                "EM loglik decreased by {drop:e} at iteration {iterations} of restart {restart}"
            )));
        }
        trace.push(next);
        let rel = (next - ll).abs() / ll.abs().max(f64::MIN_POSITIVE);
        ll = next;
        if rel < opts.rel_tol {
            converged = true;
            break;
        }
    }
    Ok(Run {
        params,
        trace,
        iterations,
        converged,
        max_drop,
    })
}

/// Fits `l` components by EM, keeping the best of `opts.restarts` runs
/// (ties go to the lowest restart index).
pub fn em_fit(x: &DocTermMatrix, l: usize, opts: &EmOptions) -> Result<AdmixtureModel> {
    check_inputs(x, l, opts)?;
    let s = Sparse::new(x);
    let runs = opts
        .exec
        .try_map(opts.restarts, |r| run(&s, l, opts, r, opts.exec))?;
    let max_drop = runs.iter().map(|r| r.max_drop).fold(0.0, f64::max);
    let (best, winner) = runs
        .into_iter()
        .enumerate()
        .reduce(|a, b| {
            if b.1.trace.last() > a.1.trace.last() {
                b
            } else {
                a
            }
        })
        .expect("at least one restart");
    Ok(into_model(&s, l, winner, best, max_drop))
}

/// Runs EM once from the given `phi` (n×L) and `f` (L×J).
pub fn em_fit_from(
    x: &DocTermMatrix,
    phi: &[Vec<f64>],
    f: &[Vec<f64>],
    opts: &EmOptions,
) -> Result<AdmixtureModel> {
    let l = f.len();
    check_inputs(x, l, opts)?;
    if phi.len() != x.n_docs() || phi.iter().any(|r| r.len() != l) {
        return Err(Error::DimensionMismatch {
            expected: x.n_docs(),
            got: phi.len(),
        });
    }
    if f.iter().any(|r| r.len() != x.n_terms()) {
        return Err(Error::DimensionMismatch {
            expected: x.n_terms(),
            got: f.iter().map(Vec::len).find(|&n| n != x.n_terms()).unwrap_or(0),
        });
    }
    let s = Sparse::new(x);
    let params = Params {
        l,
        phi: phi.concat(),
        ft: (0..s.j).flat_map(|t| f.iter().map(move |r| r[t])).collect(),
    };
    let run = iterate(&s, params, opts, 0, opts.exec)?;
    let drop = run.max_drop;
    Ok(into_model(&s, l, run, 0, drop))
}

fn into_model(s: &Sparse, l: usize, winner: Run, restart: usize, max_drop: f64) -> AdmixtureModel {
    let p = &winner.params;
    let phi = p.phi.chunks(l).map(<[f64]>::to_vec).collect();
    let f = (0..l)
        .map(|k| (0..s.j).map(|t| p.ft[t * l + k]).collect())
        .collect();
    AdmixtureModel {
        phi,
        f,
        loglik: *winner.trace.last().expect("trace starts non-empty"),
        iterations: winner.iterations,
        converged: winner.converged,
        restart,
        loglik_trace: winner.trace,
        max_loglik_drop: max_drop,
        smoothing: SMOOTHING,
    }
}

fn check_inputs(x: &DocTermMatrix, l: usize, opts: &EmOptions) -> Result<()> {
    if l == 0 {
        return Err(Error::InvalidConfig("at least one component is required".into()));
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidConfig("at least one restart is required".into()));
    }
    if !(opts.rel_tol >= 0.0) {
        return Err(Error::InvalidConfig(format!("relative tolerance {}", opts.rel_tol)));
    }
    if x.n_docs() == 0 {
        return Err(Error::InvalidConfig("corpus has no documents".into()));
    }
    if let Some(d) = x.doc_totals().iter().position(|&t| t == 0) {
        return Err(Error::EmptyDocument(d));
    }
    if l as u64 > x.total_tokens() {
        return Err(Error::InvalidConfig(format!(
            "{l} components exceed the {} tokens in the corpus",
            x.total_tokens()
        )));
    }
    Ok(())
}

/// Multinomial log-likelihood of `x` at `(phi, f)`, including the
/// multinomial coefficients.
pub fn loglik(x: &DocTermMatrix, phi: &[Vec<f64>], f: &[Vec<f64>]) -> Result<f64> {
    if phi.len() != x.n_docs() {
        return Err(Error::DimensionMismatch {
            expected: x.n_docs(),
            got: phi.len(),
        });
    }
    if let Some(r) = f.iter().find(|r| r.len() != x.n_terms()) {
        return Err(Error::DimensionMismatch {
            expected: x.n_terms(),
            got: r.len(),
        });
    }
    let mut ll = 0.0;
    let mut prev_doc = usize::MAX;
    for &(d, t, c) in x.triplets() {
        if d != prev_doc {
            ll += ln_gamma(x.doc_totals()[d] as f64 + 1.0);
            prev_doc = d;
        }
        let pi: f64 = phi[d].iter().zip(f).map(|(a, row)| a * row[t]).sum();
        ll += c as f64 * pi.ln() - ln_gamma(c as f64 + 1.0);
    }
    Ok(ll)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq() -> EmOptions {
        EmOptions {
            exec: Execution::Sequential,
            ..EmOptions::default()
        }
    }

    fn corpus() -> DocTermMatrix {
        DocTermMatrix::from_dense(&[
            vec![5, 1, 0, 0],
            vec![4, 2, 1, 0],
            vec![0, 1, 6, 3],
            vec![1, 0, 2, 5],
            vec![3, 3, 3, 3],
        ])
        .unwrap()
    }

    #[test]
    fn single_component_is_pooled_multinomial() {
        let x = corpus();
        let m = em_fit(&x, 1, &seq()).unwrap();
        let totals = x.term_totals();
        let n: u64 = totals.iter().sum();
        for (f, &t) in m.f[0].iter().zip(&totals) {
            assert!((f - t as f64 / n as f64).abs() < 1e-9);
        }
        assert!(m.phi.iter().all(|r| r == &[1.0]));
        let pooled = loglik(&x, &m.phi, &m.f).unwrap();
        assert!((m.loglik - pooled).abs() < 1e-8 * pooled.abs());
    }

    #[test]
    fn monotone_and_consistent_loglik() {
        let x = corpus();
        let m = em_fit(&x, 3, &seq()).unwrap();
        assert!(m.loglik_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs()));
        let direct = loglik(&x, &m.phi, &m.f).unwrap();
        assert!((m.loglik - direct).abs() <= 1e-8 * direct.abs());
        for r in m.phi.iter().chain(&m.f) {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn execution_modes_agree() {
        let x = corpus();
        let a = em_fit(&x, 2, &seq()).unwrap();
        let b = em_fit(
            &x,
            2,
            &EmOptions {
                exec: Execution::Parallel,
                ..seq()
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        let x = corpus();
        assert!(em_fit(&x, 0, &seq()).is_err());
        assert!(em_fit(&x, 100, &seq()).is_err());
        let empty = DocTermMatrix::from_dense(&[vec![1, 0], vec![0, 0]]).unwrap();
        assert!(matches!(em_fit(&empty, 1, &seq()), Err(Error::EmptyDocument(1))));
    }
}
