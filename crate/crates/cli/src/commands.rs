use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};

use cheapmix::asymptotics::{
    clt_experiment, definetti_bound, fit_growth, gamma_experiment, growth_experiment,
    hull_limit_experiment, ExperimentConfig, HullLimitPoint, DEFAULT_N_GRID,
};
use cheapmix::choquet::{
    choquet_measure, choquet_measure_nnls, make_frame, reconstruct, ChoquetMeasure, SimplexFrame,
};
use cheapmix::hull::{c_constant, count_towers, DEFAULT_EXTREME_TOL};
use cheapmix::polya::{build_params, convergence_trace, minimax_rate, AtomEmbedding, TracePoint};
use cheapmix::richest::{
    load_docword, synthetic_corpus, two_stage, EmOptions, PipelineOptions, SyntheticConfig,
    DEFAULT_MAX_ROUNDS, DEFAULT_PCA_DIM, DEFAULT_RESOLUTION,
};
use cheapmix::{Execution, ProbabilityVector, SamplerKind, SamplerSpec};

use crate::CliError;

fn default_grid() -> Vec<usize> {
    DEFAULT_N_GRID.to_vec()
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Growth of the extreme-point count F0 of uniform (or Dirichlet) hulls.
    ///
    /// Writes growth.csv (n, mean_f0, var_f0, se, leading-order prediction)
    /// and growth.json (curve plus the fit mean_f0 ~ c (ln n)^p).
    Growth(GrowthArgs),
    /// Normal approximation of F0: writes clt.csv (per replicate) and clt.json.
    Clt(CltArgs),
    /// Ratio of mean F0 under a second law to the uniform one: gamma.csv, gamma.json.
    Gamma(GammaArgs),
    /// Hausdorff distance from nested hulls to the simplex: hull_limit.csv, hull_limit.json.
    HullLimit(HullLimitArgs),
    /// Finite-exchangeability defect beta(m, L); prints beta and writes definetti.json.
    Definetti(DefinettiArgs),
    /// Weights of a point over the vertices of a simplex frame: choquet.csv, choquet.json.
    Choquet(ChoquetArgs),
    /// Polya tree posterior for vertex weights: polya.csv (sup-norm error trace), polya.json.
    Polya(PolyaArgs),
    /// Two-stage admixture fit of a docword corpus.
    ///
    /// Writes fit.json (full report), rounds.csv, phi.csv (documents by
    /// components) and f.csv (components by kept terms).
    FitAdmixture(FitArgs),
    /// Synthetic corpus from a known admixture: corpus.docword, truth.json, truth_f.csv.
    SynthCorpus(SynthArgs),
    /// Tower count of the simplex and the constant c(J): towers.json.
    Towers(TowersArgs),
    /// Reruns the configuration recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GrowthArgs {
    /// Simplex dimension J (points live in Δ^{J-1}).
    #[arg(long = "J")]
    #[serde(rename = "J")]
    pub j: usize,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = default_grid())]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// `uniform`, `dirichlet:a` (symmetric) or `dirichlet:a1,...,aJ`.
    #[arg(long, default_value = "uniform")]
    pub sampler: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CltArgs {
    #[arg(long = "J")]
    #[serde(rename = "J")]
    pub j: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GammaArgs {
    #[arg(long = "J")]
    #[serde(rename = "J")]
    pub j: usize,
    #[arg(long, value_delimiter = ',', default_values_t = default_grid())]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Law compared with the uniform one, in `--sampler` syntax.
    #[arg(long, default_value = "dirichlet:2")]
    pub generic: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct HullLimitArgs {
    #[arg(long = "J")]
    #[serde(rename = "J")]
    pub j: usize,
    #[arg(long, value_delimiter = ',', default_values_t = default_grid())]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DefinettiArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ChoquetArgs {
    /// CSV file with one frame vertex per row (optional header). Defaults
    /// to the standard basis.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    /// The point, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PolyaArgs {
    /// True vertex weights, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub truth: Vec<f64>,
    /// Hölder exponent in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Tree depth; defaults to ⌈log2 M⌉.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![100u64, 1000, 10_000])]
    pub k_grid: Vec<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Corpus in UCI docword format.
    #[arg(long)]
    pub input: PathBuf,
    /// Components of the initial fit.
    #[arg(long = "L0")]
    #[serde(rename = "L0")]
    pub l0: usize,
    #[arg(long, default_value_t = DEFAULT_PCA_DIM)]
    pub pca_dim: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
    pub max_rounds: usize,
    /// Distance below which a fitted component counts as inside the hull
    /// of the others, in the projected space.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: f64,
    #[arg(long, default_value_t = EmOptions::default().restarts)]
    pub restarts: usize,
    #[arg(long, default_value_t = EmOptions::default().max_iters)]
    pub max_iters: usize,
    #[arg(long, default_value_t = EmOptions::default().rel_tol)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub m_star: usize,
    #[arg(long = "J")]
    #[serde(rename = "J")]
    pub j: usize,
    #[arg(long)]
    pub n_docs: usize,
    #[arg(long)]
    pub doc_len: u64,
    /// 0 gives unstructured components, 1 disjoint supports.
    #[arg(long, default_value_t = 1.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mix_alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TowersArgs {
    #[arg(long = "J")]
    #[serde(rename = "J")]
    pub j: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Growth(_) => "growth",
            Command::Clt(_) => "clt",
            Command::Gamma(_) => "gamma",
            Command::HullLimit(_) => "hull-limit",
            Command::Definetti(_) => "definetti",
            Command::Choquet(_) => "choquet",
            Command::Polya(_) => "polya",
            Command::FitAdmixture(_) => "fit-admixture",
            Command::SynthCorpus(_) => "synth-corpus",
            Command::Towers(_) => "towers",
            Command::Replay(_) => "replay",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Growth(a) => Some(a.seed),
            Command::Clt(a) => Some(a.seed),
            Command::Gamma(a) => Some(a.seed),
            Command::HullLimit(a) => Some(a.seed),
            Command::Polya(a) => Some(a.seed),
            Command::FitAdmixture(a) => Some(a.seed),
            Command::SynthCorpus(a) => Some(a.seed),
            Command::Definetti(_) | Command::Choquet(_) | Command::Towers(_) | Command::Replay(_) => None,
        }
    }
}

/// Files to write (name, contents), text for stdout and input paths to
/// fingerprint.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub files: Vec<(String, String)>,
    pub stdout: Option<String>,
    pub inputs: Vec<String>,
}

impl RunOutput {
    fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.file(name, text);
        Ok(())
    }
}

fn parse_sampler(s: &str, j: usize, seed: u64) -> Result<SamplerSpec, CliError> {
    let kind = match s.split_once(':') {
        None if s == "uniform" => SamplerKind::Uniform,
        Some(("dirichlet", list)) => {
            let alpha = list
                .split(',')
                .map(|a| a.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Config(format!("sampler {s:?}: {e}")))?;
            let alpha = if alpha.len() == 1 { vec![alpha[0]; j] } else { alpha };
            SamplerKind::Dirichlet { alpha }
        }
        _ => {
            return Err(CliError::Config(format!(
                "unknown sampler {s:?}; expected uniform or dirichlet:<alpha>"
            )))
        }
    };
    Ok(SamplerSpec::new(kind, j, seed)?)
}

fn parse_frame(path: &PathBuf) -> Result<Vec<ProbabilityVector>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        match parsed {
            Ok(r) => rows.push(ProbabilityVector::new(&r)?),
            Err(_) if rows.is_empty() && k == 0 => continue,
            Err(e) => {
                return Err(CliError::Config(format!(
                    "{}:{}: {e}",
                    path.display(),
                    k + 1
                )))
            }
        }
    }
    Ok(rows)
}

pub fn execute(command: &Command) -> Result<RunOutput, CliError> {
    let exec = Execution::default();
    let mut out = RunOutput::default();
    match command {
        Command::Growth(a) => {
            let cfg = ExperimentConfig {
                j: a.j,
                n_grid: a.n_grid.clone(),
                reps: a.reps,
                sampler: parse_sampler(&a.sampler, a.j, a.seed)?,
                seed: a.seed,
                tol: DEFAULT_EXTREME_TOL,
                exec,
            };
            cfg.validate()?;
            let curve = growth_experiment(&cfg)?;
            let (fit, fit_note) = match fit_growth(&curve) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            out.file("growth.csv", curve.to_csv());
            out.json(
                "growth.json",
                &serde_json::json!({ "curve": curve, "fit": fit, "fit_note": fit_note }),
            )?;
        }
        Command::Clt(a) => {
            let r = clt_experiment(a.j, a.n, a.reps, a.seed, exec)?;
            out.file("clt.csv", r.to_csv());
            out.json("clt.json", &r)?;
        }
        Command::Gamma(a) => {
            let generic = parse_sampler(&a.generic, a.j, a.seed)?;
            let g = gamma_experiment(a.j, &a.n_grid, a.reps, &generic, a.seed, exec)?;
            out.file("gamma.csv", g.to_csv());
            out.json("gamma.json", &g)?;
        }
        Command::HullLimit(a) => {
            let pts = hull_limit_experiment(a.j, &a.n_grid, a.seed)?;
            out.file("hull_limit.csv", HullLimitPoint::to_csv(&pts));
            out.json("hull_limit.json", &pts)?;
        }
        Command::Definetti(a) => {
            let b = definetti_bound(a.m, a.l)?;
            out.stdout = Some(format!("{}\n", b.beta));
            out.json("definetti.json", &b)?;
        }
        Command::Choquet(a) => {
            let p = ProbabilityVector::new(&a.p)?;
            let frame: SimplexFrame = match &a.frame {
                Some(path) => {
                    out.inputs.push(path.display().to_string());
                    make_frame(&parse_frame(path)?)?
                }
                None => SimplexFrame::standard(p.dim())?,
            };
            let w = choquet_measure(&p, &frame)?;
            let w2 = choquet_measure_nnls(&p, &frame)?;
            let back = reconstruct(&w, &frame)?;
            let disagreement = w
                .weights
                .as_slice()
                .iter()
                .zip(w2.weights.as_slice())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            let residual = back
                .as_slice()
                .iter()
                .zip(p.as_slice())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            let mut csv = String::from("vertex,weight\n");
            for (k, x) in w.weights.as_slice().iter().enumerate() {
                csv.push_str(&format!("{k},{}\n", fmt17(*x)));
            }
            out.file("choquet.csv", csv);
            out.json(
                "choquet.json",
                &serde_json::json!({
                    "weights": w.weights,
                    "nnls_weights": w2.weights,
                    "solver_disagreement": disagreement,
                    "reconstruction_error": residual,
                    "condition_number": frame.cond(),
                }),
            )?;
        }
        Command::Polya(a) => {
            let truth = ChoquetMeasure {
                weights: ProbabilityVector::new(&a.truth)?,
            };
            let emb = AtomEmbedding::new(a.truth.len())?;
            let params = build_params(a.alpha, a.depth.unwrap_or(emb.depth))?;
            let trace = convergence_trace(&truth, &a.k_grid, &params, &emb, a.seed)?;
            let rates = a
                .k_grid
                .iter()
                .map(|&k| minimax_rate(k, a.alpha))
                .collect::<Result<Vec<_>, _>>()?;
            out.file("polya.csv", TracePoint::to_csv(&trace));
            out.json(
                "polya.json",
                &serde_json::json!({
                    "params": params,
                    "embedding": emb,
                    "trace": trace,
                    "minimax_rate": rates,
                }),
            )?;
        }
        Command::FitAdmixture(a) => {
            let file = fs::File::open(&a.input)
                .map_err(|e| CliError::Config(format!("{}: {e}", a.input.display())))?;
            out.inputs.push(a.input.display().to_string());
            let x = load_docword(BufReader::new(file))?;
            let opts = PipelineOptions {
                pca_dim: a.pca_dim,
                max_rounds: a.max_rounds,
                extreme_tol: a.resolution,
                em: EmOptions {
                    max_iters: a.max_iters,
                    rel_tol: a.rel_tol,
                    restarts: a.restarts,
                    seed: a.seed,
                    exec,
                },
            };
            let report = two_stage(&x, a.l0, &opts)?;
            out.stdout = Some(format!(
                "M per round: {:?}; final M = {}\n",
                report.m_sequence(),
                report.final_m
            ));
            out.file("rounds.csv", report.rounds_csv());
            out.file("phi.csv", report.final_model.phi_csv());
            out.file("f.csv", report.final_model.f_csv());
            out.json("fit.json", &report)?;
        }
        Command::SynthCorpus(a) => {
            let cfg = SyntheticConfig {
                m_star: a.m_star,
                dim: a.j,
                n_docs: a.n_docs,
                doc_len: a.doc_len,
                separation: a.separation,
                mix_alpha: a.mix_alpha,
                seed: a.seed,
            };
            let c = synthetic_corpus(&cfg)?;
            out.file("corpus.docword", c.matrix.to_docword());
            let mut csv = (0..a.j).map(|t| format!("term_{t}")).collect::<Vec<_>>().join(",");
            csv.push('\n');
            for row in &c.f {
                csv.push_str(&row.iter().map(|v| fmt17(*v)).collect::<Vec<_>>().join(","));
                csv.push('\n');
            }
            out.file("truth_f.csv", csv);
            out.json(
                "truth.json",
                &serde_json::json!({ "config": c.config, "phi": c.phi, "f": c.f }),
            )?;
        }
        Command::Towers(a) => {
            let t = count_towers(a.j)?;
            let c = c_constant(a.j)?;
            out.stdout = Some(format!("{}\n", t.towers));
            out.json("towers.json", &serde_json::json!({ "J": t.j, "towers": t.towers, "c": c }))?;
        }
        Command::Replay(_) => unreachable!("replay is resolved before execution"),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_strings() {
        assert_eq!(parse_sampler("uniform", 3, 1).unwrap(), SamplerSpec::uniform(3, 1).unwrap());
        let d = parse_sampler("dirichlet:2", 3, 1).unwrap();
        assert_eq!(d, SamplerSpec::dirichlet(vec![2.0; 3], 1).unwrap());
        assert!(parse_sampler("dirichlet:1,2", 3, 1).is_err());
        assert!(parse_sampler("dirichlet:x", 3, 1).is_err());
        assert!(parse_sampler("normal", 3, 1).is_err());
    }

    #[test]
    fn frame_csv_header_is_optional() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        fs::write(&a, "x,y\n1,0\n\n0,1\n").unwrap();
        assert_eq!(parse_frame(&a).unwrap().len(), 2);
        let b = dir.path().join("b.csv");
        fs::write(&b, "1,0\n0,oops\n").unwrap();
        assert!(matches!(parse_frame(&b), Err(CliError::Config(m)) if m.ends_with("b.csv:2: invalid float literal")));
    }

    #[test]
    fn commands_serialize_with_their_name() {
        let c = Command::Definetti(DefinettiArgs { m: 5, l: 2 });
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v, serde_json::json!({"subcommand": "definetti", "m": 5, "L": 2}));
        let back: Command = serde_json::from_value(v).unwrap();
        assert_eq!(back.name(), "definetti");
        assert_eq!(back.seed(), None);
    }
}
