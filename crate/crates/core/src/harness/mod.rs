//! Seeded Monte Carlo experiments, persistence and figure data.
//!
//! Trial `k` of a run samples its graph from seed `base_seed + k`. Trials
//! run in parallel but are collected in index order, and the JSON output
//! carries no timestamps or host details, so an identical configuration
//! reproduces identical bytes.

mod config;
mod figures;

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::{
    default_lambda_grid, failure_witness_stats, lambda_sweep, BlockProbabilities,
    CertificateReport, FailureStats,
};
use crate::error::{Error, Result};
use crate::graph::{best_swap, signed_degrees, Community, LabeledGraph, ModelParams};
use crate::sbm::{sample, trial_seed, SampleConfig};
use crate::sdp::{
    build_asym_sdp, build_sym_sdp, compare_with_truth, first_order_score, planted_asym,
    planted_sym, round_top_eigenvector, solve, MleWeights, SolverOptions, Status,
};
use crate::threshold::{
    event_scan, find_witness, genie_asym, genie_sym, lemma2_violations, EventReport, Rates,
};

pub use config::{parse_key_values, ConfigMap};
pub use config::parse_grid;
pub use figures::{emit_figure_data, read_polyline, FigureFile, FigureManifest, FigureSpec, FIG2_ALPHA2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SwapFailure,
    SdpGap,
    GenieError,
    CertificateSweep,
    EventFrequencies,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SwapFailure => "swap-failure",
            ExperimentKind::SdpGap => "sdp-gap",
            ExperimentKind::GenieError => "genie-error",
            ExperimentKind::CertificateSweep => "certificate-sweep",
            ExperimentKind::EventFrequencies => "event-frequencies",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "swap-failure" => ExperimentKind::SwapFailure,
            "sdp-gap" => ExperimentKind::SdpGap,
            "genie-error" => ExperimentKind::GenieError,
            "certificate-sweep" => ExperimentKind::CertificateSweep,
            "event-frequencies" => ExperimentKind::EventFrequencies,
            _ => return Err(Error::invalid(format!("unknown experiment kind '{s}'"))),
        })
    }
}

/// Which relaxation an SDP experiment solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relaxation {
    /// Diagonal one and `⟨J, Y⟩ = 0`; planted `σ*σ*ᵀ`.
    Sym,
    /// MLE weights; planted `x*x*ᵀ`.
    Asym,
}

impl FromStr for Relaxation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sym" => Ok(Relaxation::Sym),
            "asym" => Ok(Relaxation::Asym),
            _ => Err(Error::invalid(format!("relaxation must be sym or asym, got '{s}'"))),
        }
    }
}

/// Relative Frobenius distance under which an SDP solution counts as the
/// planted matrix.
pub const RECOVERY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub params: ModelParams,
    pub trials: usize,
    pub base_seed: u64,
    /// `None` uses [`SolverOptions::for_order`].
    pub solver: Option<SolverOptions>,
    pub relaxation: Relaxation,
    /// `(δ, ε)` for event scans; `None` takes the ⅓ and ⅔ points of the
    /// witness interval.
    pub events: Option<(f64, f64)>,
    /// `None` uses the default 41-point grid per graph.
    pub lambda_grid: Option<Vec<f64>>,
    pub certificate_tol: f64,
    /// Where [`ExperimentResult::write`] puts its files, if anywhere.
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, params: ModelParams, trials: usize, base_seed: u64) -> Self {
        Self {
            kind,
            params,
            trials,
            base_seed,
            solver: None,
            relaxation: Relaxation::Sym,
            events: None,
            lambda_grid: None,
            certificate_tol: 1e-6,
            output: None,
        }
    }

    pub fn seed(&self, index: usize) -> u64 {
        trial_seed(self.base_seed, index)
    }

    pub fn solver_options(&self) -> SolverOptions {
        self.solver.unwrap_or_else(|| SolverOptions::for_order(self.params.n))
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if !(self.certificate_tol > 0.0) {
            return Err(Error::invalid("certificate tolerance must be positive"));
        }
        Ok(())
    }
}

/// A frequency (with its success count) or a mean, with its standard error:
/// `√(p(1−p)/m)` for frequencies, `s/√m` for means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub count: usize,
    pub successes: Option<usize>,
    pub value: f64,
    pub std_err: f64,
}

impl Estimate {
    pub fn frequency(name: &str, flags: impl IntoIterator<Item = bool>) -> Self {
        let (mut k, mut m) = (0usize, 0usize);
        for f in flags {
            k += f as usize;
            m += 1;
        }
        let p = if m > 0 { k as f64 / m as f64 } else { f64::NAN };
        Self {
            name: name.to_string(),
            count: m,
            successes: Some(k),
            value: p,
            std_err: if m > 0 { (p * (1.0 - p) / m as f64).sqrt() } else { f64::NAN },
        }
    }

    pub fn mean(name: &str, values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let m = v.len();
        let mean = v.iter().sum::<f64>() / m as f64;
        let var = if m > 1 {
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64
        } else {
            0.0
        };
        Self {
            name: name.to_string(),
            count: m,
            successes: None,
            value: mean,
            std_err: if m > 0 { (var / m as f64).sqrt() } else { f64::NAN },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapTrial {
    pub best_delta: i64,
    pub best_pair: (usize, usize),
    pub improving_swap: bool,
    /// `max_{C2} s_j > min_{C1} s_i`, the form without the edge term.
    pub bracket_fails: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpTrial {
    pub status: Status,
    pub iterations: usize,
    pub objective: f64,
    pub planted_objective: f64,
    /// Fields below are `None` unless the solver converged.
    pub gap: Option<f64>,
    pub relative_distance: Option<f64>,
    pub recovered: Option<bool>,
    /// Symmetric relaxation only: best swap delta of `z` at the truth.
    pub best_swap_delta: Option<i64>,
    /// `10·tol_feas·‖A‖_F`, the allowance for solver inaccuracy in the gap.
    pub gap_slack: f64,
    /// `gap ≥ max(best_swap_delta, 0) − gap_slack`.
    pub gap_bound_holds: Option<bool>,
    /// `gap > gap_slack`.
    pub gap_positive: Option<bool>,
    /// `min_i Σ_ℓ A_iℓ σ̂_i σ̂_ℓ` at the rounded top eigenvector.
    pub first_order_score: Option<i64>,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenieTrial {
    /// Vertices the asymmetric genie estimator mislabels.
    pub asym_errors: usize,
    /// Same with the symmetric estimator `sign(d1 − d2)`.
    pub sym_errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateTrial {
    pub valid: bool,
    pub valid_lambdas: usize,
    pub grid_size: usize,
    pub best: CertificateReport,
    pub failure: FailureStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTrial {
    pub report: EventReport,
    /// Proxy misses at `(δ′, ε′)` a quarter of the way inside `(δ, ε)`.
    pub lemma2_violations: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TrialStats {
    Swap(SwapTrial),
    Sdp(SdpTrial),
    Genie(GenieTrial),
    Certificate(CertificateTrial),
    Events(EventTrial),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub stats: TrialStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// `(δ, ε)` actually used by event scans.
    pub events: Option<(f64, f64)>,
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<Estimate>,
    /// Trials left out of aggregates, e.g. solver non-convergence.
    pub excluded: usize,
}

impl ExperimentResult {
    pub fn estimate(&self, name: &str) -> Option<&Estimate> {
        self.aggregates.iter().find(|e| e.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Writes `<kind>.json` and `<kind>.manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Manifest> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let name = self.config.kind.name();
        let result_file = format!("{name}.json");
        write_file(&dir.join(&result_file), &self.to_json()?)?;
        let manifest = Manifest {
            tool: "sbmlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            experiment: name.into(),
            seed_rule: "trial k uses base_seed + k".into(),
            config: self.config.clone(),
            files: vec![result_file],
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        write_file(&dir.join(format!("{name}.manifest.json")), &text)?;
        Ok(manifest)
    }
}

/// Enough to rerun an experiment exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub seed_rule: String,
    pub config: ExperimentConfig,
    pub files: Vec<String>,
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn trials<T: Send>(
    cfg: &ExperimentConfig,
    f: impl Fn(&LabeledGraph) -> Result<T> + Sync,
) -> Result<Vec<(usize, u64, T)>> {
    cfg.validate()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let seed = cfg.seed(k);
            let g = sample(&SampleConfig::new(cfg.params, seed))?;
            Ok((k, seed, f(&g)?))
        })
        .collect()
}

fn finish(
    cfg: &ExperimentConfig,
    events: Option<(f64, f64)>,
    rows: Vec<(usize, u64, TrialStats)>,
    aggregates: Vec<Estimate>,
    excluded: usize,
) -> ExperimentResult {
    ExperimentResult {
        config: cfg.clone(),
        events,
        records: rows
            .into_iter()
            .map(|(index, seed, stats)| TrialRecord { index, seed, stats })
            .collect(),
        aggregates,
        excluded,
    }
}

pub fn swap_trial(g: &LabeledGraph) -> Result<SwapTrial> {
    let truth = g.truth();
    let best = best_swap(g, truth)?;
    let s = signed_degrees(g, truth)?;
    let min1 = truth.members(Community::One).iter().map(|&i| s[i]).min();
    let max2 = truth.members(Community::Two).iter().map(|&j| s[j]).max();
    Ok(SwapTrial {
        best_delta: best.delta,
        best_pair: (best.i, best.j),
        improving_swap: best.delta > 0,
        bracket_fails: matches!((min1, max2), (Some(a), Some(b)) if b > a),
    })
}

pub fn run_swap_failure(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let rows = trials(cfg, swap_trial)?;
    let t: Vec<&SwapTrial> = rows.iter().map(|r| &r.2).collect();
    let aggregates = vec![
        Estimate::frequency("improving_swap", t.iter().map(|r| r.improving_swap)),
        Estimate::frequency("bracket_fails", t.iter().map(|r| r.bracket_fails)),
        Estimate::mean("best_delta", t.iter().map(|r| r.best_delta as f64)),
    ];
    let rows = rows.into_iter().map(|(k, s, r)| (k, s, TrialStats::Swap(r))).collect();
    Ok(finish(cfg, None, rows, aggregates, 0))
}

pub fn sdp_trial(
    g: &LabeledGraph,
    params: &ModelParams,
    relaxation: Relaxation,
    opts: &SolverOptions,
) -> Result<SdpTrial> {
    let truth = g.truth();
    let (problem, target) = match relaxation {
        Relaxation::Sym => (build_sym_sdp(g), planted_sym(truth)),
        Relaxation::Asym => {
            let w = MleWeights::from_params(params)?;
            (build_asym_sdp(g, &w)?, planted_asym(truth, &w))
        }
    };
    let sol = solve(&problem, opts)?;
    let planted_objective = problem.objective.inner(&target);
    let gap_slack = 10.0 * opts.tol_feas * problem.objective.frobenius_norm();
    let best_swap_delta = match relaxation {
        Relaxation::Sym => Some(best_swap(g, truth)?.delta),
        Relaxation::Asym => None,
    };
    let mut t = SdpTrial {
        status: sol.status,
        iterations: sol.iterations,
        objective: sol.objective_value,
        planted_objective,
        gap: None,
        relative_distance: None,
        recovered: None,
        best_swap_delta,
        gap_slack,
        gap_bound_holds: None,
        gap_positive: None,
        first_order_score: None,
        min_eigenvalue: sol.residuals.min_eigenvalue,
    };
    if sol.status == Status::Converged {
        let c = compare_with_truth(&sol, &problem, &target)?;
        t.gap = Some(c.gap);
        t.relative_distance = Some(c.relative_distance);
        t.recovered = Some(c.relative_distance <= RECOVERY_TOL);
        t.gap_positive = Some(c.gap > gap_slack);
        t.gap_bound_holds = Some(c.gap >= best_swap_delta.unwrap_or(0).max(0) as f64 - gap_slack);
        let sigma = round_top_eigenvector(&sol.matrix);
        t.first_order_score = Some(first_order_score(g, &sigma)?);
    }
    Ok(t)
}

pub fn run_sdp_gap(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let opts = cfg.solver_options();
    let params = cfg.params;
    let rows = trials(cfg, |g| sdp_trial(g, &params, cfg.relaxation, &opts))?;
    let all: Vec<&SdpTrial> = rows.iter().map(|r| &r.2).collect();
    let conv: Vec<&SdpTrial> = all.iter().copied().filter(|t| t.status == Status::Converged).collect();
    let excluded = all.len() - conv.len();
    let aggregates = vec![
        Estimate::frequency("converged", all.iter().map(|t| t.status == Status::Converged)),
        Estimate::frequency("recovered", conv.iter().filter_map(|t| t.recovered)),
        Estimate::frequency("gap_positive", conv.iter().filter_map(|t| t.gap_positive)),
        Estimate::frequency("gap_bound_holds", conv.iter().filter_map(|t| t.gap_bound_holds)),
        Estimate::mean("gap", conv.iter().filter_map(|t| t.gap)),
        Estimate::mean("relative_distance", conv.iter().filter_map(|t| t.relative_distance)),
        Estimate::mean("iterations", all.iter().map(|t| t.iterations as f64)),
    ];
    let rows = rows.into_iter().map(|(k, s, r)| (k, s, TrialStats::Sdp(r))).collect();
    Ok(finish(cfg, None, rows, aggregates, excluded))
}

pub fn genie_trial(g: &LabeledGraph, params: &ModelParams) -> Result<GenieTrial> {
    let truth = g.truth();
    let ln = (g.n() as f64).ln();
    let (mut asym_errors, mut sym_errors) = (0, 0);
    for u in 0..g.n() {
        let (d1, d2) = g.side_degrees(u, truth);
        let s = truth.sign(u);
        asym_errors += (genie_asym(d1 as u64, d2 as u64, params)? != s) as usize;
        let d = crate::graph::DegreeProfile {
            d1: d1 as f64 / ln,
            d2: d2 as f64 / ln,
        };
        sym_errors += (genie_sym(&d) != s) as usize;
    }
    Ok(GenieTrial {
        asym_errors,
        sym_errors,
    })
}

pub fn run_genie_error(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let params = cfg.params;
    let rows = trials(cfg, |g| genie_trial(g, &params))?;
    let t: Vec<&GenieTrial> = rows.iter().map(|r| &r.2).collect();
    let aggregates = vec![
        Estimate::frequency("asym_any_error", t.iter().map(|r| r.asym_errors > 0)),
        Estimate::frequency("sym_any_error", t.iter().map(|r| r.sym_errors > 0)),
        Estimate::mean("asym_errors", t.iter().map(|r| r.asym_errors as f64)),
        Estimate::mean("sym_errors", t.iter().map(|r| r.sym_errors as f64)),
    ];
    let rows = rows.into_iter().map(|(k, s, r)| (k, s, TrialStats::Genie(r))).collect();
    Ok(finish(cfg, None, rows, aggregates, 0))
}

pub fn run_certificate_sweep(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let w = MleWeights::from_params(&cfg.params)?;
    let probs = BlockProbabilities::from(&cfg.params);
    let tol = cfg.certificate_tol;
    let rows = trials(cfg, |g| {
        let grid = match &cfg.lambda_grid {
            Some(grid) => grid.clone(),
            None => default_lambda_grid(g),
        };
        let sweep = lambda_sweep(g, &w, &probs, &grid, tol)?;
        Ok(CertificateTrial {
            valid: sweep.best.valid,
            valid_lambdas: sweep.reports.iter().filter(|r| r.valid).count(),
            grid_size: grid.len(),
            best: sweep.best,
            failure: failure_witness_stats(g, &w, &probs)?,
        })
    })?;
    let t: Vec<&CertificateTrial> = rows.iter().map(|r| &r.2).collect();
    let aggregates = vec![
        Estimate::frequency("valid", t.iter().map(|r| r.valid)),
        Estimate::mean("statistic", t.iter().map(|r| r.failure.statistic)),
        Estimate::mean("b_sum_term", t.iter().map(|r| r.failure.b_sum_term)),
        Estimate::mean("min_difference", t.iter().map(|r| r.failure.min_difference)),
        Estimate::mean("tau", t.iter().map(|r| r.failure.tau)),
        Estimate::mean("best_lambda2", t.iter().map(|r| r.best.lambda2)),
    ];
    let rows = rows.into_iter().map(|(k, s, r)| (k, s, TrialStats::Certificate(r))).collect();
    Ok(finish(cfg, None, rows, aggregates, 0))
}

/// `(δ, ε)` from the witness interval of the model rates.
pub fn auto_events(params: &ModelParams) -> Result<(f64, f64)> {
    let r = Rates::from_params(params)?;
    match find_witness(&r)? {
        Some(w) => Ok((w.delta, w.epsilon)),
        None => Err(Error::invalid(
            "no witness at these parameters; supply delta and epsilon",
        )),
    }
}

pub fn run_event_frequencies(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let (delta, epsilon) = match cfg.events {
        Some(de) => de,
        None => auto_events(&cfg.params)?,
    };
    let quarter = (epsilon - delta) / 4.0;
    let rows = trials(cfg, |g| {
        Ok(EventTrial {
            report: event_scan(g, delta, epsilon)?,
            lemma2_violations: lemma2_violations(
                g,
                (delta, delta + quarter),
                (epsilon, epsilon - quarter),
            )?,
        })
    })?;
    let t: Vec<&EventReport> = rows.iter().map(|r| &r.2.report).collect();
    let aggregates = vec![
        Estimate::frequency("l_holds", t.iter().map(|r| r.l_holds)),
        Estimate::frequency("any_f", t.iter().map(|r| r.any_f)),
        Estimate::frequency("any_g", t.iter().map(|r| r.any_g)),
        Estimate::frequency("any_f_and_any_g", t.iter().map(|r| r.any_f && r.any_g)),
        Estimate::frequency("any_fbar", t.iter().map(|r| r.any_fbar)),
        Estimate::frequency("any_gbar", t.iter().map(|r| r.any_gbar)),
        Estimate::frequency("improving_swap", t.iter().map(|r| r.improving_swap)),
        Estimate::frequency("separation_fails", t.iter().map(|r| r.separation_fails)),
        Estimate::mean("containment_violations", t.iter().map(|r| r.containment_violations as f64)),
        Estimate::mean(
            "lemma2_violations",
            rows.iter().map(|r| (r.2.lemma2_violations[0] + r.2.lemma2_violations[1]) as f64),
        ),
    ];
    let rows = rows.into_iter().map(|(k, s, r)| (k, s, TrialStats::Events(r))).collect();
    Ok(finish(cfg, Some((delta, epsilon)), rows, aggregates, 0))
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    match cfg.kind {
        ExperimentKind::SwapFailure => run_swap_failure(cfg),
        ExperimentKind::SdpGap => run_sdp_gap(cfg),
        ExperimentKind::GenieError => run_genie_error(cfg),
        ExperimentKind::CertificateSweep => run_certificate_sweep(cfg),
        ExperimentKind::EventFrequencies => run_event_frequencies(cfg),
    }
}
