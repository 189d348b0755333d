use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sbmlab::certificate::{
    default_lambda_grid, failure_witness_stats, lambda_sweep, BlockProbabilities,
    CertificateReport, FailureStats,
};
use sbmlab::harness::{
    self, emit_figure_data, parse_grid, parse_key_values, ConfigMap, ExperimentConfig, FigureSpec,
};
use sbmlab::sdp::{
    build_asym_sdp, build_sym_sdp, compare_with_truth, planted_asym, planted_sym, solve,
    MleWeights, SolverOptions, Status,
};
use sbmlab::threshold::{
    boundary_alpha, cloud_boundary, event_scan, find_witness, it_value, witness_region, Rates,
    WitnessPair, CLOUD_LEVEL,
};
use sbmlab::{
    best_swap, sample, z_objective, Assignment, Community, Error, LabeledGraph, ModelParams,
    Result, SampleConfig,
};

/// Exact-recovery lab for the two-community asymmetric SBM.
#[derive(Parser)]
#[command(name = "sbmlab", version)]
struct Cli {
    /// Base seed; trial k of an experiment uses seed + k.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for outputs; relative --out paths resolve against it.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// `key = value` file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct RateArgs {
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a graph and write it in the text format.
    Sample {
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        rates: RateArgs,
        /// Shuffle labels instead of using the first half as community 1.
        #[arg(long)]
        shuffle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Threshold value, boundary and witness for one rate triple.
    Threshold {
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Boundary polyline of one cloud.
    Cloud {
        #[arg(long)]
        community: u8,
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long, default_value_t = 720)]
        points: usize,
        #[arg(long, default_value_t = CLOUD_LEVEL, allow_negative_numbers = true)]
        level: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify an (alpha1, alpha2) grid at fixed beta.
    WitnessRegion {
        #[arg(long)]
        beta: Option<f64>,
        /// `lo,hi`
        #[arg(long, default_value = "10,40")]
        a1_range: String,
        #[arg(long, default_value = "10,40")]
        a2_range: String,
        /// `k` or `k1,k2` grid points per axis.
        #[arg(long, default_value = "200")]
        resolution: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the symmetric or asymmetric relaxation on a graph file.
    SdpSolve {
        #[arg(long, default_value = "sym")]
        problem: String,
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Include the n×n solution matrix in the JSON.
        #[arg(long)]
        include_matrix: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best label swap at the planted partition.
    SwapTest {
        #[arg(long)]
        graph: PathBuf,
        /// Also recompute every swap from scratch (n ≤ 20).
        #[arg(long)]
        brute_force: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Degree events on a graph file.
    Events {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        epsilon: Option<f64>,
        /// Rates for choosing delta and epsilon from the witness.
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dual certificate sweep over lambda.
    Certificate {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        rates: RateArgs,
        /// `auto` or comma-separated values.
        #[arg(long, default_value = "auto", allow_hyphen_values = true)]
        lambda_grid: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV and manifest for figure 1, 2 or 3 into --out-dir.
    FigureData {
        #[arg(long)]
        fig: u8,
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        a1_range: Option<String>,
        #[arg(long)]
        a2_range: Option<String>,
        #[arg(long)]
        resolution: Option<String>,
    },
    /// Seeded Monte Carlo experiment; writes results and a manifest.
    Experiment {
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        relaxation: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        epsilon: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        lambda_grid: Option<String>,
    },
}

struct Ctx {
    seed: u64,
    out_dir: Option<PathBuf>,
    config: ConfigMap,
}

impl Ctx {
    fn opt<T: std::str::FromStr>(&self, cli: Option<T>, key: &str) -> Result<Option<T>> {
        match cli {
            Some(v) => Ok(Some(v)),
            None => self.config.get(key),
        }
    }

    fn req<T: std::str::FromStr>(&self, cli: Option<T>, key: &str) -> Result<T> {
        self.opt(cli, key)?
            .ok_or_else(|| Error::invalid(format!("--{key} is required")))
    }

    fn rates(&self, r: &RateArgs) -> Result<(f64, f64, f64)> {
        Ok((
            self.req(r.alpha1, "alpha1")?,
            self.req(r.alpha2, "alpha2")?,
            self.req(r.beta, "beta")?,
        ))
    }

    fn path(&self, p: &Path) -> PathBuf {
        match &self.out_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Write to `out` (under --out-dir) or stdout.
    fn emit(&self, out: &Option<PathBuf>, text: &str) -> Result<()> {
        match out {
            Some(p) => {
                let p = self.path(p);
                if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                }
                std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
            }
            None => {
                let mut o = std::io::stdout().lock();
                o.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
            }
        }
    }

    fn emit_json<T: Serialize>(&self, out: &Option<PathBuf>, v: &T) -> Result<()> {
        self.emit(out, &(serde_json::to_string_pretty(v)? + "\n"))
    }
}

fn read_graph(path: &Path) -> Result<LabeledGraph> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    LabeledGraph::read_text(BufReader::new(f))
}

fn pair(s: &str) -> Result<(f64, f64)> {
    let v: Vec<&str> = s.split(',').collect();
    match v.as_slice() {
        [a, b] => {
            let p = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad range '{s}'")))
            };
            Ok((p(a)?, p(b)?))
        }
        _ => Err(Error::invalid(format!("expected lo,hi, got '{s}'"))),
    }
}

fn resolution(s: &str) -> Result<(usize, usize)> {
    let p = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|_| Error::invalid(format!("bad resolution '{s}'")))
    };
    match s.split_once(',') {
        Some((a, b)) => Ok((p(a)?, p(b)?)),
        None => {
            let k = p(s)?;
            Ok((k, k))
        }
    }
}

#[derive(Serialize)]
struct ThresholdOut {
    alpha1: f64,
    alpha2: f64,
    beta: f64,
    it: f64,
    argmax_t: f64,
    feasible: bool,
    /// `α1` with `IT(α1, alpha2, beta) = 1`, if one exists.
    boundary_alpha1: Option<f64>,
    witness: Option<WitnessPair>,
}

#[derive(Serialize)]
struct SolveOut {
    problem: String,
    n: usize,
    status: Status,
    objective_value: f64,
    iterations: usize,
    evaluations: usize,
    rho: f64,
    residuals: sbmlab::sdp::Residuals,
    planted_objective: f64,
    gap: Option<f64>,
    relative_distance: Option<f64>,
    matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct SwapOut {
    n: usize,
    best_delta: i64,
    i: usize,
    j: usize,
    improving_swap: bool,
    brute_force_agrees: Option<bool>,
}

#[derive(Serialize)]
struct CertificateOut {
    alpha1: f64,
    alpha2: f64,
    beta: f64,
    tol: f64,
    best: CertificateReport,
    reports: Vec<CertificateReport>,
    failure: FailureStats,
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => parse_key_values(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
        None => ConfigMap::default(),
    };
    let seed = match cli.seed {
        Some(s) => s,
        None => config.get("seed")?.unwrap_or(0),
    };
    let out_dir = cli.out_dir.or(config.get::<String>("out-dir")?.map(PathBuf::from));
    let ctx = Ctx {
        seed,
        out_dir,
        config,
    };

    match cli.cmd {
        Cmd::Sample {
            n,
            rates,
            shuffle,
            out,
        } => {
            let (a1, a2, b) = ctx.rates(&rates)?;
            let params = ModelParams::new(ctx.req(n, "n")?, a1, a2, b)?;
            let cfg = SampleConfig {
                params,
                seed: ctx.seed,
                assignment: if shuffle {
                    Assignment::RandomPermutation
                } else {
                    Assignment::FirstHalf
                },
            };
            let g = sample(&cfg)?;
            let mut buf = Vec::new();
            g.write_text(&mut buf).map_err(|e| Error::io("<buffer>", e))?;
            ctx.emit(&out, &String::from_utf8(buf).expect("ascii"))
        }
        Cmd::Threshold { rates, out } => {
            let (a1, a2, b) = ctx.rates(&rates)?;
            let e = it_value(a1, a2, b)?;
            let r = Rates::new(a1, a2, b)?;
            ctx.emit_json(
                &out,
                &ThresholdOut {
                    alpha1: a1,
                    alpha2: a2,
                    beta: b,
                    it: e.value,
                    argmax_t: e.argmax_t,
                    feasible: e.value > 1.0,
                    boundary_alpha1: boundary_alpha(b, a2).ok(),
                    witness: if e.value > 1.0 { find_witness(&r)? } else { None },
                },
            )
        }
        Cmd::Cloud {
            community,
            rates,
            points,
            level,
            out,
        } => {
            let (a1, a2, b) = ctx.rates(&rates)?;
            let c = match community {
                1 => Community::One,
                2 => Community::Two,
                k => return Err(Error::invalid(format!("community must be 1 or 2, got {k}"))),
            };
            let pts = cloud_boundary(c, &Rates::new(a1, a2, b)?, level, points)?;
            let mut s = String::from("x,y,exponent\n");
            for p in pts {
                s += &format!("{},{},{}\n", p.x, p.y, p.exponent);
            }
            ctx.emit(&out, &s)
        }
        Cmd::WitnessRegion {
            beta,
            a1_range,
            a2_range,
            resolution: res,
            out,
        } => {
            let raster = witness_region(
                ctx.req(beta, "beta")?,
                pair(&a1_range)?,
                pair(&a2_range)?,
                resolution(&res)?,
            )?;
            let mut buf = Vec::new();
            raster.write_csv(&mut buf).map_err(|e| Error::io("<buffer>", e))?;
            ctx.emit(&out, &String::from_utf8(buf).expect("ascii"))
        }
        Cmd::SdpSolve {
            problem,
            graph,
            rates,
            tol,
            max_iter,
            include_matrix,
            out,
        } => {
            let g = read_graph(&graph)?;
            let n = g.n();
            let (p, target) = match problem.as_str() {
                "sym" => (build_sym_sdp(&g), planted_sym(g.truth())),
                "asym" => {
                    let (a1, a2, b) = ctx.rates(&rates)?;
                    let w = MleWeights::from_params(&ModelParams::new(n, a1, a2, b)?)?;
                    (build_asym_sdp(&g, &w)?, planted_asym(g.truth(), &w))
                }
                other => return Err(Error::invalid(format!("problem must be sym or asym, got '{other}'"))),
            };
            let mut opts = SolverOptions::for_order(n);
            if let Some(t) = ctx.opt(tol, "tol")? {
                opts.tol_feas = t;
            }
            if let Some(m) = ctx.opt(max_iter, "max-iter")? {
                opts.max_iter = m;
            }
            let sol = solve(&p, &opts)?;
            let cmp = compare_with_truth(&sol, &p, &target).ok();
            let report = SolveOut {
                problem,
                n,
                status: sol.status,
                objective_value: sol.objective_value,
                iterations: sol.iterations,
                evaluations: sol.evaluations,
                rho: sol.rho,
                residuals: sol.residuals,
                planted_objective: p.objective.inner(&target),
                gap: cmp.map(|c| c.gap),
                relative_distance: cmp.map(|c| c.relative_distance),
                matrix: include_matrix.then(|| (0..n).map(|i| sol.matrix.row(i).to_vec()).collect()),
            };
            ctx.emit_json(&out, &report)?;
            if sol.status != Status::Converged {
                return Err(Error::Status(format!(
                    "{:?} after {} iterations",
                    sol.status, sol.iterations
                )));
            }
            Ok(())
        }
        Cmd::SwapTest {
            graph,
            brute_force,
            out,
        } => {
            let g = read_graph(&graph)?;
            let truth = g.truth();
            let best = best_swap(&g, truth)?;
            let brute = if brute_force {
                if g.n() > 20 {
                    return Err(Error::invalid("brute force is limited to n <= 20"));
                }
                let z0 = z_objective(&g, truth)?;
                let mut exists = false;
                for &i in &truth.members(Community::One) {
                    for &j in &truth.members(Community::Two) {
                        exists |= z_objective(&g, &truth.swapped(i, j))? > z0;
                    }
                }
                Some(exists == (best.delta > 0))
            } else {
                None
            };
            ctx.emit_json(
                &out,
                &SwapOut {
                    n: g.n(),
                    best_delta: best.delta,
                    i: best.i,
                    j: best.j,
                    improving_swap: best.delta > 0,
                    brute_force_agrees: brute,
                },
            )
        }
        Cmd::Events {
            graph,
            delta,
            epsilon,
            rates,
            out,
        } => {
            let g = read_graph(&graph)?;
            let (d, e) = match (ctx.opt(delta, "delta")?, ctx.opt(epsilon, "epsilon")?) {
                (Some(d), Some(e)) => (d, e),
                (None, None) => {
                    let (a1, a2, b) = ctx.rates(&rates)?;
                    harness::auto_events(&ModelParams::new(g.n(), a1, a2, b)?)?
                }
                _ => return Err(Error::invalid("--delta and --epsilon go together")),
            };
            ctx.emit_json(&out, &event_scan(&g, d, e)?)
        }
        Cmd::Certificate {
            graph,
            rates,
            lambda_grid,
            tol,
            out,
        } => {
            let g = read_graph(&graph)?;
            let (a1, a2, b) = ctx.rates(&rates)?;
            let params = ModelParams::new(g.n(), a1, a2, b)?;
            let w = MleWeights::from_params(&params)?;
            let probs = BlockProbabilities::from(&params);
            let grid = parse_grid(&lambda_grid)?.unwrap_or_else(|| default_lambda_grid(&g));
            let sweep = lambda_sweep(&g, &w, &probs, &grid, tol)?;
            ctx.emit_json(
                &out,
                &CertificateOut {
                    alpha1: a1,
                    alpha2: a2,
                    beta: b,
                    tol,
                    best: sweep.best,
                    reports: sweep.reports,
                    failure: failure_witness_stats(&g, &w, &probs)?,
                },
            )
        }
        Cmd::FigureData {
            fig,
            rates,
            points,
            a1_range,
            a2_range,
            resolution: res,
        } => {
            let mut spec = FigureSpec::default();
            if let Some(b) = ctx.opt(rates.beta, "beta")? {
                spec.beta = b;
            }
            spec.alpha1 = ctx.opt(rates.alpha1, "alpha1")?;
            spec.alpha2 = ctx.opt(rates.alpha2, "alpha2")?;
            if let Some(p) = ctx.opt(points, "points")? {
                spec.points = p;
            }
            if let Some(r) = ctx.opt(a1_range, "a1-range")? {
                spec.a1_range = pair(&r)?;
            }
            if let Some(r) = ctx.opt(a2_range, "a2-range")? {
                spec.a2_range = pair(&r)?;
            }
            if let Some(r) = ctx.opt(res, "resolution")? {
                spec.resolution = resolution(&r)?;
            }
            let m = emit_figure_data(fig, &spec, &ctx.out_dir())?;
            ctx.emit_json(&None, &m)
        }
        Cmd::Experiment {
            kind,
            n,
            rates,
            trials,
            relaxation,
            delta,
            epsilon,
            tol,
            max_iter,
            lambda_grid,
        } => {
            let mut m = ctx.config.clone();
            m.set("seed", ctx.seed.to_string());
            let flags: [(&str, Option<String>); 12] = [
                ("kind", kind),
                ("n", n.map(|v| v.to_string())),
                ("alpha1", rates.alpha1.map(|v| v.to_string())),
                ("alpha2", rates.alpha2.map(|v| v.to_string())),
                ("beta", rates.beta.map(|v| v.to_string())),
                ("trials", trials.map(|v| v.to_string())),
                ("relaxation", relaxation),
                ("delta", delta.map(|v| v.to_string())),
                ("epsilon", epsilon.map(|v| v.to_string())),
                ("tol", tol.map(|v| v.to_string())),
                ("max-iter", max_iter.map(|v| v.to_string())),
                ("lambda-grid", lambda_grid),
            ];
            for (k, v) in flags {
                if let Some(v) = v {
                    m.set(k, v);
                }
            }
            let dir = ctx.out_dir();
            m.set("out-dir", dir.display().to_string());
            let cfg = ExperimentConfig::from_map(&m)?;
            let result = harness::run(&cfg)?;
            result.write(&dir)?;
            ctx.emit_json(&None, &result.aggregates)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
