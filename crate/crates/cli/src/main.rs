use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use l1lab::decomp::{snowflake_embed, DecompositionScheme, SnowflakeParams};
use l1lab::graph::{
    diamond, hypercube_metric, l1_realize, laakso, path_graph, random_pointset, shortest_path_metric, walsh_pointset,
    Distribution, WeightedGraph,
};
use l1lab::lower::{
    certify_laakso_embedding, heuristic_best_linear, hypercube_concentration_check, walsh_linear_distortion, LinearMap,
    SearchParams,
};
use l1lab::metric::{distortion_report, doubling_constant, metric_from_points, CoverMode, FiniteMetricSpace, PointSet};
use l1lab::seed::derive_seed;
use l1lab::stable::{apply, calibrate_c, embed_theorem1, sample_operator, Theorem1Params};
use l1lab_cli::experiment::{self, ExperimentConfig, ExperimentSpec};
use l1lab_cli::output::{render, render_experiment, Format};
use serde_json::json;

#[derive(Parser)]
#[command(name = "l1lab", version, about = "Embedding experiments for finite metric spaces")]
struct Cli {
    /// Master seed; every random choice derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

struct Ctx {
    seed: u64,
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance.
    #[command(subcommand)]
    Gen(Gen),
    /// Embed points or a metric into l_2.
    #[command(subcommand)]
    Embed(Embed),
    /// Evaluate metrics and maps.
    #[command(subcommand)]
    Eval(Eval),
    /// Check a lower-bound certificate.
    #[command(subcommand)]
    Certify(Certify),
    /// Run an experiment from a config file or with defaults.
    Experiment(ExperimentArgs),
}

#[derive(Subcommand)]
enum Gen {
    /// Laakso graph G_level.
    Laakso(GraphArgs),
    /// Diamond graph D_level.
    Diamond(GraphArgs),
    /// Unit path.
    Path {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        metric: bool,
    },
    /// Hamming cube metric.
    Cube {
        #[arg(long)]
        k: u32,
    },
    /// Walsh point set (CSV).
    Walsh {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Random point set (CSV).
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, value_enum, default_value_t = DistArg::Gaussian)]
        distribution: DistArg,
    },
    /// l_1 point set realizing a Laakso or diamond graph (CSV).
    L1 {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        level: u32,
        #[arg(long, default_value_t = 2.0)]
        max_distortion: f64,
    },
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    level: u32,
    /// Emit the shortest-path metric instead of the graph.
    #[arg(long)]
    metric: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Gaussian,
    UnitCube,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Laakso,
    Diamond,
}

#[derive(Subcommand)]
enum Embed {
    /// Random stable operator; for p = 1 resamples until every pair ratio is at least 1/sqrt(8 ln n).
    Stable {
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long = "J", default_value_t = l1lab::stable::DEFAULT_J)]
        j: usize,
        /// Calibration constant; calibrated when absent.
        #[arg(long = "C")]
        c: Option<f64>,
        #[arg(long, default_value_t = 20_000)]
        calibration_samples: usize,
        #[arg(long, default_value_t = 100)]
        max_tries: usize,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Multi-scale snowflake embedding of a metric.
    Snowflake {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 16)]
        partitions: usize,
        #[arg(long, default_value_t = 64)]
        signs: usize,
        #[arg(long)]
        singleton: bool,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Eval {
    /// Distortion of a map given as source and image (metric JSON or point CSV, matched by index).
    Distortion {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        img: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
    },
    /// Doubling constant of a metric.
    Doubling {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Greedy)]
        mode: ModeArg,
    },
    /// List metric violations.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Greedy,
}

#[derive(Subcommand)]
enum Certify {
    /// Laakso inductive bound on an image of G_level (CSV points indexed by vertex).
    Laakso {
        #[arg(long)]
        level: u32,
        /// Norm used on the image; defaults to the file's exponent.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Linear distortion bound on the Walsh set, for a given map or by search.
    Walsh {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        search: bool,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 1500)]
        iterations: usize,
    },
    /// Hypercube concentration of a coordinate (one value per line, vertex order).
    Cube {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        coords: PathBuf,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment name (thm1, walsh, laakso, snowflake, cube) run with defaults.
    name: Option<String>,
    /// JSON config; its seed overrides --seed.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_points(path: &Path) -> anyhow::Result<PointSet> {
    Ok(PointSet::from_csv(&read(path)?)?)
}

fn load_metric(path: &Path) -> anyhow::Result<FiniteMetricSpace> {
    Ok(serde_json::from_str(&read(path)?)?)
}

/// Metric JSON when the file ends in `.json`, point CSV otherwise.
fn load_any_metric(path: &Path) -> anyhow::Result<FiniteMetricSpace> {
    if path.extension().is_some_and(|e| e == "json") {
        load_metric(path)
    } else {
        Ok(load_points(path)?.distance_matrix()?)
    }
}

fn graph_output(g: WeightedGraph, metric: bool, format: Format) -> anyhow::Result<String> {
    if metric {
        render(&shortest_path_metric(&g)?, format)
    } else {
        render(&g, format)
    }
}

struct Outcome {
    text: String,
    passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, passed: true }
    }
}

fn run_gen(g: Gen, cli: &Ctx) -> anyhow::Result<Outcome> {
    let f = cli.format;
    let text = match g {
        Gen::Laakso(a) => graph_output(laakso(a.level)?, a.metric, f)?,
        Gen::Diamond(a) => graph_output(diamond(a.level)?, a.metric, f)?,
        Gen::Path { n, metric } => graph_output(path_graph(n)?, metric, f)?,
        Gen::Cube { k } => render(&hypercube_metric(k)?, f)?,
        Gen::Walsh { k, p } => walsh_pointset(k, p)?.to_csv(),
        Gen::Random { n, d, p, distribution } => {
            let dist = match distribution {
                DistArg::Gaussian => Distribution::Gaussian,
                DistArg::UnitCube => Distribution::UnitCube,
            };
            random_pointset(n, d, p, dist, cli.seed)?.to_csv()
        }
        Gen::L1 { family, level, max_distortion } => {
            let g = match family {
                Family::Laakso => laakso(level)?,
                Family::Diamond => diamond(level)?,
            };
            l1_realize(&g, max_distortion)?.0.to_csv()
        }
    };
    Ok(Outcome::ok(text))
}

fn run_embed(e: Embed, cli: &Ctx) -> anyhow::Result<Outcome> {
    let (image, report) = match e {
        Embed::Stable { p, j, c, calibration_samples, max_tries, q, input, report } => {
            let ps = load_points(&input)?;
            if ps.p() != p {
                bail!("input file has p = {} but --p {p} was given", ps.p());
            }
            let (c, calibration) = match c {
                Some(c) => (c, None),
                None => {
                    let cal = calibrate_c(p, j, calibration_samples, derive_seed(cli.seed, 0))?;
                    (cal.c, Some(cal))
                }
            };
            let op_seed = derive_seed(cli.seed, 1);
            let (image, summary) = if p == 1.0 {
                let params = Theorem1Params { j, c, max_tries, q, seed: op_seed };
                let t = embed_theorem1(&ps, &params)?;
                let summary = json!({
                    "calibration": calibration, "C": c, "report": t.report,
                    "tries_used": t.tries_used, "threshold": t.threshold,
                });
                (t.image, summary)
            } else {
                let op = sample_operator(p, ps.dim(), j, c, op_seed)?;
                let image = apply(&op, &ps)?;
                let rep = distortion_report(&metric_from_points(&ps)?, &image.distance_matrix()?, q)?;
                (image, json!({ "calibration": calibration, "C": c, "report": rep }))
            };
            (image, report.map(|r| (r, summary)))
        }
        Embed::Snowflake { eps, partitions, signs, singleton, input, report } => {
            let m = load_metric(&input)?;
            let scheme =
                if singleton { DecompositionScheme::SingletonFallback } else { DecompositionScheme::CkrGeneral };
            let params = SnowflakeParams { partitions, signs, scheme, ..Default::default() };
            let s = snowflake_embed(&m, eps, &params, cli.seed)?;
            let summary = json!({
                "eps": eps, "n_min": s.embedding.n_min, "n_max": s.embedding.n_max,
                "report": s.report, "diagnostics": s.diagnostics,
            });
            (s.embedding.image, report.map(|r| (r, summary)))
        }
    };
    if let Some((path, summary)) = report {
        write(&path, &render(&summary, cli.format)?)?;
    }
    Ok(Outcome::ok(image.to_csv()))
}

fn run_eval(e: Eval, cli: &Ctx) -> anyhow::Result<Outcome> {
    let text = match e {
        Eval::Distortion { src, img, q } => {
            render(&distortion_report(&load_any_metric(&src)?, &load_any_metric(&img)?, q)?, cli.format)?
        }
        Eval::Doubling { input, mode } => {
            let m = load_metric(&input)?;
            let (name, mode) = match mode {
                ModeArg::Exact => ("exact", CoverMode::Exact),
                ModeArg::Greedy => ("greedy", CoverMode::Greedy),
            };
            render(&json!({ "mode": name, "points": m.len(), "doubling": doubling_constant(&m, mode)? }), cli.format)?
        }
        Eval::Validate { input } => {
            let v = load_metric(&input)?.violations();
            let passed = v.is_empty();
            return Ok(Outcome { text: render(&json!({ "valid": passed, "violations": v }), cli.format)?, passed });
        }
    };
    Ok(Outcome::ok(text))
}

fn run_certify(c: Certify, cli: &Ctx) -> anyhow::Result<Outcome> {
    let (text, passed) = match c {
        Certify::Laakso { level, p, input } => {
            let mut img = load_points(&input)?;
            if let Some(p) = p {
                img = img.with_exponent(p)?;
            }
            let cert = certify_laakso_embedding(level, &img)?;
            (render(&cert, cli.format)?, cert.passed)
        }
        Certify::Walsh { k, p, map, search, restarts, iterations } => {
            let a = walsh_pointset(k, p)?;
            let t = match (map, search) {
                (Some(path), false) => serde_json::from_str::<LinearMap>(&read(&path)?)?,
                (None, true) => {
                    if k > experiment::MAX_SEARCH_ORDER {
                        bail!("search mode needs k <= {}", experiment::MAX_SEARCH_ORDER);
                    }
                    let params = SearchParams { restarts, iterations, ..SearchParams::new(cli.seed) };
                    heuristic_best_linear(&a, p, &params)?.0
                }
                _ => bail!("give exactly one of --map and --search"),
            };
            let e = walsh_linear_distortion(&t, &a, p)?;
            let passed = e.report.distortion >= e.bound - 1e-6 && e.residual < 1e-12;
            (render(&json!({ "evaluation": e, "passed": passed }), cli.format)?, passed)
        }
        Certify::Cube { k, alpha, coords } => {
            let values = read(&coords)?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(|l| l.parse::<f64>().with_context(|| format!("bad value '{l}'")))
                .collect::<anyhow::Result<Vec<f64>>>()?;
            if values.len() != 1usize << k {
                bail!("expected 2^{k} values, got {}", values.len());
            }
            let cert = hypercube_concentration_check(&values, alpha)?;
            (render(&cert, cli.format)?, cert.passed)
        }
    };
    Ok(Outcome { text, passed })
}

fn run_experiment(a: ExperimentArgs, cli: &Ctx) -> anyhow::Result<Outcome> {
    let config = match (a.config, a.name) {
        (Some(path), None) => serde_json::from_str::<ExperimentConfig>(&read(&path)?)?,
        (None, Some(name)) => ExperimentConfig {
            spec: ExperimentSpec::default_for(&name).with_context(|| format!("unknown experiment '{name}'"))?,
            seed: cli.seed,
        },
        _ => bail!("give either an experiment name or --config"),
    };
    let result = experiment::run(&config)?;
    Ok(Outcome { text: render_experiment(&result, cli.format)?, passed: result.passed })
}

fn main() -> ExitCode {
    let Cli { seed, out, format, command } = Cli::parse();
    let cli = Ctx { seed, format };
    let outcome = match command {
        Command::Gen(g) => run_gen(g, &cli),
        Command::Embed(e) => run_embed(e, &cli),
        Command::Eval(e) => run_eval(e, &cli),
        Command::Certify(c) => run_certify(c, &cli),
        Command::Experiment(a) => run_experiment(a, &cli),
    };
    let outcome = match outcome.and_then(|o| {
        match &out {
            Some(path) => write(path, &o.text)?,
            None => print!("{}", o.text),
        }
        Ok(o)
    }) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
