use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nearpm::generate::{generate, GeneratorKind, GeneratorSpec};
use nearpm::io::{graph_to_string, read_graph_file};
use nearpm::matching::census_maximal_matchings;
use nearpm::pipeline::{
    run_pipeline, run_pipeline_on_partition, tightness_partition, PipelineConfig, DEFAULT_MAX_K,
    SCHEMA_VERSION,
};
use nearpm::quasicount::{
    greedy_count_bipartite, lemma_a1_lower_bound, thm1_bounds, thm1q_bounds, PhasePlan,
};
use nearpm::quotient_lp::{
    classify_system, er_value, feasible_region, maximize_objective, thm12_bounds, QuotientSystem,
};
use nearpm::regularity::{build_quotient, certify_all_pairs, refine_partition, EquitablePartition};
use nearpm::{Error, Graph, VertexSet};

/// Bounds on the number of maximal near perfect matchings.
#[derive(Parser)]
#[command(name = "nearpm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and write it in the text graph format.
    Generate(GenerateArgs),
    /// Count maximal matchings by coverage (exact, small graphs).
    Census(CensusArgs),
    /// Run the phased greedy counter on a bipartite graph whose sides are
    /// the first and second half of the vertices.
    Greedy(GreedyArgs),
    /// Closed-form bounds for a bipartite pair or quasirandom graph.
    Bounds(BoundsArgs),
    /// Regular partition, quotient graph, linear system and weight polytope.
    Quotient(QuotientArgs),
    /// End-to-end lower bound for a dense graph.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    BipartiteRegular,
    Quasirandom,
    Generalized,
    TightnessCounterexample,
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator kind; ignored with --spec.
    #[arg(long, value_enum, required_unless_present = "spec")]
    kind: Option<Kind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Block count of the tightness construction.
    #[arg(long = "K")]
    parts: Option<usize>,
    /// Block density matrix, rows separated by `;`, entries by `,`.
    #[arg(long)]
    matrix: Option<String>,
    /// JSON generator spec with fields kind, params, seed.
    #[arg(long, conflicts_with = "kind")]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CensusArgs {
    graph: PathBuf,
    /// Also report NM(G, eps).
    #[arg(long)]
    eps: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GreedyArgs {
    graph: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    eps: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct QuotientArgs {
    graph: PathBuf,
    #[arg(long)]
    eps: f64,
    /// Use this many contiguous equal parts instead of refining.
    #[arg(long)]
    parts: Option<usize>,
    #[arg(long = "max-K", default_value_t = DEFAULT_MAX_K)]
    max_k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the weight polytope as an LP file.
    #[arg(long)]
    lp: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PipelineArgs {
    graph: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long = "max-K", default_value_t = DEFAULT_MAX_K)]
    max_k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep heuristic regular verdicts that lack a certificate.
    #[arg(long)]
    allow_uncertified: bool,
    /// Skip refinement: use K planted blocks with the tightness
    /// construction's declared verdicts.
    #[arg(long = "tightness-K")]
    tightness_parts: Option<usize>,
    /// Include stage timings (makes output run-dependent).
    #[arg(long)]
    timings: bool,
    #[command(flatten)]
    output: Output,
}

fn emit(output: &Output, text: &str) -> Result<(), Error> {
    match &output.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json(output: &Output, value: &Value) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(output, &text)
}

fn load(path: &Path) -> Result<Graph, Error> {
    read_graph_file(path).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>, Error> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim().parse::<f64>().map_err(|_| {
                        Error::InvalidArgument(format!(
                            "matrix entry `{}` is not a number",
                            x.trim()
                        ))
                    })
                })
                .collect()
        })
        .collect()
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, Error> {
    value.ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required for this kind")))
}

fn cmd_generate(a: GenerateArgs) -> Result<(), Error> {
    let spec = match (&a.spec, a.kind) {
        (Some(path), _) => serde_json::from_str::<GeneratorSpec>(&fs::read_to_string(path)?)?,
        (None, Some(kind)) => {
            let n = required(a.n, "n")?;
            let kind = match kind {
                Kind::BipartiteRegular => GeneratorKind::BipartiteRegular {
                    n,
                    p: required(a.p, "p")?,
                    eps: a.eps,
                },
                Kind::Quasirandom => GeneratorKind::Quasirandom {
                    n,
                    p: required(a.p, "p")?,
                    eps: a.eps,
                },
                Kind::Generalized => GeneratorKind::Generalized {
                    n,
                    matrix: parse_matrix(&required(a.matrix, "matrix")?)?,
                    eps: a.eps,
                },
                Kind::TightnessCounterexample => GeneratorKind::TightnessCounterexample {
                    n,
                    parts: required(a.parts, "K")?,
                    eps: None,
                },
            };
            GeneratorSpec::new(kind, a.seed)
        }
        (None, None) => unreachable!("clap requires --kind or --spec"),
    };
    let g = generate(&spec)?;
    let text = format!(
        "# {}\n{}",
        serde_json::to_string(&spec)?,
        graph_to_string(&g)
    );
    emit(&a.output, &text)
}

fn cmd_census(a: CensusArgs) -> Result<(), Error> {
    let g = load(&a.graph)?;
    let census = census_maximal_matchings(&g)?;
    let mut out = json!({
        "schema": SCHEMA_VERSION,
        "n": census.n,
        "by_coverage": census.by_coverage,
        "total": census.total(),
    });
    if let Some(eps) = a.eps {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::InvalidArgument(format!(
                "eps = {eps} is not in [0, 1)"
            )));
        }
        out["eps"] = json!(eps);
        out["nm_of_eps"] = json!(census.nm_of_eps(eps));
    }
    emit_json(&a.output, &out)
}

fn halves(g: &Graph) -> Result<(VertexSet, VertexSet), Error> {
    let n = g.n();
    if n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "{n} vertices cannot be split into two equal sides"
        )));
    }
    Ok((VertexSet::range(0..n / 2), VertexSet::range(n / 2..n)))
}

fn cmd_greedy(a: GreedyArgs) -> Result<(), Error> {
    let g = load(&a.graph)?;
    let (x, y) = halves(&g)?;
    let trace = greedy_count_bipartite(&g, &x, &y, a.p, a.eps, a.seed)?;
    let side = x.len();
    let (lower, upper) = thm1_bounds(side, a.p, a.eps)?;
    let out = json!({
        "schema": SCHEMA_VERSION,
        "lemma_a1": lemma_a1_lower_bound(side, a.p, a.eps)?,
        "thm1": {"lower": lower, "upper": upper},
        "trace": trace,
    });
    emit_json(&a.output, &out)
}

fn cmd_bounds(a: BoundsArgs) -> Result<(), Error> {
    let plan = PhasePlan::new(a.n, a.p, a.eps)?;
    let (lo, hi) = thm1_bounds(a.n, a.p, a.eps)?;
    let (qlo, qhi) = thm1q_bounds(a.n, a.p, a.eps)?;
    let out = json!({
        "schema": SCHEMA_VERSION,
        "plan": plan,
        "lemma_a1": lemma_a1_lower_bound(a.n, a.p, a.eps)?,
        "thm1": {"lower": lo, "upper": hi},
        "thm1q": {"lower": qlo, "upper": qhi},
    });
    emit_json(&a.output, &out)
}

fn cmd_quotient(a: QuotientArgs) -> Result<(), Error> {
    let g = load(&a.graph)?;
    if !(a.eps > 0.0 && a.eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps = {} is not in (0, 1)",
            a.eps
        )));
    }
    let (partition, reports, refinement) = match a.parts {
        Some(k) => {
            let partition = EquitablePartition::contiguous(g.n(), k, a.eps)?;
            let reports = certify_all_pairs(&g, &partition, a.eps)?;
            (partition, reports, Value::Null)
        }
        None => {
            let k0 = ((1.0 / a.eps - 1e-9).ceil() as usize)
                .min(g.n())
                .min(a.max_k);
            let r = refine_partition(&g, a.eps, k0, a.max_k.max(k0))?;
            let summary = json!({
                "index_trace": r.index_trace,
                "part_counts": r.part_counts,
                "irregular_pairs": r.irregular_count(),
                "regular_partition": r.is_regular_partition(),
                "cap_hit": r.cap_hit,
                "stalled": r.stalled,
            });
            (r.partition, r.reports, summary)
        }
    };
    let quotient = build_quotient(&g, &partition, &reports, a.eps)?;
    let system = QuotientSystem::from_quotient(&quotient);
    let part_size = g.n() / partition.k();
    let polytope = feasible_region(&quotient, a.eps)?;
    if let Some(path) = &a.lp {
        fs::write(path, polytope.to_lp_format())?;
    }
    let objective = if polytope.feasible {
        json!(maximize_objective(&polytope, a.seed)?)
    } else {
        Value::Null
    };
    // undefined once refinement reaches singleton parts
    let bounds = match part_size {
        0 | 1 => None,
        _ => Some(thm12_bounds(&system, part_size, a.eps)?),
    };
    let out = json!({
        "schema": SCHEMA_VERSION,
        "partition": partition.parts(),
        "refinement": refinement,
        "reports": reports,
        "quotient": quotient,
        "system": {
            "unknowns": system.h(),
            "solution": classify_system(&system),
            "er": er_value(&system),
            "bounds": bounds,
        },
        "polytope": {"feasible": polytope.feasible, "unknowns": polytope.h(), "rows": polytope.rows.len()},
        "objective": objective,
    });
    emit_json(&a.output, &out)
}

fn cmd_pipeline(a: PipelineArgs) -> Result<(), Error> {
    let g = load(&a.graph)?;
    let cfg = PipelineConfig {
        eps: a.eps,
        max_k: a.max_k,
        seed: a.seed,
        require_certified: !a.allow_uncertified,
        timings: a.timings,
    };
    let report = match a.tightness_parts {
        Some(k) => {
            cfg.validate()?;
            let (partition, reports) = tightness_partition(&g, k, cfg.inner_eps())?;
            run_pipeline_on_partition(&g, &cfg, &partition, reports)?
        }
        None => run_pipeline(&g, &cfg)?,
    };
    emit_json(&a.output, &serde_json::to_value(&report)?)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceLimit { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Census(a) => cmd_census(a),
        Command::Greedy(a) => cmd_greedy(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Quotient(a) => cmd_quotient(a),
        Command::Pipeline(a) => cmd_pipeline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nearpm: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
