use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use distspanner::gadget::{
    format_bits, gen_disjointness_gadget, gen_mvc_reduction, gen_weighted_gadget, parse_bits, verify_gadget_claims,
    verify_weighted_gadget, Group,
};
use distspanner::mds::{mds_check, mds_with};
use distspanner::oracle::{min_dominating_set_exact, min_spanner_exact, min_vertex_cover_exact, OracleBudget};
use distspanner::ptas::{check_ptas_run, parse_ratio, ptas_distributed, PtasParams};
use distspanner::sim::audit;
use distspanner::spanner::{certificate_check, two_spanner_with, SpannerConfig};
use distspanner::{format_graph, parse_graph, verify_spanner, Execution, Graph, SpannerMode, Variant, VertexId};

#[derive(Parser)]
#[command(name = "distspanner", version, about = "Distributed spanner and dominating set approximations on a round simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an algorithm on a graph file and emit stats.
    Run(RunArgs),
    /// Generate a hardness gadget.
    #[command(subcommand)]
    Gadget(GadgetCommand),
    /// Solve a small instance exactly.
    Oracle(OracleArgs),
    /// Report message and cut-bit counts of a run.
    Audit(AuditArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    #[value(name = "2spanner")]
    TwoSpanner,
    Mds,
    Ptas,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Auto,
    Unweighted,
    Weighted,
    Directed,
    ClientServer,
}

impl VariantArg {
    fn resolve(self, g: &Graph) -> Result<Variant> {
        let v = match self {
            VariantArg::Auto => return Ok(Variant::for_graph(g)),
            VariantArg::Unweighted => Variant::Unweighted,
            VariantArg::Weighted => Variant::Weighted,
            VariantArg::Directed => Variant::Directed,
            VariantArg::ClientServer => Variant::ClientServer,
        };
        v.check(g).map_err(|_| Usage(format!("variant {} does not match the graph", v.name())))?;
        Ok(v)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    variant: VariantArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stretch for the ptas algorithm.
    #[arg(long)]
    k: Option<usize>,
    /// Exact ε for the ptas algorithm, e.g. 0.5 or 1/3.
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    max_rounds: usize,
    /// Compare against the exact optimum.
    #[arg(long)]
    oracle: bool,
    /// Oracle time cap in seconds.
    #[arg(long)]
    oracle_secs: Option<u64>,
    /// Run the simulator without the thread pool.
    #[arg(long)]
    sequential: bool,
    /// Stats JSON path (stdout when absent).
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Write the output set, one id per line.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GadgetCommand {
    /// Set-disjointness graph G(l, b).
    Disjointness(DisjointnessArgs),
    /// Weighted gadget with 0-weight paths.
    Weighted(WeightedArgs),
    /// Vertex cover reduction graph.
    Mvc(MvcArgs),
}

#[derive(Args)]
struct GadgetOut {
    /// Graph file path (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Sidecar JSON path; defaults to the output path with `.json` appended.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Report JSON path.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct DisjointnessArgs {
    #[arg(long)]
    l: usize,
    /// Block size b.
    #[arg(long = "b")]
    beta: usize,
    /// Alice's string of l^2 bits.
    #[arg(long)]
    a: String,
    /// Bob's string of l^2 bits.
    #[arg(long = "b-str")]
    b_str: String,
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[command(flatten)]
    out: GadgetOut,
}

#[derive(Args)]
struct WeightedArgs {
    #[arg(long)]
    l: usize,
    #[arg(long)]
    k: usize,
    /// Build the undirected path-lengthened form.
    #[arg(long)]
    undirected: bool,
    #[arg(long)]
    a: String,
    #[arg(long = "b-str")]
    b_str: String,
    #[arg(long)]
    verify: bool,
    #[command(flatten)]
    out: GadgetOut,
}

#[derive(Args)]
struct MvcArgs {
    #[arg(long)]
    input: PathBuf,
    /// Vertex cover to map to a spanner, comma separated.
    #[arg(long, value_delimiter = ',')]
    cover: Option<Vec<VertexId>>,
    /// Check that both exact optima agree.
    #[arg(long)]
    verify: bool,
    #[command(flatten)]
    out: GadgetOut,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Spanner,
    VertexCover,
    DominatingSet,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    problem: Problem,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, value_enum, default_value = "auto")]
    variant: VariantArg,
    #[arg(long)]
    secs: Option<u64>,
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    variant: VariantArg,
    /// Gadget sidecar whose `side_b` names one side of the cut.
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Explicit cut side, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "partition")]
    side_b: Option<Vec<VertexId>>,
    #[arg(long, default_value_t = 100_000)]
    max_rounds: usize,
    #[arg(long)]
    stats: Option<PathBuf>,
}

/// Bad flag combinations, reported with exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Gadget(GadgetCommand::Disjointness(a)) => disjointness(a),
        Command::Gadget(GadgetCommand::Weighted(a)) => weighted(a),
        Command::Gadget(GadgetCommand::Mvc(a)) => mvc(a),
        Command::Oracle(a) => oracle(a),
        Command::Audit(a) => audit_cmd(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_graph(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(stats: &Value, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(stats)? + "\n";
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ratio(num: u64, den: u64) -> String {
    if den == 0 {
        return "undefined".to_string();
    }
    let g = gcd(num, den);
    format!("{}/{}", num / g, den / g)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

fn budget(secs: Option<u64>) -> OracleBudget {
    OracleBudget { time_cap: secs.map(Duration::from_secs), ..OracleBudget::default() }
}

fn write_ids(path: &Path, ids: impl Iterator<Item = usize>) -> Result<()> {
    let text: String = ids.map(|i| format!("{i}\n")).collect();
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(a: RunArgs) -> Result<bool> {
    let g = read_graph(&a.input)?;
    let is_ptas = matches!(a.algo, Algo::Ptas);
    if !is_ptas && (a.epsilon.is_some() || a.k.is_some()) {
        bail!(Usage("--epsilon and --k only apply to --algo ptas".into()));
    }
    let exec = if a.sequential { Execution::Sequential } else { Execution::Parallel };
    let mut stats = json!({ "schema": 1, "n": g.n(), "m": g.m(), "seed": a.seed });
    let ok = match a.algo {
        Algo::TwoSpanner => {
            let variant = a.variant.resolve(&g)?;
            let cfg = SpannerConfig { max_rounds: a.max_rounds, exec, ..SpannerConfig::new(variant, a.seed) };
            let res = two_spanner_with(&g, &cfg)?;
            let cert = certificate_check(&g, &res);
            let au = audit(&res.trace, &g, None)?;
            stats["algo"] = json!("2spanner");
            stats["variant"] = json!(variant.name());
            stats["spanner_size"] = json!(res.h.len());
            stats["spanner_cost"] = json!(cert.spanner_cost);
            stats["cert_sum"] = json!(cert.total_cost);
            stats["iterations"] = json!(res.iterations);
            stats["rounds"] = json!(res.trace.rounds + 1);
            stats["messages"] = json!(au.messages);
            stats["max_msg_bits"] = json!(au.max_message_bits);
            stats["total_bits"] = json!(au.total_bits);
            stats["stars_added"] = json!(cert.stars_added);
            stats["uncoverable"] = json!(res.uncoverable);
            stats["digest"] = json!(res.trace.digest);
            stats["violations"] = json!(cert.violations);
            if let Some(p) = &a.output {
                write_ids(p, res.h.iter())?;
            }
            if a.oracle {
                let (opt, _) = min_spanner_exact(&g, 2, variant, budget(a.oracle_secs))?;
                stats["optimum"] = json!(opt);
                stats["ratio"] = json!(ratio(cert.spanner_cost, opt));
            }
            cert.ok()
        }
        Algo::Mds => {
            if g.is_directed() || g.is_client_server() {
                bail!(Usage("dominating set needs an undirected plain graph".into()));
            }
            let res = mds_with(&g, a.seed, a.max_rounds, exec)?;
            let rep = mds_check(&g, &res);
            let au = audit(&res.trace, &g, None)?;
            let log = (g.n().max(2) as f64).log2().ceil() as u64;
            stats["algo"] = json!("mds");
            stats["dominating_size"] = json!(res.dominating.len());
            stats["cert_sum"] = json!(rep.total_cost);
            stats["iterations"] = json!(res.iterations);
            stats["rounds"] = json!(res.trace.rounds + 1);
            stats["messages"] = json!(au.messages);
            stats["max_msg_bits"] = json!(au.max_message_bits);
            stats["congest_bits"] = json!(16 * log);
            stats["digest"] = json!(res.trace.digest);
            stats["violations"] = json!(rep.violations);
            if let Some(p) = &a.output {
                write_ids(p, res.dominating.iter().copied())?;
            }
            if a.oracle {
                let (opt, _) = min_dominating_set_exact(&g, budget(a.oracle_secs))?;
                stats["optimum"] = json!(opt);
                stats["ratio"] = json!(ratio(res.dominating.len() as u64, opt as u64));
            }
            rep.ok() && au.max_message_bits <= 16 * log
        }
        Algo::Ptas => {
            let variant = a.variant.resolve(&g)?;
            let eps = parse_ratio(a.epsilon.as_deref().unwrap_or("1")).map_err(|e| Usage(e.to_string()))?;
            let mut params = PtasParams::new(a.k.unwrap_or(2), eps, variant);
            params.budget = budget(a.oracle_secs);
            let res = ptas_distributed(&g, &params, a.seed, exec)?;
            let rep = check_ptas_run(&g, &params, &res.run);
            stats["algo"] = json!("ptas");
            stats["variant"] = json!(variant.name());
            stats["k"] = json!(params.k);
            stats["epsilon"] = json!(ratio(eps.num, eps.den));
            stats["spanner_size"] = json!(res.run.h.len());
            stats["spanner_cost"] = json!(res.run.cost);
            stats["r"] = json!(res.decomposition.r);
            stats["colors"] = json!(res.decomposition.colors);
            stats["clusters"] = json!(res.decomposition.clusters);
            stats["rounds"] = json!(res.rounds);
            stats["violations"] = json!(rep.violations);
            if let Some(p) = &a.output {
                write_ids(p, res.run.h.iter())?;
            }
            let mut ok = rep.ok();
            if a.oracle {
                let (opt, _) = min_spanner_exact(&g, params.k, variant, budget(a.oracle_secs))?;
                stats["optimum"] = json!(opt);
                stats["ratio"] = json!(ratio(res.run.cost, opt));
                ok &= u128::from(res.run.cost) * u128::from(eps.den) <= u128::from(opt) * u128::from(eps.num + eps.den);
            }
            ok
        }
    };
    emit(&stats, a.stats.as_deref())?;
    Ok(ok)
}

/// Writes the graph and its sidecar, then the report. The report goes to
/// stdout only when the graph went to a file.
fn write_gadget(g: &Graph, sidecar: Value, report: Value, out: &GadgetOut) -> Result<()> {
    match &out.output {
        Some(p) => {
            fs::write(p, format_graph(g)).with_context(|| format!("writing {}", p.display()))?;
            let side = out.sidecar.clone().unwrap_or_else(|| PathBuf::from(format!("{}.json", p.display())));
            fs::write(&side, serde_json::to_string_pretty(&sidecar)? + "\n").with_context(|| format!("writing {}", side.display()))?;
            emit(&report, out.stats.as_deref())
        }
        None => {
            print!("{}", format_graph(g));
            if let Some(side) = &out.sidecar {
                fs::write(side, serde_json::to_string_pretty(&sidecar)? + "\n").with_context(|| format!("writing {}", side.display()))?;
            }
            if let Some(s) = &out.stats {
                emit(&report, Some(s))?;
            }
            Ok(())
        }
    }
}

fn side_ids(side: &[bool]) -> Vec<VertexId> {
    (0..side.len()).filter(|&v| side[v]).collect()
}

fn bits(s: &str) -> Result<Vec<bool>> {
    parse_bits(s).map_err(|e| Usage(e.to_string()).into())
}

fn disjointness(a: DisjointnessArgs) -> Result<bool> {
    let gadget = gen_disjointness_gadget(a.l, a.beta, &bits(&a.a)?, &bits(&a.b_str)?).map_err(|e| Usage(e.to_string()))?;
    let sidecar = json!({
        "schema": 1,
        "kind": "disjointness",
        "l": a.l,
        "b": a.beta,
        "a": format_bits(&gadget.a),
        "b_str": format_bits(&gadget.b),
        "c": gadget.c,
        "threshold": gadget.threshold,
        "groups": groups(&gadget.groups),
        "side_b": side_ids(&gadget.side_b),
        "d": gadget.d,
    });
    let mut report = json!({
        "schema": 1,
        "n": gadget.graph.n(),
        "m": gadget.graph.m(),
        "d_edges": gadget.d.len(),
        "cut_edges": gadget.cut_edges(),
    });
    let mut ok = true;
    if a.verify {
        let rep = verify_gadget_claims(&gadget, a.k).map_err(|e| Usage(e.to_string()))?;
        ok = rep.ok();
        report["claims"] = serde_json::to_value(&rep)?;
    }
    write_gadget(&gadget.graph, sidecar, report, &a.out)?;
    Ok(ok)
}

fn groups(gs: &[Group]) -> Value {
    json!(gs)
}

fn weighted(a: WeightedArgs) -> Result<bool> {
    let gadget =
        gen_weighted_gadget(a.l, a.k, !a.undirected, &bits(&a.a)?, &bits(&a.b_str)?).map_err(|e| Usage(e.to_string()))?;
    let sidecar = json!({
        "schema": 1,
        "kind": "weighted",
        "l": a.l,
        "k": a.k,
        "directed": gadget.directed,
        "a": format_bits(&gadget.a),
        "b_str": format_bits(&gadget.b),
        "groups": groups(&gadget.groups),
        "side_b": side_ids(&gadget.side_b),
        "d": gadget.d,
    });
    let mut report = json!({ "schema": 1, "n": gadget.graph.n(), "m": gadget.graph.m(), "d_edges": gadget.d.len() });
    let mut ok = true;
    if a.verify {
        let rep = verify_weighted_gadget(&gadget)?;
        ok = rep.ok();
        report["claims"] = serde_json::to_value(&rep)?;
    }
    write_gadget(&gadget.graph, sidecar, report, &a.out)?;
    Ok(ok)
}

fn mvc(a: MvcArgs) -> Result<bool> {
    let g = read_graph(&a.input)?;
    let red = gen_mvc_reduction(&g).map_err(|e| Usage(e.to_string()))?;
    let sidecar = json!({
        "schema": 1,
        "kind": "mvc",
        "source_n": g.n(),
        "vertex_edges": red.vertex_edge,
        "cross_edges": red.cross_edge,
    });
    let mut report = json!({ "schema": 1, "n": red.graph.n(), "m": red.graph.m() });
    let mut ok = true;
    if let Some(cover) = &a.cover {
        let h = red.cover_to_spanner(cover).map_err(|e| Usage(e.to_string()))?;
        let valid = verify_spanner(&red.graph, &h, 2, SpannerMode::Plain)?.valid;
        ok &= valid && red.cost(&h) == cover.len() as u64;
        report["cover_spanner"] = json!({ "cost": red.cost(&h), "valid": valid, "edges": h.to_vec() });
    }
    if a.verify {
        let (vc, _) = min_vertex_cover_exact(&g, OracleBudget::default())?;
        let (w, h) = min_spanner_exact(&red.graph, 2, Variant::Weighted, OracleBudget::default())?;
        let back = red.spanner_to_cover(&h)?;
        ok &= vc as u64 == w && back.len() as u64 <= w;
        report["min_vertex_cover"] = json!(vc);
        report["min_spanner_cost"] = json!(w);
        report["mapped_cover"] = json!(back);
    }
    write_gadget(&red.graph, sidecar, report, &a.out)?;
    Ok(ok)
}

fn oracle(a: OracleArgs) -> Result<bool> {
    let g = read_graph(&a.input)?;
    let b = budget(a.secs);
    let stats = match a.problem {
        Problem::Spanner => {
            let variant = a.variant.resolve(&g)?;
            let (opt, h) = min_spanner_exact(&g, a.k, variant, b)?;
            json!({ "schema": 1, "problem": "spanner", "k": a.k, "variant": variant.name(), "optimum": opt, "witness": h.to_vec() })
        }
        Problem::VertexCover => {
            let (opt, c) = min_vertex_cover_exact(&g, b)?;
            json!({ "schema": 1, "problem": "vertex-cover", "optimum": opt, "witness": c })
        }
        Problem::DominatingSet => {
            let (opt, d) = min_dominating_set_exact(&g, b)?;
            json!({ "schema": 1, "problem": "dominating-set", "optimum": opt, "witness": d })
        }
    };
    emit(&stats, a.stats.as_deref())?;
    Ok(true)
}

fn read_side(path: &Path, n: usize) -> Result<Vec<bool>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let ids = v["side_b"].as_array().with_context(|| format!("{} has no side_b list", path.display()))?;
    let mut side = vec![false; n];
    for id in ids {
        let i = id.as_u64().context("side_b entries must be vertex ids")? as usize;
        if i >= n {
            bail!(Usage(format!("side_b vertex {i} out of range")));
        }
        side[i] = true;
    }
    Ok(side)
}

fn audit_cmd(a: AuditArgs) -> Result<bool> {
    let g = read_graph(&a.input)?;
    let side = match (&a.partition, &a.side_b) {
        (Some(p), _) => Some(read_side(p, g.n())?),
        (None, Some(ids)) => {
            let mut side = vec![false; g.n()];
            for &i in ids {
                if i >= g.n() {
                    bail!(Usage(format!("side_b vertex {i} out of range")));
                }
                side[i] = true;
            }
            Some(side)
        }
        (None, None) => None,
    };
    let report = match a.algo {
        Algo::TwoSpanner => {
            let variant = a.variant.resolve(&g)?;
            let cfg = SpannerConfig { max_rounds: a.max_rounds, ..SpannerConfig::new(variant, a.seed) };
            let res = two_spanner_with(&g, &cfg)?;
            audit(&res.trace, &g, side.as_deref())?
        }
        Algo::Mds => {
            let res = mds_with(&g, a.seed, a.max_rounds, Execution::default())?;
            audit(&res.trace, &g, side.as_deref())?
        }
        Algo::Ptas => bail!(Usage("audit supports 2spanner and mds".into())),
    };
    let mut stats = serde_json::to_value(report)?;
    stats["schema"] = json!(1);
    stats["seed"] = json!(a.seed);
    emit(&stats, a.stats.as_deref())?;
    Ok(true)
}
