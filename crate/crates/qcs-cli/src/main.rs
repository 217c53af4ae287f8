//! `qcs`: graph ingestion, solver dispatch, JSON emission.
//!
//! Every subcommand prints one JSON document on stdout. Exit codes: 0 on
//! success, 1 on validation/usage errors, 2 on capacity errors. All
//! randomized paths are seeded (`--seed`, default 0); identical invocations
//! with identical seeds produce byte-identical output. Floats are printed
//! with 15 significant digits.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use qcs::bounds::{self, MultiStartOptions};
use qcs::digraph::{self, GraphFormat, ParsedGraph};
use qcs::error::QcsError;
use qcs::funceq;
use qcs::gp::{self, SolveOptions};
use qcs::maxsum::{self, MaxSumAttainment};
use qcs::minsum::{self, MinSumOptions};
use qcs::report::OptReport;
use qcs::sums::PowerOrder;

#[derive(Parser)]
#[command(
    name = "qcs",
    about = "Evaluate and minimize cyclic and graph-structured quotient sums",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every randomized path.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker-thread cap for multi-start solvers.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Length of the shortest directed cycle ("acyclic" when none).
    Girth(GraphArgs),
    /// Strongly connected components, condensation edges, final components.
    Components(GraphArgs),
    /// Exact global minimum of the graphic min-sum, with certificate.
    Minsum(MinsumArgs),
    /// Infimum of the graphic max-sum plus an epsilon-witness.
    Maxsum(MaxsumArgs),
    /// Minimize a weighted quotient sum (convex in log coordinates).
    Gp(GpArgs),
    /// Minimize the cyclic sum S(n,k,p); p accepts -inf, 0, inf.
    Shapiro(ShapiroArgs),
    /// Seeded random verification of the sharp three-fraction bound.
    Mavlo(MavloArgs),
    /// Functional-equation table and related minimizations.
    #[command(subcommand)]
    Funceq(FunceqCommand),
    /// Extremal min-sum value over strongly connected graphs on n vertices.
    Extremal(ExtremalArgs),
    /// Positivity gap of the one-dimensional girth-bound function at r.
    Ks(KsArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Graph file: edge-list text ("FROM TO [WEIGHT]") or JSON.
    #[arg(short, long)]
    input: PathBuf,
    /// Input format; by default inferred from the leading character.
    #[arg(long, value_parser = ["auto", "edge-list", "json"], default_value = "auto")]
    format: String,
}

#[derive(Args)]
struct MinsumArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Also run the multi-start numeric oracle with this many restarts.
    #[arg(long, default_value_t = 0)]
    oracle_restarts: usize,
}

#[derive(Args)]
struct MaxsumArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Accuracy of the constructed witness.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
}

#[derive(Args)]
struct GpArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Pin one vertex, e.g. --pin "0=1.0" (inhomogeneous problems).
    #[arg(long)]
    pin: Option<String>,
    /// Repeat the solve from this many random starts and report the
    /// normalized-minimizer discrepancy.
    #[arg(long, default_value_t = 0)]
    uniqueness_trials: usize,
}

#[derive(Args)]
struct ShapiroArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Power order of the denominator mean: a float, -inf, 0 or inf.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    p: String,
    /// Random starts for the finite-p numeric path.
    #[arg(long, default_value_t = 64)]
    starts: usize,
}

#[derive(Args)]
struct MavloArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
}

#[derive(Subcommand)]
enum FunceqCommand {
    /// Tabulated functional-equation value F(x).
    #[command(name = "F")]
    Table(FunceqTableArgs),
    /// AM-GM curve f(x) = min_n n x^(1/n).
    #[command(name = "f")]
    Amgm(FunceqAmgmArgs),
    /// Chain-with-hub minimum and the constant C_n = 3n - min.
    Shallit(FunceqShallitArgs),
    /// Uniform variable-window bound A(n) = F(n).
    Anstar(FunceqAnstarArgs),
}

#[derive(Args)]
struct FunceqTableArgs {
    #[arg(long)]
    x: f64,
    /// Tabulation range (defaults to cover x).
    #[arg(long)]
    x_max: Option<f64>,
    /// Refinement-stability target stored with the table.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Write the whole table as CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct FunceqAmgmArgs {
    #[arg(long)]
    x: f64,
}

#[derive(Args)]
struct FunceqShallitArgs {
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct FunceqAnstarArgs {
    #[arg(long)]
    n: usize,
    /// Cross-check by brute force over all window vectors (n <= 5).
    #[arg(long, default_value_t = false)]
    brute: bool,
}

#[derive(Args)]
struct ExtremalArgs {
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct KsArgs {
    #[arg(long)]
    r: f64,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(1);
        }
    };
    match run(cli) {
        Ok(value) => {
            print_json(&value);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

/// 15-significant-digit float formatting for deterministic output.
struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.14e}")
    }
}

fn print_json(value: &Value) {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits);
    value
        .serialize(&mut ser)
        .expect("JSON serialization cannot fail");
    out.push(b'\n');
    std::io::stdout()
        .write_all(&out)
        .expect("stdout write failed");
}

fn load_graph(args: &GraphArgs) -> Result<ParsedGraph, QcsError> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| QcsError::Validation(format!("cannot read {}: {e}", args.input.display())))?;
    let format = match args.format.as_str() {
        "edge-list" => GraphFormat::EdgeList,
        "json" => GraphFormat::Json,
        _ => {
            if text.trim_start().starts_with('{') {
                GraphFormat::Json
            } else {
                GraphFormat::EdgeList
            }
        }
    };
    digraph::parse_graph(&text, format)
}

fn minimizer_map(ids: &[String], values: &[f64]) -> BTreeMap<String, f64> {
    ids.iter().cloned().zip(values.iter().copied()).collect()
}

fn report_value(report: &OptReport, ids: &[String]) -> Value {
    json!({
        "value": report.value,
        "attained": report.attained,
        "status": report.status,
        "upper_bound_only": report.upper_bound_only,
        "minimizer": minimizer_map(ids, &report.minimizer),
        "certificate": report.certificate,
        "iterations": report.iterations,
        "gradient_norm": report.gradient_norm,
    })
}

fn run(cli: Cli) -> Result<Value, QcsError> {
    let solve_opts = SolveOptions {
        threads: cli.threads.max(1),
        ..Default::default()
    };
    match cli.command {
        Command::Girth(args) => {
            let parsed = load_graph(&args)?;
            let g = parsed.digraph();
            let value = match digraph::girth(g) {
                Some(len) => json!(len),
                None => json!("acyclic"),
            };
            let cycle = digraph::shortest_cycle(g)
                .map(|c| c.iter().map(|&v| g.id(v).to_string()).collect::<Vec<_>>());
            Ok(json!({
                "command": "girth",
                "input": args.input.display().to_string(),
                "value": value,
                "cycle": cycle,
                "citations": ["girth = length of the shortest directed cycle"],
            }))
        }
        Command::Components(args) => {
            let parsed = load_graph(&args)?;
            let g = parsed.digraph();
            let d = digraph::scc(g);
            let comps: Vec<Vec<String>> = d
                .components
                .iter()
                .map(|c| c.iter().map(|&v| g.id(v).to_string()).collect())
                .collect();
            let cond_edges: Vec<(usize, usize)> = d.condensation.edges().to_vec();
            Ok(json!({
                "command": "components",
                "input": args.input.display().to_string(),
                "components": comps,
                "final": d.final_flags,
                "condensation_edges": cond_edges,
                "strongly_connected": digraph::is_strongly_connected(g),
                "citations": ["final strong components = maximal classes of the reachability pre-order"],
            }))
        }
        Command::Minsum(args) => {
            let parsed = load_graph(&args.graph)?;
            let g = parsed.digraph();
            let opts = MinSumOptions { solve: solve_opts };
            let report = minsum::minsum_exact(g, &opts)?;
            let oracle = if args.oracle_restarts > 0 {
                Some(minsum::minsum_oracle(g, args.oracle_restarts, cli.seed)?)
            } else {
                None
            };
            let mut body = report_value(&report, g.ids());
            body["command"] = json!("minsum");
            body["input"] = json!(args.graph.input.display().to_string());
            body["oracle"] = json!(oracle);
            body["citations"] = json!([
                "exact minimization by ranked-block reduction over ordered set partitions",
                "reduced problems are weighted quotient sums, convex in log coordinates",
            ]);
            Ok(body)
        }
        Command::Maxsum(args) => {
            let parsed = load_graph(&args.graph)?;
            let g = parsed.digraph();
            let value = maxsum::maxsum_infimum(g)?;
            let witness = maxsum::maxsum_witness(g, args.epsilon)?;
            let witness_value = maxsum::maxsum_value(g, &witness)?;
            let attained = matches!(maxsum::maxsum_attainment(g)?, MaxSumAttainment::Attained);
            Ok(json!({
                "command": "maxsum",
                "input": args.graph.input.display().to_string(),
                "value": value,
                "attained": attained,
                "witness": minimizer_map(g.ids(), &witness),
                "witness_value": witness_value,
                "epsilon": args.epsilon,
                "notes": if attained {
                    "disjoint union of cycles: infimum attained at ones"
                } else {
                    "attainment beyond pure cycle unions is not classified; the witness approaches the infimum"
                },
                "citations": [
                    "max-sum infimum = sum of girths of the final strong components (always an integer)",
                ],
            }))
        }
        Command::Gp(args) => {
            let parsed = load_graph(&args.graph)?;
            let weighted = parsed.into_weighted();
            let ids: Vec<String> = weighted.base().ids().to_vec();
            let spec = match &args.pin {
                Some(pin) => {
                    let (vertex, value) = pin.split_once('=').ok_or_else(|| {
                        QcsError::Validation(format!("--pin expects VERTEX=VALUE, got '{pin}'"))
                    })?;
                    let value: f64 = value.parse().map_err(|_| {
                        QcsError::Validation(format!("bad pin value '{value}'"))
                    })?;
                    gp::QuotientSumSpec::pinned(weighted, vertex.trim(), value)?
                }
                None => gp::QuotientSumSpec::new(weighted)?,
            };
            let report = gp::minimize(&spec, &solve_opts)?;
            let cycle_residual = gp::cycle_constraints(&spec).ok().map(|basis| {
                basis
                    .iter()
                    .map(|c| (c.product(&spec, &report.minimizer) - 1.0).abs())
                    .fold(0.0f64, f64::max)
            });
            let uniqueness = if args.uniqueness_trials > 0 && report.attained {
                let u = gp::verify_uniqueness(
                    &spec,
                    args.uniqueness_trials,
                    cli.seed,
                    1e-6,
                    &solve_opts,
                )?;
                Some(json!({"agrees": u.agrees, "max_discrepancy": u.max_discrepancy}))
            } else {
                None
            };
            let mut body = report_value(&report, &ids);
            body["command"] = json!("gp");
            body["input"] = json!(args.graph.input.display().to_string());
            body["cycle_constraint_residual"] = json!(cycle_residual);
            body["uniqueness"] = json!(uniqueness);
            body["citations"] = json!([
                "strongly connected weighted support: minimizer exists, unique up to scale",
            ]);
            Ok(body)
        }
        Command::Shapiro(args) => {
            let p: PowerOrder = args.p.parse()?;
            let opts = MultiStartOptions {
                starts: args.starts,
                seed: cli.seed,
                threads: cli.threads.max(1),
            };
            let report = bounds::minimize_diananda(args.n, args.k, p, &opts)?;
            let ids: Vec<String> = (1..=args.n).map(|i| i.to_string()).collect();
            let citation = if report.upper_bound_only {
                "multi-start local search: an upper bound; no certifying method is known for p >= 1"
            } else if p.is_max() {
                "A(n,k,inf) = floor((n+k-1)/k) (Diananda 1973)"
            } else {
                "A(n,k,p) = n for p <= 0, by the permutation form of the AM-GM"
            };
            let mut body = report_value(&report, &ids);
            body["command"] = json!("shapiro");
            body["n"] = json!(args.n);
            body["k"] = json!(args.k);
            body["p"] = json!(args.p);
            body["citations"] = json!([citation]);
            Ok(body)
        }
        Command::Mavlo(args) => {
            let mut min_gap = f64::INFINITY;
            let mut max_identity_residual = 0.0f64;
            let mut violations = 0usize;
            for trial in 0..args.samples as u64 {
                let mut rng = qcs::optim::rng_for_trial(cli.seed, trial);
                let mut draw = || {
                    let u: f64 = qcs::optim::random_point(&mut rng, 1, -1.0, 1.0)[0];
                    10f64.powf(u)
                };
                let (a, b, c, x) = (draw(), draw(), draw(), draw());
                let lhs = bounds::mavlo_lhs(a, b, c, x)?;
                let (_, sharp) = bounds::mavlo_bounds(x)?;
                let gap = lhs - sharp;
                min_gap = min_gap.min(gap);
                if gap < -1e-12 {
                    violations += 1;
                }
                max_identity_residual =
                    max_identity_residual.max(bounds::georgiev_identity_residual(a, b, c, x)?);
            }
            Ok(json!({
                "command": "mavlo",
                "samples": args.samples,
                "seed": cli.seed,
                "min_gap_to_sharp_bound": min_gap,
                "max_identity_residual": max_identity_residual,
                "violations": violations,
                "citations": [
                    "classical bound 3x/(1+x^3) (Mavlo; proof by Georgiev)",
                    "sharp bound 3/(1+x) via the symmetric minimizer of the quotient-sum form",
                ],
            }))
        }
        Command::Funceq(sub) => run_funceq(sub, cli.seed),
        Command::Extremal(args) => {
            let (value, k) = minsum::extremal_minsum_argmin(args.n)?;
            let bound = minsum::extremal_lower_bound(args.n)?;
            Ok(json!({
                "command": "extremal",
                "n": args.n,
                "value": value,
                "argmin_k": k,
                "lower_bound": bound,
                "citations": [
                    "extremal value min_k (k+1)(n-k)^(1/(k+1)) over strongly connected graphs",
                    "every strongly connected graph on n vertices has min-sum > e ln(n+1-ln(n+1))",
                ],
            }))
        }
        Command::Ks(args) => {
            let gap = minsum::ks_gap(args.r)?;
            Ok(json!({
                "command": "ks",
                "r": args.r,
                "gap": gap,
                "positive": gap > 0.0,
                "citations": [
                    "ln ln(r - ln r) < min_{0<x<=r-1} (ln x + ln(r-x)/x) (Kalachev-Sadov 2018)",
                ],
            }))
        }
    }
}

fn run_funceq(sub: FunceqCommand, seed: u64) -> Result<Value, QcsError> {
    match sub {
        FunceqCommand::Table(args) => {
            let x_max = args.x_max.unwrap_or_else(|| args.x.max(16.0));
            if x_max < args.x {
                return Err(QcsError::Validation(format!(
                    "--x-max {x_max} below --x {}",
                    args.x
                )));
            }
            let table = funceq::build_f_table(x_max, args.tol)?;
            table.validate()?;
            let value = table.eval(args.x)?;
            if let Some(path) = &args.csv {
                let file = std::fs::File::create(path).map_err(|e| {
                    QcsError::Validation(format!("cannot write {}: {e}", path.display()))
                })?;
                table
                    .to_csv(std::io::BufWriter::new(file))
                    .map_err(|e| QcsError::Validation(format!("csv write failed: {e}")))?;
            }
            Ok(json!({
                "command": "funceq F",
                "x": args.x,
                "value": value,
                "x_max": x_max,
                "grid_points": table.grid().len(),
                "csv": args.csv.map(|p| p.display().to_string()),
                "citations": [
                    "F(x) = min_{0<y<x-1} (F(y) + x/(y+1)), F(x) = x on [0,1]",
                    "F(x) = e ln x - A + e ||b + ln x||^2/(2 ln x) + O(1/(ln x)^2)",
                ],
            }))
        }
        FunceqCommand::Amgm(args) => {
            let (value, n) = funceq::amgm_f(args.x)?;
            Ok(json!({
                "command": "funceq f",
                "x": args.x,
                "value": value,
                "argmin_n": n,
                "citations": [
                    "f(x) = min_n n x^(1/n) = e ln x + e ||ln x||^2/(2 ln x) + O(1/(ln x)^2)",
                ],
            }))
        }
        FunceqCommand::Shallit(args) => {
            let r = funceq::shallit_min(args.n)?;
            Ok(json!({
                "command": "funceq shallit",
                "n": args.n,
                "value": r.report.value,
                "c_n": r.c_n,
                "status": r.report.status,
                "citations": [
                    "min g_n = 3n - C + o(1), C = 1.3694514... (Shallit 1994)",
                ],
            }))
        }
        FunceqCommand::Anstar(args) => {
            let x_max = (args.n as f64).max(16.0);
            let table = funceq::build_f_table(x_max, 1e-6)?;
            let value = funceq::a_n_star(args.n, &table)?;
            let brute = if args.brute {
                let b = funceq::a_n_star_bruteforce(args.n, seed)?;
                Some(json!({"value": b.value, "windows": b.windows}))
            } else {
                None
            };
            let asymptotic = std::f64::consts::E * (args.n as f64).ln()
                - bounds::VARIABLE_WINDOW_A.value;
            Ok(json!({
                "command": "funceq anstar",
                "n": args.n,
                "value": value,
                "brute_force": brute,
                "asymptotic_estimate": asymptotic,
                "citations": [
                    "the uniform variable-window bound equals F(n)",
                    "A(n) = e ln n - A + O(1/ln n)",
                ],
            }))
        }
    }
}
