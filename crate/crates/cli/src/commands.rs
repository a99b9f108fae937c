use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use dbfraud::fraud::{
    brute_force_expected_max, expected_max_tree_float, monte_carlo_expected_max, tree_report, DistanceFraudReport,
    FraudLimits,
};
use dbfraud::generators::{
    make_generalized_tree, make_poulidor, make_tree, GeneralizedTreeSpec, Labeling, PoulidorSpec, TreeSpec,
};
use dbfraud::graph::{
    most_frequent_sequence, read_graph_document, write_graph_document, GraphDocument, LabeledDigraph, Limits, MfsMode,
};
use dbfraud::protocol::{
    estimate_success_rate, transcripts, write_json_lines, AdversaryStrategy, LabelSource, ProtocolConfig, TimingModel,
};
use dbfraud::sat::{check_walk_lengths, parse_dimacs, reduce_sat_to_mfs, reduction_document, verify_reduction_output};
use dbfraud::sat::{ReductionParams, ReductionVerdict, WalkLengthVerdict};

use crate::output::{emit, Report};
use crate::{
    AdversaryArg, Cli, Command, DfArgs, DfMethod, GenerateArgs, Global, GraphKind, MfsArgs, ModeArg, ProtocolKind,
    ReduceArgs, SimulateArgs, VerificationFailed,
};

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Generate(a) => generate(g, a),
        Command::Mfs(a) => mfs(g, a),
        Command::Df(a) => df(g, a),
        Command::Reduce(a) => reduce(g, a),
        Command::Simulate(a) => simulate(g, a),
    }
}

fn walk_limits(g: &Global) -> Limits {
    Limits { max_walks: g.limits.max_walks, max_candidates: g.limits.max_candidates }
}

fn parse_bits(s: &str, what: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => bail!("{what}: {other:?} is not 0 or 1"),
        })
        .collect()
}

fn load_graph(path: &Path) -> Result<GraphDocument> {
    read_graph_document(path).with_context(|| format!("reading graph {}", path.display()))
}

fn protocol_graph(kind: ProtocolKind, rounds: u32) -> Result<LabeledDigraph> {
    Ok(match kind {
        ProtocolKind::Tree => make_tree(TreeSpec { rounds }, &Labeling::Unlabeled)?,
        ProtocolKind::Poulidor => make_poulidor(PoulidorSpec { rounds }, &Labeling::Unlabeled)?,
    })
}

#[derive(Serialize)]
struct WrittenGraph {
    path: String,
    vertices: usize,
    edges: usize,
}

impl Report for WrittenGraph {
    fn table(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        (
            vec!["path", "vertices", "edges"],
            vec![vec![self.path.clone(), self.vertices.to_string(), self.edges.to_string()]],
        )
    }

    fn text(&self) -> String {
        format!("wrote {} ({} vertices, {} edges)", self.path, self.vertices, self.edges)
    }
}

fn write_or_print(doc: &GraphDocument, out: Option<&Path>, g: &Global) -> Result<()> {
    match out {
        Some(path) => {
            write_graph_document(doc, path)?;
            emit(
                g.format,
                &WrittenGraph {
                    path: path.display().to_string(),
                    vertices: doc.graph.vertex_count(),
                    edges: doc.graph.edge_count(),
                },
            )
        }
        None => {
            writeln!(std::io::stdout().lock(), "{}", doc.to_json_string())?;
            Ok(())
        }
    }
}

fn generate(g: &Global, a: &GenerateArgs) -> Result<()> {
    let labeling = match (&a.labels, g.seed) {
        (Some(_), Some(_)) => bail!("--labels and --seed are mutually exclusive"),
        (Some(bits), None) => Labeling::Explicit(parse_bits(bits, "--labels")?),
        (None, Some(seed)) => Labeling::Seeded(seed),
        (None, None) => Labeling::Unlabeled,
    };
    let graph = match a.kind {
        GraphKind::Tree => make_tree(TreeSpec { rounds: a.rounds }, &labeling)?,
        GraphKind::Poulidor => make_poulidor(PoulidorSpec { rounds: a.rounds }, &labeling)?,
        GraphKind::Gentree => make_generalized_tree(GeneralizedTreeSpec { m: a.m, n: a.rounds }, &labeling)?,
    };
    write_or_print(&GraphDocument::new(graph), a.out.as_deref(), g)
}

#[derive(Serialize)]
struct MfsReport {
    start: usize,
    length: usize,
    sequence: String,
    count: u128,
    tie_count: u128,
    mode: MfsMode,
    elapsed_ms: f64,
}

impl Report for MfsReport {
    fn table(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        (
            vec!["start", "length", "sequence", "count", "tie_count", "mode", "elapsed_ms"],
            vec![vec![
                self.start.to_string(),
                self.length.to_string(),
                self.sequence.clone(),
                self.count.to_string(),
                self.tie_count.to_string(),
                mode_name(self.mode).into(),
                format!("{:.3}", self.elapsed_ms),
            ]],
        )
    }

    fn text(&self) -> String {
        format!(
            "most frequent sequence from {} of length {}: {} (count {}, {} tied, {} mode, {:.3} ms)",
            self.start,
            self.length,
            self.sequence,
            self.count,
            self.tie_count,
            mode_name(self.mode),
            self.elapsed_ms
        )
    }
}

fn mode_name(m: MfsMode) -> &'static str {
    match m {
        MfsMode::Auto => "auto",
        MfsMode::Sequence => "seq",
        MfsMode::Walk => "walk",
    }
}

fn mfs(g: &Global, a: &MfsArgs) -> Result<()> {
    let doc = load_graph(&a.graph)?;
    let mode = match a.mode {
        ModeArg::Auto => MfsMode::Auto,
        ModeArg::Seq => MfsMode::Sequence,
        ModeArg::Walk => MfsMode::Walk,
    };
    let start = Instant::now();
    let r = most_frequent_sequence(&doc.graph, a.start, a.length, mode, &walk_limits(g))?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    emit(
        g.format,
        &MfsReport {
            start: a.start,
            length: a.length,
            sequence: r.sequence.render(doc.graph.alphabet()),
            count: r.count,
            tie_count: r.tie_count,
            mode: r.mode,
            elapsed_ms,
        },
    )
}

#[derive(Serialize)]
struct DfRow {
    #[serde(flatten)]
    report: DistanceFraudReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_max_exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    success_probability_exact: Option<String>,
    lower_bound: f64,
}

impl DfRow {
    fn new(report: DistanceFraudReport) -> Self {
        DfRow {
            expected_max_exact: report.expected_max.as_ref().map(|d| d.render()),
            success_probability_exact: report.success_probability.as_ref().map(|d| d.render()),
            lower_bound: 2f64.powi(-(report.rounds as i32)),
            report,
        }
    }

    fn cells(&self) -> Vec<String> {
        let r = &self.report;
        let method = serde_json::to_value(r.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        vec![
            r.rounds.to_string(),
            method,
            self.expected_max_exact.clone().unwrap_or_default(),
            format!("{}", r.expected_max_decimal),
            self.success_probability_exact.clone().unwrap_or_default(),
            format!("{}", r.success_probability_decimal),
            r.monte_carlo.map(|m| (m.std_error / 2f64.powi(r.rounds as i32)).to_string()).unwrap_or_default(),
            format!("{}", self.lower_bound),
        ]
    }
}

const DF_COLUMNS: [&str; 8] = [
    "rounds",
    "method",
    "expected_max",
    "expected_max_decimal",
    "success_probability",
    "success_probability_decimal",
    "success_probability_std_error",
    "lower_bound",
];

impl Report for DfRow {
    fn table(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        (DF_COLUMNS.to_vec(), vec![self.cells()])
    }

    fn text(&self) -> String {
        let r = &self.report;
        let exact = |s: &Option<String>| s.as_ref().map(|s| format!("{s} = ")).unwrap_or_default();
        let mut line = format!(
            "n = {}: E(M) = {}{}, success probability = {}{}",
            r.rounds,
            exact(&self.expected_max_exact),
            r.expected_max_decimal,
            exact(&self.success_probability_exact),
            r.success_probability_decimal
        );
        if let Some(mc) = r.monte_carlo {
            line.push_str(&format!(" (+/- {} over {} samples)", mc.std_error / 2f64.powi(r.rounds as i32), mc.samples));
        }
        line
    }
}

#[derive(Serialize)]
#[serde(transparent)]
struct Sweep(Vec<DfRow>);

impl Report for Sweep {
    fn table(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        (DF_COLUMNS.to_vec(), self.0.iter().map(DfRow::cells).collect())
    }

    fn text(&self) -> String {
        self.0.iter().map(DfRow::text).collect::<Vec<_>>().join("\n")
    }
}

fn df_one(g: &Global, a: &DfArgs, n: u32, file: Option<&LabeledDigraph>) -> Result<DistanceFraudReport> {
    let limits = FraudLimits {
        max_exact_rounds: g.limits.max_exact_rounds,
        max_brute_vertices: g.limits.max_brute_vertices,
        allow_large: a.allow_large,
    };
    let graph = || -> Result<LabeledDigraph> {
        match file {
            Some(graph) => Ok(graph.clone()),
            None => protocol_graph(a.protocol, n),
        }
    };
    match a.method {
        DfMethod::ExactTree if a.float => {
            let f = expected_max_tree_float(n, &limits)
                .context("float recursion refused; pass --allow-large to go beyond --max-exact-rounds")?;
            Ok(DistanceFraudReport::float(n, f.expected_max))
        }
        DfMethod::ExactTree => tree_report(n, &limits).with_context(|| {
            format!("exact recursion refused for n = {n}; try --float --allow-large or raise --max-exact-rounds")
        }),
        DfMethod::Brute => {
            let e = brute_force_expected_max(&graph()?, a.start, n, &limits)
                .context("brute force refused; use exact-tree or mc, or raise --max-brute-vertices")?;
            Ok(DistanceFraudReport::exact(n, dbfraud::fraud::Method::BruteForce, e))
        }
        DfMethod::Mc => {
            let est = monte_carlo_expected_max(&graph()?, a.start, n, a.samples, g.seed.unwrap_or(0))?;
            Ok(DistanceFraudReport::monte_carlo(n, est))
        }
    }
}

fn df(g: &Global, a: &DfArgs) -> Result<()> {
    if a.float && a.method != DfMethod::ExactTree {
        bail!("--float applies to exact-tree only");
    }
    if a.method == DfMethod::ExactTree && a.graph.is_some() {
        bail!("exact-tree analyses the full binary tree; --graph applies to brute and mc");
    }
    let file = a.graph.as_deref().map(load_graph).transpose()?.map(|d| d.graph);
    match (a.sweep, a.rounds) {
        (Some((lo, hi)), _) => {
            let rows = (lo..=hi).map(|n| df_one(g, a, n, file.as_ref()).map(DfRow::new)).collect::<Result<_>>()?;
            emit(g.format, &Sweep(rows))
        }
        (None, Some(n)) => emit(g.format, &DfRow::new(df_one(g, a, n, file.as_ref())?)),
        (None, None) => bail!("either --rounds or --sweep is required"),
    }
}

#[derive(Serialize)]
struct ReduceReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
    vertices: usize,
    edges: usize,
    params: ReductionParams,
    verdict: ReductionVerdict,
    walk_lengths: WalkLengthVerdict,
}

impl Report for ReduceReport {
    fn table(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        (
            vec!["variables", "clauses", "vertices", "mfs_count", "satisfiable", "consistent", "walk_lengths"],
            vec![vec![
                self.params.variables.to_string(),
                self.params.clauses.to_string(),
                self.vertices.to_string(),
                self.verdict.mfs_count.to_string(),
                self.verdict.satisfiable.to_string(),
                self.verdict.consistent.to_string(),
                self.walk_lengths.passed.to_string(),
            ]],
        )
    }

    fn text(&self) -> String {
        format!(
            "{} variables, {} clauses -> {} vertices; MFS of length {}: {} (count {}); {}; walk lengths {}",
            self.params.variables,
            self.params.clauses,
            self.vertices,
            self.params.target_length,
            self.verdict.mfs_sequence,
            self.verdict.mfs_count,
            self.verdict.summary,
            if self.walk_lengths.passed {
                "ok".to_string()
            } else {
                format!("violated: {:?}", self.walk_lengths.violations)
            }
        )
    }
}

fn reduce(g: &Global, a: &ReduceArgs) -> Result<()> {
    let text = fs::read_to_string(&a.cnf).with_context(|| format!("reading {}", a.cnf.display()))?;
    let f = parse_dimacs(&text).with_context(|| format!("parsing {}", a.cnf.display()))?;
    let r = reduce_sat_to_mfs(&f);
    let doc = reduction_document(&r);
    if !a.verify {
        return write_or_print(&doc, a.out.as_deref(), g);
    }
    if let Some(path) = &a.out {
        write_graph_document(&doc, path)?;
    }
    let verdict = verify_reduction_output(&f, &r, &walk_limits(g))?;
    let walk_lengths = check_walk_lengths(&r);
    let ok = verdict.consistent && walk_lengths.passed;
    let summary = verdict.summary.clone();
    emit(
        g.format,
        &ReduceReport {
            out: a.out.as_ref().map(|p| p.display().to_string()),
            vertices: r.graph.vertex_count(),
            edges: r.graph.edge_count(),
            params: r.params,
            verdict,
            walk_lengths,
        },
    )?;
    if !ok {
        return Err(VerificationFailed(summary).into());
    }
    Ok(())
}

#[derive(Serialize)]
struct SimReport {
    rounds: u32,
    adversary: AdversaryStrategy,
    trials: u64,
    accepted: u64,
    rate: f64,
    std_error: f64,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    transcripts: Option<String>,
}

impl Report for SimReport {
    fn table(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        let adversary = serde_json::to_value(&self.adversary).ok().and_then(|v| v["kind"].as_str().map(String::from));
        (
            vec!["rounds", "adversary", "trials", "accepted", "rate", "std_error", "seed"],
            vec![vec![
                self.rounds.to_string(),
                adversary.unwrap_or_default(),
                self.trials.to_string(),
                self.accepted.to_string(),
                self.rate.to_string(),
                self.std_error.to_string(),
                self.seed.to_string(),
            ]],
        )
    }

    fn text(&self) -> String {
        format!(
            "{} of {} sessions accepted: rate {} +/- {} ({} rounds, seed {})",
            self.accepted, self.trials, self.rate, self.std_error, self.rounds, self.seed
        )
    }
}

fn simulate(g: &Global, a: &SimulateArgs) -> Result<()> {
    let graph = match &a.graph {
        Some(path) => load_graph(path)?.graph,
        None => protocol_graph(a.protocol, a.rounds)?,
    };
    let strategy = match (a.adversary, &a.replies) {
        (AdversaryArg::Honest, None) => AdversaryStrategy::Honest,
        (AdversaryArg::Greedy, None) => AdversaryStrategy::Greedy,
        (AdversaryArg::EarlyReply, r) => {
            AdversaryStrategy::EarlyReply { replies: r.as_deref().map(|s| parse_bits(s, "--replies")).transpose()? }
        }
        (_, Some(_)) => bail!("--replies applies to the early-reply adversary only"),
    };
    let timing = match &a.timing {
        Some(bits) => TimingModel::Flags(parse_bits(bits, "--timing")?.into_iter().map(|b| b == 1).collect()),
        None => TimingModel::AllPass,
    };
    let config = ProtocolConfig {
        graph,
        start: a.start,
        rounds: a.rounds,
        key: a.key.as_bytes().to_vec(),
        trials: a.trials,
        seed: g.seed.unwrap_or(0),
        timing,
        labels: if a.fixed_labels { LabelSource::Fixed } else { LabelSource::Prf },
    };
    let est = estimate_success_rate(&config, &strategy)?;
    if let Some(path) = &a.transcripts {
        let sessions = transcripts(&config, &strategy, a.transcript_count.min(a.trials))?;
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_json_lines(std::io::BufWriter::new(file), &sessions)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    emit(
        g.format,
        &SimReport {
            rounds: a.rounds,
            adversary: strategy,
            trials: est.trials,
            accepted: est.accepted,
            rate: est.rate,
            std_error: est.std_error,
            seed: est.seed,
            transcripts: a.transcripts.as_ref().map(|p| p.display().to_string()),
        },
    )
}
