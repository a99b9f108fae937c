//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances and budgets are fixed below.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use dbfraud::dyadic::Dyadic;
use dbfraud::fraud::{
    base_case_prob, brute_force_expected_max, brute_force_max_distribution, expected_max_tree, expected_max_tree_float,
    monte_carlo_expected_max, DistanceFraudReport, FraudLimits, Method, TreeAnalysis,
};
use dbfraud::generators::{
    make_generalized_tree, make_poulidor, make_tree, GeneralizedTreeSpec, Labeling, PoulidorSpec, TreeSpec,
};
use dbfraud::graph::{
    complementary_sibling_labeling, most_frequent_sequence, occ_count, LabelSequence, Limits, MfsMode,
};
use dbfraud::protocol::{estimate_success_rate, run_session_with, AdversaryStrategy, LabelSource, ProtocolConfig};
use dbfraud::sat::{
    check_walk_lengths, max_target_multiplicity, parse_dimacs, reduce_sat_to_mfs, verify_reduction, CnfFormula,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXAMPLE_BUDGET: Duration = Duration::from_secs(1);
const TREE_BRUTE_BUDGET: Duration = Duration::from_secs(120);
const SAT_BUDGET: Duration = Duration::from_secs(300);
const DP_N10_BUDGET: Duration = Duration::from_secs(60);
const SIM_TRIALS: u64 = 100_000;
const SIM_SIGMAS: f64 = 4.0;
const SIM_SEED: u64 = 2024;
const SAT_CORPUS: usize = 100;
const SAT_CORPUS_SEED: u64 = 17;
const EXACT_MAX_N: u32 = 10;

const EXAMPLE_TREE: [u8; 15] = [0, 1, 0, 0, 1, 1, 1, 0, 0, 1, 0, 0, 1, 0, 0];
const EXAMPLE_RING: [u8; 8] = [0, 1, 1, 0, 1, 1, 0, 1];
const EXAMPLE_CNF: &str = "p cnf 3 3\n1 -2 0\n2 -3 0\n-1 -2 -3 0\n";

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < budget, || format!("{what} took {took:?}, budget {budget:?}"))?;
    Ok(took)
}

/// Exact analyses for n = 1..=EXACT_MAX_N, shared by several criteria; the
/// n = EXACT_MAX_N timing is recorded for the performance criterion.
fn exact_sweep() -> &'static (Vec<TreeAnalysis>, Duration) {
    static SWEEP: OnceLock<(Vec<TreeAnalysis>, Duration)> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let limits = FraudLimits::default();
        let mut out = Vec::new();
        let mut last = Duration::ZERO;
        for n in 1..=EXACT_MAX_N {
            let start = Instant::now();
            out.push(expected_max_tree(n, &limits).expect("exact sweep"));
            last = start.elapsed();
        }
        (out, last)
    })
}

fn exact_e(n: u32) -> Dyadic {
    exact_sweep().0[n as usize - 1].expected_max.clone()
}

fn sat_corpus() -> Vec<CnfFormula> {
    let mut rng = ChaCha8Rng::seed_from_u64(SAT_CORPUS_SEED);
    let mut corpus: Vec<CnfFormula> = (0..SAT_CORPUS).map(|_| CnfFormula::random(&mut rng, 6, 6)).collect();
    corpus.push(parse_dimacs(EXAMPLE_CNF).unwrap());
    corpus
}

fn c1_tree_example() -> Outcome {
    let start = Instant::now();
    let g = make_tree(TreeSpec { rounds: 3 }, &Labeling::Explicit(EXAMPLE_TREE.to_vec())).map_err(|e| e.to_string())?;
    let mfs = most_frequent_sequence(&g, 0, 4, MfsMode::Auto, &Limits::default()).map_err(|e| e.to_string())?;
    let took = within_budget(start, EXAMPLE_BUDGET, "tree MFS")?;
    ensure(mfs.sequence.to_string() == "0010" && mfs.count == 3, || format!("got {} x{}", mfs.sequence, mfs.count))?;
    Ok(format!("MFS = 0010, count 3 ({took:?})"))
}

fn c2_ring_example() -> Outcome {
    let start = Instant::now();
    let g = make_poulidor(PoulidorSpec { rounds: 4 }, &Labeling::Explicit(EXAMPLE_RING.to_vec()))
        .map_err(|e| e.to_string())?;
    let occ = occ_count(&g, 0, &LabelSequence::from_bits(&[0, 1, 0, 1]).unwrap()).map_err(|e| e.to_string())?;
    let mfs = most_frequent_sequence(&g, 0, 4, MfsMode::Auto, &Limits::default()).map_err(|e| e.to_string())?;
    let took = within_budget(start, EXAMPLE_BUDGET, "ring MFS")?;
    ensure(occ == 4 && mfs.count == 4, || format!("occ(0101) = {occ}, MFS count = {}", mfs.count))?;
    Ok(format!("occ(0101) = 4, MFS count 4 ({took:?})"))
}

fn c3_attack_probability() -> Outcome {
    let g = make_tree(TreeSpec { rounds: 3 }, &Labeling::Explicit(EXAMPLE_TREE.to_vec())).map_err(|e| e.to_string())?;
    let cfg = ProtocolConfig { labels: LabelSource::Fixed, ..ProtocolConfig::new(g, 0, 3) };
    let strategy = AdversaryStrategy::EarlyReply { replies: None };
    let mut wins = 0;
    for mask in 0..8u8 {
        let challenges: Vec<u8> = (0..3).map(|i| (mask >> i) & 1).collect();
        let s = run_session_with(&cfg, &strategy, b"nv", b"np", &challenges).map_err(|e| e.to_string())?;
        wins += s.accepted() as u32;
    }
    ensure(wins == 3, || format!("{wins} of 8 challenge strings accepted"))?;
    Ok("early reply accepted on 3 of 8 challenge strings".into())
}

fn c4_dp_vs_brute() -> Outcome {
    let start = Instant::now();
    let limits = FraudLimits::default();
    let mut shown = Vec::new();
    for n in 1..=3 {
        let tree = make_tree(TreeSpec { rounds: n }, &Labeling::Unlabeled).unwrap();
        let brute = brute_force_expected_max(&tree, 0, n, &limits).map_err(|e| e.to_string())?;
        let exact = expected_max_tree(n, &limits).map_err(|e| e.to_string())?.expected_max;
        ensure(brute == exact, || format!("n = {n}: exact {exact} vs brute {brute}"))?;
        shown.push(format!("n={n}: {exact}"));
    }
    let took = within_budget(start, TREE_BRUTE_BUDGET, "exact-vs-brute")?;
    Ok(format!("{} ({took:?})", shown.join(", ")))
}

fn c5_base_case() -> Outcome {
    let limits = FraudLimits::default();
    let mut checked = 0;
    for m in 0..=6u32 {
        let g = make_generalized_tree(GeneralizedTreeSpec { m, n: 1 }, &Labeling::Unlabeled).unwrap();
        let dist = brute_force_max_distribution(&g, 0, 2, Some((0, false)), &limits).map_err(|e| e.to_string())?;
        for x in 1..=2 * m as u64 + 2 {
            let want = dist.cdf(x);
            let got = base_case_prob(m as u64, x);
            ensure(got == want, || format!("m = {m}, x = {x}: {} vs enumeration {}", got.value(), want.value()))?;
            checked += 1;
        }
    }
    // The corrected boundaries, spelled out.
    ensure(base_case_prob(0, 1) == dbfraud::dyadic::DyadicProbability::one(), || "m = 0, x = 1 is not 1".into())?;
    ensure(base_case_prob(3, 3) == dbfraud::dyadic::DyadicProbability::zero(), || "m = 3, x = 3 is not 0".into())?;
    Ok(format!("{checked} (m, x) cells match enumeration"))
}

fn c6_sat_equivalence() -> Outcome {
    let start = Instant::now();
    let corpus = sat_corpus();
    let mut sat = 0;
    for f in &corpus {
        let v = verify_reduction(f).map_err(|e| e.to_string())?;
        ensure(v.consistent, || format!("{f}: {}", v.summary))?;
        if v.satisfiable {
            let a = v.extracted.as_ref().ok_or("satisfiable without a decoded assignment")?;
            ensure(f.eval(a), || format!("{f}: decoded assignment fails"))?;
            sat += 1;
        }
    }
    let took = within_budget(start, SAT_BUDGET, "reduction corpus")?;
    Ok(format!("{} instances agree ({sat} satisfiable) ({took:?})", corpus.len()))
}

fn c7_walk_properties() -> Outcome {
    let corpus = sat_corpus();
    for f in &corpus {
        let r = reduce_sat_to_mfs(f);
        let l = check_walk_lengths(&r);
        ensure(l.passed, || format!("{f}: {:?}", l.violations))?;
        let worst = max_target_multiplicity(&r, &Limits::default()).map_err(|e| e.to_string())?;
        ensure(worst <= f.clause_count() as u64, || format!("{f}: a sequence occurs {worst} times"))?;
    }
    Ok(format!("{} instances: walk lengths and occurrence ceiling hold", corpus.len()))
}

fn simulate(g: dbfraud::graph::LabeledDigraph, n: u32, expected: f64) -> Result<String, String> {
    let cfg = ProtocolConfig { trials: SIM_TRIALS, seed: SIM_SEED + n as u64, ..ProtocolConfig::new(g, 0, n) };
    let est =
        estimate_success_rate(&cfg, &AdversaryStrategy::EarlyReply { replies: None }).map_err(|e| e.to_string())?;
    let z = (est.rate - expected) / est.std_error;
    ensure(z.abs() <= SIM_SIGMAS, || format!("n = {n}: rate {} vs {expected} ({z:+.2} se)", est.rate))?;
    Ok(format!("{:.4} vs {expected:.4} ({z:+.2} se)", est.rate))
}

fn c8_simulation_bridge() -> Outcome {
    let mut parts = Vec::new();
    for n in 2..=4 {
        let tree = make_tree(TreeSpec { rounds: n }, &Labeling::Unlabeled).unwrap();
        let p = exact_e(n).halve(n as u64).to_f64();
        parts.push(format!("tree n={n}: {}", simulate(tree, n, p)?));
    }
    let ring = make_poulidor(PoulidorSpec { rounds: 4 }, &Labeling::Unlabeled).unwrap();
    let p =
        brute_force_expected_max(&ring, 0, 4, &FraudLimits::default()).map_err(|e| e.to_string())?.halve(4).to_f64();
    parts.push(format!("ring n=4: {}", simulate(ring, 4, p)?));
    Ok(parts.join("; "))
}

fn c9_lower_bound() -> Outcome {
    let limits = FraudLimits::default();
    let mut reports: Vec<DistanceFraudReport> = Vec::new();
    for n in 1..=EXACT_MAX_N {
        reports.push(DistanceFraudReport::exact(n, Method::ExactDp, exact_e(n)));
        let f = expected_max_tree_float(n, &limits).map_err(|e| e.to_string())?;
        reports.push(DistanceFraudReport::float(n, f.expected_max));
    }
    for n in 1..=3 {
        let tree = make_tree(TreeSpec { rounds: n }, &Labeling::Unlabeled).unwrap();
        let e = brute_force_expected_max(&tree, 0, n, &limits).map_err(|e| e.to_string())?;
        reports.push(DistanceFraudReport::exact(n, Method::BruteForce, e));
        let mc = monte_carlo_expected_max(&tree, 0, n, 10_000, SIM_SEED).map_err(|e| e.to_string())?;
        reports.push(DistanceFraudReport::monte_carlo(n, mc));
    }
    for n in 2..=8 {
        let ring = make_poulidor(PoulidorSpec { rounds: n }, &Labeling::Unlabeled).unwrap();
        let e = brute_force_expected_max(&ring, 0, n, &limits).map_err(|e| e.to_string())?;
        reports.push(DistanceFraudReport::exact(n, Method::BruteForce, e));
    }
    for r in &reports {
        ensure(r.within_bounds(), || {
            format!("{:?} n = {}: p = {}", r.method, r.rounds, r.success_probability_decimal)
        })?;
    }
    Ok(format!("{} reports satisfy 2^-n <= p <= 1", reports.len()))
}

fn c10_performance() -> Outcome {
    let (analyses, took) = exact_sweep();
    ensure(*took < DP_N10_BUDGET, || format!("n = {EXACT_MAX_N} took {took:?}"))?;
    let e10 = &analyses[EXACT_MAX_N as usize - 1].expected_max;
    let tree4 = make_tree(TreeSpec { rounds: 4 }, &Labeling::Unlabeled).unwrap();
    let refused = brute_force_expected_max(&tree4, 0, 4, &FraudLimits::default());
    ensure(matches!(&refused, Err(e) if e.is_resource_limit()), || {
        format!("n = 4 brute force not refused: {refused:?}")
    })?;
    Ok(format!(
        "n={EXACT_MAX_N} exact in {took:?} (E = {:.10}); n=4 brute force (2^31 labelings) refused by default",
        e10.to_f64()
    ))
}

fn c11_cdf_and_unique_labeling() -> Outcome {
    for a in &exact_sweep().0 {
        ensure(a.cdf.is_valid(), || format!("CDF for n = {} is not a valid distribution function", a.n))?;
    }
    for depth in 1..=8 {
        let t = make_tree(TreeSpec { rounds: depth }, &Labeling::Unlabeled).unwrap();
        for seed in 0..4 {
            let labels = complementary_sibling_labeling(&t, seed).map_err(|e| e.to_string())?;
            let g = t.relabeled(labels).map_err(|e| e.to_string())?;
            let mfs = most_frequent_sequence(&g, 0, depth as usize + 1, MfsMode::Walk, &Limits::default())
                .map_err(|e| e.to_string())?;
            ensure(mfs.count == 1, || format!("depth {depth}, seed {seed}: max occurrence {}", mfs.count))?;
        }
    }
    Ok(format!("{} CDF tables valid; complementary labelings give max 1 for depth 1..=8", exact_sweep().0.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("tree example MFS", c1_tree_example),
        ("ring example MFS", c2_ring_example),
        ("example attack probability", c3_attack_probability),
        ("exact DP vs brute force", c4_dp_vs_brute),
        ("base-case table", c5_base_case),
        ("SAT equivalence", c6_sat_equivalence),
        ("walk lengths and target multiplicity", c7_walk_properties),
        ("simulation bridge", c8_simulation_bridge),
        ("lower bound", c9_lower_bound),
        ("performance envelope", c10_performance),
        ("CDF properties", c11_cdf_and_unique_labeling),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{:>2}] {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
