//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use bphz::coincidence::{coincidence_probe_default, plan_coincidence, verify_decomposition};
use bphz::config::{random_configurations, BoundingBox};
use bphz::field_equation::{field_eq_decomposition, fuse_wave_edge, wave_degree_split, WaveSplit};
use bphz::fixtures;
use bphz::forest::{enumerate_forests_with, Connectivity};
use bphz::power_counting::{uv_degree, uv_degree_from_monomials, Degrees, SubtractionAssignment};
use bphz::subtraction::{default_lambdas, remainder_probe};
use bphz::zimmermann::zi_verify;
use bphz::{FeynmanGraph, VSet};

/// Exponent fits may undershoot the asymptotic slope by this much.
const REMAINDER_FIT_TOLERANCE: f64 = 0.1;
const COINCIDENCE_FIT_TOLERANCE: f64 = 0.2;
const COINCIDENCE_MIN_IMPROVEMENT: f64 = 1.0;
/// Base configurations for the scaling probes; the median fit over them is
/// compared against the bound.
const PROBE_SEEDS: std::ops::RangeInclusive<u64> = 1..=20;
const IDENTITY_CONFIGS: usize = 10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn power_counting() -> Outcome {
    let a = SubtractionAssignment::default();
    let join = plan_coincidence(&fixtures::join2(), &a).unwrap().delta;
    let raise = plan_coincidence(&fixtures::raise(), &a).unwrap().delta;
    let nest = fixtures::nest();
    let got = [
        uv_degree(&fixtures::fish(), 0b11),
        uv_degree(&fixtures::sunset(), 0b11),
        uv_degree(&fixtures::triangle(), 0b111),
        uv_degree(&nest, nest.all()),
        uv_degree(&nest, 0b011),
        uv_degree(&join, join.all()),
        uv_degree(&raise, raise.all()),
    ];
    let want = [0, 2, -2, 0, 0, 2, 4];
    let mut disagreements = 0;
    for seed in 0..200 {
        let g = support::small_graph(seed, 5, false);
        disagreements += (1..=g.all())
            .filter(|&s| uv_degree(&g, s) != uv_degree_from_monomials(&g, s))
            .count();
    }
    outcome(
        got == want && disagreements == 0,
        format!(
            "fixture degrees {got:?}, route disagreements on 200 random graphs: {disagreements}"
        ),
    )
}

fn forest_sets(g: &FeynmanGraph, d: &Degrees) -> BTreeSet<BTreeSet<VSet>> {
    enumerate_forests_with(g, d, Connectivity::Connected)
        .iter()
        .map(|f| f.sets().into_iter().collect())
        .collect()
}

fn forest_enumeration() -> Outcome {
    let count =
        |g: &FeynmanGraph, d: &Degrees| enumerate_forests_with(g, d, Connectivity::Connected).len();
    let plan = plan_coincidence(&fixtures::join2(), &SubtractionAssignment::default()).unwrap();
    let fish = fixtures::fish();
    let nest = fixtures::nest();
    let got = [
        count(&fish, &Degrees::minimal(&fish)),
        count(&nest, &Degrees::minimal(&nest)),
        count(&plan.gamma, &plan.gamma_degrees),
        count(&plan.delta, &plan.delta_degrees),
    ];
    let mut graphs: Vec<FeynmanGraph> = fixtures::all_named().into_iter().map(|(_, g)| g).collect();
    graphs.extend((0..100).map(|seed| support::small_graph(seed, 5, false)));
    let mismatches = graphs
        .iter()
        .filter(|g| {
            let d = Degrees::minimal(g);
            forest_sets(g, &d) != support::powerset_forests(g, &d)
        })
        .count();
    outcome(
        got == [2, 4, 4, 6] && mismatches == 0,
        format!(
            "counts {got:?}, oracle mismatches on {} graphs: {mismatches}",
            graphs.len()
        ),
    )
}

fn taylor_remainder() -> Outcome {
    let g = fixtures::nest();
    let mut pass = true;
    let mut parts = Vec::new();
    for d in 0..=2 {
        let fits: Vec<f64> = PROBE_SEEDS
            .map(|seed| {
                let base = random_configurations(&g, seed, 1, &BoundingBox::default())
                    .unwrap()
                    .remove(0);
                remainder_probe(&g, 0b011, d, &base, &default_lambdas())
                    .unwrap()
                    .improvement()
            })
            .collect();
        let (lo, hi) = (
            fits.iter().copied().fold(f64::INFINITY, f64::min),
            fits.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        );
        let m = median(fits);
        pass &= m >= d as f64 + 1.0 - REMAINDER_FIT_TOLERANCE;
        parts.push(format!("d={d}: median {m:.3} (range {lo:.3}..{hi:.3})"));
    }
    outcome(pass, parts.join(", "))
}

fn zi_rows(g: &FeynmanGraph, d1: &Degrees, d2: &Degrees, seed: u64) -> (usize, usize) {
    let configs =
        random_configurations(g, seed, IDENTITY_CONFIGS, &BoundingBox::default()).unwrap();
    let rows = zi_verify(g, d1, d2, &configs).unwrap();
    (rows.iter().filter(|r| r.equal).count(), rows.len())
}

fn zimmermann_identity() -> Outcome {
    let nest = fixtures::nest();
    let nest_low = Degrees::minimal(&nest);
    let mut nest_high = nest_low.clone();
    nest_high.vertex[0] += 2;
    let raise = fixtures::raise_delta();
    let raise_high = Degrees::minimal(&raise);
    let mut raise_low = raise_high.clone();
    raise_low.overrides.insert(raise.all(), 0);
    let random = support::graphs_with_parts(4, 40, true, 2)
        .into_iter()
        .find(|g| support::oracle_parts(g, &Degrees::minimal(g)).len() >= 2)
        .expect("a four-vertex graph with two parts");
    let random_low = Degrees::minimal(&random);
    let parts = support::oracle_parts(&random, &random_low);
    let (p, q) = (parts[0], parts[parts.len() - 1]);
    let mut random_high = random_low.clone();
    random_high
        .overrides
        .insert(p, random_low.delta(&random, p) + 1);
    random_high
        .overrides
        .insert(q, random_low.delta(&random, q) + 2);
    let results = [
        ("NEST", zi_rows(&nest, &nest_high, &nest_low, 7)),
        ("RAISE-Delta", zi_rows(&raise, &raise_high, &raise_low, 7)),
        ("random", zi_rows(&random, &random_high, &random_low, 7)),
    ];
    let pass = results
        .iter()
        .all(|(_, (eq, n))| eq == n && *n == IDENTITY_CONFIGS);
    let detail = results
        .iter()
        .map(|(name, (eq, n))| format!("{name} {eq}/{n} exact"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, detail)
}

fn coincidence_decomposition() -> Outcome {
    let a = SubtractionAssignment::default();
    let mut detail = Vec::new();
    let mut pass = true;
    for (name, g) in [("JOIN2", fixtures::join2()), ("RAISE", fixtures::raise())] {
        let plan = plan_coincidence(&g, &a).unwrap();
        let configs =
            random_configurations(&g, 7, IDENTITY_CONFIGS, &BoundingBox::default()).unwrap();
        let rows = verify_decomposition(&plan, &configs).unwrap();
        let eq = rows.iter().filter(|r| r.equal).count();
        pass &= eq == IDENTITY_CONFIGS;
        detail.push(format!("{name} {eq}/{} exact", rows.len()));
    }
    outcome(pass, detail.join(", "))
}

fn coincidence_probe() -> Outcome {
    let g = fixtures::join2();
    let plan = plan_coincidence(&g, &SubtractionAssignment::default()).unwrap();
    let fits: Vec<f64> = PROBE_SEEDS
        .map(|seed| {
            let base = random_configurations(&g, seed, 1, &BoundingBox::default())
                .unwrap()
                .remove(0);
            coincidence_probe_default(&plan, &base)
                .unwrap()
                .improvement()
        })
        .collect();
    let lo = fits.iter().copied().fold(f64::INFINITY, f64::min);
    let m = median(fits);
    outcome(
        m >= COINCIDENCE_MIN_IMPROVEMENT - COINCIDENCE_FIT_TOLERANCE,
        format!("exponent gain of R_Delta over R_Gamma: median {m:.3}, minimum {lo:.3}"),
    )
}

fn field_equation() -> Outcome {
    let mut ledgers_ok = true;
    for (g, v, slot) in [
        (fixtures::wave_phi1(), "p", 0),
        (fixtures::wave_pair(), "p", 2),
        (fixtures::wave_fish(), "a", 0),
    ] {
        let ledger = fuse_wave_edge(&g, v, slot).unwrap().degree_ledger;
        ledgers_ok &= ledger.fused_delta == ledger.fused_dimension;
    }
    let phi1 = fixtures::wave_phi1();
    let configs =
        random_configurations(&phi1, 7, IDENTITY_CONFIGS, &BoundingBox::default()).unwrap();
    let report =
        field_eq_decomposition(&phi1, "p", 0, &SubtractionAssignment::default(), &configs).unwrap();
    let phi1_zero =
        report.overlap_zero && report.diagonal_zero && report.rows.iter().all(|r| r.equal);
    let split = wave_degree_split(1).unwrap();
    let split_ok = split
        == WaveSplit {
            a: 4,
            b: 2,
            window: (2, 4),
        };
    outcome(
        ledgers_ok && phi1_zero && split_ok,
        format!("ledgers match recount: {ledgers_ok}, Phi=1 corrections zero: {phi1_zero}, split(1) = ({}, {})", split.a, split.b),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_bphz");
    let fx = |name: &str| -> PathBuf {
        [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name]
            .iter()
            .collect()
    };
    let runs: Vec<Vec<String>> = vec![
        vec!["forests".into(), fx("nest.json").display().to_string()],
        vec![
            "eval".into(),
            fx("join2.json").display().to_string(),
            "--seed".into(),
            "11".into(),
        ],
        vec![
            "zi-check".into(),
            fx("nest.json").display().to_string(),
            "--a".into(),
            "deg+2-on-V0".into(),
            "--b".into(),
            "minimal".into(),
        ],
        vec![
            "join-check".into(),
            fx("raise.json").display().to_string(),
            "--n".into(),
            "3".into(),
        ],
        vec![
            "probe".into(),
            fx("join2.json").display().to_string(),
            "--seed".into(),
            "3".into(),
        ],
        vec![
            "fuse".into(),
            fx("wave_pair.json").display().to_string(),
            "--vertex".into(),
            "p".into(),
            "--slot".into(),
            "2".into(),
            "--verify".into(),
        ],
    ];
    let mut differing = Vec::new();
    for args in &runs {
        let once = Command::new(bin).args(args).output().unwrap();
        let twice = Command::new(bin).args(args).output().unwrap();
        if once.stdout != twice.stdout || once.stdout.is_empty() || !once.status.success() {
            differing.push(args[0].clone());
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} commands run twice, differing or failing: {differing:?}",
            runs.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "power counting",
            power_counting,
            Some(Duration::from_secs(1)),
        ),
        (
            "forest enumeration",
            forest_enumeration,
            Some(Duration::from_secs(10)),
        ),
        (
            "Taylor remainder",
            taylor_remainder,
            Some(Duration::from_secs(5)),
        ),
        (
            "Zimmermann identity",
            zimmermann_identity,
            Some(Duration::from_secs(60)),
        ),
        (
            "coincidence decomposition",
            coincidence_decomposition,
            Some(Duration::from_secs(60)),
        ),
        (
            "coincidence probe",
            coincidence_probe,
            Some(Duration::from_secs(10)),
        ),
        (
            "field equation",
            field_equation,
            Some(Duration::from_secs(5)),
        ),
        ("determinism", determinism, None),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let pass = out.pass && in_time;
        failures += usize::from(!pass);
        let budget_note = budget.map_or(String::new(), |b| format!(" / budget {:.0?}", b));
        println!(
            "{} criterion {} ({name}): {} [{:.2?}{budget_note}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed
        );
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
