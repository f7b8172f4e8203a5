//! The seven acceptance criteria, run in sequence with one PASS/FAIL line each.

use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use horpo::constrained::{
    calc_containment, check_coverage, ground_theory_terms, CDerivation, CRel, ConstrainedHorpo, ConstrainedJudgment,
    CoverageOutcome,
};
use horpo::oracle::{build_graph, check_lemmas, engine_disagreements, LemmaConfig, E1, UNIVERSE_CAP};
use horpo::order::{Fidelity, HorpoParams};
use horpo::synth::{orient, OrientOutcome, OrientationProblem, SearchConfig};
use horpo::terms::{Sort, Value};
use horpo::theory::{BoundedBackend, Entailer, SmtMode, ValueOrder};
use horpo_cli::{main_with, parse};

/// Node-count bound of the enumerated universe; covers every term of at most five nodes.
const UNIVERSE_SIZE: usize = 7;
const FIXTURES: [&str; 4] = ["sum.lcstrs", "factorial.lcstrs", "map.lcstrs", "filter.lcstrs"];

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn problem(name: &str) -> OrientationProblem {
    parse(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap().problem()
}

fn entailer() -> Entailer {
    Entailer::from_env(BoundedBackend::sampled(16), SmtMode::Auto)
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut full = vec!["horpo"];
    full.extend_from_slice(args);
    let code = main_with(full, &mut out, &mut std::io::sink());
    (code, String::from_utf8(out).unwrap())
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Solved parameters and the accepted judgments (every derivation node) of one fixture.
struct Solved {
    name: &'static str,
    problem: OrientationProblem,
    params: HorpoParams,
    judgments: Vec<ConstrainedJudgment>,
}

fn collect(d: &CDerivation, rule: &horpo::synth::ConstrainedRule, out: &mut Vec<ConstrainedJudgment>) {
    out.push(ConstrainedJudgment {
        s: d.lhs.clone(),
        t: d.rhs.clone(),
        phi: rule.phi.clone(),
        lvars: rule.lvars.clone(),
        rel: d.relation(),
    });
    for p in &d.premises {
        collect(p, rule, out);
    }
}

fn solve_fixtures(e: &Entailer) -> Result<Vec<Solved>, String> {
    let mut solved = Vec::new();
    for name in FIXTURES {
        let problem = problem(name);
        let out = orient(&problem, &SearchConfig::default(), e).map_err(|err| format!("{name}: {err}"))?;
        let OrientOutcome::Found(sol) = out else {
            return Err(format!("{name}: no parameters found"));
        };
        let mut judgments = Vec::new();
        for (d, r) in sol.derivations.iter().zip(&problem.rules) {
            collect(d, r, &mut judgments);
        }
        solved.push(Solved {
            name,
            problem,
            params: sol.params.clone(),
            judgments,
        });
    }
    Ok(solved)
}

fn lemma_suite() -> Outcome {
    let start = Instant::now();
    let e1 = E1::new();
    let mut failures = Vec::new();
    let mut size = 0;
    let mut sets = 0;
    for (name, params) in e1.parameter_sets() {
        let g = build_graph(&e1.symbols(), &e1.pool(), UNIVERSE_SIZE, &params, Fidelity::Sound, UNIVERSE_CAP).unwrap();
        size = g.universe.len();
        sets += 1;
        let report = check_lemmas(&g, &LemmaConfig::default());
        for r in report.results.iter().filter(|r| !r.passed()) {
            failures.push(format!("{name}: {} ({})", r.name, r.counterexample.as_deref().unwrap_or("")));
        }
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && sets >= 3 && elapsed < Duration::from_secs(300);
    outcome(
        ok,
        format!("{sets} parameter sets, {size} terms, {} failures, {:.1?}", failures.len(), elapsed)
            + &failures.first().map(|f| format!("; first: {f}")).unwrap_or_default(),
    )
}

fn engine_oracle_agreement() -> Outcome {
    let e1 = E1::new();
    let mut pairs = 0;
    let mut diffs = 0;
    for (_, params) in e1.parameter_sets() {
        for fidelity in [Fidelity::Sound, Fidelity::Paper] {
            let g = build_graph(&e1.symbols(), &e1.pool(), UNIVERSE_SIZE, &params, fidelity, UNIVERSE_CAP).unwrap();
            pairs += g.universe.len() * g.universe.len() * 3;
            diffs += engine_disagreements(&g).len();
        }
    }
    outcome(diffs == 0, format!("{diffs} disagreements on {pairs} (pair, relation) checks, both modes"))
}

fn coverage(solved: &[Solved], e: &Entailer) -> Outcome {
    let mut judged = 0;
    let mut violations = 0;
    let mut bad = Vec::new();
    for s in solved {
        for (i, j) in s.judgments.iter().enumerate() {
            let rep = check_coverage(j, &s.params, &s.problem.values, e, Fidelity::Sound, 100, 16, i as u64);
            judged += 1;
            match rep.outcome {
                CoverageOutcome::Checked { samples: 100, violations: v, .. } => violations += v,
                CoverageOutcome::Vacuous => {}
                other => bad.push(format!("{}: {} {} {}: {other:?}", s.name, j.s, j.rel, j.t)),
            }
        }
    }
    outcome(
        violations == 0 && bad.is_empty(),
        format!("{judged} judgments x 100 samples, {violations} violations, {} unchecked", bad.len())
            + &bad.first().map(|b| format!("; first: {b}")).unwrap_or_default(),
    )
}

fn reduction_pair(solved: &[Solved], e: &Entailer) -> Outcome {
    let terms = ground_theory_terms(200);
    let report = calc_containment(&terms, &HorpoParams::default(), &ValueOrder::default(), Fidelity::Sound);
    let mut strict = 0;
    let mut missing = 0;
    for s in solved {
        // `≻≻` also relates terms of different type structures, where `⪰` and `≻` never apply.
        let strict_pair = |j: &&ConstrainedJudgment| match j.rel {
            CRel::Gt => true,
            CRel::Rpo => j.s.ty().same_structure(j.t.ty()),
            CRel::Geq => false,
        };
        for j in s.judgments.iter().filter(strict_pair) {
            let h = ConstrainedHorpo::new(&s.params, &s.problem.values, e, Fidelity::Sound, j.phi.clone(), j.lvars.clone())
                .unwrap();
            strict += 1;
            if h.geq(&j.s, &j.t).is_none() {
                missing += 1;
            }
        }
    }
    outcome(
        terms.len() == 200 && report.failures.is_empty() && missing == 0,
        format!(
            "{} ground terms, {} calculation steps, {} not contained; {strict} strict judgments, {missing} without ⪰",
            terms.len(),
            report.checked,
            report.failures.len()
        ),
    )
}

fn end_to_end() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for name in ["sum.lcstrs", "factorial.lcstrs"] {
        let path = fixture(name).to_string_lossy().into_owned();
        let start = Instant::now();
        let (code, out) = cli(&["orient", &path]);
        let elapsed = start.elapsed();
        let rule2 = out.split("rule 2 (strict)").nth(1).unwrap_or("");
        let clause_ok = ["≻≻Copy", "≻≻Lex", "≻Theory"].iter().any(|c| rule2.contains(c));
        ok &= code == 0 && elapsed < Duration::from_secs(10) && clause_ok;
        let prec = out.lines().find_map(|l| l.strip_prefix("precedence: ")).unwrap_or("?");
        notes.push(format!("{name}: exit {code}, {elapsed:.1?}, {prec}"));
    }
    outcome(ok, notes.join("; "))
}

fn value_order_axioms() -> Outcome {
    let start = Instant::now();
    let vo = ValueOrder::default();
    let mut broken = Vec::new();
    let ints: Vec<Value> = (-16..=16).map(Value::Int).collect();
    let bools = vec![Value::Bool(false), Value::Bool(true)];
    for (sort, vals) in [(Sort::int(), &ints), (Sort::bool(), &bools)] {
        let n = vals.len();
        let st = |i: usize, j: usize| vo.strict(vals[i], vals[j]);
        let qu = |i: usize, j: usize| vo.quasi(vals[i], vals[j]);
        for i in 0..n {
            if st(i, i) {
                broken.push(format!("{sort}: {} ▶ itself", vals[i]));
            }
            if !qu(i, i) {
                broken.push(format!("{sort}: ⊵▶ not reflexive at {}", vals[i]));
            }
            let minimal = (0..n).all(|j| !st(i, j));
            if vals[i] != vals[0] && minimal != vo.is_minimal(vals[i]) {
                broken.push(format!("{sort}: minimality of {} misreported", vals[i]));
            }
            for j in 0..n {
                // Strict steps only descend in the integer order, so no chain is infinite.
                if st(i, j) && j > i {
                    broken.push(format!("{sort}: {} ▶ {} ascends", vals[i], vals[j]));
                }
                if qu(i, j) && !(st(i, j) || i == j || (vo.is_minimal(vals[i]) && vo.is_minimal(vals[j]))) {
                    broken.push(format!("{sort}: {} ⊵▶ {} violates compatibility", vals[i], vals[j]));
                }
                for k in 0..n {
                    if st(i, j) && st(j, k) && !st(i, k) {
                        broken.push(format!("{sort}: ▶ not transitive at {} {} {}", vals[i], vals[j], vals[k]));
                    }
                    if qu(i, j) && qu(j, k) && !qu(i, k) {
                        broken.push(format!("{sort}: ⊵▶ not transitive at {} {} {}", vals[i], vals[j], vals[k]));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        broken.is_empty() && elapsed < Duration::from_secs(1),
        format!("Int on [-16, 16] and Bool, {} violations, {elapsed:.1?}", broken.len())
            + &broken.first().map(|b| format!("; first: {b}")).unwrap_or_default(),
    )
}

fn negative_control() -> Outcome {
    let lp = fixture("loop.lcstrs").to_string_lossy().into_owned();
    let filter = fixture("filter.lcstrs").to_string_lossy().into_owned();
    let (c_loop, out_loop) = cli(&["orient", &lp, "--format", "records"]);
    let (c_full, out_full) = cli(&["orient", &filter, "--full-filters", "--format", "records"]);
    let (c_search, out_search) = cli(&["orient", &filter]);
    let definitive = |out: &str| out.contains("status=exhausted definitive=true");
    let filtered = out_search.lines().any(|l| l.starts_with("filter: pi("));
    outcome(
        c_loop == 1 && definitive(&out_loop) && c_full == 1 && definitive(&out_full) && c_search == 0 && filtered,
        format!(
            "a -> a: exit {c_loop}; filter fixture with full filters: exit {c_full}; with filter search: exit {c_search} ({})",
            out_search.lines().find(|l| l.starts_with("filter: ")).unwrap_or("no filter line")
        ),
    )
}

#[test]
fn acceptance() {
    let e = entailer();
    let solved = solve_fixtures(&e);
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 lemma suite", lemma_suite()),
        ("2 engine/oracle agreement", engine_oracle_agreement()),
    ];
    match &solved {
        Ok(s) => {
            results.push(("3 coverage", coverage(s, &e)));
            results.push(("4 reduction pair conditions", reduction_pair(s, &e)));
        }
        Err(err) => {
            results.push(("3 coverage", outcome(false, err.clone())));
            results.push(("4 reduction pair conditions", outcome(false, err.clone())));
        }
    }
    results.push(("5 end-to-end orientation", end_to_end()));
    results.push(("6 value-order axioms", value_order_axioms()));
    results.push(("7 negative control", negative_control()));

    // Written past the test harness capture so the table always shows.
    let mut err = std::io::stderr().lock();
    for (name, o) in &results {
        let _ = writeln!(err, "{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.passed).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
