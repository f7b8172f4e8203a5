use horpo::constrained::{check_coverage, ConstrainedJudgment, CRel, CoverageOutcome};
use horpo::order::{ArgumentFilter, Fidelity, HorpoParams, Precedence, SymbolOrder};
use horpo::synth::{orient, validate, ConstrainedRule, Demand, OrientOutcome, OrientationProblem, SearchConfig};
use horpo::terms::{Signature, Sort, Symbol, Term, Type, Var};
use horpo::theory::{declare_theory, int, BoundedBackend, Constraint, Entailer, SmtMode, TheoryOp};

fn ity() -> Type {
    Type::base(Sort::int())
}

fn x() -> Term {
    Term::var(Var::new("x", ity()))
}

fn unary(name: &str) -> Symbol {
    Symbol::plain(name, Type::arrow(ity(), ity()))
}

fn ap(f: &Symbol, a: Term) -> Term {
    Term::app(Term::sym(f.clone()), a).unwrap()
}

fn cmp(op: TheoryOp, a: Term, b: Term) -> Constraint {
    Constraint::new(op.apply([a, b])).unwrap()
}

fn finite() -> Entailer {
    Entailer::new(BoundedBackend::finite(-64, 64), SmtMode::Off, None)
}

fn problem(plain: &[Symbol], rules: Vec<ConstrainedRule>) -> OrientationProblem {
    let mut signature = Signature::new();
    for f in plain {
        signature.declare(f.clone()).unwrap();
    }
    declare_theory(&mut signature).unwrap();
    OrientationProblem {
        signature,
        values: Default::default(),
        rules,
    }
}

/// `sum x → 0 [x ≤ 0]`, `sum x → x + sum (x − 1) [x > 0]`, both strict.
fn sum_problem() -> OrientationProblem {
    let sum = unary("sum");
    let r1 = ConstrainedRule::new(ap(&sum, x()), int(0), cmp(TheoryOp::Le, x(), int(0)), None, Demand::Strict).unwrap();
    let rhs = TheoryOp::Add.apply([x(), ap(&sum, TheoryOp::Sub.apply([x(), int(1)]))]);
    let r2 = ConstrainedRule::new(ap(&sum, x()), rhs, cmp(TheoryOp::Gt, x(), int(0)), None, Demand::Strict).unwrap();
    problem(&[sum], vec![r1, r2])
}

/// `fact x → 1 [x ≤ 0]`, `fact x → x * fact (x − 1) [x > 0]`.
fn fact_problem() -> OrientationProblem {
    let fact = unary("fact");
    let r1 = ConstrainedRule::new(ap(&fact, x()), int(1), cmp(TheoryOp::Le, x(), int(0)), None, Demand::Weak).unwrap();
    let rhs = TheoryOp::Mul.apply([x(), ap(&fact, TheoryOp::Sub.apply([x(), int(1)]))]);
    let r2 = ConstrainedRule::new(ap(&fact, x()), rhs, cmp(TheoryOp::Gt, x(), int(0)), None, Demand::Strict).unwrap();
    problem(&[fact], vec![r1, r2])
}

#[test]
fn sum_system_is_oriented_with_sum_above_plus() {
    let p = sum_problem();
    let e = finite();
    let out = orient(&p, &SearchConfig::default(), &e).unwrap();
    let sol = out.solution().expect("solution");
    let sum = unary("sum");
    assert!(sol.params.precedence.greater(&sum, &TheoryOp::Add.symbol()));
    assert!(sol.params.filter.is_full());
    let d = sol.derivations[1].principal();
    assert_eq!(d.rule.name(), "≻≻Copy");
    for r in validate(&p, &sol.params, &e, Fidelity::Sound).unwrap() {
        assert!(r.passed());
    }
}

#[test]
fn factorial_system_is_oriented() {
    let p = fact_problem();
    let e = finite();
    let out = orient(&p, &SearchConfig::default(), &e).unwrap();
    assert!(out.solution().is_some(), "{out:?}");
}

#[test]
fn search_is_deterministic() {
    let p = sum_problem();
    for seed in [0, 5] {
        let cfg = SearchConfig {
            seed,
            ..SearchConfig::default()
        };
        let a = orient(&p, &cfg, &finite()).unwrap();
        let b = orient(&p, &SearchConfig { batch: 1, ..cfg.clone() }, &finite()).unwrap();
        let (a, b) = (a.solution().unwrap(), b.solution().unwrap());
        assert_eq!(a.params.precedence.to_string(), b.params.precedence.to_string());
        assert_eq!(a.params.filter.to_string(), b.params.filter.to_string());
        assert_eq!(a.derivations, b.derivations);
    }
}

#[test]
fn self_loop_is_definitively_unorientable() {
    let o = Type::base(Sort::new("o").unwrap());
    let a = Symbol::plain("a", o);
    let r = ConstrainedRule::new(Term::sym(a.clone()), Term::sym(a.clone()), Constraint::truth(), None, Demand::Strict)
        .unwrap();
    let p = problem(&[a], vec![r]);
    let out = orient(&p, &SearchConfig::default(), &finite()).unwrap();
    assert!(matches!(out, OrientOutcome::Exhausted { unknown_entailments: 0, .. }), "{out:?}");
}

#[test]
fn empty_problem_has_trivial_solution() {
    let p = problem(&[], Vec::new());
    let out = orient(&p, &SearchConfig::default(), &finite()).unwrap();
    let sol = out.solution().unwrap();
    assert!(sol.params.precedence.is_empty());
    assert!(sol.derivations.is_empty());
}

#[test]
fn empty_precedence_fails_the_strict_rule() {
    let p = sum_problem();
    let reports = validate(&p, &HorpoParams::default(), &finite(), Fidelity::Sound).unwrap();
    assert!(reports[0].passed());
    assert_eq!(reports[1].result.as_ref().unwrap_err(), "no ≻≻ clause applies");
}

#[test]
fn theory_filter_restriction_is_checked_first() {
    let p = sum_problem();
    let filter = ArgumentFilter::full().with(&TheoryOp::Add.symbol(), [2]).unwrap();
    let params = HorpoParams::new(Precedence::new(), filter);
    assert!(validate(&p, &params, &finite(), Fidelity::Sound).is_err());
}

#[test]
fn tiny_budget_is_reported_as_exhausted_budget() {
    let p = fact_problem();
    let mut cfg = SearchConfig::default();
    cfg.budget.nodes = 1;
    cfg.batch = 1;
    // An unorientable extra rule makes every candidate fail.
    let mut p = p;
    let fact = unary("fact");
    p.rules.push(
        ConstrainedRule::new(ap(&fact, x()), ap(&fact, x()), Constraint::truth(), None, Demand::Strict).unwrap(),
    );
    let out = orient(&p, &cfg, &finite()).unwrap();
    assert!(matches!(out, OrientOutcome::BudgetExhausted { .. }), "{out:?}");
}

#[test]
fn adding_a_rule_keeps_failure_definitive() {
    let mut p = sum_problem();
    let sum = unary("sum");
    p.rules.push(ConstrainedRule::new(ap(&sum, x()), ap(&sum, x()), Constraint::truth(), None, Demand::Strict).unwrap());
    let out = orient(&p, &SearchConfig::default(), &finite()).unwrap();
    assert!(matches!(out, OrientOutcome::Exhausted { .. }));
    p.rules.push(ConstrainedRule::new(ap(&sum, x()), int(0), Constraint::truth(), None, Demand::Weak).unwrap());
    let out = orient(&p, &SearchConfig::default(), &finite()).unwrap();
    assert!(matches!(out, OrientOutcome::Exhausted { .. }));
}

#[test]
fn found_judgments_are_covered() {
    let e = finite();
    for p in [sum_problem(), fact_problem()] {
        let out = orient(&p, &SearchConfig::default(), &e).unwrap();
        let sol = out.solution().unwrap();
        for (i, r) in p.rules.iter().enumerate() {
            let rel = match r.demand {
                Demand::Strict => CRel::Gt,
                Demand::Weak => CRel::Geq,
            };
            let j = ConstrainedJudgment {
                s: r.lhs.clone(),
                t: r.rhs.clone(),
                phi: r.phi.clone(),
                lvars: r.lvars.clone(),
                rel,
            };
            let rep = check_coverage(&j, &sol.params, &p.values, &e, Fidelity::Sound, 100, 16, i as u64);
            assert!(matches!(rep.outcome, CoverageOutcome::Checked { violations: 0, samples: 100, .. }), "{rep:?}");
        }
    }
}

#[test]
fn orientation_with_external_solver() {
    let e = Entailer::from_env(BoundedBackend::sampled(16), SmtMode::Auto);
    if e.solver().is_none() {
        eprintln!("no SMT solver found; skipping");
        return;
    }
    let out = orient(&sum_problem(), &SearchConfig::default(), &e).unwrap();
    assert!(out.solution().is_some());
    assert!(e.stats().smt_calls > 0);
}
