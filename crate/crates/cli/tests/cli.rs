use std::path::PathBuf;

use horpo::synth::Demand;
use horpo::terms::{enumerate_by_size, Sort, Symbol, Type, Value, Var, VariablePool};
use horpo::theory::{SortOrder, TheoryOp};
use horpo_cli::{main_with, parse, parse_params, print_params, print_problem, ErrorKind};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["horpo"];
    full.extend_from_slice(args);
    let code = main_with(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn kind_of(text: &str) -> (ErrorKind, usize, usize) {
    let e = parse(text).expect_err("should not parse");
    (e.kind, e.line, e.col)
}

#[test]
fn sum_fixture_has_two_rules_and_one_plain_symbol() {
    let p = parse(&read("sum.lcstrs")).unwrap();
    assert!(p.theory);
    assert_eq!(p.rules.len(), 2);
    assert_eq!(p.symbols.len(), 1);
    assert_eq!(p.symbols[0].name(), "sum");
    let problem = p.problem();
    assert_eq!(problem.signature.plain_symbols().count(), 1);
    assert!(problem.signature.lookup("+").is_some());
    assert_eq!(p.rules[1].rule.to_string(), "sum x -> x + sum (x - 1) [x > 0]");
    assert_eq!(p.rules[1].rule.lvars.len(), 1);
}

#[test]
fn empty_file_is_an_empty_problem() {
    let p = parse("").unwrap();
    assert!(p.rules.is_empty() && p.symbols.is_empty() && p.params.is_none());
    let p = parse("# only a comment\n\n").unwrap();
    assert!(p.rules.is_empty());
}

#[test]
fn all_fixtures_parse() {
    for f in ["sum.lcstrs", "factorial.lcstrs", "map.lcstrs", "filter.lcstrs", "loop.lcstrs", "sum-params.lcstrs"] {
        parse(&read(f)).unwrap_or_else(|e| panic!("{f}: {e}"));
    }
    let fact = parse(&read("factorial.lcstrs")).unwrap();
    assert_eq!(fact.rules[0].rule.demand, Demand::Weak);
    let map = parse(&read("map.lcstrs")).unwrap();
    assert!(!map.theory);
    assert_eq!(map.sorts.len(), 2);
}

#[test]
fn annotations_orders_and_params() {
    let text = "theory int\nf : Int -> Int\nvar x, y : Int\norder Int = up -3\nparams {\n  f > (+) ~ -, f > *\n  pi(f) = {}\n}\nf x -> f y [x > y] {weak; L = {x, y}}\n";
    let p = parse(text).unwrap();
    assert_eq!(p.orders, vec![(Sort::int(), SortOrder::Ascending { bound: -3 })]);
    let r = &p.rules[0];
    assert!(r.explicit_lvars);
    assert_eq!(r.rule.demand, Demand::Weak);
    assert_eq!(r.rule.lvars.len(), 2);
    let params = p.params.as_ref().unwrap();
    let f = p.problem().signature.lookup("f").unwrap().clone();
    assert!(params.filter.positions(&f).is_empty());
    assert_eq!(params.precedence.to_string(), "+ ~ -, f > +, f > *");
}

#[test]
fn sidecar_params_accept_bare_and_wrapped_forms() {
    let p = parse(&read("sum.lcstrs")).unwrap();
    let a = parse_params("sum > +\n", &p).unwrap();
    let b = parse_params("params {\n  sum > +\n}\n", &p).unwrap();
    assert_eq!(a.precedence.to_string(), b.precedence.to_string());
    assert!(parse_params(&read("bad.params"), &p).unwrap().precedence.is_empty());
    let e = parse_params("sum > nope\n", &p).unwrap_err();
    assert_eq!((e.kind, e.line, e.col), (ErrorKind::Unknown, 1, 7));
    let e = parse_params("pi(sum) = {2}\n", &p).unwrap_err();
    assert_eq!(e.kind, ErrorKind::Params);
}

#[test]
fn error_kinds_are_distinct() {
    let head = "theory int\nsum : Int -> Int -> Int\nf : Int -> Int\nvar x : Int\n";
    assert_eq!(kind_of(&format!("{head}f x -> sum x\n")).0, ErrorKind::Arity);
    assert_eq!(kind_of(&format!("{head}f x -> f x x\n")).0, ErrorKind::Arity);
    assert_eq!(kind_of(&format!("{head}f x -> sum x + 1\n")).0, ErrorKind::Sort);
    assert_eq!(kind_of(&format!("{head}f x -> f true\n")).0, ErrorKind::Sort);
    assert_eq!(kind_of(&format!("{head}f x -> f x [x + 1]\n")).0, ErrorKind::Sort);
    assert_eq!(kind_of(&format!("{head}f x -> f y\n")), (ErrorKind::Unknown, 5, 10));
    assert_eq!(kind_of(&format!("{head}f x -> f x $\n")), (ErrorKind::Lexical, 5, 12));
    assert_eq!(kind_of(&format!("{head}f x -> \n")).0, ErrorKind::Syntax);
    assert_eq!(kind_of(&format!("{head}f x -> f (x\n")).0, ErrorKind::Syntax);
    assert_eq!(kind_of(&format!("{head}f x -> f x [x > 0 > 1]\n")).0, ErrorKind::Syntax);
    assert_eq!(kind_of(&format!("{head}f : Int\n")).0, ErrorKind::Duplicate);
    assert_eq!(kind_of(&format!("{head}neg : Int\n")).0, ErrorKind::Duplicate);
    assert_eq!(kind_of("g : Nat\n"), (ErrorKind::Unknown, 1, 5));
    assert_eq!(kind_of("theory none\nsort o\na : o\na -> 0\n").0, ErrorKind::Unknown);
    assert_eq!(kind_of("sort o\ntheory int\n").0, ErrorKind::Syntax);
    assert_eq!(kind_of("x : Int\n99999999999999999999 -> x\n").0, ErrorKind::Lexical);
    // A fresh right-hand variable outside the theory sorts cannot join L.
    assert_eq!(kind_of("sort o\na : o\nvar y : o\na -> y\n").0, ErrorKind::Sort);
    let e = parse(&format!("{head}f x -> f y\n")).unwrap_err();
    assert!(e.to_string().starts_with("5:10: unknown identifier [E05]"), "{e}");
}

#[test]
fn negative_literals_only_start_an_operand() {
    let head = "theory int\nf : Int -> Int\nvar x : Int\n";
    let p = parse(&format!("{head}f (-1) -> x - -2 * -3\n")).unwrap();
    assert_eq!(p.rules[0].rule.lhs.args()[0].as_value(), Some(Value::Int(-1)));
    assert_eq!(p.rules[0].rule.rhs.to_string(), "x - -2 * -3");
    // `f -1` is a subtraction with a function on its left.
    assert_eq!(kind_of(&format!("{head}f -1 -> x\n")).0, ErrorKind::Sort);
    assert_eq!(kind_of(&format!("{head}f x -> - x\n")).0, ErrorKind::Syntax);
}

#[test]
fn printing_fixtures_round_trips() {
    for f in ["sum.lcstrs", "factorial.lcstrs", "map.lcstrs", "filter.lcstrs", "loop.lcstrs", "sum-params.lcstrs"] {
        let p = parse(&read(f)).unwrap();
        let printed = print_problem(&p);
        let q = parse(&printed).unwrap_or_else(|e| panic!("{f}: {e}\n{printed}"));
        assert_eq!(print_problem(&q), printed, "{f}");
        let rules: Vec<_> = p.rules.iter().map(|r| &r.rule).collect();
        let again: Vec<_> = q.rules.iter().map(|r| &r.rule).collect();
        assert_eq!(rules, again, "{f}");
    }
}

#[test]
fn params_round_trip() {
    let text = "theory int\nf : Int -> Int -> Int\ng : Int -> Int\nh : Int\nparams {\n  f ~ g > h, f > (*)\n  pi(f) = {2}\n  pi(g) = {}\n}\n";
    let p = parse(text).unwrap();
    let printed = print_params(p.params.as_ref().unwrap());
    let q = parse_params(&printed, &p).unwrap();
    assert_eq!(print_params(&q), printed);
    assert_eq!(q.filter, p.params.as_ref().unwrap().filter);
}

/// Every term up to seven nodes over a theory signature prints to text that parses back to it.
#[test]
fn every_small_term_round_trips() {
    let int = Type::base(Sort::int());
    let boolean = Type::base(Sort::bool());
    let mut syms: Vec<Symbol> = TheoryOp::ALL.iter().map(|op| op.symbol()).collect();
    syms.push(Symbol::plain("f", Type::arrow(int.clone(), int.clone())));
    for v in [Value::Int(0), Value::Int(-1), Value::Int(3), Value::Bool(true)] {
        syms.push(Symbol::value(v));
    }
    let pool = VariablePool::new(vec![Var::new("x", int.clone()), Var::new("b", boolean)]);
    let terms: Vec<_> = enumerate_by_size(&syms, &pool, 7).into_iter().flatten().collect();
    assert!(terms.len() > 1000);
    let mut text = String::from("theory int\nf : Int -> Int\nvar x : Int\nvar b : Bool\n");
    for t in &terms {
        text.push_str(&format!("{t} -> {t}\n"));
    }
    let p = parse(&text).unwrap();
    assert_eq!(p.rules.len(), terms.len());
    for (t, r) in terms.iter().zip(&p.rules) {
        assert_eq!(&r.rule.lhs, t, "printed as `{t}`");
    }
}

#[test]
fn check_with_empty_precedence_names_the_failing_rule() {
    let (code, out, _) = run(&["check", &path("sum.lcstrs"), "--params", &path("bad.params")]);
    assert_eq!(code, 1);
    assert!(out.contains("rule 2 (strict): sum x -> x + sum (x - 1) [x > 0]\n  FAILED"), "{out}");
}

#[test]
fn sidecar_wins_over_inline_params_with_a_warning() {
    let (code, _, err) = run(&["check", &path("sum-params.lcstrs")]);
    assert_eq!(code, 0, "{err}");
    let (code, _, err) = run(&["check", &path("sum-params.lcstrs"), "--params", &path("bad.params")]);
    assert_eq!(code, 1);
    assert!(err.contains("warning:"), "{err}");
}

#[test]
fn orient_sum_prints_precedence_and_clauses() {
    let (code, out, err) = run(&["orient", &path("sum.lcstrs")]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("precedence: sum > +"), "{out}");
    assert!(out.contains("rule 2 (strict)") && out.contains("≻≻Copy"), "{out}");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["orient", &path("loop.lcstrs")]).0, 1);
    assert_eq!(run(&["orient", &path("missing.lcstrs")]).0, 2);
    assert_eq!(run(&["check", &path("sum.lcstrs")]).0, 2, "no parameters anywhere");
    assert_eq!(run(&["explain", &path("sum.lcstrs"), "--rule", "3"]).0, 2);
    assert_eq!(run(&["orient", &path("sum.lcstrs"), "--mode", "bogus"]).0, 2);
    assert_eq!(run(&["selftest", "--universe-size", "13"]).0, 2, "universe above the cap");
    assert_eq!(run(&["explain", &path("sum.lcstrs"), "--rule", "2"]).0, 0);
    let (code, out, _) = run(&["explain", &path("sum.lcstrs"), "--rule", "2", "--params", &path("bad.params")]);
    assert_eq!(code, 1);
    assert!(out.contains("FAILED: no ≻≻ clause applies"));
}

#[test]
fn bad_input_files_exit_with_2_and_position() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.lcstrs");
    std::fs::write(&file, "theory int\nsum : Int -> Int -> Int\nvar x : Int\nsum x x -> sum x\n").unwrap();
    let (code, _, err) = run(&["check", file.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("bad.lcstrs:4:9: arity error"), "{err}");
}

#[test]
fn budget_exhaustion_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("hard.lcstrs");
    std::fs::write(
        &file,
        "theory none\nsort o\na : o\nb : o\nc : o -> o\nd : o\nc a -> b\nb -> d\nd -> c a\nc b -> a\n",
    )
    .unwrap();
    let (code, out, _) = run(&["orient", file.to_str().unwrap(), "--budget-nodes", "1"]);
    assert_eq!(code, 3, "{out}");
}

#[test]
fn records_are_byte_identical_across_runs() {
    for args in [
        vec!["orient", "--format", "records"],
        vec!["explain", "--rule", "2", "--format", "records", "--seed", "3"],
    ] {
        let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        full.insert(1, path("sum.lcstrs"));
        let full: Vec<&str> = full.iter().map(String::as_str).collect();
        let (c1, a, _) = run(&full);
        let (c2, b, _) = run(&full);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(a, b);
        assert!(a.lines().all(|l| l.starts_with("type=")), "{a}");
    }
    let (_, out, _) = run(&["selftest", "--universe-size", "3", "--format", "records"]);
    let (_, again, _) = run(&["selftest", "--universe-size", "3", "--format", "records"]);
    assert_eq!(out, again);
    assert!(out.contains("type=summary command=selftest status=pass"));
}

#[test]
fn selftest_passes_at_size_4() {
    let (code, out, _) = run(&["selftest", "--universe-size", "4"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.matches("engine agreement").count(), 6);
    assert!(!out.contains("FAIL"));
}
