use super::*;
use crate::order::Horpo;
use crate::terms::{Sort, Type, Value};
use crate::theory::{int, BoundedBackend, SmtMode, TheoryOp};

fn ity() -> Type {
    Type::base(Sort::int())
}

fn x() -> Var {
    Var::new("x", ity())
}

fn tx() -> Term {
    Term::var(x())
}

fn sum() -> Symbol {
    Symbol::plain("sum", Type::arrow(ity(), ity()))
}

fn sum_of(t: Term) -> Term {
    Term::app(Term::sym(sum()), t).unwrap()
}

fn plus(a: Term, b: Term) -> Term {
    TheoryOp::Add.apply([a, b])
}

fn minus(a: Term, b: Term) -> Term {
    TheoryOp::Sub.apply([a, b])
}

fn gt0() -> Constraint {
    Constraint::new(TheoryOp::Gt.apply([tx(), int(0)])).unwrap()
}

fn sum_params() -> HorpoParams {
    let prec = Precedence::new().greater_than(&sum(), &TheoryOp::Add.symbol()).unwrap();
    HorpoParams::new(prec, ArgumentFilter::full())
}

fn entailer() -> Entailer {
    Entailer::new(BoundedBackend::finite(-64, 64), SmtMode::Off, None)
}

struct Fixture {
    params: HorpoParams,
    values: ValueOrder,
    entailer: Entailer,
}

impl Fixture {
    fn new() -> Fixture {
        Fixture {
            params: sum_params(),
            values: ValueOrder::default(),
            entailer: entailer(),
        }
    }

    fn engine(&self, phi: Constraint, lvars: LVarSet) -> ConstrainedHorpo<'_> {
        ConstrainedHorpo::new(&self.params, &self.values, &self.entailer, Fidelity::Sound, phi, lvars).unwrap()
    }

    fn replayed(&self, h: &ConstrainedHorpo<'_>, d: Option<Arc<CDerivation>>) -> Arc<CDerivation> {
        let d = d.expect("derivation");
        d.replay(&self.params, &self.values, &self.entailer, Fidelity::Sound, h.phi(), h.lvars())
            .unwrap();
        d
    }
}

fn lx() -> LVarSet {
    LVarSet::new([x()]).unwrap()
}

#[test]
fn geq_examples() {
    let fx = Fixture::new();
    let h = fx.engine(Constraint::truth(), LVarSet::empty());
    let d = fx.replayed(&h, h.geq(&plus(int(1), int(2)), &int(3)));
    assert_eq!(d.rule, CRule::GeqEq);
    let d = fx.replayed(&h, h.geq(&tx(), &tx()));
    assert_eq!(d.rule, CRule::GeqEq);

    let h = fx.engine(gt0(), lx());
    let d = fx.replayed(&h, h.geq(&tx(), &minus(tx(), int(1))));
    assert_eq!(d.rule, CRule::GeqTheory);
    assert!(d.certificate.as_ref().unwrap().verdict.is_valid());
}

#[test]
fn gt_examples() {
    let fx = Fixture::new();
    let x1 = minus(tx(), int(1));
    let h = fx.engine(gt0(), lx());
    assert_eq!(fx.replayed(&h, h.gt(&tx(), &x1)).rule, CRule::GtTheory);

    let h_true = fx.engine(Constraint::truth(), lx());
    assert!(h_true.gt(&tx(), &x1).is_none());

    let d = fx.replayed(&h, h.gt(&sum_of(tx()), &sum_of(x1.clone())));
    assert_eq!(d.rule, CRule::GtArgs);
    assert_eq!(d.premises.len(), 1);
    assert_eq!(d.premises[0].rule, CRule::GeqGreater);
    assert_eq!(d.premises[0].premises[0].rule, CRule::GtTheory);
}

#[test]
fn rpo_examples() {
    let fx = Fixture::new();
    let h = fx.engine(gt0(), lx());
    let s = sum_of(tx());
    assert_eq!(fx.replayed(&h, h.rpo(&s, &tx())).rule, CRule::RpoTh);

    let rhs = plus(tx(), sum_of(minus(tx(), int(1))));
    let d = fx.replayed(&h, h.rpo(&s, &rhs));
    assert_eq!(d.rule, CRule::RpoCopy);
    assert_eq!(d.premises[0].rule, CRule::RpoTh);
    assert_eq!((d.premises[1].rule, d.premises[1].index), (CRule::RpoLex, Some(1)));
    assert_eq!(d.premises[1].premises[0].rule, CRule::GtTheory);

    let h = fx.engine(Constraint::truth(), lx());
    assert!(h.rpo(&s, &plus(s.clone(), int(1))).is_none());
    assert!(h.gt(&s, &plus(s.clone(), int(1))).is_none());
}

#[test]
fn theory_terms_have_no_rpo_step() {
    let fx = Fixture::new();
    let h = fx.engine(gt0(), lx());
    assert!(h.rpo(&plus(tx(), int(1)), &tx()).is_none());
}

#[test]
fn lvars_restrict_theory_steps() {
    let fx = Fixture::new();
    let h = fx.engine(gt0(), LVarSet::empty());
    assert!(h.gt(&tx(), &minus(tx(), int(1))).is_none());
    assert!(h.rpo(&sum_of(tx()), &tx()).is_some_and(|d| d.rule != CRule::RpoTh));
}

#[test]
fn tampered_certificate_fails_replay() {
    let fx = Fixture::new();
    let h = fx.engine(gt0(), lx());
    let mut d = (*h.gt(&tx(), &minus(tx(), int(1))).unwrap()).clone();
    let mut c = d.certificate.clone().unwrap();
    c.goal = Constraint::truth();
    d.certificate = Some(c);
    assert!(d
        .replay(&fx.params, &fx.values, &fx.entailer, Fidelity::Sound, h.phi(), h.lvars())
        .is_err());

    let d = h.gt(&tx(), &minus(tx(), int(1))).unwrap();
    assert!(d
        .replay(&fx.params, &fx.values, &fx.entailer, Fidelity::Sound, &Constraint::truth(), h.lvars())
        .is_err());
}

#[test]
fn geq_contains_gt() {
    let fx = Fixture::new();
    let h = fx.engine(gt0(), lx());
    let y = Term::var(Var::new("y", ity()));
    let terms = [
        tx(),
        y.clone(),
        int(0),
        int(3),
        minus(tx(), int(1)),
        plus(tx(), int(1)),
        sum_of(tx()),
        sum_of(minus(tx(), int(1))),
        sum_of(y.clone()),
        plus(tx(), sum_of(minus(tx(), int(1)))),
    ];
    for s in &terms {
        for t in &terms {
            if h.gt(s, t).is_some() {
                assert!(h.geq(s, t).is_some(), "{s} ≻ {t} without ⪰");
            }
        }
    }
}

#[test]
fn theory_symbols_must_be_unfiltered() {
    let mut params = sum_params();
    params.filter.set(&TheoryOp::Add.symbol(), [1]).unwrap();
    let values = ValueOrder::default();
    let e = entailer();
    assert!(ConstrainedHorpo::new(&params, &values, &e, Fidelity::Sound, Constraint::truth(), LVarSet::empty()).is_err());
}

#[test]
fn unknown_entailment_blocks_theory_clause() {
    let params = sum_params();
    let values = ValueOrder::default();
    let e = Entailer::new(BoundedBackend::sampled(16), SmtMode::Off, None);
    let y = Var::new("y", ity());
    let yt = Term::var(y.clone());
    // Valid, but the sampled backend can only refute.
    let phi = Constraint::new(TheoryOp::Gt.apply([tx(), yt.clone()]))
        .unwrap()
        .and(&Constraint::new(TheoryOp::Ge.apply([yt.clone(), int(0)])).unwrap());
    let l = LVarSet::new([x(), y]).unwrap();
    let h = ConstrainedHorpo::new(&params, &values, &e, Fidelity::Sound, phi, l).unwrap();
    assert!(h.gt(&tx(), &yt).is_none());
    assert_eq!(h.blocked().len(), 1);
}

#[test]
fn extended_precedence_puts_symbols_above_values() {
    let base = sum_params().precedence;
    let values = ValueOrder::default();
    let ext = ExtendedPrecedence::new(&base, &values);
    let v = |n| Symbol::value(Value::Int(n));
    assert_eq!(ext.compare(&sum(), &v(5)), PrecCmp::Greater);
    assert_eq!(ext.compare(&TheoryOp::Add.symbol(), &v(-3)), PrecCmp::Greater);
    assert_eq!(ext.compare(&v(3), &v(2)), PrecCmp::Greater);
    assert_eq!(ext.compare(&v(-1), &v(-2)), PrecCmp::Equivalent);
    assert_eq!(ext.compare(&v(0), &v(-2)), PrecCmp::Greater);
    assert_eq!(ext.compare(&v(0), &Symbol::value(Value::Bool(true))), PrecCmp::Incomparable);
    assert_eq!(ext.compare(&v(0), &v(0)), PrecCmp::Equivalent);
}

#[test]
fn extended_precedence_is_acyclic_on_bounded_values() {
    let base = sum_params().precedence;
    let values = ValueOrder::default();
    let ext = ExtendedPrecedence::new(&base, &values);
    let mut syms: Vec<Symbol> = (-16..=16).map(|n| Symbol::value(Value::Int(n))).collect();
    syms.extend([true, false].map(|b| Symbol::value(Value::Bool(b))));
    syms.push(sum());
    syms.extend(TheoryOp::ALL.map(TheoryOp::symbol));
    let n = syms.len();
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            reach[i][j] = ext.greater(&syms[i], &syms[j]);
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    assert!((0..n).all(|i| !reach[i][i]));
}

fn judgment(s: Term, t: Term, phi: Constraint, lvars: LVarSet, rel: CRel) -> ConstrainedJudgment {
    ConstrainedJudgment { s, t, phi, lvars, rel }
}

#[test]
fn coverage_of_sum_rule() {
    let fx = Fixture::new();
    let rhs = plus(tx(), sum_of(minus(tx(), int(1))));
    for rel in [CRel::Rpo, CRel::Gt, CRel::Geq] {
        let j = judgment(sum_of(tx()), rhs.clone(), gt0(), lx(), rel);
        let r = check_coverage(&j, &fx.params, &fx.values, &fx.entailer, Fidelity::Sound, 100, 16, 7);
        match r.outcome {
            CoverageOutcome::Checked { samples, violations, .. } => {
                assert_eq!(samples, 100);
                assert_eq!(violations, 0);
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn coverage_of_false_constraint_is_vacuous() {
    let fx = Fixture::new();
    let j = judgment(tx(), tx(), Constraint::falsity(), lx(), CRel::Geq);
    let r = check_coverage(&j, &fx.params, &fx.values, &fx.entailer, Fidelity::Sound, 100, 16, 0);
    assert_eq!(r.outcome, CoverageOutcome::Vacuous);
}

#[test]
fn coverage_of_theory_decrease() {
    let fx = Fixture::new();
    let j = judgment(tx(), minus(tx(), int(1)), gt0(), lx(), CRel::Gt);
    let r = check_coverage(&j, &fx.params, &fx.values, &fx.entailer, Fidelity::Sound, 100, 16, 3);
    assert!(matches!(r.outcome, CoverageOutcome::Checked { violations: 0, .. }));

    let ext = ExtendedPrecedence::new(&fx.params.precedence, &fx.values);
    let h = Horpo::with_order(&ext, &fx.params.filter, Fidelity::Sound);
    for n in 1..=16 {
        assert!(h.gt(&int(n), &int(n - 1)).is_some());
    }
}

#[test]
fn coverage_reports_unestablished_judgments() {
    let fx = Fixture::new();
    let j = judgment(tx(), minus(tx(), int(1)), Constraint::truth(), lx(), CRel::Gt);
    let r = check_coverage(&j, &fx.params, &fx.values, &fx.entailer, Fidelity::Sound, 10, 16, 0);
    assert_eq!(r.outcome, CoverageOutcome::NotEstablished);
}

#[test]
fn coverage_with_higher_order_variable() {
    let fx = Fixture::new();
    let f = Var::new("F", Type::arrow(ity(), ity()));
    let ft = |a: Term| Term::app(Term::var(f.clone()), a).unwrap();
    let j = judgment(ft(tx()), ft(minus(tx(), int(1))), gt0(), lx(), CRel::Gt);
    let h = fx.engine(gt0(), lx());
    assert!(h.gt(&j.s, &j.t).is_none());
    let j = judgment(ft(tx()), ft(tx()), gt0(), lx(), CRel::Geq);
    let r = check_coverage(&j, &fx.params, &fx.values, &fx.entailer, Fidelity::Sound, 100, 16, 1);
    assert_eq!(r.violations(), 0);
}

#[test]
fn calculation_is_contained_in_weak_relation() {
    let terms = ground_theory_terms(200);
    assert_eq!(terms.len(), 200);
    let params = HorpoParams::new(Precedence::new(), ArgumentFilter::full());
    let r = calc_containment(&terms, &params, &ValueOrder::default(), Fidelity::Sound);
    assert!(r.checked >= 200);
    assert!(r.failures.is_empty(), "{:?}", r.failures.first());
}
