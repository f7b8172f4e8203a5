use super::*;
use crate::terms::{Sort, Type, Var};
use proptest::prelude::*;

fn iota() -> Type {
    Type::base(Sort::new("o").unwrap())
}

struct E1 {
    f: Symbol,
    g: Symbol,
    a: Symbol,
    b: Symbol,
}

fn e1() -> E1 {
    E1 {
        f: Symbol::plain("f", Type::arrows([iota(), iota()], iota())),
        g: Symbol::plain("g", Type::arrow(iota(), iota())),
        a: Symbol::plain("a", iota()),
        b: Symbol::plain("b", iota()),
    }
}

fn params(e: &E1) -> HorpoParams {
    let prec = Precedence::new()
        .greater_than(&e.f, &e.g)
        .unwrap()
        .greater_than(&e.g, &e.a)
        .unwrap()
        .equivalent_to(&e.a, &e.b)
        .unwrap();
    HorpoParams::new(prec, ArgumentFilter::full())
}

fn app(h: &Symbol, args: &[Term]) -> Term {
    Term::apply(Term::sym(h.clone()), args.iter().cloned()).unwrap()
}

fn c(h: &Symbol) -> Term {
    Term::sym(h.clone())
}

fn check(d: &Option<Arc<Derivation>>, p: &HorpoParams, fid: Fidelity) -> Rule {
    let d = d.as_ref().expect("derivation");
    d.replay(&p.precedence, &p.filter, fid).unwrap();
    d.rule
}

#[test]
fn approx_examples() {
    let e = e1();
    let p = params(&e);
    let h = Horpo::new(&p, Fidelity::Sound);
    assert_eq!(check(&h.approx(&c(&e.a), &c(&e.a)), &p, Fidelity::Sound), Rule::EqArgs);
    assert_eq!(check(&h.approx(&c(&e.a), &c(&e.b)), &p, Fidelity::Sound), Rule::EqArgs);

    let mut p2 = p.clone();
    p2.filter.set(&e.g, []).unwrap();
    let h2 = Horpo::new(&p2, Fidelity::Sound);
    let ga = app(&e.g, &[c(&e.a)]);
    let gb = app(&e.g, &[c(&e.b)]);
    let d = h2.approx(&ga, &gb);
    assert_eq!(check(&d, &p2, Fidelity::Sound), Rule::EqArgs);
    assert!(d.unwrap().premises.is_empty());
}

#[test]
fn geq_examples() {
    let e = e1();
    let p = params(&e);
    let h = Horpo::new(&p, Fidelity::Sound);
    let a = c(&e.a);
    let ga = app(&e.g, &[a.clone()]);
    assert_eq!(check(&h.geq(&a, &a), &p, Fidelity::Sound), Rule::EqArgs);
    let d = h.geq(&ga, &a).unwrap();
    assert_eq!(d.rule, Rule::GrRpo);
    assert_eq!(d.premises[0].rule, Rule::RpoSelect);
    assert!(h.geq(&a, &ga).is_none());
}

#[test]
fn gt_examples() {
    let e = e1();
    let p = params(&e);
    let h = Horpo::new(&p, Fidelity::Sound);
    let (a, b) = (c(&e.a), c(&e.b));
    let ga = app(&e.g, &[a.clone()]);
    let x = Term::var(Var::new("x", Type::arrow(iota(), iota())));
    let s = Term::app(x.clone(), ga.clone()).unwrap();
    let t = Term::app(x.clone(), a.clone()).unwrap();
    assert_eq!(check(&h.gt(&s, &t), &p, Fidelity::Sound), Rule::GrMono);

    let s = app(&e.f, &[ga.clone(), b.clone()]);
    let t = app(&e.f, &[a.clone(), b.clone()]);
    assert_eq!(check(&h.gt(&s, &t), &p, Fidelity::Sound), Rule::GrArgs);

    let y = Term::var(Var::new("y", iota()));
    assert!(h.gt(&y, &y).is_none());
}

#[test]
fn rpo_examples() {
    let e = e1();
    let p = params(&e);
    let h = Horpo::new(&p, Fidelity::Sound);
    let (a, b) = (c(&e.a), c(&e.b));
    let ga = app(&e.g, &[a.clone()]);

    let fab = app(&e.f, &[a.clone(), b.clone()]);
    let d = h.rpo_gt(&fab, &ga).unwrap();
    assert_eq!(d.rule, Rule::RpoCopy);
    assert_eq!(d.premises[0].rule, Rule::RpoSelect);
    d.replay(&p.precedence, &p.filter, Fidelity::Sound).unwrap();

    let s = app(&e.f, &[ga.clone(), b.clone()]);
    let t = app(&e.f, &[a.clone(), b.clone()]);
    let d = h.rpo_gt(&s, &t).unwrap();
    assert_eq!((d.rule, d.index), (Rule::RpoLex, Some(1)));
    assert_eq!(d.premises.len(), 2);
    assert_eq!(d.premises[1].rhs, b);
    d.replay(&p.precedence, &p.filter, Fidelity::Sound).unwrap();

    let faa = app(&e.f, &[a.clone(), a.clone()]);
    assert!(h.rpo_gt(&ga, &faa).is_none());
}

#[test]
fn guard_blocks_partial_application_with_filtered_missing_argument() {
    let e = e1();
    let mut p = params(&e);
    let fa = app(&e.f, &[c(&e.a)]);
    let h = Horpo::new(&p, Fidelity::Sound);
    assert!(h.rpo_gt(&fa, &c(&e.g)).is_some());
    p.filter.set(&e.f, [1]).unwrap();
    let h = Horpo::new(&p, Fidelity::Sound);
    assert!(h.rpo_gt(&fa, &c(&e.g)).is_none());
}

#[test]
fn application_clause_modes_differ_on_head() {
    // f a ⊐⊐ x a needs f a ⊐⊐ x in sound mode, which fails.
    let e = e1();
    let p = params(&e);
    let x = Term::var(Var::new("x", Type::arrow(iota(), iota())));
    let s = app(&e.f, &[c(&e.a), c(&e.b)]);
    let t = Term::app(x, c(&e.a)).unwrap();
    let sound = Horpo::new(&p, Fidelity::Sound);
    let paper = Horpo::new(&p, Fidelity::Paper);
    assert!(sound.rpo_gt(&s, &t).is_none());
    let d = paper.rpo_gt(&s, &t).unwrap();
    assert_eq!(d.rule, Rule::RpoAppl);
    d.replay(&p.precedence, &p.filter, Fidelity::Paper).unwrap();
    assert!(d.replay(&p.precedence, &p.filter, Fidelity::Sound).is_err());
}

#[test]
fn tampered_derivations_fail_replay() {
    let e = e1();
    let p = params(&e);
    let h = Horpo::new(&p, Fidelity::Sound);
    let ga = app(&e.g, &[c(&e.a)]);
    let fab = app(&e.f, &[c(&e.a), c(&e.b)]);
    let d = (*h.rpo_gt(&fab, &ga).unwrap()).clone();

    let mut wrong_rule = d.clone();
    wrong_rule.rule = Rule::RpoLex;
    wrong_rule.index = Some(1);
    assert!(wrong_rule.replay(&p.precedence, &p.filter, Fidelity::Sound).is_err());

    let mut wrong_rhs = d.clone();
    wrong_rhs.rhs = app(&e.g, &[c(&e.b)]);
    assert!(wrong_rhs.replay(&p.precedence, &p.filter, Fidelity::Sound).is_err());

    let reversed = HorpoParams::new(
        Precedence::new().greater_than(&e.g, &e.f).unwrap(),
        ArgumentFilter::full(),
    );
    assert!(d.replay(&reversed.precedence, &reversed.filter, Fidelity::Sound).is_err());
}

fn term_strategy(e: &E1) -> impl Strategy<Value = Term> {
    let x = Var::new("x", iota());
    let leaves = vec![c(&e.a), c(&e.b), Term::var(x)];
    let (f, g) = (e.f.clone(), e.g.clone());
    let leaf = proptest::sample::select(leaves);
    leaf.prop_recursive(3, 12, 2, move |inner| {
        let (f, g) = (f.clone(), g.clone());
        prop_oneof![
            inner.clone().prop_map(move |u| app(&g, &[u])),
            (inner.clone(), inner).prop_map(move |(u, v)| app(&f, &[u, v])),
        ]
    })
}

fn filters() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (
        proptest::sample::subsequence(vec![1usize, 2], 0..=2),
        proptest::sample::subsequence(vec![1usize], 0..=1),
    )
}

proptest! {
    #[test]
    fn filtered_arguments_are_ignored(
        (pf, pg) in filters(),
        s1 in term_strategy(&e1()),
        s2 in term_strategy(&e1()),
        repl in term_strategy(&e1()),
        t in term_strategy(&e1()),
    ) {
        let e = e1();
        let mut p = params(&e);
        p.filter.set(&e.f, pf.clone()).unwrap();
        p.filter.set(&e.g, pg).unwrap();
        let h = Horpo::new(&p, Fidelity::Sound);
        for i in 1..=2 {
            if pf.contains(&i) {
                continue;
            }
            let orig = app(&e.f, &[s1.clone(), s2.clone()]);
            let changed = if i == 1 {
                app(&e.f, &[repl.clone(), s2.clone()])
            } else {
                app(&e.f, &[s1.clone(), repl.clone()])
            };
            for rel in [Rel::Approx, Rel::Geq, Rel::Gt] {
                prop_assert_eq!(h.holds(&orig, &t, rel), h.holds(&changed, &t, rel));
                prop_assert_eq!(h.holds(&t, &orig, rel), h.holds(&t, &changed, rel));
            }
        }
    }

    #[test]
    fn evaluation_is_deterministic(s in term_strategy(&e1()), t in term_strategy(&e1())) {
        let e = e1();
        let p = params(&e);
        for rel in [Rel::Approx, Rel::Geq, Rel::Gt, Rel::Rpo] {
            let first = Horpo::new(&p, Fidelity::Sound).relate(&s, &t, rel);
            let again = Horpo::new(&p, Fidelity::Sound).relate(&s, &t, rel);
            prop_assert_eq!(&first, &again);
            if let Some(d) = first {
                prop_assert!(d.replay(&p.precedence, &p.filter, Fidelity::Sound).is_ok());
            }
        }
    }
}
