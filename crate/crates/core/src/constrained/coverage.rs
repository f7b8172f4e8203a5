use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ConstrainedHorpo, ConstrainedJudgment, CRel, ExtendedPrecedence};
use crate::order::{Fidelity, Horpo, HorpoParams, Rel};
use crate::terms::{enumerate_by_size, Sort, Substitution, Symbol, Term, Value, Var, VariablePool};
use crate::theory::{calc_normalize, calc_step, respects, Entailer, TheoryOp, ValueOrder};

const ENUMERATION_CAP: u64 = 1 << 16;
const TRIES_PER_SAMPLE: usize = 1000;
const KEPT_COUNTEREXAMPLES: usize = 5;
/// Node-count bound for terms substituted for variables outside `L`.
const FILLER_SIZE: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub gamma: Substitution,
    pub lhs: Term,
    pub rhs: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverageOutcome {
    /// No substitution within the bound respects the constraint.
    Vacuous,
    /// The engine does not accept the judgment.
    NotEstablished,
    Checked {
        samples: usize,
        violations: usize,
        counterexamples: Vec<Counterexample>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageReport {
    pub judgment: ConstrainedJudgment,
    pub outcome: CoverageOutcome,
}

impl CoverageReport {
    pub fn violations(&self) -> usize {
        match &self.outcome {
            CoverageOutcome::Checked { violations, .. } => *violations,
            _ => 0,
        }
    }
}

fn unconstrained(rel: CRel) -> Rel {
    match rel {
        CRel::Geq => Rel::Geq,
        CRel::Gt => Rel::Gt,
        CRel::Rpo => Rel::Rpo,
    }
}

fn domain(x: &Var, bound: i64) -> Vec<Value> {
    match x.ty().as_sort() {
        Some(s) if *s == Sort::bool() => vec![Value::Bool(false), Value::Bool(true)],
        _ => (-bound..=bound).map(Value::Int).collect(),
    }
}

/// A ground theory term that calculates to `v`.
fn disguise(v: &Value, rng: &mut ChaCha8Rng) -> Term {
    let t = Term::value(*v);
    match v {
        Value::Int(_) if rng.gen_bool(0.25) => {
            let k = Term::value(Value::Int(rng.gen_range(-3..=3)));
            TheoryOp::Sub.apply([TheoryOp::Add.apply([t, k.clone()]), k])
        }
        Value::Bool(_) if rng.gen_bool(0.25) => TheoryOp::Not.apply([TheoryOp::Not.apply([t])]),
        _ => t,
    }
}

/// `samples` value assignments to `ground` respecting the judgment; empty if none exists within the bound.
fn solutions(
    ground: &[Var],
    j: &ConstrainedJudgment,
    bound: i64,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<Value>> {
    let domains: Vec<Vec<Value>> = ground.iter().map(|x| domain(x, bound)).collect();
    let satisfies = |vals: &[Value]| {
        let mut gamma = Substitution::new();
        for (x, v) in ground.iter().zip(vals) {
            gamma.insert(x.clone(), Term::value(*v)).expect("sorts match");
        }
        respects(&gamma, &j.phi, &j.lvars).unwrap_or(false)
    };
    let product = domains
        .iter()
        .try_fold(1u64, |acc, d| acc.checked_mul(d.len() as u64))
        .unwrap_or(u64::MAX);
    let mut found = Vec::new();
    if product <= ENUMERATION_CAP {
        let mut idx = vec![0usize; domains.len()];
        loop {
            let vals: Vec<Value> = idx.iter().zip(&domains).map(|(&i, d)| d[i]).collect();
            if satisfies(&vals) {
                found.push(vals);
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < domains[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
        if found.is_empty() {
            return found;
        }
        return (0..samples).map(|_| found.choose(rng).expect("nonempty").clone()).collect();
    }
    for _ in 0..samples * TRIES_PER_SAMPLE {
        let vals: Vec<Value> = domains.iter().map(|d| *d.choose(rng).expect("nonempty")).collect();
        if satisfies(&vals) {
            found.push(vals);
            if found.len() == samples {
                break;
            }
        }
    }
    found
}

/// Draws substitutions respecting `(φ, L)` and checks that the calculated
/// instances are related by the unconstrained relation under the precedence
/// extended with values. Values for `Var(φ) ∪ L` come from `[-bound, bound]`;
/// other variables stay, or become small terms over the symbols of both sides.
#[allow(clippy::too_many_arguments)]
pub fn check_coverage(
    j: &ConstrainedJudgment,
    params: &HorpoParams,
    values: &ValueOrder,
    entailer: &Entailer,
    fidelity: Fidelity,
    samples: usize,
    bound: i64,
    seed: u64,
) -> CoverageReport {
    let report = |outcome| CoverageReport {
        judgment: j.clone(),
        outcome,
    };
    let Ok(engine) = ConstrainedHorpo::new(params, values, entailer, fidelity, j.phi.clone(), j.lvars.clone()) else {
        return report(CoverageOutcome::NotEstablished);
    };
    if engine.relate(&j.s, &j.t, j.rel).is_none() {
        return report(CoverageOutcome::NotEstablished);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ground: Vec<Var> = j.phi.vars().into_iter().chain(j.lvars.iter().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
    let draws = solutions(&ground, j, bound, samples, &mut rng);
    if draws.is_empty() {
        return report(CoverageOutcome::Vacuous);
    }

    let mut others: BTreeSet<Var> = j.s.vars();
    others.extend(j.t.vars());
    let others: Vec<Var> = others.into_iter().filter(|x| !ground.contains(x)).collect();
    let fillers = filler_terms(j, &others);

    let ext = ExtendedPrecedence::new(&params.precedence, values);
    let horpo = Horpo::with_order(&ext, &params.filter, fidelity);
    let rel = unconstrained(j.rel);
    let mut violations = 0;
    let mut counterexamples = Vec::new();
    for vals in &draws {
        let mut gamma = Substitution::new();
        for (x, v) in ground.iter().zip(vals) {
            gamma.insert(x.clone(), disguise(v, &mut rng)).expect("sorts match");
        }
        for (x, pool) in others.iter().zip(&fillers) {
            if !pool.is_empty() && rng.gen_bool(0.5) {
                gamma.insert(x.clone(), pool.choose(&mut rng).expect("nonempty").clone()).expect("typed pool");
            }
        }
        let (Ok(ls), Ok(rs)) = (calc_normalize(&gamma.apply(&j.s)), calc_normalize(&gamma.apply(&j.t))) else {
            continue;
        };
        if !horpo.holds(&ls, &rs, rel) {
            violations += 1;
            if counterexamples.len() < KEPT_COUNTEREXAMPLES {
                counterexamples.push(Counterexample { gamma, lhs: ls, rhs: rs });
            }
        }
    }
    report(CoverageOutcome::Checked {
        samples: draws.len(),
        violations,
        counterexamples,
    })
}

/// For each variable, the small terms of its type over the judgment's symbols.
fn filler_terms(j: &ConstrainedJudgment, vars: &[Var]) -> Vec<Vec<Term>> {
    if vars.is_empty() {
        return Vec::new();
    }
    let mut symbols: BTreeSet<String> = BTreeSet::new();
    let mut syms: Vec<Symbol> = Vec::new();
    for f in j.s.symbols().into_iter().chain(j.t.symbols()) {
        if symbols.insert(f.name().to_string()) {
            syms.push(f);
        }
    }
    for v in [Value::Int(0), Value::Int(1)] {
        if symbols.insert(v.to_string()) {
            syms.push(Symbol::value(v));
        }
    }
    let pool = VariablePool::new(vars.to_vec());
    let universe: Vec<Term> = enumerate_by_size(&syms, &pool, FILLER_SIZE).into_iter().flatten().collect();
    vars.iter()
        .map(|x| universe.iter().filter(|t| t.ty() == x.ty()).cloned().collect())
        .collect()
}

/// The first `count` ground theory terms of base type by node count, over
/// the operators and a few small values, skipping terms that fail to evaluate.
pub fn ground_theory_terms(count: usize) -> Vec<Term> {
    let mut syms: Vec<Symbol> = TheoryOp::ALL.iter().map(|op| op.symbol()).collect();
    for v in [Value::Int(0), Value::Int(1), Value::Int(-1), Value::Int(2), Value::Bool(true), Value::Bool(false)] {
        syms.push(Symbol::value(v));
    }
    let mut out = Vec::new();
    let mut size = 1;
    while out.len() < count && size <= 9 {
        let by_size = enumerate_by_size(&syms, &VariablePool::default(), size);
        out.clear();
        for t in by_size.into_iter().flatten() {
            if t.ty().is_base() && calc_normalize(&t).is_ok() {
                out.push(t);
            }
            if out.len() == count {
                break;
            }
        }
        size += 2;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContainmentReport {
    pub checked: usize,
    /// Pairs `(s, s')` with `s →κ s'` or `s' = s↓κ` and not `s ⊒ s'`.
    pub failures: Vec<(Term, Term)>,
}

/// Checks that every calculation step, and the full normalization, of each
/// term is contained in `⊒` under the precedence extended with values.
pub fn calc_containment(terms: &[Term], params: &HorpoParams, values: &ValueOrder, fidelity: Fidelity) -> ContainmentReport {
    let ext = ExtendedPrecedence::new(&params.precedence, values);
    let horpo = Horpo::with_order(&ext, &params.filter, fidelity);
    let mut failures = Vec::new();
    let mut checked = 0;
    for s in terms {
        let mut targets = Vec::new();
        if let Ok(nf) = calc_normalize(s) {
            targets.push(nf);
        }
        if let Some(Ok(step)) = calc_step(s) {
            targets.push(step);
        }
        for t in targets {
            checked += 1;
            if horpo.geq(s, &t).is_none() {
                failures.push((s.clone(), t));
            }
        }
    }
    ContainmentReport { checked, failures }
}
