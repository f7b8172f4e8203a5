//! The constrained relations `⪰`, `≻` and `≻≻` over terms with theory
//! symbols, the precedence extended with values, and coverage checking.

mod coverage;
mod replay;

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::order::{
    ArgumentFilter, Fidelity, HorpoParams, ParamError, PrecCmp, Precedence, SymbolOrder,
};
use crate::terms::{Symbol, Term, Var};
use crate::theory::{
    calc_normalize, is_theory_sort, Constraint, Entailer, LVarSet, RespectError, UnknownReason,
    ValueOrder, Verdict,
};

pub use coverage::{
    calc_containment, check_coverage, ground_theory_terms, ContainmentReport, CoverageOutcome,
    CoverageReport,
};
pub use replay::CReplayError;

/// The base precedence on non-value symbols, extended to values: every
/// non-value symbol is above every value, and values compare by the value order.
#[derive(Clone, Copy, Debug)]
pub struct ExtendedPrecedence<'a> {
    pub base: &'a Precedence,
    pub values: &'a ValueOrder,
}

impl<'a> ExtendedPrecedence<'a> {
    pub fn new(base: &'a Precedence, values: &'a ValueOrder) -> ExtendedPrecedence<'a> {
        ExtendedPrecedence { base, values }
    }
}

impl SymbolOrder for ExtendedPrecedence<'_> {
    fn compare(&self, f: &Symbol, g: &Symbol) -> PrecCmp {
        match (f.as_value(), g.as_value()) {
            (Some(v1), Some(v2)) => {
                if self.values.strict(v1, v2) {
                    PrecCmp::Greater
                } else if self.values.strict(v2, v1) {
                    PrecCmp::Smaller
                } else if v1 == v2
                    || (v1.sort() == v2.sort() && self.values.is_minimal(v1) && self.values.is_minimal(v2))
                {
                    PrecCmp::Equivalent
                } else {
                    PrecCmp::Incomparable
                }
            }
            (None, Some(_)) => PrecCmp::Greater,
            (Some(_), None) => PrecCmp::Smaller,
            (None, None) => self.base.compare(f, g),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CRel {
    Geq,
    Gt,
    Rpo,
}

impl fmt::Display for CRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CRel::Geq => "⪰",
            CRel::Gt => "≻",
            CRel::Rpo => "≻≻",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CRule {
    GeqTheory,
    GeqEq,
    GeqMono,
    GeqArgs,
    GeqGreater,
    GtTheory,
    GtArgs,
    GtRpo,
    RpoSelect,
    RpoAppl,
    RpoCopy,
    RpoLex,
    RpoTh,
}

impl CRule {
    pub fn name(self) -> &'static str {
        match self {
            CRule::GeqTheory => "⪰Theory",
            CRule::GeqEq => "⪰Eq",
            CRule::GeqMono => "⪰Mono",
            CRule::GeqArgs => "⪰Args",
            CRule::GeqGreater => "⪰Greater",
            CRule::GtTheory => "≻Theory",
            CRule::GtArgs => "≻Args",
            CRule::GtRpo => "≻Rpo",
            CRule::RpoSelect => "≻≻Select",
            CRule::RpoAppl => "≻≻Appl",
            CRule::RpoCopy => "≻≻Copy",
            CRule::RpoLex => "≻≻Lex",
            CRule::RpoTh => "≻≻Th",
        }
    }

    pub fn relation(self) -> CRel {
        match self {
            CRule::GeqTheory | CRule::GeqEq | CRule::GeqMono | CRule::GeqArgs | CRule::GeqGreater => CRel::Geq,
            CRule::GtTheory | CRule::GtArgs | CRule::GtRpo => CRel::Gt,
            _ => CRel::Rpo,
        }
    }
}

impl fmt::Display for CRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The entailment query that justified a Theory step.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Certificate {
    pub phi: Constraint,
    pub goal: Constraint,
    pub verdict: Verdict,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CDerivation {
    pub rule: CRule,
    pub lhs: Term,
    pub rhs: Term,
    pub index: Option<usize>,
    pub premises: Vec<Arc<CDerivation>>,
    pub certificate: Option<Certificate>,
}

impl CDerivation {
    pub fn relation(&self) -> CRel {
        self.rule.relation()
    }

    /// Outermost rule that is not a pure relation-inclusion step.
    pub fn principal(&self) -> &CDerivation {
        match self.rule {
            CRule::GeqGreater | CRule::GtRpo => self.premises[0].principal(),
            _ => self,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        out.push_str(&"  ".repeat(depth));
        out.push_str(&format!("{} {} {}  [{}", self.lhs, self.relation(), self.rhs, self.rule));
        if let Some(i) = self.index {
            out.push_str(&format!(" i={i}"));
        }
        if let Some(c) = &self.certificate {
            out.push_str(&format!("; {} ⊩ {}: {}", c.phi, c.goal, c.verdict));
        }
        out.push_str("]\n");
        for p in &self.premises {
            p.render_into(out, depth + 1);
        }
    }

    /// Every rule used anywhere in the tree, pre-order.
    pub fn rules(&self) -> Vec<CRule> {
        let mut out = vec![self.rule];
        for p in &self.premises {
            out.extend(p.rules());
        }
        out
    }
}

/// An entailment that came back unknown and therefore blocked a Theory clause.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BlockedQuery {
    pub goal: Constraint,
    pub reason: UnknownReason,
}

/// `(s, t, φ, L)` together with the requested relation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConstrainedJudgment {
    pub s: Term,
    pub t: Term,
    pub phi: Constraint,
    pub lvars: LVarSet,
    pub rel: CRel,
}

/// `Var(φ) ∪ (Var(rhs) ∖ Var(lhs))`.
pub fn default_lvars(lhs: &Term, rhs: &Term, phi: &Constraint) -> Result<LVarSet, RespectError> {
    let lv = lhs.vars();
    let mut vars: Vec<Var> = phi.vars().into_iter().collect();
    vars.extend(rhs.vars().into_iter().filter(|x| !lv.contains(x)));
    LVarSet::new(vars)
}

/// Parameters valid for the constrained setting: well-founded precedence,
/// theory symbols unfiltered.
pub fn check_params(params: &HorpoParams) -> Result<(), ParamError> {
    params.validate(true)
}

/// Decides the constrained relations for one fixed `(φ, L)`, memoizing
/// judgments. Confined to one thread.
pub struct ConstrainedHorpo<'a> {
    params: &'a HorpoParams,
    values: &'a ValueOrder,
    entailer: &'a Entailer,
    fidelity: Fidelity,
    phi: Constraint,
    lvars: LVarSet,
    memo: RefCell<HashMap<(Term, Term, CRel), Option<Arc<CDerivation>>>>,
    blocked: RefCell<Vec<BlockedQuery>>,
}

fn positions(filter: &ArgumentFilter, f: &Symbol, upto: usize) -> Vec<usize> {
    (1..=upto).filter(|&i| filter.regards(f, i)).collect()
}

impl<'a> ConstrainedHorpo<'a> {
    pub fn new(
        params: &'a HorpoParams,
        values: &'a ValueOrder,
        entailer: &'a Entailer,
        fidelity: Fidelity,
        phi: Constraint,
        lvars: LVarSet,
    ) -> Result<ConstrainedHorpo<'a>, ParamError> {
        check_params(params)?;
        Ok(ConstrainedHorpo {
            params,
            values,
            entailer,
            fidelity,
            phi,
            lvars,
            memo: RefCell::new(HashMap::new()),
            blocked: RefCell::new(Vec::new()),
        })
    }

    pub fn phi(&self) -> &Constraint {
        &self.phi
    }

    pub fn lvars(&self) -> &LVarSet {
        &self.lvars
    }

    /// Number of memoized judgments.
    pub fn memo_len(&self) -> usize {
        self.memo.borrow().len()
    }

    pub fn blocked(&self) -> Vec<BlockedQuery> {
        self.blocked.borrow().clone()
    }

    pub fn relate(&self, s: &Term, t: &Term, rel: CRel) -> Option<Arc<CDerivation>> {
        let key = (s.clone(), t.clone(), rel);
        if let Some(hit) = self.memo.borrow().get(&key) {
            return hit.clone();
        }
        let result = match rel {
            CRel::Geq => self.compute_geq(s, t),
            CRel::Gt => self.compute_gt(s, t),
            CRel::Rpo => self.compute_rpo(s, t),
        }
        .map(Arc::new);
        self.memo.borrow_mut().insert(key, result.clone());
        result
    }

    /// `s ⪰ t`
    pub fn geq(&self, s: &Term, t: &Term) -> Option<Arc<CDerivation>> {
        self.relate(s, t, CRel::Geq)
    }

    /// `s ≻ t`
    pub fn gt(&self, s: &Term, t: &Term) -> Option<Arc<CDerivation>> {
        self.relate(s, t, CRel::Gt)
    }

    /// `s ≻≻ t`
    pub fn rpo(&self, s: &Term, t: &Term) -> Option<Arc<CDerivation>> {
        self.relate(s, t, CRel::Rpo)
    }

    fn node(
        &self,
        rule: CRule,
        s: &Term,
        t: &Term,
        index: Option<usize>,
        premises: Vec<Arc<CDerivation>>,
    ) -> CDerivation {
        CDerivation {
            rule,
            lhs: s.clone(),
            rhs: t.clone(),
            index,
            premises,
            certificate: None,
        }
    }

    /// Both sides theory terms of the same sort with an order, all variables in `L`.
    fn theory_pair(&self, s: &Term, t: &Term) -> bool {
        s.is_theory()
            && t.is_theory()
            && s.ty() == t.ty()
            && s.ty().as_sort().is_some_and(|so| is_theory_sort(so) && self.values.get(so).is_some())
            && self.lvars.covers(s)
            && self.lvars.covers(t)
    }

    fn theory_step(&self, rule: CRule, s: &Term, t: &Term) -> Option<CDerivation> {
        if !self.theory_pair(s, t) {
            return None;
        }
        let goal = match rule {
            CRule::GeqTheory => self.values.lift_quasi(s, t),
            _ => self.values.lift_strict(s, t),
        }
        .ok()?;
        let verdict = self.entailer.entails(&self.phi, &goal);
        match &verdict {
            Verdict::Valid => {}
            Verdict::Invalid(_) => return None,
            Verdict::Unknown(reason) => {
                self.blocked.borrow_mut().push(BlockedQuery {
                    goal,
                    reason: reason.clone(),
                });
                return None;
            }
        }
        let mut d = self.node(rule, s, t, None, Vec::new());
        d.certificate = Some(Certificate {
            phi: self.phi.clone(),
            goal,
            verdict,
        });
        Some(d)
    }

    fn interchangeable(&self, f: &Symbol, g: &Symbol) -> bool {
        f.ty().same_structure(g.ty())
            && self.params.precedence.equivalent(f, g)
            && self.params.filter.same(f, g)
    }

    fn compute_geq(&self, s: &Term, t: &Term) -> Option<CDerivation> {
        if !s.ty().same_structure(t.ty()) {
            return None;
        }
        if let (Ok(ns), Ok(nt)) = (calc_normalize(s), calc_normalize(t)) {
            if ns == nt {
                return Some(self.node(CRule::GeqEq, s, t, None, Vec::new()));
            }
        }
        if let Some(d) = self.theory_step(CRule::GeqTheory, s, t) {
            return Some(d);
        }
        if !s.is_theory() {
            let (hs, sa) = s.spine();
            let (ht, ta) = t.spine();
            if sa.len() == ta.len() {
                if let (Some(x), Some(y)) = (hs.as_var(), ht.as_var()) {
                    if x == y {
                        let premises = sa
                            .iter()
                            .zip(&ta)
                            .map(|(a, b)| self.geq(a, b))
                            .collect::<Option<Vec<_>>>();
                        if let Some(p) = premises {
                            return Some(self.node(CRule::GeqMono, s, t, None, p));
                        }
                    }
                }
                if let (Some(f), Some(g)) = (hs.as_symbol(), ht.as_symbol()) {
                    if self.interchangeable(f, g) {
                        let premises = positions(&self.params.filter, f, sa.len())
                            .into_iter()
                            .map(|i| self.geq(&sa[i - 1], &ta[i - 1]))
                            .collect::<Option<Vec<_>>>();
                        if let Some(p) = premises {
                            return Some(self.node(CRule::GeqArgs, s, t, None, p));
                        }
                    }
                }
            }
        }
        let d = self.gt(s, t)?;
        Some(self.node(CRule::GeqGreater, s, t, None, vec![d]))
    }

    fn compute_gt(&self, s: &Term, t: &Term) -> Option<CDerivation> {
        if !s.ty().same_structure(t.ty()) {
            return None;
        }
        if let Some(d) = self.theory_step(CRule::GtTheory, s, t) {
            return Some(d);
        }
        if !s.is_theory() {
            let (hs, sa) = s.spine();
            let (ht, ta) = t.spine();
            if let (Some(f), Some(g), true) = (hs.as_symbol(), ht.as_symbol(), sa.len() == ta.len()) {
                if self.interchangeable(f, g) {
                    if let Some(p) = self.weak_with_strict(&sa, &ta, &positions(&self.params.filter, f, sa.len())) {
                        return Some(self.node(CRule::GtArgs, s, t, None, p));
                    }
                }
            }
        }
        let d = self.rpo(s, t)?;
        Some(self.node(CRule::GtRpo, s, t, None, vec![d]))
    }

    fn weak_with_strict(&self, sa: &[Term], ta: &[Term], pos: &[usize]) -> Option<Vec<Arc<CDerivation>>> {
        let mut premises = pos
            .iter()
            .map(|&i| self.geq(&sa[i - 1], &ta[i - 1]))
            .collect::<Option<Vec<_>>>()?;
        if premises.iter().any(|d| d.rule == CRule::GeqGreater) {
            return Some(premises);
        }
        for (k, &i) in pos.iter().enumerate() {
            if let Some(d) = self.gt(&sa[i - 1], &ta[i - 1]) {
                let wrapped = self.node(CRule::GeqGreater, &sa[i - 1], &ta[i - 1], None, vec![d]);
                premises[k] = Arc::new(wrapped);
                return Some(premises);
            }
        }
        None
    }

    fn compute_rpo(&self, s: &Term, t: &Term) -> Option<CDerivation> {
        if s.is_theory() {
            return None;
        }
        let (hs, sa) = s.spine();
        let f = hs.as_symbol()?;
        let n = sa.len();
        let filter = &self.params.filter;
        if self.fidelity == Fidelity::Sound && !(n + 1..=f.arity()).all(|k| filter.regards(f, k)) {
            return None;
        }

        if t.is_theory() && t.ty().is_base() && self.lvars.covers(t) {
            return Some(self.node(CRule::RpoTh, s, t, None, Vec::new()));
        }

        for i in positions(filter, f, n) {
            let d = match self.fidelity {
                Fidelity::Sound => self.geq(&sa[i - 1], t),
                Fidelity::Paper => self.gt(&sa[i - 1], t),
            };
            if let Some(d) = d {
                return Some(self.node(CRule::RpoSelect, s, t, Some(i), vec![d]));
            }
        }

        let (ht, ta) = t.spine();
        if let Some(g) = ht.as_symbol() {
            match self.params.precedence.compare(f, g) {
                PrecCmp::Equivalent => {
                    if let Some(d) = self.lex(s, t, f, g, &sa, &ta) {
                        return Some(d);
                    }
                }
                PrecCmp::Greater => {
                    let premises = positions(filter, g, ta.len())
                        .into_iter()
                        .map(|i| self.rpo(s, &ta[i - 1]))
                        .collect::<Option<Vec<_>>>();
                    if let Some(p) = premises {
                        return Some(self.node(CRule::RpoCopy, s, t, None, p));
                    }
                }
                _ => {}
            }
        }

        let (t0, t1) = t.as_app()?;
        let premises = match self.fidelity {
            Fidelity::Sound => vec![self.rpo(s, t0)?, self.rpo(s, t1)?],
            Fidelity::Paper => vec![self.gt(s, t1)?],
        };
        Some(self.node(CRule::RpoAppl, s, t, Some(1), premises))
    }

    fn lex(&self, s: &Term, t: &Term, f: &Symbol, g: &Symbol, sa: &[Term], ta: &[Term]) -> Option<CDerivation> {
        let filter = &self.params.filter;
        let (n, m) = (sa.len(), ta.len());
        'index: for i in 1..=n.min(m) {
            if !(filter.regards(f, i) && filter.regards(g, i)) {
                continue;
            }
            if (1..=i).any(|j| filter.regards(f, j) != filter.regards(g, j)) {
                continue;
            }
            let mut premises = Vec::new();
            for j in 1..i {
                if filter.regards(f, j) {
                    match self.geq(&sa[j - 1], &ta[j - 1]) {
                        Some(d) => premises.push(d),
                        None => continue 'index,
                    }
                }
            }
            match self.gt(&sa[i - 1], &ta[i - 1]) {
                Some(d) => premises.push(d),
                None => continue,
            }
            for j in i + 1..=m {
                if filter.regards(g, j) {
                    match self.rpo(s, &ta[j - 1]) {
                        Some(d) => premises.push(d),
                        None => continue 'index,
                    }
                }
            }
            return Some(self.node(CRule::RpoLex, s, t, Some(i), premises));
        }
        None
    }
}

#[cfg(test)]
mod tests;
