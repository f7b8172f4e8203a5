//! The unconstrained relations `≈`, `⊒`, `⊐` and `⊐⊐`, parameterized by a
//! precedence and an argument filter, with derivation trees.

mod params;
mod replay;

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::terms::{Symbol, Term};

pub use params::{ArgumentFilter, HorpoParams, ParamError, PrecCmp, PrecDecl, Precedence, SymbolOrder};
pub use replay::ReplayError;

/// Which reading of the application clause is used.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub enum Fidelity {
    /// The application clause also demands `s ⊐⊐ t₀` for the head part of `t`
    /// (and, in the constrained relation, keeps the arity guard).
    #[default]
    Sound,
    /// Clauses exactly as printed.
    Paper,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Rel {
    Approx,
    Geq,
    Gt,
    Rpo,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Approx => "≈",
            Rel::Geq => "⊒",
            Rel::Gt => "⊐",
            Rel::Rpo => "⊐⊐",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Rule {
    EqMono,
    EqArgs,
    GrMono,
    GrArgs,
    GrRpo,
    RpoSelect,
    RpoAppl,
    RpoCopy,
    RpoLex,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::EqMono => "Eq-mono",
            Rule::EqArgs => "Eq-args",
            Rule::GrMono => "Gr-mono",
            Rule::GrArgs => "Gr-args",
            Rule::GrRpo => "Gr-rpo",
            Rule::RpoSelect => "Rpo-select",
            Rule::RpoAppl => "Rpo-appl",
            Rule::RpoCopy => "Rpo-copy",
            Rule::RpoLex => "Rpo-lex",
        }
    }

    /// The relation this rule concludes.
    pub fn relation(self) -> Rel {
        match self {
            Rule::EqMono | Rule::EqArgs => Rel::Approx,
            Rule::GrMono | Rule::GrArgs | Rule::GrRpo => Rel::Gt,
            _ => Rel::Rpo,
        }
    }

    /// Whether a derivation ending in this rule establishes `rel`.
    pub fn establishes(self, rel: Rel) -> bool {
        match (self.relation(), rel) {
            (r, q) if r == q => true,
            (Rel::Approx | Rel::Gt, Rel::Geq) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A proof tree. `index` is the selected argument for Rpo-select and
/// Rpo-lex, and the number of split-off arguments for Rpo-appl.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Derivation {
    pub rule: Rule,
    pub lhs: Term,
    pub rhs: Term,
    pub index: Option<usize>,
    pub premises: Vec<Arc<Derivation>>,
}

impl Derivation {
    pub fn relation(&self) -> Rel {
        self.rule.relation()
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|p| p.size()).sum::<usize>()
    }

    /// Indented multi-line rendering.
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
        out.push_str("]\n");
        for p in &self.premises {
            p.render_into(out, depth + 1);
        }
    }
}

/// Decides the relations for fixed parameters, memoizing every judgment.
/// One engine belongs to one thread; create one per worker.
pub struct Horpo<'a, O: SymbolOrder + ?Sized = Precedence> {
    prec: &'a O,
    filter: &'a ArgumentFilter,
    fidelity: Fidelity,
    memo: RefCell<HashMap<(Term, Term, Rel), Option<Arc<Derivation>>>>,
}

impl<'a> Horpo<'a, Precedence> {
    pub fn new(params: &'a HorpoParams, fidelity: Fidelity) -> Horpo<'a, Precedence> {
        Horpo::with_order(&params.precedence, &params.filter, fidelity)
    }
}

fn regards(filter: &ArgumentFilter, f: &Symbol, upto: usize) -> Vec<usize> {
    (1..=upto).filter(|&i| filter.regards(f, i)).collect()
}

impl<'a, O: SymbolOrder + ?Sized> Horpo<'a, O> {
    pub fn with_order(prec: &'a O, filter: &'a ArgumentFilter, fidelity: Fidelity) -> Horpo<'a, O> {
        Horpo {
            prec,
            filter,
            fidelity,
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn fidelity(&self) -> Fidelity {
        self.fidelity
    }

    pub fn memo_len(&self) -> usize {
        self.memo.borrow().len()
    }

    pub fn relate(&self, s: &Term, t: &Term, rel: Rel) -> Option<Arc<Derivation>> {
        let key = (s.clone(), t.clone(), rel);
        if let Some(hit) = self.memo.borrow().get(&key) {
            return hit.clone();
        }
        let result = match rel {
            Rel::Approx => self.compute_approx(s, t),
            Rel::Geq => self.compute_geq(s, t),
            Rel::Gt => self.compute_gt(s, t),
            Rel::Rpo => self.compute_rpo(s, t),
        }
        .map(Arc::new);
        self.memo.borrow_mut().insert(key, result.clone());
        result
    }

    pub fn holds(&self, s: &Term, t: &Term, rel: Rel) -> bool {
        self.relate(s, t, rel).is_some()
    }

    /// `s ≈ t`
    pub fn approx(&self, s: &Term, t: &Term) -> Option<Arc<Derivation>> {
        self.relate(s, t, Rel::Approx)
    }

    /// `s ⊒ t`: the `≈` derivation if there is one, otherwise the `⊐` one.
    pub fn geq(&self, s: &Term, t: &Term) -> Option<Arc<Derivation>> {
        self.relate(s, t, Rel::Geq)
    }

    /// `s ⊐ t`
    pub fn gt(&self, s: &Term, t: &Term) -> Option<Arc<Derivation>> {
        self.relate(s, t, Rel::Gt)
    }

    /// `s ⊐⊐ t`
    pub fn rpo_gt(&self, s: &Term, t: &Term) -> Option<Arc<Derivation>> {
        self.relate(s, t, Rel::Rpo)
    }

    fn node(&self, rule: Rule, s: &Term, t: &Term, index: Option<usize>, premises: Vec<Arc<Derivation>>) -> Derivation {
        Derivation {
            rule,
            lhs: s.clone(),
            rhs: t.clone(),
            index,
            premises,
        }
    }

    /// Heads `f`, `g` can be compared argument-wise: same structure, `f ≡ g`, `π(f) = π(g)`.
    fn args_compatible(&self, f: &Symbol, g: &Symbol) -> bool {
        f.ty().same_structure(g.ty()) && self.prec.equivalent(f, g) && self.filter.same(f, g)
    }

    fn compute_approx(&self, s: &Term, t: &Term) -> Option<Derivation> {
        if !s.ty().same_structure(t.ty()) {
            return None;
        }
        let (hs, sa) = s.spine();
        let (ht, ta) = t.spine();
        if sa.len() != ta.len() {
            return None;
        }
        if let (Some(x), Some(y)) = (hs.as_var(), ht.as_var()) {
            if x != y {
                return None;
            }
            let premises = sa
                .iter()
                .zip(&ta)
                .map(|(a, b)| self.approx(a, b))
                .collect::<Option<Vec<_>>>()?;
            return Some(self.node(Rule::EqMono, s, t, None, premises));
        }
        let (f, g) = (hs.as_symbol()?, ht.as_symbol()?);
        if !self.args_compatible(f, g) {
            return None;
        }
        let premises = regards(self.filter, f, sa.len())
            .into_iter()
            .map(|i| self.approx(&sa[i - 1], &ta[i - 1]))
            .collect::<Option<Vec<_>>>()?;
        Some(self.node(Rule::EqArgs, s, t, None, premises))
    }

    fn compute_geq(&self, s: &Term, t: &Term) -> Option<Derivation> {
        self.approx(s, t)
            .or_else(|| self.gt(s, t))
            .map(|d| (*d).clone())
    }

    /// Weak premises for `positions`, with at least one strict one.
    fn weak_with_strict(&self, sa: &[Term], ta: &[Term], positions: &[usize]) -> Option<Vec<Arc<Derivation>>> {
        let mut premises = positions
            .iter()
            .map(|&i| self.geq(&sa[i - 1], &ta[i - 1]))
            .collect::<Option<Vec<_>>>()?;
        if premises.iter().any(|d| d.relation() == Rel::Gt) {
            return Some(premises);
        }
        for (k, &i) in positions.iter().enumerate() {
            if let Some(d) = self.gt(&sa[i - 1], &ta[i - 1]) {
                premises[k] = d;
                return Some(premises);
            }
        }
        None
    }

    fn compute_gt(&self, s: &Term, t: &Term) -> Option<Derivation> {
        if !s.ty().same_structure(t.ty()) {
            return None;
        }
        let (hs, sa) = s.spine();
        let (ht, ta) = t.spine();
        if sa.len() == ta.len() {
            if let (Some(x), Some(y)) = (hs.as_var(), ht.as_var()) {
                if x == y {
                    let all: Vec<usize> = (1..=sa.len()).collect();
                    if let Some(p) = self.weak_with_strict(&sa, &ta, &all) {
                        return Some(self.node(Rule::GrMono, s, t, None, p));
                    }
                }
            }
            if let (Some(f), Some(g)) = (hs.as_symbol(), ht.as_symbol()) {
                if self.args_compatible(f, g) {
                    let pos = regards(self.filter, f, sa.len());
                    if let Some(p) = self.weak_with_strict(&sa, &ta, &pos) {
                        return Some(self.node(Rule::GrArgs, s, t, None, p));
                    }
                }
            }
        }
        let d = self.rpo_gt(s, t)?;
        Some(self.node(Rule::GrRpo, s, t, None, vec![d]))
    }

    fn compute_rpo(&self, s: &Term, t: &Term) -> Option<Derivation> {
        let (hs, sa) = s.spine();
        let f = hs.as_symbol()?;
        let n = sa.len();
        if !(n + 1..=f.arity()).all(|k| self.filter.regards(f, k)) {
            return None;
        }
        let pf = regards(self.filter, f, n);

        for &i in &pf {
            if let Some(d) = self.geq(&sa[i - 1], t) {
                return Some(self.node(Rule::RpoSelect, s, t, Some(i), vec![d]));
            }
        }

        let (ht, ta) = t.spine();
        if let Some(g) = ht.as_symbol() {
            let m = ta.len();
            match self.prec.compare(f, g) {
                PrecCmp::Equivalent => {
                    if let Some(d) = self.lex(s, t, f, g, &sa, &ta) {
                        return Some(d);
                    }
                }
                PrecCmp::Greater => {
                    let premises = regards(self.filter, g, m)
                        .into_iter()
                        .map(|i| self.rpo_gt(s, &ta[i - 1]))
                        .collect::<Option<Vec<_>>>();
                    if let Some(p) = premises {
                        return Some(self.node(Rule::RpoCopy, s, t, None, p));
                    }
                }
                _ => {}
            }
        }

        // Splitting off one argument is the weakest choice of `m` in both modes.
        if let Some((t0, t1)) = t.as_app() {
            let last = self.rpo_gt(s, t1)?;
            let premises = match self.fidelity {
                Fidelity::Paper => vec![last],
                Fidelity::Sound => vec![self.rpo_gt(s, t0)?, last],
            };
            return Some(self.node(Rule::RpoAppl, s, t, Some(1), premises));
        }
        None
    }

    fn lex(&self, s: &Term, t: &Term, f: &Symbol, g: &Symbol, sa: &[Term], ta: &[Term]) -> Option<Derivation> {
        let (n, m) = (sa.len(), ta.len());
        'index: for i in 1..=n.min(m) {
            if !(self.filter.regards(f, i) && self.filter.regards(g, i)) {
                continue;
            }
            if (1..=i).any(|j| self.filter.regards(f, j) != self.filter.regards(g, j)) {
                continue;
            }
            let mut premises = Vec::new();
            for j in 1..i {
                if self.filter.regards(f, j) {
                    match self.approx(&sa[j - 1], &ta[j - 1]) {
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
                if self.filter.regards(g, j) {
                    match self.rpo_gt(s, &ta[j - 1]) {
                        Some(d) => premises.push(d),
                        None => continue 'index,
                    }
                }
            }
            return Some(self.node(Rule::RpoLex, s, t, Some(i), premises));
        }
        None
    }
}

#[cfg(test)]
mod tests;
