use super::{CDerivation, CRel, CRule};
use crate::order::{Fidelity, HorpoParams, PrecCmp, SymbolOrder};
use crate::terms::{Symbol, Term};
use crate::theory::{calc_normalize, is_theory_sort, Constraint, Entailer, LVarSet, ValueOrder, Verdict};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("invalid {rule} step `{lhs}` / `{rhs}`: {reason}")]
pub struct CReplayError {
    pub rule: &'static str,
    pub lhs: String,
    pub rhs: String,
    pub reason: String,
}

pub(super) struct Checker<'a> {
    pub params: &'a HorpoParams,
    pub values: &'a ValueOrder,
    pub entailer: &'a Entailer,
    pub fidelity: Fidelity,
    pub phi: &'a Constraint,
    pub lvars: &'a LVarSet,
}

impl CDerivation {
    /// Re-checks every step, re-running each recorded entailment query.
    pub fn replay(
        &self,
        params: &HorpoParams,
        values: &ValueOrder,
        entailer: &Entailer,
        fidelity: Fidelity,
        phi: &Constraint,
        lvars: &LVarSet,
    ) -> Result<(), CReplayError> {
        Checker {
            params,
            values,
            entailer,
            fidelity,
            phi,
            lvars,
        }
        .check(self)
    }
}

impl Checker<'_> {
    fn check(&self, d: &CDerivation) -> Result<(), CReplayError> {
        let fail = |reason: String| CReplayError {
            rule: d.rule.name(),
            lhs: d.lhs.to_string(),
            rhs: d.rhs.to_string(),
            reason,
        };
        let expected = self.expected(d).map_err(fail)?;
        if expected.len() != d.premises.len() {
            return Err(fail(format!(
                "expected {} premises, found {}",
                expected.len(),
                d.premises.len()
            )));
        }
        for (p, (l, r, rel)) in d.premises.iter().zip(&expected) {
            if p.lhs != *l || p.rhs != *r || p.relation() != *rel {
                return Err(fail(format!(
                    "premise `{} {} {}` should be `{l} {rel} {r}`",
                    p.lhs,
                    p.relation(),
                    p.rhs
                )));
            }
            self.check(p)?;
        }
        if d.rule == CRule::GtArgs && !d.premises.iter().any(|p| p.rule == CRule::GeqGreater) {
            return Err(fail("no strict premise".into()));
        }
        Ok(())
    }

    fn theory_pair(&self, s: &Term, t: &Term) -> bool {
        s.is_theory()
            && t.is_theory()
            && s.ty() == t.ty()
            && s.ty().as_sort().is_some_and(|so| is_theory_sort(so) && self.values.get(so).is_some())
            && self.lvars.covers(s)
            && self.lvars.covers(t)
    }

    fn positions(&self, f: &Symbol, upto: usize) -> Vec<usize> {
        (1..=upto).filter(|&i| self.params.filter.regards(f, i)).collect()
    }

    fn expected(&self, d: &CDerivation) -> Result<Vec<(Term, Term, CRel)>, String> {
        let (s, t) = (&d.lhs, &d.rhs);
        let (hs, sa) = s.spine();
        let (ht, ta) = t.spine();
        let prec = &self.params.precedence;
        let filter = &self.params.filter;
        if d.relation() != CRel::Rpo && !s.ty().same_structure(t.ty()) {
            return Err("type structures differ".into());
        }
        match d.rule {
            CRule::GeqTheory | CRule::GtTheory => {
                if !self.theory_pair(s, t) {
                    return Err("not a pair of theory terms over L".into());
                }
                let goal = if d.rule == CRule::GeqTheory {
                    self.values.lift_quasi(s, t)
                } else {
                    self.values.lift_strict(s, t)
                }
                .map_err(|e| e.to_string())?;
                let cert = d.certificate.as_ref().ok_or("missing certificate")?;
                if cert.phi != *self.phi || cert.goal != goal || cert.verdict != Verdict::Valid {
                    return Err("certificate does not match the step".into());
                }
                let again = self.entailer.entails(self.phi, &goal);
                if again != Verdict::Valid {
                    return Err(format!("entailment no longer valid: {again}"));
                }
                Ok(Vec::new())
            }
            CRule::GeqEq => {
                let ns = calc_normalize(s).map_err(|e| e.to_string())?;
                let nt = calc_normalize(t).map_err(|e| e.to_string())?;
                if ns != nt {
                    return Err("normal forms differ".into());
                }
                Ok(Vec::new())
            }
            CRule::GeqMono => {
                if s.is_theory() {
                    return Err("lhs is a theory term".into());
                }
                let x = hs.as_var().ok_or("lhs head is not a variable")?;
                if ht.as_var() != Some(x) || sa.len() != ta.len() {
                    return Err("heads or spines differ".into());
                }
                Ok(sa.into_iter().zip(ta).map(|(a, b)| (a, b, CRel::Geq)).collect())
            }
            CRule::GeqArgs | CRule::GtArgs => {
                if s.is_theory() {
                    return Err("lhs is a theory term".into());
                }
                let f = hs.as_symbol().ok_or("lhs head is not a symbol")?;
                let g = ht.as_symbol().ok_or("rhs head is not a symbol")?;
                if sa.len() != ta.len()
                    || !f.ty().same_structure(g.ty())
                    || !prec.equivalent(f, g)
                    || !filter.same(f, g)
                {
                    return Err("heads are not interchangeable".into());
                }
                Ok(self
                    .positions(f, sa.len())
                    .into_iter()
                    .map(|i| (sa[i - 1].clone(), ta[i - 1].clone(), CRel::Geq))
                    .collect())
            }
            CRule::GeqGreater => Ok(vec![(s.clone(), t.clone(), CRel::Gt)]),
            CRule::GtRpo => Ok(vec![(s.clone(), t.clone(), CRel::Rpo)]),
            _ => {
                if s.is_theory() {
                    return Err("lhs is a theory term".into());
                }
                let f = hs.as_symbol().ok_or("lhs head is not a symbol")?;
                let n = sa.len();
                if self.fidelity == Fidelity::Sound && !(n + 1..=f.arity()).all(|k| filter.regards(f, k)) {
                    return Err("missing arguments are filtered".into());
                }
                match d.rule {
                    CRule::RpoTh => {
                        if !(t.is_theory() && t.ty().is_base() && self.lvars.covers(t)) {
                            return Err("rhs is not a base-type theory term over L".into());
                        }
                        Ok(Vec::new())
                    }
                    CRule::RpoSelect => {
                        let i = d.index.ok_or("no index")?;
                        if i == 0 || i > n || !filter.regards(f, i) {
                            return Err(format!("position {i} not selectable"));
                        }
                        let rel = match self.fidelity {
                            Fidelity::Sound => CRel::Geq,
                            Fidelity::Paper => CRel::Gt,
                        };
                        Ok(vec![(sa[i - 1].clone(), t.clone(), rel)])
                    }
                    CRule::RpoAppl => {
                        let m = d.index.ok_or("no split size")?;
                        if m == 0 || m > ta.len() {
                            return Err(format!("cannot split {m} arguments"));
                        }
                        let keep = ta.len() - m;
                        let mut out = Vec::new();
                        let rel = match self.fidelity {
                            Fidelity::Sound => {
                                let t0 = Term::apply(ht.clone(), ta[..keep].iter().cloned())
                                    .map_err(|e| e.to_string())?;
                                out.push((s.clone(), t0, CRel::Rpo));
                                CRel::Rpo
                            }
                            Fidelity::Paper => CRel::Gt,
                        };
                        out.extend(ta[keep..].iter().map(|ti| (s.clone(), ti.clone(), rel)));
                        Ok(out)
                    }
                    CRule::RpoCopy => {
                        let g = ht.as_symbol().ok_or("rhs head is not a symbol")?;
                        if prec.compare(f, g) != PrecCmp::Greater {
                            return Err("lhs head is not above rhs head".into());
                        }
                        Ok(self
                            .positions(g, ta.len())
                            .into_iter()
                            .map(|i| (s.clone(), ta[i - 1].clone(), CRel::Rpo))
                            .collect())
                    }
                    _ => {
                        let g = ht.as_symbol().ok_or("rhs head is not a symbol")?;
                        if !prec.equivalent(f, g) {
                            return Err("heads are not equivalent".into());
                        }
                        let i = d.index.ok_or("no index")?;
                        let m = ta.len();
                        if i == 0 || i > n.min(m) || !filter.regards(f, i) || !filter.regards(g, i) {
                            return Err(format!("position {i} not usable"));
                        }
                        if (1..=i).any(|j| filter.regards(f, j) != filter.regards(g, j)) {
                            return Err("filters differ up to the index".into());
                        }
                        let mut out = Vec::new();
                        for j in 1..i {
                            if filter.regards(f, j) {
                                out.push((sa[j - 1].clone(), ta[j - 1].clone(), CRel::Geq));
                            }
                        }
                        out.push((sa[i - 1].clone(), ta[i - 1].clone(), CRel::Gt));
                        for j in i + 1..=m {
                            if filter.regards(g, j) {
                                out.push((s.clone(), ta[j - 1].clone(), CRel::Rpo));
                            }
                        }
                        Ok(out)
                    }
                }
            }
        }
    }
}
