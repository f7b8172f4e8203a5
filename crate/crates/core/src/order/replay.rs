use super::{ArgumentFilter, Derivation, Fidelity, PrecCmp, Rel, Rule, SymbolOrder};
use crate::terms::Term;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("invalid {rule} step `{lhs} ⊳ {rhs}`: {reason}")]
pub struct ReplayError {
    pub rule: &'static str,
    pub lhs: String,
    pub rhs: String,
    pub reason: String,
}

struct Checker<'a, O: SymbolOrder + ?Sized> {
    prec: &'a O,
    filter: &'a ArgumentFilter,
    fidelity: Fidelity,
}

impl Derivation {
    /// Re-checks every step of the tree against the rule definitions,
    /// trusting nothing but the premises' own replay.
    pub fn replay<O: SymbolOrder + ?Sized>(
        &self,
        prec: &O,
        filter: &ArgumentFilter,
        fidelity: Fidelity,
    ) -> Result<(), ReplayError> {
        Checker { prec, filter, fidelity }.check(self)
    }
}

impl<O: SymbolOrder + ?Sized> Checker<'_, O> {
    fn check(&self, d: &Derivation) -> Result<(), ReplayError> {
        let fail = |reason: &str| ReplayError {
            rule: d.rule.name(),
            lhs: d.lhs.to_string(),
            rhs: d.rhs.to_string(),
            reason: reason.to_string(),
        };
        let expected = self.expected_premises(d).map_err(|r| fail(&r))?;
        if expected.len() != d.premises.len() {
            return Err(fail(&format!(
                "expected {} premises, found {}",
                expected.len(),
                d.premises.len()
            )));
        }
        for (p, (l, r, rel)) in d.premises.iter().zip(&expected) {
            if p.lhs != *l || p.rhs != *r {
                return Err(fail(&format!("premise `{} / {}` does not match `{l} / {r}`", p.lhs, p.rhs)));
            }
            if !p.rule.establishes(*rel) {
                return Err(fail(&format!("premise by {} does not establish {rel}", p.rule)));
            }
            self.check(p)?;
        }
        if matches!(d.rule, Rule::GrMono | Rule::GrArgs)
            && !d.premises.iter().any(|p| p.relation() == Rel::Gt)
        {
            return Err(fail("no strict premise"));
        }
        Ok(())
    }

    /// The premises a well-formed step must carry, in order.
    fn expected_premises(&self, d: &Derivation) -> Result<Vec<(Term, Term, Rel)>, String> {
        let (s, t) = (&d.lhs, &d.rhs);
        let (hs, sa) = s.spine();
        let (ht, ta) = t.spine();
        let same = s.ty().same_structure(t.ty());
        let pos = |f: &crate::terms::Symbol, upto: usize| -> Vec<usize> {
            (1..=upto).filter(|&i| self.filter.regards(f, i)).collect()
        };
        match d.rule {
            Rule::EqMono | Rule::GrMono => {
                let (x, y) = (hs.as_var().ok_or("head of lhs is not a variable")?, ht.as_var());
                if Some(x) != y || sa.len() != ta.len() || !same {
                    return Err("heads or spines differ".into());
                }
                let rel = if d.rule == Rule::EqMono { Rel::Approx } else { Rel::Geq };
                Ok(sa.into_iter().zip(ta).map(|(a, b)| (a, b, rel)).collect())
            }
            Rule::EqArgs | Rule::GrArgs => {
                let f = hs.as_symbol().ok_or("head of lhs is not a symbol")?;
                let g = ht.as_symbol().ok_or("head of rhs is not a symbol")?;
                if !same || sa.len() != ta.len() {
                    return Err("type structures or spines differ".into());
                }
                if !f.ty().same_structure(g.ty()) || !self.prec.equivalent(f, g) || !self.filter.same(f, g) {
                    return Err("heads are not interchangeable".into());
                }
                let rel = if d.rule == Rule::EqArgs { Rel::Approx } else { Rel::Geq };
                Ok(pos(f, sa.len())
                    .into_iter()
                    .map(|i| (sa[i - 1].clone(), ta[i - 1].clone(), rel))
                    .collect())
            }
            Rule::GrRpo => {
                if !same {
                    return Err("type structures differ".into());
                }
                Ok(vec![(s.clone(), t.clone(), Rel::Rpo)])
            }
            Rule::RpoSelect | Rule::RpoAppl | Rule::RpoCopy | Rule::RpoLex => {
                let f = hs.as_symbol().ok_or("head of lhs is not a symbol")?;
                let n = sa.len();
                if !(n + 1..=f.arity()).all(|k| self.filter.regards(f, k)) {
                    return Err("missing arguments are filtered".into());
                }
                match d.rule {
                    Rule::RpoSelect => {
                        let i = d.index.ok_or("no index")?;
                        if i == 0 || i > n || !self.filter.regards(f, i) {
                            return Err(format!("position {i} not selectable"));
                        }
                        Ok(vec![(sa[i - 1].clone(), t.clone(), Rel::Geq)])
                    }
                    Rule::RpoAppl => {
                        let m = d.index.ok_or("no split size")?;
                        if m == 0 || m > ta.len() {
                            return Err(format!("cannot split {m} arguments"));
                        }
                        let keep = ta.len() - m;
                        let t0 = Term::apply_unchecked(ht.clone(), ta[..keep].iter().cloned());
                        let mut out = Vec::new();
                        if self.fidelity == Fidelity::Sound {
                            out.push((s.clone(), t0, Rel::Rpo));
                        }
                        out.extend(ta[keep..].iter().map(|ti| (s.clone(), ti.clone(), Rel::Rpo)));
                        Ok(out)
                    }
                    Rule::RpoCopy => {
                        let g = ht.as_symbol().ok_or("head of rhs is not a symbol")?;
                        if self.prec.compare(f, g) != PrecCmp::Greater {
                            return Err("head of lhs is not above head of rhs".into());
                        }
                        Ok(pos(g, ta.len())
                            .into_iter()
                            .map(|i| (s.clone(), ta[i - 1].clone(), Rel::Rpo))
                            .collect())
                    }
                    _ => {
                        let g = ht.as_symbol().ok_or("head of rhs is not a symbol")?;
                        if !self.prec.equivalent(f, g) {
                            return Err("heads are not equivalent".into());
                        }
                        let i = d.index.ok_or("no index")?;
                        let m = ta.len();
                        if i == 0 || i > n.min(m) || !self.filter.regards(f, i) || !self.filter.regards(g, i) {
                            return Err(format!("position {i} not usable"));
                        }
                        if (1..=i).any(|j| self.filter.regards(f, j) != self.filter.regards(g, j)) {
                            return Err("filters differ up to the index".into());
                        }
                        let mut out = Vec::new();
                        for j in 1..i {
                            if self.filter.regards(f, j) {
                                out.push((sa[j - 1].clone(), ta[j - 1].clone(), Rel::Approx));
                            }
                        }
                        out.push((sa[i - 1].clone(), ta[i - 1].clone(), Rel::Gt));
                        for j in i + 1..=m {
                            if self.filter.regards(g, j) {
                                out.push((s.clone(), ta[j - 1].clone(), Rel::Rpo));
                            }
                        }
                        Ok(out)
                    }
                }
            }
        }
    }
}
