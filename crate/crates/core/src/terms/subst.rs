use std::collections::BTreeMap;
use std::fmt;

use super::term::{Term, TermKind, Var};
use super::types::Type;
use super::TypeError;

/// A finite, type-preserving map from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn insert(&mut self, x: Var, t: Term) -> Result<(), TypeError> {
        if x.ty() != t.ty() {
            return Err(TypeError::SubstitutionMismatch {
                var: x.name().to_string(),
                expected: x.ty().clone(),
                found: t.ty().clone(),
            });
        }
        self.bindings.insert(x, t);
        Ok(())
    }

    pub fn with(mut self, x: Var, t: Term) -> Result<Substitution, TypeError> {
        self.insert(x, t)?;
        Ok(self)
    }

    pub fn get(&self, x: &Var) -> Option<&Term> {
        self.bindings.get(x)
    }

    pub fn contains(&self, x: &Var) -> bool {
        self.bindings.contains_key(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn apply(&self, s: &Term) -> Term {
        apply_substitution(s, self)
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} := {t}")?;
        }
        f.write_str("}")
    }
}

/// Homomorphic replacement of variables.
pub fn apply_substitution(s: &Term, gamma: &Substitution) -> Term {
    if gamma.is_empty() || s.is_ground() {
        return s.clone();
    }
    match s.kind() {
        TermKind::Var(x) => gamma.get(x).cloned().unwrap_or_else(|| s.clone()),
        TermKind::Sym(_) => s.clone(),
        TermKind::App(f, a) => {
            Term::app_unchecked(apply_substitution(f, gamma), apply_substitution(a, gamma))
        }
    }
}

/// A term with exactly one hole.
#[derive(Clone, Debug)]
pub enum Context {
    Hole(Type),
    /// `C[·] u`
    Fun(Box<Context>, Term),
    /// `u C[·]`
    Arg(Term, Box<Context>),
}

impl Context {
    pub fn hole(ty: Type) -> Context {
        Context::Hole(ty)
    }

    /// `inner[·] arg`, checked.
    pub fn fun(inner: Context, arg: Term) -> Result<Context, TypeError> {
        let ty = inner.ty();
        match &ty {
            Type::Arrow(d, _) if **d == *arg.ty() => Ok(Context::Fun(Box::new(inner), arg)),
            ty => Err(TypeError::ArgumentMismatch {
                fun: "context".into(),
                expected: ty.domain().cloned().unwrap_or(ty.clone()),
                found: arg.ty().clone(),
            }),
        }
    }

    /// `fun inner[·]`, checked.
    pub fn arg(fun: Term, inner: Context) -> Result<Context, TypeError> {
        match fun.ty() {
            Type::Arrow(d, _) if **d == inner.ty() => Ok(Context::Arg(fun, Box::new(inner))),
            _ => Err(TypeError::ArgumentMismatch {
                fun: fun.to_string(),
                expected: fun.ty().domain().cloned().unwrap_or(fun.ty().clone()),
                found: inner.ty(),
            }),
        }
    }

    pub fn hole_type(&self) -> &Type {
        match self {
            Context::Hole(ty) => ty,
            Context::Fun(c, _) | Context::Arg(_, c) => c.hole_type(),
        }
    }

    /// Type of the whole context.
    pub fn ty(&self) -> Type {
        match self {
            Context::Hole(ty) => ty.clone(),
            Context::Fun(c, _) => c.ty().codomain().expect("checked at construction").clone(),
            Context::Arg(f, _) => f.ty().codomain().expect("checked at construction").clone(),
        }
    }

    pub fn plug(&self, t: &Term) -> Result<Term, TypeError> {
        if t.ty() != self.hole_type() {
            return Err(TypeError::HoleMismatch {
                expected: self.hole_type().clone(),
                found: t.ty().clone(),
            });
        }
        Ok(self.plug_unchecked(t))
    }

    fn plug_unchecked(&self, t: &Term) -> Term {
        match self {
            Context::Hole(_) => t.clone(),
            Context::Fun(c, u) => Term::app_unchecked(c.plug_unchecked(t), u.clone()),
            Context::Arg(f, c) => Term::app_unchecked(f.clone(), c.plug_unchecked(t)),
        }
    }
}
