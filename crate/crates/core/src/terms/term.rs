use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::types::{Sort, Type};
use super::TypeError;
use crate::theory::TheoryOp;

/// A theory value: an integer or a boolean literal.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Int(_) => Sort::int(),
            Value::Bool(_) => Sort::bool(),
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Int(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum SymbolKind {
    Plain,
    Theory,
    Value(Value),
}

#[derive(PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
struct SymbolData {
    name: String,
    ty: Type,
    kind: SymbolKind,
}

/// A typed function symbol. Value symbols are theory symbols of base type.
#[derive(Clone, Debug)]
pub struct Symbol(Arc<SymbolData>);

impl Symbol {
    pub fn plain(name: impl Into<String>, ty: Type) -> Symbol {
        Symbol(Arc::new(SymbolData {
            name: name.into(),
            ty,
            kind: SymbolKind::Plain,
        }))
    }

    pub fn theory(name: impl Into<String>, ty: Type) -> Symbol {
        Symbol(Arc::new(SymbolData {
            name: name.into(),
            ty,
            kind: SymbolKind::Theory,
        }))
    }

    pub fn value(v: Value) -> Symbol {
        Symbol(Arc::new(SymbolData {
            name: v.to_string(),
            ty: Type::base(v.sort()),
            kind: SymbolKind::Value(v),
        }))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn ty(&self) -> &Type {
        &self.0.ty
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.0.kind
    }

    pub fn arity(&self) -> usize {
        self.0.ty.arity()
    }

    /// True for theory and value symbols.
    pub fn is_theory(&self) -> bool {
        !matches!(self.0.kind, SymbolKind::Plain)
    }

    pub fn is_value(&self) -> bool {
        matches!(self.0.kind, SymbolKind::Value(_))
    }

    pub fn as_value(&self) -> Option<Value> {
        match self.0.kind {
            SymbolKind::Value(v) => Some(v),
            _ => None,
        }
    }
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Symbol) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Symbol {}

impl Hash for Symbol {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Symbol) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Symbol) -> std::cmp::Ordering {
        self.0.cmp(&other.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A typed variable. Variables with the same name but different types are distinct.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var {
    name: Arc<str>,
    ty: Type,
}

impl Var {
    pub fn new(name: &str, ty: Type) -> Var {
        Var {
            name: Arc::from(name),
            ty,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ty(&self) -> &Type {
        &self.ty
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug)]
pub enum TermKind {
    Var(Var),
    Sym(Symbol),
    App(Term, Term),
}

#[derive(Debug)]
struct Node {
    kind: TermKind,
    ty: Type,
    size: usize,
    hash: u64,
    theory: bool,
    ground: bool,
}

/// An immutable, well-typed, curried term.
#[derive(Clone, Debug)]
pub struct Term(Arc<Node>);

impl Term {
    pub fn var(v: Var) -> Term {
        let mut h = DefaultHasher::new();
        0u8.hash(&mut h);
        v.hash(&mut h);
        let ty = v.ty().clone();
        Term(Arc::new(Node {
            kind: TermKind::Var(v),
            ty,
            size: 1,
            hash: h.finish(),
            theory: true,
            ground: false,
        }))
    }

    pub fn sym(f: Symbol) -> Term {
        let mut h = DefaultHasher::new();
        1u8.hash(&mut h);
        f.hash(&mut h);
        let ty = f.ty().clone();
        let theory = f.is_theory();
        Term(Arc::new(Node {
            kind: TermKind::Sym(f),
            ty,
            size: 1,
            hash: h.finish(),
            theory,
            ground: true,
        }))
    }

    pub fn value(v: Value) -> Term {
        Term::sym(Symbol::value(v))
    }

    /// Type-checked application.
    pub fn app(fun: Term, arg: Term) -> Result<Term, TypeError> {
        match fun.ty() {
            Type::Arrow(d, _) if **d == *arg.ty() => Ok(Term::app_unchecked(fun, arg)),
            Type::Arrow(d, _) => Err(TypeError::ArgumentMismatch {
                fun: fun.to_string(),
                expected: (**d).clone(),
                found: arg.ty().clone(),
            }),
            Type::Base(_) => Err(TypeError::NotAFunction {
                fun: fun.to_string(),
                ty: fun.ty().clone(),
            }),
        }
    }

    /// `head args[0] … args[n-1]`, type-checked.
    pub fn apply(head: Term, args: impl IntoIterator<Item = Term>) -> Result<Term, TypeError> {
        args.into_iter().try_fold(head, Term::app)
    }

    /// Callers guarantee `fun : σ ⇒ τ` and `arg : σ`.
    pub(crate) fn app_unchecked(fun: Term, arg: Term) -> Term {
        let ty = fun
            .ty()
            .codomain()
            .expect("application of a base-typed term")
            .clone();
        let mut h = DefaultHasher::new();
        2u8.hash(&mut h);
        fun.0.hash.hash(&mut h);
        arg.0.hash.hash(&mut h);
        let size = fun.size() + arg.size() + 1;
        let theory = fun.0.theory && arg.0.theory;
        let ground = fun.0.ground && arg.0.ground;
        Term(Arc::new(Node {
            kind: TermKind::App(fun, arg),
            ty,
            size,
            hash: h.finish(),
            theory,
            ground,
        }))
    }

    pub(crate) fn apply_unchecked(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app_unchecked)
    }

    pub fn kind(&self) -> &TermKind {
        &self.0.kind
    }

    pub fn ty(&self) -> &Type {
        &self.0.ty
    }

    /// Node count: variables, symbols and application nodes each count one.
    pub fn size(&self) -> usize {
        self.0.size
    }

    /// Every symbol occurring in the term is a theory or value symbol.
    pub fn is_theory(&self) -> bool {
        self.0.theory
    }

    pub fn is_ground(&self) -> bool {
        self.0.ground
    }

    pub fn as_var(&self) -> Option<&Var> {
        match &self.0.kind {
            TermKind::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match &self.0.kind {
            TermKind::Sym(f) => Some(f),
            _ => None,
        }
    }

    pub fn as_app(&self) -> Option<(&Term, &Term)> {
        match &self.0.kind {
            TermKind::App(f, a) => Some((f, a)),
            _ => None,
        }
    }

    pub fn as_value(&self) -> Option<Value> {
        self.as_symbol().and_then(Symbol::as_value)
    }

    /// The head of the application spine (a variable or a symbol).
    pub fn head(&self) -> &Term {
        let mut t = self;
        while let TermKind::App(f, _) = &t.0.kind {
            t = f;
        }
        t
    }

    pub fn head_symbol(&self) -> Option<&Symbol> {
        self.head().as_symbol()
    }

    pub fn head_var(&self) -> Option<&Var> {
        self.head().as_var()
    }

    pub fn num_args(&self) -> usize {
        let mut n = 0;
        let mut t = self;
        while let TermKind::App(f, _) = &t.0.kind {
            n += 1;
            t = f;
        }
        n
    }

    /// Arguments of the spine, left to right.
    pub fn args(&self) -> Vec<Term> {
        let mut out = Vec::new();
        let mut t = self;
        while let TermKind::App(f, a) = &t.0.kind {
            out.push(a.clone());
            t = f;
        }
        out.reverse();
        out
    }

    pub fn spine(&self) -> (Term, Vec<Term>) {
        (self.head().clone(), self.args())
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match &self.0.kind {
            TermKind::Var(v) => {
                out.insert(v.clone());
            }
            TermKind::Sym(_) => {}
            TermKind::App(f, a) => {
                f.collect_vars(out);
                a.collect_vars(out);
            }
        }
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut Vec<Symbol>) {
        match &self.0.kind {
            TermKind::Var(_) => {}
            TermKind::Sym(f) => {
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
            TermKind::App(f, a) => {
                f.collect_symbols(out);
                a.collect_symbols(out);
            }
        }
    }

    /// All subterms, including the term itself, in pre-order.
    pub fn subterms(&self) -> Vec<Term> {
        let mut out = Vec::new();
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            if let TermKind::App(f, a) = &t.0.kind {
                stack.push(a.clone());
                stack.push(f.clone());
            }
            out.push(t);
        }
        out
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash || self.0.size != other.0.size {
            return false;
        }
        match (&self.0.kind, &other.0.kind) {
            (TermKind::Var(x), TermKind::Var(y)) => x == y,
            (TermKind::Sym(f), TermKind::Sym(g)) => f == g,
            (TermKind::App(f1, a1), TermKind::App(f2, a2)) => f1 == f2 && a1 == a2,
            _ => false,
        }
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash)
    }
}

// Precedence levels used by the printer; the problem-file parser mirrors them.
const LEVEL_UNARY: u8 = 6;
const LEVEL_APP: u8 = 7;
const LEVEL_ATOM: u8 = 8;

impl Term {
    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let (head, args) = self.spine();
        if let Some(sym) = head.as_symbol() {
            if let Some(op) = TheoryOp::from_symbol(sym) {
                if let (Some((level, left_assoc)), 2) = (op.infix(), args.len()) {
                    let (l, r) = if left_assoc {
                        (level, level + 1)
                    } else {
                        (level + 1, level + 1)
                    };
                    let wrap = level < min;
                    if wrap {
                        f.write_str("(")?;
                    }
                    args[0].fmt_at(f, l)?;
                    write!(f, " {} ", op.name())?;
                    args[1].fmt_at(f, r)?;
                    if wrap {
                        f.write_str(")")?;
                    }
                    return Ok(());
                }
            }
        }
        if args.is_empty() {
            return head.fmt_atom(f, min);
        }
        let wrap = LEVEL_APP < min;
        if wrap {
            f.write_str("(")?;
        }
        head.fmt_atom(f, LEVEL_APP)?;
        for a in &args {
            f.write_str(" ")?;
            a.fmt_at(f, LEVEL_ATOM)?;
        }
        if wrap {
            f.write_str(")")?;
        }
        Ok(())
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        match &self.0.kind {
            TermKind::Var(v) => write!(f, "{v}"),
            TermKind::Sym(s) => match s.as_value() {
                Some(Value::Int(n)) if n < 0 => {
                    if LEVEL_UNARY < min {
                        write!(f, "({n})")
                    } else {
                        write!(f, "{n}")
                    }
                }
                Some(v) => write!(f, "{v}"),
                None => match TheoryOp::from_symbol(s) {
                    Some(op) if op.infix().is_some() => write!(f, "({})", op.name()),
                    _ => write!(f, "{s}"),
                },
            },
            TermKind::App(..) => self.fmt_at(f, min),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}
