//! The integer/boolean theory: symbols, evaluation, calculation
//! normalization, constraints, value orders and constraint entailment.

mod entail;
mod order;
pub mod smt;

use std::collections::BTreeSet;
use std::fmt;

use crate::terms::{Signature, Sort, Substitution, Symbol, SymbolKind, Term, TermKind, Type, Value, Var};

pub use entail::{
    Assignment, BoundedBackend, EntailStats, Entailer, IntDomain, SmtMode, UnknownReason, Verdict,
    DEFAULT_BOUND,
};
pub use order::{OrderError, SortOrder, ValueOrder};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("integer overflow evaluating `{0}`")]
    Overflow(String),
    #[error("`{0}` is not a ground theory term of base type")]
    NotEvaluable(String),
    #[error("operator `{op}` applied to ill-sorted values")]
    IllSorted { op: &'static str },
}

/// The core theory operators.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum TheoryOp {
    Add,
    Sub,
    Mul,
    Neg,
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
    Ne,
    And,
    Or,
    Not,
}

impl TheoryOp {
    pub const ALL: [TheoryOp; 13] = [
        TheoryOp::Add,
        TheoryOp::Sub,
        TheoryOp::Mul,
        TheoryOp::Neg,
        TheoryOp::Gt,
        TheoryOp::Ge,
        TheoryOp::Lt,
        TheoryOp::Le,
        TheoryOp::Eq,
        TheoryOp::Ne,
        TheoryOp::And,
        TheoryOp::Or,
        TheoryOp::Not,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoryOp::Add => "+",
            TheoryOp::Sub => "-",
            TheoryOp::Mul => "*",
            TheoryOp::Neg => "neg",
            TheoryOp::Gt => ">",
            TheoryOp::Ge => ">=",
            TheoryOp::Lt => "<",
            TheoryOp::Le => "<=",
            TheoryOp::Eq => "=",
            TheoryOp::Ne => "!=",
            TheoryOp::And => "&&",
            TheoryOp::Or => "||",
            TheoryOp::Not => "not",
        }
    }

    pub fn from_name(name: &str) -> Option<TheoryOp> {
        TheoryOp::ALL.into_iter().find(|op| op.name() == name)
    }

    pub fn from_symbol(f: &Symbol) -> Option<TheoryOp> {
        match f.kind() {
            SymbolKind::Theory => TheoryOp::from_name(f.name()),
            _ => None,
        }
    }

    /// Printer/parser level and left-associativity of binary infix operators.
    pub fn infix(self) -> Option<(u8, bool)> {
        match self {
            TheoryOp::Or => Some((1, true)),
            TheoryOp::And => Some((2, true)),
            TheoryOp::Gt
            | TheoryOp::Ge
            | TheoryOp::Lt
            | TheoryOp::Le
            | TheoryOp::Eq
            | TheoryOp::Ne => Some((3, false)),
            TheoryOp::Add | TheoryOp::Sub => Some((4, true)),
            TheoryOp::Mul => Some((5, true)),
            TheoryOp::Neg | TheoryOp::Not => None,
        }
    }

    pub fn ty(self) -> Type {
        let int = || Type::base(Sort::int());
        let boolean = || Type::base(Sort::bool());
        match self {
            TheoryOp::Add | TheoryOp::Sub | TheoryOp::Mul => Type::arrows([int(), int()], int()),
            TheoryOp::Neg => Type::arrow(int(), int()),
            TheoryOp::Gt
            | TheoryOp::Ge
            | TheoryOp::Lt
            | TheoryOp::Le
            | TheoryOp::Eq
            | TheoryOp::Ne => Type::arrows([int(), int()], boolean()),
            TheoryOp::And | TheoryOp::Or => Type::arrows([boolean(), boolean()], boolean()),
            TheoryOp::Not => Type::arrow(boolean(), boolean()),
        }
    }

    pub fn symbol(self) -> Symbol {
        Symbol::theory(self.name(), self.ty())
    }

    pub fn eval(self, args: &[Value]) -> Result<Value, EvalError> {
        use TheoryOp::*;
        let ill = || EvalError::IllSorted { op: self.name() };
        let int = |i: usize| args.get(i).and_then(Value::as_int).ok_or_else(ill);
        let boolean = |i: usize| args.get(i).and_then(Value::as_bool).ok_or_else(ill);
        let overflow = || EvalError::Overflow(format!("{} {:?}", self.name(), args));
        Ok(match self {
            Add => Value::Int(int(0)?.checked_add(int(1)?).ok_or_else(overflow)?),
            Sub => Value::Int(int(0)?.checked_sub(int(1)?).ok_or_else(overflow)?),
            Mul => Value::Int(int(0)?.checked_mul(int(1)?).ok_or_else(overflow)?),
            Neg => Value::Int(int(0)?.checked_neg().ok_or_else(overflow)?),
            Gt => Value::Bool(int(0)? > int(1)?),
            Ge => Value::Bool(int(0)? >= int(1)?),
            Lt => Value::Bool(int(0)? < int(1)?),
            Le => Value::Bool(int(0)? <= int(1)?),
            Eq => Value::Bool(int(0)? == int(1)?),
            Ne => Value::Bool(int(0)? != int(1)?),
            And => Value::Bool(boolean(0)? && boolean(1)?),
            Or => Value::Bool(boolean(0)? || boolean(1)?),
            Not => Value::Bool(!boolean(0)?),
        })
    }

    /// Builds `self a b` (or `self a` for unary operators).
    pub fn apply(self, args: impl IntoIterator<Item = Term>) -> Term {
        Term::apply(Term::sym(self.symbol()), args).expect("theory operator applied to ill-sorted terms")
    }
}

/// Sorts interpreted by the theory.
pub fn is_theory_sort(sort: &Sort) -> bool {
    *sort == Sort::int() || *sort == Sort::bool()
}

/// Adds every theory operator to `sig`.
pub fn declare_theory(sig: &mut Signature) -> Result<(), crate::terms::TypeError> {
    for op in TheoryOp::ALL {
        sig.declare(op.symbol())?;
    }
    Ok(())
}

pub fn int(n: i64) -> Term {
    Term::value(Value::Int(n))
}

pub fn boolean(b: bool) -> Term {
    Term::value(Value::Bool(b))
}

/// Evaluates a ground theory term of base type.
pub fn eval_ground(t: &Term) -> Result<Value, EvalError> {
    eval_with(t, &|_| None)
}

/// Evaluates a theory term of base type, reading variables from `env`.
pub fn eval_with(t: &Term, env: &dyn Fn(&Var) -> Option<Value>) -> Result<Value, EvalError> {
    let not_evaluable = || EvalError::NotEvaluable(t.to_string());
    match t.kind() {
        TermKind::Var(x) => env(x).ok_or_else(not_evaluable),
        TermKind::Sym(f) => f.as_value().ok_or_else(not_evaluable),
        TermKind::App(..) => {
            let head = t.head_symbol().ok_or_else(not_evaluable)?;
            let op = TheoryOp::from_symbol(head).ok_or_else(not_evaluable)?;
            let args = t.args();
            if args.len() != head.arity() {
                return Err(not_evaluable());
            }
            let vals = args
                .iter()
                .map(|a| eval_with(a, env))
                .collect::<Result<Vec<_>, _>>()?;
            op.eval(&vals)
        }
    }
}

fn calculable(t: &Term) -> bool {
    t.is_theory() && t.is_ground() && t.ty().is_base() && t.as_value().is_none()
}

/// `t↓κ`: replaces every maximal ground theory subterm of base type by its value.
pub fn calc_normalize(t: &Term) -> Result<Term, EvalError> {
    if t.as_value().is_some() {
        return Ok(t.clone());
    }
    if calculable(t) {
        return Ok(Term::value(eval_ground(t)?));
    }
    match t.kind() {
        TermKind::App(f, a) => {
            let nf = calc_normalize(f)?;
            let na = calc_normalize(a)?;
            Ok(Term::app_unchecked(nf, na))
        }
        _ => Ok(t.clone()),
    }
}

/// One calculation step: evaluates the leftmost innermost calculable subterm
/// whose arguments are all values. `None` if `t` is in normal form.
pub fn calc_step(t: &Term) -> Option<Result<Term, EvalError>> {
    if calculable(t) {
        let (head, args) = t.spine();
        if let Some(i) = args.iter().position(|a| a.as_value().is_none()) {
            let stepped = calc_step(&args[i])?;
            return Some(stepped.map(|ai| {
                let mut args = args.clone();
                args[i] = ai;
                Term::apply_unchecked(head.clone(), args)
            }));
        }
        return Some(eval_ground(t).map(Term::value));
    }
    match t.kind() {
        TermKind::App(f, a) => {
            if let Some(r) = calc_step(f) {
                return Some(r.map(|nf| Term::app_unchecked(nf, a.clone())));
            }
            calc_step(a).map(|r| r.map(|na| Term::app_unchecked(f.clone(), na)))
        }
        _ => None,
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("constraint `{0}` must have sort Bool")]
    NotBool(String),
    #[error("constraint `{0}` contains a non-theory symbol")]
    NotTheory(String),
    #[error("variable `{0}` in a constraint must have sort Int or Bool")]
    BadVariable(String),
}

/// A Bool-sorted theory term.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Constraint(Term);

impl Constraint {
    pub fn new(t: Term) -> Result<Constraint, ConstraintError> {
        if t.ty() != &Type::base(Sort::bool()) {
            return Err(ConstraintError::NotBool(t.to_string()));
        }
        if !t.is_theory() {
            return Err(ConstraintError::NotTheory(t.to_string()));
        }
        for x in t.vars() {
            match x.ty().as_sort() {
                Some(s) if is_theory_sort(s) => {}
                _ => return Err(ConstraintError::BadVariable(x.name().to_string())),
            }
        }
        Ok(Constraint(t))
    }

    pub fn truth() -> Constraint {
        Constraint(boolean(true))
    }

    pub fn falsity() -> Constraint {
        Constraint(boolean(false))
    }

    pub fn term(&self) -> &Term {
        &self.0
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.0.vars()
    }

    pub fn is_trivially_true(&self) -> bool {
        self.0.as_value() == Some(Value::Bool(true))
    }

    pub fn and(&self, other: &Constraint) -> Constraint {
        Constraint(TheoryOp::And.apply([self.0.clone(), other.0.clone()]))
    }

    pub fn or(&self, other: &Constraint) -> Constraint {
        Constraint(TheoryOp::Or.apply([self.0.clone(), other.0.clone()]))
    }

    pub fn not(&self) -> Constraint {
        Constraint(TheoryOp::Not.apply([self.0.clone()]))
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum RespectError {
    #[error("variable `{0}` must have sort Int or Bool to be grounded")]
    NotTheorySorted(String),
    #[error("substitution is undefined on `{0}`")]
    Undefined(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A set of variables that must be instantiated by ground theory terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LVarSet(BTreeSet<Var>);

impl LVarSet {
    pub fn new(vars: impl IntoIterator<Item = Var>) -> Result<LVarSet, RespectError> {
        let mut set = BTreeSet::new();
        for x in vars {
            match x.ty().as_sort() {
                Some(s) if is_theory_sort(s) => {
                    set.insert(x);
                }
                _ => return Err(RespectError::NotTheorySorted(x.name().to_string())),
            }
        }
        Ok(LVarSet(set))
    }

    pub fn empty() -> LVarSet {
        LVarSet::default()
    }

    pub fn contains(&self, x: &Var) -> bool {
        self.0.contains(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Var> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Var(t) ⊆ L`.
    pub fn covers(&self, t: &Term) -> bool {
        t.vars().iter().all(|x| self.0.contains(x))
    }
}

impl fmt::Display for LVarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(Var::name).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

/// Whether `gamma` maps every `x ∈ L` to a ground theory term and makes `phi` true.
pub fn respects(gamma: &Substitution, phi: &Constraint, lvars: &LVarSet) -> Result<bool, RespectError> {
    for x in phi.vars().iter().chain(lvars.iter()) {
        if !gamma.contains(x) {
            return Err(RespectError::Undefined(x.name().to_string()));
        }
    }
    for x in lvars.iter() {
        let t = gamma.get(x).expect("checked above");
        if !(t.is_ground() && t.is_theory()) {
            return Ok(false);
        }
    }
    let instance = calc_normalize(&gamma.apply(phi.term()))?;
    Ok(instance.as_value() == Some(Value::Bool(true)))
}
