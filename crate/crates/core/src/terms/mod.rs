//! Simple types, curried terms, substitutions and contexts.
//!
//! Terms are λ-free: a term is a variable, a function symbol, or an
//! application. Every term is viewed as a head (variable or symbol) applied to
//! a spine of arguments. All values are immutable and cheap to clone.

mod enumerate;
mod subst;
mod term;
mod types;

use std::collections::HashMap;

pub use enumerate::{enumerate_by_size, enumerate_terms, enumerate_universe, VariablePool};
pub use subst::{apply_substitution, Context, Substitution};
pub use term::{Symbol, SymbolKind, Term, TermKind, Value, Var};
pub use types::{collapse, Sort, Type, TypeStructure};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("sort names must be nonempty")]
    EmptySortName,
    #[error("`{fun}` expects an argument of type {expected}, found {found}")]
    ArgumentMismatch {
        fun: String,
        expected: Type,
        found: Type,
    },
    #[error("`{fun}` has base type {ty} and cannot be applied")]
    NotAFunction { fun: String, ty: Type },
    #[error("substitution for `{var}` must have type {expected}, found {found}")]
    SubstitutionMismatch {
        var: String,
        expected: Type,
        found: Type,
    },
    #[error("hole has type {expected}, cannot plug a term of type {found}")]
    HoleMismatch { expected: Type, found: Type },
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
}

/// A finite list of declared function symbols.
///
/// The ordering itself allows infinitely many symbols as long as the arity
/// within each precedence class is bounded; here every symbol is declared
/// explicitly. Value symbols are not listed: they are created on demand.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    symbols: Vec<Symbol>,
    by_name: HashMap<String, usize>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn from_symbols(symbols: impl IntoIterator<Item = Symbol>) -> Result<Signature, TypeError> {
        let mut sig = Signature::new();
        for f in symbols {
            sig.declare(f)?;
        }
        Ok(sig)
    }

    pub fn declare(&mut self, f: Symbol) -> Result<(), TypeError> {
        if self.by_name.contains_key(f.name()) {
            return Err(TypeError::DuplicateSymbol(f.name().to_string()));
        }
        self.by_name.insert(f.name().to_string(), self.symbols.len());
        self.symbols.push(f);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<&Symbol> {
        self.by_name.get(name).map(|&i| &self.symbols[i])
    }

    /// Symbols in declaration order.
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn plain_symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter().filter(|f| !f.is_theory())
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}
