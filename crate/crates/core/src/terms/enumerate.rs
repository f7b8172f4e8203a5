use std::collections::{BTreeSet, HashMap};

use super::term::{Symbol, Term, Var};
use super::types::Type;
use super::Signature;

/// The fixed set of variables that enumeration may use besides the signature.
#[derive(Clone, Debug, Default)]
pub struct VariablePool {
    vars: Vec<Var>,
}

const VAR_PREFIXES: [&str; 6] = ["x", "y", "z", "u", "w", "v"];

impl VariablePool {
    pub fn new(vars: Vec<Var>) -> VariablePool {
        VariablePool { vars }
    }

    /// `per_type` variables of each listed type, named `x1, x2, …`, `y1, y2, …` by type order.
    pub fn per_type(types: &[Type], per_type: usize) -> VariablePool {
        let mut vars = Vec::new();
        for (i, ty) in types.iter().enumerate() {
            let prefix = match VAR_PREFIXES.get(i) {
                Some(p) => p.to_string(),
                None => format!("v{i}_"),
            };
            for k in 1..=per_type {
                vars.push(Var::new(&format!("{prefix}{k}"), ty.clone()));
            }
        }
        VariablePool { vars }
    }

    /// Two variables for every type that a subterm over `sig` can have.
    pub fn for_signature(sig: &Signature) -> VariablePool {
        let mut types = BTreeSet::new();
        for f in sig.symbols() {
            occurring_types(f.ty(), &mut types);
        }
        let types: Vec<Type> = types.into_iter().collect();
        VariablePool::per_type(&types, 2)
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}

fn occurring_types(ty: &Type, out: &mut BTreeSet<Type>) {
    if !out.insert(ty.clone()) {
        return;
    }
    if let Type::Arrow(d, c) = ty {
        occurring_types(d, out);
        occurring_types(c, out);
    }
}

/// All well-typed terms built from `symbols` and `pool`, indexed by node count.
pub fn enumerate_by_size(symbols: &[Symbol], pool: &VariablePool, max_size: usize) -> Vec<Vec<Term>> {
    let mut levels: Vec<Vec<Term>> = vec![Vec::new(); max_size + 1];
    let mut by_type: Vec<HashMap<Type, Vec<Term>>> = vec![HashMap::new(); max_size + 1];
    if max_size == 0 {
        return levels;
    }
    let atoms = symbols
        .iter()
        .cloned()
        .map(Term::sym)
        .chain(pool.vars().iter().cloned().map(Term::var));
    for t in atoms {
        by_type[1].entry(t.ty().clone()).or_default().push(t.clone());
        levels[1].push(t);
    }
    for n in 2..=max_size {
        let mut level = Vec::new();
        for k in 1..n - 1 {
            let arg_size = n - 1 - k;
            for fun in &levels[k] {
                let Some(dom) = fun.ty().domain() else { continue };
                if let Some(args) = by_type[arg_size].get(dom) {
                    for a in args {
                        level.push(Term::app_unchecked(fun.clone(), a.clone()));
                    }
                }
            }
        }
        for t in &level {
            by_type[n].entry(t.ty().clone()).or_default().push(t.clone());
        }
        levels[n] = level;
    }
    levels
}

/// Every term of every type with at most `max_size` nodes.
pub fn enumerate_universe(symbols: &[Symbol], pool: &VariablePool, max_size: usize) -> Vec<Term> {
    enumerate_by_size(symbols, pool, max_size)
        .into_iter()
        .flatten()
        .collect()
}

/// Terms of type `ty` with at most `max_size` nodes over `sig` and its default variable pool.
pub fn enumerate_terms(sig: &Signature, max_size: usize, ty: &Type) -> Vec<Term> {
    let pool = VariablePool::for_signature(sig);
    enumerate_universe(sig.symbols(), &pool, max_size)
        .into_iter()
        .filter(|t| t.ty() == ty)
        .collect()
}
