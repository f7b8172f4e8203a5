use std::fmt;
use std::sync::Arc;

use super::TypeError;

/// A base type. Two sorts are equal iff their names are.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Sort(Arc<str>);

impl Sort {
    pub fn new(name: &str) -> Result<Sort, TypeError> {
        if name.is_empty() {
            return Err(TypeError::EmptySortName);
        }
        Ok(Sort(Arc::from(name)))
    }

    pub fn int() -> Sort {
        Sort(Arc::from("Int"))
    }

    pub fn bool() -> Sort {
        Sort(Arc::from("Bool"))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A simple type: a sort or an arrow `σ ⇒ τ`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Type {
    Base(Sort),
    Arrow(Arc<Type>, Arc<Type>),
}

impl Type {
    pub fn base(sort: Sort) -> Type {
        Type::Base(sort)
    }

    pub fn arrow(domain: Type, codomain: Type) -> Type {
        Type::Arrow(Arc::new(domain), Arc::new(codomain))
    }

    /// Builds `args[0] ⇒ … ⇒ args[n-1] ⇒ result`.
    pub fn arrows(args: impl IntoIterator<Item = Type>, result: Type) -> Type {
        let args: Vec<Type> = args.into_iter().collect();
        args.into_iter().rev().fold(result, |acc, a| Type::arrow(a, acc))
    }

    pub fn is_base(&self) -> bool {
        matches!(self, Type::Base(_))
    }

    pub fn as_sort(&self) -> Option<&Sort> {
        match self {
            Type::Base(s) => Some(s),
            Type::Arrow(..) => None,
        }
    }

    pub fn domain(&self) -> Option<&Type> {
        match self {
            Type::Arrow(d, _) => Some(d),
            Type::Base(_) => None,
        }
    }

    pub fn codomain(&self) -> Option<&Type> {
        match self {
            Type::Arrow(_, c) => Some(c),
            Type::Base(_) => None,
        }
    }

    /// The `m` in `σ₁ ⇒ … ⇒ σₘ ⇒ ι`.
    pub fn arity(&self) -> usize {
        let mut n = 0;
        let mut ty = self;
        while let Type::Arrow(_, c) = ty {
            n += 1;
            ty = c;
        }
        n
    }

    /// Argument types `σ₁ … σₘ`.
    pub fn arg_types(&self) -> Vec<&Type> {
        let mut out = Vec::new();
        let mut ty = self;
        while let Type::Arrow(d, c) = ty {
            out.push(&**d);
            ty = c;
        }
        out
    }

    /// The final sort `ι`.
    pub fn result_sort(&self) -> &Sort {
        let mut ty = self;
        loop {
            match ty {
                Type::Base(s) => return s,
                Type::Arrow(_, c) => ty = c,
            }
        }
    }

    /// The type left after applying `n` arguments, if there are that many.
    pub fn after_args(&self, n: usize) -> Option<&Type> {
        let mut ty = self;
        for _ in 0..n {
            ty = ty.codomain()?;
        }
        Some(ty)
    }

    /// Equality of type structures, computed without allocating.
    pub fn same_structure(&self, other: &Type) -> bool {
        match (self, other) {
            (Type::Base(_), Type::Base(_)) => true,
            (Type::Arrow(d1, c1), Type::Arrow(d2, c2)) => {
                d1.same_structure(d2) && c1.same_structure(c2)
            }
            _ => false,
        }
    }

    pub fn structure(&self) -> TypeStructure {
        collapse(self)
    }

    /// All sorts mentioned by the type.
    pub fn sorts(&self) -> Vec<Sort> {
        let mut out = Vec::new();
        self.collect_sorts(&mut out);
        out
    }

    fn collect_sorts(&self, out: &mut Vec<Sort>) {
        match self {
            Type::Base(s) => {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
            Type::Arrow(d, c) => {
                d.collect_sorts(out);
                c.collect_sorts(out);
            }
        }
    }

    /// Replaces every sort through `rename`.
    pub fn map_sorts(&self, rename: &impl Fn(&Sort) -> Sort) -> Type {
        match self {
            Type::Base(s) => Type::Base(rename(s)),
            Type::Arrow(d, c) => Type::arrow(d.map_sorts(rename), c.map_sorts(rename)),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Base(s) => write!(f, "{s}"),
            Type::Arrow(d, c) => {
                if d.is_base() {
                    write!(f, "{d} -> {c}")
                } else {
                    write!(f, "({d}) -> {c}")
                }
            }
        }
    }
}

/// The arity skeleton of a type once all sorts are identified.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct TypeStructure {
    pub args: Vec<TypeStructure>,
}

impl TypeStructure {
    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

impl fmt::Display for TypeStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.args {
            if a.args.is_empty() {
                write!(f, "o -> ")?;
            } else {
                write!(f, "({a}) -> ")?;
            }
        }
        write!(f, "o")
    }
}

pub fn collapse(ty: &Type) -> TypeStructure {
    TypeStructure {
        args: ty.arg_types().into_iter().map(collapse).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(name: &str) -> Type {
        Type::base(Sort::new(name).unwrap())
    }

    #[test]
    fn base_collapses_to_empty_skeleton() {
        assert_eq!(collapse(&s("i")), TypeStructure { args: vec![] });
    }

    #[test]
    fn unary_arrow_has_one_base_argument() {
        let ty = Type::arrow(s("i"), s("i"));
        assert_eq!(
            collapse(&ty),
            TypeStructure {
                args: vec![TypeStructure::default()]
            }
        );
    }

    #[test]
    fn collapse_identifies_sorts() {
        // (ι ⇒ ι) ⇒ κ ⇒ ι  vs  (κ ⇒ κ) ⇒ ι ⇒ ι
        let left = Type::arrows([Type::arrow(s("i"), s("i")), s("k")], s("i"));
        let right = Type::arrows([Type::arrow(s("k"), s("k")), s("i")], s("i"));
        // hand transcription: [[[]], []]
        let expected = TypeStructure {
            args: vec![
                TypeStructure {
                    args: vec![TypeStructure::default()],
                },
                TypeStructure::default(),
            ],
        };
        assert_eq!(collapse(&left), expected);
        assert_eq!(collapse(&right), expected);
        assert!(left.same_structure(&right));
        assert_ne!(left, right);
    }

    #[test]
    fn empty_sort_name_rejected() {
        assert!(matches!(Sort::new(""), Err(TypeError::EmptySortName)));
    }

    #[test]
    fn arity_and_result() {
        let ty = Type::arrows([s("a"), Type::arrow(s("b"), s("c"))], s("d"));
        assert_eq!(ty.arity(), 2);
        assert_eq!(ty.result_sort().name(), "d");
        assert_eq!(ty.after_args(1).unwrap().arity(), 1);
        assert!(ty.after_args(3).is_none());
        assert_eq!(ty.to_string(), "a -> (b -> c) -> d");
    }
}
