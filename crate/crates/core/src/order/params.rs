use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::terms::Symbol;

/// Outcome of comparing two symbols in a quasi-order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PrecCmp {
    Greater,
    Equivalent,
    Smaller,
    Incomparable,
}

impl PrecCmp {
    pub fn flip(self) -> PrecCmp {
        match self {
            PrecCmp::Greater => PrecCmp::Smaller,
            PrecCmp::Smaller => PrecCmp::Greater,
            other => other,
        }
    }
}

/// A quasi-order on function symbols. `▷` is `Greater`, `≡` is `Equivalent`.
pub trait SymbolOrder: Sync {
    fn compare(&self, f: &Symbol, g: &Symbol) -> PrecCmp;

    fn greater(&self, f: &Symbol, g: &Symbol) -> bool {
        self.compare(f, g) == PrecCmp::Greater
    }

    fn equivalent(&self, f: &Symbol, g: &Symbol) -> bool {
        self.compare(f, g) == PrecCmp::Equivalent
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("precedence is cyclic: `{0}` > `{1}` contradicts `{1}` >= `{0}`")]
    Cycle(String, String),
    #[error("filter position {pos} out of range for `{sym}` of arity {arity}")]
    FilterRange { sym: String, pos: usize, arity: usize },
    #[error("theory symbol `{0}` must regard all of its arguments")]
    TheoryFiltered(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PrecDecl {
    Greater,
    Equivalent,
}

/// A finite precedence `⊵`, stored as the reflexive-transitive closure of
/// its declarations. Undeclared symbols are only equivalent to themselves.
#[derive(Clone, Debug, Default)]
pub struct Precedence {
    symbols: Vec<Symbol>,
    index: HashMap<Symbol, usize>,
    decls: Vec<(Symbol, PrecDecl, Symbol)>,
    ge: Vec<Vec<bool>>,
}

impl Precedence {
    pub fn new() -> Precedence {
        Precedence::default()
    }

    /// `classes[0] ▷ classes[1] ▷ …`, symbols within a class equivalent.
    pub fn from_classes(classes: &[Vec<Symbol>]) -> Precedence {
        let mut p = Precedence::new();
        for class in classes {
            for f in class {
                p.intern(f);
            }
        }
        let n = p.symbols.len();
        let mut rank = vec![0usize; n];
        for (r, class) in classes.iter().enumerate() {
            for f in class {
                rank[p.index[f]] = r;
            }
            for w in class.windows(2) {
                p.decls.push((w[0].clone(), PrecDecl::Equivalent, w[1].clone()));
            }
        }
        for w in classes.windows(2) {
            if let (Some(f), Some(g)) = (w[0].first(), w[1].first()) {
                p.decls.push((f.clone(), PrecDecl::Greater, g.clone()));
            }
        }
        p.ge = (0..n)
            .map(|i| (0..n).map(|j| rank[i] <= rank[j]).collect())
            .collect();
        p
    }

    fn intern(&mut self, f: &Symbol) -> usize {
        if let Some(&i) = self.index.get(f) {
            return i;
        }
        let i = self.symbols.len();
        self.symbols.push(f.clone());
        self.index.insert(f.clone(), i);
        for row in &mut self.ge {
            row.push(false);
        }
        let mut row = vec![false; i + 1];
        row[i] = true;
        self.ge.push(row);
        i
    }

    /// Registers `f` without relating it to anything.
    pub fn add_symbol(&mut self, f: &Symbol) {
        self.intern(f);
    }

    pub fn declare(&mut self, f: &Symbol, rel: PrecDecl, g: &Symbol) -> Result<(), ParamError> {
        let i = self.intern(f);
        let j = self.intern(g);
        let mut next = self.ge.clone();
        let mut add = |a: usize, b: usize| {
            let n = next.len();
            // Everything above a is now above everything below b.
            let above: Vec<usize> = (0..n).filter(|&k| next[k][a]).collect();
            let below: Vec<usize> = (0..n).filter(|&k| next[b][k]).collect();
            for &u in &above {
                for &v in &below {
                    next[u][v] = true;
                }
            }
        };
        add(i, j);
        if rel == PrecDecl::Equivalent {
            add(j, i);
        }
        for (a, r, b) in self.decls.iter().chain(std::iter::once(&(f.clone(), rel, g.clone()))) {
            if *r == PrecDecl::Greater && next[self.index[b]][self.index[a]] {
                return Err(ParamError::Cycle(a.to_string(), b.to_string()));
            }
        }
        self.ge = next;
        self.decls.push((f.clone(), rel, g.clone()));
        Ok(())
    }

    /// Builds the closure without rejecting contradictions; use
    /// [`HorpoParams::validate`] to detect them.
    pub fn from_declarations_unchecked(decls: &[(Symbol, PrecDecl, Symbol)]) -> Precedence {
        let mut p = Precedence::new();
        for (f, _, g) in decls {
            p.intern(f);
            p.intern(g);
        }
        let n = p.symbols.len();
        for (f, rel, g) in decls {
            let (i, j) = (p.index[f], p.index[g]);
            p.ge[i][j] = true;
            if *rel == PrecDecl::Equivalent {
                p.ge[j][i] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if p.ge[i][k] {
                    for j in 0..n {
                        if p.ge[k][j] {
                            p.ge[i][j] = true;
                        }
                    }
                }
            }
        }
        p.decls = decls.to_vec();
        p
    }

    pub fn greater_than(mut self, f: &Symbol, g: &Symbol) -> Result<Precedence, ParamError> {
        self.declare(f, PrecDecl::Greater, g)?;
        Ok(self)
    }

    pub fn equivalent_to(mut self, f: &Symbol, g: &Symbol) -> Result<Precedence, ParamError> {
        self.declare(f, PrecDecl::Equivalent, g)?;
        Ok(self)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn declarations(&self) -> &[(Symbol, PrecDecl, Symbol)] {
        &self.decls
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    /// Re-checks that `▷` is irreflexive on the closure; always true for a
    /// precedence built through `declare`.
    pub fn is_well_founded(&self) -> bool {
        self.decls.iter().all(|(a, r, b)| {
            *r == PrecDecl::Equivalent || !self.ge[self.index[b]][self.index[a]]
        })
    }

    /// Equivalence classes, each listed in declaration order, together with
    /// the maximal arity occurring in the class.
    pub fn classes(&self) -> Vec<(Vec<Symbol>, usize)> {
        let n = self.symbols.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for i in 0..n {
            if seen[i] {
                continue;
            }
            let class: Vec<Symbol> = (0..n)
                .filter(|&j| self.ge[i][j] && self.ge[j][i])
                .inspect(|&j| seen[j] = true)
                .map(|j| self.symbols[j].clone())
                .collect();
            let arity = class.iter().map(Symbol::arity).max().unwrap_or(0);
            out.push((class, arity));
        }
        out
    }

    fn is_total(&self) -> bool {
        let n = self.symbols.len();
        (0..n).all(|i| (0..n).all(|j| self.ge[i][j] || self.ge[j][i]))
    }
}

impl SymbolOrder for Precedence {
    fn compare(&self, f: &Symbol, g: &Symbol) -> PrecCmp {
        if f == g {
            return PrecCmp::Equivalent;
        }
        let (Some(&i), Some(&j)) = (self.index.get(f), self.index.get(g)) else {
            return PrecCmp::Incomparable;
        };
        match (self.ge[i][j], self.ge[j][i]) {
            (true, true) => PrecCmp::Equivalent,
            (true, false) => PrecCmp::Greater,
            (false, true) => PrecCmp::Smaller,
            (false, false) => PrecCmp::Incomparable,
        }
    }
}

impl fmt::Display for Precedence {
    /// A chain `f > g ~ h` for total precedences, otherwise the covering pairs.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut classes: Vec<Vec<Symbol>> = self
            .classes()
            .into_iter()
            .map(|(c, _)| c)
            .filter(|c| c.len() > 1 || self.decls.iter().any(|(a, _, b)| *a == c[0] || *b == c[0]))
            .collect();
        if classes.is_empty() {
            return f.write_str("(empty)");
        }
        let above = |a: &Symbol, b: &Symbol| self.compare(a, b) == PrecCmp::Greater;
        if self.is_total() {
            classes.sort_by(|a, b| {
                if above(&a[0], &b[0]) {
                    std::cmp::Ordering::Less
                } else if above(&b[0], &a[0]) {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Equal
                }
            });
            let parts: Vec<String> = classes
                .iter()
                .map(|c| c.iter().map(Symbol::to_string).collect::<Vec<_>>().join(" ~ "))
                .collect();
            return f.write_str(&parts.join(" > "));
        }
        let mut parts = Vec::new();
        for c in &classes {
            if c.len() > 1 {
                parts.push(c.iter().map(Symbol::to_string).collect::<Vec<_>>().join(" ~ "));
            }
        }
        for a in &classes {
            for b in &classes {
                if above(&a[0], &b[0])
                    && !classes
                        .iter()
                        .any(|m| above(&a[0], &m[0]) && above(&m[0], &b[0]))
                {
                    parts.push(format!("{} > {}", a[0], b[0]));
                }
            }
        }
        f.write_str(&parts.join(", "))
    }
}

/// `π`: the argument positions (1-based) each symbol regards. Symbols
/// without an entry regard all positions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ArgumentFilter {
    map: HashMap<Symbol, BTreeSet<usize>>,
}

impl ArgumentFilter {
    pub fn full() -> ArgumentFilter {
        ArgumentFilter::default()
    }

    pub fn set(&mut self, f: &Symbol, positions: impl IntoIterator<Item = usize>) -> Result<(), ParamError> {
        let arity = f.arity();
        let positions: BTreeSet<usize> = positions.into_iter().collect();
        if let Some(&pos) = positions.iter().find(|&&p| p == 0 || p > arity) {
            return Err(ParamError::FilterRange {
                sym: f.to_string(),
                pos,
                arity,
            });
        }
        if positions.len() == arity {
            self.map.remove(f);
        } else {
            self.map.insert(f.clone(), positions);
        }
        Ok(())
    }

    pub fn with(mut self, f: &Symbol, positions: impl IntoIterator<Item = usize>) -> Result<ArgumentFilter, ParamError> {
        self.set(f, positions)?;
        Ok(self)
    }

    /// `i ∈ π(f)`.
    pub fn regards(&self, f: &Symbol, i: usize) -> bool {
        match self.map.get(f) {
            Some(set) => set.contains(&i),
            None => i >= 1 && i <= f.arity(),
        }
    }

    pub fn positions(&self, f: &Symbol) -> BTreeSet<usize> {
        match self.map.get(f) {
            Some(set) => set.clone(),
            None => (1..=f.arity()).collect(),
        }
    }

    /// `π(f) = π(g)`.
    pub fn same(&self, f: &Symbol, g: &Symbol) -> bool {
        match (self.map.get(f), self.map.get(g)) {
            (None, None) => f.arity() == g.arity(),
            _ => self.positions(f) == self.positions(g),
        }
    }

    /// Symbols with a non-full filter.
    pub fn restricted(&self) -> impl Iterator<Item = (&Symbol, &BTreeSet<usize>)> {
        self.map.iter()
    }

    pub fn is_full(&self) -> bool {
        self.map.is_empty()
    }
}

impl fmt::Display for ArgumentFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut entries: Vec<(&Symbol, &BTreeSet<usize>)> = self.map.iter().collect();
        entries.sort_by(|a, b| a.0.name().cmp(b.0.name()));
        let parts: Vec<String> = entries
            .iter()
            .map(|(s, pos)| {
                let p: Vec<String> = pos.iter().map(usize::to_string).collect();
                format!("pi({s}) = {{{}}}", p.join(","))
            })
            .collect();
        if parts.is_empty() {
            f.write_str("(full)")
        } else {
            f.write_str(&parts.join(", "))
        }
    }
}

/// The tunable parameters of the ordering.
#[derive(Clone, Debug, Default)]
pub struct HorpoParams {
    pub precedence: Precedence,
    pub filter: ArgumentFilter,
}

impl HorpoParams {
    pub fn new(precedence: Precedence, filter: ArgumentFilter) -> HorpoParams {
        HorpoParams { precedence, filter }
    }

    /// Checks well-foundedness of the precedence; with `theory`, also that
    /// theory symbols are unfiltered.
    pub fn validate(&self, theory: bool) -> Result<(), ParamError> {
        if let Some((a, _, b)) = self.precedence.declarations().iter().find(|(a, r, b)| {
            *r == PrecDecl::Greater && self.precedence.compare(b, a) != PrecCmp::Smaller
        }) {
            return Err(ParamError::Cycle(a.to_string(), b.to_string()));
        }
        if theory {
            if let Some((f, _)) = self.filter.restricted().find(|(f, _)| f.is_theory()) {
                return Err(ParamError::TheoryFiltered(f.to_string()));
            }
        }
        Ok(())
    }
}
