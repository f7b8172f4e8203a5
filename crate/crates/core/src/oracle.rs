//! A literal, unmemoized transcription of the unconstrained rules, relation
//! graphs over enumerated universes, and brute-force lemma checks.
//!
//! Nothing here reuses the clause search of [`crate::order`].

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::order::{ArgumentFilter, Fidelity, Horpo, HorpoParams, ParamError, PrecCmp, Precedence, Rel, SymbolOrder};
use crate::terms::{enumerate_universe, Sort, Substitution, Symbol, Term, Type, VariablePool};

/// Default bound on the number of terms in a relation graph.
pub const UNIVERSE_CAP: usize = 5000;

struct Naive<'a> {
    prec: &'a Precedence,
    filter: &'a ArgumentFilter,
    fidelity: Fidelity,
}

impl Naive<'_> {
    fn regarded(&self, f: &Symbol, upto: usize) -> Vec<usize> {
        (1..=upto).filter(|&i| self.filter.regards(f, i)).collect()
    }

    fn approx(&self, s: &Term, t: &Term) -> bool {
        if !s.ty().same_structure(t.ty()) {
            return false;
        }
        let (hs, sa) = s.spine();
        let (ht, ta) = t.spine();
        if sa.len() != ta.len() {
            return false;
        }
        if let (Some(x), Some(y)) = (hs.as_var(), ht.as_var()) {
            return x == y && sa.iter().zip(&ta).all(|(a, b)| self.approx(a, b));
        }
        if let (Some(f), Some(g)) = (hs.as_symbol(), ht.as_symbol()) {
            return f.ty().same_structure(g.ty())
                && self.prec.compare(f, g) == PrecCmp::Equivalent
                && self.filter.same(f, g)
                && self.regarded(f, sa.len()).into_iter().all(|i| self.approx(&sa[i - 1], &ta[i - 1]));
        }
        false
    }

    fn geq(&self, s: &Term, t: &Term) -> bool {
        self.approx(s, t) || self.gt(s, t)
    }

    fn gt(&self, s: &Term, t: &Term) -> bool {
        if !s.ty().same_structure(t.ty()) {
            return false;
        }
        let (hs, sa) = s.spine();
        let (ht, ta) = t.spine();
        if sa.len() == ta.len() {
            if let (Some(x), Some(y)) = (hs.as_var(), ht.as_var()) {
                if x == y
                    && sa.iter().zip(&ta).all(|(a, b)| self.geq(a, b))
                    && sa.iter().zip(&ta).any(|(a, b)| self.gt(a, b))
                {
                    return true;
                }
            }
            if let (Some(f), Some(g)) = (hs.as_symbol(), ht.as_symbol()) {
                let pos = self.regarded(f, sa.len());
                if f.ty().same_structure(g.ty())
                    && self.prec.compare(f, g) == PrecCmp::Equivalent
                    && self.filter.same(f, g)
                    && pos.iter().all(|&i| self.geq(&sa[i - 1], &ta[i - 1]))
                    && pos.iter().any(|&i| self.gt(&sa[i - 1], &ta[i - 1]))
                {
                    return true;
                }
            }
        }
        self.rpo(s, t)
    }

    fn rpo(&self, s: &Term, t: &Term) -> bool {
        let (hs, sa) = s.spine();
        let Some(f) = hs.as_symbol() else { return false };
        let n = sa.len();
        if !(n + 1..=f.arity()).all(|k| self.filter.regards(f, k)) {
            return false;
        }
        // Rpo-select
        if self.regarded(f, n).into_iter().any(|i| self.geq(&sa[i - 1], t)) {
            return true;
        }
        let (ht, ta) = t.spine();
        // Rpo-appl, every split t = t0 t1 … tm with m ≥ 1
        for m in 1..=ta.len() {
            let keep = ta.len() - m;
            let head_ok = match self.fidelity {
                Fidelity::Paper => true,
                Fidelity::Sound => self.rpo(s, &Term::apply_unchecked(ht.clone(), ta[..keep].iter().cloned())),
            };
            if head_ok && ta[keep..].iter().all(|ti| self.rpo(s, ti)) {
                return true;
            }
        }
        let Some(g) = ht.as_symbol() else { return false };
        let m = ta.len();
        match self.prec.compare(f, g) {
            // Rpo-copy
            PrecCmp::Greater => self.regarded(g, m).into_iter().all(|i| self.rpo(s, &ta[i - 1])),
            // Rpo-lex
            PrecCmp::Equivalent => (1..=n.min(m)).any(|i| {
                self.filter.regards(f, i)
                    && self.filter.regards(g, i)
                    && (1..=i).all(|j| self.filter.regards(f, j) == self.filter.regards(g, j))
                    && (1..i).all(|j| !self.filter.regards(f, j) || self.approx(&sa[j - 1], &ta[j - 1]))
                    && self.gt(&sa[i - 1], &ta[i - 1])
                    && (i + 1..=m).all(|j| !self.filter.regards(g, j) || self.rpo(s, &ta[j - 1]))
            }),
            _ => false,
        }
    }
}

/// Direct evaluation of one unconstrained judgment.
pub fn naive_relate(s: &Term, t: &Term, rel: Rel, params: &HorpoParams, fidelity: Fidelity) -> bool {
    let n = Naive {
        prec: &params.precedence,
        filter: &params.filter,
        fidelity,
    };
    match rel {
        Rel::Approx => n.approx(s, t),
        Rel::Geq => n.geq(s, t),
        Rel::Gt => n.gt(s, t),
        Rel::Rpo => n.rpo(s, t),
    }
}

/// A dense square boolean matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> BitMatrix {
        let words = n.div_ceil(64);
        BitMatrix {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Whether row `i` is contained in row `j` of `other`; returns a witness column otherwise.
    fn row_subset(&self, i: usize, other: &BitMatrix, j: usize) -> Option<usize> {
        for (w, (a, b)) in self.row(i).iter().zip(other.row(j)).enumerate() {
            let extra = a & !b;
            if extra != 0 {
                return Some(w * 64 + extra.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (0..self.n).filter(move |&j| self.get(i, j)).map(move |j| (i, j)))
    }

    /// Transitive closure by Warshall's algorithm.
    pub fn closure(&self) -> BitMatrix {
        let mut c = self.clone();
        for k in 0..self.n {
            let row_k: Vec<u64> = c.row(k).to_vec();
            for i in 0..self.n {
                if c.get(i, k) {
                    let base = i * c.words;
                    for (w, rk) in row_k.iter().enumerate() {
                        c.bits[base + w] |= rk;
                    }
                }
            }
        }
        c
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix({}x{}, {} set)", self.n, self.n, self.count())
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("universe has {size} terms, more than the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("invalid parameters: {0}")]
    Params(#[from] ParamError),
}

/// The unconstrained relations over a finite universe, computed by the naive transcription.
#[derive(Clone, Debug)]
pub struct RelationGraph {
    pub universe: Vec<Term>,
    pub params: HorpoParams,
    pub fidelity: Fidelity,
    pub approx: BitMatrix,
    pub geq: BitMatrix,
    pub gt: BitMatrix,
}

/// Enumerates all terms with at most `max_size` nodes and relates every pair.
pub fn build_graph(
    symbols: &[Symbol],
    pool: &VariablePool,
    max_size: usize,
    params: &HorpoParams,
    fidelity: Fidelity,
    cap: usize,
) -> Result<RelationGraph, GraphError> {
    params.validate(false)?;
    // Grow the size bound one step at a time so an oversized request stops early.
    let mut universe = Vec::new();
    for size in 0..=max_size {
        universe = enumerate_universe(symbols, pool, size);
        if universe.len() > cap {
            return Err(GraphError::CapExceeded {
                size: universe.len(),
                cap,
            });
        }
    }
    Ok(graph_over(universe, params, fidelity))
}

/// Relates every pair of a given universe.
pub fn graph_over(universe: Vec<Term>, params: &HorpoParams, fidelity: Fidelity) -> RelationGraph {
    let n = universe.len();
    let rows: Vec<(Vec<usize>, Vec<usize>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut eq = Vec::new();
            let mut gt = Vec::new();
            for j in 0..n {
                let (s, t) = (&universe[i], &universe[j]);
                if naive_relate(s, t, Rel::Approx, params, fidelity) {
                    eq.push(j);
                } else if naive_relate(s, t, Rel::Gt, params, fidelity) {
                    gt.push(j);
                }
            }
            (eq, gt)
        })
        .collect();
    let mut approx = BitMatrix::new(n);
    let mut gtm = BitMatrix::new(n);
    for (i, (eq, gt)) in rows.iter().enumerate() {
        for &j in eq {
            approx.set(i, j);
        }
        for &j in gt {
            gtm.set(i, j);
        }
    }
    // ⊐ pairs that are also ≈ were skipped above; recompute those.
    for (i, j) in approx.pairs().collect::<Vec<_>>() {
        if naive_relate(&universe[i], &universe[j], Rel::Gt, params, fidelity) {
            gtm.set(i, j);
        }
    }
    let mut geq = approx.clone();
    for (i, j) in gtm.pairs().collect::<Vec<_>>() {
        geq.set(i, j);
    }
    RelationGraph {
        universe,
        params: params.clone(),
        fidelity,
        approx,
        geq,
        gt: gtm,
    }
}

/// Pairs on which the engine and the graph disagree, for `≈`, `⊒` and `⊐`.
pub fn engine_disagreements(graph: &RelationGraph) -> Vec<(Term, Term, Rel)> {
    let u = &graph.universe;
    let params = &graph.params;
    (0..u.len())
        .into_par_iter()
        .map_init(
            || Horpo::new(params, graph.fidelity),
            |h, i| {
                let mut out = Vec::new();
                for j in 0..u.len() {
                    for (rel, m) in [(Rel::Approx, &graph.approx), (Rel::Geq, &graph.geq), (Rel::Gt, &graph.gt)] {
                        let d = h.relate(&u[i], &u[j], rel);
                        if d.is_some() != m.get(i, j)
                            || d.is_some_and(|d| d.replay(&params.precedence, &params.filter, graph.fidelity).is_err())
                        {
                            out.push((u[i].clone(), u[j].clone(), rel));
                        }
                    }
                }
                out
            },
        )
        .flatten()
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaResult {
    pub name: &'static str,
    pub checked: usize,
    pub counterexample: Option<String>,
}

impl LemmaResult {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct LemmaReport {
    pub universe_size: usize,
    pub results: Vec<LemmaResult>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(LemmaResult::passed)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LemmaConfig {
    /// Substitutions drawn for the stability check.
    pub substitutions: usize,
    /// Above this many argument combinations, the application checks sample.
    pub max_applications: usize,
    pub seed: u64,
}

impl Default for LemmaConfig {
    fn default() -> LemmaConfig {
        LemmaConfig {
            substitutions: 50,
            max_applications: 200_000,
            seed: 0,
        }
    }
}

fn first_failure<T: Sync>(items: Vec<T>, check: impl Fn(&T) -> Option<String> + Sync) -> (usize, Option<String>) {
    let n = items.len();
    let fail = items.par_iter().map(&check).find_first(Option::is_some).flatten();
    (n, fail)
}

/// Pairs `((s, s'), (t, t'))` with `s s'`-style applications well-typed:
/// `s, s'` from `left`, `t, t'` from `right`, `s` applicable to `t`.
fn application_combos(
    graph: &RelationGraph,
    left: &BitMatrix,
    right: &BitMatrix,
    limit: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize, usize, usize)> {
    let u = &graph.universe;
    let lp: Vec<(usize, usize)> = left.pairs().filter(|&(i, _)| u[i].ty().domain().is_some()).collect();
    let rp: Vec<(usize, usize)> = right.pairs().collect();
    let mut combos = Vec::new();
    for &(a, b) in &lp {
        let (da, db) = (u[a].ty().domain().cloned(), u[b].ty().domain().cloned());
        for &(c, d) in &rp {
            if da.as_ref() == Some(u[c].ty()) && db.as_ref() == Some(u[d].ty()) {
                combos.push((a, b, c, d));
            }
        }
    }
    if combos.len() > limit {
        combos.shuffle(rng);
        combos.truncate(limit);
        combos.sort_unstable();
    }
    combos
}

/// Runs every order-theoretic property on the graph.
pub fn check_lemmas(graph: &RelationGraph, config: &LemmaConfig) -> LemmaReport {
    let u = &graph.universe;
    let n = u.len();
    let (p, fid) = (&graph.params, graph.fidelity);
    let show = |i: usize| u[i].to_string();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut results = Vec::new();

    let refl = (0..n).find(|&i| !graph.approx.get(i, i)).map(|i| format!("{} ≉ itself", show(i)));
    results.push(LemmaResult {
        name: "≈ reflexive",
        checked: n,
        counterexample: refl,
    });

    let sym = graph
        .approx
        .pairs()
        .find(|&(i, j)| !graph.approx.get(j, i))
        .map(|(i, j)| format!("{} ≈ {} but not back", show(i), show(j)));
    results.push(LemmaResult {
        name: "≈ symmetric",
        checked: graph.approx.count(),
        counterexample: sym,
    });

    let mut composition = |name: &'static str, first: &BitMatrix, second: &BitMatrix, target: &BitMatrix| {
        let pairs: Vec<(usize, usize)> = first.pairs().collect();
        let (checked, cx) = first_failure(pairs, |&(i, j)| {
            second
                .row_subset(j, target, i)
                .map(|k| format!("{} ⊳ {} ⊳ {} fails", show(i), show(j), show(k)))
        });
        results.push(LemmaResult {
            name,
            checked,
            counterexample: cx,
        });
    };
    composition("≈ transitive", &graph.approx, &graph.approx, &graph.approx);
    composition("≈·⊒ ⊆ ⊒", &graph.approx, &graph.geq, &graph.geq);
    composition("≈·⊐ ⊆ ⊐", &graph.approx, &graph.gt, &graph.gt);
    let closure = graph.gt.closure();
    composition("⊒·⊐ ⊆ ⊐⁺", &graph.geq, &graph.gt, &closure);

    let cyc = (0..n).find(|&i| closure.get(i, i)).map(|i| format!("{} ⊐⁺ itself", show(i)));
    results.push(LemmaResult {
        name: "⊐ acyclic",
        checked: n,
        counterexample: cyc,
    });

    let app = |a: usize, c: usize| Term::apply_unchecked(u[a].clone(), [u[c].clone()]);
    let mut applications = |name: &'static str, left: &BitMatrix, right: &BitMatrix, goal: Rel, rng: &mut ChaCha8Rng| {
        let combos = application_combos(graph, left, right, config.max_applications, rng);
        let (checked, cx) = first_failure(combos, |&(a, b, c, d)| {
            let (s, t) = (app(a, c), app(b, d));
            (!naive_relate(&s, &t, goal, p, fid)).then(|| format!("{s} {goal} {t} fails"))
        });
        results.push(LemmaResult {
            name,
            checked,
            counterexample: cx,
        });
    };
    applications("≈ monotonic", &graph.approx, &graph.approx, Rel::Approx, &mut rng);
    applications("⊐·u ⊒ v ⊆ ⊐ (left application)", &graph.gt, &graph.geq, Rel::Gt, &mut rng);
    applications("⊒ monotonic", &graph.geq, &graph.geq, Rel::Geq, &mut rng);

    let substitutions = sample_substitutions(u, config.substitutions, &mut rng);
    let pairs: Vec<(usize, usize)> = graph.approx.pairs().collect();
    let jobs: Vec<(usize, usize, usize)> = (0..substitutions.len())
        .flat_map(|k| pairs.iter().map(move |&(i, j)| (k, i, j)))
        .collect();
    let (checked, cx) = first_failure(jobs, |&(k, i, j)| {
        let g = &substitutions[k];
        let (s, t) = (g.apply(&u[i]), g.apply(&u[j]));
        (!naive_relate(&s, &t, Rel::Approx, p, fid)).then(|| format!("{s} ≉ {t} under {g}"))
    });
    results.push(LemmaResult {
        name: "≈ stable",
        checked,
        counterexample: cx,
    });

    LemmaReport {
        universe_size: n,
        results,
    }
}

fn sample_substitutions(universe: &[Term], count: usize, rng: &mut ChaCha8Rng) -> Vec<Substitution> {
    let mut vars = std::collections::BTreeSet::new();
    for t in universe {
        vars.extend(t.vars());
    }
    (0..count)
        .map(|_| {
            let mut g = Substitution::new();
            for x in &vars {
                let candidates: Vec<&Term> = universe.iter().filter(|t| t.ty() == x.ty()).collect();
                if let Some(t) = candidates.choose(rng) {
                    g.insert(x.clone(), (*t).clone()).expect("same type");
                }
            }
            g
        })
        .collect()
}

/// The reference signature: `f : o → o → o`, `g : o → o`, `a, b : o`.
pub struct E1 {
    pub f: Symbol,
    pub g: Symbol,
    pub a: Symbol,
    pub b: Symbol,
}

impl E1 {
    pub fn new() -> E1 {
        let o = Type::base(Sort::new("o").expect("valid sort"));
        E1 {
            f: Symbol::plain("f", Type::arrows([o.clone(), o.clone()], o.clone())),
            g: Symbol::plain("g", Type::arrow(o.clone(), o.clone())),
            a: Symbol::plain("a", o.clone()),
            b: Symbol::plain("b", o),
        }
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        vec![self.f.clone(), self.g.clone(), self.a.clone(), self.b.clone()]
    }

    /// Two variables each of `o` and `o → o`.
    pub fn pool(&self) -> VariablePool {
        let o = self.a.ty().clone();
        VariablePool::per_type(&[o.clone(), Type::arrow(o.clone(), o)], 2)
    }

    /// `f ▷ g ▷ a ≡ b`, every argument regarded.
    pub fn default_params(&self) -> HorpoParams {
        let prec = Precedence::from_classes(&[vec![self.f.clone()], vec![self.g.clone()], vec![self.a.clone(), self.b.clone()]]);
        HorpoParams::new(prec, ArgumentFilter::full())
    }

    /// The three parameter sets of the lemma suite, with names.
    pub fn parameter_sets(&self) -> Vec<(&'static str, HorpoParams)> {
        let full = self.default_params();
        let mut emptied = full.clone();
        emptied.filter.set(&self.g, []).expect("in range");
        let two_class = HorpoParams::new(
            Precedence::from_classes(&[vec![self.f.clone(), self.g.clone()], vec![self.a.clone(), self.b.clone()]]),
            ArgumentFilter::full(),
        );
        vec![("full filters", full), ("pi(g) = {}", emptied), ("two classes", two_class)]
    }
}

impl Default for E1 {
    fn default() -> E1 {
        E1::new()
    }
}
