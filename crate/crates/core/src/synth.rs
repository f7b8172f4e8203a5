//! Search for a precedence and argument filter under which every strict
//! rule is oriented by `≻` and every weak rule by `⪰`.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constrained::{default_lvars, BlockedQuery, CDerivation, CReplayError, ConstrainedHorpo};
use crate::order::{ArgumentFilter, Fidelity, HorpoParams, ParamError, Precedence};
use crate::terms::{Signature, Symbol, Term};
use crate::theory::{Constraint, Entailer, LVarSet, RespectError, ValueOrder};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Demand {
    Strict,
    Weak,
}

impl fmt::Display for Demand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Demand::Strict => "strict",
            Demand::Weak => "weak",
        })
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SynthError {
    #[error("rule {index}: sides `{lhs}` and `{rhs}` have different type structures")]
    TypeMismatch { index: usize, lhs: String, rhs: String },
    #[error("rule {index}: {source}")]
    LVars { index: usize, source: RespectError },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("found derivation does not replay: {0}")]
    Replay(#[from] CReplayError),
}

/// A rule `lhs → rhs [φ]` with its logical variables and orientation demand.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConstrainedRule {
    pub lhs: Term,
    pub rhs: Term,
    pub phi: Constraint,
    pub lvars: LVarSet,
    pub demand: Demand,
}

impl ConstrainedRule {
    /// Without explicit `lvars`, `L = Var(φ) ∪ (Var(rhs) ∖ Var(lhs))`.
    pub fn new(
        lhs: Term,
        rhs: Term,
        phi: Constraint,
        lvars: Option<LVarSet>,
        demand: Demand,
    ) -> Result<ConstrainedRule, SynthError> {
        if !lhs.ty().same_structure(rhs.ty()) {
            return Err(SynthError::TypeMismatch {
                index: 0,
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
            });
        }
        let lvars = match lvars {
            Some(l) => l,
            None => default_lvars(&lhs, &rhs, &phi).map_err(|source| SynthError::LVars { index: 0, source })?,
        };
        Ok(ConstrainedRule {
            lhs,
            rhs,
            phi,
            lvars,
            demand,
        })
    }
}

impl fmt::Display for ConstrainedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)?;
        if !self.phi.is_trivially_true() {
            write!(f, " [{}]", self.phi)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct OrientationProblem {
    pub signature: Signature,
    pub values: ValueOrder,
    pub rules: Vec<ConstrainedRule>,
}

impl OrientationProblem {
    /// Symbols occurring in the rules in signature order; the second list
    /// holds the theory symbols.
    pub fn occurring_symbols(&self) -> (Vec<Symbol>, Vec<Symbol>) {
        let mut seen = BTreeSet::new();
        let mut found = Vec::new();
        for r in &self.rules {
            for t in [&r.lhs, &r.rhs] {
                for f in t.symbols() {
                    if !f.is_value() && seen.insert(f.name().to_string()) {
                        found.push(f);
                    }
                }
            }
        }
        let position = |f: &Symbol| {
            self.signature
                .symbols()
                .iter()
                .position(|g| g == f)
                .unwrap_or(usize::MAX)
        };
        found.sort_by_key(|f| position(f));
        found.into_iter().partition(|f| !f.is_theory())
    }
}

#[derive(Clone, Debug)]
pub struct RuleReport {
    pub index: usize,
    pub demand: Demand,
    pub result: Result<Arc<CDerivation>, String>,
    pub blocked: Vec<BlockedQuery>,
    pub nodes: usize,
}

impl RuleReport {
    pub fn passed(&self) -> bool {
        self.result.is_ok()
    }
}

fn failure_reason(rule: &ConstrainedRule, blocked: &[BlockedQuery]) -> String {
    if let Some(b) = blocked.first() {
        return format!("entailment of `{}` unknown ({})", b.goal, b.reason);
    }
    match rule.demand {
        Demand::Weak => "no ⪰ clause applies".to_string(),
        Demand::Strict if !rule.lhs.is_theory() && rule.lhs.head_symbol().is_some() => {
            "no ≻≻ clause applies".to_string()
        }
        Demand::Strict => "no ≻ clause applies".to_string(),
    }
}

fn check_rule(
    index: usize,
    rule: &ConstrainedRule,
    params: &HorpoParams,
    values: &ValueOrder,
    entailer: &Entailer,
    fidelity: Fidelity,
) -> Result<RuleReport, ParamError> {
    let h = ConstrainedHorpo::new(params, values, entailer, fidelity, rule.phi.clone(), rule.lvars.clone())?;
    let d = match rule.demand {
        Demand::Strict => h.gt(&rule.lhs, &rule.rhs),
        Demand::Weak => h.geq(&rule.lhs, &rule.rhs),
    };
    let blocked = h.blocked();
    let result = d.ok_or_else(|| failure_reason(rule, &blocked));
    Ok(RuleReport {
        index,
        demand: rule.demand,
        result,
        blocked,
        nodes: h.memo_len(),
    })
}

/// Evaluates every rule under `params`; parameters violating the theory
/// filter restriction or well-foundedness are rejected up front.
pub fn validate(
    problem: &OrientationProblem,
    params: &HorpoParams,
    entailer: &Entailer,
    fidelity: Fidelity,
) -> Result<Vec<RuleReport>, ParamError> {
    params.validate(true)?;
    problem
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| check_rule(i, r, params, &problem.values, entailer, fidelity))
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Budget {
    /// Maximum number of memoized relation judgments over all candidates.
    pub nodes: u64,
    pub time: Duration,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget {
            nodes: 100_000,
            time: Duration::from_millis(10_000),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub budget: Budget,
    pub seed: u64,
    pub fidelity: Fidelity,
    pub force_full_filters: bool,
    /// Candidates evaluated concurrently per round.
    pub batch: usize,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            budget: Budget::default(),
            seed: 0,
            fidelity: Fidelity::Sound,
            force_full_filters: false,
            batch: 32,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct SearchStats {
    pub candidates: u64,
    pub nodes: u64,
    pub entail_queries: usize,
}

#[derive(Clone, Debug)]
pub struct OrientationSolution {
    pub params: HorpoParams,
    pub derivations: Vec<Arc<CDerivation>>,
    pub stats: SearchStats,
}

#[derive(Clone, Debug)]
pub enum OrientOutcome {
    Found(OrientationSolution),
    /// Every candidate failed. Definitive only if no entailment was unknown.
    Exhausted { stats: SearchStats, unknown_entailments: usize },
    BudgetExhausted { stats: SearchStats },
}

impl OrientOutcome {
    pub fn solution(&self) -> Option<&OrientationSolution> {
        match self {
            OrientOutcome::Found(s) => Some(s),
            _ => None,
        }
    }

    pub fn stats(&self) -> SearchStats {
        match self {
            OrientOutcome::Found(s) => s.stats,
            OrientOutcome::Exhausted { stats, .. } | OrientOutcome::BudgetExhausted { stats } => *stats,
        }
    }
}

/// Calls `f` on every ordered partition of `0..n` into `k` nonempty
/// classes, greatest class first.
fn ordered_partitions(
    n: usize,
    k: usize,
    f: &mut dyn FnMut(&[Vec<usize>]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    fn go(
        i: usize,
        n: usize,
        classes: &mut Vec<Vec<usize>>,
        f: &mut dyn FnMut(&[Vec<usize>]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let empty = classes.iter().filter(|c| c.is_empty()).count();
        if n - i < empty {
            return ControlFlow::Continue(());
        }
        if i == n {
            return f(classes);
        }
        for c in 0..classes.len() {
            classes[c].push(i);
            let r = go(i + 1, n, classes, f);
            classes[c].pop();
            r?;
        }
        ControlFlow::Continue(())
    }
    let mut classes = vec![Vec::new(); k];
    go(0, n, &mut classes, f)
}

/// All total preorders on `0..n`: strict total orders first, coarsest last.
fn total_preorders(n: usize, f: &mut dyn FnMut(&[Vec<usize>]) -> ControlFlow<()>) -> ControlFlow<()> {
    if n == 0 {
        return f(&[]);
    }
    for k in (1..=n).rev() {
        ordered_partitions(n, k, f)?;
    }
    ControlFlow::Continue(())
}

/// Calls `f` with every set of removed `(symbol, position)` pairs, fewest first.
fn removal_sets(
    slots: &[(usize, usize)],
    f: &mut dyn FnMut(&[(usize, usize)]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    fn choose(
        slots: &[(usize, usize)],
        start: usize,
        left: usize,
        acc: &mut Vec<(usize, usize)>,
        f: &mut dyn FnMut(&[(usize, usize)]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if left == 0 {
            return f(acc);
        }
        for i in start..slots.len() {
            if slots.len() - i < left {
                break;
            }
            acc.push(slots[i]);
            let r = choose(slots, i + 1, left - 1, acc, f);
            acc.pop();
            r?;
        }
        ControlFlow::Continue(())
    }
    for size in 0..=slots.len() {
        choose(slots, 0, size, &mut Vec::new(), f)?;
    }
    ControlFlow::Continue(())
}

struct Candidate {
    params: HorpoParams,
}

struct Evaluation {
    derivations: Option<Vec<Arc<CDerivation>>>,
    nodes: u64,
    unknown: usize,
}

fn evaluate(problem: &OrientationProblem, c: &Candidate, entailer: &Entailer, fidelity: Fidelity) -> Evaluation {
    let mut nodes = 0u64;
    let mut unknown = 0;
    let mut derivations = Vec::new();
    for (i, r) in problem.rules.iter().enumerate() {
        let report = match check_rule(i, r, &c.params, &problem.values, entailer, fidelity) {
            Ok(rep) => rep,
            Err(_) => {
                return Evaluation {
                    derivations: None,
                    nodes,
                    unknown,
                }
            }
        };
        nodes += report.nodes.max(1) as u64;
        unknown += report.blocked.len();
        match report.result {
            Ok(d) => derivations.push(d),
            Err(_) => {
                return Evaluation {
                    derivations: None,
                    nodes,
                    unknown,
                }
            }
        }
    }
    Evaluation {
        derivations: Some(derivations),
        nodes,
        unknown,
    }
}

struct Search<'a> {
    problem: &'a OrientationProblem,
    entailer: &'a Entailer,
    config: &'a SearchConfig,
    started: Instant,
    queries_before: usize,
    stats: SearchStats,
    unknown: usize,
    pending: Vec<Candidate>,
    result: Option<Result<OrientOutcome, SynthError>>,
}

impl Search<'_> {
    fn push(&mut self, c: Candidate) -> ControlFlow<()> {
        self.pending.push(c);
        if self.pending.len() >= self.config.batch.max(1) {
            self.flush()
        } else {
            ControlFlow::Continue(())
        }
    }

    fn over_budget(&self) -> Option<OrientOutcome> {
        if self.stats.nodes > self.config.budget.nodes || self.started.elapsed() > self.config.budget.time {
            Some(OrientOutcome::BudgetExhausted { stats: self.current_stats() })
        } else {
            None
        }
    }

    fn current_stats(&self) -> SearchStats {
        SearchStats {
            entail_queries: self.entailer.stats().queries - self.queries_before,
            ..self.stats
        }
    }

    fn flush(&mut self) -> ControlFlow<()> {
        if self.pending.is_empty() {
            return ControlFlow::Continue(());
        }
        let batch = std::mem::take(&mut self.pending);
        let (problem, entailer, fidelity) = (self.problem, self.entailer, self.config.fidelity);
        let evaluations: Vec<Evaluation> = batch.par_iter().map(|c| evaluate(problem, c, entailer, fidelity)).collect();
        for (c, e) in batch.into_iter().zip(evaluations) {
            self.stats.candidates += 1;
            self.stats.nodes += e.nodes;
            self.unknown += e.unknown;
            if let Some(derivations) = e.derivations {
                self.result = Some(self.finish(c.params, derivations));
                return ControlFlow::Break(());
            }
            if let Some(out) = self.over_budget() {
                self.result = Some(Ok(out));
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    }

    fn finish(&self, params: HorpoParams, derivations: Vec<Arc<CDerivation>>) -> Result<OrientOutcome, SynthError> {
        for (r, d) in self.problem.rules.iter().zip(&derivations) {
            d.replay(&params, &self.problem.values, self.entailer, self.config.fidelity, &r.phi, &r.lvars)?;
        }
        Ok(OrientOutcome::Found(OrientationSolution {
            params,
            derivations,
            stats: self.current_stats(),
        }))
    }
}

/// Enumerates candidate parameters over the symbols occurring in the
/// problem: filters outermost (fewest removed positions first), then total
/// preorders. Theory symbols first sit in one class below all plain
/// symbols; only after that space is exhausted do they take part in the
/// preorder. Candidates are evaluated in parallel batches and the winner is
/// the lowest-indexed success, so the result does not depend on scheduling.
pub fn orient(
    problem: &OrientationProblem,
    config: &SearchConfig,
    entailer: &Entailer,
) -> Result<OrientOutcome, SynthError> {
    let (mut plain, theory) = problem.occurring_symbols();
    if config.seed != 0 {
        plain.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    }
    let slots: Vec<(usize, usize)> = if config.force_full_filters {
        Vec::new()
    } else {
        plain
            .iter()
            .enumerate()
            .flat_map(|(i, f)| (1..=f.arity()).map(move |p| (i, p)))
            .collect()
    };

    let mut search = Search {
        problem,
        entailer,
        config,
        started: Instant::now(),
        queries_before: entailer.stats().queries,
        stats: SearchStats::default(),
        unknown: 0,
        pending: Vec::new(),
        result: None,
    };

    let make_filter = |removed: &[(usize, usize)]| {
        let mut filter = ArgumentFilter::full();
        for (i, f) in plain.iter().enumerate() {
            let keep: Vec<usize> = (1..=f.arity()).filter(|p| !removed.contains(&(i, *p))).collect();
            filter.set(f, keep).expect("positions in range");
        }
        filter
    };

    let phases: &[bool] = if theory.is_empty() { &[false] } else { &[false, true] };
    let mut flow = ControlFlow::Continue(());
    for &mixed in phases {
        let symbols: Vec<Symbol> = if mixed {
            plain.iter().chain(&theory).cloned().collect()
        } else {
            plain.clone()
        };
        flow = removal_sets(&slots, &mut |removed| {
            let filter = make_filter(removed);
            total_preorders(symbols.len(), &mut |classes| {
                let mut named: Vec<Vec<Symbol>> = classes
                    .iter()
                    .map(|c| c.iter().map(|&i| symbols[i].clone()).collect())
                    .collect();
                if mixed {
                    let bottom_is_theory = named
                        .last()
                        .is_some_and(|c| c.len() == theory.len() && c.iter().all(Symbol::is_theory));
                    if bottom_is_theory && named[..named.len() - 1].iter().flatten().all(|f| !f.is_theory()) {
                        return ControlFlow::Continue(());
                    }
                } else if !theory.is_empty() {
                    named.push(theory.clone());
                }
                let params = HorpoParams::new(Precedence::from_classes(&named), filter.clone());
                search.push(Candidate { params })
            })
        });
        if flow.is_break() {
            break;
        }
    }
    if flow.is_continue() {
        let _ = search.flush();
    }
    if let Some(r) = search.result.take() {
        return r;
    }
    Ok(OrientOutcome::Exhausted {
        stats: search.current_stats(),
        unknown_entailments: search.unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_preorders(n: usize) -> usize {
        let mut count = 0;
        let _ = total_preorders(n, &mut |_| {
            count += 1;
            ControlFlow::Continue(())
        });
        count
    }

    #[test]
    fn preorder_counts_are_fubini_numbers() {
        let counts: Vec<usize> = (0..=5).map(count_preorders).collect();
        assert_eq!(counts, vec![1, 1, 3, 13, 75, 541]);
    }

    #[test]
    fn first_preorder_is_declaration_chain() {
        let mut first = None;
        let _ = total_preorders(3, &mut |c| {
            first = Some(c.to_vec());
            ControlFlow::Break(())
        });
        assert_eq!(first.unwrap(), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn removal_sets_cover_powerset_by_size() {
        let slots = [(0, 1), (0, 2), (1, 1)];
        let mut seen = Vec::new();
        let _ = removal_sets(&slots, &mut |r| {
            seen.push(r.to_vec());
            ControlFlow::Continue(())
        });
        assert_eq!(seen.len(), 8);
        assert!(seen.windows(2).all(|w| w[0].len() <= w[1].len()));
        assert!(seen[0].is_empty());
    }
}
