use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::smt::{self, SmtAnswer, SmtConfig, SmtError};
use super::{calc_normalize, eval_with, int, Constraint, TheoryOp};
use crate::terms::{Sort, Term, Value, Var};

/// A witness assignment of values to constraint variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment(pub BTreeMap<Var, Value>);

impl Assignment {
    pub fn get(&self, x: &Var) -> Option<Value> {
        self.0.get(x).copied()
    }

    pub fn refutes(&self, phi: &Constraint, psi: &Constraint) -> bool {
        let env = |x: &Var| self.get(x);
        matches!(
            (eval_with(phi.term(), &env), eval_with(psi.term(), &env)),
            (Ok(Value::Bool(true)), Ok(Value::Bool(false)))
        )
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(x, v)| format!("{x} = {v}")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnknownReason {
    /// No refutation inside the bounded domain, which is not exhaustive.
    BoundedIncomplete,
    NoSolver,
    Solver(SmtError),
    SolverUnknown,
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnknownReason::BoundedIncomplete => write!(f, "no refutation within bounds"),
            UnknownReason::NoSolver => write!(f, "no refutation within bounds and no solver configured"),
            UnknownReason::Solver(e) => write!(f, "{e}"),
            UnknownReason::SolverUnknown => write!(f, "solver answered unknown"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(Assignment),
    Unknown(UnknownReason),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => write!(f, "valid"),
            Verdict::Invalid(a) => write!(f, "invalid ({a})"),
            Verdict::Unknown(r) => write!(f, "unknown ({r})"),
        }
    }
}

/// The range of integer values the bounded backend enumerates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntDomain {
    /// `[-bound, bound]`, a sample of an unbounded domain: refutation only.
    Sampled { bound: i64 },
    /// Integers are declared to range over `[lo, hi]`: the search is exhaustive.
    Finite { lo: i64, hi: i64 },
}

impl IntDomain {
    fn values(&self) -> Vec<i64> {
        match *self {
            IntDomain::Sampled { bound } => {
                let mut out = vec![0];
                for k in 1..=bound.max(0) {
                    out.push(k);
                    out.push(-k);
                }
                out
            }
            IntDomain::Finite { lo, hi } => (lo..=hi).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedBackend {
    pub domain: IntDomain,
    pub max_assignments: usize,
}

pub const DEFAULT_BOUND: i64 = 16;

impl Default for BoundedBackend {
    fn default() -> BoundedBackend {
        BoundedBackend::sampled(DEFAULT_BOUND)
    }
}

impl BoundedBackend {
    pub fn sampled(bound: i64) -> BoundedBackend {
        BoundedBackend {
            domain: IntDomain::Sampled { bound },
            max_assignments: 1 << 17,
        }
    }

    pub fn finite(lo: i64, hi: i64) -> BoundedBackend {
        BoundedBackend {
            domain: IntDomain::Finite { lo, hi },
            max_assignments: 1 << 17,
        }
    }

    /// Enumerates assignments to `Var(phi) ∪ Var(psi)` looking for `phi ∧ ¬psi`.
    pub fn check(&self, phi: &Constraint, psi: &Constraint) -> Verdict {
        let mut vars: Vec<Var> = phi.vars().into_iter().collect();
        for x in psi.vars() {
            if !vars.contains(&x) {
                vars.push(x);
            }
        }
        let int_vals: Vec<Value> = self.domain.values().into_iter().map(Value::Int).collect();
        let bool_vals = [Value::Bool(false), Value::Bool(true)];
        let choices: Vec<&[Value]> = vars
            .iter()
            .map(|x| {
                if x.ty().as_sort() == Some(&Sort::bool()) {
                    &bool_vals[..]
                } else {
                    &int_vals[..]
                }
            })
            .collect();
        let has_int = vars.iter().any(|x| x.ty().as_sort() != Some(&Sort::bool()));
        let mut exhaustive = !has_int || matches!(self.domain, IntDomain::Finite { .. });
        if choices.iter().any(|c| c.is_empty()) {
            return if exhaustive {
                Verdict::Valid
            } else {
                Verdict::Unknown(UnknownReason::BoundedIncomplete)
            };
        }

        let mut idx = vec![0usize; vars.len()];
        let mut visited = 0usize;
        loop {
            if visited >= self.max_assignments {
                break;
            }
            visited += 1;
            let env = |x: &Var| vars.iter().position(|y| y == x).map(|i| choices[i][idx[i]]);
            match (eval_with(phi.term(), &env), eval_with(psi.term(), &env)) {
                (Ok(Value::Bool(true)), Ok(Value::Bool(false))) => {
                    let a = vars
                        .iter()
                        .enumerate()
                        .map(|(i, x)| (x.clone(), choices[i][idx[i]]))
                        .collect();
                    return Verdict::Invalid(Assignment(a));
                }
                (Ok(_), Ok(_)) => {}
                // Overflow: the assignment says nothing either way.
                _ => exhaustive = false,
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return if exhaustive {
                        Verdict::Valid
                    } else {
                        Verdict::Unknown(UnknownReason::BoundedIncomplete)
                    };
                }
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
        Verdict::Unknown(UnknownReason::BoundedIncomplete)
    }

    /// Range restrictions a solver needs to reproduce this domain.
    fn range_constraints(&self, phi: &Constraint, psi: &Constraint) -> Vec<Constraint> {
        let IntDomain::Finite { lo, hi } = self.domain else {
            return Vec::new();
        };
        let mut vars = phi.vars();
        vars.extend(psi.vars());
        vars.into_iter()
            .filter(|x| x.ty().as_sort() == Some(&Sort::int()))
            .map(|x| {
                let t = Term::var(x);
                Constraint::new(TheoryOp::And.apply([
                    TheoryOp::Ge.apply([t.clone(), int(lo)]),
                    TheoryOp::Le.apply([t, int(hi)]),
                ]))
                .expect("range constraint")
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SmtMode {
    Off,
    /// Solver consulted only when bounded checking is inconclusive.
    #[default]
    Auto,
    /// Solver consulted on every query; bounded refutations still win.
    Always,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EntailStats {
    pub queries: usize,
    pub cache_hits: usize,
    pub smt_calls: usize,
    pub disagreements: usize,
}

/// Decides `phi ⊩ psi`, combining the bounded backend and an optional solver.
/// Results are cached per (phi, psi); the entailer can be shared across threads.
pub struct Entailer {
    bounded: BoundedBackend,
    mode: SmtMode,
    smt: Option<SmtConfig>,
    cache: Mutex<HashMap<(Term, Term), Verdict>>,
    queries: AtomicUsize,
    cache_hits: AtomicUsize,
    smt_calls: AtomicUsize,
    disagreements: Mutex<Vec<String>>,
}

impl fmt::Debug for Entailer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Entailer")
            .field("bounded", &self.bounded)
            .field("mode", &self.mode)
            .field("smt", &self.smt)
            .finish()
    }
}

impl Default for Entailer {
    fn default() -> Entailer {
        Entailer::new(BoundedBackend::default(), SmtMode::Off, None)
    }
}

impl Entailer {
    pub fn new(bounded: BoundedBackend, mode: SmtMode, smt: Option<SmtConfig>) -> Entailer {
        Entailer {
            bounded,
            mode,
            smt,
            cache: Mutex::new(HashMap::new()),
            queries: AtomicUsize::new(0),
            cache_hits: AtomicUsize::new(0),
            smt_calls: AtomicUsize::new(0),
            disagreements: Mutex::new(Vec::new()),
        }
    }

    /// The solver, if any, comes from the environment.
    pub fn from_env(bounded: BoundedBackend, mode: SmtMode) -> Entailer {
        let smt = match mode {
            SmtMode::Off => None,
            _ => SmtConfig::from_env(),
        };
        Entailer::new(bounded, mode, smt)
    }

    pub fn bounded(&self) -> &BoundedBackend {
        &self.bounded
    }

    pub fn mode(&self) -> SmtMode {
        self.mode
    }

    pub fn solver(&self) -> Option<&SmtConfig> {
        self.smt.as_ref()
    }

    pub fn stats(&self) -> EntailStats {
        EntailStats {
            queries: self.queries.load(Ordering::Relaxed),
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
            smt_calls: self.smt_calls.load(Ordering::Relaxed),
            disagreements: self.disagreements.lock().expect("poisoned").len(),
        }
    }

    pub fn disagreements(&self) -> Vec<String> {
        self.disagreements.lock().expect("poisoned").clone()
    }

    pub fn entails(&self, phi: &Constraint, psi: &Constraint) -> Verdict {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let key = (phi.term().clone(), psi.term().clone());
        if let Some(v) = self.cache.lock().expect("poisoned").get(&key) {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
            return v.clone();
        }
        let v = self.decide(phi, psi);
        self.cache.lock().expect("poisoned").insert(key, v.clone());
        v
    }

    fn decide(&self, phi: &Constraint, psi: &Constraint) -> Verdict {
        let truth = Some(Value::Bool(true));
        let falsity = Some(Value::Bool(false));
        let nphi = calc_normalize(phi.term()).ok().and_then(|t| t.as_value());
        let npsi = calc_normalize(psi.term()).ok().and_then(|t| t.as_value());
        if npsi == truth || nphi == falsity {
            return Verdict::Valid;
        }
        let bounded = self.bounded.check(phi, psi);
        match (self.mode, &bounded) {
            (SmtMode::Off, _) => bounded,
            (SmtMode::Auto, Verdict::Valid | Verdict::Invalid(_)) => bounded,
            (SmtMode::Auto, Verdict::Unknown(_)) => match self.ask_solver(phi, psi) {
                Some(v) => v,
                None => Verdict::Unknown(UnknownReason::NoSolver),
            },
            (SmtMode::Always, _) => {
                let Some(solver) = self.ask_solver(phi, psi) else {
                    return match bounded {
                        Verdict::Unknown(_) => Verdict::Unknown(UnknownReason::NoSolver),
                        other => other,
                    };
                };
                match (&bounded, &solver) {
                    (Verdict::Invalid(a), Verdict::Valid) => {
                        self.disagree(phi, psi, format!("solver says valid, bounded refutes with {a}"));
                        bounded
                    }
                    (Verdict::Valid, Verdict::Invalid(a)) => {
                        self.disagree(phi, psi, format!("bounded says valid, solver refutes with {a}"));
                        bounded
                    }
                    (Verdict::Unknown(_), _) => solver,
                    _ => bounded,
                }
            }
        }
    }

    fn disagree(&self, phi: &Constraint, psi: &Constraint, what: String) {
        self.disagreements
            .lock()
            .expect("poisoned")
            .push(format!("{phi} ⊩ {psi}: {what}"));
    }

    fn ask_solver(&self, phi: &Constraint, psi: &Constraint) -> Option<Verdict> {
        let config = self.smt.as_ref()?;
        self.smt_calls.fetch_add(1, Ordering::Relaxed);
        let extra = self.bounded.range_constraints(phi, psi);
        Some(match smt::check_refutable(config, phi, psi, &extra) {
            Ok(SmtAnswer::Unsat) => Verdict::Valid,
            Ok(SmtAnswer::Sat(model)) => {
                let a = Assignment(model);
                if a.refutes(phi, psi) {
                    Verdict::Invalid(a)
                } else {
                    Verdict::Unknown(UnknownReason::Solver(SmtError::BadModel))
                }
            }
            Ok(SmtAnswer::Unknown) => Verdict::Unknown(UnknownReason::SolverUnknown),
            Err(e) => Verdict::Unknown(UnknownReason::Solver(e)),
        })
    }
}
