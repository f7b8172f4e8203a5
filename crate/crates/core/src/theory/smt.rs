//! SMT-LIB2 client talking to an external solver over a child process.
//!
//! One child process is spawned per query; the script is written to its
//! standard input, which is then closed, and the reply is read back from
//! standard output.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use super::{calc_normalize, Constraint, TheoryOp};
use crate::terms::{Sort, Term, TermKind, Value, Var};

pub const CMD_ENV: &str = "HORPO_SMT_CMD";
pub const TIMEOUT_ENV: &str = "HORPO_SMT_TIMEOUT_MS";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SmtError {
    #[error("could not start solver `{cmd}`: {reason}")]
    Spawn { cmd: String, reason: String },
    #[error("solver timed out after {0} ms")]
    Timeout(u128),
    #[error("solver exited abnormally ({status}): {stderr}")]
    Crash { status: String, stderr: String },
    #[error("unparseable solver reply: {0}")]
    Unparseable(String),
    #[error("solver model does not refute the entailment")]
    BadModel,
    #[error("constraint cannot be encoded: {0}")]
    Encoding(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtConfig {
    pub command: Vec<String>,
    pub timeout: Duration,
}

impl SmtConfig {
    pub fn new(command: Vec<String>, timeout: Duration) -> SmtConfig {
        SmtConfig { command, timeout }
    }

    /// Reads `HORPO_SMT_CMD` / `HORPO_SMT_TIMEOUT_MS`; without a command,
    /// looks for `z3` or `cvc5` on `PATH`.
    pub fn from_env() -> Option<SmtConfig> {
        let timeout = std::env::var(TIMEOUT_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<u64>().ok())
            .map(Duration::from_millis)
            .unwrap_or(DEFAULT_TIMEOUT);
        if let Ok(cmd) = std::env::var(CMD_ENV) {
            let command: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
            if command.is_empty() {
                return None;
            }
            return Some(SmtConfig { command, timeout });
        }
        let candidates: [(&str, &[&str]); 2] = [("z3", &["-in"]), ("cvc5", &["--lang=smt2"])];
        for (bin, args) in candidates {
            if find_in_path(bin) {
                let mut command = vec![bin.to_string()];
                command.extend(args.iter().map(|s| s.to_string()));
                return Some(SmtConfig { command, timeout });
            }
        }
        None
    }
}

fn find_in_path(bin: &str) -> bool {
    let Some(path) = std::env::var_os("PATH") else {
        return false;
    };
    std::env::split_paths(&path).any(|dir| Path::new(&dir).join(bin).is_file())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SmtAnswer {
    Unsat,
    Sat(BTreeMap<Var, Value>),
    Unknown,
}

/// Asks whether `phi ∧ ¬psi ∧ extra` is satisfiable.
pub fn check_refutable(
    config: &SmtConfig,
    phi: &Constraint,
    psi: &Constraint,
    extra: &[Constraint],
) -> Result<SmtAnswer, SmtError> {
    let (script, names) = build_script(phi, psi, extra)?;
    let reply = run_solver(config, &script)?;
    parse_reply(&reply, &names)
}

/// The full query script, plus the SMT name of every declared variable.
pub fn build_script(
    phi: &Constraint,
    psi: &Constraint,
    extra: &[Constraint],
) -> Result<(String, BTreeMap<String, Var>), SmtError> {
    let encode_err = |e: super::EvalError| SmtError::Encoding(e.to_string());
    let phi = calc_normalize(phi.term()).map_err(encode_err)?;
    let psi = calc_normalize(psi.term()).map_err(encode_err)?;
    let extra = extra
        .iter()
        .map(|c| calc_normalize(c.term()).map_err(encode_err))
        .collect::<Result<Vec<_>, _>>()?;

    let mut vars = phi.vars();
    vars.extend(psi.vars());
    for c in &extra {
        vars.extend(c.vars());
    }
    let mut names = BTreeMap::new();
    let mut smt_name = BTreeMap::new();
    for (i, x) in vars.iter().enumerate() {
        let clean: String = x
            .name()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
            .collect();
        let n = format!("v{i}_{clean}");
        smt_name.insert(x.clone(), n.clone());
        names.insert(n, x.clone());
    }

    let linear = [&phi, &psi].into_iter().chain(extra.iter()).all(is_linear);
    let mut s = String::new();
    s.push_str("(set-option :produce-models true)\n");
    s.push_str(if linear { "(set-logic QF_LIA)\n" } else { "(set-logic QF_NIA)\n" });
    for x in &vars {
        let sort = match x.ty().as_sort() {
            Some(so) if *so == Sort::int() => "Int",
            Some(so) if *so == Sort::bool() => "Bool",
            _ => return Err(SmtError::Encoding(format!("variable {x} is not Int or Bool"))),
        };
        s.push_str(&format!("(declare-const {} {sort})\n", smt_name[x]));
    }
    s.push_str(&format!("(assert {})\n", encode(&phi, &smt_name)?));
    s.push_str(&format!("(assert (not {}))\n", encode(&psi, &smt_name)?));
    for c in &extra {
        s.push_str(&format!("(assert {})\n", encode(c, &smt_name)?));
    }
    s.push_str("(check-sat)\n");
    if !vars.is_empty() {
        let list: Vec<&str> = vars.iter().map(|x| smt_name[x].as_str()).collect();
        s.push_str(&format!("(get-value ({}))\n", list.join(" ")));
    }
    s.push_str("(exit)\n");
    Ok((s, names))
}

fn is_linear(t: &Term) -> bool {
    let (head, args) = t.spine();
    let here = match head.as_symbol().and_then(TheoryOp::from_symbol) {
        Some(TheoryOp::Mul) => args.iter().filter(|a| !a.is_ground()).count() <= 1,
        _ => true,
    };
    here && args.iter().all(is_linear)
}

fn encode(t: &Term, names: &BTreeMap<Var, String>) -> Result<String, SmtError> {
    match t.kind() {
        TermKind::Var(x) => names
            .get(x)
            .cloned()
            .ok_or_else(|| SmtError::Encoding(format!("undeclared variable {x}"))),
        TermKind::Sym(f) => match f.as_value() {
            Some(Value::Int(n)) if n < 0 => Ok(format!("(- {})", n.unsigned_abs())),
            Some(v) => Ok(v.to_string()),
            None => Err(SmtError::Encoding(format!("unapplied symbol {f}"))),
        },
        TermKind::App(..) => {
            let (head, args) = t.spine();
            let op = head
                .as_symbol()
                .and_then(TheoryOp::from_symbol)
                .ok_or_else(|| SmtError::Encoding(format!("non-theory term {t}")))?;
            if args.len() != op.ty().arity() {
                return Err(SmtError::Encoding(format!("partial application {t}")));
            }
            let name = match op {
                TheoryOp::Neg => "-",
                TheoryOp::Ne => "distinct",
                TheoryOp::And => "and",
                TheoryOp::Or => "or",
                other => other.name(),
            };
            let enc = args
                .iter()
                .map(|a| encode(a, names))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(format!("({name} {})", enc.join(" ")))
        }
    }
}

/// Runs `script` through the configured solver, enforcing the timeout.
pub fn run_solver(config: &SmtConfig, script: &str) -> Result<String, SmtError> {
    let cmd_str = config.command.join(" ");
    let (bin, args) = config.command.split_first().ok_or_else(|| SmtError::Spawn {
        cmd: cmd_str.clone(),
        reason: "empty command".into(),
    })?;
    let mut child = Command::new(bin)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SmtError::Spawn {
            cmd: cmd_str.clone(),
            reason: e.to_string(),
        })?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let script = script.to_string();
    let writer = std::thread::spawn(move || {
        // A solver that exits early closes the pipe; that shows up in the exit status.
        let _ = stdin.write_all(script.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });

    let start = Instant::now();
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if start.elapsed() >= config.timeout {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(SmtError::Timeout(config.timeout.as_millis()));
                }
                std::thread::sleep(Duration::from_millis(2));
            }
            Err(e) => {
                let _ = child.kill();
                return Err(SmtError::Crash {
                    status: "wait failed".into(),
                    stderr: e.to_string(),
                });
            }
        }
    };
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    let first = out.split_whitespace().next().unwrap_or("");
    if !status.success() && !matches!(first, "sat" | "unsat" | "unknown") {
        return Err(SmtError::Crash {
            status: status.to_string(),
            stderr: err.trim().to_string(),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexps(text: &str) -> Result<Vec<Sexp>, String> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' => {
                chars.next();
                stack.push(Vec::new());
            }
            ')' => {
                chars.next();
                let done = stack.pop().ok_or("unbalanced `)`")?;
                stack
                    .last_mut()
                    .ok_or("unbalanced `)`")?
                    .push(Sexp::List(done));
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') if chars.peek() == Some(&'"') => {
                            chars.next();
                            s.push('"');
                        }
                        Some('"') => break,
                        Some(ch) => s.push(ch),
                        None => return Err("unterminated string".into()),
                    }
                }
                stack.last_mut().expect("nonempty").push(Sexp::Atom(s));
            }
            '|' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('|') => break,
                        Some(ch) => s.push(ch),
                        None => return Err("unterminated quoted symbol".into()),
                    }
                }
                stack.last_mut().expect("nonempty").push(Sexp::Atom(s));
            }
            _ => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() || ch == '(' || ch == ')' {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                }
                stack.last_mut().expect("nonempty").push(Sexp::Atom(s));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().expect("one level"))
}

fn parse_value(e: &Sexp) -> Option<Value> {
    match e {
        Sexp::Atom(a) if a == "true" => Some(Value::Bool(true)),
        Sexp::Atom(a) if a == "false" => Some(Value::Bool(false)),
        Sexp::Atom(a) => a.parse::<i64>().ok().map(Value::Int),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(m), Sexp::Atom(n)] if m == "-" => {
                let mag: i128 = n.parse().ok()?;
                i64::try_from(-mag).ok().map(Value::Int)
            }
            _ => None,
        },
    }
}

/// Interprets a solver reply to a script produced by [`build_script`].
pub fn parse_reply(reply: &str, names: &BTreeMap<String, Var>) -> Result<SmtAnswer, SmtError> {
    let bad = |why: &str| SmtError::Unparseable(format!("{why}: {}", reply.trim()));
    let items = parse_sexps(reply).map_err(|e| bad(&e))?;
    let mut it = items.iter();
    match it.next() {
        Some(Sexp::Atom(a)) if a == "unsat" => Ok(SmtAnswer::Unsat),
        Some(Sexp::Atom(a)) if a == "unknown" => Ok(SmtAnswer::Unknown),
        Some(Sexp::Atom(a)) if a == "sat" => {
            let mut model = BTreeMap::new();
            if names.is_empty() {
                return Ok(SmtAnswer::Sat(model));
            }
            let Some(Sexp::List(pairs)) = it.next() else {
                return Err(bad("missing model"));
            };
            for p in pairs {
                let Sexp::List(kv) = p else {
                    return Err(bad("malformed model entry"));
                };
                let [Sexp::Atom(k), v] = kv.as_slice() else {
                    return Err(bad("malformed model entry"));
                };
                let var = names.get(k).ok_or_else(|| bad("unknown model variable"))?;
                let val = parse_value(v).ok_or_else(|| bad("unparseable model value"))?;
                if val.sort() != *var.ty().as_sort().expect("theory-sorted") {
                    return Err(bad("ill-sorted model value"));
                }
                model.insert(var.clone(), val);
            }
            if model.len() != names.len() {
                return Err(bad("incomplete model"));
            }
            Ok(SmtAnswer::Sat(model))
        }
        _ => Err(bad("expected sat, unsat or unknown")),
    }
}
