//! Command implementations. Each command writes to the given sinks and returns an exit code.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use horpo::constrained::CDerivation;
use horpo::oracle::{build_graph, check_lemmas, engine_disagreements, GraphError, LemmaConfig, E1, UNIVERSE_CAP};
use horpo::order::{Fidelity, HorpoParams};
use horpo::synth::{orient, validate, Budget, OrientOutcome, RuleReport, SearchConfig, SynthError};
use horpo::theory::{BoundedBackend, Entailer, SmtMode};

use crate::parse::{parse, parse_params, ProblemFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNORIENTED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Parser, Debug, Clone)]
#[command(name = "horpo", version, about = "Orient constrained higher-order rewrite rules with a recursive path ordering")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Rule variants: `sound` adds the side conditions the unrestricted clauses need.
    #[arg(long, value_enum, default_value_t = Mode::Sound, global = true)]
    pub mode: Mode,
    /// When to consult the external SMT solver.
    #[arg(long, value_enum, default_value_t = Smt::Auto, global = true)]
    pub smt: Smt,
    /// Integer bound for sampled entailment refutation.
    #[arg(long, default_value_t = 16, global = true)]
    pub bound: i64,
    #[arg(long, default_value_t = 100_000, global = true)]
    pub budget_nodes: u64,
    #[arg(long, default_value_t = 10_000, global = true)]
    pub budget_ms: u64,
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sound,
    Paper,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smt {
    Off,
    Auto,
    Always,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Records,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Check every rule under fixed parameters.
    Check {
        file: PathBuf,
        /// Sidecar parameter file; overrides an inline params block.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Search for a precedence and filter orienting every rule.
    Orient {
        file: PathBuf,
        /// Only try the full argument filter.
        #[arg(long)]
        full_filters: bool,
    },
    /// Print the derivation for one rule.
    Explain {
        file: PathBuf,
        /// Rule number, counting from 1.
        #[arg(long)]
        rule: usize,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Run the order-theoretic property suites on an enumerated universe.
    Selftest {
        #[arg(long, default_value_t = 5)]
        universe_size: usize,
    },
}

impl Options {
    pub fn fidelity(&self) -> Fidelity {
        match self.mode {
            Mode::Sound => Fidelity::Sound,
            Mode::Paper => Fidelity::Paper,
        }
    }

    pub fn config(&self, force_full_filters: bool) -> SearchConfig {
        SearchConfig {
            budget: Budget {
                nodes: self.budget_nodes,
                time: Duration::from_millis(self.budget_ms),
            },
            seed: self.seed,
            fidelity: self.fidelity(),
            force_full_filters,
            ..SearchConfig::default()
        }
    }
}

/// A command's early exit: code plus the message for stderr.
struct Failure(i32, String);

type CmdResult = Result<i32, Failure>;

fn input(msg: impl Into<String>) -> Failure {
    Failure(EXIT_INPUT, msg.into())
}

/// Output sink for either format.
struct Out<'a> {
    format: Format,
    w: &'a mut dyn Write,
}

fn quote(v: &str) -> String {
    if !v.is_empty() && !v.chars().any(|c| c.is_whitespace() || c == '"' || c == '=' || c == '\\') {
        return v.to_string();
    }
    let mut s = String::from("\"");
    for c in v.chars() {
        match c {
            '"' => s.push_str("\\\""),
            '\\' => s.push_str("\\\\"),
            '\n' => s.push_str("\\n"),
            c => s.push(c),
        }
    }
    s.push('"');
    s
}

impl Out<'_> {
    fn text(&mut self, line: impl AsRef<str>) {
        if self.format == Format::Text {
            let _ = writeln!(self.w, "{}", line.as_ref());
        }
    }

    fn record(&mut self, fields: &[(&str, String)]) {
        if self.format == Format::Records {
            let parts: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={}", quote(v))).collect();
            let _ = writeln!(self.w, "{}", parts.join(" "));
        }
    }
}

/// Parses the arguments and runs the command; usage errors exit with 2.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            code
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut o = Out {
        format: cli.opts.format,
        w: out,
    };
    let result = match &cli.command {
        Command::Check { file, params } => check(&cli.opts, file, params.as_deref(), &mut o, err),
        Command::Orient { file, full_filters } => orient_cmd(&cli.opts, file, *full_filters, &mut o),
        Command::Explain { file, rule, params } => explain(&cli.opts, file, *rule, params.as_deref(), &mut o, err),
        Command::Selftest { universe_size } => selftest(*universe_size, &mut o),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn load(path: &Path) -> Result<ProblemFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| input(format!("{}:{e}", path.display())))
}

/// Parameters from the sidecar file, else the inline block.
fn load_params(file: &ProblemFile, sidecar: Option<&Path>, err: &mut dyn Write) -> Result<Option<HorpoParams>, Failure> {
    let Some(path) = sidecar else {
        return Ok(file.params.clone());
    };
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let params = parse_params(&text, file).map_err(|e| input(format!("{}:{e}", path.display())))?;
    if file.params.is_some() {
        let _ = writeln!(err, "warning: parameters from {} override the inline params block", path.display());
    }
    Ok(Some(params))
}

fn entailer(opts: &Options) -> Result<Entailer, Failure> {
    if opts.bound < 0 {
        return Err(input("--bound must be nonnegative"));
    }
    let mode = match opts.smt {
        Smt::Off => SmtMode::Off,
        Smt::Auto => SmtMode::Auto,
        Smt::Always => SmtMode::Always,
    };
    let e = Entailer::from_env(BoundedBackend::sampled(opts.bound), mode);
    if mode == SmtMode::Always && e.solver().is_none() {
        return Err(input("--smt=always needs a solver: set HORPO_SMT_CMD or put z3 or cvc5 on PATH"));
    }
    Ok(e)
}

fn rule_text(file: &ProblemFile, i: usize) -> String {
    let r = &file.rules[i].rule;
    format!("{r}")
}

fn clause(d: &CDerivation) -> String {
    let p = d.principal();
    if p.rule == d.rule {
        d.rule.name().to_string()
    } else {
        format!("{} via {}", d.rule.name(), p.rule.name())
    }
}

fn report_rules(file: &ProblemFile, reports: &[RuleReport], o: &mut Out) {
    for r in reports {
        let n = r.index + 1;
        let text = rule_text(file, r.index);
        match &r.result {
            Ok(d) => {
                o.text(format!("rule {n} ({}): {text}", r.demand));
                o.text(format!("  ok, {}", clause(d)));
                o.record(&[
                    ("type", "rule".into()),
                    ("index", n.to_string()),
                    ("demand", r.demand.to_string()),
                    ("status", "ok".into()),
                    ("clause", d.rule.name().into()),
                    ("principal", d.principal().rule.name().into()),
                    ("rule", text),
                ]);
            }
            Err(reason) => {
                o.text(format!("rule {n} ({}): {text}", r.demand));
                o.text(format!("  FAILED: {reason}"));
                o.record(&[
                    ("type", "rule".into()),
                    ("index", n.to_string()),
                    ("demand", r.demand.to_string()),
                    ("status", "failed".into()),
                    ("reason", reason.clone()),
                    ("rule", text),
                ]);
            }
        }
    }
}

fn report_params(params: &HorpoParams, o: &mut Out) {
    o.text(format!("precedence: {}", params.precedence));
    o.text(format!("filter: {}", params.filter));
    o.record(&[
        ("type", "params".into()),
        ("precedence", params.precedence.to_string()),
        ("filter", params.filter.to_string()),
    ]);
}

fn check(opts: &Options, path: &Path, sidecar: Option<&Path>, o: &mut Out, err: &mut dyn Write) -> CmdResult {
    let file = load(path)?;
    let params = load_params(&file, sidecar, err)?
        .ok_or_else(|| input("no parameters: add a params block or pass --params"))?;
    let e = entailer(opts)?;
    let reports = validate(&file.problem(), &params, &e, opts.fidelity()).map_err(|e| input(e.to_string()))?;
    report_params(&params, o);
    report_rules(&file, &reports, o);
    let failed = reports.iter().filter(|r| !r.passed()).count();
    o.text(if failed == 0 {
        format!("result: all {} rules oriented", reports.len())
    } else {
        format!("result: {failed} of {} rules not oriented", reports.len())
    });
    o.record(&[
        ("type", "summary".into()),
        ("command", "check".into()),
        ("rules", reports.len().to_string()),
        ("failed", failed.to_string()),
    ]);
    Ok(if failed == 0 { EXIT_OK } else { EXIT_UNORIENTED })
}

/// Searches and re-validates; the solution's parameters on success.
fn search(opts: &Options, file: &ProblemFile, full_filters: bool, o: &mut Out) -> Result<Result<HorpoParams, i32>, Failure> {
    let e = entailer(opts)?;
    let problem = file.problem();
    let outcome = orient(&problem, &opts.config(full_filters), &e).map_err(|err| match err {
        SynthError::Replay(_) => Failure(EXIT_INTERNAL, err.to_string()),
        other => input(other.to_string()),
    })?;
    let stats = outcome.stats();
    match outcome {
        OrientOutcome::Found(sol) => {
            let reports = validate(&problem, &sol.params, &e, opts.fidelity())
                .map_err(|err| Failure(EXIT_INTERNAL, format!("found parameters are invalid: {err}")))?;
            if let Some(r) = reports.iter().find(|r| !r.passed()) {
                return Err(Failure(
                    EXIT_INTERNAL,
                    format!("found parameters fail to re-validate rule {}", r.index + 1),
                ));
            }
            o.text("status: found");
            o.text(format!("candidates: {}", stats.candidates));
            o.record(&[
                ("type", "summary".into()),
                ("command", "orient".into()),
                ("status", "found".into()),
                ("candidates", stats.candidates.to_string()),
            ]);
            report_params(&sol.params, o);
            report_rules(file, &reports, o);
            Ok(Ok(sol.params))
        }
        OrientOutcome::Exhausted {
            unknown_entailments, ..
        } => {
            o.text("status: no parameters orient every rule");
            o.text(format!("candidates: {}", stats.candidates));
            if unknown_entailments > 0 {
                o.text(format!(
                    "not definitive: {unknown_entailments} entailment queries were unknown (try --smt=always or set HORPO_SMT_CMD)"
                ));
            }
            o.record(&[
                ("type", "summary".into()),
                ("command", "orient".into()),
                ("status", "exhausted".into()),
                ("definitive", (unknown_entailments == 0).to_string()),
                ("unknown", unknown_entailments.to_string()),
                ("candidates", stats.candidates.to_string()),
            ]);
            Ok(Err(EXIT_UNORIENTED))
        }
        OrientOutcome::BudgetExhausted { .. } => {
            o.text("status: budget exhausted");
            o.text(format!("candidates: {}", stats.candidates));
            o.record(&[
                ("type", "summary".into()),
                ("command", "orient".into()),
                ("status", "budget".into()),
                ("candidates", stats.candidates.to_string()),
            ]);
            Ok(Err(EXIT_BUDGET))
        }
    }
}

fn orient_cmd(opts: &Options, path: &Path, full_filters: bool, o: &mut Out) -> CmdResult {
    let file = load(path)?;
    Ok(match search(opts, &file, full_filters, o)? {
        Ok(_) => EXIT_OK,
        Err(code) => code,
    })
}

fn derivation_records(d: &CDerivation, depth: usize, o: &mut Out) {
    let mut fields = vec![
        ("type", "node".to_string()),
        ("depth", depth.to_string()),
        ("clause", d.rule.name().to_string()),
        ("lhs", d.lhs.to_string()),
        ("rel", d.relation().to_string()),
        ("rhs", d.rhs.to_string()),
    ];
    if let Some(i) = d.index {
        fields.push(("index", i.to_string()));
    }
    if let Some(c) = &d.certificate {
        fields.push(("entails", format!("{} => {}", c.phi, c.goal)));
        fields.push(("verdict", c.verdict.to_string()));
    }
    o.record(&fields);
    for p in &d.premises {
        derivation_records(p, depth + 1, o);
    }
}

fn explain(opts: &Options, path: &Path, rule: usize, sidecar: Option<&Path>, o: &mut Out, err: &mut dyn Write) -> CmdResult {
    let file = load(path)?;
    if rule == 0 || rule > file.rules.len() {
        return Err(input(format!("--rule {rule} out of range: the file has {} rules", file.rules.len())));
    }
    let params = match load_params(&file, sidecar, err)? {
        Some(p) => {
            report_params(&p, o);
            p
        }
        None => match search(opts, &file, false, &mut Out { format: o.format, w: &mut std::io::sink() })? {
            Ok(p) => {
                report_params(&p, o);
                p
            }
            Err(code) => {
                o.text("no parameters found; nothing to explain");
                o.record(&[("type", "summary".into()), ("command", "explain".into()), ("status", "unoriented".into())]);
                return Ok(code);
            }
        },
    };
    let e = entailer(opts)?;
    let reports = validate(&file.problem(), &params, &e, opts.fidelity()).map_err(|e| input(e.to_string()))?;
    let r = &reports[rule - 1];
    o.text(format!("rule {rule} ({}): {}", r.demand, rule_text(&file, rule - 1)));
    match &r.result {
        Ok(d) => {
            o.text(d.render().trim_end());
            derivation_records(d, 0, o);
            Ok(EXIT_OK)
        }
        Err(reason) => {
            o.text(format!("FAILED: {reason}"));
            o.record(&[
                ("type", "rule".into()),
                ("index", rule.to_string()),
                ("status", "failed".into()),
                ("reason", reason.clone()),
            ]);
            Ok(EXIT_UNORIENTED)
        }
    }
}

fn selftest(size: usize, o: &mut Out) -> CmdResult {
    let e1 = E1::new();
    let mut ok = true;
    let graph_err = |err: GraphError| match err {
        GraphError::CapExceeded { .. } => input(err.to_string()),
        GraphError::Params(_) => Failure(EXIT_INTERNAL, err.to_string()),
    };
    for (name, params) in e1.parameter_sets() {
        let graph = build_graph(&e1.symbols(), &e1.pool(), size, &params, Fidelity::Sound, UNIVERSE_CAP).map_err(graph_err)?;
        o.text(format!("parameters: {name} ({} terms, size <= {size})", graph.universe.len()));
        o.text(format!("  precedence: {}; filter: {}", params.precedence, params.filter));
        let report = check_lemmas(&graph, &LemmaConfig::default());
        for r in &report.results {
            ok &= r.passed();
            let status = if r.passed() { "pass" } else { "FAIL" };
            o.text(format!("  {:<28} {:>10}  {status}", r.name, r.checked));
            if let Some(c) = &r.counterexample {
                o.text(format!("    counterexample: {c}"));
            }
            let mut fields = vec![
                ("type", "lemma".to_string()),
                ("params", name.to_string()),
                ("universe", graph.universe.len().to_string()),
                ("lemma", r.name.to_string()),
                ("checked", r.checked.to_string()),
                ("status", if r.passed() { "pass" } else { "fail" }.to_string()),
            ];
            if let Some(c) = &r.counterexample {
                fields.push(("counterexample", c.clone()));
            }
            o.record(&fields);
        }
        for fidelity in [Fidelity::Sound, Fidelity::Paper] {
            let g = if fidelity == Fidelity::Sound {
                graph.clone()
            } else {
                build_graph(&e1.symbols(), &e1.pool(), size, &params, fidelity, UNIVERSE_CAP).map_err(graph_err)?
            };
            let diffs = engine_disagreements(&g);
            ok &= diffs.is_empty();
            let mode = match fidelity {
                Fidelity::Sound => "sound",
                Fidelity::Paper => "paper",
            };
            o.text(format!("  engine agreement ({mode}): {} disagreements", diffs.len()));
            for (s, t, rel) in diffs.iter().take(5) {
                o.text(format!("    {s} {rel} {t}"));
            }
            let closure = g.gt.closure();
            let acyclic = (0..g.universe.len()).all(|i| !closure.get(i, i));
            if fidelity == Fidelity::Paper {
                o.text(format!("  paper-mode strict relation acyclic: {acyclic} (informational)"));
            }
            o.record(&[
                ("type", "agreement".into()),
                ("params", name.to_string()),
                ("mode", mode.into()),
                ("disagreements", diffs.len().to_string()),
                ("acyclic", acyclic.to_string()),
            ]);
        }
    }
    o.text(if ok { "result: all checks passed" } else { "result: FAILED" });
    o.record(&[("type", "summary".into()), ("command", "selftest".into()), ("status", if ok { "pass" } else { "fail" }.into())]);
    Ok(if ok { EXIT_OK } else { EXIT_INTERNAL })
}
