//! Reader for `.lcstrs` problem files and sidecar parameter files.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use horpo::order::{ArgumentFilter, HorpoParams, ParamError, PrecDecl, Precedence};
use horpo::synth::{ConstrainedRule, Demand, OrientationProblem, SynthError};
use horpo::terms::{Signature, Sort, Symbol, Term, Type, TypeError, Value, Var};
use horpo::theory::{declare_theory, Constraint, LVarSet, SortOrder, TheoryOp, ValueOrder};

const KEYWORDS: [&str; 5] = ["theory", "sort", "var", "order", "params"];
const RESERVED: [&str; 4] = ["true", "false", "neg", "not"];

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ErrorKind {
    Lexical,
    Syntax,
    Sort,
    Arity,
    Unknown,
    Duplicate,
    Params,
}

impl ErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ErrorKind::Lexical => "E01",
            ErrorKind::Syntax => "E02",
            ErrorKind::Sort => "E03",
            ErrorKind::Arity => "E04",
            ErrorKind::Unknown => "E05",
            ErrorKind::Duplicate => "E06",
            ErrorKind::Params => "E07",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ErrorKind::Lexical => "lexical error",
            ErrorKind::Syntax => "syntax error",
            ErrorKind::Sort => "sort error",
            ErrorKind::Arity => "arity error",
            ErrorKind::Unknown => "unknown identifier",
            ErrorKind::Duplicate => "duplicate declaration",
            ErrorKind::Params => "invalid parameters",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
#[error("{line}:{col}: {} [{}]: {message}", kind.label(), kind.code())]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// A parsed rule, remembering whether `L` was written out.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RuleDecl {
    pub rule: ConstrainedRule,
    pub explicit_lvars: bool,
    pub line: usize,
}

/// One problem: declarations, rules and optional inline parameters.
#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub theory: bool,
    pub sorts: Vec<Sort>,
    /// Plain symbols in declaration order.
    pub symbols: Vec<Symbol>,
    pub vars: Vec<Var>,
    /// Value orders set explicitly, in file order.
    pub orders: Vec<(Sort, SortOrder)>,
    pub rules: Vec<RuleDecl>,
    pub params: Option<HorpoParams>,
}

impl Default for ProblemFile {
    fn default() -> ProblemFile {
        ProblemFile {
            theory: true,
            sorts: Vec::new(),
            symbols: Vec::new(),
            vars: Vec::new(),
            orders: Vec::new(),
            rules: Vec::new(),
            params: None,
        }
    }
}

impl ProblemFile {
    pub fn signature(&self) -> Signature {
        let mut sig = Signature::from_symbols(self.symbols.iter().cloned()).expect("names checked by the parser");
        if self.theory {
            declare_theory(&mut sig).expect("theory names are reserved");
        }
        sig
    }

    pub fn values(&self) -> ValueOrder {
        let mut values = ValueOrder::default();
        for (s, o) in &self.orders {
            values.set(s.clone(), *o).expect("checked by the parser");
        }
        values
    }

    pub fn problem(&self) -> OrientationProblem {
        OrientationProblem {
            signature: self.signature(),
            values: self.values(),
            rules: self.rules.iter().map(|r| r.rule.clone()).collect(),
        }
    }
}

pub fn parse(text: &str) -> Result<ProblemFile, ParseError> {
    let toks = lex(text)?;
    Parser::new(toks, ProblemFile::default()).problem()
}

/// Reads a sidecar parameter file: params lines, optionally wrapped in `params { … }`.
pub fn parse_params(text: &str, file: &ProblemFile) -> Result<HorpoParams, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser::new(toks, file.clone());
    p.skip_newlines();
    let wrapped = p.peek_ident() == Some("params");
    if wrapped {
        p.bump();
        p.expect(Tok::Punct("{"))?;
    }
    let params = p.params_items(wrapped)?;
    p.skip_newlines();
    if !p.at_end() {
        return Err(p.error_here(ErrorKind::Syntax, "unexpected input after parameters"));
    }
    Ok(params)
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String),
    Int(i64),
    Punct(&'static str),
    Newline,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Newline => f.write_str("end of line"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const PUNCT: [&str; 22] = [
    "->", ">=", "<=", "!=", "&&", "||", "+", "-", "*", ">", "<", "=", "~", "(", ")", "[", "]", "{", "}", ",", ":", ";",
];

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c == '#' {
                break;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line: line_no,
                    col,
                });
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n = s.parse::<i64>().map_err(|_| ParseError {
                    kind: ErrorKind::Lexical,
                    line: line_no,
                    col,
                    message: format!("integer literal `{s}` out of range"),
                })?;
                out.push(Spanned {
                    tok: Tok::Int(n),
                    line: line_no,
                    col,
                });
            } else {
                let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
                let Some(p) = PUNCT.iter().find(|p| rest.starts_with(**p)) else {
                    return Err(ParseError {
                        kind: ErrorKind::Lexical,
                        line: line_no,
                        col,
                        message: format!("unexpected character `{c}`"),
                    });
                };
                i += p.chars().count();
                out.push(Spanned {
                    tok: Tok::Punct(p),
                    line: line_no,
                    col,
                });
            }
        }
        out.push(Spanned {
            tok: Tok::Newline,
            line: line_no,
            col: chars.len() + 1,
        });
    }
    let line = out.last().map_or(1, |t| t.line + 1);
    out.push(Spanned { tok: Tok::Eof, line, col: 1 });
    Ok(out)
}

fn binop(tok: &Tok) -> Option<TheoryOp> {
    match tok {
        Tok::Punct(p) => TheoryOp::from_name(p).filter(|op| op.infix().is_some()),
        _ => None,
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    file: ProblemFile,
    sig: Signature,
    vars: HashMap<String, Var>,
    sorts: HashMap<String, Sort>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(toks: Vec<Spanned>, file: ProblemFile) -> Parser {
        let sig = file.signature();
        let vars = file.vars.iter().map(|v| (v.name().to_string(), v.clone())).collect();
        let mut sorts: HashMap<String, Sort> = file.sorts.iter().map(|s| (s.name().to_string(), s.clone())).collect();
        if file.theory {
            sorts.insert("Int".into(), Sort::int());
            sorts.insert("Bool".into(), Sort::bool());
        }
        Parser {
            toks,
            pos: 0,
            file,
            sig,
            vars,
            sorts,
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_end(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn error_at(&self, kind: ErrorKind, (line, col): (usize, usize), message: impl Into<String>) -> ParseError {
        ParseError {
            kind,
            line,
            col,
            message: message.into(),
        }
    }

    fn error_here(&self, kind: ErrorKind, message: impl Into<String>) -> ParseError {
        self.error_at(kind, self.here(), message)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error_here(ErrorKind::Syntax, format!("expected {wanted}, found {}", self.peek()))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Spanned> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, wanted: &str) -> PResult<(String, (usize, usize))> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, at))
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.bump();
        }
    }

    fn end_of_line(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of line")),
        }
    }

    fn problem(mut self) -> PResult<ProblemFile> {
        let mut first = true;
        loop {
            self.skip_newlines();
            if self.at_end() {
                break;
            }
            let at = self.here();
            match self.peek_ident() {
                Some("theory") => {
                    if !first {
                        return Err(self.error_at(ErrorKind::Syntax, at, "`theory` must be the first declaration"));
                    }
                    self.bump();
                    let (name, at) = self.ident("`int` or `none`")?;
                    match name.as_str() {
                        "int" => {}
                        "none" => {
                            self.file.theory = false;
                            self.sig = self.file.signature();
                            self.sorts.clear();
                        }
                        _ => return Err(self.error_at(ErrorKind::Unknown, at, format!("unknown theory `{name}`"))),
                    }
                    self.end_of_line()?;
                }
                Some("sort") => {
                    self.bump();
                    self.sort_decl()?;
                }
                Some("var") => {
                    self.bump();
                    self.var_decl()?;
                }
                Some("order") => {
                    self.bump();
                    self.order_decl()?;
                }
                Some("params") if self.peek_at(1) == &Tok::Punct("{") => {
                    if self.file.params.is_some() {
                        return Err(self.error_at(ErrorKind::Duplicate, at, "second `params` block"));
                    }
                    self.bump();
                    self.bump();
                    let params = self.params_items(true)?;
                    self.file.params = Some(params);
                    self.end_of_line()?;
                }
                Some(_) if self.peek_at(1) == &Tok::Punct(":") => self.symbol_decl()?,
                _ => self.rule()?,
            }
            first = false;
        }
        Ok(self.file)
    }

    fn check_fresh(&self, name: &str, at: (usize, usize)) -> PResult<()> {
        if KEYWORDS.contains(&name) || RESERVED.contains(&name) {
            return Err(self.error_at(ErrorKind::Duplicate, at, format!("`{name}` is reserved")));
        }
        if self.sig.lookup(name).is_some() || self.vars.contains_key(name) {
            return Err(self.error_at(ErrorKind::Duplicate, at, format!("`{name}` is already declared")));
        }
        Ok(())
    }

    fn sort_decl(&mut self) -> PResult<()> {
        loop {
            let (name, at) = self.ident("a sort name")?;
            if self.sorts.contains_key(&name) || name == "Int" || name == "Bool" {
                return Err(self.error_at(ErrorKind::Duplicate, at, format!("sort `{name}` is already declared")));
            }
            let sort = Sort::new(&name).expect("identifiers are nonempty");
            self.sorts.insert(name, sort.clone());
            self.file.sorts.push(sort);
            if !self.eat(&Tok::Punct(",")) {
                break;
            }
        }
        self.end_of_line()
    }

    fn var_decl(&mut self) -> PResult<()> {
        let mut names = Vec::new();
        loop {
            let (name, at) = self.ident("a variable name")?;
            self.check_fresh(&name, at)?;
            if names.iter().any(|(n, _)| *n == name) {
                return Err(self.error_at(ErrorKind::Duplicate, at, format!("`{name}` is already declared")));
            }
            names.push((name, at));
            if !self.eat(&Tok::Punct(",")) {
                break;
            }
        }
        self.expect(Tok::Punct(":"))?;
        let ty = self.ty()?;
        self.end_of_line()?;
        for (name, _) in names {
            let v = Var::new(&name, ty.clone());
            self.vars.insert(name, v.clone());
            self.file.vars.push(v);
        }
        Ok(())
    }

    fn symbol_decl(&mut self) -> PResult<()> {
        let (name, at) = self.ident("a symbol name")?;
        self.check_fresh(&name, at)?;
        self.expect(Tok::Punct(":"))?;
        let ty = self.ty()?;
        self.end_of_line()?;
        let f = Symbol::plain(name, ty);
        self.sig.declare(f.clone()).expect("freshness checked");
        self.file.symbols.push(f);
        Ok(())
    }

    fn order_decl(&mut self) -> PResult<()> {
        let (name, at) = self.ident("a sort name")?;
        let sort = self.sort_named(&name, at)?;
        self.expect(Tok::Punct("="))?;
        let (kind, kat) = self.ident("`down`, `up` or `flat`")?;
        let order = match kind.as_str() {
            "down" => SortOrder::Descending { bound: self.signed_int()? },
            "up" => SortOrder::Ascending { bound: self.signed_int()? },
            "flat" => SortOrder::Flat,
            _ => return Err(self.error_at(ErrorKind::Unknown, kat, format!("unknown value order `{kind}`"))),
        };
        self.end_of_line()?;
        let mut values = self.file.values();
        values.set(sort.clone(), order).map_err(|e| self.error_at(ErrorKind::Sort, kat, e.to_string()))?;
        self.file.orders.retain(|(s, _)| *s != sort);
        self.file.orders.push((sort, order));
        Ok(())
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat(&Tok::Punct("-"));
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn sort_named(&self, name: &str, at: (usize, usize)) -> PResult<Sort> {
        self.sorts
            .get(name)
            .cloned()
            .ok_or_else(|| self.error_at(ErrorKind::Unknown, at, format!("unknown sort `{name}`")))
    }

    fn ty(&mut self) -> PResult<Type> {
        let dom = if self.eat(&Tok::Punct("(")) {
            let t = self.ty()?;
            self.expect(Tok::Punct(")"))?;
            t
        } else {
            let (name, at) = self.ident("a type")?;
            Type::base(self.sort_named(&name, at)?)
        };
        if self.eat(&Tok::Punct("->")) {
            Ok(Type::arrow(dom, self.ty()?))
        } else {
            Ok(dom)
        }
    }

    fn require_theory(&self, at: (usize, usize), what: &str) -> PResult<()> {
        if self.file.theory {
            Ok(())
        } else {
            Err(self.error_at(ErrorKind::Unknown, at, format!("{what} requires `theory int`")))
        }
    }

    fn rule(&mut self) -> PResult<()> {
        let start = self.here();
        let lhs = self.term()?;
        let arrow = self.here();
        self.expect(Tok::Punct("->"))?;
        let rhs = self.term()?;
        if !lhs.ty().same_structure(rhs.ty()) {
            return Err(self.error_at(
                ErrorKind::Arity,
                arrow,
                format!("left side has type {} but right side has type {}", lhs.ty(), rhs.ty()),
            ));
        }
        let mut phi = Constraint::truth();
        if *self.peek() == Tok::Punct("[") {
            let at = self.here();
            self.require_theory(at, "a constraint")?;
            self.bump();
            let at = self.here();
            let t = self.term()?;
            phi = Constraint::new(t).map_err(|e| self.error_at(ErrorKind::Sort, at, e.to_string()))?;
            self.expect(Tok::Punct("]"))?;
        }
        let mut demand = Demand::Strict;
        let mut lvars = None;
        if self.eat(&Tok::Punct("{")) {
            loop {
                let (word, at) = self.ident("`strict`, `weak` or `L`")?;
                match word.as_str() {
                    "strict" => demand = Demand::Strict,
                    "weak" => demand = Demand::Weak,
                    "L" => {
                        self.expect(Tok::Punct("="))?;
                        lvars = Some(self.lvars()?);
                    }
                    _ => return Err(self.error_at(ErrorKind::Unknown, at, format!("unknown rule annotation `{word}`"))),
                }
                if !self.eat(&Tok::Punct(";")) {
                    break;
                }
            }
            self.expect(Tok::Punct("}"))?;
        }
        self.end_of_line()?;
        let explicit_lvars = lvars.is_some();
        let rule = ConstrainedRule::new(lhs, rhs, phi, lvars, demand).map_err(|e| match e {
            SynthError::LVars { source, .. } => self.error_at(ErrorKind::Sort, start, source.to_string()),
            other => self.error_at(ErrorKind::Arity, arrow, other.to_string()),
        })?;
        self.file.rules.push(RuleDecl {
            rule,
            explicit_lvars,
            line: start.0,
        });
        Ok(())
    }

    fn lvars(&mut self) -> PResult<LVarSet> {
        self.expect(Tok::Punct("{"))?;
        let mut vars = Vec::new();
        if !self.eat(&Tok::Punct("}")) {
            loop {
                let (name, at) = self.ident("a variable")?;
                let Some(v) = self.vars.get(&name) else {
                    return Err(self.error_at(ErrorKind::Unknown, at, format!("unknown variable `{name}`")));
                };
                let v = v.clone();
                LVarSet::new([v.clone()]).map_err(|e| self.error_at(ErrorKind::Sort, at, e.to_string()))?;
                vars.push(v);
                if !self.eat(&Tok::Punct(",")) {
                    break;
                }
            }
            self.expect(Tok::Punct("}"))?;
        }
        Ok(LVarSet::new(vars).expect("members checked"))
    }

    fn term(&mut self) -> PResult<Term> {
        self.expr(0)
    }

    fn expr(&mut self, min: u8) -> PResult<Term> {
        let mut lhs = self.application()?;
        loop {
            let Some(op) = binop(self.peek()) else {
                return Ok(lhs);
            };
            let (level, left_assoc) = op.infix().expect("binary operator");
            if level < min {
                return Ok(lhs);
            }
            let at = self.here();
            self.require_theory(at, &format!("operator `{}`", op.name()))?;
            self.bump();
            let rhs = self.expr(level + 1)?;
            lhs = Term::apply(Term::sym(op.symbol()), [lhs, rhs]).map_err(|e| self.type_error(at, e))?;
            if !left_assoc {
                if let Some(next) = binop(self.peek()) {
                    if next.infix().map(|(l, _)| l) == Some(level) {
                        return Err(self.error_here(ErrorKind::Syntax, "comparison operators do not chain; add parentheses"));
                    }
                }
            }
        }
    }

    fn type_error(&self, at: (usize, usize), e: TypeError) -> ParseError {
        let kind = match e {
            TypeError::NotAFunction { .. } => ErrorKind::Arity,
            _ => ErrorKind::Sort,
        };
        self.error_at(kind, at, e.to_string())
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::Int(_) | Tok::Punct("("))
    }

    /// A head applied to atoms. A negative literal may only stand at the head.
    fn application(&mut self) -> PResult<Term> {
        let at = self.here();
        let mut t = if *self.peek() == Tok::Punct("-") {
            self.require_theory(at, "an integer literal")?;
            self.bump();
            match *self.peek() {
                Tok::Int(n) => {
                    self.bump();
                    Term::value(Value::Int(-n))
                }
                _ => return Err(self.unexpected("an integer after `-` (use `neg` to negate a term)")),
            }
        } else {
            self.atom()?
        };
        while self.starts_atom() {
            let arg = self.atom()?;
            t = Term::app(t, arg).map_err(|e| self.type_error(at, e))?;
        }
        Ok(t)
    }

    fn atom(&mut self) -> PResult<Term> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                self.resolve(&name, at)
            }
            Tok::Int(n) => {
                self.require_theory(at, "an integer literal")?;
                self.bump();
                Ok(Term::value(Value::Int(n)))
            }
            Tok::Punct("(") => {
                self.bump();
                if let Some(op) = binop(self.peek()) {
                    if *self.peek_at(1) == Tok::Punct(")") {
                        self.require_theory(at, &format!("operator `{}`", op.name()))?;
                        self.bump();
                        self.bump();
                        return Ok(Term::sym(op.symbol()));
                    }
                }
                let t = self.expr(0)?;
                self.expect(Tok::Punct(")"))?;
                Ok(t)
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    fn resolve(&self, name: &str, at: (usize, usize)) -> PResult<Term> {
        if let Some(v) = self.vars.get(name) {
            return Ok(Term::var(v.clone()));
        }
        if let Some(f) = self.sig.lookup(name) {
            return Ok(Term::sym(f.clone()));
        }
        match name {
            "true" | "false" => {
                self.require_theory(at, "a boolean literal")?;
                Ok(Term::value(Value::Bool(name == "true")))
            }
            _ => Err(self.error_at(ErrorKind::Unknown, at, format!("unknown identifier `{name}`"))),
        }
    }

    /// A symbol in the params block: a name, an operator, or `(op)`.
    fn param_symbol(&mut self) -> PResult<(Symbol, (usize, usize))> {
        let at = self.here();
        let name = match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                s
            }
            Tok::Punct("(") if binop(self.peek_at(1)).is_some() && *self.peek_at(2) == Tok::Punct(")") => {
                self.bump();
                let Tok::Punct(p) = self.bump().tok else { unreachable!() };
                self.bump();
                p.to_string()
            }
            Tok::Punct(p) if binop(self.peek()).is_some() => {
                self.bump();
                p.to_string()
            }
            _ => return Err(self.unexpected("a symbol")),
        };
        match self.sig.lookup(&name) {
            Some(f) => Ok((f.clone(), at)),
            None => Err(self.error_at(ErrorKind::Unknown, at, format!("unknown symbol `{name}`"))),
        }
    }

    fn param_error(&self, at: (usize, usize), e: ParamError) -> ParseError {
        self.error_at(ErrorKind::Params, at, e.to_string())
    }

    /// Items up to `}` (when `closed`) or end of input.
    fn params_items(&mut self, closed: bool) -> PResult<HorpoParams> {
        let mut prec = Precedence::new();
        let mut filter = ArgumentFilter::full();
        let mut filtered: BTreeSet<Symbol> = BTreeSet::new();
        loop {
            self.skip_newlines();
            if closed && self.eat(&Tok::Punct("}")) {
                break;
            }
            if self.at_end() {
                if closed {
                    return Err(self.unexpected("`}`"));
                }
                break;
            }
            if self.peek_ident() == Some("pi") && *self.peek_at(1) == Tok::Punct("(") {
                self.bump();
                self.bump();
                let (f, at) = self.param_symbol()?;
                self.expect(Tok::Punct(")"))?;
                self.expect(Tok::Punct("="))?;
                self.expect(Tok::Punct("{"))?;
                let mut positions = Vec::new();
                if !self.eat(&Tok::Punct("}")) {
                    loop {
                        match *self.peek() {
                            Tok::Int(n) if n >= 0 => {
                                self.bump();
                                positions.push(n as usize);
                            }
                            _ => return Err(self.unexpected("an argument position")),
                        }
                        if !self.eat(&Tok::Punct(",")) {
                            break;
                        }
                    }
                    self.expect(Tok::Punct("}"))?;
                }
                if !filtered.insert(f.clone()) {
                    return Err(self.error_at(ErrorKind::Duplicate, at, format!("second filter for `{f}`")));
                }
                filter.set(&f, positions).map_err(|e| self.param_error(at, e))?;
            } else {
                loop {
                    let (mut prev, _) = self.param_symbol()?;
                    prec.add_symbol(&prev);
                    loop {
                        let at = self.here();
                        let decl = match self.peek() {
                            Tok::Punct(">") => PrecDecl::Greater,
                            Tok::Punct("~") => PrecDecl::Equivalent,
                            _ => break,
                        };
                        self.bump();
                        let (next, _) = self.param_symbol()?;
                        prec.declare(&prev, decl, &next).map_err(|e| self.param_error(at, e))?;
                        prev = next;
                    }
                    if !self.eat(&Tok::Punct(",")) {
                        break;
                    }
                }
            }
            match self.peek() {
                Tok::Newline | Tok::Eof => {}
                Tok::Punct("}") if closed => {}
                _ => return Err(self.unexpected("end of line")),
            }
        }
        Ok(HorpoParams::new(prec, filter))
    }
}
