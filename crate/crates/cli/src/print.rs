//! Writes problems and parameters back in the file syntax.

use std::fmt::Write;

use horpo::order::HorpoParams;
use horpo::synth::Demand;

use crate::parse::ProblemFile;

/// The body of a params block, one item per line.
pub fn params_lines(params: &HorpoParams) -> Vec<String> {
    let mut lines = Vec::new();
    if !params.precedence.is_empty() {
        let prec = params.precedence.to_string();
        if prec != "(empty)" {
            lines.push(prec);
        }
    }
    if !params.filter.is_full() {
        lines.extend(params.filter.to_string().split(", ").map(str::to_string));
    }
    lines
}

pub fn print_params(params: &HorpoParams) -> String {
    let mut out = String::from("params {\n");
    for l in params_lines(params) {
        let _ = writeln!(out, "  {l}");
    }
    out.push_str("}\n");
    out
}

pub fn print_problem(file: &ProblemFile) -> String {
    let mut out = String::new();
    out.push_str(if file.theory { "theory int\n" } else { "theory none\n" });
    for s in &file.sorts {
        let _ = writeln!(out, "sort {s}");
    }
    for f in &file.symbols {
        let _ = writeln!(out, "{f} : {}", f.ty());
    }
    for v in &file.vars {
        let _ = writeln!(out, "var {v} : {}", v.ty());
    }
    for (s, o) in &file.orders {
        let _ = writeln!(out, "order {s} = {o}");
    }
    if let Some(p) = &file.params {
        out.push_str(&print_params(p));
    }
    for r in &file.rules {
        let rule = &r.rule;
        let _ = write!(out, "{} -> {}", rule.lhs, rule.rhs);
        if !rule.phi.is_trivially_true() {
            let _ = write!(out, " [{}]", rule.phi);
        }
        let mut notes = Vec::new();
        if rule.demand == Demand::Weak {
            notes.push("weak".to_string());
        }
        if r.explicit_lvars {
            notes.push(format!("L = {}", rule.lvars));
        }
        if !notes.is_empty() {
            let _ = write!(out, " {{{}}}", notes.join("; "));
        }
        out.push('\n');
    }
    out
}
