//! Problem-file reader, printer and command driver for the `horpo` binary.

pub mod parse;
pub mod print;
pub mod run;

pub use parse::{parse, parse_params, ErrorKind, ParseError, ProblemFile, RuleDecl};
pub use print::{print_params, print_problem};
pub use run::{main_with, run, Cli};
