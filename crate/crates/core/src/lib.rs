//! Constrained higher-order recursive path ordering for logically
//! constrained simply-typed rewriting systems.
//!
//! - [`terms`]: types, curried terms, substitutions, enumeration.
//! - [`theory`]: integer/boolean theory, calculation, value orders, entailment.
//! - [`order`]: the unconstrained relations `≈`, `⊒`, `⊐`, `⊐⊐`.
//! - [`constrained`]: the constrained relations `⪰`, `≻`, `≻≻` and coverage checking.
//! - [`synth`]: search for a precedence and filter orienting a rule set.
//! - [`oracle`]: a naive reference implementation and brute-force property checks.

pub mod terms;
pub mod order;
pub mod theory;
pub mod constrained;
pub mod synth;
pub mod oracle;
