use std::collections::BTreeMap;
use std::fmt;

use super::{boolean, int, Constraint, TheoryOp};
use crate::terms::{Sort, Term, Value};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("no value order configured for sort {0}")]
    NoOrder(Sort),
    #[error("`{0}` and `{1}` must be theory terms of the same theory sort")]
    Mismatch(String, String),
    #[error("order `{order}` does not apply to sort {sort}")]
    WrongSort { order: String, sort: Sort },
}

/// A well-founded strict order and a compatible quasi-order on the values of one sort.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SortOrder {
    /// `v₁ ▶ v₂ ⇔ v₁ > v₂ ∧ v₁ ≥ bound`; values below `bound` are minimal.
    Descending { bound: i64 },
    /// `v₁ ▶ v₂ ⇔ v₁ < v₂ ∧ v₁ ≤ bound`; values above `bound` are minimal.
    Ascending { bound: i64 },
    /// Empty strict order: every value is minimal.
    Flat,
}

impl SortOrder {
    pub fn strict(&self, v1: Value, v2: Value) -> bool {
        match (self, v1, v2) {
            (SortOrder::Descending { bound }, Value::Int(a), Value::Int(b)) => a > b && a >= *bound,
            (SortOrder::Ascending { bound }, Value::Int(a), Value::Int(b)) => a < b && a <= *bound,
            _ => false,
        }
    }

    pub fn is_minimal(&self, v: Value) -> bool {
        match (self, v) {
            (SortOrder::Descending { bound }, Value::Int(a)) => a < *bound,
            (SortOrder::Ascending { bound }, Value::Int(a)) => a > *bound,
            _ => true,
        }
    }

    pub fn quasi(&self, v1: Value, v2: Value) -> bool {
        match (self, v1, v2) {
            (SortOrder::Descending { bound }, Value::Int(a), Value::Int(b)) => {
                (a >= b && b >= *bound) || a == b || (a < *bound && b < *bound)
            }
            (SortOrder::Ascending { bound }, Value::Int(a), Value::Int(b)) => {
                (a <= b && b <= *bound) || a == b || (a > *bound && b > *bound)
            }
            (SortOrder::Flat, _, _) => true,
            _ => false,
        }
    }

    fn applies_to(&self, sort: &Sort) -> bool {
        match self {
            SortOrder::Descending { .. } | SortOrder::Ascending { .. } => *sort == Sort::int(),
            SortOrder::Flat => true,
        }
    }

    fn lift_strict(&self, s: &Term, t: &Term) -> Term {
        match self {
            SortOrder::Descending { bound } => TheoryOp::And.apply([
                TheoryOp::Gt.apply([s.clone(), t.clone()]),
                TheoryOp::Ge.apply([s.clone(), int(*bound)]),
            ]),
            SortOrder::Ascending { bound } => TheoryOp::And.apply([
                TheoryOp::Lt.apply([s.clone(), t.clone()]),
                TheoryOp::Le.apply([s.clone(), int(*bound)]),
            ]),
            SortOrder::Flat => boolean(false),
        }
    }

    fn lift_quasi(&self, s: &Term, t: &Term) -> Term {
        let (weak, beyond) = match self {
            SortOrder::Descending { bound } => (
                TheoryOp::And.apply([
                    TheoryOp::Ge.apply([s.clone(), t.clone()]),
                    TheoryOp::Ge.apply([t.clone(), int(*bound)]),
                ]),
                TheoryOp::And.apply([
                    TheoryOp::Lt.apply([s.clone(), int(*bound)]),
                    TheoryOp::Lt.apply([t.clone(), int(*bound)]),
                ]),
            ),
            SortOrder::Ascending { bound } => (
                TheoryOp::And.apply([
                    TheoryOp::Le.apply([s.clone(), t.clone()]),
                    TheoryOp::Le.apply([t.clone(), int(*bound)]),
                ]),
                TheoryOp::And.apply([
                    TheoryOp::Gt.apply([s.clone(), int(*bound)]),
                    TheoryOp::Gt.apply([t.clone(), int(*bound)]),
                ]),
            ),
            SortOrder::Flat => return boolean(true),
        };
        TheoryOp::Or.apply([
            TheoryOp::Or.apply([weak, TheoryOp::Eq.apply([s.clone(), t.clone()])]),
            beyond,
        ])
    }
}

impl fmt::Display for SortOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SortOrder::Descending { bound } => write!(f, "down {bound}"),
            SortOrder::Ascending { bound } => write!(f, "up {bound}"),
            SortOrder::Flat => write!(f, "flat"),
        }
    }
}

/// Per-sort value orders `▶ι` / `⊵▶ι`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ValueOrder {
    orders: BTreeMap<Sort, SortOrder>,
}

impl Default for ValueOrder {
    /// `Int`: descending with bound 0. `Bool`: flat.
    fn default() -> ValueOrder {
        let mut orders = BTreeMap::new();
        orders.insert(Sort::int(), SortOrder::Descending { bound: 0 });
        orders.insert(Sort::bool(), SortOrder::Flat);
        ValueOrder { orders }
    }
}

impl ValueOrder {
    pub fn set(&mut self, sort: Sort, order: SortOrder) -> Result<(), OrderError> {
        if !order.applies_to(&sort) {
            return Err(OrderError::WrongSort {
                order: order.to_string(),
                sort,
            });
        }
        self.orders.insert(sort, order);
        Ok(())
    }

    pub fn get(&self, sort: &Sort) -> Option<&SortOrder> {
        self.orders.get(sort)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Sort, &SortOrder)> {
        self.orders.iter()
    }

    /// `v₁ ▶ v₂`; values of different sorts are unrelated.
    pub fn strict(&self, v1: Value, v2: Value) -> bool {
        v1.sort() == v2.sort()
            && self
                .orders
                .get(&v1.sort())
                .is_some_and(|o| o.strict(v1, v2))
    }

    pub fn quasi(&self, v1: Value, v2: Value) -> bool {
        v1.sort() == v2.sort()
            && self
                .orders
                .get(&v1.sort())
                .is_some_and(|o| o.quasi(v1, v2))
    }

    /// No `w` with `v ▶ w`. Sorts without an order have only minimal values.
    pub fn is_minimal(&self, v: Value) -> bool {
        self.orders.get(&v.sort()).is_none_or(|o| o.is_minimal(v))
    }

    fn order_for(&self, s: &Term, t: &Term) -> Result<&SortOrder, OrderError> {
        let mismatch = || OrderError::Mismatch(s.to_string(), t.to_string());
        if !(s.is_theory() && t.is_theory()) || s.ty() != t.ty() {
            return Err(mismatch());
        }
        let sort = s.ty().as_sort().ok_or_else(mismatch)?;
        self.orders
            .get(sort)
            .ok_or_else(|| OrderError::NoOrder(sort.clone()))
    }

    /// The constraint expressing `s ▶ t`.
    pub fn lift_strict(&self, s: &Term, t: &Term) -> Result<Constraint, OrderError> {
        let order = self.order_for(s, t)?;
        Ok(Constraint::new(order.lift_strict(s, t)).expect("lifted order is a Bool theory term"))
    }

    /// The constraint expressing `s ⊵▶ t`.
    pub fn lift_quasi(&self, s: &Term, t: &Term) -> Result<Constraint, OrderError> {
        let order = self.order_for(s, t)?;
        Ok(Constraint::new(order.lift_quasi(s, t)).expect("lifted order is a Bool theory term"))
    }
}
