//! The three MaxSAT inference rules as pure transformers.
//!
//! Each application names the exact weight it moves. Applying a rule to a
//! formula replaces the consumed weighted clauses by the produced ones;
//! checking that the consumed weight is actually available is the proof
//! engine's job.

use std::fmt;

use thiserror::Error;

use crate::formula::{Clause, Lit, Var, WeightedClause};
use crate::weight::Weight;

/// One recorded rule application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleApplication {
    /// Resolve `clause_a` (pivot positive) against `clause_b` (pivot
    /// negative), moving `amount` of weight.
    Resolution {
        pivot: Var,
        clause_a: Clause,
        clause_b: Clause,
        amount: Weight,
    },
    /// Split `amount` of `clause` over a variable not occurring in it.
    Split {
        clause: Clause,
        on_var: Var,
        amount: Weight,
    },
    /// Introduce `(clause, amount)` and `(clause, -amount)` from nothing.
    Virtual { clause: Clause, amount: Weight },
}

impl RuleApplication {
    pub fn kind_name(&self) -> &'static str {
        match self {
            RuleApplication::Resolution { .. } => "res",
            RuleApplication::Split { .. } => "split",
            RuleApplication::Virtual { .. } => "virt",
        }
    }
}

impl fmt::Display for RuleApplication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleApplication::Resolution {
                pivot,
                clause_a,
                clause_b,
                amount,
            } => {
                write!(
                    f,
                    "res on {pivot} ({clause_a} | {clause_b}) moving {amount}"
                )
            }
            RuleApplication::Split {
                clause,
                on_var,
                amount,
            } => {
                write!(f, "split {clause} on {on_var} moving {amount}")
            }
            RuleApplication::Virtual { clause, amount } => {
                write!(f, "virtual ({clause}, \u{00b1}{amount})")
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error(
        "pivot {pivot} must occur positively in the first antecedent and negatively in the second"
    )]
    PivotPolarity { pivot: Var },
    #[error("rule amount must be strictly positive")]
    NonPositiveAmount,
    #[error("infinite amount needs two hard antecedents")]
    InfiniteAmountWithSoftAntecedent,
    #[error("split variable {var} already occurs in the clause")]
    SplitVarInClause { var: Var },
    #[error("virtual weight must be finite")]
    InfiniteVirtualWeight,
}

/// What a rule application consumes from and adds to the formula.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleOutcome {
    pub consumed: Vec<WeightedClause>,
    pub produced: Vec<WeightedClause>,
}

/// MaxSAT resolution on `x | A` and `!x | B`, moving weight `m`:
/// consumes `m` from both antecedents and produces the resolvent
/// `(A | B, m)` plus the CNF expansion of the compensation clauses
/// `(x | A | ~B, m)` and `(!x | B | ~A, m)`.
///
/// A tautological resolvent is dropped; so is any tautological expansion
/// piece. Compensations on the side of a hard antecedent are dropped too:
/// every such piece is subsumed by the surviving hard clause. The hardness
/// of each antecedent must be supplied by the caller.
pub fn apply_resolution(
    clause_a: &Clause,
    clause_b: &Clause,
    pivot: Var,
    amount: &Weight,
    a_hard: bool,
    b_hard: bool,
) -> Result<RuleOutcome, RuleError> {
    let pos = Lit::new(pivot, true);
    let neg = Lit::new(pivot, false);
    if !clause_a.contains(pos) || !clause_b.contains(neg) {
        return Err(RuleError::PivotPolarity { pivot });
    }
    if !amount.is_positive() {
        return Err(RuleError::NonPositiveAmount);
    }
    if amount.is_infinite() && !(a_hard && b_hard) {
        return Err(RuleError::InfiniteAmountWithSoftAntecedent);
    }

    let rest_a = clause_a.without(pos);
    let rest_b = clause_b.without(neg);

    let mut produced = Vec::new();
    if let Some(resolvent) = rest_a.union(&rest_b) {
        produced.push(WeightedClause::new(resolvent, amount.clone()));
    }
    if !a_hard {
        produced.extend(compensations(clause_a, &rest_b, amount));
    }
    if !b_hard {
        produced.extend(compensations(clause_b, &rest_a, amount));
    }

    Ok(RuleOutcome {
        consumed: vec![
            WeightedClause::new(clause_a.clone(), amount.clone()),
            WeightedClause::new(clause_b.clone(), amount.clone()),
        ],
        produced,
    })
}

// Expansion of `(base | ~other, m)` into clauses, dropping tautologies.
fn compensations(base: &Clause, other: &Clause, amount: &Weight) -> Vec<WeightedClause> {
    let mut out = Vec::new();
    for (i, lit) in other.lits().iter().enumerate() {
        let piece = base
            .lits()
            .iter()
            .chain(other.lits()[..i].iter())
            .copied()
            .chain(std::iter::once(lit.complement()));
        if let Some(clause) = Clause::from_lits(piece) {
            out.push(WeightedClause::new(clause, amount.clone()));
        }
    }
    out
}

/// Split `(C, w)` into `(C | x, w)` and `(C | !x, w)`.
pub fn apply_split(
    clause: &Clause,
    on_var: Var,
    amount: &Weight,
) -> Result<RuleOutcome, RuleError> {
    if clause.contains_var(on_var) {
        return Err(RuleError::SplitVarInClause { var: on_var });
    }
    if !amount.is_positive() {
        return Err(RuleError::NonPositiveAmount);
    }
    let with_pos = clause.with(Lit::new(on_var, true)).expect("fresh variable");
    let with_neg = clause
        .with(Lit::new(on_var, false))
        .expect("fresh variable");
    Ok(RuleOutcome {
        consumed: vec![WeightedClause::new(clause.clone(), amount.clone())],
        produced: vec![
            WeightedClause::new(with_pos, amount.clone()),
            WeightedClause::new(with_neg, amount.clone()),
        ],
    })
}

/// Introduce `(C, w)` and `(C, -w)` for finite positive `w`; every
/// assignment's cost is unchanged.
pub fn apply_virtual(clause: &Clause, amount: &Weight) -> Result<RuleOutcome, RuleError> {
    if amount.is_infinite() {
        return Err(RuleError::InfiniteVirtualWeight);
    }
    if !amount.is_positive() {
        return Err(RuleError::NonPositiveAmount);
    }
    let negative = amount.negated().expect("finite weight");
    Ok(RuleOutcome {
        consumed: Vec::new(),
        produced: vec![
            WeightedClause::new(clause.clone(), amount.clone()),
            WeightedClause::new(clause.clone(), negative),
        ],
    })
}
