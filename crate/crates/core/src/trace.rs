//! Line-oriented proof trace format.
//!
//! ```text
//! p proof <wcnf-file>
//! res <pivot-lit> <amount> | <litsA> | <litsB>
//! split <var> <amount> | <lits>
//! virt <amount> | <lits>
//! target <weight> | <lits>
//! ```
//!
//! Amounts are positive integers or `inf`; literal lists are signed
//! integers in canonical order, terminated by `0`. The header names the
//! formula the proof starts from; `check` takes the formula explicitly and
//! treats the header as documentation.

use std::fmt::Write as _;

use num_bigint::BigInt;
use thiserror::Error;

use crate::formula::{Clause, Formula, Var, WeightedClause};
use crate::proof::Proof;
use crate::rules::RuleApplication;
use crate::wcnf::lits_with_zero;
use crate::weight::Weight;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("missing `p proof` header")]
    MissingHeader,
    #[error("line {line}: unknown directive `{token}`")]
    UnknownDirective { line: usize, token: String },
    #[error("line {line}: malformed amount `{token}`")]
    BadAmount { line: usize, token: String },
    #[error("line {line}: malformed literal list")]
    BadLits { line: usize },
    #[error("line {line}: expected {want} literal sections")]
    BadSections { line: usize, want: usize },
    #[error("line {line}: pivot does not match antecedents")]
    BadPivot { line: usize },
    #[error("line {line}: directive after target")]
    AfterTarget { line: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofTrace {
    pub wcnf_ref: String,
    pub steps: Vec<RuleApplication>,
    pub target: Option<WeightedClause>,
}

impl ProofTrace {
    pub fn into_proof(self, initial: Formula) -> Proof {
        Proof {
            initial,
            steps: self.steps,
            claimed_target: self.target,
        }
    }
}

fn parse_amount(token: &str, line: usize) -> Result<Weight, TraceError> {
    if token == "inf" {
        return Ok(Weight::Infinite);
    }
    let v: BigInt = token.parse().map_err(|_| TraceError::BadAmount {
        line,
        token: token.to_string(),
    })?;
    if v <= BigInt::from(0) {
        return Err(TraceError::BadAmount {
            line,
            token: token.to_string(),
        });
    }
    Ok(Weight::Finite(v))
}

fn parse_lits(section: &str, line: usize) -> Result<Clause, TraceError> {
    let mut ints = Vec::new();
    let mut terminated = false;
    for tok in section.split_whitespace() {
        let v: i64 = tok.parse().map_err(|_| TraceError::BadLits { line })?;
        if v == 0 {
            terminated = true;
            break;
        }
        ints.push(v);
    }
    if !terminated {
        return Err(TraceError::BadLits { line });
    }
    Clause::from_dimacs(&ints).ok_or(TraceError::BadLits { line })
}

pub fn parse(text: &str) -> Result<ProofTrace, TraceError> {
    let mut wcnf_ref = None;
    let mut steps = Vec::new();
    let mut target = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p proof") {
            wcnf_ref = Some(rest.trim().to_string());
            continue;
        }
        if wcnf_ref.is_none() {
            return Err(TraceError::MissingHeader);
        }
        if target.is_some() {
            return Err(TraceError::AfterTarget { line: line_no });
        }

        let (head, rest) = line.split_once('|').map_or((line, ""), |(h, r)| (h, r));
        let head_tokens: Vec<&str> = head.split_whitespace().collect();
        let sections: Vec<&str> = if rest.is_empty() {
            Vec::new()
        } else {
            std::iter::once(rest).flat_map(|r| r.split('|')).collect()
        };
        match head_tokens.first().copied() {
            Some("res") => {
                if head_tokens.len() != 3 || sections.len() != 2 {
                    return Err(TraceError::BadSections {
                        line: line_no,
                        want: 2,
                    });
                }
                let pivot_lit: i64 = head_tokens[1]
                    .parse()
                    .map_err(|_| TraceError::BadLits { line: line_no })?;
                let amount = parse_amount(head_tokens[2], line_no)?;
                let first = parse_lits(sections[0], line_no)?;
                let second = parse_lits(sections[1], line_no)?;
                let lit = crate::formula::Lit::from_dimacs(pivot_lit)
                    .ok_or(TraceError::BadPivot { line: line_no })?;
                // normalize so clause_a holds the pivot positively
                let (clause_a, clause_b) = if lit.is_positive() {
                    (first, second)
                } else {
                    (second, first)
                };
                let pivot = lit.var();
                let pos = crate::formula::Lit::new(pivot, true);
                if !clause_a.contains(pos) || !clause_b.contains(pos.complement()) {
                    return Err(TraceError::BadPivot { line: line_no });
                }
                steps.push(RuleApplication::Resolution {
                    pivot,
                    clause_a,
                    clause_b,
                    amount,
                });
            }
            Some("split") => {
                if head_tokens.len() != 3 || sections.len() != 1 {
                    return Err(TraceError::BadSections {
                        line: line_no,
                        want: 1,
                    });
                }
                let var: u32 = head_tokens[1]
                    .parse()
                    .map_err(|_| TraceError::BadLits { line: line_no })?;
                let amount = parse_amount(head_tokens[2], line_no)?;
                let clause = parse_lits(sections[0], line_no)?;
                steps.push(RuleApplication::Split {
                    clause,
                    on_var: Var(var),
                    amount,
                });
            }
            Some("virt") => {
                if head_tokens.len() != 2 || sections.len() != 1 {
                    return Err(TraceError::BadSections {
                        line: line_no,
                        want: 1,
                    });
                }
                let amount = parse_amount(head_tokens[1], line_no)?;
                if amount.is_infinite() {
                    return Err(TraceError::BadAmount {
                        line: line_no,
                        token: head_tokens[1].to_string(),
                    });
                }
                let clause = parse_lits(sections[0], line_no)?;
                steps.push(RuleApplication::Virtual { clause, amount });
            }
            Some("target") => {
                if head_tokens.len() != 2 || sections.len() != 1 {
                    return Err(TraceError::BadSections {
                        line: line_no,
                        want: 1,
                    });
                }
                let weight = parse_amount(head_tokens[1], line_no)?;
                let clause = parse_lits(sections[0], line_no)?;
                target = Some(WeightedClause::new(clause, weight));
            }
            Some(other) => {
                return Err(TraceError::UnknownDirective {
                    line: line_no,
                    token: other.to_string(),
                })
            }
            None => {}
        }
    }

    Ok(ProofTrace {
        wcnf_ref: wcnf_ref.ok_or(TraceError::MissingHeader)?,
        steps,
        target,
    })
}

pub fn write(proof: &Proof, wcnf_ref: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p proof {wcnf_ref}");
    for step in &proof.steps {
        match step {
            RuleApplication::Resolution {
                pivot,
                clause_a,
                clause_b,
                amount,
            } => {
                let _ = writeln!(
                    out,
                    "res {} {} | {} | {}",
                    pivot.index(),
                    amount,
                    lits_with_zero(clause_a),
                    lits_with_zero(clause_b)
                );
            }
            RuleApplication::Split {
                clause,
                on_var,
                amount,
            } => {
                let _ = writeln!(
                    out,
                    "split {} {} | {}",
                    on_var.index(),
                    amount,
                    lits_with_zero(clause)
                );
            }
            RuleApplication::Virtual { clause, amount } => {
                let _ = writeln!(out, "virt {} | {}", amount, lits_with_zero(clause));
            }
        }
    }
    if let Some(target) = &proof.claimed_target {
        let _ = writeln!(
            out,
            "target {} | {}",
            target.weight,
            lits_with_zero(&target.clause)
        );
    }
    out
}
