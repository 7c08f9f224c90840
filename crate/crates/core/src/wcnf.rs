//! WCNF text format (MaxSAT-Evaluation-2022 style).
//!
//! Comment lines start with `c`. A clause line is `h l1 ... lk 0` for a hard
//! clause or `<weight> l1 ... lk 0` for a soft one, with literals as signed
//! variable indices. A leading negative weight is accepted only when
//! explicitly allowed; it is used for proof intermediates, never for inputs.
//! A legacy `p` header line is tolerated and used as a universe hint.

use std::fmt::Write as _;

use num_bigint::BigInt;
use thiserror::Error;

use crate::formula::{Clause, Formula, WeightedClause};
use crate::weight::Weight;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WcnfError {
    #[error("line {line}: malformed weight `{token}`")]
    BadWeight { line: usize, token: String },
    #[error("line {line}: malformed literal `{token}`")]
    BadLiteral { line: usize, token: String },
    #[error("line {line}: clause not terminated by 0")]
    MissingTerminator { line: usize },
    #[error("line {line}: negative weights need --allow-negative")]
    NegativeWeight { line: usize },
    #[error("line {line}: zero weight")]
    ZeroWeight { line: usize },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Accept a leading `-<int>` weight (proof intermediates only).
    pub allow_negative: bool,
}

pub fn parse(text: &str, options: ParseOptions) -> Result<Formula, WcnfError> {
    let mut entries: Vec<(Vec<crate::formula::Lit>, Weight)> = Vec::new();
    let mut n_vars: u32 = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().unwrap();
        if head == "p" {
            // legacy header: `p wcnf <vars> <clauses> [top]`
            if let Some(v) = tokens.nth(1).and_then(|t| t.parse::<u32>().ok()) {
                n_vars = n_vars.max(v);
            }
            continue;
        }
        let weight = if head == "h" {
            Weight::Infinite
        } else {
            let value: BigInt = head.parse().map_err(|_| WcnfError::BadWeight {
                line: line_no,
                token: head.to_string(),
            })?;
            if value == BigInt::from(0) {
                return Err(WcnfError::ZeroWeight { line: line_no });
            }
            if value < BigInt::from(0) && !options.allow_negative {
                return Err(WcnfError::NegativeWeight { line: line_no });
            }
            Weight::Finite(value)
        };
        let mut lits = Vec::new();
        let mut terminated = false;
        for tok in tokens {
            let v: i64 = tok.parse().map_err(|_| WcnfError::BadLiteral {
                line: line_no,
                token: tok.to_string(),
            })?;
            if v == 0 {
                terminated = true;
                break;
            }
            let lit = crate::formula::Lit::from_dimacs(v).ok_or(WcnfError::BadLiteral {
                line: line_no,
                token: tok.to_string(),
            })?;
            lits.push(lit);
        }
        if !terminated {
            return Err(WcnfError::MissingTerminator { line: line_no });
        }
        entries.push((lits, weight));
    }

    Ok(Formula::from_lit_entries(n_vars, entries))
}

pub fn write(formula: &Formula) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "c {} clauses over {} vars",
        formula.len(),
        formula.n_vars()
    );
    for (clause, weight) in formula.iter() {
        let _ = write!(out, "{}", weight_token(weight));
        for lit in clause.lits() {
            let _ = write!(out, " {}", lit.to_dimacs());
        }
        let _ = writeln!(out, " 0");
    }
    out
}

fn weight_token(w: &Weight) -> String {
    match w {
        Weight::Infinite => "h".to_string(),
        Weight::Finite(v) => v.to_string(),
    }
}

/// Render one weighted clause as a WCNF line (used by proof tooling).
pub fn clause_line(wc: &WeightedClause) -> String {
    let mut s = weight_token(&wc.weight);
    for lit in wc.clause.lits() {
        let _ = write!(s, " {}", lit.to_dimacs());
    }
    s.push_str(" 0");
    s
}

/// Format a clause's literal list with terminating zero.
pub fn lits_with_zero(clause: &Clause) -> String {
    let mut s = String::new();
    for lit in clause.lits() {
        let _ = write!(s, "{} ", lit.to_dimacs());
    }
    s.push('0');
    s
}
