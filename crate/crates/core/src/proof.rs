//! Sequential proof replay and checking.
//!
//! A proof is a list of rule applications over an initial formula. Replay
//! keeps two ledgers: positive clause mass (what rules may consume) and
//! negative mass introduced by the virtual rule. The two only meet at the
//! end: a proof is valid when every step was legal, no clause nets out
//! negative, and the claimed target is present with enough weight.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::formula::{Clause, Formula, Lit, Var, WeightedClause};
use crate::rules::{
    apply_resolution, apply_split, apply_virtual, RuleApplication, RuleError, RuleOutcome,
};
use crate::weight::Weight;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub initial: Formula,
    pub steps: Vec<RuleApplication>,
    pub claimed_target: Option<WeightedClause>,
}

impl Proof {
    pub fn new(initial: Formula, steps: Vec<RuleApplication>, target: WeightedClause) -> Self {
        Proof {
            initial,
            steps,
            claimed_target: Some(target),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StepError {
    #[error("missing antecedent {0}")]
    MissingAntecedent(Clause),
    #[error("insufficient weight on {clause}: have {have}, need {need}")]
    InsufficientWeight {
        clause: Clause,
        have: Weight,
        need: Weight,
    },
    #[error("negative antecedent {0}")]
    NegativeAntecedent(Clause),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProofError {
    #[error("step {index}: {source}")]
    Step { index: usize, source: StepError },
    #[error("canonical expansion requires finite positive weights")]
    ExpansionNeedsSoft,
    #[error("universe of {n_vars} variables exceeds expansion bound {bound}")]
    ExpansionBound { n_vars: u32, bound: u32 },
    #[error("cannot introduce the empty clause")]
    IntroduceEmptyClause,
    #[error("introduced weight must be finite and positive")]
    IntroduceBadWeight,
}

/// Replay state: positive mass consumable by rules, negative mass owed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofState {
    pos: BTreeMap<Clause, Weight>,
    neg: BTreeMap<Clause, BigInt>,
    n_vars: u32,
    step_index: usize,
}

impl ProofState {
    pub fn from_formula(f: &Formula) -> Self {
        let mut state = ProofState {
            pos: BTreeMap::new(),
            neg: BTreeMap::new(),
            n_vars: f.n_vars(),
            step_index: 0,
        };
        for (clause, weight) in f.iter() {
            if weight.is_negative() {
                state
                    .neg
                    .insert(clause.clone(), weight.as_finite().unwrap().clone());
            } else {
                state.pos.insert(clause.clone(), weight.clone());
            }
        }
        state
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn n_vars(&self) -> u32 {
        self.n_vars
    }

    /// Positive mass available on a clause.
    pub fn available(&self, clause: &Clause) -> Option<&Weight> {
        self.pos.get(clause)
    }

    /// Negative mass still owed per clause.
    pub fn negative_mass(&self) -> &BTreeMap<Clause, BigInt> {
        &self.neg
    }

    /// All positive entries, in canonical clause order.
    pub fn positive_entries(&self) -> impl Iterator<Item = (&Clause, &Weight)> {
        self.pos.iter()
    }

    /// The merged view: positive and negative mass cancel per clause.
    pub fn merged_formula(&self) -> Formula {
        let entries = self
            .pos
            .iter()
            .map(|(c, w)| WeightedClause::new(c.clone(), w.clone()))
            .chain(
                self.neg
                    .iter()
                    .map(|(c, v)| WeightedClause::new(c.clone(), Weight::Finite(v.clone()))),
            );
        Formula::normalize(self.n_vars, entries)
    }

    fn availability(&self, clause: &Clause) -> Result<&Weight, StepError> {
        match self.pos.get(clause) {
            Some(w) => Ok(w),
            None if self.neg.contains_key(clause) => {
                Err(StepError::NegativeAntecedent(clause.clone()))
            }
            None => Err(StepError::MissingAntecedent(clause.clone())),
        }
    }

    fn check_consumable(&self, clause: &Clause, amount: &Weight) -> Result<(), StepError> {
        let have = self.availability(clause)?;
        if have.consume(amount).is_none() {
            return Err(StepError::InsufficientWeight {
                clause: clause.clone(),
                have: have.clone(),
                need: amount.clone(),
            });
        }
        Ok(())
    }

    /// Validate a step against the current state and compute its effect
    /// without mutating anything.
    pub fn compute_step(&self, app: &RuleApplication) -> Result<RuleOutcome, StepError> {
        match app {
            RuleApplication::Resolution {
                pivot,
                clause_a,
                clause_b,
                amount,
            } => {
                self.check_consumable(clause_a, amount)?;
                self.check_consumable(clause_b, amount)?;
                let a_hard = self.pos[clause_a].is_infinite();
                let b_hard = self.pos[clause_b].is_infinite();
                Ok(apply_resolution(
                    clause_a, clause_b, *pivot, amount, a_hard, b_hard,
                )?)
            }
            RuleApplication::Split {
                clause,
                on_var,
                amount,
            } => {
                self.check_consumable(clause, amount)?;
                Ok(apply_split(clause, *on_var, amount)?)
            }
            RuleApplication::Virtual { clause, amount } => Ok(apply_virtual(clause, amount)?),
        }
    }

    /// Commit a computed effect: subtract consumed mass, merge produced.
    pub fn commit(&mut self, outcome: &RuleOutcome) {
        for wc in &outcome.consumed {
            let have = self.pos.get(&wc.clause).expect("validated").clone();
            let left = have.consume(&wc.weight).expect("validated");
            if left.is_zero() {
                self.pos.remove(&wc.clause);
            } else {
                self.pos.insert(wc.clause.clone(), left);
            }
        }
        for wc in &outcome.produced {
            self.n_vars = self.n_vars.max(wc.clause.max_var());
            if wc.weight.is_negative() {
                let owed = self.neg.entry(wc.clause.clone()).or_default();
                *owed += wc.weight.as_finite().unwrap();
            } else {
                let merged = match self.pos.get(&wc.clause) {
                    Some(w) => w.plus(&wc.weight),
                    None => wc.weight.clone(),
                };
                self.pos.insert(wc.clause.clone(), merged);
            }
        }
        self.step_index += 1;
    }

    /// Validate and apply one step.
    pub fn apply_step(&mut self, app: &RuleApplication) -> Result<RuleOutcome, StepError> {
        let outcome = self.compute_step(app)?;
        self.commit(&outcome);
        Ok(outcome)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckFailure {
    Step { index: usize, reason: String },
    NegativeAtEnd { clause: Clause, net: Weight },
    TargetMissing { clause: Clause },
    TargetWeight { have: Weight, want: Weight },
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckFailure::Step { index, reason } => write!(f, "step {index}: {reason}"),
            CheckFailure::NegativeAtEnd { clause, net } => {
                write!(f, "negative weight at end: ({clause}, {net})")
            }
            CheckFailure::TargetMissing { clause } => {
                write!(f, "target clause {clause} not derived")
            }
            CheckFailure::TargetWeight { have, want } => {
                write!(f, "target weight {have} below claimed {want}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub valid: bool,
    /// Net weight of the target clause in the final formula, when it exists.
    pub derived_weight: Option<Weight>,
    /// Number of rule applications; clause merges are free.
    pub length: usize,
    pub failure: Option<CheckFailure>,
    pub final_formula: Option<Formula>,
}

/// Replay a proof from its initial formula and judge it.
pub fn check_proof(proof: &Proof) -> Verdict {
    let mut state = ProofState::from_formula(&proof.initial);
    for (index, step) in proof.steps.iter().enumerate() {
        if let Err(e) = state.apply_step(step) {
            return Verdict {
                valid: false,
                derived_weight: None,
                length: proof.steps.len(),
                failure: Some(CheckFailure::Step {
                    index,
                    reason: e.to_string(),
                }),
                final_formula: None,
            };
        }
    }
    let merged = state.merged_formula();
    for (clause, weight) in merged.iter() {
        if weight.is_negative() {
            return Verdict {
                valid: false,
                derived_weight: None,
                length: proof.steps.len(),
                failure: Some(CheckFailure::NegativeAtEnd {
                    clause: clause.clone(),
                    net: weight.clone(),
                }),
                final_formula: Some(merged.clone()),
            };
        }
    }
    let mut derived = None;
    if let Some(target) = &proof.claimed_target {
        match merged.weight_of(&target.clause) {
            None => {
                return Verdict {
                    valid: false,
                    derived_weight: None,
                    length: proof.steps.len(),
                    failure: Some(CheckFailure::TargetMissing {
                        clause: target.clause.clone(),
                    }),
                    final_formula: Some(merged),
                }
            }
            Some(have) if have < &target.weight => {
                return Verdict {
                    valid: false,
                    derived_weight: Some(have.clone()),
                    length: proof.steps.len(),
                    failure: Some(CheckFailure::TargetWeight {
                        have: have.clone(),
                        want: target.weight.clone(),
                    }),
                    final_formula: Some(merged),
                }
            }
            Some(have) => derived = Some(have.clone()),
        }
    }
    Verdict {
        valid: true,
        derived_weight: derived,
        length: proof.steps.len(),
        failure: None,
        final_formula: Some(merged),
    }
}

/// Expand every clause to full support over the universe by splits alone.
///
/// The result mentions every variable in every clause and has one clause
/// per assignment of positive cost. Returned with the split-only proof
/// realizing it. Requires finite positive weights: hard mass is never
/// exhausted by a split, so hard clauses cannot be expanded away.
pub fn expand_canonical(f: &Formula, bound: u32) -> Result<(Formula, Proof), ProofError> {
    if f.n_vars() > bound {
        return Err(ProofError::ExpansionBound {
            n_vars: f.n_vars(),
            bound,
        });
    }
    if f.iter().any(|(_, w)| !w.is_finite() || !w.is_positive()) {
        return Err(ProofError::ExpansionNeedsSoft);
    }
    let n = f.n_vars();
    let mut steps = Vec::new();
    for (clause, weight) in f.iter() {
        // depth-first cascade, positive branch first
        let mut stack = vec![clause.clone()];
        while let Some(cur) = stack.pop() {
            let missing = (1..=n).find(|&v| !cur.contains_var(Var(v)));
            let Some(v) = missing else { continue };
            steps.push(RuleApplication::Split {
                clause: cur.clone(),
                on_var: Var(v),
                amount: weight.clone(),
            });
            let neg_branch = cur.with(Lit::new(Var(v), false)).expect("fresh var");
            let pos_branch = cur.with(Lit::new(Var(v), true)).expect("fresh var");
            stack.push(neg_branch);
            stack.push(pos_branch);
        }
    }
    let proof = Proof {
        initial: f.clone(),
        steps,
        claimed_target: None,
    };
    let mut state = ProofState::from_formula(&proof.initial);
    for (index, step) in proof.steps.iter().enumerate() {
        state
            .apply_step(step)
            .map_err(|source| ProofError::Step { index, source })?;
    }
    Ok((state.merged_formula(), proof))
}

/// Extend the state with `{(empty,-w)} + {(C,w)} + negation(C,w)` using one
/// virtual and one split per literal of `C`. Returns the steps applied.
pub fn introduce_clause_pair(
    state: &mut ProofState,
    clause: &Clause,
    weight: &Weight,
) -> Result<Vec<RuleApplication>, ProofError> {
    if clause.is_empty() {
        return Err(ProofError::IntroduceEmptyClause);
    }
    if !weight.is_finite() || !weight.is_positive() {
        return Err(ProofError::IntroduceBadWeight);
    }
    let mut steps = vec![RuleApplication::Virtual {
        clause: Clause::empty(),
        amount: weight.clone(),
    }];
    let mut cur = Clause::empty();
    for lit in clause.lits() {
        steps.push(RuleApplication::Split {
            clause: cur.clone(),
            on_var: lit.var(),
            amount: weight.clone(),
        });
        cur = cur.with(*lit).expect("distinct variables in a clause");
    }
    let base_index = state.step_index();
    for (offset, step) in steps.iter().enumerate() {
        state.apply_step(step).map_err(|source| ProofError::Step {
            index: base_index + offset,
            source,
        })?;
    }
    Ok(steps)
}
