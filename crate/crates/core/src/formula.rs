//! Weighted CNF formulas with canonical clause representation.
//!
//! A [`Clause`] is a duplicate-free set of literals ordered by variable
//! index. Tautologies (a variable in both polarities) cannot be constructed
//! as clauses. A [`Formula`] maps canonical clauses to exact weights: equal
//! clauses are merged by weight addition, zero-weight entries vanish.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::weight::Weight;

/// 1-based variable index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A literal: a variable with a polarity.
///
/// Canonical order is ascending variable index, positive before negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lit {
    var: Var,
    positive: bool,
}

impl Lit {
    pub fn new(var: Var, positive: bool) -> Self {
        assert!(var.0 >= 1, "variable indices start at 1");
        Lit { var, positive }
    }

    pub fn positive(var: u32) -> Self {
        Lit::new(Var(var), true)
    }

    pub fn negative(var: u32) -> Self {
        Lit::new(Var(var), false)
    }

    /// Build from a signed DIMACS-style integer (nonzero).
    pub fn from_dimacs(v: i64) -> Option<Self> {
        if v == 0 || v.unsigned_abs() > u32::MAX as u64 {
            return None;
        }
        Some(Lit::new(Var(v.unsigned_abs() as u32), v > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var.0 as i64;
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn complement(self) -> Self {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }
}

impl PartialOrd for Lit {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Lit {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.var
            .cmp(&other.var)
            .then_with(|| other.positive.cmp(&self.positive))
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A canonical clause: sorted, duplicate-free, never tautological.
/// The empty clause is valid and unsatisfiable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    pub fn empty() -> Self {
        Clause { lits: Vec::new() }
    }

    /// Canonicalize a literal list. Returns `None` for tautologies;
    /// duplicate literals are merged.
    pub fn from_lits<I: IntoIterator<Item = Lit>>(lits: I) -> Option<Self> {
        let mut v: Vec<Lit> = lits.into_iter().collect();
        v.sort();
        v.dedup();
        for pair in v.windows(2) {
            if pair[0].var() == pair[1].var() {
                return None;
            }
        }
        Some(Clause { lits: v })
    }

    /// Parse from signed integers; `None` on a zero entry or tautology.
    pub fn from_dimacs(ints: &[i64]) -> Option<Self> {
        let lits: Option<Vec<Lit>> = ints.iter().map(|&i| Lit::from_dimacs(i)).collect();
        Clause::from_lits(lits?)
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn contains_var(&self, var: Var) -> bool {
        self.lits.iter().any(|l| l.var() == var)
    }

    pub fn max_var(&self) -> u32 {
        self.lits.last().map_or(0, |l| l.var().0)
    }

    /// Clause without the given literal.
    pub fn without(&self, lit: Lit) -> Clause {
        Clause {
            lits: self.lits.iter().copied().filter(|&l| l != lit).collect(),
        }
    }

    /// Union with one extra literal; `None` if tautological.
    pub fn with(&self, lit: Lit) -> Option<Clause> {
        Clause::from_lits(self.lits.iter().copied().chain(std::iter::once(lit)))
    }

    /// Set union of two clauses; `None` if tautological.
    pub fn union(&self, other: &Clause) -> Option<Clause> {
        Clause::from_lits(self.lits.iter().chain(other.lits.iter()).copied())
    }

    /// True when every literal of `self` occurs in `other`.
    pub fn subsumes(&self, other: &Clause) -> bool {
        self.lits.iter().all(|&l| other.contains(l))
    }

    /// A total assignment falsifies a clause iff it falsifies every literal.
    pub fn falsified_by(&self, assignment: &Assignment) -> bool {
        self.lits.iter().all(|l| {
            let value = assignment.value(l.var()).unwrap_or(false);
            value != l.is_positive()
        })
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return write!(f, "\u{25a1}");
        }
        let parts: Vec<String> = self.lits.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A clause paired with its falsification cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedClause {
    pub clause: Clause,
    pub weight: Weight,
}

impl WeightedClause {
    pub fn new(clause: Clause, weight: Weight) -> Self {
        WeightedClause { clause, weight }
    }
}

impl fmt::Display for WeightedClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.clause, self.weight)
    }
}

/// Total truth assignment over variables `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    /// Assignment number `index` in lexicographic order over
    /// `(x1, ..., xn)` with `0 < 1`: variable 1 is the most significant bit.
    pub fn from_lex_index(n_vars: u32, index: u64) -> Self {
        let n = n_vars as usize;
        let mut values = vec![false; n];
        for (i, value) in values.iter_mut().enumerate() {
            *value = (index >> (n - 1 - i)) & 1 == 1;
        }
        Assignment { values }
    }

    pub fn n_vars(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn value(&self, var: Var) -> Option<bool> {
        self.values.get((var.0 - 1) as usize).copied()
    }

    /// The assignment as a set of true literals, one per variable.
    pub fn to_lits(&self) -> Vec<Lit> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| Lit::new(Var(i as u32 + 1), v))
            .collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("incomplete assignment: {have} of {need} variables")]
    IncompleteAssignment { have: u32, need: u32 },
    #[error("negation of empty clause undefined")]
    NegateEmptyClause,
}

/// A weighted CNF formula: canonical clauses mapped to nonzero weights,
/// over a declared universe of variables `1..=n_vars`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Formula {
    entries: BTreeMap<Clause, Weight>,
    n_vars: u32,
}

impl Formula {
    pub fn empty(n_vars: u32) -> Self {
        Formula {
            entries: BTreeMap::new(),
            n_vars,
        }
    }

    /// Merge a multiset of weighted clauses into canonical form.
    ///
    /// Equal clauses add their weights (infinity absorbs finite addends),
    /// zero-weight entries are dropped. Order-insensitive. The universe
    /// grows to cover every mentioned variable.
    pub fn normalize<I: IntoIterator<Item = WeightedClause>>(n_vars: u32, entries: I) -> Self {
        let mut f = Formula::empty(n_vars);
        for wc in entries {
            f.add(wc.clause, wc.weight);
        }
        f
    }

    /// As [`Formula::normalize`], but from raw literal lists: tautological
    /// clauses are discarded here.
    pub fn from_lit_entries<I: IntoIterator<Item = (Vec<Lit>, Weight)>>(
        n_vars: u32,
        entries: I,
    ) -> Self {
        Formula::normalize(
            n_vars,
            entries
                .into_iter()
                .filter_map(|(lits, w)| Clause::from_lits(lits).map(|c| WeightedClause::new(c, w))),
        )
    }

    /// Add weight to one clause, merging and dropping zero.
    pub fn add(&mut self, clause: Clause, weight: Weight) {
        if weight.is_zero() {
            self.observe_vars(&clause);
            return;
        }
        self.observe_vars(&clause);
        let merged = match self.entries.get(&clause) {
            Some(existing) => existing.plus(&weight),
            None => weight,
        };
        if merged.is_zero() {
            self.entries.remove(&clause);
        } else {
            self.entries.insert(clause, merged);
        }
    }

    fn observe_vars(&mut self, clause: &Clause) {
        self.n_vars = self.n_vars.max(clause.max_var());
    }

    pub fn n_vars(&self) -> u32 {
        self.n_vars
    }

    pub fn set_n_vars(&mut self, n: u32) {
        self.n_vars = self.n_vars.max(n);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight_of(&self, clause: &Clause) -> Option<&Weight> {
        self.entries.get(clause)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Clause, &Weight)> {
        self.entries.iter()
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.entries.keys()
    }

    pub fn to_entries(&self) -> Vec<WeightedClause> {
        self.entries
            .iter()
            .map(|(c, w)| WeightedClause::new(c.clone(), w.clone()))
            .collect()
    }

    pub fn is_soft(&self) -> bool {
        self.entries.values().all(|w| w.is_finite())
    }

    pub fn is_hard(&self) -> bool {
        self.entries.values().all(|w| w.is_infinite())
    }

    pub fn has_negative(&self) -> bool {
        self.entries.values().any(|w| w.is_negative())
    }

    /// Union by weight addition; the universe is the larger of the two.
    pub fn union(&self, other: &Formula) -> Formula {
        let mut out = self.clone();
        out.set_n_vars(other.n_vars);
        for (c, w) in other.iter() {
            out.add(c.clone(), w.clone());
        }
        out
    }

    /// Cost of a total assignment: the sum of weights over falsified clauses.
    pub fn cost(&self, assignment: &Assignment) -> Result<Weight, FormulaError> {
        if assignment.n_vars() < self.n_vars {
            return Err(FormulaError::IncompleteAssignment {
                have: assignment.n_vars(),
                need: self.n_vars,
            });
        }
        let mut total = Weight::zero();
        for (clause, weight) in &self.entries {
            if clause.falsified_by(assignment) {
                total = total.plus(weight);
            }
        }
        Ok(total)
    }

    /// Sum of all clause weights.
    pub fn roof(&self) -> Weight {
        self.entries
            .values()
            .fold(Weight::zero(), |acc, w| acc.plus(w))
    }

    /// Replace every infinite weight by `gamma`.
    pub fn soften(&self, gamma: &Weight) -> Formula {
        Formula::normalize(
            self.n_vars,
            self.entries.iter().map(|(c, w)| {
                let w = if w.is_infinite() {
                    gamma.clone()
                } else {
                    w.clone()
                };
                WeightedClause::new(c.clone(), w)
            }),
        )
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(c, w)| format!("({c}, {w})"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// CNF expansion of the negation of a single weighted clause.
///
/// For `C = l1 | ... | lp` (canonical order) the negation carries the same
/// weight on each of `!l1`, `l1 | !l2`, ..., `l1 | ... | l(p-1) | !lp`:
/// an assignment falsifies exactly one of these iff it satisfies `C`.
pub fn negate_clause(wc: &WeightedClause) -> Result<Formula, FormulaError> {
    if wc.clause.is_empty() {
        return Err(FormulaError::NegateEmptyClause);
    }
    let lits = wc.clause.lits();
    let mut entries = Vec::with_capacity(lits.len());
    for (i, lit) in lits.iter().enumerate() {
        let mut piece: Vec<Lit> = lits[..i].to_vec();
        piece.push(lit.complement());
        entries.push(WeightedClause::new(
            Clause::from_lits(piece).expect("prefix with one flipped literal cannot clash"),
            wc.weight.clone(),
        ));
    }
    Ok(Formula::normalize(wc.clause.max_var(), entries))
}

/// Negation of a whole formula: the union of all clause negations.
pub fn negate_formula(f: &Formula) -> Result<Formula, FormulaError> {
    let mut out = Formula::empty(f.n_vars());
    for (clause, weight) in f.iter() {
        let part = negate_clause(&WeightedClause::new(clause.clone(), weight.clone()))?;
        out = out.union(&part);
    }
    Ok(out)
}
