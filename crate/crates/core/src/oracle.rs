//! Brute-force ground truth for small formulas.
//!
//! Every operation enumerates all `2^n` assignments; the value of this
//! module is being trivially correct, not fast. Enumeration is lexicographic
//! over the variable index (variable 1 most significant) and the reported
//! witness is the first minimizer, so results are deterministic.

use num_bigint::BigInt;
use thiserror::Error;

use crate::formula::{negate_clause, Assignment, Formula, WeightedClause};
use crate::weight::Weight;

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Maximum universe size the oracle will enumerate.
    pub bound: u32,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { bound: 24 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle bound exceeded: {n_vars} variables > bound {bound}")]
    BoundExceeded { n_vars: u32, bound: u32 },
    #[error(transparent)]
    Formula(#[from] crate::formula::FormulaError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub optimum: Weight,
    pub witness: Assignment,
    pub assignments_checked: u64,
}

/// Entailment verdict computed through the MaxSAT lower-bound reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionOutcome {
    pub entailed: bool,
    /// `MaxSAT` of the combined formula (left side of the test).
    pub maxsat: Weight,
    /// Roof of the softened right-hand formula (the bound to reach).
    pub bound: Weight,
    /// The weight substituted for infinity on the right-hand side.
    pub gamma: Weight,
}

// Clause compiled to bit masks over the enumeration word. With assignment
// bits `b`, the clause is falsified iff no positive literal is set and no
// negative literal is clear: `pos & b == 0 && neg & !b == 0`.
struct MaskClause {
    pos: u64,
    neg: u64,
    weight: MaskWeight,
}

enum MaskWeight {
    Hard,
    Soft(i128),
    Big(BigInt),
}

struct Compiled {
    n: u32,
    clauses: Vec<MaskClause>,
    all_small: bool,
}

#[derive(Clone, PartialEq, Eq)]
enum Cost {
    Hard,
    Fin(i128),
    Exact(BigInt),
}

impl Cost {
    fn to_weight(&self) -> Weight {
        match self {
            Cost::Hard => Weight::Infinite,
            Cost::Fin(v) => Weight::Finite(BigInt::from(*v)),
            Cost::Exact(v) => Weight::Finite(v.clone()),
        }
    }

    fn lt(&self, other: &Cost) -> bool {
        match (self, other) {
            (Cost::Hard, _) => false,
            (_, Cost::Hard) => true,
            (Cost::Fin(a), Cost::Fin(b)) => a < b,
            (a, b) => a.big() < b.big(),
        }
    }

    fn big(&self) -> BigInt {
        match self {
            Cost::Hard => unreachable!("hard cost has no finite value"),
            Cost::Fin(v) => BigInt::from(*v),
            Cost::Exact(v) => v.clone(),
        }
    }
}

fn compile(f: &Formula, n: u32) -> Compiled {
    let mut clauses = Vec::with_capacity(f.len());
    let mut all_small = true;
    for (clause, weight) in f.iter() {
        let mut pos = 0u64;
        let mut neg = 0u64;
        for lit in clause.lits() {
            let bit = 1u64 << (n - lit.var().index());
            if lit.is_positive() {
                pos |= bit;
            } else {
                neg |= bit;
            }
        }
        let weight = match weight {
            Weight::Infinite => MaskWeight::Hard,
            Weight::Finite(v) => match i64::try_from(v.clone()) {
                Ok(small) => MaskWeight::Soft(small as i128),
                Err(_) => {
                    all_small = false;
                    MaskWeight::Big(v.clone())
                }
            },
        };
        clauses.push(MaskClause { pos, neg, weight });
    }
    Compiled {
        n,
        clauses,
        all_small,
    }
}

impl Compiled {
    fn eval(&self, bits: u64) -> Cost {
        let full = if self.n == 64 {
            !0u64
        } else {
            (1u64 << self.n) - 1
        };
        let unset = !bits & full;
        let mut small: i128 = 0;
        let mut big: Option<BigInt> = None;
        for c in &self.clauses {
            if c.pos & bits == 0 && c.neg & unset == 0 {
                match &c.weight {
                    MaskWeight::Hard => return Cost::Hard,
                    MaskWeight::Soft(w) => small += w,
                    MaskWeight::Big(w) => {
                        let acc = big.get_or_insert_with(|| BigInt::from(0));
                        *acc += w;
                    }
                }
            }
        }
        match big {
            None if self.all_small => Cost::Fin(small),
            None => Cost::Fin(small),
            Some(b) => Cost::Exact(b + BigInt::from(small)),
        }
    }
}

fn check_bound(n: u32, config: &OracleConfig) -> Result<(), OracleError> {
    if n > config.bound || n > 62 {
        return Err(OracleError::BoundExceeded {
            n_vars: n,
            bound: config.bound.min(62),
        });
    }
    Ok(())
}

/// Exact MaxSAT optimum by full enumeration.
pub fn maxsat_bruteforce(f: &Formula, config: &OracleConfig) -> Result<OracleResult, OracleError> {
    let n = f.n_vars();
    check_bound(n, config)?;
    let compiled = compile(f, n);
    let total: u64 = 1u64 << n;
    let mut best = compiled.eval(0);
    let mut best_at = 0u64;
    for bits in 1..total {
        let cost = compiled.eval(bits);
        if cost.lt(&best) {
            best = cost;
            best_at = bits;
        }
    }
    Ok(OracleResult {
        optimum: best.to_weight(),
        witness: Assignment::from_lex_index(n, best_at),
        assignments_checked: total,
    })
}

/// True iff `cost(f, x) >= cost(g, x)` for every total assignment over the
/// shared universe.
pub fn entails_pointwise(
    f: &Formula,
    g: &Formula,
    config: &OracleConfig,
) -> Result<bool, OracleError> {
    let n = f.n_vars().max(g.n_vars());
    check_bound(n, config)?;
    let cf = compile(f, n);
    let cg = compile(g, n);
    let total: u64 = if n == 0 { 1 } else { 1u64 << n };
    for bits in 0..total {
        if cf.eval(bits).lt(&cg.eval(bits)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Mutual pointwise entailment.
pub fn equivalent(f: &Formula, g: &Formula, config: &OracleConfig) -> Result<bool, OracleError> {
    Ok(entails_pointwise(f, g, config)? && entails_pointwise(g, f, config)?)
}

/// The smallest weight strictly above every finite cost of `f`; 1 when no
/// assignment has finite cost. Substituting it for infinity on the right
/// side of an entailment keeps the reduction below exact.
pub fn softening_bound(f: &Formula, config: &OracleConfig) -> Result<Weight, OracleError> {
    let n = f.n_vars();
    check_bound(n, config)?;
    let compiled = compile(f, n);
    let total: u64 = if n == 0 { 1 } else { 1u64 << n };
    let mut max_finite = BigInt::from(0);
    for bits in 0..total {
        match compiled.eval(bits) {
            Cost::Hard => {}
            other => {
                let v = other.big();
                if v > max_finite {
                    max_finite = v;
                }
            }
        }
    }
    Ok(Weight::Finite(max_finite + 1))
}

/// Entailment via the lower-bound reduction: soften `g`'s hard clauses to
/// the bound from [`softening_bound`], then test
/// `MaxSAT(f + negation(g_softened)) >= roof(g_softened)`.
///
/// An empty clause in `g` has no falsifiable negation, so it contributes
/// only to the roof.
pub fn entails_by_reduction(
    f: &Formula,
    g: &Formula,
    config: &OracleConfig,
) -> Result<ReductionOutcome, OracleError> {
    let gamma = softening_bound(f, config)?;
    let softened = g.soften(&gamma);
    let mut combined = f.clone();
    combined.set_n_vars(softened.n_vars());
    for (clause, weight) in softened.iter() {
        if clause.is_empty() {
            continue;
        }
        let part = negate_clause(&WeightedClause::new(clause.clone(), weight.clone()))?;
        combined = combined.union(&part);
    }
    let bound = softened.roof();
    let result = maxsat_bruteforce(&combined, config)?;
    Ok(ReductionOutcome {
        entailed: result.optimum >= bound,
        maxsat: result.optimum,
        bound,
        gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Clause;

    fn wc(ints: &[i64], w: Weight) -> WeightedClause {
        WeightedClause::new(Clause::from_dimacs(ints).unwrap(), w)
    }

    fn cfg() -> OracleConfig {
        OracleConfig::default()
    }

    #[test]
    fn unsatisfiable_pair_costs_one() {
        let f = Formula::normalize(1, vec![wc(&[1], Weight::one()), wc(&[-1], Weight::one())]);
        let r = maxsat_bruteforce(&f, &cfg()).unwrap();
        assert_eq!(r.optimum, Weight::one());
        assert_eq!(r.assignments_checked, 2);
    }

    #[test]
    fn hard_contradiction_is_infinite() {
        let f = Formula::normalize(
            1,
            vec![wc(&[1], Weight::Infinite), wc(&[-1], Weight::Infinite)],
        );
        let r = maxsat_bruteforce(&f, &cfg()).unwrap();
        assert_eq!(r.optimum, Weight::Infinite);
    }

    #[test]
    fn bound_is_enforced() {
        let f = Formula::empty(30);
        assert!(matches!(
            maxsat_bruteforce(&f, &cfg()),
            Err(OracleError::BoundExceeded { .. })
        ));
    }

    #[test]
    fn pointwise_entailment() {
        // {(x,1),(y,1)} entails {(x|y,1)} but not conversely
        let f = Formula::normalize(2, vec![wc(&[1], Weight::one()), wc(&[2], Weight::one())]);
        let g = Formula::normalize(2, vec![wc(&[1, 2], Weight::one())]);
        assert!(entails_pointwise(&f, &g, &cfg()).unwrap());
        assert!(!entails_pointwise(&g, &f, &cfg()).unwrap());
        assert!(!equivalent(&f, &g, &cfg()).unwrap());
        assert!(entails_pointwise(&f, &f, &cfg()).unwrap());

        // {} does not entail {(empty,1)}
        let empty = Formula::empty(0);
        let box1 = Formula::normalize(0, vec![WeightedClause::new(Clause::empty(), Weight::one())]);
        assert!(!entails_pointwise(&empty, &box1, &cfg()).unwrap());
    }

    #[test]
    fn softening_bound_examples() {
        // {(z,2),(x,5),(y,inf)} with x=1,y=2,z=3: worst finite cost 7
        let f = Formula::normalize(
            3,
            vec![
                wc(&[3], Weight::finite(2)),
                wc(&[1], Weight::finite(5)),
                wc(&[2], Weight::Infinite),
            ],
        );
        assert_eq!(softening_bound(&f, &cfg()).unwrap(), Weight::finite(8));
        assert_eq!(
            softening_bound(&Formula::empty(0), &cfg()).unwrap(),
            Weight::one()
        );
    }

    #[test]
    fn reduction_on_worked_entailment() {
        // F = {(z,2),(x,5),(y,inf)}, G = {(x|z,u),(y|z,inf)}
        let f = Formula::normalize(
            3,
            vec![
                wc(&[3], Weight::finite(2)),
                wc(&[1], Weight::finite(5)),
                wc(&[2], Weight::Infinite),
            ],
        );
        let g_u5 = Formula::normalize(
            3,
            vec![
                wc(&[1, 3], Weight::finite(5)),
                wc(&[2, 3], Weight::Infinite),
            ],
        );
        let out = entails_by_reduction(&f, &g_u5, &cfg()).unwrap();
        assert_eq!(out.gamma, Weight::finite(8));
        assert_eq!(out.maxsat, Weight::finite(13));
        assert_eq!(out.bound, Weight::finite(13));
        assert!(out.entailed);

        let g_u8 = Formula::normalize(
            3,
            vec![
                wc(&[1, 3], Weight::finite(8)),
                wc(&[2, 3], Weight::Infinite),
            ],
        );
        let out = entails_by_reduction(&f, &g_u8, &cfg()).unwrap();
        assert_eq!(out.maxsat, Weight::finite(15));
        assert_eq!(out.bound, Weight::finite(16));
        assert!(!out.entailed);
    }

    #[test]
    fn reduction_handles_empty_hard_goal() {
        // a hard contradiction entails the hard empty clause
        let f = Formula::normalize(
            1,
            vec![wc(&[1], Weight::Infinite), wc(&[-1], Weight::Infinite)],
        );
        let g = Formula::normalize(
            0,
            vec![WeightedClause::new(Clause::empty(), Weight::Infinite)],
        );
        let out = entails_by_reduction(&f, &g, &cfg()).unwrap();
        assert_eq!(out.gamma, Weight::one());
        assert!(out.entailed);

        // a satisfiable formula does not
        let sat = Formula::normalize(1, vec![wc(&[1], Weight::one())]);
        let out = entails_by_reduction(&sat, &g, &cfg()).unwrap();
        assert!(!out.entailed);
    }

    #[test]
    fn big_weights_stay_exact() {
        let huge: BigInt = BigInt::from(i64::MAX) * 4;
        let f = Formula::normalize(
            1,
            vec![
                wc(&[1], Weight::Finite(huge.clone())),
                wc(&[-1], Weight::Finite(huge.clone() + 1)),
            ],
        );
        let r = maxsat_bruteforce(&f, &cfg()).unwrap();
        assert_eq!(r.optimum, Weight::Finite(huge));
    }

    #[test]
    fn witness_is_first_minimizer() {
        let f = Formula::normalize(2, vec![wc(&[1], Weight::one())]);
        let r = maxsat_bruteforce(&f, &cfg()).unwrap();
        // x1=1 satisfies the clause; first such assignment is (1,0)
        assert_eq!(r.witness, Assignment::new(vec![true, false]));
    }
}
