//! Constructive proof emitters for the pigeonhole family, soft probing,
//! and greedy unit saturation. Every builder returns a checkable [`Proof`].

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::formula::{negate_formula, Clause, Formula, Lit, Var, WeightedClause};
use crate::generators::{gen_pigeonhole, pigeon_clause, pigeon_var, GeneratorError, PigeonVariant};
use crate::proof::{check_proof, Proof, ProofState};
use crate::rules::RuleApplication;
use crate::weight::Weight;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuilderError {
    #[error("chain needs at least 2 variables")]
    ChainTooShort,
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("probe set must contain only unit clauses")]
    ProbeNotUnary,
    #[error("probe set contains a complementary pair on {0}")]
    ProbeComplementaryPair(Var),
    #[error("probe weights must be finite and positive")]
    ProbeBadWeight,
    #[error("probe derivation {which} must use resolution only")]
    ProbeNotResolutionOnly { which: &'static str },
    #[error("probe derivation {which} starts from the wrong formula")]
    ProbeWrongInitial { which: &'static str },
    #[error("probe derivation {which} is invalid: {reason}")]
    ProbeInvalid { which: &'static str, reason: String },
    #[error("probe derivation d1 reaches {reached} on the empty clause, needs {needed}")]
    ProbeShortfall { reached: Weight, needed: Weight },
}

fn positive_clause(vars: &[Var]) -> Clause {
    Clause::from_lits(vars.iter().map(|&v| Lit::new(v, true))).expect("distinct variables")
}

fn unit(var: Var, positive: bool) -> Clause {
    Clause::from_lits([Lit::new(var, positive)]).expect("single literal")
}

/// Resolution chain deriving `(!y_k, 1)` from `(y_1|...|y_(k-1), 1)` and the
/// pairwise exclusions `(!y_i | !y_k, 1)`, in `k - 1` steps. The first step
/// also yields `(y_1|...|y_k, 1)` as a compensation.
fn exclusion_block_steps(ys: &[Var]) -> Vec<RuleApplication> {
    let k = ys.len();
    debug_assert!(k >= 2);
    let last = ys[k - 1];
    let mut steps = Vec::with_capacity(k - 1);
    let mut cur = positive_clause(&ys[..k - 1]);
    for &y in &ys[..k - 1] {
        let excl = Clause::from_lits([Lit::new(y, false), Lit::new(last, false)])
            .expect("distinct variables");
        steps.push(RuleApplication::Resolution {
            pivot: y,
            clause_a: cur.clone(),
            clause_b: excl,
            amount: Weight::one(),
        });
        cur = cur
            .without(Lit::new(y, true))
            .with(Lit::new(last, false))
            .expect("chain stays clash-free");
    }
    steps
}

/// Standalone proof of the exclusion chain over variables `1..=n`.
pub fn exclusion_chain(n: u32) -> Result<Proof, BuilderError> {
    if n < 2 {
        return Err(BuilderError::ChainTooShort);
    }
    let vars: Vec<Var> = (1..=n).map(Var).collect();
    let mut entries = vec![WeightedClause::new(
        positive_clause(&vars[..(n - 1) as usize]),
        Weight::one(),
    )];
    for &v in &vars[..(n - 1) as usize] {
        entries.push(WeightedClause::new(
            Clause::from_lits([Lit::new(v, false), Lit::new(vars[(n - 1) as usize], false)])
                .unwrap(),
            Weight::one(),
        ));
    }
    Ok(Proof::new(
        Formula::normalize(n, entries),
        exclusion_block_steps(&vars),
        WeightedClause::new(unit(Var(n), false), Weight::one()),
    ))
}

// Derivation of one empty clause for a single pigeon: resolve its row
// clause against the negative units, hole by hole.
fn pigeon_chain_steps(m: u32, pigeon: u32) -> Vec<RuleApplication> {
    let vars: Vec<Var> = (1..=m).map(|j| pigeon_var(m, pigeon, j)).collect();
    let mut steps = Vec::with_capacity(m as usize);
    let mut cur = positive_clause(&vars);
    for &v in &vars {
        steps.push(RuleApplication::Resolution {
            pivot: v,
            clause_a: cur.clone(),
            clause_b: unit(v, false),
            amount: Weight::one(),
        });
        cur = cur.without(Lit::new(v, true));
    }
    steps
}

// Chain blocks for one hole; `with_final_units` additionally resolves each
// derived negative unit against its positive unit, yielding one empty
// clause per block.
fn hole_chain_steps(m: u32, hole: u32, with_final_units: bool) -> Vec<RuleApplication> {
    let ys: Vec<Var> = (1..=m + 1).map(|i| pigeon_var(m, i, hole)).collect();
    let mut steps = Vec::new();
    for k in 2..=(m + 1) as usize {
        steps.extend(exclusion_block_steps(&ys[..k]));
        if with_final_units {
            let y = ys[k - 1];
            steps.push(RuleApplication::Resolution {
                pivot: y,
                clause_a: unit(y, true),
                clause_b: unit(y, false),
                amount: Weight::one(),
            });
        }
    }
    steps
}

// Full refutation core shared by the whole family: one empty clause per
// pigeon, then `m` empty clauses per hole.
fn unit_family_core_steps(m: u32) -> Vec<RuleApplication> {
    let mut steps = Vec::new();
    for pigeon in 1..=m + 1 {
        steps.extend(pigeon_chain_steps(m, pigeon));
    }
    for hole in 1..=m {
        steps.extend(hole_chain_steps(m, hole, true));
    }
    steps
}

fn unit_split_steps(m: u32) -> Vec<RuleApplication> {
    (1..=m * (m + 1))
        .map(|v| RuleApplication::Split {
            clause: Clause::empty(),
            on_var: Var(v),
            amount: Weight::one(),
        })
        .collect()
}

fn target(weight: i64) -> WeightedClause {
    WeightedClause::new(Clause::empty(), Weight::finite(weight))
}

/// Resolution-only refutation of the unit-augmented soft instance,
/// deriving `(empty, m^2+m+1)`. Step count is below `4 * m^3` for every
/// `m >= 1` (see the length test).
pub fn soft_units_refutation(m: u32) -> Result<Proof, BuilderError> {
    let inst = gen_pigeonhole(PigeonVariant::SoftWithUnits, m)?;
    Ok(Proof::new(
        inst.formula,
        unit_family_core_steps(m),
        target((m * m + m + 1) as i64),
    ))
}

/// Resolution+split refutation of the empty-clause-augmented soft instance:
/// split the empty clause's weight into all unit pairs, then run the unit
/// core. Derives `(empty, m^2+m+1)`.
pub fn soft_empty_refutation(m: u32) -> Result<Proof, BuilderError> {
    let inst = gen_pigeonhole(PigeonVariant::SoftWithEmpty, m)?;
    let mut steps = unit_split_steps(m);
    steps.extend(unit_family_core_steps(m));
    Ok(Proof::new(
        inst.formula,
        steps,
        target((m * m + m + 1) as i64),
    ))
}

/// Full-system refutation of the soft instance, deriving `(empty, 1)`:
/// introduce every unit pair virtually, run the unit core, then split
/// derived empty-clause weight back onto the units to pay the debts.
pub fn soft_refutation(m: u32) -> Result<Proof, BuilderError> {
    let inst = gen_pigeonhole(PigeonVariant::Soft, m)?;
    let mut steps = Vec::new();
    for v in 1..=m * (m + 1) {
        steps.push(RuleApplication::Virtual {
            clause: unit(Var(v), true),
            amount: Weight::one(),
        });
        steps.push(RuleApplication::Virtual {
            clause: unit(Var(v), false),
            amount: Weight::one(),
        });
    }
    steps.extend(unit_family_core_steps(m));
    steps.extend(unit_split_steps(m));
    Ok(Proof::new(inst.formula, steps, target(1)))
}

/// Refutation of the hard instance deriving `(empty, 1)`, which certifies
/// unsatisfiability: virtually grant `(empty, m^2+m)`, split it into unit
/// pairs, then run the unit core against the hard clauses. The derived
/// `m^2+m+1` empty clauses repay the grant with one unit to spare.
pub fn hard_lower_bound_refutation(m: u32) -> Result<Proof, BuilderError> {
    let inst = gen_pigeonhole(PigeonVariant::Hard, m)?;
    let mut steps = vec![RuleApplication::Virtual {
        clause: Clause::empty(),
        amount: Weight::finite((m * m + m) as i64),
    }];
    steps.extend(unit_split_steps(m));
    steps.extend(unit_family_core_steps(m));
    Ok(Proof::new(inst.formula, steps, target(1)))
}

/// Refutation builder keyed by instance variant.
pub fn refutation(variant: PigeonVariant, m: u32) -> Result<Proof, BuilderError> {
    match variant {
        PigeonVariant::Hard => hard_lower_bound_refutation(m),
        PigeonVariant::Soft => soft_refutation(m),
        PigeonVariant::SoftWithEmpty => soft_empty_refutation(m),
        PigeonVariant::SoftWithUnits => soft_units_refutation(m),
    }
}

fn formula_fingerprint(f: &Formula) -> u64 {
    let mut h = DefaultHasher::new();
    f.hash(&mut h);
    h.finish()
}

/// Greedy resolution of unit clauses against minimal-length complements
/// until no unit resolution applies, a state repeats, or a step cap is hit.
/// Tie-breaking: lowest variable first, positive literal first, then
/// shortest and lexicographically smallest partner clause.
pub fn unit_saturate(f: &Formula) -> (Proof, WeightedClause) {
    let mut state = ProofState::from_formula(f);
    let mut steps = Vec::new();
    let mut seen: HashSet<u64> = HashSet::new();
    seen.insert(formula_fingerprint(&state.merged_formula()));

    'outer: for _ in 0..10_000 {
        let pool: Vec<(Clause, Weight)> = state
            .positive_entries()
            .map(|(c, w)| (c.clone(), w.clone()))
            .collect();
        let units: Vec<&(Clause, Weight)> = pool.iter().filter(|(c, _)| c.len() == 1).collect();
        let mut chosen: Option<(Lit, Weight, Clause, Weight)> = None;
        for (uc, uw) in &units {
            let lit = uc.lits()[0];
            let comp = lit.complement();
            let partner = pool
                .iter()
                .filter(|(c, _)| *c != *uc && c.contains(comp))
                .min_by(|(a, _), (b, _)| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            if let Some((pc, pw)) = partner {
                chosen = Some((lit, uw.clone(), pc.clone(), pw.clone()));
                break;
            }
        }
        let Some((lit, uw, partner, pw)) = chosen else {
            break;
        };
        let amount = uw.min(pw);
        let (clause_a, clause_b) = if lit.is_positive() {
            (unit(lit.var(), true), partner)
        } else {
            (partner, unit(lit.var(), false))
        };
        let step = RuleApplication::Resolution {
            pivot: lit.var(),
            clause_a,
            clause_b,
            amount,
        };
        state
            .apply_step(&step)
            .expect("selected from available mass");
        steps.push(step);
        if !seen.insert(formula_fingerprint(&state.merged_formula())) {
            break 'outer;
        }
    }

    let final_formula = state.merged_formula();
    let derived_weight = final_formula
        .weight_of(&Clause::empty())
        .cloned()
        .unwrap_or_else(Weight::zero);
    let derived = WeightedClause::new(Clause::empty(), derived_weight.clone());
    let claimed_target = if derived_weight.is_positive() {
        Some(derived.clone())
    } else {
        None
    };
    (
        Proof {
            initial: f.clone(),
            steps,
            claimed_target,
        },
        derived,
    )
}

fn validate_probe_set(u: &Formula) -> Result<Weight, BuilderError> {
    let mut seen_vars: Vec<Var> = Vec::new();
    for (clause, weight) in u.iter() {
        if clause.len() != 1 {
            return Err(BuilderError::ProbeNotUnary);
        }
        if !weight.is_finite() || !weight.is_positive() {
            return Err(BuilderError::ProbeBadWeight);
        }
        let var = clause.lits()[0].var();
        if seen_vars.contains(&var) {
            return Err(BuilderError::ProbeComplementaryPair(var));
        }
        seen_vars.push(var);
    }
    Ok(u.roof())
}

fn replay_resolution_only(proof: &Proof, which: &'static str) -> Result<Formula, BuilderError> {
    if proof
        .steps
        .iter()
        .any(|s| !matches!(s, RuleApplication::Resolution { .. }))
    {
        return Err(BuilderError::ProbeNotResolutionOnly { which });
    }
    let verdict = check_proof(proof);
    match verdict.final_formula {
        Some(f) if verdict.valid => Ok(f),
        _ => Err(BuilderError::ProbeInvalid {
            which,
            reason: verdict
                .failure
                .map(|e| e.to_string())
                .unwrap_or_else(|| "invalid".into()),
        }),
    }
}

/// Assemble a full-system proof from two resolution derivations around a
/// unary probe set `u`:
///
/// 1. `d1` derives `(empty, k)` from `f + u`, with `k` the total probe
///    weight, leaving some formula `g`;
/// 2. `d2` derives `(empty, k')` from `g` plus the complemented probes.
///
/// The assembly grants `u` virtually, replays `d1`, splits `k` of empty-
/// clause weight back over the probe variables (repaying the grants and
/// materializing the complements), then replays `d2`. Both derivations are
/// validated by replay.
pub fn soft_probe(f: &Formula, u: &Formula, d1: &Proof, d2: &Proof) -> Result<Proof, BuilderError> {
    let k = validate_probe_set(u)?;
    if d1.initial != f.union(u) {
        return Err(BuilderError::ProbeWrongInitial { which: "d1" });
    }
    let final1 = replay_resolution_only(d1, "d1")?;
    let reached = final1
        .weight_of(&Clause::empty())
        .cloned()
        .unwrap_or_else(Weight::zero);
    if reached < k {
        return Err(BuilderError::ProbeShortfall { reached, needed: k });
    }
    let mut g = final1.clone();
    g.add(Clause::empty(), k.negated().expect("finite probe roof"));

    let u_complement = negate_formula(u).expect("unit clauses are nonempty");
    if d2.initial != g.union(&u_complement) {
        return Err(BuilderError::ProbeWrongInitial { which: "d2" });
    }
    let final2 = replay_resolution_only(d2, "d2")?;
    let k_prime = final2
        .weight_of(&Clause::empty())
        .cloned()
        .unwrap_or_else(Weight::zero);

    let mut steps = Vec::new();
    for (clause, weight) in u.iter() {
        steps.push(RuleApplication::Virtual {
            clause: clause.clone(),
            amount: weight.clone(),
        });
    }
    steps.extend(d1.steps.iter().cloned());
    for (clause, weight) in u.iter() {
        steps.push(RuleApplication::Split {
            clause: Clause::empty(),
            on_var: clause.lits()[0].var(),
            amount: weight.clone(),
        });
    }
    steps.extend(d2.steps.iter().cloned());
    Ok(Proof::new(
        f.clone(),
        steps,
        WeightedClause::new(Clause::empty(), k_prime),
    ))
}

/// The probe set and the two resolution derivations for a pigeonhole
/// instance, probing the first pigeon's row at unit weight: per hole, a
/// chain turns the probe unit into the other pigeons' negative units; per
/// remaining pigeon, a chain closes them into empty clauses. The second
/// derivation finishes pigeon 1 against the complemented probes.
pub fn pigeonhole_probe_parts(
    variant: PigeonVariant,
    m: u32,
) -> Result<(Formula, Proof, Proof), BuilderError> {
    let inst = gen_pigeonhole(variant, m)?;
    let u = Formula::normalize(
        inst.formula.n_vars(),
        (1..=m).map(|j| WeightedClause::new(unit(pigeon_var(m, 1, j), true), Weight::one())),
    );

    let mut d1_steps = Vec::new();
    for hole in 1..=m {
        d1_steps.extend(hole_chain_steps(m, hole, false));
    }
    for pigeon in 2..=m + 1 {
        d1_steps.extend(pigeon_chain_steps(m, pigeon));
    }
    let d1 = Proof::new(inst.formula.union(&u), d1_steps, target(m as i64));

    let final1 = replay_resolution_only(&d1, "d1")?;
    let mut g = final1;
    g.add(Clause::empty(), Weight::finite(-(m as i64)));
    let u_complement = negate_formula(&u).expect("units");

    let mut d2_steps = Vec::new();
    let vars: Vec<Var> = (1..=m).map(|j| pigeon_var(m, 1, j)).collect();
    let mut cur = pigeon_clause(m, 1);
    for &v in &vars {
        d2_steps.push(RuleApplication::Resolution {
            pivot: v,
            clause_a: cur.clone(),
            clause_b: unit(v, false),
            amount: Weight::one(),
        });
        cur = cur.without(Lit::new(v, true));
    }
    let d2 = Proof::new(g.union(&u_complement), d2_steps, target(1));

    Ok((u, d1, d2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{maxsat_bruteforce, OracleConfig};

    fn clause(ints: &[i64]) -> Clause {
        Clause::from_dimacs(ints).unwrap()
    }

    #[test]
    fn exclusion_chain_small_cases() {
        // n=2: one step, deriving (!x2,1) and (x1|x2,1)
        let proof = exclusion_chain(2).unwrap();
        assert_eq!(proof.steps.len(), 1);
        let verdict = check_proof(&proof);
        assert!(verdict.valid);
        let f = verdict.final_formula.unwrap();
        assert_eq!(f.weight_of(&clause(&[-2])), Some(&Weight::one()));
        assert_eq!(f.weight_of(&clause(&[1, 2])), Some(&Weight::one()));

        let proof = exclusion_chain(3).unwrap();
        assert_eq!(proof.steps.len(), 2);
        let verdict = check_proof(&proof);
        assert!(verdict.valid);
        let f = verdict.final_formula.unwrap();
        assert_eq!(f.weight_of(&clause(&[-3])), Some(&Weight::one()));
        assert_eq!(f.weight_of(&clause(&[1, 2, 3])), Some(&Weight::one()));

        assert_eq!(exclusion_chain(1).unwrap_err(), BuilderError::ChainTooShort);
    }

    #[test]
    fn exclusion_chain_preserves_cost() {
        let proof = exclusion_chain(4).unwrap();
        let verdict = check_proof(&proof);
        assert!(verdict.valid);
        let cfg = OracleConfig::default();
        assert!(
            crate::oracle::equivalent(&proof.initial, &verdict.final_formula.unwrap(), &cfg)
                .unwrap()
        );
    }

    #[test]
    fn unit_refutations_validate_and_match_oracle() {
        let cfg = OracleConfig::default();
        for m in 1..=3u32 {
            let proof = soft_units_refutation(m).unwrap();
            let verdict = check_proof(&proof);
            assert!(verdict.valid, "m={m}: {:?}", verdict.failure);
            let expected = Weight::finite((m * m + m + 1) as i64);
            assert_eq!(verdict.derived_weight, Some(expected.clone()));
            if m <= 2 {
                let r = maxsat_bruteforce(&proof.initial, &cfg).unwrap();
                assert_eq!(r.optimum, expected);
            }
        }
    }

    #[test]
    fn empty_clause_variant_refutes() {
        for m in 1..=3u32 {
            let proof = soft_empty_refutation(m).unwrap();
            let verdict = check_proof(&proof);
            assert!(verdict.valid, "m={m}: {:?}", verdict.failure);
        }
    }

    #[test]
    fn soft_variant_refutes_to_one() {
        for m in 1..=3u32 {
            let proof = soft_refutation(m).unwrap();
            let verdict = check_proof(&proof);
            assert!(verdict.valid, "m={m}: {:?}", verdict.failure);
            assert_eq!(verdict.derived_weight, Some(Weight::one()));
            assert!(!verdict.final_formula.unwrap().has_negative());
        }
    }

    #[test]
    fn hard_variant_certifies_lower_bound() {
        for m in 1..=3u32 {
            let proof = hard_lower_bound_refutation(m).unwrap();
            let verdict = check_proof(&proof);
            assert!(verdict.valid, "m={m}: {:?}", verdict.failure);
            assert_eq!(verdict.derived_weight, Some(Weight::one()));
        }
    }

    #[test]
    fn unit_saturation_examples() {
        // (x,1) against (!x,1): one step to the empty clause
        let f = Formula::normalize(
            1,
            vec![
                WeightedClause::new(clause(&[1]), Weight::one()),
                WeightedClause::new(clause(&[-1]), Weight::one()),
            ],
        );
        let (proof, derived) = unit_saturate(&f);
        assert_eq!(proof.steps.len(), 1);
        assert_eq!(derived.weight, Weight::one());
        assert!(check_proof(&proof).valid);

        // chain through an implication
        let f = Formula::normalize(
            2,
            vec![
                WeightedClause::new(clause(&[1]), Weight::one()),
                WeightedClause::new(clause(&[-1, 2]), Weight::one()),
                WeightedClause::new(clause(&[-2]), Weight::one()),
            ],
        );
        let (proof, derived) = unit_saturate(&f);
        assert_eq!(derived.weight, Weight::one());
        assert!(check_proof(&proof).valid);
        let cfg = OracleConfig::default();
        assert_eq!(maxsat_bruteforce(&f, &cfg).unwrap().optimum, Weight::one());

        // no units: immediate fixpoint
        let f = Formula::normalize(2, vec![WeightedClause::new(clause(&[1, 2]), Weight::one())]);
        let (proof, derived) = unit_saturate(&f);
        assert!(proof.steps.is_empty());
        assert_eq!(derived.weight, Weight::zero());
    }

    #[test]
    fn unit_saturation_terminates_on_cycles() {
        // (x,1) and (!x|y,1) regenerate each other through compensations
        let f = Formula::normalize(
            2,
            vec![
                WeightedClause::new(clause(&[1]), Weight::one()),
                WeightedClause::new(clause(&[-1, 2]), Weight::one()),
            ],
        );
        let (proof, derived) = unit_saturate(&f);
        assert!(proof.steps.len() < 100);
        assert_eq!(derived.weight, Weight::zero());
    }

    #[test]
    fn probe_set_validation() {
        let f = Formula::empty(1);
        let bad_u = Formula::normalize(
            1,
            vec![
                WeightedClause::new(clause(&[1]), Weight::one()),
                WeightedClause::new(clause(&[-1]), Weight::one()),
            ],
        );
        let d = Proof {
            initial: f.union(&bad_u),
            steps: vec![],
            claimed_target: None,
        };
        assert_eq!(
            soft_probe(&f, &bad_u, &d, &d).unwrap_err(),
            BuilderError::ProbeComplementaryPair(Var(1))
        );
    }

    #[test]
    fn pigeonhole_probes_yield_unit_refutations() {
        for variant in [PigeonVariant::Soft, PigeonVariant::Hard] {
            for m in 1..=2u32 {
                let inst = gen_pigeonhole(variant, m).unwrap();
                let (u, d1, d2) = pigeonhole_probe_parts(variant, m).unwrap();
                let proof = soft_probe(&inst.formula, &u, &d1, &d2).unwrap();
                let verdict = check_proof(&proof);
                assert!(verdict.valid, "{variant:?} m={m}: {:?}", verdict.failure);
                assert_eq!(
                    proof.claimed_target,
                    Some(WeightedClause::new(Clause::empty(), Weight::one()))
                );
            }
        }
    }
}
