//! Cross-module invariants: proptest for algebraic laws, exhaustive checks
//! for the small-universe equivalences, and replay determinism through the
//! trace format.

use proptest::prelude::*;

use maxres::builders::{exclusion_chain, soft_units_refutation};
use maxres::formula::{negate_clause, Assignment, Clause, Formula, Lit, WeightedClause};
use maxres::generators::{random_formula, RandomSpec};
use maxres::oracle::{equivalent, maxsat_bruteforce, softening_bound, OracleConfig};
use maxres::proof::{check_proof, expand_canonical};
use maxres::trace;
use maxres::weight::Weight;

fn cfg() -> OracleConfig {
    OracleConfig::default()
}

fn lit_strategy() -> impl Strategy<Value = Lit> {
    (1u32..=10, any::<bool>()).prop_map(|(v, pos)| Lit::new(maxres::Var(v), pos))
}

fn raw_entry() -> impl Strategy<Value = (Vec<Lit>, Weight)> {
    (
        prop::collection::vec(lit_strategy(), 0..5),
        prop_oneof![(-4i64..=4).prop_map(Weight::finite), Just(Weight::Infinite),],
    )
}

proptest! {
    #[test]
    fn normalize_is_idempotent_and_order_insensitive(
        entries in prop::collection::vec(raw_entry(), 0..12),
        seed in any::<u64>(),
    ) {
        let f = Formula::from_lit_entries(0, entries.clone());
        let renorm = Formula::normalize(f.n_vars(), f.to_entries());
        prop_assert_eq!(&renorm, &f);

        // shuffle deterministically by seed
        let mut shuffled = entries;
        let n = shuffled.len();
        let mut state = seed | 1;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let g = Formula::from_lit_entries(0, shuffled);
        prop_assert_eq!(&g, &f);
    }

    #[test]
    fn negation_expansion_costs_the_complement(
        lits in prop::collection::vec(lit_strategy(), 1..5),
        weight in 1i64..=5,
    ) {
        let Some(clause) = Clause::from_lits(lits) else {
            return Ok(()); // tautological draw
        };
        let wc = WeightedClause::new(clause.clone(), Weight::finite(weight));
        let expansion = negate_clause(&wc).unwrap();
        let n = clause.max_var();
        for idx in 0..(1u64 << n) {
            let x = Assignment::from_lex_index(n, idx);
            let falsified: Vec<&Clause> = expansion
                .clauses()
                .filter(|c| c.falsified_by(&x))
                .collect();
            if clause.falsified_by(&x) {
                prop_assert!(falsified.is_empty());
            } else {
                prop_assert_eq!(falsified.len(), 1);
                prop_assert_eq!(
                    expansion.cost(&x).unwrap(),
                    Weight::finite(weight)
                );
            }
        }
    }

    #[test]
    fn cost_is_monotone_under_clause_addition(
        entries in prop::collection::vec(raw_entry(), 0..8),
        extra in raw_entry(),
    ) {
        let f = Formula::from_lit_entries(0, entries);
        let (lits, _) = extra;
        let Some(clause) = Clause::from_lits(lits) else {
            return Ok(());
        };
        let mut g = f.clone();
        g.add(clause, Weight::finite(3));
        let n = f.n_vars().max(g.n_vars());
        for idx in 0..(1u64 << n) {
            let x = Assignment::from_lex_index(n, idx);
            prop_assert!(g.cost(&x).unwrap() >= f.cost(&x).unwrap());
        }
    }
}

#[test]
fn optimum_shifts_with_empty_clause_weight() {
    for seed in 0..50u64 {
        let f = random_formula(&RandomSpec {
            vars: 2 + (seed % 6) as u32,
            clauses: 3 + (seed % 5) as usize,
            max_weight: 4,
            hard_fraction: if seed % 2 == 0 { 0.3 } else { 0.0 },
            seed,
        });
        let base = maxsat_bruteforce(&f, &cfg()).unwrap().optimum;
        if base.is_infinite() {
            continue;
        }
        let k = 1 + (seed % 4) as i64;
        let mut g = f.clone();
        g.add(Clause::empty(), Weight::finite(k));
        let shifted = maxsat_bruteforce(&g, &cfg()).unwrap().optimum;
        assert_eq!(shifted, base.plus(&Weight::finite(k)), "seed {seed}");
    }
}

#[test]
fn optimum_is_invariant_under_renaming() {
    for seed in 0..50u64 {
        let f = random_formula(&RandomSpec {
            vars: 3 + (seed % 5) as u32,
            clauses: 4,
            max_weight: 5,
            hard_fraction: 0.2,
            seed,
        });
        let n = f.n_vars();
        // reverse the variable order
        let renamed = Formula::normalize(
            n,
            f.iter().map(|(c, w)| {
                let lits = c
                    .lits()
                    .iter()
                    .map(|l| Lit::new(maxres::Var(n + 1 - l.var().index()), l.is_positive()));
                WeightedClause::new(Clause::from_lits(lits).unwrap(), w.clone())
            }),
        );
        let a = maxsat_bruteforce(&f, &cfg()).unwrap();
        let b = maxsat_bruteforce(&renamed, &cfg()).unwrap();
        assert_eq!(a.optimum, b.optimum, "seed {seed}");
    }
}

#[test]
fn softening_bound_exceeds_every_finite_cost() {
    for seed in 0..50u64 {
        let f = random_formula(&RandomSpec {
            vars: 2 + (seed % 7) as u32,
            clauses: 3 + (seed % 6) as usize,
            max_weight: 6,
            hard_fraction: 0.25,
            seed: seed.wrapping_mul(31),
        });
        let gamma = softening_bound(&f, &cfg()).unwrap();
        assert!(gamma.is_positive());
        let n = f.n_vars();
        for idx in 0..(1u64 << n) {
            let cost = f.cost(&Assignment::from_lex_index(n, idx)).unwrap();
            if cost.is_finite() {
                assert!(cost < gamma, "seed {seed}");
            }
        }
    }
}

#[test]
fn canonical_expansion_is_equivalent_and_replayable() {
    for seed in 0..40u64 {
        let f = random_formula(&RandomSpec {
            vars: 2 + (seed % 4) as u32,
            clauses: 2 + (seed % 4) as usize,
            max_weight: 3,
            hard_fraction: 0.0,
            seed: seed.wrapping_mul(977),
        });
        let (expanded, proof) = expand_canonical(&f, 24).unwrap();
        assert!(equivalent(&f, &expanded, &cfg()).unwrap(), "seed {seed}");
        let verdict = check_proof(&proof);
        assert!(verdict.valid, "seed {seed}: {:?}", verdict.failure);
        assert_eq!(verdict.final_formula.unwrap(), expanded, "seed {seed}");
        // full support, no repeats
        for (clause, _) in expanded.iter() {
            assert_eq!(clause.len() as u32, f.n_vars(), "seed {seed}");
        }
    }
}

#[test]
fn soundness_bounds_the_optimum() {
    // a valid refutation's target weight never exceeds the true optimum
    for m in 1..=3u32 {
        let proof = soft_units_refutation(m).unwrap();
        let verdict = check_proof(&proof);
        assert!(verdict.valid);
        let optimum = maxsat_bruteforce(&proof.initial, &cfg()).unwrap().optimum;
        assert!(proof.claimed_target.unwrap().weight <= optimum);
    }
}

#[test]
fn prefix_replay_preserves_cost_at_every_step() {
    let proof = exclusion_chain(4).unwrap();
    let mut state = maxres::ProofState::from_formula(&proof.initial);
    for step in &proof.steps {
        state.apply_step(step).unwrap();
        assert!(equivalent(&proof.initial, &state.merged_formula(), &cfg()).unwrap());
    }

    let proof = soft_units_refutation(2).unwrap();
    let mut state = maxres::ProofState::from_formula(&proof.initial);
    for step in &proof.steps {
        state.apply_step(step).unwrap();
        assert!(equivalent(&proof.initial, &state.merged_formula(), &cfg()).unwrap());
    }
}

#[test]
fn clause_pair_introduction_is_cost_neutral() {
    // one virtual plus three splits; the extension costs nothing anywhere
    let base = Formula::normalize(
        3,
        vec![WeightedClause::new(
            Clause::from_dimacs(&[1, -3]).unwrap(),
            Weight::finite(2),
        )],
    );
    let mut state = maxres::ProofState::from_formula(&base);
    let steps = maxres::proof::introduce_clause_pair(
        &mut state,
        &Clause::from_dimacs(&[1, 2, 3]).unwrap(),
        &Weight::one(),
    )
    .unwrap();
    assert_eq!(steps.len(), 4);
    assert!(equivalent(&base, &state.merged_formula(), &cfg()).unwrap());
}

#[test]
fn unit_refutation_length_constant_holds_to_thirty() {
    for m in 1..=30u32 {
        let proof = soft_units_refutation(m).unwrap();
        assert!(
            proof.steps.len() <= 4 * (m as usize).pow(3),
            "m={m}: {} steps",
            proof.steps.len()
        );
    }
}

#[test]
fn accepted_circular_proofs_are_sound_entailments() {
    use maxres::circular::cyclic_unit_example;
    let (pre, flow) = cyclic_unit_example();
    assert!(maxres::circular::check_circular(&pre, &flow).valid);
    // the certified conclusion really is entailed by the hard originals
    let f = Formula::normalize(
        2,
        vec![
            WeightedClause::new(Clause::from_dimacs(&[1, 2]).unwrap(), Weight::Infinite),
            WeightedClause::new(Clause::from_dimacs(&[-1]).unwrap(), Weight::Infinite),
        ],
    );
    let goal = Formula::normalize(
        2,
        vec![WeightedClause::new(
            Clause::from_dimacs(&[2]).unwrap(),
            Weight::Infinite,
        )],
    );
    let out = maxres::oracle::entails_by_reduction(&f, &goal, &cfg()).unwrap();
    assert!(out.entailed);
}

#[test]
fn worked_cost_and_roof_values() {
    use maxres::generators::{gen_pigeonhole, PigeonVariant};
    let sphp2 = gen_pigeonhole(PigeonVariant::Soft, 2).unwrap();
    assert_eq!(sphp2.formula.roof(), Weight::finite(9));
    // pigeons 1 and 2 in holes 1 and 2, pigeon 3 in hole 1: vars
    // x11 x12 x21 x22 x31 x32 = 1 0 0 1 1 0, falsifying one hole pair
    let x = Assignment::new(vec![true, false, false, true, true, false]);
    assert_eq!(sphp2.formula.cost(&x).unwrap(), Weight::one());
}

#[test]
fn infinite_amount_proofs_translate_to_circular() {
    // hard resolution with infinite amounts round-trips; the infinite
    // flows are replaced by minimal finite ones
    let initial = Formula::normalize(
        2,
        vec![
            WeightedClause::new(Clause::from_dimacs(&[1, 2]).unwrap(), Weight::Infinite),
            WeightedClause::new(Clause::from_dimacs(&[-1]).unwrap(), Weight::Infinite),
            WeightedClause::new(Clause::from_dimacs(&[-2]).unwrap(), Weight::one()),
        ],
    );
    let steps = vec![
        maxres::RuleApplication::Resolution {
            pivot: maxres::Var(1),
            clause_a: Clause::from_dimacs(&[1, 2]).unwrap(),
            clause_b: Clause::from_dimacs(&[-1]).unwrap(),
            amount: Weight::Infinite,
        },
        maxres::RuleApplication::Resolution {
            pivot: maxres::Var(2),
            clause_a: Clause::from_dimacs(&[2]).unwrap(),
            clause_b: Clause::from_dimacs(&[-2]).unwrap(),
            amount: Weight::one(),
        },
    ];
    let proof = maxres::Proof::new(
        initial,
        steps,
        WeightedClause::new(Clause::empty(), Weight::one()),
    );
    assert!(check_proof(&proof).valid);
    let (pre, flow) = maxres::translate::ressv_to_circular(&proof).unwrap();
    assert!(maxres::circular::check_circular(&pre, &flow).valid);
    assert_eq!(
        pre.nodes[pre.conclusion].clause,
        Clause::from_dimacs(&[2]).unwrap()
    );
    // and forward again
    let again = maxres::translate::circular_to_ressv(&pre, &flow).unwrap();
    assert!(check_proof(&again).valid);
}

#[test]
fn virtual_rule_proofs_translate_to_circular() {
    let initial = Formula::normalize(
        2,
        vec![
            WeightedClause::new(Clause::from_dimacs(&[1, 2]).unwrap(), Weight::Infinite),
            WeightedClause::new(Clause::from_dimacs(&[-1]).unwrap(), Weight::Infinite),
            WeightedClause::new(Clause::from_dimacs(&[-2]).unwrap(), Weight::one()),
        ],
    );
    let steps = vec![
        maxres::RuleApplication::Virtual {
            clause: Clause::from_dimacs(&[1]).unwrap(),
            amount: Weight::one(),
        },
        maxres::RuleApplication::Resolution {
            pivot: maxres::Var(1),
            clause_a: Clause::from_dimacs(&[1]).unwrap(),
            clause_b: Clause::from_dimacs(&[-1]).unwrap(),
            amount: Weight::one(),
        },
        maxres::RuleApplication::Split {
            clause: Clause::empty(),
            on_var: maxres::Var(2),
            amount: Weight::one(),
        },
        maxres::RuleApplication::Resolution {
            pivot: maxres::Var(2),
            clause_a: Clause::from_dimacs(&[2]).unwrap(),
            clause_b: Clause::from_dimacs(&[-2]).unwrap(),
            amount: Weight::one(),
        },
        maxres::RuleApplication::Resolution {
            pivot: maxres::Var(2),
            clause_a: Clause::from_dimacs(&[1, 2]).unwrap(),
            clause_b: Clause::from_dimacs(&[-2]).unwrap(),
            amount: Weight::one(),
        },
    ];
    let proof = maxres::Proof::new(
        initial,
        steps,
        WeightedClause::new(Clause::empty(), Weight::one()),
    );
    assert!(check_proof(&proof).valid);
    let (pre, flow) = maxres::translate::ressv_to_circular(&proof).unwrap();
    assert!(maxres::circular::check_circular(&pre, &flow).valid);
    // the virtually introduced clause is merged into one budget node
    let x_nodes: Vec<_> = pre
        .nodes
        .iter()
        .filter(|n| n.clause == Clause::from_dimacs(&[1]).unwrap())
        .collect();
    assert_eq!(x_nodes.len(), 1);
    assert_eq!(x_nodes[0].tag, maxres::circular::NodeTag::Budget);
}

#[test]
fn full_amount_resolution_exhausts_an_antecedent() {
    // with amount = min of two finite availabilities, at least one
    // antecedent is gone afterwards
    let f = Formula::normalize(
        2,
        vec![
            WeightedClause::new(Clause::from_dimacs(&[1, 2]).unwrap(), Weight::finite(3)),
            WeightedClause::new(Clause::from_dimacs(&[-1]).unwrap(), Weight::finite(5)),
        ],
    );
    let mut state = maxres::ProofState::from_formula(&f);
    state
        .apply_step(&maxres::RuleApplication::Resolution {
            pivot: maxres::Var(1),
            clause_a: Clause::from_dimacs(&[1, 2]).unwrap(),
            clause_b: Clause::from_dimacs(&[-1]).unwrap(),
            amount: Weight::finite(3),
        })
        .unwrap();
    assert!(state
        .available(&Clause::from_dimacs(&[1, 2]).unwrap())
        .is_none());
    assert_eq!(
        state.available(&Clause::from_dimacs(&[-1]).unwrap()),
        Some(&Weight::finite(2))
    );
}

#[test]
fn hard_instances_have_unit_softening_bound() {
    use maxres::generators::{gen_pigeonhole, PigeonVariant};
    let php2 = gen_pigeonhole(PigeonVariant::Hard, 2).unwrap();
    assert_eq!(
        softening_bound(&php2.formula, &cfg()).unwrap(),
        Weight::one()
    );

    // entailment of the hard empty clause reduces to optimum >= 1
    let goal = Formula::normalize(
        0,
        vec![WeightedClause::new(Clause::empty(), Weight::Infinite)],
    );
    let out = maxres::oracle::entails_by_reduction(&php2.formula, &goal, &cfg()).unwrap();
    assert!(out.entailed);
    assert_eq!(out.bound, Weight::one());
}

#[test]
fn shipped_proof_graphs_are_well_formed() {
    use maxres::builders::{hard_lower_bound_refutation, soft_refutation};
    use maxres::graph::{build_graph, frontier_formula};
    for proof in [
        soft_units_refutation(2).unwrap(),
        soft_refutation(2).unwrap(),
        hard_lower_bound_refutation(2).unwrap(),
        exclusion_chain(4).unwrap(),
    ] {
        let verdict = check_proof(&proof);
        assert!(verdict.valid);
        let graph = build_graph(&proof).unwrap();
        graph.validate().unwrap();
        assert_eq!(graph.rule_node_count(), proof.steps.len());
        let n = verdict.final_formula.as_ref().unwrap().n_vars();
        assert_eq!(frontier_formula(&graph, n), verdict.final_formula.unwrap());
    }
}

#[test]
fn trace_roundtrip_replays_identically() {
    for m in 1..=3u32 {
        let proof = soft_units_refutation(m).unwrap();
        let first = check_proof(&proof);
        let text = trace::write(&proof, "instance.wcnf");
        let reparsed = trace::parse(&text)
            .unwrap()
            .into_proof(proof.initial.clone());
        assert_eq!(reparsed, proof);
        let second = check_proof(&reparsed);
        assert_eq!(first.valid, second.valid);
        assert_eq!(first.final_formula, second.final_formula);
        assert_eq!(first.derived_weight, second.derived_weight);
    }
}
