//! Constructive translations between circular proofs and the full MaxSAT
//! proof system, both directions.
//!
//! Hard-formula circular proofs and weight-1 refutations simulate each
//! other: a certified flow becomes virtual grants plus a step-by-step
//! replay, and a valid refutation becomes a (possibly cyclic) graph whose
//! flow is read off the step amounts, with infinite amounts replaced
//! bottom-up by minimal finite flows.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::circular::{
    check_circular, CircInference, CircNode, CircRule, CircularFailure, CircularPreProof,
    FlowAssignment, NodeId, NodeTag,
};
use crate::formula::{negate_clause, Clause, Formula, Lit, WeightedClause};
use crate::proof::{check_proof, Proof, ProofState};
use crate::rules::RuleApplication;
use crate::weight::Weight;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TranslateError {
    #[error("circular proof invalid: {0}")]
    InvalidCircular(CircularFailure),
    #[error("input proof invalid: {0}")]
    InvalidProof(String),
    #[error("proof target must be the empty clause at weight 1")]
    WrongTarget,
    #[error("initial formula must be hard clauses plus a unit-weight negated conclusion")]
    WrongInitialShape,
    #[error("resolution with a tautological resolvent cannot be rewritten to splits")]
    TautologicalResolvent,
    #[error("could not finitize flows")]
    FlowFinitization,
    #[error("translation produced an invalid circular proof: {0}")]
    OutputInvalid(CircularFailure),
    #[error("translation produced an invalid refutation: {0}")]
    OutputProofInvalid(String),
}

fn scale_to_integers(flow: &FlowAssignment, count: usize) -> Result<Vec<BigInt>, TranslateError> {
    let mut denom_lcm = BigInt::one();
    for i in 0..count {
        let f = flow.flows.get(&i).ok_or(TranslateError::InvalidCircular(
            CircularFailure::MissingFlow(i),
        ))?;
        denom_lcm = denom_lcm.lcm(f.denom());
    }
    let factor = BigRational::from_integer(denom_lcm);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let scaled = &flow.flows[&i] * &factor;
        debug_assert!(scaled.is_integer());
        out.push(scaled.to_integer());
    }
    Ok(out)
}

// Pivot and oriented antecedents of a well-formed symmetric resolution.
fn symres_parts(
    pre: &CircularPreProof,
    inf: &CircInference,
) -> (crate::formula::Var, Clause, Clause) {
    let cons = &pre.nodes[inf.consequents[0]].clause;
    let first = &pre.nodes[inf.antecedents[0]].clause;
    let second = &pre.nodes[inf.antecedents[1]].clause;
    let extra = first
        .lits()
        .iter()
        .copied()
        .find(|&l| !cons.contains(l))
        .expect("validated shape");
    if extra.is_positive() {
        (extra.var(), first.clone(), second.clone())
    } else {
        (extra.var(), second.clone(), first.clone())
    }
}

fn split_parts(pre: &CircularPreProof, inf: &CircInference) -> (Clause, crate::formula::Var) {
    let ant = &pre.nodes[inf.antecedents[0]].clause;
    let c0 = &pre.nodes[inf.consequents[0]].clause;
    let extra = c0
        .lits()
        .iter()
        .copied()
        .find(|&l| !ant.contains(l))
        .expect("validated shape");
    (ant.clone(), extra.var())
}

/// Translate a certified circular proof of `A` from a hard formula into a
/// refutation of the hard clauses plus the negated conclusion at weight 1.
///
/// Flows are first scaled to integers. Phase 1 grants every non-original
/// clause its total inflow virtually; phase 2 replays each inference with
/// its flow as the amount (grants cover all consumption in any order);
/// phase 3 resolves the negated conclusion against the conclusion's
/// surplus, one literal at a time, ending in `(empty, 1)`.
pub fn circular_to_ressv(
    pre: &CircularPreProof,
    flow: &FlowAssignment,
) -> Result<Proof, TranslateError> {
    let verdict = check_circular(pre, flow);
    if !verdict.valid {
        return Err(TranslateError::InvalidCircular(verdict.failure.unwrap()));
    }
    let flows = scale_to_integers(flow, pre.inferences.len())?;

    let originals: BTreeSet<Clause> = pre
        .nodes
        .iter()
        .filter(|n| n.tag == NodeTag::Original)
        .map(|n| n.clause.clone())
        .collect();
    let conclusion = pre.nodes[pre.conclusion].clause.clone();

    let mut entries: Vec<WeightedClause> = originals
        .iter()
        .map(|c| WeightedClause::new(c.clone(), Weight::Infinite))
        .collect();
    if !conclusion.is_empty() {
        let negated = negate_clause(&WeightedClause::new(conclusion.clone(), Weight::one()))
            .expect("nonempty clause");
        entries.extend(negated.to_entries());
    }
    let n_vars = pre
        .nodes
        .iter()
        .map(|n| n.clause.max_var())
        .max()
        .unwrap_or(0);
    let initial = Formula::normalize(n_vars, entries);

    let mut steps = Vec::new();
    // phase 1: virtual grants sized by inflow
    let mut inflow: Vec<BigInt> = vec![BigInt::zero(); pre.nodes.len()];
    for (i, inf) in pre.inferences.iter().enumerate() {
        for &c in &inf.consequents {
            inflow[c] += &flows[i];
        }
    }
    for (id, node) in pre.nodes.iter().enumerate() {
        if node.tag == NodeTag::Original || !inflow[id].is_positive() {
            continue;
        }
        steps.push(RuleApplication::Virtual {
            clause: node.clause.clone(),
            amount: Weight::Finite(inflow[id].clone()),
        });
    }
    // phase 2: replay every inference at its scaled flow
    for (i, inf) in pre.inferences.iter().enumerate() {
        let amount = Weight::Finite(flows[i].clone());
        match inf.rule {
            CircRule::SymRes => {
                let (pivot, clause_a, clause_b) = symres_parts(pre, inf);
                steps.push(RuleApplication::Resolution {
                    pivot,
                    clause_a,
                    clause_b,
                    amount,
                });
            }
            CircRule::Split => {
                let (clause, on_var) = split_parts(pre, inf);
                steps.push(RuleApplication::Split {
                    clause,
                    on_var,
                    amount,
                });
            }
        }
    }
    // phase 3: close the negated conclusion against the conclusion surplus
    let lits = conclusion.lits();
    for i in (1..=lits.len()).rev() {
        let prefix = Clause::from_lits(lits[..i].iter().copied()).expect("sub-clause");
        let piece = Clause::from_lits(
            lits[..i - 1]
                .iter()
                .copied()
                .chain(std::iter::once(lits[i - 1].complement())),
        )
        .expect("expansion piece");
        let pivot = lits[i - 1].var();
        let (clause_a, clause_b) = if lits[i - 1].is_positive() {
            (prefix, piece)
        } else {
            (piece, prefix)
        };
        steps.push(RuleApplication::Resolution {
            pivot,
            clause_a,
            clause_b,
            amount: Weight::one(),
        });
    }

    let proof = Proof::new(
        initial,
        steps,
        WeightedClause::new(Clause::empty(), Weight::one()),
    );
    let check = check_proof(&proof);
    if !check.valid {
        return Err(TranslateError::OutputProofInvalid(
            check.failure.map(|f| f.to_string()).unwrap_or_default(),
        ));
    }
    Ok(proof)
}

// Rewrite a resolution whose side literals differ into splits that align
// both scopes plus one symmetric resolution. The stay-behind split branches
// coincide with the compensation expansion on soft antecedents.
fn desugar_step(step: &RuleApplication) -> Result<Vec<RuleApplication>, TranslateError> {
    let RuleApplication::Resolution {
        pivot,
        clause_a,
        clause_b,
        amount,
    } = step
    else {
        return Ok(vec![step.clone()]);
    };
    let pos = Lit::new(*pivot, true);
    let rest_a = clause_a.without(pos);
    let rest_b = clause_b.without(pos.complement());
    if rest_a == rest_b {
        return Ok(vec![step.clone()]);
    }
    if rest_a.union(&rest_b).is_none() {
        return Err(TranslateError::TautologicalResolvent);
    }
    let mut out = Vec::new();
    let mut widen = |base: &Clause, missing: Vec<Lit>| -> Clause {
        let mut cur = base.clone();
        for lit in missing {
            out.push(RuleApplication::Split {
                clause: cur.clone(),
                on_var: lit.var(),
                amount: amount.clone(),
            });
            cur = cur.with(lit).expect("non-tautological resolvent");
        }
        cur
    };
    let need_a: Vec<Lit> = rest_b
        .lits()
        .iter()
        .copied()
        .filter(|l| !rest_a.contains(*l))
        .collect();
    let need_b: Vec<Lit> = rest_a
        .lits()
        .iter()
        .copied()
        .filter(|l| !rest_b.contains(*l))
        .collect();
    let wide_a = widen(clause_a, need_a);
    let wide_b = widen(clause_b, need_b);
    out.push(RuleApplication::Resolution {
        pivot: *pivot,
        clause_a: wide_a,
        clause_b: wide_b,
        amount: amount.clone(),
    });
    Ok(out)
}

// Initial-formula decomposition: hard clauses and the conclusion whose
// weight-1 negation makes up the soft part.
fn decompose_initial(initial: &Formula) -> Result<(Vec<Clause>, Clause), TranslateError> {
    let mut hards = Vec::new();
    let mut softs = Vec::new();
    for (clause, weight) in initial.iter() {
        if weight.is_infinite() {
            hards.push(clause.clone());
        } else if *weight == Weight::one() {
            softs.push(clause.clone());
        } else {
            return Err(TranslateError::WrongInitialShape);
        }
    }
    if softs.is_empty() {
        return Ok((hards, Clause::empty()));
    }
    softs.sort_by_key(|c| c.len());
    let mut conclusion_lits: Vec<Lit> = Vec::new();
    for (i, piece) in softs.iter().enumerate() {
        if piece.len() != i + 1 {
            return Err(TranslateError::WrongInitialShape);
        }
        let expected_prefix = &conclusion_lits[..i];
        let mut found_last = None;
        for &l in piece.lits() {
            if expected_prefix.contains(&l) {
                continue;
            }
            if found_last.is_some() {
                return Err(TranslateError::WrongInitialShape);
            }
            found_last = Some(l);
        }
        let last = found_last.ok_or(TranslateError::WrongInitialShape)?;
        conclusion_lits.push(last.complement());
    }
    let conclusion = Clause::from_lits(conclusion_lits.iter().copied())
        .ok_or(TranslateError::WrongInitialShape)?;
    // verify the reconstruction round-trips
    let rebuilt = negate_clause(&WeightedClause::new(conclusion.clone(), Weight::one()))
        .map_err(|_| TranslateError::WrongInitialShape)?;
    let declared = Formula::normalize(
        0,
        softs
            .iter()
            .map(|c| WeightedClause::new(c.clone(), Weight::one())),
    );
    if rebuilt != declared {
        return Err(TranslateError::WrongInitialShape);
    }
    Ok((hards, conclusion))
}

// Weight-or-infinity mass used while routing graph traffic.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Mass {
    Fin(BigInt),
    Inf,
}

impl Mass {
    fn from_weight(w: &Weight) -> Mass {
        match w {
            Weight::Infinite => Mass::Inf,
            Weight::Finite(v) => Mass::Fin(v.clone()),
        }
    }

    fn add(&mut self, w: &Weight) {
        match (&mut *self, w) {
            (Mass::Inf, _) => {}
            (_, Weight::Infinite) => *self = Mass::Inf,
            (Mass::Fin(v), Weight::Finite(d)) => *v += d,
        }
    }

    fn sub(&mut self, w: &Weight) {
        match (&mut *self, w) {
            (Mass::Inf, _) => {}
            (Mass::Fin(_), Weight::Infinite) => unreachable!("validated by replay"),
            (Mass::Fin(v), Weight::Finite(d)) => *v -= d,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Mass::Fin(v) if v.is_zero())
    }
}

struct GraphBuilder {
    nodes: Vec<CircNode>,
    inferences: Vec<CircInference>,
    /// Raw flows; `None` marks an infinite amount to be finitized.
    raw_flows: Vec<Option<BigInt>>,
    /// Permanent routing target per clause (original, negated-conclusion
    /// and budget clauses).
    hubs: BTreeMap<Clause, NodeId>,
    /// Open derived node per clause, while it has mass.
    front: BTreeMap<Clause, (NodeId, Mass)>,
}

impl GraphBuilder {
    fn new_node(&mut self, clause: Clause, tag: NodeTag) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(CircNode { clause, tag });
        id
    }

    fn ensure_budget_hub(&mut self, clause: &Clause) {
        if self.hubs.contains_key(clause) {
            return;
        }
        if let Some((id, _)) = self.front.remove(clause) {
            // promote the open derived node: all occurrences of a budget
            // clause live in one node
            self.nodes[id].tag = NodeTag::Budget;
            self.hubs.insert(clause.clone(), id);
            return;
        }
        let id = self.new_node(clause.clone(), NodeTag::Budget);
        self.hubs.insert(clause.clone(), id);
    }

    fn source(&self, clause: &Clause) -> NodeId {
        if let Some(&id) = self.hubs.get(clause) {
            return id;
        }
        self.front[clause].0
    }

    fn consume(&mut self, clause: &Clause, amount: &Weight) -> NodeId {
        if let Some(&id) = self.hubs.get(clause) {
            return id;
        }
        let entry = self.front.get_mut(clause).expect("validated by replay");
        entry.1.sub(amount);
        let id = entry.0;
        if entry.1.is_zero() {
            self.front.remove(clause);
        }
        id
    }

    fn produce(&mut self, clause: &Clause, amount: &Weight) -> NodeId {
        if let Some(&id) = self.hubs.get(clause) {
            return id;
        }
        if let Some((id, mass)) = self.front.get_mut(clause) {
            mass.add(amount);
            return *id;
        }
        let id = self.new_node(clause.clone(), NodeTag::Derived);
        self.front
            .insert(clause.clone(), (id, Mass::from_weight(amount)));
        id
    }

    fn push_inference(
        &mut self,
        rule: CircRule,
        ants: Vec<NodeId>,
        cons: Vec<NodeId>,
        amount: &Weight,
    ) {
        self.inferences.push(CircInference {
            rule,
            antecedents: ants,
            consequents: cons,
        });
        self.raw_flows.push(match amount {
            Weight::Infinite => None,
            Weight::Finite(v) => Some(v.clone()),
        });
    }
}

/// Translate a refutation of `hard F + negation(A, 1)` with target
/// `(empty, 1)` into a circular proof of `A` from `F`.
///
/// Resolutions are first rewritten into scope-aligning splits plus one
/// symmetric resolution. The graph routes every clause's traffic through a
/// single open node at a time; virtually introduced clauses become budget
/// nodes absorbing all their occurrences. Finally the empty clause's spare
/// unit is split into `A` and its negation pieces, and infinite step
/// amounts are replaced bottom-up by minimal flows that keep every
/// non-original balance nonnegative and the conclusion strictly positive.
pub fn ressv_to_circular(
    proof: &Proof,
) -> Result<(CircularPreProof, FlowAssignment), TranslateError> {
    match &proof.claimed_target {
        Some(t) if t.clause.is_empty() && t.weight == Weight::one() => {}
        _ => return Err(TranslateError::WrongTarget),
    }
    let verdict = check_proof(proof);
    if !verdict.valid {
        return Err(TranslateError::InvalidProof(
            verdict.failure.map(|f| f.to_string()).unwrap_or_default(),
        ));
    }
    let (hards, conclusion) = decompose_initial(&proof.initial)?;

    let mut desugared = Vec::new();
    for step in &proof.steps {
        desugared.extend(desugar_step(step)?);
    }
    let rewritten = Proof {
        initial: proof.initial.clone(),
        steps: desugared,
        claimed_target: proof.claimed_target.clone(),
    };
    let check = check_proof(&rewritten);
    if !check.valid {
        return Err(TranslateError::OutputProofInvalid(
            check.failure.map(|f| f.to_string()).unwrap_or_default(),
        ));
    }

    let mut b = GraphBuilder {
        nodes: Vec::new(),
        inferences: Vec::new(),
        raw_flows: Vec::new(),
        hubs: BTreeMap::new(),
        front: BTreeMap::new(),
    };
    for clause in &hards {
        let id = b.new_node(clause.clone(), NodeTag::Original);
        b.hubs.insert(clause.clone(), id);
    }
    if !conclusion.is_empty() {
        let negated = negate_clause(&WeightedClause::new(conclusion.clone(), Weight::one()))
            .expect("nonempty");
        for (piece, _) in negated.iter() {
            if !b.hubs.contains_key(piece) {
                let id = b.new_node(piece.clone(), NodeTag::Budget);
                b.hubs.insert(piece.clone(), id);
            }
        }
    }

    let mut state = ProofState::from_formula(&rewritten.initial);
    for step in &rewritten.steps {
        let outcome = state
            .compute_step(step)
            .expect("checked before graph construction");
        match step {
            RuleApplication::Virtual { clause, .. } => {
                b.ensure_budget_hub(clause);
            }
            RuleApplication::Split { clause, amount, .. } => {
                let src = b.consume(clause, amount);
                let mut cons = Vec::new();
                for wc in &outcome.produced {
                    cons.push(b.produce(&wc.clause, &wc.weight));
                }
                b.push_inference(CircRule::Split, vec![src], cons, amount);
            }
            RuleApplication::Resolution {
                clause_a,
                clause_b,
                amount,
                ..
            } => {
                let src_a = b.consume(clause_a, amount);
                let src_b = b.consume(clause_b, amount);
                // symmetric shape: single resolvent, compensations vanish;
                // hard re-emissions are not arcs
                let resolvent = &outcome
                    .produced
                    .first()
                    .expect("symmetric resolution has a resolvent")
                    .clause;
                let dest = b.produce(resolvent, amount);
                b.push_inference(CircRule::SymRes, vec![src_a, src_b], vec![dest], amount);
            }
        }
        state.commit(&outcome);
    }

    // close off: split the empty clause's spare unit into the conclusion
    // and its negation pieces, merging the pieces back into their nodes
    let conclusion_node = if conclusion.is_empty() {
        b.source(&Clause::empty())
    } else {
        let one = Weight::one();
        let mut cur_clause = Clause::empty();
        let mut cur_node = b.consume(&Clause::empty(), &one);
        let mut last = 0;
        for (i, &lit) in conclusion.lits().iter().enumerate() {
            let sibling = cur_clause.with(lit.complement()).expect("expansion piece");
            let branch = cur_clause.with(lit).expect("prefix");
            let sibling_node = b.produce(&sibling, &one);
            let is_last = i + 1 == conclusion.lits().len();
            let branch_node = match b.hubs.get(&branch) {
                // never conclude on an original node: it may carry an
                // arbitrarily negative balance
                Some(&h) if is_last && b.nodes[h].tag == NodeTag::Original => {
                    b.new_node(branch.clone(), NodeTag::Derived)
                }
                Some(&h) => h,
                None => b.produce(&branch, &one),
            };
            b.push_inference(
                CircRule::Split,
                vec![cur_node],
                vec![branch_node, sibling_node],
                &one,
            );
            if !is_last {
                cur_node = b.consume(&branch, &one);
            }
            cur_clause = branch;
            last = branch_node;
        }
        last
    };

    let pre = CircularPreProof {
        nodes: b.nodes,
        inferences: b.inferences,
        conclusion: conclusion_node,
    };
    let flows = finitize_flows(&pre, b.raw_flows)?;
    let flow = FlowAssignment {
        flows: flows
            .into_iter()
            .enumerate()
            .map(|(i, f)| (i, BigRational::from_integer(f)))
            .collect(),
    };
    let out_verdict = check_circular(&pre, &flow);
    if !out_verdict.valid {
        return Err(TranslateError::OutputInvalid(out_verdict.failure.unwrap()));
    }
    Ok((pre, flow))
}

// Replace infinite amounts by the smallest positive flows keeping every
// non-original balance nonnegative (and the conclusion above zero),
// scanning in reverse creation order until stable.
fn finitize_flows(
    pre: &CircularPreProof,
    raw: Vec<Option<BigInt>>,
) -> Result<Vec<BigInt>, TranslateError> {
    let mut flows = raw;
    let mut in_infs: Vec<Vec<usize>> = vec![Vec::new(); pre.nodes.len()];
    let mut out_infs: Vec<Vec<usize>> = vec![Vec::new(); pre.nodes.len()];
    for (i, inf) in pre.inferences.iter().enumerate() {
        for &a in &inf.antecedents {
            out_infs[a].push(i);
        }
        for &c in &inf.consequents {
            in_infs[c].push(i);
        }
    }
    for _pass in 0..=pre.inferences.len() {
        let mut progressed = false;
        let mut pending = false;
        for u in (0..pre.inferences.len()).rev() {
            if flows[u].is_some() {
                continue;
            }
            // every neighbor flow of every out-node must already be finite
            let mut ready = true;
            let mut needed = BigInt::one();
            for &n in &pre.inferences[u].consequents {
                let mut outflow = BigInt::zero();
                let mut other_in = BigInt::zero();
                for &w in &out_infs[n] {
                    match &flows[w] {
                        Some(f) => outflow += f,
                        None => ready = false,
                    }
                }
                for &w in &in_infs[n] {
                    if w == u {
                        continue;
                    }
                    match &flows[w] {
                        Some(f) => other_in += f,
                        None => ready = false,
                    }
                }
                if !ready {
                    break;
                }
                let mut requirement = outflow - other_in;
                if n == pre.conclusion {
                    requirement += 1;
                }
                if requirement > needed {
                    needed = requirement;
                }
            }
            if ready {
                flows[u] = Some(needed);
                progressed = true;
            } else {
                pending = true;
            }
        }
        if !pending {
            break;
        }
        if !progressed {
            return Err(TranslateError::FlowFinitization);
        }
    }
    flows
        .into_iter()
        .map(|f| f.ok_or(TranslateError::FlowFinitization))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circular::cyclic_unit_example;
    use crate::formula::Var;
    use crate::oracle::{entails_by_reduction, OracleConfig};

    fn clause(ints: &[i64]) -> Clause {
        Clause::from_dimacs(ints).unwrap()
    }

    #[test]
    fn worked_cycle_translates_to_refutation() {
        let (pre, flow) = cyclic_unit_example();
        let proof = circular_to_ressv(&pre, &flow).unwrap();
        let verdict = check_proof(&proof);
        assert!(verdict.valid, "{:?}", verdict.failure);
        assert_eq!(verdict.derived_weight, Some(Weight::one()));
        // initial is {(x|y,inf),(!x,inf),(!y,1)}
        assert_eq!(proof.initial.len(), 3);
        assert_eq!(
            proof.initial.weight_of(&clause(&[-2])),
            Some(&Weight::one())
        );
    }

    #[test]
    fn fractional_flows_are_scaled() {
        let (pre, flow) = cyclic_unit_example();
        let scaled = flow.scaled(&BigRational::new(BigInt::from(1), BigInt::from(2)));
        let proof = circular_to_ressv(&pre, &scaled).unwrap();
        assert!(check_proof(&proof).valid);
    }

    #[test]
    fn single_split_circular_proof_translates() {
        // F = {x}, conclusion x|y via one split
        let pre = CircularPreProof {
            nodes: vec![
                CircNode {
                    clause: clause(&[1]),
                    tag: NodeTag::Original,
                },
                CircNode {
                    clause: clause(&[1, 2]),
                    tag: NodeTag::Derived,
                },
                CircNode {
                    clause: clause(&[1, -2]),
                    tag: NodeTag::Derived,
                },
            ],
            inferences: vec![CircInference {
                rule: CircRule::Split,
                antecedents: vec![0],
                consequents: vec![1, 2],
            }],
            conclusion: 1,
        };
        let flow = FlowAssignment::uniform(&pre, 1);
        assert!(check_circular(&pre, &flow).valid);
        let proof = circular_to_ressv(&pre, &flow).unwrap();
        let verdict = check_proof(&proof);
        assert!(verdict.valid, "{:?}", verdict.failure);

        // soundness end to end within oracle range
        let cfg = OracleConfig::default();
        let f = Formula::normalize(1, vec![WeightedClause::new(clause(&[1]), Weight::Infinite)]);
        let g = Formula::normalize(
            2,
            vec![WeightedClause::new(clause(&[1, 2]), Weight::Infinite)],
        );
        assert!(entails_by_reduction(&f, &g, &cfg).unwrap().entailed);
    }

    #[test]
    fn refutation_translates_back_to_circular() {
        let (pre, flow) = cyclic_unit_example();
        let proof = circular_to_ressv(&pre, &flow).unwrap();
        let (back, back_flow) = ressv_to_circular(&proof).unwrap();
        assert!(check_circular(&back, &back_flow).valid);
        // conclusion is still y
        assert_eq!(back.nodes[back.conclusion].clause, clause(&[2]));
    }

    #[test]
    fn desugaring_aligns_scopes() {
        // resolution of (x|a) with (!x|b): one split each side, then symres
        let step = RuleApplication::Resolution {
            pivot: Var(1),
            clause_a: clause(&[1, 2]),
            clause_b: clause(&[-1, 3]),
            amount: Weight::one(),
        };
        let steps = desugar_step(&step).unwrap();
        assert_eq!(steps.len(), 3);
        assert!(matches!(&steps[0], RuleApplication::Split { .. }));
        assert!(matches!(&steps[1], RuleApplication::Split { .. }));
        match &steps[2] {
            RuleApplication::Resolution {
                clause_a, clause_b, ..
            } => {
                assert_eq!(clause_a, &clause(&[1, 2, 3]));
                assert_eq!(clause_b, &clause(&[-1, 2, 3]));
            }
            other => panic!("expected resolution, got {other:?}"),
        }

        let taut = RuleApplication::Resolution {
            pivot: Var(1),
            clause_a: clause(&[1, 2]),
            clause_b: clause(&[-1, -2]),
            amount: Weight::one(),
        };
        assert_eq!(
            desugar_step(&taut),
            Err(TranslateError::TautologicalResolvent)
        );
    }

    #[test]
    fn proof_without_virtuals_gives_empty_budget() {
        // Resolution-style proof: hard {x|y, !x}, soft (!y,1), derive (empty,1)
        let initial = Formula::normalize(
            2,
            vec![
                WeightedClause::new(clause(&[1, 2]), Weight::Infinite),
                WeightedClause::new(clause(&[-1]), Weight::Infinite),
                WeightedClause::new(clause(&[-2]), Weight::one()),
            ],
        );
        let steps = vec![
            RuleApplication::Resolution {
                pivot: Var(1),
                clause_a: clause(&[1, 2]),
                clause_b: clause(&[-1]),
                amount: Weight::Infinite,
            },
            RuleApplication::Resolution {
                pivot: Var(2),
                clause_a: clause(&[2]),
                clause_b: clause(&[-2]),
                amount: Weight::one(),
            },
        ];
        let proof = Proof::new(
            initial,
            steps,
            WeightedClause::new(Clause::empty(), Weight::one()),
        );
        assert!(check_proof(&proof).valid);
        let (pre, flow) = ressv_to_circular(&proof).unwrap();
        assert!(check_circular(&pre, &flow).valid);
        // budget contains only the negated conclusion unit
        let budget: Vec<&CircNode> = pre
            .nodes
            .iter()
            .filter(|n| n.tag == NodeTag::Budget)
            .collect();
        assert_eq!(budget.len(), 1);
        assert_eq!(budget[0].clause, clause(&[-2]));
        assert_eq!(pre.nodes[pre.conclusion].clause, clause(&[2]));
    }

    #[test]
    fn wrong_shapes_are_rejected() {
        let proof = Proof {
            initial: Formula::empty(0),
            steps: vec![],
            claimed_target: None,
        };
        assert_eq!(ressv_to_circular(&proof), Err(TranslateError::WrongTarget));
    }
}
