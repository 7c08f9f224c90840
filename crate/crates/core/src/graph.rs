//! Bipartite proof graphs.
//!
//! One inference node per rule application, clause nodes for every piece of
//! weighted mass, and merge nodes where equal clauses combine. Residual
//! weight left on a partially consumed clause reappears as a consequent of
//! the consuming inference, so every clause node has at most one
//! out-neighbor. Hard clauses are re-emitted on every use.

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use thiserror::Error;

use crate::formula::{Clause, Formula};
use crate::proof::{Proof, ProofState, StepError};
use crate::weight::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeOrigin {
    Initial,
    Step(usize),
    Merge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseNode {
    pub clause: Clause,
    pub weight: Weight,
    pub origin: NodeOrigin,
    /// Consuming inference, if any; at most one.
    pub out: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InferenceKind {
    Resolution,
    Split,
    Virtual,
    Merge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceNode {
    pub kind: InferenceKind,
    /// Proof step index; merges have none.
    pub step: Option<usize>,
    pub antecedents: Vec<usize>,
    pub consequents: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct ProofGraph {
    pub clause_nodes: Vec<ClauseNode>,
    pub inference_nodes: Vec<InferenceNode>,
}

impl ProofGraph {
    pub fn rule_node_count(&self) -> usize {
        self.inference_nodes
            .iter()
            .filter(|n| n.kind != InferenceKind::Merge)
            .count()
    }

    pub fn merge_node_count(&self) -> usize {
        self.inference_nodes
            .iter()
            .filter(|n| n.kind == InferenceKind::Merge)
            .count()
    }

    /// Structural invariants: clause out-degree at most one, arcs only
    /// forward in creation order (hence acyclic).
    pub fn validate(&self) -> Result<(), String> {
        let mut seen_out = vec![false; self.clause_nodes.len()];
        for (i, inf) in self.inference_nodes.iter().enumerate() {
            for &a in &inf.antecedents {
                if seen_out[a] {
                    return Err(format!("clause node {a} consumed twice"));
                }
                seen_out[a] = true;
                if self.clause_nodes[a].out != Some(i) {
                    return Err(format!("clause node {a} has inconsistent out-edge"));
                }
            }
        }
        for (c, node) in self.clause_nodes.iter().enumerate() {
            if let Some(out) = node.out {
                if !self.inference_nodes[out].antecedents.contains(&c) {
                    return Err(format!("dangling out-edge on clause node {c}"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("step {index}: {source}")]
    Step { index: usize, source: StepError },
}

struct Builder {
    graph: ProofGraph,
    /// Unconsumed positive clause nodes with remaining weight, per clause.
    open: BTreeMap<Clause, VecDeque<(usize, Weight)>>,
    /// Negative nodes awaiting cancellation, per clause.
    debt: BTreeMap<Clause, Vec<usize>>,
}

impl Builder {
    fn new_clause_node(&mut self, clause: Clause, weight: Weight, origin: NodeOrigin) -> usize {
        let id = self.graph.clause_nodes.len();
        self.graph.clause_nodes.push(ClauseNode {
            clause,
            weight,
            origin,
            out: None,
        });
        id
    }

    fn arc_in(&mut self, clause_node: usize, inference: usize) {
        self.graph.clause_nodes[clause_node].out = Some(inference);
        self.graph.inference_nodes[inference]
            .antecedents
            .push(clause_node);
    }

    fn produce(
        &mut self,
        inference: usize,
        clause: Clause,
        weight: Weight,
        origin: NodeOrigin,
    ) -> usize {
        let id = self.new_clause_node(clause.clone(), weight.clone(), origin);
        self.graph.inference_nodes[inference].consequents.push(id);
        if weight.is_negative() {
            self.debt.entry(clause).or_default().push(id);
        } else if !weight.is_zero() {
            self.open.entry(clause).or_default().push_back((id, weight));
        }
        id
    }

    /// Route `amount` of clause `c` into `inference`, merging open nodes
    /// first when no single node carries enough, and re-emitting any
    /// residual as a consequent of the inference.
    fn consume(&mut self, inference: usize, c: &Clause, amount: &Weight, step: usize) {
        let queue = self.open.get_mut(c).expect("validated by replay");
        let pick = queue.iter().position(|(_, w)| w.consume(amount).is_some());
        let (node, remaining) = match pick {
            Some(i) => queue.remove(i).unwrap(),
            None => {
                // no single node suffices: merge all open mass of this clause
                let nodes: Vec<(usize, Weight)> = queue.drain(..).collect();
                let total = nodes.iter().fold(Weight::zero(), |acc, (_, w)| acc.plus(w));
                let merge = self.graph.inference_nodes.len();
                self.graph.inference_nodes.push(InferenceNode {
                    kind: InferenceKind::Merge,
                    step: None,
                    antecedents: Vec::new(),
                    consequents: Vec::new(),
                });
                for (id, _) in &nodes {
                    self.arc_in(*id, merge);
                }
                let merged = self.new_clause_node(c.clone(), total.clone(), NodeOrigin::Merge);
                self.graph.inference_nodes[merge].consequents.push(merged);
                (merged, total)
            }
        };
        self.arc_in(node, inference);
        let residual = remaining.consume(amount).expect("validated by replay");
        if !residual.is_zero() {
            self.produce(inference, c.clone(), residual, NodeOrigin::Step(step));
        }
        if let Some(q) = self.open.get(c) {
            if q.is_empty() {
                self.open.remove(c);
            }
        }
    }

    /// Cancel owed negative mass against remaining open nodes, one merge
    /// node per indebted clause. A debt never pairs with the grant emitted
    /// by its own virtual step: an untouched grant/debt twin nets out in
    /// the formula view without a merge. Leftover surplus becomes a fresh
    /// node.
    fn settle_debts(&mut self) {
        let clauses: Vec<Clause> = self.debt.keys().cloned().collect();
        for c in clauses {
            let debts = self.debt.remove(&c).unwrap();
            let open = self.open.remove(&c).unwrap_or_default();
            let debt_origins: Vec<NodeOrigin> = debts
                .iter()
                .map(|&d| self.graph.clause_nodes[d].origin)
                .collect();
            let mut owed = BigInt::from(0);
            for &d in &debts {
                owed -= self.graph.clause_nodes[d].weight.as_finite().unwrap();
            }
            let pairable = open
                .iter()
                .filter(|(id, _)| !debt_origins.contains(&self.graph.clause_nodes[*id].origin))
                .fold(Weight::zero(), |acc, (_, w)| acc.plus(w));
            let covered = match pairable.as_finite() {
                Some(p) => p >= &owed,
                None => true,
            };
            if open.is_empty() || !covered {
                self.debt.insert(c.clone(), debts);
                if !open.is_empty() {
                    self.open.insert(c, open);
                }
                continue;
            }
            let merge = self.graph.inference_nodes.len();
            self.graph.inference_nodes.push(InferenceNode {
                kind: InferenceKind::Merge,
                step: None,
                antecedents: Vec::new(),
                consequents: Vec::new(),
            });
            for d in debts {
                self.arc_in(d, merge);
            }
            let mut gathered = Weight::zero();
            let mut rest: VecDeque<(usize, Weight)> = VecDeque::new();
            for (id, w) in open {
                let done = match gathered.as_finite() {
                    Some(g) => g >= &owed,
                    None => true,
                };
                if done || debt_origins.contains(&self.graph.clause_nodes[id].origin) {
                    rest.push_back((id, w));
                } else {
                    self.arc_in(id, merge);
                    gathered = gathered.plus(&w);
                }
            }
            let net = gathered.plus(&Weight::Finite(-owed));
            if !net.is_zero() {
                let id = self.new_clause_node(c.clone(), net.clone(), NodeOrigin::Merge);
                self.graph.inference_nodes[merge].consequents.push(id);
                if !net.is_negative() {
                    rest.push_front((id, net));
                }
            }
            if !rest.is_empty() {
                self.open.insert(c, rest);
            }
        }
    }
}

/// Build the proof graph by replaying the proof.
pub fn build_graph(proof: &Proof) -> Result<ProofGraph, GraphError> {
    let mut state = ProofState::from_formula(&proof.initial);
    let mut b = Builder {
        graph: ProofGraph::default(),
        open: BTreeMap::new(),
        debt: BTreeMap::new(),
    };
    for (clause, weight) in proof.initial.iter() {
        let id = b.new_clause_node(clause.clone(), weight.clone(), NodeOrigin::Initial);
        if weight.is_negative() {
            b.debt.entry(clause.clone()).or_default().push(id);
        } else {
            b.open
                .entry(clause.clone())
                .or_default()
                .push_back((id, weight.clone()));
        }
    }

    for (index, step) in proof.steps.iter().enumerate() {
        let outcome = state
            .compute_step(step)
            .map_err(|source| GraphError::Step { index, source })?;
        let inf = b.graph.inference_nodes.len();
        b.graph.inference_nodes.push(InferenceNode {
            kind: match step {
                crate::rules::RuleApplication::Resolution { .. } => InferenceKind::Resolution,
                crate::rules::RuleApplication::Split { .. } => InferenceKind::Split,
                crate::rules::RuleApplication::Virtual { .. } => InferenceKind::Virtual,
            },
            step: Some(index),
            antecedents: Vec::new(),
            consequents: Vec::new(),
        });
        for wc in &outcome.consumed {
            b.consume(inf, &wc.clause, &wc.weight, index);
        }
        for wc in &outcome.produced {
            b.produce(
                inf,
                wc.clause.clone(),
                wc.weight.clone(),
                NodeOrigin::Step(index),
            );
        }
        state.commit(&outcome);
    }

    b.settle_debts();
    Ok(b.graph)
}

/// Merged formula reconstructed from the graph's loose ends; used to
/// cross-check the graph against plain replay.
pub fn frontier_formula(graph: &ProofGraph, n_vars: u32) -> Formula {
    Formula::normalize(
        n_vars,
        graph
            .clause_nodes
            .iter()
            .filter(|n| n.out.is_none())
            .map(|n| crate::formula::WeightedClause::new(n.clause.clone(), n.weight.clone())),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Clause, Formula, Var, WeightedClause};
    use crate::proof::{check_proof, Proof};
    use crate::rules::RuleApplication;

    fn clause(ints: &[i64]) -> Clause {
        Clause::from_dimacs(ints).unwrap()
    }

    #[test]
    fn hard_resolution_reemits_antecedents() {
        // two hard resolutions; hard antecedents come back as fresh nodes
        let initial = Formula::normalize(
            2,
            vec![
                WeightedClause::new(clause(&[1, 2]), Weight::Infinite),
                WeightedClause::new(clause(&[-1]), Weight::Infinite),
                WeightedClause::new(clause(&[-2]), Weight::one()),
            ],
        );
        let proof = Proof::new(
            initial,
            vec![
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
            ],
            WeightedClause::new(Clause::empty(), Weight::one()),
        );
        assert!(check_proof(&proof).valid);
        let graph = build_graph(&proof).unwrap();
        graph.validate().unwrap();
        assert_eq!(graph.rule_node_count(), 2);
        assert_eq!(graph.merge_node_count(), 0);
        // re-emitted copies of the hard antecedents appear as step nodes
        for ints in [[1i64, 2].as_slice(), &[-1], &[2]] {
            let copy = clause(ints);
            assert!(graph.clause_nodes.iter().any(|n| {
                matches!(n.origin, NodeOrigin::Step(_))
                    && n.clause == copy
                    && n.weight.is_infinite()
            }));
        }
    }

    #[test]
    fn single_virtual_step_graph() {
        let proof = Proof {
            initial: Formula::empty(0),
            steps: vec![RuleApplication::Virtual {
                clause: Clause::empty(),
                amount: Weight::finite(6),
            }],
            claimed_target: None,
        };
        let graph = build_graph(&proof).unwrap();
        graph.validate().unwrap();
        assert_eq!(graph.inference_nodes.len(), 1);
        assert_eq!(graph.clause_nodes.len(), 2);
    }

    #[test]
    fn cancellation_merge_joins_signed_pair() {
        let initial = Formula::normalize(
            2,
            vec![
                WeightedClause::new(clause(&[1, 2]), Weight::Infinite),
                WeightedClause::new(clause(&[-1]), Weight::Infinite),
                WeightedClause::new(clause(&[-2]), Weight::one()),
            ],
        );
        let steps = vec![
            RuleApplication::Virtual {
                clause: clause(&[1]),
                amount: Weight::one(),
            },
            RuleApplication::Resolution {
                pivot: Var(1),
                clause_a: clause(&[1]),
                clause_b: clause(&[-1]),
                amount: Weight::one(),
            },
            RuleApplication::Split {
                clause: Clause::empty(),
                on_var: Var(2),
                amount: Weight::one(),
            },
            RuleApplication::Resolution {
                pivot: Var(2),
                clause_a: clause(&[2]),
                clause_b: clause(&[-2]),
                amount: Weight::one(),
            },
            RuleApplication::Resolution {
                pivot: Var(2),
                clause_a: clause(&[1, 2]),
                clause_b: clause(&[-2]),
                amount: Weight::one(),
            },
        ];
        let proof = Proof::new(
            initial,
            steps,
            WeightedClause::new(Clause::empty(), Weight::one()),
        );
        let verdict = check_proof(&proof);
        assert!(verdict.valid);
        let graph = build_graph(&proof).unwrap();
        graph.validate().unwrap();
        assert_eq!(graph.merge_node_count(), 1);
        // graph frontier agrees with replay
        assert_eq!(frontier_formula(&graph, 2), verdict.final_formula.unwrap());
    }

    #[test]
    fn partial_consumption_emits_residual() {
        let initial = Formula::normalize(
            0,
            vec![WeightedClause::new(Clause::empty(), Weight::finite(6))],
        );
        let proof = Proof {
            initial,
            steps: vec![RuleApplication::Split {
                clause: Clause::empty(),
                on_var: Var(1),
                amount: Weight::one(),
            }],
            claimed_target: None,
        };
        let graph = build_graph(&proof).unwrap();
        graph.validate().unwrap();
        // initial node, two split products, one residual (empty, 5)
        assert_eq!(graph.clause_nodes.len(), 4);
        let residual = graph
            .clause_nodes
            .iter()
            .find(|n| n.clause.is_empty() && n.weight == Weight::finite(5))
            .expect("residual node");
        assert!(matches!(residual.origin, NodeOrigin::Step(0)));
    }
}
