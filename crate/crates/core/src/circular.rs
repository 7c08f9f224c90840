//! SAT circular pre-proofs with flow certification.
//!
//! A pre-proof is a clause/inference graph over the original formula, an
//! arbitrary set of budget clauses, and derived clauses; inference nodes are
//! symmetric resolutions or splits and the graph may be cyclic through
//! budget clauses. A positive flow on the inference nodes certifies the
//! proof when every clause outside the original formula keeps a nonnegative
//! balance (inflow minus outflow) and the conclusion's balance is strictly
//! positive. Flows are exact rationals.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::formula::{Clause, Lit};

pub type NodeId = usize;
pub type InfId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeTag {
    /// Clause of the original formula; its balance is unconstrained.
    Original,
    /// Added clause; every occurrence is merged into this node.
    Budget,
    /// Clause produced by an inference.
    Derived,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircNode {
    pub clause: Clause,
    pub tag: NodeTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircRule {
    SymRes,
    Split,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircInference {
    pub rule: CircRule,
    pub antecedents: Vec<NodeId>,
    pub consequents: Vec<NodeId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CircularPreProof {
    pub nodes: Vec<CircNode>,
    pub inferences: Vec<CircInference>,
    pub conclusion: NodeId,
}

/// Positive rational flow per inference node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlowAssignment {
    pub flows: BTreeMap<InfId, BigRational>,
}

impl FlowAssignment {
    pub fn uniform(pre: &CircularPreProof, value: i64) -> Self {
        FlowAssignment {
            flows: (0..pre.inferences.len())
                .map(|i| (i, BigRational::from_integer(BigInt::from(value))))
                .collect(),
        }
    }

    pub fn scaled(&self, factor: &BigRational) -> Self {
        FlowAssignment {
            flows: self.flows.iter().map(|(&i, f)| (i, f * factor)).collect(),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CircularFailure {
    #[error("inference i{0} has no flow")]
    MissingFlow(InfId),
    #[error("inference i{0} has non-positive flow")]
    NonPositiveFlow(InfId),
    #[error("inference i{id} malformed: {reason}")]
    MalformedInference { id: InfId, reason: String },
    #[error("node c{0} out of range")]
    BadNodeRef(NodeId),
    #[error("budget clause of node c{0} duplicated elsewhere")]
    BudgetClauseDuplicated(NodeId),
    #[error("node c{node} ({clause}) has negative balance {balance}")]
    NegativeBalance {
        node: NodeId,
        clause: Clause,
        balance: BigRational,
    },
    #[error("conclusion balance not positive ({0})")]
    ConclusionNotPositive(BigRational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircularVerdict {
    pub valid: bool,
    pub failure: Option<CircularFailure>,
}

/// Balance of every clause node: total inflow minus total outflow.
pub fn compute_balances(
    pre: &CircularPreProof,
    flow: &FlowAssignment,
) -> Result<Vec<BigRational>, CircularFailure> {
    let mut balances = vec![BigRational::zero(); pre.nodes.len()];
    for (i, inf) in pre.inferences.iter().enumerate() {
        let f = flow.flows.get(&i).ok_or(CircularFailure::MissingFlow(i))?;
        for &a in &inf.antecedents {
            if a >= pre.nodes.len() {
                return Err(CircularFailure::BadNodeRef(a));
            }
            balances[a] -= f;
        }
        for &c in &inf.consequents {
            if c >= pre.nodes.len() {
                return Err(CircularFailure::BadNodeRef(c));
            }
            balances[c] += f;
        }
    }
    Ok(balances)
}

// The antecedent clause must extend the consequent by exactly one literal.
fn extra_literal(longer: &Clause, shorter: &Clause) -> Option<Lit> {
    if longer.len() != shorter.len() + 1 || !shorter.subsumes(longer) {
        return None;
    }
    longer
        .lits()
        .iter()
        .copied()
        .find(|&l| !shorter.contains(l))
}

fn validate_inference(pre: &CircularPreProof, id: InfId) -> Result<(), CircularFailure> {
    let inf = &pre.inferences[id];
    let node = |i: NodeId| -> Result<&CircNode, CircularFailure> {
        pre.nodes.get(i).ok_or(CircularFailure::BadNodeRef(i))
    };
    let malformed = |reason: &str| CircularFailure::MalformedInference {
        id,
        reason: reason.to_string(),
    };
    match inf.rule {
        CircRule::SymRes => {
            if inf.antecedents.len() != 2 || inf.consequents.len() != 1 {
                return Err(malformed(
                    "symmetric resolution needs 2 antecedents, 1 consequent",
                ));
            }
            if inf.antecedents[0] == inf.antecedents[1] {
                return Err(malformed("antecedents must be distinct nodes"));
            }
            let a = &node(inf.antecedents[0])?.clause;
            let b = &node(inf.antecedents[1])?.clause;
            let c = &node(inf.consequents[0])?.clause;
            let la = extra_literal(a, c).ok_or_else(|| {
                malformed("first antecedent must extend the consequent by one literal")
            })?;
            let lb = extra_literal(b, c).ok_or_else(|| {
                malformed("second antecedent must extend the consequent by one literal")
            })?;
            if la != lb.complement() {
                return Err(malformed("antecedents must disagree on exactly the pivot"));
            }
        }
        CircRule::Split => {
            if inf.antecedents.len() != 1 || inf.consequents.len() != 2 {
                return Err(malformed("split needs 1 antecedent, 2 consequents"));
            }
            if inf.consequents[0] == inf.consequents[1] {
                return Err(malformed("consequents must be distinct nodes"));
            }
            let s = &node(inf.antecedents[0])?.clause;
            let c0 = &node(inf.consequents[0])?.clause;
            let c1 = &node(inf.consequents[1])?.clause;
            let l0 = extra_literal(c0, s)
                .ok_or_else(|| malformed("consequent must extend the antecedent by one literal"))?;
            let l1 = extra_literal(c1, s)
                .ok_or_else(|| malformed("consequent must extend the antecedent by one literal"))?;
            if l0 != l1.complement() {
                return Err(malformed("split consequents must branch on one variable"));
            }
        }
    }
    Ok(())
}

fn check_structure(pre: &CircularPreProof) -> Result<(), CircularFailure> {
    if pre.conclusion >= pre.nodes.len() {
        return Err(CircularFailure::BadNodeRef(pre.conclusion));
    }
    // budget clauses are unique and fully merged into their node
    for (i, n) in pre.nodes.iter().enumerate() {
        if n.tag != NodeTag::Budget {
            continue;
        }
        for (j, other) in pre.nodes.iter().enumerate() {
            if i != j && other.clause == n.clause {
                return Err(CircularFailure::BudgetClauseDuplicated(i));
            }
        }
    }
    for id in 0..pre.inferences.len() {
        validate_inference(pre, id)?;
    }
    Ok(())
}

/// Full certification: structure, positive total flow, nonnegative balance
/// on everything outside the original formula, strictly positive balance at
/// the conclusion (regardless of where the conclusion lives).
pub fn check_circular(pre: &CircularPreProof, flow: &FlowAssignment) -> CircularVerdict {
    let fail = |failure: CircularFailure| CircularVerdict {
        valid: false,
        failure: Some(failure),
    };
    if let Err(e) = check_structure(pre) {
        return fail(e);
    }
    for i in 0..pre.inferences.len() {
        match flow.flows.get(&i) {
            None => return fail(CircularFailure::MissingFlow(i)),
            Some(f) if !f.is_positive() => return fail(CircularFailure::NonPositiveFlow(i)),
            Some(_) => {}
        }
    }
    let balances = match compute_balances(pre, flow) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    for (i, n) in pre.nodes.iter().enumerate() {
        if n.tag != NodeTag::Original && balances[i].is_negative() {
            return fail(CircularFailure::NegativeBalance {
                node: i,
                clause: n.clause.clone(),
                balance: balances[i].clone(),
            });
        }
    }
    if !balances[pre.conclusion].is_positive() {
        return fail(CircularFailure::ConclusionNotPositive(
            balances[pre.conclusion].clone(),
        ));
    }
    CircularVerdict {
        valid: true,
        failure: None,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CirFormatError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("unknown node id `{0}`")]
    UnknownNode(String),
    #[error("unknown inference id `{0}`")]
    UnknownInference(String),
    #[error("missing conclude line")]
    MissingConclusion,
}

/// Parse the circular proof text format:
///
/// ```text
/// node c1 orig | 1 2 0
/// node c2 budget | 1 0
/// node c3 | 2 0
/// inf i1 symres c1 c2 -> c3
/// flow i1 3/2
/// conclude c3
/// ```
pub fn parse_cir(text: &str) -> Result<(CircularPreProof, FlowAssignment), CirFormatError> {
    let mut node_ids: BTreeMap<String, NodeId> = BTreeMap::new();
    let mut inf_ids: BTreeMap<String, InfId> = BTreeMap::new();
    let mut nodes = Vec::new();
    let mut inferences = Vec::new();
    let mut flows = BTreeMap::new();
    let mut conclusion = None;

    let syntax = |line: usize, reason: &str| CirFormatError::Syntax {
        line,
        reason: reason.to_string(),
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') && line.starts_with("c ") {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("node") => {
                let id = tokens
                    .next()
                    .ok_or_else(|| syntax(line_no, "missing node id"))?;
                let tag;
                let mut rest: Vec<&str> = tokens.collect();
                if let Some(pos) = rest.iter().position(|&t| t == "|") {
                    let before = &rest[..pos];
                    tag = match before {
                        [] => NodeTag::Derived,
                        ["orig"] => NodeTag::Original,
                        ["budget"] => NodeTag::Budget,
                        _ => return Err(syntax(line_no, "bad node tag")),
                    };
                    rest = rest[pos + 1..].to_vec();
                } else {
                    return Err(syntax(line_no, "missing `|`"));
                }
                let mut ints = Vec::new();
                let mut terminated = false;
                for tok in rest {
                    let v: i64 = tok.parse().map_err(|_| syntax(line_no, "bad literal"))?;
                    if v == 0 {
                        terminated = true;
                        break;
                    }
                    ints.push(v);
                }
                if !terminated {
                    return Err(syntax(line_no, "literal list not terminated by 0"));
                }
                let clause = Clause::from_dimacs(&ints)
                    .ok_or_else(|| syntax(line_no, "tautological clause"))?;
                if node_ids.contains_key(id) {
                    return Err(syntax(line_no, "duplicate node id"));
                }
                node_ids.insert(id.to_string(), nodes.len());
                nodes.push(CircNode { clause, tag });
            }
            Some("inf") => {
                let id = tokens
                    .next()
                    .ok_or_else(|| syntax(line_no, "missing inference id"))?;
                let rule = match tokens.next() {
                    Some("symres") => CircRule::SymRes,
                    Some("split") => CircRule::Split,
                    _ => return Err(syntax(line_no, "rule must be symres or split")),
                };
                let rest: Vec<&str> = tokens.collect();
                let arrow = rest
                    .iter()
                    .position(|&t| t == "->")
                    .ok_or_else(|| syntax(line_no, "missing `->`"))?;
                let resolve = |toks: &[&str]| -> Result<Vec<NodeId>, CirFormatError> {
                    toks.iter()
                        .map(|t| {
                            node_ids
                                .get(*t)
                                .copied()
                                .ok_or_else(|| CirFormatError::UnknownNode(t.to_string()))
                        })
                        .collect()
                };
                let antecedents = resolve(&rest[..arrow])?;
                let consequents = resolve(&rest[arrow + 1..])?;
                if inf_ids.contains_key(id) {
                    return Err(syntax(line_no, "duplicate inference id"));
                }
                inf_ids.insert(id.to_string(), inferences.len());
                inferences.push(CircInference {
                    rule,
                    antecedents,
                    consequents,
                });
            }
            Some("flow") => {
                let id = tokens
                    .next()
                    .ok_or_else(|| syntax(line_no, "missing inference id"))?;
                let value = tokens
                    .next()
                    .ok_or_else(|| syntax(line_no, "missing flow value"))?;
                let inf = *inf_ids
                    .get(id)
                    .ok_or_else(|| CirFormatError::UnknownInference(id.to_string()))?;
                let rational = parse_rational(value)
                    .ok_or_else(|| syntax(line_no, "flow must be p or p/q"))?;
                flows.insert(inf, rational);
            }
            Some("conclude") => {
                let id = tokens
                    .next()
                    .ok_or_else(|| syntax(line_no, "missing node id"))?;
                conclusion = Some(
                    *node_ids
                        .get(id)
                        .ok_or_else(|| CirFormatError::UnknownNode(id.to_string()))?,
                );
            }
            Some(other) => return Err(syntax(line_no, &format!("unknown directive `{other}`"))),
            None => {}
        }
    }

    Ok((
        CircularPreProof {
            nodes,
            inferences,
            conclusion: conclusion.ok_or(CirFormatError::MissingConclusion)?,
        },
        FlowAssignment { flows },
    ))
}

fn parse_rational(token: &str) -> Option<BigRational> {
    match token.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.parse().ok()?;
            let q: BigInt = q.parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => {
            let p: BigInt = token.parse().ok()?;
            Some(BigRational::from_integer(p))
        }
    }
}

pub fn write_cir(pre: &CircularPreProof, flow: &FlowAssignment) -> String {
    let mut out = String::new();
    for (i, n) in pre.nodes.iter().enumerate() {
        let tag = match n.tag {
            NodeTag::Original => "orig ",
            NodeTag::Budget => "budget ",
            NodeTag::Derived => "",
        };
        let _ = writeln!(
            out,
            "node c{i} {tag}| {}",
            crate::wcnf::lits_with_zero(&n.clause)
        );
    }
    for (i, inf) in pre.inferences.iter().enumerate() {
        let rule = match inf.rule {
            CircRule::SymRes => "symres",
            CircRule::Split => "split",
        };
        let ants: Vec<String> = inf.antecedents.iter().map(|a| format!("c{a}")).collect();
        let cons: Vec<String> = inf.consequents.iter().map(|c| format!("c{c}")).collect();
        let _ = writeln!(
            out,
            "inf i{i} {rule} {} -> {}",
            ants.join(" "),
            cons.join(" ")
        );
    }
    for (i, f) in &flow.flows {
        if f.is_integer() {
            let _ = writeln!(out, "flow i{i} {}", f.numer());
        } else {
            let _ = writeln!(out, "flow i{i} {}/{}", f.numer(), f.denom());
        }
    }
    let _ = writeln!(out, "conclude c{}", pre.conclusion);
    out
}

/// The worked cyclic example: conclusion `y` from `{x|y, !x}`, budget `{x}`.
/// The cycle re-derives `x` from `x|y` and the split product `x|!y`.
pub fn cyclic_unit_example() -> (CircularPreProof, FlowAssignment) {
    let c = |ints: &[i64]| Clause::from_dimacs(ints).unwrap();
    let nodes = vec![
        CircNode {
            clause: c(&[1, 2]),
            tag: NodeTag::Original,
        }, // 0: x|y
        CircNode {
            clause: c(&[-1]),
            tag: NodeTag::Original,
        }, // 1: !x
        CircNode {
            clause: c(&[1]),
            tag: NodeTag::Budget,
        }, // 2: x
        CircNode {
            clause: Clause::empty(),
            tag: NodeTag::Derived,
        }, // 3
        CircNode {
            clause: c(&[2]),
            tag: NodeTag::Derived,
        }, // 4: y
        CircNode {
            clause: c(&[-2]),
            tag: NodeTag::Derived,
        }, // 5: !y
        CircNode {
            clause: c(&[-1, -2]),
            tag: NodeTag::Derived,
        }, // 6: !x|!y
        CircNode {
            clause: c(&[1, -2]),
            tag: NodeTag::Derived,
        }, // 7: x|!y
    ];
    let inferences = vec![
        CircInference {
            rule: CircRule::SymRes,
            antecedents: vec![2, 1],
            consequents: vec![3],
        },
        CircInference {
            rule: CircRule::Split,
            antecedents: vec![3],
            consequents: vec![4, 5],
        },
        CircInference {
            rule: CircRule::Split,
            antecedents: vec![5],
            consequents: vec![6, 7],
        },
        CircInference {
            rule: CircRule::SymRes,
            antecedents: vec![0, 7],
            consequents: vec![2],
        },
    ];
    let pre = CircularPreProof {
        nodes,
        inferences,
        conclusion: 4,
    };
    let flow = FlowAssignment::uniform(&pre, 1);
    (pre, flow)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn rational(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn worked_example_balances() {
        let (pre, flow) = cyclic_unit_example();
        let balances = compute_balances(&pre, &flow).unwrap();
        assert_eq!(balances[4], rat(1)); // y
        assert_eq!(balances[2], rat(0)); // x (budget)
        assert_eq!(balances[0], rat(-1)); // x|y (original, allowed)
        assert!(check_circular(&pre, &flow).valid);
    }

    #[test]
    fn reduced_back_edge_flow_fails() {
        let (pre, mut flow) = cyclic_unit_example();
        flow.flows.insert(3, rational(1, 2));
        let balances = compute_balances(&pre, &flow).unwrap();
        assert_eq!(balances[2], rational(-1, 2));
        let verdict = check_circular(&pre, &flow);
        assert!(!verdict.valid);
        assert!(matches!(
            verdict.failure,
            Some(CircularFailure::NegativeBalance { node: 2, .. })
        ));
    }

    #[test]
    fn empty_inference_set_has_zero_balances() {
        let pre = CircularPreProof {
            nodes: vec![CircNode {
                clause: Clause::from_dimacs(&[1]).unwrap(),
                tag: NodeTag::Original,
            }],
            inferences: vec![],
            conclusion: 0,
        };
        let flow = FlowAssignment::default();
        let balances = compute_balances(&pre, &flow).unwrap();
        assert!(balances[0].is_zero());
        // conclusion balance 0 is not strictly positive
        let verdict = check_circular(&pre, &flow);
        assert!(!verdict.valid);
        assert!(matches!(
            verdict.failure,
            Some(CircularFailure::ConclusionNotPositive(_))
        ));
    }

    #[test]
    fn split_balance_shape() {
        let c = |ints: &[i64]| Clause::from_dimacs(ints).unwrap();
        let pre = CircularPreProof {
            nodes: vec![
                CircNode {
                    clause: c(&[1]),
                    tag: NodeTag::Original,
                },
                CircNode {
                    clause: c(&[1, 2]),
                    tag: NodeTag::Derived,
                },
                CircNode {
                    clause: c(&[1, -2]),
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
        let flow = FlowAssignment::uniform(&pre, 2);
        let balances = compute_balances(&pre, &flow).unwrap();
        assert_eq!(balances[0], rat(-2));
        assert_eq!(balances[1], rat(2));
        assert_eq!(balances[2], rat(2));
        assert!(check_circular(&pre, &flow).valid);
    }

    #[test]
    fn scaling_preserves_validity() {
        let (pre, flow) = cyclic_unit_example();
        for (p, q) in [(2, 1), (1, 3), (7, 2)] {
            let scaled = flow.scaled(&rational(p, q));
            assert!(check_circular(&pre, &scaled).valid, "scale {p}/{q}");
        }
    }

    #[test]
    fn malformed_inferences_are_rejected() {
        let c = |ints: &[i64]| Clause::from_dimacs(ints).unwrap();
        // consequent does not match the antecedents
        let pre = CircularPreProof {
            nodes: vec![
                CircNode {
                    clause: c(&[1, 2]),
                    tag: NodeTag::Original,
                },
                CircNode {
                    clause: c(&[-1, 2]),
                    tag: NodeTag::Original,
                },
                CircNode {
                    clause: c(&[3]),
                    tag: NodeTag::Derived,
                },
            ],
            inferences: vec![CircInference {
                rule: CircRule::SymRes,
                antecedents: vec![0, 1],
                consequents: vec![2],
            }],
            conclusion: 2,
        };
        let verdict = check_circular(&pre, &FlowAssignment::uniform(&pre, 1));
        assert!(!verdict.valid);
        assert!(matches!(
            verdict.failure,
            Some(CircularFailure::MalformedInference { id: 0, .. })
        ));
    }

    #[test]
    fn format_roundtrip() {
        let (pre, flow) = cyclic_unit_example();
        let text = write_cir(&pre, &flow);
        let (pre2, flow2) = parse_cir(&text).unwrap();
        assert_eq!(pre, pre2);
        assert_eq!(flow, flow2);
        assert!(check_circular(&pre2, &flow2).valid);
    }

    #[test]
    fn fractional_flows_roundtrip() {
        let (pre, flow) = cyclic_unit_example();
        let scaled = flow.scaled(&rational(3, 2));
        let text = write_cir(&pre, &scaled);
        let (_, flow2) = parse_cir(&text).unwrap();
        assert_eq!(scaled, flow2);
    }
}
