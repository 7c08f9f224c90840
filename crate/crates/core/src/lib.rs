//! Engine for resolution-based MaxSAT proof systems.
//!
//! The crate models weighted CNF formulas with exact arithmetic, applies
//! and checks proofs built from the resolution, split and virtual rules,
//! certifies circular SAT proofs by flow balance, translates between the
//! two proof styles, generates the pigeonhole benchmark family and the
//! dual-rail encoding, and cross-checks everything against a brute-force
//! oracle at small scale.

pub mod builders;
pub mod circular;
pub mod formula;
pub mod generators;
pub mod graph;
pub mod oracle;
pub mod proof;
pub mod rules;
pub mod trace;
pub mod translate;
pub mod wcnf;
pub mod weight;

pub use formula::{Assignment, Clause, Formula, Lit, Var, WeightedClause};
pub use proof::{check_proof, Proof, ProofState, Verdict};
pub use rules::RuleApplication;
pub use weight::Weight;
