//! Instance builders: the pigeonhole family, the dual-rail transformation,
//! and seeded random formulas for property tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{Clause, Formula, Lit, Var, WeightedClause};
use crate::weight::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PigeonVariant {
    /// All clauses hard.
    Hard,
    /// All clauses soft at weight 1.
    Soft,
    /// Soft plus an empty clause of weight `m^2 + m`.
    SoftWithEmpty,
    /// Soft plus unit clauses `(x,1)` and `(!x,1)` for every variable.
    SoftWithUnits,
}

impl PigeonVariant {
    pub fn cli_name(self) -> &'static str {
        match self {
            PigeonVariant::Hard => "php",
            PigeonVariant::Soft => "sphp",
            PigeonVariant::SoftWithEmpty => "sphp0",
            PigeonVariant::SoftWithUnits => "sphp1",
        }
    }

    pub fn from_cli_name(name: &str) -> Option<Self> {
        match name {
            "php" => Some(PigeonVariant::Hard),
            "sphp" => Some(PigeonVariant::Soft),
            "sphp0" => Some(PigeonVariant::SoftWithEmpty),
            "sphp1" => Some(PigeonVariant::SoftWithUnits),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("hole count must be at least 1")]
    ZeroHoles,
    #[error("dual-rail input must be purely hard; found soft clause {0}")]
    SoftInput(Clause),
}

/// A pigeonhole instance: `m + 1` pigeons, `m` holes.
#[derive(Debug, Clone)]
pub struct PigeonInstance {
    pub m: u32,
    pub variant: PigeonVariant,
    pub formula: Formula,
}

impl PigeonInstance {
    /// Variable for "pigeon `i` sits in hole `j`"; `i` in `1..=m+1`,
    /// `j` in `1..=m`. Numbered `(i-1)*m + j`.
    pub fn var(&self, pigeon: u32, hole: u32) -> Var {
        pigeon_var(self.m, pigeon, hole)
    }
}

pub fn pigeon_var(m: u32, pigeon: u32, hole: u32) -> Var {
    debug_assert!(pigeon >= 1 && pigeon <= m + 1);
    debug_assert!(hole >= 1 && hole <= m);
    Var((pigeon - 1) * m + hole)
}

/// The clause "pigeon `i` sits somewhere".
pub fn pigeon_clause(m: u32, pigeon: u32) -> Clause {
    Clause::from_lits((1..=m).map(|j| Lit::new(pigeon_var(m, pigeon, j), true)))
        .expect("distinct variables")
}

/// The clause "pigeons `i` and `i2` do not share hole `j`".
pub fn hole_clause(m: u32, hole: u32, pigeon_a: u32, pigeon_b: u32) -> Clause {
    Clause::from_lits([
        Lit::new(pigeon_var(m, pigeon_a, hole), false),
        Lit::new(pigeon_var(m, pigeon_b, hole), false),
    ])
    .expect("distinct variables")
}

/// Build a pigeonhole instance with `m` holes.
pub fn gen_pigeonhole(variant: PigeonVariant, m: u32) -> Result<PigeonInstance, GeneratorError> {
    if m == 0 {
        return Err(GeneratorError::ZeroHoles);
    }
    let base_weight = match variant {
        PigeonVariant::Hard => Weight::Infinite,
        _ => Weight::one(),
    };
    let n_vars = m * (m + 1);
    let mut entries = Vec::new();
    for i in 1..=m + 1 {
        entries.push(WeightedClause::new(
            pigeon_clause(m, i),
            base_weight.clone(),
        ));
    }
    for j in 1..=m {
        for i in 1..=m {
            for i2 in i + 1..=m + 1 {
                entries.push(WeightedClause::new(
                    hole_clause(m, j, i, i2),
                    base_weight.clone(),
                ));
            }
        }
    }
    match variant {
        PigeonVariant::SoftWithEmpty => {
            entries.push(WeightedClause::new(
                Clause::empty(),
                Weight::finite((m * m + m) as i64),
            ));
        }
        PigeonVariant::SoftWithUnits => {
            for v in 1..=n_vars {
                entries.push(WeightedClause::new(
                    Clause::from_lits([Lit::new(Var(v), true)]).unwrap(),
                    Weight::one(),
                ));
                entries.push(WeightedClause::new(
                    Clause::from_lits([Lit::new(Var(v), false)]).unwrap(),
                    Weight::one(),
                ));
            }
        }
        _ => {}
    }
    Ok(PigeonInstance {
        m,
        variant,
        formula: Formula::normalize(n_vars, entries),
    })
}

/// Dual-rail encoding of a hard formula over `x1..xs` into a horn MaxSAT
/// formula over `n1..ns, p1..ps` with `n_i = i` and `p_i = s + i`.
///
/// Positive literals map to `!n_i`, negative to `!p_i`; each variable adds
/// `(p_i,1)`, `(n_i,1)` and the hard exclusion `(!p_i | !n_i)`.
pub fn dual_rail_encode(f: &Formula) -> Result<Formula, GeneratorError> {
    for (clause, weight) in f.iter() {
        if !weight.is_infinite() {
            return Err(GeneratorError::SoftInput(clause.clone()));
        }
    }
    let s = f.n_vars();
    let mut entries = Vec::new();
    for (clause, _) in f.iter() {
        let mapped = Clause::from_lits(clause.lits().iter().map(|l| {
            let i = l.var().index();
            if l.is_positive() {
                Lit::new(Var(i), false) // !n_i
            } else {
                Lit::new(Var(s + i), false) // !p_i
            }
        }))
        .expect("mapping preserves distinct variables");
        entries.push(WeightedClause::new(mapped, Weight::Infinite));
    }
    for i in 1..=s {
        entries.push(WeightedClause::new(
            Clause::from_lits([Lit::new(Var(s + i), true)]).unwrap(),
            Weight::one(),
        ));
        entries.push(WeightedClause::new(
            Clause::from_lits([Lit::new(Var(i), true)]).unwrap(),
            Weight::one(),
        ));
        entries.push(WeightedClause::new(
            Clause::from_lits([Lit::new(Var(s + i), false), Lit::new(Var(i), false)]).unwrap(),
            Weight::Infinite,
        ));
    }
    Ok(Formula::normalize(2 * s, entries))
}

#[derive(Debug, Clone, Copy)]
pub struct RandomSpec {
    pub vars: u32,
    pub clauses: usize,
    pub max_weight: u64,
    pub hard_fraction: f64,
    pub seed: u64,
}

/// Seeded random formula: clause widths 1..=3, duplicate clauses rejected.
/// Identical spec, identical formula.
pub fn random_formula(spec: &RandomSpec) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut chosen: Vec<Clause> = Vec::new();
    let mut entries = Vec::new();
    if spec.vars == 0 {
        return Formula::empty(0);
    }
    let max_width = spec.vars.min(3);
    'outer: for _ in 0..spec.clauses {
        for _attempt in 0..1000 {
            let width = rng.gen_range(1..=max_width);
            let mut vars: Vec<u32> = Vec::with_capacity(width as usize);
            while vars.len() < width as usize {
                let v = rng.gen_range(1..=spec.vars);
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
            let clause =
                Clause::from_lits(vars.iter().map(|&v| Lit::new(Var(v), rng.gen_bool(0.5))))
                    .expect("distinct variables");
            if chosen.contains(&clause) {
                continue;
            }
            let weight = if rng.gen_bool(spec.hard_fraction) {
                Weight::Infinite
            } else {
                Weight::finite(rng.gen_range(1..=spec.max_weight.max(1)) as i64)
            };
            chosen.push(clause.clone());
            entries.push(WeightedClause::new(clause, weight));
            continue 'outer;
        }
        break;
    }
    Formula::normalize(spec.vars, entries)
}
