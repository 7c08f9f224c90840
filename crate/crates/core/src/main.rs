//! Command-line front end.
//!
//! Exit codes are a stable contract: 0 for success or a valid/entailed
//! verdict, 1 for invalid proofs or failed entailments, 2 for usage and
//! format errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use maxres::builders;
use maxres::circular::{check_circular, parse_cir, write_cir};
use maxres::formula::{Clause, Formula, Lit, WeightedClause};
use maxres::generators::{dual_rail_encode, gen_pigeonhole, PigeonVariant};
use maxres::oracle::{entails_by_reduction, entails_pointwise, maxsat_bruteforce, OracleConfig};
use maxres::proof::check_proof;
use maxres::trace;
use maxres::translate::{circular_to_ressv, ressv_to_circular};
use maxres::wcnf;
use maxres::weight::Weight;

const JSON_SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "maxres", version, about = "MaxSAT proof system engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args)]
struct GlobalArgs {
    /// Largest universe the brute-force oracle will enumerate.
    #[arg(long, global = true, default_value_t = 24)]
    oracle_bound: u32,
    /// Accept negative weights in WCNF input (proof intermediates).
    #[arg(long, global = true)]
    allow_negative: bool,
    /// Emit a machine-readable verdict object.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a pigeonhole-family instance.
    Gen {
        /// Variant: php, sphp, sphp0 or sphp1.
        variant: String,
        /// Number of holes.
        #[arg(short)]
        m: u32,
        /// Output file (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exact optimum of a WCNF instance by enumeration.
    Oracle { wcnf: PathBuf },
    /// Check a proof trace against a WCNF instance.
    Check { wcnf: PathBuf, proof: PathBuf },
    /// Check a circular proof with its flow.
    CircularCheck { cir: PathBuf },
    /// Emit a refutation of a pigeonhole-family instance.
    Refute {
        /// Variant: php, sphp, sphp0 or sphp1.
        variant: String,
        /// Number of holes.
        #[arg(short)]
        m: u32,
        /// Output proof file (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Translate between circular proofs and refutation traces.
    Translate {
        /// Input file: a .cir file with --to-ressv, a .proof with --to-circular.
        input: PathBuf,
        #[arg(long, conflicts_with = "to_circular")]
        to_ressv: bool,
        #[arg(long)]
        to_circular: bool,
        /// The WCNF the proof starts from (defaults to the trace header).
        #[arg(long)]
        wcnf: Option<PathBuf>,
        /// Output file (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Where to write the start formula of a generated refutation.
        #[arg(long)]
        wcnf_out: Option<PathBuf>,
    },
    /// Dual-rail encode a hard WCNF instance.
    Dualrail {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Probe unit literals for a lower bound and emit the assembled proof.
    Probe {
        wcnf: PathBuf,
        /// Unit literals as signed integers, probed at weight 1 each.
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        units: Vec<i64>,
        /// Output proof file (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide whether one WCNF formula entails another.
    Entails {
        premise: PathBuf,
        conclusion: PathBuf,
        /// Cross-check the reduction against direct pointwise comparison.
        #[arg(long)]
        verify: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_wcnf(path: &Path, global: &GlobalArgs) -> Result<Formula> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    wcnf::parse(
        &text,
        wcnf::ParseOptions {
            allow_negative: global.allow_negative,
        },
    )
    .map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn write_out(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_variant(name: &str) -> Result<PigeonVariant> {
    PigeonVariant::from_cli_name(name)
        .ok_or_else(|| anyhow!("unknown variant `{name}` (expected php, sphp, sphp0 or sphp1)"))
}

fn weight_json(w: &Weight) -> serde_json::Value {
    json!(w.to_string())
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let global = &cli.global;
    let oracle_cfg = OracleConfig {
        bound: global.oracle_bound,
    };
    match &cli.command {
        Command::Gen { variant, m, output } => {
            let variant = parse_variant(variant)?;
            let inst = gen_pigeonhole(variant, *m)?;
            write_out(output.as_deref(), &wcnf::write(&inst.formula))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { wcnf: path } => {
            let f = read_wcnf(path, global)?;
            let r = maxsat_bruteforce(&f, &oracle_cfg)?;
            let witness: Vec<i64> = r.witness.to_lits().iter().map(|l| l.to_dimacs()).collect();
            if global.json {
                println!(
                    "{}",
                    json!({
                        "schema_version": JSON_SCHEMA_VERSION,
                        "command": "oracle",
                        "optimum": weight_json(&r.optimum),
                        "witness": witness,
                        "assignments_checked": r.assignments_checked,
                    })
                );
            } else {
                println!("optimum: {}", r.optimum);
                let parts: Vec<String> = witness.iter().map(|v| v.to_string()).collect();
                println!("witness: {}", parts.join(" "));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            wcnf: wcnf_path,
            proof,
        } => {
            let f = read_wcnf(wcnf_path, global)?;
            let text = std::fs::read_to_string(proof)
                .with_context(|| format!("reading {}", proof.display()))?;
            let parsed = trace::parse(&text).map_err(|e| anyhow!("{}: {e}", proof.display()))?;
            let proof = parsed.into_proof(f);
            let verdict = check_proof(&proof);
            // proof length counts rule applications; merges are free and
            // reported separately off the graph
            let merges = if verdict.valid {
                maxres::graph::build_graph(&proof)
                    .map(|g| g.merge_node_count())
                    .unwrap_or(0)
            } else {
                0
            };
            if global.json {
                println!(
                    "{}",
                    json!({
                        "schema_version": JSON_SCHEMA_VERSION,
                        "command": "check",
                        "valid": verdict.valid,
                        "length": verdict.length,
                        "merges": merges,
                        "derived_weight": verdict.derived_weight.as_ref().map(weight_json),
                        "failure": verdict.failure.as_ref().map(|f| f.to_string()),
                    })
                );
            } else if verdict.valid {
                match (&proof.claimed_target, &verdict.derived_weight) {
                    (Some(t), Some(w)) => println!(
                        "valid, target ({}, {}) with derived weight {w} ({} steps, {merges} merges)",
                        t.clause, t.weight, verdict.length
                    ),
                    _ => println!("valid ({} steps, {merges} merges)", verdict.length),
                }
            } else {
                println!(
                    "invalid: {}",
                    verdict
                        .failure
                        .as_ref()
                        .map(|f| f.to_string())
                        .unwrap_or_default()
                );
            }
            Ok(if verdict.valid {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::CircularCheck { cir } => {
            let text = std::fs::read_to_string(cir)
                .with_context(|| format!("reading {}", cir.display()))?;
            let (pre, flow) = parse_cir(&text).map_err(|e| anyhow!("{}: {e}", cir.display()))?;
            let verdict = check_circular(&pre, &flow);
            if global.json {
                println!(
                    "{}",
                    json!({
                        "schema_version": JSON_SCHEMA_VERSION,
                        "command": "circular-check",
                        "valid": verdict.valid,
                        "failure": verdict.failure.as_ref().map(|f| f.to_string()),
                    })
                );
            } else if verdict.valid {
                println!("valid circular proof");
            } else {
                println!(
                    "invalid: {}",
                    verdict
                        .failure
                        .as_ref()
                        .map(|f| f.to_string())
                        .unwrap_or_default()
                );
            }
            Ok(if verdict.valid {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Refute { variant, m, output } => {
            let variant = parse_variant(variant)?;
            let proof = builders::refutation(variant, *m)?;
            let verdict = check_proof(&proof);
            if !verdict.valid {
                bail!("internal error: emitted refutation does not check");
            }
            let header = format!("{}-m{}.wcnf", variant.cli_name(), m);
            write_out(output.as_deref(), &trace::write(&proof, &header))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Translate {
            input,
            to_ressv,
            to_circular,
            wcnf: wcnf_override,
            output,
            wcnf_out,
        } => {
            if *to_ressv == *to_circular {
                bail!("pass exactly one of --to-ressv / --to-circular");
            }
            let text = std::fs::read_to_string(input)
                .with_context(|| format!("reading {}", input.display()))?;
            if *to_ressv {
                let (pre, flow) =
                    parse_cir(&text).map_err(|e| anyhow!("{}: {e}", input.display()))?;
                let proof = match circular_to_ressv(&pre, &flow) {
                    Ok(p) => p,
                    Err(e) => {
                        eprintln!("translation failed: {e}");
                        return Ok(ExitCode::from(1));
                    }
                };
                let wcnf_path = wcnf_out.clone().unwrap_or_else(|| {
                    output
                        .clone()
                        .map(|p| p.with_extension("wcnf"))
                        .unwrap_or_else(|| PathBuf::from("translated.wcnf"))
                });
                std::fs::write(&wcnf_path, wcnf::write(&proof.initial))
                    .with_context(|| format!("writing {}", wcnf_path.display()))?;
                let header = wcnf_path.display().to_string();
                write_out(output.as_deref(), &trace::write(&proof, &header))?;
                Ok(ExitCode::SUCCESS)
            } else {
                let parsed =
                    trace::parse(&text).map_err(|e| anyhow!("{}: {e}", input.display()))?;
                let wcnf_path = match wcnf_override {
                    Some(p) => p.clone(),
                    None => {
                        let referenced = PathBuf::from(&parsed.wcnf_ref);
                        if referenced.is_absolute() {
                            referenced
                        } else {
                            input.parent().unwrap_or(Path::new(".")).join(referenced)
                        }
                    }
                };
                let f = read_wcnf(&wcnf_path, global)?;
                let proof = parsed.into_proof(f);
                let (pre, flow) = match ressv_to_circular(&proof) {
                    Ok(r) => r,
                    Err(e) => {
                        eprintln!("translation failed: {e}");
                        return Ok(ExitCode::from(1));
                    }
                };
                write_out(output.as_deref(), &write_cir(&pre, &flow))?;
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Dualrail { input, output } => {
            let f = read_wcnf(input, global)?;
            let encoded = dual_rail_encode(&f)?;
            write_out(output.as_deref(), &wcnf::write(&encoded))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Probe {
            wcnf: path,
            units,
            output,
        } => {
            let f = read_wcnf(path, global)?;
            if units.is_empty() {
                bail!("--units needs at least one literal");
            }
            let lits: Vec<Lit> = units
                .iter()
                .map(|&v| Lit::from_dimacs(v).ok_or_else(|| anyhow!("bad literal {v}")))
                .collect::<Result<_>>()?;
            let u = Formula::normalize(
                f.n_vars(),
                lits.iter().map(|&l| {
                    WeightedClause::new(Clause::from_lits([l]).expect("unit"), Weight::one())
                }),
            );
            match assemble_probe(&f, &u) {
                Ok((proof, bound)) => {
                    let verdict = check_proof(&proof);
                    if !verdict.valid {
                        bail!("internal error: assembled probe proof does not check");
                    }
                    if global.json {
                        println!(
                            "{}",
                            json!({
                                "schema_version": JSON_SCHEMA_VERSION,
                                "command": "probe",
                                "lower_bound": weight_json(&bound),
                                "steps": proof.steps.len(),
                            })
                        );
                    } else {
                        println!("lower bound: {bound} ({} steps)", proof.steps.len());
                    }
                    if output.is_some() {
                        let header = path.display().to_string();
                        write_out(output.as_deref(), &trace::write(&proof, &header))?;
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("probe failed: {e}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Entails {
            premise,
            conclusion,
            verify,
        } => {
            let f = read_wcnf(premise, global)?;
            let g = read_wcnf(conclusion, global)?;
            let outcome = entails_by_reduction(&f, &g, &oracle_cfg)?;
            if *verify {
                let direct = entails_pointwise(&f, &g, &oracle_cfg)?;
                if direct != outcome.entailed {
                    bail!(
                        "reduction ({}) disagrees with direct comparison ({})",
                        outcome.entailed,
                        direct
                    );
                }
            }
            if global.json {
                println!(
                    "{}",
                    json!({
                        "schema_version": JSON_SCHEMA_VERSION,
                        "command": "entails",
                        "entailed": outcome.entailed,
                        "maxsat": weight_json(&outcome.maxsat),
                        "bound": weight_json(&outcome.bound),
                        "gamma": weight_json(&outcome.gamma),
                    })
                );
            } else if outcome.entailed {
                println!("entailed ({} >= {})", outcome.maxsat, outcome.bound);
            } else {
                println!("not entailed ({} < {})", outcome.maxsat, outcome.bound);
            }
            Ok(if outcome.entailed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

// Discover the two resolution derivations by unit saturation and assemble
// the probing proof around them.
fn assemble_probe(f: &Formula, u: &Formula) -> Result<(maxres::Proof, Weight)> {
    let k = u.roof();
    let (d1, derived1) = builders::unit_saturate(&f.union(u));
    if derived1.weight < k {
        bail!(
            "saturation reached only {} on the empty clause, probe needs {k}",
            derived1.weight
        );
    }
    // deduct exactly k; the remainder is the formula d2 starts from
    let verdict = check_proof(&d1);
    let mut g = verdict
        .final_formula
        .ok_or_else(|| anyhow!("saturation proof failed to replay"))?;
    g.add(Clause::empty(), k.negated().expect("finite probe roof"));
    let d1 = maxres::Proof {
        claimed_target: Some(WeightedClause::new(Clause::empty(), k.clone())),
        ..d1
    };
    let u_neg = maxres::formula::negate_formula(u)?;
    let (d2, derived2) = builders::unit_saturate(&g.union(&u_neg));
    if !derived2.weight.is_positive() {
        bail!("no lower bound found: second saturation derived nothing");
    }
    let proof = builders::soft_probe(f, u, &d1, &d2)?;
    Ok((proof, derived2.weight))
}
