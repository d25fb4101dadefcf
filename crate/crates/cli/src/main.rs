//! `meettree`: batch front end. Every verb prints one JSON report on stdout;
//! diagnostics go to stderr.
//!
//! Exit codes: 0 when a verdict was computed (negative verdicts included),
//! 1 for input errors, 2 when the search budget ran out.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use meettree::amalg::{self, AmalgProblem, BruteForceOutcome};
use meettree::json::{map_on_tree, AutJson, TreeJson};
use meettree::nopair;
use meettree::pauto::orbit_reports;
use meettree::pec::{self, PecVerdict};
use meettree::tree::{canonical_form, enumerate_trees};
use meettree::{Budget, Error, PartialAutomorphism};

#[derive(Parser)]
#[command(name = "meettree", version, about = "Finite meet-trees with partial automorphisms")]
struct Cli {
    /// Seed for verbs that sample.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print elapsed time to stderr.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// List every tree up to the given size by canonical code.
    Enumerate {
        #[arg(long)]
        max_size: usize,
    },
    /// Orbit decomposition and classes of a partial automorphism.
    Classify {
        /// Automorphism JSON, or tree JSON when --map is given.
        #[arg(long = "in")]
        input: PathBuf,
        /// Map as `[["a","b"], ...]` or `{"map": [...]}`.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Amalgamate two automorphisms over a common base, matching labels.
    Amalgamate {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// Look for a missing witness within the given number of extension steps.
    PecCheck {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Extend until the witness check passes.
    PecClose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = pec::DEFAULT_CAP)]
        cap: usize,
    },
    /// Check that each of the next steps has a single possible type.
    CertifyDetermined {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 3)]
        steps: usize,
    },
    /// Run the irreconcilable-pair construction from the seed `0 ↦ -1`.
    NopairDemo,
    /// Search small chains for a common extension of the demo's two pairs.
    NopairExhaust {
        #[arg(long, default_value_t = 9)]
        max_size: usize,
    },
    /// Meet and orbit laws on all small trees plus seeded guided orbits.
    CheckLaws {
        #[arg(long)]
        max_size: usize,
        #[arg(long, default_value_t = 200)]
        walks: usize,
        #[arg(long, default_value_t = 10)]
        walk_len: usize,
    },
    /// Exhaustive amalgam search for the bounded-arity obstruction.
    Nonap {
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        max_size: usize,
        /// Also search without the arity bound.
        #[arg(long)]
        unbounded: bool,
    },
}

#[derive(Serialize)]
struct RunReport {
    command: &'static str,
    inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    verdict: Value,
    budget_used: u64,
}

enum Failure {
    Input(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } | Error::IterationCap { .. } => Failure::Budget(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

struct Inputs(BTreeMap<String, String>);

impl Inputs {
    fn read(&mut self, name: &str, path: &Path) -> Result<String, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        self.0.insert(name.to_string(), hex::encode(Sha256::digest(text.as_bytes())));
        Ok(text)
    }

    fn aut(&mut self, name: &str, path: &Path) -> Result<PartialAutomorphism, Failure> {
        let text = self.read(name, path)?;
        let j: AutJson = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        j.to_pauto().map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn aut_json(p: &PartialAutomorphism) -> Value {
    to_json(&AutJson::from_pauto(p))
}

fn linear_json(p: &nopair::LinearPair) -> Value {
    let m = |g: &nopair::LinearMap| g.iter().map(|(x, y)| [x.to_string(), y.to_string()]).collect::<Vec<_>>();
    json!({ "g1": m(&p.g1), "g2": m(&p.g2), "anchor": p.anchor.to_string() })
}

fn evaluation_json(e: &Option<nopair::Evaluation<nopair::Q>>) -> Value {
    match e {
        Some(e) => json!({
            "path": e.path.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "stepped": e.stepped.to_string(),
            "holds": e.holds,
        }),
        None => Value::Null,
    }
}

fn run(cli: &Cli, budget: &Budget) -> Result<RunReport, Failure> {
    let mut inputs = Inputs(BTreeMap::new());
    let mut seed = None;
    let (command, verdict) = match &cli.verb {
        Verb::Enumerate { max_size } => {
            let trees = enumerate_trees(*max_size, budget)?;
            let mut by_size: BTreeMap<usize, Vec<String>> = BTreeMap::new();
            for t in &trees {
                by_size.entry(t.len()).or_default().push(canonical_form(t));
            }
            let counts: BTreeMap<usize, usize> = by_size.iter().map(|(k, v)| (*k, v.len())).collect();
            ("enumerate", json!({ "total": trees.len(), "counts": counts, "codes": by_size }))
        }
        Verb::Classify { input, map } => {
            let p = match map {
                None => inputs.aut("in", input)?,
                Some(mp) => {
                    let text = inputs.read("in", input)?;
                    let tree = serde_json::from_str::<TreeJson>(&text)
                        .map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?
                        .to_tree()
                        .map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?;
                    let mtext = inputs.read("map", mp)?;
                    let v: Value = serde_json::from_str(&mtext).map_err(|e| Failure::Input(format!("{}: {e}", mp.display())))?;
                    let pairs_v = v.get("map").cloned().unwrap_or(v);
                    let pairs: Vec<(String, String)> =
                        serde_json::from_value(pairs_v).map_err(|e| Failure::Input(format!("{}: {e}", mp.display())))?;
                    map_on_tree(&tree, &pairs).map_err(|e| Failure::Input(format!("{}: {e}", mp.display())))?
                }
            };
            ("classify", json!({ "orbits": orbit_reports(&p) }))
        }
        Verb::Amalgamate { base, left, right } => {
            let p = AmalgProblem { base: inputs.aut("base", base)?, left: inputs.aut("left", left)?, right: inputs.aut("right", right)? };
            let s = amalg::amalgamate_total(&p)?;
            let emb = |e: &meettree::tree::Embedding, side: &PartialAutomorphism| -> BTreeMap<String, String> {
                side.tree().elements().map(|x| (side.tree().label(x).to_string(), s.amalgam.tree().label(e.map[x]).to_string())).collect()
            };
            (
                "amalgamate",
                json!({
                    "amalgam": aut_json(&s.amalgam),
                    "left_embedding": emb(&s.left_embedding, &p.left),
                    "right_embedding": emb(&s.right_embedding, &p.right),
                    "provenance": s.provenance,
                }),
            )
        }
        Verb::PecCheck { input, depth } => {
            let p = inputs.aut("in", input)?;
            let v = match pec::check_pec(&p, *depth, budget)? {
                PecVerdict::Pass { depth, explored } => json!({ "outcome": "pass", "depth": depth, "explored": explored }),
                PecVerdict::Fail(cx) => json!({
                    "outcome": "fail",
                    "query": cx.query,
                    "needed": cx.needed,
                    "found": cx.found,
                    "trace": cx.trace,
                    "extension": aut_json(&cx.extension),
                }),
            };
            ("pec-check", v)
        }
        Verb::PecClose { input, depth, cap } => {
            let p = inputs.aut("in", input)?;
            let q = pec::pec_close(&p, *depth, *cap, budget)?;
            let check = pec::check_pec(&q, *depth, budget)?.passed();
            (
                "pec-close",
                json!({
                    "closed": aut_json(&q),
                    "orbits": orbit_reports(&q),
                    "passes_check": check,
                    "quasi_cycles_kept": pec::quasi_cycles(&q).len(),
                }),
            )
        }
        Verb::CertifyDetermined { input, steps } => {
            let p = inputs.aut("in", input)?;
            ("certify-determined", to_json(&pec::determinism_certificate(&p, *steps)?))
        }
        Verb::NopairDemo => {
            let r = nopair::irreconcilable_extensions(&nopair::seed_pair())?;
            let t = meettree::tree::MeetTree::from_edges(&["b", "a"], &[("b", "a")]).expect("two-point chain");
            let base = PartialAutomorphism::from_labels(&t, &[("a", "b")])?;
            let lift = nopair::lift_to_tree(&base, &base, 1)?;
            (
                "nopair-demo",
                json!({
                    "seed": linear_json(&nopair::seed_pair()),
                    "minimal": linear_json(&r.minimal),
                    "reductions": r.reductions,
                    "upper": linear_json(&r.upper),
                    "lower": linear_json(&r.lower),
                    "word": { "generators": r.word.word, "step": r.word.step, "atom": r.word.describe(), "length": r.word.len() },
                    "evaluation": {
                        "upper": evaluation_json(&r.word.evaluate_linear(&r.upper)),
                        "lower": evaluation_json(&r.word.evaluate_linear(&r.lower)),
                    },
                    "tree_lift": {
                        "upper": { "g1": aut_json(&lift.upper.g1), "g2": aut_json(&lift.upper.g2) },
                        "lower": { "g1": aut_json(&lift.lower.g1), "g2": aut_json(&lift.lower.g2) },
                        "anchor": lift.tree.label(lift.upper.anchor),
                    },
                }),
            )
        }
        Verb::NopairExhaust { max_size } => {
            let r = nopair::irreconcilable_extensions(&nopair::seed_pair())?;
            let split = nopair::common_extension(&r.upper, &r.lower, *max_size);
            let control = nopair::common_extension(&r.minimal, &r.upper, *max_size);
            budget.charge(split.placements + control.placements)?;
            (
                "nopair-exhaust",
                json!({
                    "common_extension_found": split.found.is_some(),
                    "search": split,
                    "control_minimal_vs_upper": control,
                }),
            )
        }
        Verb::CheckLaws { max_size, walks, walk_len } => {
            seed = Some(cli.seed);
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut pick = |n: usize| rng.random_range(0..n.max(1));
            let r = meettree::laws::check_laws(*max_size, *walks, *walk_len, &mut pick, budget)?;
            ("check-laws", json!({ "clean": r.violations.is_empty(), "report": r }))
        }
        Verb::Nonap { arity, max_size, unbounded } => {
            if *arity < 2 {
                return Err(Failure::Input("--arity must be at least 2".into()));
            }
            let (p, bounded) = amalg::nonap_witness(*arity, *max_size, budget)?;
            let describe = |o: &BruteForceOutcome| match o {
                BruteForceOutcome::Exhausted(rep) => json!({ "verdict": "no amalgam", "report": rep }),
                BruteForceOutcome::Found { solution, report } => json!({
                    "verdict": "amalgam found",
                    "amalgam": aut_json(&solution.amalgam),
                    "report": report,
                }),
            };
            let mut v = json!({ "arity_bound": *arity, "bounded": describe(&bounded) });
            if *unbounded {
                v["unbounded"] = describe(&amalg::brute_force_amalgam_k1(&p, *max_size, None, budget)?);
            }
            ("nonap", v)
        }
    };
    Ok(RunReport { command, inputs: inputs.0, seed, verdict, budget_used: budget.used() })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let budget = Budget::from_env();
    let start = Instant::now();
    let out = run(&cli, &budget);
    if cli.timing {
        eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    }
    match out {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
