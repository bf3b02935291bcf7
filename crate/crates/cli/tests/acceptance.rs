//! Acceptance criteria, one PASS/FAIL/SKIP line each. Exits nonzero if any criterion fails.
//!
//! The corpus criterion runs only when `ATOMIC_SETS_CORPUS` names a directory
//! holding the public feature-model benchmark instances.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use atomic_sets::analysis::AnalysisError;
use atomic_sets::oracle::{oracle_atomic_sets, verify_elimination, Verification};
use atomic_sets::random::{fuzz_corpus, random_satisfiable_cnf, RandomCnfConfig};
use atomic_sets::{eliminate, gnt_atomic_sets, parse_dimacs, write_dimacs, AtomicSetKind, CnfFormula, GntOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const FUZZ_SEED: u64 = 20_240_501;
const FUZZ_COUNT: usize = 500;
const ORACLE_LIMIT: u32 = 25;
const EXAMPLE_MAX_SECONDS: f64 = 1.0;
/// Share of instances on which the augmented run may not exceed the plain run's SAT calls.
const MIN_CHEAPER_SHARE: f64 = 0.95;
const CLAUSE_TOLERANCE: f64 = 0.02;
const CORPUS_BUDGET: Duration = Duration::from_secs(600);
const CORPUS_ENV: &str = "ATOMIC_SETS_CORPUS";

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_atomsets"))
}

fn example_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/example.cnf")
}

fn analyze_json(path: &Path) -> Result<Value, String> {
    let out = bin().args(["analyze", "--json"]).arg(path).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn example_exact() -> Verdict {
    let start = Instant::now();
    let doc = match analyze_json(&example_path()) {
        Ok(d) => d,
        Err(e) => return Verdict::Fail(e),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let expected = serde_json::json!([{"kind": "core", "members": [1, 2]}, {"kind": "regular", "members": [3, 5]}]);
    if doc["atomic_sets"] != expected {
        return Verdict::Fail(format!("sets {}", doc["atomic_sets"]));
    }
    if elapsed >= EXAMPLE_MAX_SECONDS {
        return Verdict::Fail(format!("took {elapsed:.3} s"));
    }
    Verdict::Pass(format!("core {{A,B}}, regular {{C,E}} in {elapsed:.3} s"))
}

struct FuzzRun {
    corpus: Vec<CnfFormula>,
}

impl FuzzRun {
    fn oracle_equality(&self) -> Verdict {
        let mut with_regular = 0;
        let mut with_backbone_set = 0;
        for (i, f) in self.corpus.iter().enumerate() {
            let gnt = match gnt_atomic_sets(f, &GntOptions::default()) {
                Ok(r) => r,
                Err(e) => return Verdict::Fail(format!("instance {i}: {e}")),
            };
            let oracle = match oracle_atomic_sets(f, ORACLE_LIMIT) {
                Ok(r) => r,
                Err(e) => return Verdict::Fail(format!("instance {i}: oracle: {e}")),
            };
            if !gnt.same_result(&oracle) {
                return Verdict::Fail(format!("instance {i}: {:?} vs {:?}", gnt.sets, oracle.sets));
            }
            with_regular += usize::from(gnt.regular_sets().next().is_some());
            with_backbone_set += usize::from(gnt.sets.iter().any(|s| s.kind != AtomicSetKind::Regular));
        }
        Verdict::Pass(format!(
            "{} instances equal to enumeration ({with_regular} with regular sets, {with_backbone_set} with core/dead sets)",
            self.corpus.len()
        ))
    }

    fn augmentation_neutrality(&self) -> Verdict {
        let full = GntOptions::default();
        let variants = [
            GntOptions { inline_backbone: false, ..full.clone() },
            GntOptions { refutation_pruning: false, ..full.clone() },
            GntOptions { confinement: false, ..full.clone() },
            GntOptions::unaugmented(),
        ];
        let mut cheaper = 0usize;
        let (mut calls_full, mut calls_plain) = (0u64, 0u64);
        for (i, f) in self.corpus.iter().enumerate() {
            let reference = gnt_atomic_sets(f, &full).expect("checked by the oracle criterion");
            let mut plain_calls = 0;
            for opts in &variants {
                let other = match gnt_atomic_sets(f, opts) {
                    Ok(r) => r,
                    Err(e) => return Verdict::Fail(format!("instance {i}: {e}")),
                };
                if !reference.same_result(&other) {
                    return Verdict::Fail(format!("instance {i}: report differs with {opts:?}"));
                }
                plain_calls = other.stats.sat_calls;
            }
            cheaper += usize::from(reference.stats.sat_calls <= plain_calls);
            calls_full += reference.stats.sat_calls;
            calls_plain += plain_calls;
        }
        let share = cheaper as f64 / self.corpus.len() as f64;
        let detail = format!(
            "identical reports; augmented calls <= plain on {:.1}% ({calls_full} vs {calls_plain} calls total)",
            share * 100.0
        );
        if share >= MIN_CHEAPER_SHARE {
            Verdict::Pass(detail)
        } else {
            Verdict::Fail(detail)
        }
    }

    fn elimination_equivalence(&self) -> Verdict {
        let mut removed = 0u64;
        for (i, f) in self.corpus.iter().enumerate() {
            let report = gnt_atomic_sets(f, &GntOptions::default()).expect("checked by the oracle criterion");
            let (reduced, map) = match eliminate(f, &report) {
                Ok(r) => r,
                Err(e) => return Verdict::Fail(format!("instance {i}: {e}")),
            };
            match verify_elimination(f, &reduced, &map, ORACLE_LIMIT) {
                Ok(Verification::Pass) => {}
                Ok(Verification::Fail(d)) => return Verdict::Fail(format!("instance {i}: {d}")),
                Err(e) => return Verdict::Fail(format!("instance {i}: {e}")),
            }
            removed += u64::from(f.var_count() - reduced.var_count());
        }
        Verdict::Pass(format!("model counts and cardinalities preserved; {removed} variables eliminated"))
    }

    fn fixed_point(&self) -> Verdict {
        for (i, f) in self.corpus.iter().enumerate() {
            let report = gnt_atomic_sets(f, &GntOptions::default()).expect("checked by the oracle criterion");
            let (reduced, _) = eliminate(f, &report).expect("checked by the elimination criterion");
            match gnt_atomic_sets(&reduced, &GntOptions::default()) {
                Ok(r) if r.sets.is_empty() && r.backbone.is_empty() => {}
                Ok(r) => return Verdict::Fail(format!("instance {i}: {:?} {:?}", r.sets, r.backbone)),
                Err(e) => return Verdict::Fail(format!("instance {i}: {e}")),
            }
        }
        Verdict::Pass("re-analysis finds no sets and no backbone".to_string())
    }
}

struct Frozen {
    stem: &'static str,
    vars: u32,
    clauses: usize,
    sets: usize,
    set_vars: usize,
    vars_after: u32,
    clauses_after: usize,
}

const TABLES: [Frozen; 3] = [
    Frozen { stem: "busybox_1.18.0", vars: 854, clauses: 1163, sets: 21, set_vars: 83, vars_after: 790, clauses_after: 542 },
    Frozen {
        stem: "financialservices01",
        vars: 771,
        clauses: 7238,
        sets: 58,
        set_vars: 184,
        vars_after: 645,
        clauses_after: 6736,
    },
    Frozen { stem: "embtoolkit", vars: 1179, clauses: 5414, sets: 27, set_vars: 618, vars_after: 585, clauses_after: 3341 },
];

fn corpus_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let Ok(entries) = fs::read_dir(&d) else { continue };
        for e in entries.flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "cnf" || x == "dimacs") {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

fn corpus_tables() -> Verdict {
    let Some(dir) = std::env::var_os(CORPUS_ENV) else {
        return Verdict::Skip(format!("set {CORPUS_ENV} to the benchmark corpus directory"));
    };
    let files = corpus_files(Path::new(&dir));
    let options = GntOptions { time_budget: Some(CORPUS_BUDGET), ..GntOptions::default() };
    let mut problems = Vec::new();
    let mut notes = Vec::new();
    for row in &TABLES {
        let Some(path) = files.iter().find(|p| p.file_stem().is_some_and(|s| s == row.stem)) else {
            problems.push(format!("{}: not found", row.stem));
            continue;
        };
        let f = match fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|t| parse_dimacs(&t).map_err(|e| e.to_string())) {
            Ok(f) => f,
            Err(e) => {
                problems.push(format!("{}: {e}", row.stem));
                continue;
            }
        };
        if f.var_count() != row.vars || f.clause_count() != row.clauses {
            notes.push(format!("{}: input is {}/{}, table {}/{}", row.stem, f.var_count(), f.clause_count(), row.vars, row.clauses));
        }
        let report = match gnt_atomic_sets(&f, &options) {
            Ok(r) => r,
            Err(e) => {
                problems.push(format!("{}: {e}", row.stem));
                continue;
            }
        };
        if report.sets.len() != row.sets || report.set_variables() != row.set_vars {
            problems.push(format!(
                "{}: {} sets / {} variables, expected {} / {}",
                row.stem,
                report.sets.len(),
                report.set_variables(),
                row.sets,
                row.set_vars
            ));
        }
        let (reduced, _) = match eliminate(&f, &report) {
            Ok(r) => r,
            Err(e) => {
                problems.push(format!("{}: {e}", row.stem));
                continue;
            }
        };
        if reduced.var_count() != row.vars_after {
            problems.push(format!("{}: {} variables after, expected {}", row.stem, reduced.var_count(), row.vars_after));
        }
        let deviation = (reduced.clause_count() as f64 - row.clauses_after as f64).abs() / row.clauses_after as f64;
        if deviation > CLAUSE_TOLERANCE {
            problems.push(format!(
                "{}: {} clauses after, expected {} +/- {:.0}%",
                row.stem,
                reduced.clause_count(),
                row.clauses_after,
                CLAUSE_TOLERANCE * 100.0
            ));
        }
    }
    for path in files.iter().filter(|p| !p.to_string_lossy().to_lowercase().contains("linux")) {
        let Ok(f) = fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|t| parse_dimacs(&t).map_err(|e| e.to_string())) else {
            continue;
        };
        if let Err(AnalysisError::TimeBudgetExceeded) = gnt_atomic_sets(&f, &options) {
            problems.push(format!("{}: exceeded {} s", path.display(), CORPUS_BUDGET.as_secs()));
        }
    }
    if problems.is_empty() {
        Verdict::Pass(format!("table rows reproduced; {} instances within budget {}", files.len(), notes.join("; ")))
    } else {
        Verdict::Fail(problems.join("; "))
    }
}

fn deterministic_json() -> Verdict {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    let cfg = RandomCnfConfig { min_vars: 80, max_vars: 80, min_ratio: 2.0, max_ratio: 2.0, min_width: 2, max_width: 3 };
    let mut rng = ChaCha8Rng::seed_from_u64(FUZZ_SEED);
    let Some(larger) = random_satisfiable_cnf(&mut rng, &cfg, 100) else {
        return Verdict::Fail("no satisfiable instance generated".to_string());
    };
    let larger_path = dir.path().join("random80.cnf");
    if let Err(e) = fs::write(&larger_path, write_dimacs(&larger)) {
        return Verdict::Fail(e.to_string());
    }
    for path in [example_path(), larger_path] {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let out = match bin().args(["analyze", "--json"]).arg(&path).output() {
                Ok(o) => o,
                Err(e) => return Verdict::Fail(e.to_string()),
            };
            let text = String::from_utf8_lossy(&out.stdout).into_owned();
            // drop the timing line, compare the rest byte for byte
            outputs.push(text.lines().filter(|l| !l.trim_start().starts_with("\"seconds\"")).collect::<Vec<_>>().join("\n"));
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            return Verdict::Fail(format!("{} differs between runs", path.display()));
        }
    }
    Verdict::Pass("two runs identical apart from seconds".to_string())
}

fn main() -> ExitCode {
    let corpus = fuzz_corpus(FUZZ_SEED, FUZZ_COUNT, &RandomCnfConfig::fuzz_default());
    let fuzz = FuzzRun { corpus };
    let criteria: Vec<Criterion> = vec![
        ("1 example analysis", Box::new(example_exact)),
        ("2 oracle fuzz campaign", Box::new(|| fuzz.oracle_equality())),
        ("3 augmentation neutrality", Box::new(|| fuzz.augmentation_neutrality())),
        ("4 elimination equivalence", Box::new(|| fuzz.elimination_equivalence())),
        ("5 elimination fixed point", Box::new(|| fuzz.fixed_point())),
        ("6 corpus tables (optional)", Box::new(corpus_tables)),
        ("7 deterministic json", Box::new(deterministic_json)),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Verdict::Pass(d) => println!("PASS criterion {name}: {d} [{secs:.2} s]"),
            Verdict::Skip(d) => println!("SKIP criterion {name}: {d}"),
            Verdict::Fail(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d} [{secs:.2} s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
