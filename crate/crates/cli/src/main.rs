//! `atomsets`: analyze, preprocess, verify and benchmark CNF formulas.

mod bench;
mod records;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context};
use atomic_sets::analysis::AnalysisError;
use atomic_sets::formula::DimacsError;
use atomic_sets::oracle::{self, OracleError, Verification};
use atomic_sets::random::{fuzz_corpus, RandomCnfConfig};
use atomic_sets::{eliminate, gnt_atomic_sets, parse_dimacs, write_dimacs, AtomicSetReport, CnfFormula, GntOptions, SolverKind};
use clap::{Args, Parser, Subcommand};

use records::{AnalysisRecord, AnalyzeDoc, ReductionRecord};

pub mod exit {
    pub const PARSE: u8 = 1;
    pub const UNSAT: u8 = 2;
    pub const TIMEOUT: u8 = 3;
    pub const WRITE: u8 = 4;
    pub const OVER_LIMIT: u8 = 5;
    pub const MISMATCH: u8 = 6;
}

/// An error together with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type CmdResult<T> = Result<T, Failure>;

pub trait WithCode<T> {
    fn code(self, code: u8) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> WithCode<T> for Result<T, E> {
    fn code(self, code: u8) -> CmdResult<T> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn fail<T>(code: u8, error: anyhow::Error) -> CmdResult<T> {
    Err(Failure { code, error })
}

#[derive(Parser)]
#[command(name = "atomsets", version, about = "Atomic-set analysis and elimination for CNF formulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report backbone and atomic sets of a DIMACS formula.
    Analyze {
        input: PathBuf,
        /// Emit a JSON document on stdout instead of the table.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        solving: SolvingArgs,
    },
    /// Eliminate atomic sets and backbone variables, writing the reduced formula and variable map.
    Preprocess {
        input: PathBuf,
        /// Reduced DIMACS output.
        #[arg(long)]
        out: PathBuf,
        /// Variable map output; defaults to `<out>.map`.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        solving: SolvingArgs,
    },
    /// Cross-check analysis and elimination against exhaustive enumeration.
    Verify {
        /// Formula to check; omit when using `--fuzz`.
        #[arg(required_unless_present = "fuzz")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = oracle::DEFAULT_LIMIT)]
        oracle_limit: u32,
        /// Check this many seeded random satisfiable formulas instead of a file.
        #[arg(long, conflicts_with = "input")]
        fuzz: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = SolverKind::default())]
        solver: SolverKind,
    },
    /// Analyze and preprocess every `.cnf`/`.dimacs` file in a directory.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Write the CSV table here and the JSON rows next to it (`.json`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print JSON rows on stdout instead of CSV.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        solving: SolvingArgs,
    },
}

#[derive(Args, Clone)]
struct SolvingArgs {
    /// Time budget per analysis, in seconds.
    #[arg(long, default_value = "600", value_parser = parse_seconds)]
    time_limit: Duration,
    #[arg(long, default_value_t = SolverKind::default())]
    solver: SolverKind,
}

impl SolvingArgs {
    fn options(&self) -> GntOptions {
        GntOptions { time_budget: Some(self.time_limit), solver: self.solver, ..GntOptions::default() }
    }
}

fn parse_seconds(s: &str) -> Result<Duration, String> {
    let secs: f64 = s.parse().map_err(|_| format!("`{s}` is not a number of seconds"))?;
    if !secs.is_finite() || secs < 0.0 {
        return Err(format!("`{s}` is not a non-negative number of seconds"));
    }
    Ok(Duration::from_secs_f64(secs))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { input, json, solving } => cmd_analyze(&input, json, &solving),
        Command::Preprocess { input, out, map, json, solving } => cmd_preprocess(&input, &out, map, json, &solving),
        Command::Verify { input, oracle_limit, fuzz, seed, solver } => {
            cmd_verify(input.as_deref(), oracle_limit, fuzz, seed, solver)
        }
        Command::Bench { dir, jobs, out, json, solving } => bench::run(&dir, jobs, out.as_deref(), json, &solving.options()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}

pub fn instance_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

pub fn load(path: &Path) -> CmdResult<CnfFormula> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).code(exit::PARSE)?;
    parse_dimacs(&text).map_err(|e: DimacsError| {
        // an empty clause is well-formed input that is trivially unsatisfiable
        let code = if e.is_empty_clause() { exit::UNSAT } else { exit::PARSE };
        Failure { code, error: anyhow!(e).context(format!("parsing {}", path.display())) }
    })
}

pub fn analysis_failure(e: AnalysisError) -> Failure {
    let code = match e {
        AnalysisError::UnsatisfiableInput => exit::UNSAT,
        AnalysisError::TimeBudgetExceeded => exit::TIMEOUT,
        _ => exit::PARSE,
    };
    Failure { code, error: e.into() }
}

pub fn analyze_timed(formula: &CnfFormula, options: &GntOptions) -> Result<(AtomicSetReport, Duration), AnalysisError> {
    let start = Instant::now();
    let report = gnt_atomic_sets(formula, options)?;
    Ok((report, start.elapsed()))
}

fn cmd_analyze(input: &Path, json: bool, solving: &SolvingArgs) -> CmdResult<()> {
    let formula = load(input)?;
    let (report, elapsed) = analyze_timed(&formula, &solving.options()).map_err(analysis_failure)?;
    let name = instance_name(input);
    if json {
        let doc = AnalyzeDoc::new(&name, &formula, &report, elapsed);
        println!("{}", serde_json::to_string_pretty(&doc).expect("plain data serializes"));
        return Ok(());
    }
    let record = AnalysisRecord::new(&name, &formula, &report, elapsed);
    let names = |vars: &mut dyn Iterator<Item = &atomic_sets::Var>| {
        let all: Vec<String> = vars.map(|&v| formula.display_var(v)).collect();
        if all.is_empty() {
            "-".to_string()
        } else {
            all.join(" ")
        }
    };
    println!("{}: {} variables, {} clauses", name, record.vars, record.clauses);
    println!("core: {}", names(&mut report.backbone.core.iter()));
    println!("dead: {}", names(&mut report.backbone.dead.iter()));
    println!(
        "{} atomic sets, {} variables in sets (mean {:.2}, max {})",
        record.sets, record.set_vars, record.mean, record.max
    );
    for set in &report.sets {
        println!("  {:<8} {}", set.kind.as_str(), names(&mut set.members.iter()));
    }
    println!("sat calls: {}, {:.3} s", record.sat_calls, record.seconds);
    Ok(())
}

fn cmd_preprocess(input: &Path, out: &Path, map: Option<PathBuf>, json: bool, solving: &SolvingArgs) -> CmdResult<()> {
    let formula = load(input)?;
    let (report, _) = analyze_timed(&formula, &solving.options()).map_err(analysis_failure)?;
    let (reduced, varmap) = eliminate(&formula, &report).code(exit::PARSE)?;
    let map_path = map.unwrap_or_else(|| {
        let mut p = out.as_os_str().to_owned();
        p.push(".map");
        PathBuf::from(p)
    });
    fs::write(out, write_dimacs(&reduced)).with_context(|| format!("writing {}", out.display())).code(exit::WRITE)?;
    fs::write(&map_path, varmap.to_text())
        .with_context(|| format!("writing {}", map_path.display()))
        .code(exit::WRITE)?;
    let record = ReductionRecord::new(&instance_name(input), &formula, &reduced);
    if json {
        println!("{}", serde_json::to_string_pretty(&record).expect("plain data serializes"));
    } else {
        println!("{}", record.summary());
    }
    Ok(())
}

/// Analysis against the oracle, then elimination against the oracle.
fn verify_one(formula: &CnfFormula, limit: u32, solver: SolverKind) -> CmdResult<()> {
    if formula.var_count() > limit {
        return fail(
            exit::OVER_LIMIT,
            anyhow!("{} variables exceed the oracle limit of {limit}", formula.var_count()),
        );
    }
    let options = GntOptions { solver, ..GntOptions::default() };
    let report = gnt_atomic_sets(formula, &options).map_err(analysis_failure)?;
    let expected = oracle::oracle_atomic_sets(formula, limit).map_err(oracle_failure)?;
    if !report.same_result(&expected) {
        return fail(
            exit::MISMATCH,
            anyhow!("atomic sets differ from enumeration: got {:?}, expected {:?}", report.sets, expected.sets),
        );
    }
    let (reduced, map) = eliminate(formula, &report).code(exit::MISMATCH)?;
    match oracle::verify_elimination(formula, &reduced, &map, limit).map_err(oracle_failure)? {
        Verification::Pass => Ok(()),
        Verification::Fail(diagnosis) => fail(exit::MISMATCH, anyhow!("elimination check failed: {diagnosis}")),
    }
}

fn oracle_failure(e: OracleError) -> Failure {
    let code = match e {
        OracleError::OverLimit { .. } => exit::OVER_LIMIT,
        OracleError::Unsatisfiable => exit::UNSAT,
        OracleError::MalformedMap(_) => exit::MISMATCH,
    };
    Failure { code, error: e.into() }
}

fn cmd_verify(input: Option<&Path>, limit: u32, fuzz: Option<usize>, seed: u64, solver: SolverKind) -> CmdResult<()> {
    match (input, fuzz) {
        (Some(path), _) => {
            let formula = load(path)?;
            verify_one(&formula, limit, solver)?;
            println!("{}: pass", instance_name(path));
        }
        (None, Some(count)) => {
            let corpus = fuzz_corpus(seed, count, &RandomCnfConfig::fuzz_default());
            for (i, formula) in corpus.iter().enumerate() {
                verify_one(formula, limit, solver).map_err(|f| Failure {
                    code: f.code,
                    error: f.error.context(format!("fuzz instance {i} (seed {seed})")),
                })?;
            }
            println!("fuzz: {} instances (seed {seed}): pass", corpus.len());
        }
        (None, None) => unreachable!("clap requires an input or --fuzz"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seconds_parser() {
        assert_eq!(parse_seconds("1.5").unwrap(), Duration::from_millis(1500));
        assert!(parse_seconds("-1").is_err());
        assert!(parse_seconds("soon").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
