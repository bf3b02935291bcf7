use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{anyhow, Context};
use atomic_sets::analysis::AnalysisError;
use atomic_sets::{eliminate, parse_dimacs, GntOptions};

use crate::records::{AnalysisRecord, BenchRow, ReductionRecord};
use crate::{analyze_timed, exit, instance_name, CmdResult, Failure, WithCode};

fn instances(dir: &Path) -> CmdResult<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).with_context(|| format!("reading {}", dir.display())).code(exit::PARSE)?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.code(exit::PARSE)?.path();
        let is_cnf = path.extension().is_some_and(|e| e == "cnf" || e == "dimacs");
        if is_cnf && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Failure { code: exit::PARSE, error: anyhow!("no .cnf or .dimacs files in {}", dir.display()) });
    }
    Ok(files)
}

/// Runs one instance; every failure becomes a row status.
pub fn bench_instance(path: &Path, options: &GntOptions) -> BenchRow {
    let name = instance_name(path);
    let start = Instant::now();
    let formula = match fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|t| parse_dimacs(&t).map_err(|e| e.to_string())) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{name}: {e}");
            return BenchRow::failed(&name, None, "error", start.elapsed());
        }
    };
    let (report, elapsed) = match analyze_timed(&formula, options) {
        Ok(r) => r,
        Err(e) => {
            let status = match e {
                AnalysisError::TimeBudgetExceeded => "timeout",
                AnalysisError::UnsatisfiableInput => "unsat",
                _ => "error",
            };
            eprintln!("{name}: {e}");
            return BenchRow::failed(&name, Some(&formula), status, start.elapsed());
        }
    };
    let analysis = AnalysisRecord::new(&name, &formula, &report, elapsed);
    match eliminate(&formula, &report) {
        Ok((reduced, _)) => BenchRow::ok(analysis, &ReductionRecord::new(&name, &formula, &reduced)),
        Err(e) => {
            eprintln!("{name}: {e}");
            BenchRow::failed(&name, Some(&formula), "error", elapsed)
        }
    }
}

/// Instances are handed out to `jobs` workers; rows keep directory order.
pub fn bench_all(files: &[PathBuf], jobs: usize, options: &GntOptions) -> Vec<BenchRow> {
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; files.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, files.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = files.get(i) else { break };
                let row = bench_instance(path, options);
                eprintln!("{}: {} ({:.3} s)", row.instance, row.status, row.seconds);
                rows.lock().expect("worker panicked")[i] = Some(row);
            });
        }
    });
    rows.into_inner().expect("worker panicked").into_iter().map(|r| r.expect("every instance ran")).collect()
}

fn csv_text(rows: &[BenchRow]) -> anyhow::Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}

pub fn run(dir: &Path, jobs: usize, out: Option<&Path>, json: bool, options: &GntOptions) -> CmdResult<()> {
    let files = instances(dir)?;
    let rows = bench_all(&files, jobs, options);
    let csv = csv_text(&rows).code(exit::WRITE)?;
    let json_text = serde_json::to_string_pretty(&rows).expect("plain data serializes");
    if let Some(out) = out {
        fs::write(out, &csv).with_context(|| format!("writing {}", out.display())).code(exit::WRITE)?;
        let json_path = out.with_extension("json");
        fs::write(&json_path, &json_text)
            .with_context(|| format!("writing {}", json_path.display()))
            .code(exit::WRITE)?;
    }
    let mut stdout = std::io::stdout().lock();
    let body = if json { json_text + "\n" } else { csv };
    stdout.write_all(body.as_bytes()).code(exit::WRITE)?;
    Ok(())
}
