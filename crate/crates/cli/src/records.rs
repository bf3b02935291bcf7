use std::time::Duration;

use atomic_sets::{AtomicSetReport, CnfFormula};
use serde::Serialize;

#[derive(Serialize)]
pub struct AnalyzeDoc {
    pub instance: String,
    pub vars: u32,
    pub clauses: usize,
    pub backbone: BackboneDoc,
    pub atomic_sets: Vec<SetDoc>,
    pub stats: StatsDoc,
}

#[derive(Serialize)]
pub struct BackboneDoc {
    pub core: Vec<u32>,
    pub dead: Vec<u32>,
}

#[derive(Serialize)]
pub struct SetDoc {
    pub kind: &'static str,
    pub members: Vec<u32>,
}

#[derive(Serialize)]
pub struct StatsDoc {
    pub sat_calls: u64,
    pub seconds: f64,
}

impl AnalyzeDoc {
    pub fn new(instance: &str, formula: &CnfFormula, report: &AtomicSetReport, elapsed: Duration) -> AnalyzeDoc {
        AnalyzeDoc {
            instance: instance.to_string(),
            vars: formula.var_count(),
            clauses: formula.clause_count(),
            backbone: BackboneDoc {
                core: report.backbone.core.iter().map(|v| v.index()).collect(),
                dead: report.backbone.dead.iter().map(|v| v.index()).collect(),
            },
            atomic_sets: report
                .sets
                .iter()
                .map(|s| SetDoc { kind: s.kind.as_str(), members: s.members.iter().map(|v| v.index()).collect() })
                .collect(),
            stats: StatsDoc { sat_calls: report.stats.sat_calls, seconds: seconds(elapsed) },
        }
    }
}

pub fn seconds(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e6
}

/// Per-instance summary in the column order of the bench table.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisRecord {
    pub instance: String,
    pub vars: u32,
    pub clauses: usize,
    pub sets: usize,
    pub set_vars: usize,
    pub mean: f64,
    pub max: usize,
    pub seconds: f64,
    pub sat_calls: u64,
}

impl AnalysisRecord {
    pub fn new(instance: &str, formula: &CnfFormula, report: &AtomicSetReport, elapsed: Duration) -> AnalysisRecord {
        let sets = report.sets.len();
        let set_vars = report.set_variables();
        let mean = if sets == 0 { 0.0 } else { (set_vars as f64 / sets as f64 * 100.0).round() / 100.0 };
        AnalysisRecord {
            instance: instance.to_string(),
            vars: formula.var_count(),
            clauses: formula.clause_count(),
            sets,
            set_vars,
            mean,
            max: report.sets.iter().map(|s| s.len()).max().unwrap_or(0),
            seconds: seconds(elapsed),
            sat_calls: report.stats.sat_calls,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionRecord {
    pub instance: String,
    pub vars_before: u32,
    pub vars_after: u32,
    pub clauses_before: usize,
    pub clauses_after: usize,
}

impl ReductionRecord {
    pub fn new(instance: &str, before: &CnfFormula, after: &CnfFormula) -> ReductionRecord {
        ReductionRecord {
            instance: instance.to_string(),
            vars_before: before.var_count(),
            vars_after: after.var_count(),
            clauses_before: before.clause_count(),
            clauses_after: after.clause_count(),
        }
    }

    pub fn vars_delta(&self) -> f64 {
        percent_delta(self.vars_before as f64, self.vars_after as f64)
    }

    pub fn clauses_delta(&self) -> f64 {
        percent_delta(self.clauses_before as f64, self.clauses_after as f64)
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: variables {} -> {} ({}), clauses {} -> {} ({})",
            self.instance,
            self.vars_before,
            self.vars_after,
            format_percent(self.vars_delta()),
            self.clauses_before,
            self.clauses_after,
            format_percent(self.clauses_delta()),
        )
    }
}

/// `(after - before) / before` in percent; 0 when `before` is 0.
pub fn percent_delta(before: f64, after: f64) -> f64 {
    if before == 0.0 {
        0.0
    } else {
        (after - before) / before * 100.0
    }
}

pub fn format_percent(p: f64) -> String {
    let rounded = (p * 10.0).round() / 10.0;
    if rounded == 0.0 {
        "0.0%".to_string()
    } else {
        format!("{rounded:+.1}%")
    }
}

/// One bench row; analysis and reduction columns are empty when the instance failed.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub vars: Option<u32>,
    pub clauses: Option<usize>,
    pub sets: Option<usize>,
    pub set_vars: Option<usize>,
    pub mean: Option<f64>,
    pub max: Option<usize>,
    pub seconds: f64,
    pub sat_calls: Option<u64>,
    pub status: String,
    pub vars_after: Option<u32>,
    pub clauses_after: Option<usize>,
    pub vars_delta: Option<f64>,
    pub clauses_delta: Option<f64>,
}

impl BenchRow {
    pub fn ok(analysis: AnalysisRecord, reduction: &ReductionRecord) -> BenchRow {
        let round1 = |p: f64| (p * 10.0).round() / 10.0;
        BenchRow {
            instance: analysis.instance,
            vars: Some(analysis.vars),
            clauses: Some(analysis.clauses),
            sets: Some(analysis.sets),
            set_vars: Some(analysis.set_vars),
            mean: Some(analysis.mean),
            max: Some(analysis.max),
            seconds: analysis.seconds,
            sat_calls: Some(analysis.sat_calls),
            status: "ok".to_string(),
            vars_after: Some(reduction.vars_after),
            clauses_after: Some(reduction.clauses_after),
            vars_delta: Some(round1(reduction.vars_delta())),
            clauses_delta: Some(round1(reduction.clauses_delta())),
        }
    }

    pub fn failed(instance: &str, formula: Option<&CnfFormula>, status: &str, elapsed: Duration) -> BenchRow {
        BenchRow {
            instance: instance.to_string(),
            vars: formula.map(|f| f.var_count()),
            clauses: formula.map(|f| f.clause_count()),
            sets: None,
            set_vars: None,
            mean: None,
            max: None,
            seconds: seconds(elapsed),
            sat_calls: None,
            status: status.to_string(),
            vars_after: None,
            clauses_after: None,
            vars_delta: None,
            clauses_delta: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_formatting() {
        assert_eq!(format_percent(percent_delta(1179.0, 585.0)), "-50.4%");
        assert_eq!(format_percent(percent_delta(5.0, 2.0)), "-60.0%");
        assert_eq!(format_percent(percent_delta(0.0, 0.0)), "0.0%");
        assert_eq!(format_percent(percent_delta(10.0, 10.0)), "0.0%");
    }
}
