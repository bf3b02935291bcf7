//! DIMACS CNF reading and writing.
//!
//! Variable names travel in comment lines of the form `c <index> <name>`.
//! Such comments may appear anywhere in the file; those whose index is not a
//! positive integer within the declared variable count are ignored.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{normalize_clause, CnfFormula, Lit, Normalized, Var};

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("no problem line (`p cnf <vars> <clauses>`) found")]
    MissingProblemLine,
    #[error("line {line}: malformed problem line `{text}`")]
    MalformedProblemLine { line: usize, text: String },
    #[error("line {line}: second problem line")]
    DuplicateProblemLine { line: usize },
    #[error("line {line}: clause data before the problem line")]
    ClauseBeforeProblemLine { line: usize },
    #[error("line {line}: invalid token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("line {line}: literal {lit} exceeds declared variable count {var_count}")]
    LiteralOutOfRange { line: usize, lit: i64, var_count: u32 },
    #[error("last clause is not terminated by 0")]
    UnterminatedClause,
    #[error("line {line}: empty clause; the input is trivially unsatisfiable")]
    EmptyClause { line: usize },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl DimacsError {
    /// True for the error category signalling an explicitly unsatisfiable input.
    pub fn is_empty_clause(&self) -> bool {
        matches!(self, DimacsError::EmptyClause { .. })
    }
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    parse_dimacs_reader(text.as_bytes())
}

pub fn parse_dimacs_reader<R: BufRead>(reader: R) -> Result<CnfFormula, DimacsError> {
    let mut var_count: Option<u32> = None;
    let mut raw_names: Vec<(u64, String)> = Vec::new();
    let mut clauses = Vec::new();
    let mut pending: Vec<Lit> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed == "c" || trimmed.starts_with("c ") || trimmed.starts_with("c\t") {
            if let Some(entry) = parse_name_comment(&trimmed[1..]) {
                raw_names.push(entry);
            }
            continue;
        }
        if trimmed.starts_with('%') {
            // SATLIB end marker
            break;
        }
        if trimmed.starts_with('p') {
            if var_count.is_some() {
                return Err(DimacsError::DuplicateProblemLine { line: lineno });
            }
            var_count = Some(parse_problem_line(trimmed).ok_or_else(|| DimacsError::MalformedProblemLine {
                line: lineno,
                text: trimmed.to_string(),
            })?);
            continue;
        }
        let vars = var_count.ok_or(DimacsError::ClauseBeforeProblemLine { line: lineno })?;
        for token in trimmed.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| DimacsError::InvalidToken {
                line: lineno,
                token: token.to_string(),
            })?;
            if value == 0 {
                let lits = std::mem::take(&mut pending);
                match normalize_clause(lits) {
                    Ok(Normalized::Clause(c)) => clauses.push(c),
                    Ok(Normalized::Tautology) => {}
                    Err(_) => return Err(DimacsError::EmptyClause { line: lineno }),
                }
                continue;
            }
            if value.unsigned_abs() > vars as u64 {
                return Err(DimacsError::LiteralOutOfRange { line: lineno, lit: value, var_count: vars });
            }
            pending.push(Lit::from_dimacs(value as i32).expect("nonzero and in range"));
        }
    }

    let var_count = var_count.ok_or(DimacsError::MissingProblemLine)?;
    if !pending.is_empty() {
        return Err(DimacsError::UnterminatedClause);
    }
    let names: BTreeMap<Var, String> = raw_names
        .into_iter()
        .filter(|(i, _)| *i <= var_count as u64)
        .map(|(i, n)| (Var::new(i as u32), n))
        .collect();
    Ok(CnfFormula::from_clauses(var_count, clauses)
        .expect("literal ranges checked while parsing")
        .with_names(names))
}

fn parse_problem_line(line: &str) -> Option<u32> {
    let mut parts = line.split_whitespace();
    if parts.next()? != "p" || parts.next()? != "cnf" {
        return None;
    }
    let vars: u32 = parts.next()?.parse().ok()?;
    let _clauses: u64 = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some(vars)
}

fn parse_name_comment(body: &str) -> Option<(u64, String)> {
    let body = body.trim_start();
    let split = body.find(char::is_whitespace)?;
    let index: u64 = body[..split].parse().ok()?;
    let name = body[split..].trim();
    if index == 0 || name.is_empty() {
        return None;
    }
    Some((index, name.to_string()))
}

pub fn write_dimacs(formula: &CnfFormula) -> String {
    let mut out = Vec::new();
    write_dimacs_to(formula, &mut out).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("DIMACS output is UTF-8")
}

pub fn write_dimacs_to<W: Write>(formula: &CnfFormula, mut out: W) -> io::Result<()> {
    for (var, name) in formula.names() {
        writeln!(out, "c {var} {name}")?;
    }
    writeln!(out, "p cnf {} {}", formula.var_count(), formula.clause_count())?;
    for clause in formula.clauses() {
        for lit in clause.iter() {
            write!(out, "{lit} ")?;
        }
        writeln!(out, "0")?;
    }
    Ok(())
}
