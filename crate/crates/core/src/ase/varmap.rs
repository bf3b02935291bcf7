//! Per-variable provenance after elimination, and its text format:
//!
//! ```text
//! map <old_var_count> <new_var_count>
//! <old> KEPT <new>
//! <old> MERGED <representative-old-index>
//! <old> TRUE
//! <old> FALSE
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::Var;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VariableFate {
    /// Survives under a new index.
    Kept(Var),
    /// Replaced by the representative (an original index) of its atomic set.
    MergedInto(Var),
    ConstTrue,
    ConstFalse,
}

/// The resolved meaning of an original variable in the reduced formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolved {
    Var(Var),
    Const(bool),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("map covers {found} variables, expected {expected}")]
    Coverage { expected: u32, found: u32 },
    #[error("variable {0}: kept index out of range or not a bijection")]
    BadKeptIndex(Var),
    #[error("variable {0}: merge target does not resolve to a kept or constant variable")]
    BadMergeTarget(Var),
}

/// Fates of all original variables `1..=old_var_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableMap {
    fates: Vec<VariableFate>,
    new_var_count: u32,
}

impl VariableMap {
    /// Validates that kept indices form a bijection onto `1..=new_var_count`
    /// and that merge targets resolve in one step.
    pub fn new(fates: Vec<VariableFate>, new_var_count: u32) -> Result<VariableMap, MapError> {
        let mut hit = vec![false; new_var_count as usize];
        for (slot, fate) in fates.iter().enumerate() {
            let var = Var::from_slot(slot);
            match *fate {
                VariableFate::Kept(k) => {
                    if k.index() > new_var_count || std::mem::replace(&mut hit[k.slot()], true) {
                        return Err(MapError::BadKeptIndex(var));
                    }
                }
                VariableFate::MergedInto(rep) => {
                    let ok = rep != var
                        && fates.get(rep.slot()).is_some_and(|f| !matches!(f, VariableFate::MergedInto(_)));
                    if !ok {
                        return Err(MapError::BadMergeTarget(var));
                    }
                }
                VariableFate::ConstTrue | VariableFate::ConstFalse => {}
            }
        }
        let found = hit.iter().filter(|&&h| h).count() as u32;
        if found != new_var_count {
            return Err(MapError::Coverage { expected: new_var_count, found });
        }
        Ok(VariableMap { fates, new_var_count })
    }

    pub fn identity(var_count: u32) -> VariableMap {
        VariableMap {
            fates: (1..=var_count).map(|v| VariableFate::Kept(Var::new(v))).collect(),
            new_var_count: var_count,
        }
    }

    pub fn old_var_count(&self) -> u32 {
        self.fates.len() as u32
    }

    pub fn new_var_count(&self) -> u32 {
        self.new_var_count
    }

    pub fn fate(&self, var: Var) -> VariableFate {
        self.fates[var.slot()]
    }

    pub fn fates(&self) -> impl Iterator<Item = (Var, VariableFate)> + '_ {
        self.fates.iter().enumerate().map(|(i, &f)| (Var::from_slot(i), f))
    }

    pub fn is_identity(&self) -> bool {
        self.new_var_count == self.old_var_count()
            && self.fates().all(|(v, f)| f == VariableFate::Kept(v))
    }

    /// Follows a merge to the representative's fate.
    pub fn resolve(&self, var: Var) -> Resolved {
        let fate = match self.fate(var) {
            VariableFate::MergedInto(rep) => self.fate(rep),
            other => other,
        };
        match fate {
            VariableFate::Kept(k) => Resolved::Var(k),
            VariableFate::ConstTrue => Resolved::Const(true),
            VariableFate::ConstFalse => Resolved::Const(false),
            VariableFate::MergedInto(_) => unreachable!("merge targets are validated on construction"),
        }
    }

    /// Projects a model of the reduced formula back onto the original variables.
    pub fn lift_model(&self, reduced: &[bool]) -> Vec<bool> {
        self.fates()
            .map(|(v, _)| match self.resolve(v) {
                Resolved::Var(k) => reduced[k.slot()],
                Resolved::Const(b) => b,
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "map {} {}", self.old_var_count(), self.new_var_count).unwrap();
        for (v, fate) in self.fates() {
            match fate {
                VariableFate::Kept(k) => writeln!(out, "{v} KEPT {k}"),
                VariableFate::MergedInto(r) => writeln!(out, "{v} MERGED {r}"),
                VariableFate::ConstTrue => writeln!(out, "{v} TRUE"),
                VariableFate::ConstFalse => writeln!(out, "{v} FALSE"),
            }
            .unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<VariableMap, MapError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let syntax = |line: usize, message: &str| MapError::Syntax { line: line + 1, message: message.to_string() };
        let (hline, header) = lines.next().ok_or_else(|| syntax(0, "missing header"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let (old, new) = match parts.as_slice() {
            ["map", old, new] => (
                old.parse::<u32>().map_err(|_| syntax(hline, "bad old variable count"))?,
                new.parse::<u32>().map_err(|_| syntax(hline, "bad new variable count"))?,
            ),
            _ => return Err(syntax(hline, "expected `map <old> <new>`")),
        };
        let mut fates: Vec<Option<VariableFate>> = vec![None; old as usize];
        let parse_var = |s: &str, line: usize, bound: u32| -> Result<Var, MapError> {
            match s.parse::<u32>() {
                Ok(i) if i >= 1 && i <= bound => Ok(Var::new(i)),
                _ => Err(syntax(line, &format!("bad variable `{s}`"))),
            }
        };
        for (line, body) in lines {
            let parts: Vec<&str> = body.split_whitespace().collect();
            let var = parse_var(parts[0], line, old)?;
            let fate = match &parts[1..] {
                ["KEPT", k] => VariableFate::Kept(parse_var(k, line, new)?),
                ["MERGED", r] => VariableFate::MergedInto(parse_var(r, line, old)?),
                ["TRUE"] => VariableFate::ConstTrue,
                ["FALSE"] => VariableFate::ConstFalse,
                _ => return Err(syntax(line, "expected KEPT <n>, MERGED <n>, TRUE or FALSE")),
            };
            if fates[var.slot()].replace(fate).is_some() {
                return Err(syntax(line, &format!("variable {var} listed twice")));
            }
        }
        let found = fates.iter().filter(|f| f.is_some()).count() as u32;
        if found != old {
            return Err(MapError::Coverage { expected: old, found });
        }
        VariableMap::new(fates.into_iter().map(Option::unwrap).collect(), new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(i: u32) -> Var {
        Var::new(i)
    }

    fn example_map() -> VariableMap {
        use VariableFate::*;
        VariableMap::new(vec![ConstTrue, ConstTrue, Kept(v(1)), Kept(v(2)), MergedInto(v(3))], 2).unwrap()
    }

    #[test]
    fn text_format() {
        let map = example_map();
        assert_eq!(map.to_text(), "map 5 2\n1 TRUE\n2 TRUE\n3 KEPT 1\n4 KEPT 2\n5 MERGED 3\n");
        assert_eq!(VariableMap::parse(&map.to_text()).unwrap(), map);
    }

    #[test]
    fn resolves_merges() {
        let map = example_map();
        assert_eq!(map.resolve(v(5)), Resolved::Var(v(1)));
        assert_eq!(map.resolve(v(2)), Resolved::Const(true));
        assert_eq!(map.lift_model(&[false, true]), vec![true, true, false, true, false]);
    }

    #[test]
    fn rejects_malformed_maps() {
        use VariableFate::*;
        assert!(VariableMap::new(vec![Kept(v(1)), Kept(v(1))], 2).is_err());
        assert!(VariableMap::new(vec![Kept(v(1)), MergedInto(v(3))], 1).is_err());
        assert!(VariableMap::new(vec![MergedInto(v(2)), MergedInto(v(1))], 0).is_err());
        assert!(VariableMap::new(vec![Kept(v(1))], 2).is_err());
        assert!(VariableMap::parse("").is_err());
        assert!(VariableMap::parse("map 2 1\n1 KEPT 1\n").is_err());
        assert!(VariableMap::parse("map 2 1\n1 KEPT 1\n2 MAYBE\n").is_err());
        assert!(VariableMap::parse("map 2 1\n1 KEPT 1\n1 TRUE\n2 TRUE\n").is_err());
        assert!(VariableMap::parse("map 1 1\n1 KEPT 2\n").is_err());
    }

    #[test]
    fn identity_map() {
        let map = VariableMap::identity(3);
        assert!(map.is_identity());
        assert!(!example_map().is_identity());
    }

    fn arb_map() -> impl Strategy<Value = VariableMap> {
        prop::collection::vec(0u8..4, 1..30).prop_map(|kinds| {
            let mut fates = Vec::new();
            let mut next = 0;
            let mut first_kept = None;
            for (i, k) in kinds.iter().enumerate() {
                let fate = match (k, first_kept) {
                    (0, _) | (1, None) => {
                        next += 1;
                        first_kept.get_or_insert(Var::from_slot(i));
                        VariableFate::Kept(Var::new(next))
                    }
                    (1, Some(rep)) => VariableFate::MergedInto(rep),
                    (2, _) => VariableFate::ConstTrue,
                    _ => VariableFate::ConstFalse,
                };
                fates.push(fate);
            }
            VariableMap::new(fates, next).unwrap()
        })
    }

    proptest! {
        #[test]
        fn text_round_trip(map in arb_map()) {
            prop_assert_eq!(VariableMap::parse(&map.to_text()).unwrap(), map);
        }
    }
}
