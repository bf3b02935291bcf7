//! Seeded random CNF generation for fuzz campaigns.

use rand::Rng;

use crate::formula::CnfFormula;
use crate::sat::SolverSession;

/// Parameters for [`random_cnf`]. Ranges are inclusive.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomCnfConfig {
    pub min_vars: u32,
    pub max_vars: u32,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub min_width: usize,
    pub max_width: usize,
}

impl RandomCnfConfig {
    /// 8–20 variables, clause/variable ratio 1.5–4.0, clause widths 2–3.
    ///
    /// Binary clauses give the implication chains that produce backbones and
    /// atomic sets; pure 3-CNF at these ratios rarely has any.
    pub fn fuzz_default() -> RandomCnfConfig {
        RandomCnfConfig { min_vars: 8, max_vars: 20, min_ratio: 1.5, max_ratio: 4.0, min_width: 2, max_width: 3 }
    }
}

/// Draws a formula: variable count and ratio uniformly from their ranges,
/// then `round(ratio * vars)` clauses of uniformly drawn width over distinct
/// variables with random polarities.
pub fn random_cnf<R: Rng>(rng: &mut R, config: &RandomCnfConfig) -> CnfFormula {
    let vars = rng.gen_range(config.min_vars..=config.max_vars);
    let ratio = if config.max_ratio > config.min_ratio {
        rng.gen_range(config.min_ratio..=config.max_ratio)
    } else {
        config.min_ratio
    };
    let clause_count = (ratio * vars as f64).round() as usize;
    let mut clauses = Vec::with_capacity(clause_count);
    for _ in 0..clause_count {
        let width = rng.gen_range(config.min_width..=config.max_width).min(vars as usize).max(1);
        let picked = rand::seq::index::sample(rng, vars as usize, width);
        let clause: Vec<i32> = picked
            .iter()
            .map(|i| {
                let v = i as i32 + 1;
                if rng.gen_bool(0.5) {
                    v
                } else {
                    -v
                }
            })
            .collect();
        clauses.push(clause);
    }
    CnfFormula::new(vars, clauses).expect("generated literals are in range")
}

/// Draws formulas until one is satisfiable. Gives up after `max_attempts`.
pub fn random_satisfiable_cnf<R: Rng>(rng: &mut R, config: &RandomCnfConfig, max_attempts: usize) -> Option<CnfFormula> {
    for _ in 0..max_attempts {
        let f = random_cnf(rng, config);
        let mut session = SolverSession::new(&f);
        if session.check(&[]).map(|o| o.is_sat()).unwrap_or(false) {
            return Some(f);
        }
    }
    None
}

/// A deterministic corpus of `count` satisfiable formulas from `seed`.
pub fn fuzz_corpus(seed: u64, count: usize, config: &RandomCnfConfig) -> Vec<CnfFormula> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_satisfiable_cnf(&mut rng, config, 10_000).expect("configuration admits satisfiable formulas"))
        .collect()
}
