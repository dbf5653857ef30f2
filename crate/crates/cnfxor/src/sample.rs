//! Uniform random sampling of k-clauses, XOR-clauses and whole formulas.
//!
//! A k-clause picks k distinct variables uniformly without replacement and
//! negates each with an independent fair coin. An XOR clause includes each
//! variable independently with probability 1/2 and draws its parity bit
//! with a fair coin, so it is uniform over all 2^(n+1) XOR clauses.
//!
//! `sample_formula` gives every clause slot its own ChaCha8 stream keyed by
//! (seed, slot index): the formula for a given seed does not depend on the
//! order in which slots are filled.

use crate::formula::{Formula, FormulaError, KClause, Literal, RandomModelParams, XorClause};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn sample_k_clause<R: Rng>(n: usize, k: usize, rng: &mut R) -> Result<KClause, FormulaError> {
    if k < 1 {
        return Err(FormulaError::InvalidParams("k must be at least 1".into()));
    }
    if k > n {
        return Err(FormulaError::InvalidParams(format!(
            "k = {k} exceeds n = {n}"
        )));
    }
    // Rejection sampling of a k-subset; uniform over the C(n, k) subsets.
    let mut vars: Vec<u32> = Vec::with_capacity(k);
    while vars.len() < k {
        let v = rng.random_range(1..=n as u32);
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    vars.sort_unstable();
    let literals = vars
        .into_iter()
        .map(|var| Literal::new(var, rng.random::<bool>()))
        .collect();
    Ok(KClause::new(literals))
}

pub fn sample_xor_clause<R: Rng>(n: usize, rng: &mut R) -> XorClause {
    let vars: Vec<u32> = (1..=n as u32).filter(|_| rng.random::<bool>()).collect();
    let rhs = rng.random::<bool>();
    XorClause { vars, rhs }
}

/// Samples ⌈rn⌉ k-clauses and ⌈sn⌉ XOR clauses, independently and with
/// replacement across slots. Deterministic in (params, seed).
pub fn sample_formula(params: &RandomModelParams, seed: u64) -> Result<Formula, FormulaError> {
    let checked = RandomModelParams::new(params.k, params.n, params.r, params.s)?;
    let m_cnf = checked.cnf_count();
    let m_xor = checked.xor_count();
    let mut cnf = Vec::with_capacity(m_cnf);
    for i in 0..m_cnf {
        let mut rng = clause_stream(seed, 2 * i as u64);
        cnf.push(sample_k_clause(checked.n, checked.k, &mut rng)?);
    }
    let mut xors = Vec::with_capacity(m_xor);
    for j in 0..m_xor {
        let mut rng = clause_stream(seed, 2 * j as u64 + 1);
        xors.push(sample_xor_clause(checked.n, &mut rng));
    }
    Ok(Formula {
        n: checked.n,
        k: checked.k,
        cnf,
        xors,
    })
}

fn clause_stream(seed: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(slot);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn full_width_clause_uses_every_variable() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = sample_k_clause(5, 5, &mut rng).unwrap();
        let mut vars: Vec<u32> = c.literals.iter().map(|l| l.var).collect();
        vars.sort_unstable();
        assert_eq!(vars, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn k_clause_rejects_bad_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_k_clause(2, 3, &mut rng).is_err());
        assert!(sample_k_clause(2, 0, &mut rng).is_err());
    }

    #[test]
    fn variable_and_sign_frequencies_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20;
        let k = 3;
        let draws = 100_000;
        let mut var_hits = vec![0u64; n + 1];
        let mut positives = 0u64;
        for _ in 0..draws {
            let c = sample_k_clause(n, k, &mut rng).unwrap();
            for l in &c.literals {
                var_hits[l.var as usize] += 1;
                if !l.negated {
                    positives += 1;
                }
            }
        }
        for v in 1..=n {
            let freq = var_hits[v] as f64 / draws as f64;
            assert!(
                (freq - 3.0 / 20.0).abs() < 0.01,
                "variable {v} frequency {freq}"
            );
        }
        let pos_freq = positives as f64 / (draws * k as u64) as f64;
        assert!((pos_freq - 0.5).abs() < 0.01, "positive sign freq {pos_freq}");
    }

    #[test]
    fn sign_patterns_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 80_000;
        let mut counts: HashMap<Vec<bool>, u64> = HashMap::new();
        for _ in 0..draws {
            let c = sample_k_clause(3, 3, &mut rng).unwrap();
            let pattern: Vec<bool> = c.literals.iter().map(|l| l.negated).collect();
            *counts.entry(pattern).or_default() += 1;
        }
        assert_eq!(counts.len(), 8);
        for (pattern, count) in counts {
            let freq = count as f64 / draws as f64;
            assert!(
                (freq - 0.125).abs() < 0.01,
                "pattern {pattern:?} frequency {freq}"
            );
        }
    }

    #[test]
    fn xor_clause_mean_width_is_half_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100;
        let draws = 20_000;
        let total: u64 = (0..draws)
            .map(|_| sample_xor_clause(n, &mut rng).vars.len() as u64)
            .sum();
        let mean = total as f64 / draws as f64;
        assert!((mean - 50.0).abs() < 1.0, "mean width {mean}");
    }

    #[test]
    fn xor_clause_on_one_variable_hits_all_four_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 40_000;
        let mut counts: HashMap<(Vec<u32>, bool), u64> = HashMap::new();
        for _ in 0..draws {
            let x = sample_xor_clause(1, &mut rng);
            *counts.entry((x.vars, x.rhs)).or_default() += 1;
        }
        assert_eq!(counts.len(), 4);
        for (form, count) in counts {
            let freq = count as f64 / draws as f64;
            assert!((freq - 0.25).abs() < 0.01, "form {form:?} frequency {freq}");
        }
    }

    #[test]
    fn empty_contradictory_xor_clause_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut saw_empty_contradiction = false;
        for _ in 0..200 {
            let x = sample_xor_clause(1, &mut rng);
            if x.vars.is_empty() && x.rhs {
                saw_empty_contradiction = true;
            }
        }
        assert!(saw_empty_contradiction);
    }

    #[test]
    fn formula_clause_counts_use_ceilings() {
        let params = RandomModelParams::new(3, 10, 0.41, 0.29).unwrap();
        let f = sample_formula(&params, 42).unwrap();
        assert_eq!(f.cnf.len(), 5);
        assert_eq!(f.xors.len(), 3);
    }

    #[test]
    fn zero_densities_give_empty_formula() {
        let params = RandomModelParams::new(3, 10, 0.0, 0.0).unwrap();
        let f = sample_formula(&params, 42).unwrap();
        assert!(f.cnf.is_empty());
        assert!(f.xors.is_empty());
    }

    #[test]
    fn same_seed_reproduces_formula() {
        let params = RandomModelParams::new(3, 30, 2.0, 0.7).unwrap();
        let a = sample_formula(&params, 99).unwrap();
        let b = sample_formula(&params, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_formula(&params, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn subset_distribution_passes_chi_square() {
        // 10^5 3-subsets of 20 variables: chi-square over all C(20,3) = 1140
        // cells at significance 0.001 (df = 1139, critical ≈ 1292.21).
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20u32;
        let draws = 100_000u64;
        let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
        for _ in 0..draws {
            let c = sample_k_clause(n as usize, 3, &mut rng).unwrap();
            let mut vars: Vec<u32> = c.literals.iter().map(|l| l.var).collect();
            vars.sort_unstable();
            *counts.entry(vars).or_default() += 1;
        }
        let cells = 1140.0;
        let expected = draws as f64 / cells;
        let mut chi2 = 0.0;
        let mut seen = 0u64;
        for (_, count) in counts {
            chi2 += (count as f64 - expected).powi(2) / expected;
            seen += 1;
        }
        // unseen subsets contribute the full expected mass
        chi2 += (cells - seen as f64) * expected;
        // critical value for df=1139 at alpha=0.001
        assert!(chi2 < 1292.21, "chi-square statistic {chi2}");
    }
}
