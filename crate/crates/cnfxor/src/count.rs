//! Exact model counting and a finite-n estimator of the normalized
//! log-solution-count of random k-CNF formulas.
//!
//! Counting reduces the XOR part to an affine space and enumerates only its
//! 2^(n − rank) points, filtering by the CNF clauses, so the cost is
//! exponential in the free dimension rather than in n. Formulas without XOR
//! clauses fall back to a sweep over all 2^n assignments.

use crate::formula::{Formula, RandomModelParams};
use crate::gf2::BitVec;
use crate::sample::sample_formula;
use crate::seed::derive_seed;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Maximum free dimension for affine enumeration.
pub const AFFINE_GUARD: usize = 26;
/// Maximum n for the full-assignment sweep.
pub const FULL_GUARD: usize = 26;

#[derive(Debug, Error, PartialEq)]
pub enum CountError {
    #[error(
        "instance too large to count exactly: free dimension {free_dim:?} vs affine guard \
         {affine_guard}, n = {n} vs full-enumeration guard {full_guard}"
    )]
    GuardExceeded {
        n: usize,
        free_dim: Option<usize>,
        affine_guard: usize,
        full_guard: usize,
    },
    #[error("no satisfiable instances among the sampled trials")]
    NoSatInstances,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    XorAffineEnumeration,
    FullEnumeration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub count: BigUint,
    pub n: usize,
    pub method: CountMethod,
}

impl CountResult {
    pub fn is_sat(&self) -> bool {
        !self.count.is_zero()
    }
}

pub fn count_exact(formula: &Formula) -> Result<CountResult, CountError> {
    let n = formula.n;
    if !formula.xors.is_empty() {
        let reduced = formula.xor_system().row_reduce();
        if !reduced.is_consistent() {
            return Ok(CountResult {
                count: BigUint::zero(),
                n,
                method: CountMethod::XorAffineEnumeration,
            });
        }
        let free_dim = n - reduced.rank();
        if formula.cnf.is_empty() {
            return Ok(CountResult {
                count: BigUint::one() << free_dim,
                n,
                method: CountMethod::XorAffineEnumeration,
            });
        }
        if free_dim > AFFINE_GUARD {
            return Err(CountError::GuardExceeded {
                n,
                free_dim: Some(free_dim),
                affine_guard: AFFINE_GUARD,
                full_guard: FULL_GUARD,
            });
        }
        let mut count = 0u64;
        reduced
            .for_each_solution(|bits| {
                if formula.cnf.iter().all(|c| c.satisfied_by(bits)) {
                    count += 1;
                }
            })
            .expect("guards checked above");
        return Ok(CountResult {
            count: BigUint::from(count),
            n,
            method: CountMethod::XorAffineEnumeration,
        });
    }

    if formula.cnf.is_empty() {
        return Ok(CountResult {
            count: BigUint::one() << n,
            n,
            method: CountMethod::FullEnumeration,
        });
    }
    if n > FULL_GUARD {
        return Err(CountError::GuardExceeded {
            n,
            free_dim: None,
            affine_guard: AFFINE_GUARD,
            full_guard: FULL_GUARD,
        });
    }
    let mut count = 0u64;
    for word in 0..(1u64 << n) {
        let bits = BitVec::from_u64(n, word);
        if formula.cnf.iter().all(|c| c.satisfied_by(&bits)) {
            count += 1;
        }
    }
    Ok(CountResult {
        count: BigUint::from(count),
        n,
        method: CountMethod::FullEnumeration,
    })
}

/// log₂ of a positive big integer: exact bit length plus a mantissa
/// correction, accurate to well below 1e-12.
pub fn log2_exact(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "log2 of zero");
    let bits = x.bits();
    if bits <= 53 {
        x.to_f64().unwrap().log2()
    } else {
        let shift = bits - 53;
        let top = (x >> shift).to_f64().unwrap();
        top.log2() + shift as f64
    }
}

/// Sample mean of (1/n)·log₂(#F) over the satisfiable draws of the
/// k-CNF-only random model at density r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiEstimate {
    pub k: usize,
    pub r: f64,
    pub n: usize,
    pub trials: u32,
    pub sat_trials: u32,
    pub mean: f64,
    pub stderr: f64,
}

pub fn estimate_phi(
    k: usize,
    r: f64,
    n: usize,
    trials: u32,
    seed: u64,
) -> Result<PhiEstimate, CountError> {
    let params = RandomModelParams::new(k, n, r, 0.0)
        .map_err(|e| CountError::InvalidParams(e.to_string()))?;
    if trials == 0 {
        return Err(CountError::InvalidParams("trials must be positive".into()));
    }
    let per_trial: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let f = sample_formula(&params, derive_seed(seed, &[t as u64]))
                .expect("params validated");
            let result = count_exact(&f)?;
            Ok(if result.is_sat() {
                Some(log2_exact(&result.count) / n as f64)
            } else {
                None
            })
        })
        .collect::<Result<_, CountError>>()?;
    let values: Vec<f64> = per_trial.into_iter().flatten().collect();
    if values.is_empty() {
        return Err(CountError::NoSatInstances);
    }
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let stderr = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    Ok(PhiEstimate {
        k,
        r,
        n,
        trials,
        sat_trials: values.len() as u32,
        mean,
        stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Assignment, KClause, Literal, XorClause};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sweep_count(f: &Formula) -> u64 {
        (0..(1u64 << f.n))
            .filter(|&word| {
                let values: Vec<bool> = (0..f.n).map(|i| word >> i & 1 == 1).collect();
                f.evaluate(&Assignment::from_bools(&values)).unwrap()
            })
            .count() as u64
    }

    #[test]
    fn empty_formula_counts_all_assignments() {
        let f = Formula::empty(3, 3);
        let result = count_exact(&f).unwrap();
        assert_eq!(result.count, BigUint::from(8u32));
        assert_eq!(result.method, CountMethod::FullEnumeration);
    }

    #[test]
    fn two_assignments_survive_clause_and_xor() {
        // (x1 ∨ x2) ∧ (x1 ⊕ x2 = 1): only TF and FT remain.
        let f = Formula {
            n: 2,
            k: 2,
            cnf: vec![KClause::new(vec![
                Literal::new(1, false),
                Literal::new(2, false),
            ])],
            xors: vec![XorClause::new(vec![1, 2], true)],
        };
        let result = count_exact(&f).unwrap();
        assert_eq!(result.count, BigUint::from(2u32));
        assert_eq!(result.method, CountMethod::XorAffineEnumeration);
    }

    #[test]
    fn affine_route_matches_full_sweep() {
        let params = RandomModelParams::new(3, 12, 1.0, 0.25).unwrap();
        let f = sample_formula(&params, 5).unwrap();
        let result = count_exact(&f).unwrap();
        assert_eq!(result.count, BigUint::from(sweep_count(&f)));
    }

    #[test]
    fn both_methods_agree_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..500 {
            let n = 4 + rng.random_range(0..13usize); // 4..=16
            let k = (2 + rng.random_range(0..3usize)).min(n);
            let r = rng.random_range(0.0..2.0);
            let s = rng.random_range(0.0..1.0);
            let params = RandomModelParams::new(k, n, r, s).unwrap();
            let f = sample_formula(&params, rng.random()).unwrap();
            let result = count_exact(&f).unwrap();
            assert_eq!(result.count, BigUint::from(sweep_count(&f)));
        }
    }

    #[test]
    fn appended_clause_never_increases_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..100 {
            let n = 4 + rng.random_range(0..8usize);
            let params = RandomModelParams::new(3.min(n), n, 1.0, 0.3).unwrap();
            let f = sample_formula(&params, rng.random()).unwrap();
            let before = count_exact(&f).unwrap().count;
            let mut extended = f.clone();
            let mut clause_rng = ChaCha8Rng::seed_from_u64(rng.random());
            extended
                .cnf
                .push(crate::sample::sample_k_clause(n, 3.min(n), &mut clause_rng).unwrap());
            let after = count_exact(&extended).unwrap().count;
            assert!(after <= before);
        }
    }

    #[test]
    fn guards_reject_oversized_instances() {
        let f = Formula {
            n: 30,
            k: 2,
            cnf: vec![KClause::new(vec![
                Literal::new(1, false),
                Literal::new(2, false),
            ])],
            xors: vec![],
        };
        let err = count_exact(&f).unwrap_err();
        assert_eq!(
            err,
            CountError::GuardExceeded {
                n: 30,
                free_dim: None,
                affine_guard: AFFINE_GUARD,
                full_guard: FULL_GUARD,
            }
        );

        let g = Formula {
            n: 30,
            k: 2,
            cnf: vec![KClause::new(vec![
                Literal::new(1, false),
                Literal::new(2, false),
            ])],
            xors: vec![XorClause::new(vec![1, 2], false)],
        };
        let err = count_exact(&g).unwrap_err();
        assert_eq!(
            err,
            CountError::GuardExceeded {
                n: 30,
                free_dim: Some(29),
                affine_guard: AFFINE_GUARD,
                full_guard: FULL_GUARD,
            }
        );
    }

    #[test]
    fn log2_is_exact_on_powers_of_two() {
        for d in [0usize, 1, 7, 52, 53, 64, 200] {
            let x = BigUint::one() << d;
            assert_eq!(log2_exact(&x), d as f64);
        }
    }

    #[test]
    fn log2_matches_f64_on_moderate_values() {
        for v in [3u64, 1000, 123_456_789] {
            let got = log2_exact(&BigUint::from(v));
            assert!((got - (v as f64).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn phi_at_zero_density_is_exactly_one() {
        for (k, n) in [(2, 8), (3, 10), (4, 12)] {
            let est = estimate_phi(k, 0.0, n, 10, 123).unwrap();
            assert_eq!(est.mean, 1.0);
            assert_eq!(est.stderr, 0.0);
            assert_eq!(est.sat_trials, 10);
        }
    }

    #[test]
    fn phi_decreases_with_density() {
        let low = estimate_phi(2, 0.2, 12, 120, 7).unwrap();
        let high = estimate_phi(2, 0.6, 12, 120, 7).unwrap();
        assert!(
            low.mean > high.mean,
            "phi(0.2) = {} vs phi(0.6) = {}",
            low.mean,
            high.mean
        );
    }

    #[test]
    fn phi_is_stable_across_seeds() {
        let a = estimate_phi(3, 1.0, 12, 150, 1).unwrap();
        let b = estimate_phi(3, 1.0, 12, 150, 2).unwrap();
        assert!(
            (a.mean - b.mean).abs() < 0.05,
            "seed 1 mean {} vs seed 2 mean {}",
            a.mean,
            b.mean
        );
    }

    #[test]
    fn saturated_density_reports_no_sat_instances() {
        // r = 40 at k = 2, n = 6: every draw is unsatisfiable for this seed.
        let err = estimate_phi(2, 40.0, 6, 20, 3).unwrap_err();
        assert_eq!(err, CountError::NoSatInstances);
    }
}
