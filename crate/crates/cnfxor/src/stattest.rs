//! Statistical checks of the random model's solution-space behavior:
//! pairwise independence of XOR satisfaction events, the survival and
//! extinction probabilities of a solution set under random XOR constraints,
//! and the Markov tail on the solution count of random k-CNF.
//!
//! Every check is an inequality; pass/fail uses one-sided Wilson bounds at
//! 99% with an extra 0.01 slack so sampling noise is never flagged, and each
//! report carries the raw counts and interval machinery it used.

use crate::count::{count_exact, log2_exact, CountError};
use crate::formula::{ceil_density, RandomModelParams, XorClause};
use crate::gf2::{BitVec, Gf2System};
use crate::sample::{sample_formula, sample_xor_clause};
use crate::seed::derive_seed;
use crate::stats::{wilson_lower, Z_99_ONE_SIDED};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Slack added on top of the interval bound when testing an inequality.
pub const INEQUALITY_SLACK: f64 = 0.01;

pub const TOL_SINGLE: f64 = 0.005;
pub const TOL_JOINT: f64 = 0.003;
pub const TOL_CONDITIONAL: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum StatTestError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("conditioning event occurred only {got} times (need at least {need})")]
    InsufficientConditioningEvents { got: u64, need: u64 },
    #[error(transparent)]
    Count(#[from] CountError),
}

/// Empirical check that two fixed distinct assignments are each satisfied
/// with probability 2^-m by a random system of m XOR clauses, independently
/// of one another.
#[derive(Debug, Clone, Serialize)]
pub struct PairwiseIndependenceReport {
    pub n: usize,
    pub m_xor: usize,
    pub samples: u64,
    pub seed: u64,
    pub sigma_sat: u64,
    pub sigma_prime_sat: u64,
    pub both_sat: u64,
    pub p_single: f64,
    pub p_joint: f64,
    pub p_conditional: f64,
    pub expected_single: f64,
    pub expected_joint: f64,
    pub tol_single: f64,
    pub tol_joint: f64,
    pub tol_conditional: f64,
    pub pass: bool,
}

pub fn test_xor_pairwise_independence(
    n: usize,
    m_xor: usize,
    samples: u64,
    seed: u64,
) -> Result<PairwiseIndependenceReport, StatTestError> {
    if n < 1 {
        return Err(StatTestError::InvalidParams("n must be at least 1".into()));
    }
    if samples == 0 {
        return Err(StatTestError::InvalidParams("samples must be positive".into()));
    }
    // σ is all-false and σ′ all-true; the claim holds for any distinct pair.
    let sigma_sat_clause = |x: &XorClause| !x.rhs;
    let sigma_prime_sat_clause = |x: &XorClause| (x.vars.len() % 2 == 1) == x.rhs;

    let (sigma_sat, sigma_prime_sat, both_sat) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[i]));
            let mut s = true;
            let mut sp = true;
            for _ in 0..m_xor {
                let x = sample_xor_clause(n, &mut rng);
                s &= sigma_sat_clause(&x);
                sp &= sigma_prime_sat_clause(&x);
                if !s && !sp {
                    break;
                }
            }
            (s as u64, sp as u64, (s && sp) as u64)
        })
        .reduce(
            || (0, 0, 0),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2),
        );

    if sigma_prime_sat < 100 {
        return Err(StatTestError::InsufficientConditioningEvents {
            got: sigma_prime_sat,
            need: 100,
        });
    }
    let expected_single = (0.5f64).powi(m_xor as i32);
    let expected_joint = expected_single * expected_single;
    let p_single = sigma_sat as f64 / samples as f64;
    let p_joint = both_sat as f64 / samples as f64;
    let p_conditional = both_sat as f64 / sigma_prime_sat as f64;
    let pass = (p_single - expected_single).abs() <= TOL_SINGLE
        && (p_joint - expected_joint).abs() <= TOL_JOINT
        && (p_conditional - expected_single).abs() <= TOL_CONDITIONAL;
    Ok(PairwiseIndependenceReport {
        n,
        m_xor,
        samples,
        seed,
        sigma_sat,
        sigma_prime_sat,
        both_sat,
        p_single,
        p_joint,
        p_conditional,
        expected_single,
        expected_joint,
        tol_single: TOL_SINGLE,
        tol_joint: TOL_JOINT,
        tol_conditional: TOL_CONDITIONAL,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualDirection {
    /// #H = 2^(⌈sn⌉+α): H ∧ Q should stay satisfiable w.p. ≥ 1 − 2^-α.
    SatLowerBound,
    /// #H = 2^(⌈sn⌉−α): H ∧ Q should become unsatisfiable w.p. ≥ 1 − 2^-α.
    UnsatLowerBound,
}

/// Frequency with which a solution set of pinned size survives (or is
/// wiped out by) ⌈sn⌉ random XOR clauses, against the 1 − 2^-α bound.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualBoundReport {
    pub direction: ResidualDirection,
    pub n: usize,
    pub s: f64,
    pub alpha: u32,
    pub m_xor: usize,
    /// #H is exactly 2^h_log2, realized by fixing n − h_log2 variables.
    pub h_log2: usize,
    pub samples: u64,
    pub seed: u64,
    pub events: u64,
    pub frequency: f64,
    pub wilson_lower_99: f64,
    pub threshold: f64,
    pub slack: f64,
    pub pass: bool,
}

fn run_residual_bound(
    direction: ResidualDirection,
    n: usize,
    s: f64,
    alpha: u32,
    samples: u64,
    seed: u64,
) -> Result<ResidualBoundReport, StatTestError> {
    if alpha < 1 {
        return Err(StatTestError::InvalidParams("alpha must be at least 1".into()));
    }
    if samples == 0 {
        return Err(StatTestError::InvalidParams("samples must be positive".into()));
    }
    if !(s >= 0.0) {
        return Err(StatTestError::InvalidParams("s must be non-negative".into()));
    }
    let m = ceil_density(s, n);
    let h_log2 = match direction {
        ResidualDirection::SatLowerBound => {
            let d = m + alpha as usize;
            if d > n {
                return Err(StatTestError::InvalidParams(format!(
                    "⌈sn⌉ + α = {d} exceeds n = {n}"
                )));
            }
            d
        }
        ResidualDirection::UnsatLowerBound => {
            let Some(d) = m.checked_sub(alpha as usize) else {
                return Err(StatTestError::InvalidParams(format!(
                    "α = {alpha} exceeds ⌈sn⌉ = {m}"
                )));
            };
            d
        }
    };
    // H fixes the first n − h_log2 variables to true, so #H = 2^h_log2.
    let mut fixed = BitVec::zeros(n);
    let mut values = BitVec::zeros(n);
    for v in 0..n - h_log2 {
        fixed.set(v, true);
        values.set(v, true);
    }

    let events: u64 = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[i]));
            let mut sys = Gf2System::new(n);
            for _ in 0..m {
                let x = sample_xor_clause(n, &mut rng);
                sys.push_cols(x.vars.iter().map(|&v| v as usize - 1), x.rhs);
            }
            let consistent = sys.substitute(&fixed, &values).row_reduce().is_consistent();
            let event = match direction {
                ResidualDirection::SatLowerBound => consistent,
                ResidualDirection::UnsatLowerBound => !consistent,
            };
            event as u64
        })
        .sum();

    let frequency = events as f64 / samples as f64;
    let wilson = wilson_lower(events, samples, Z_99_ONE_SIDED);
    let threshold = 1.0 - (0.5f64).powi(alpha as i32) - INEQUALITY_SLACK;
    Ok(ResidualBoundReport {
        direction,
        n,
        s,
        alpha,
        m_xor: m,
        h_log2,
        samples,
        seed,
        events,
        frequency,
        wilson_lower_99: wilson,
        threshold,
        slack: INEQUALITY_SLACK,
        pass: wilson >= threshold,
    })
}

pub fn test_residual_sat_bound(
    n: usize,
    s: f64,
    alpha: u32,
    samples: u64,
    seed: u64,
) -> Result<ResidualBoundReport, StatTestError> {
    run_residual_bound(ResidualDirection::SatLowerBound, n, s, alpha, samples, seed)
}

pub fn test_residual_unsat_bound(
    n: usize,
    s: f64,
    alpha: u32,
    samples: u64,
    seed: u64,
) -> Result<ResidualBoundReport, StatTestError> {
    run_residual_bound(ResidualDirection::UnsatLowerBound, n, s, alpha, samples, seed)
}

/// Frequency with which #F stays below (2ε(1−2^-k)^r)^n, against the
/// Markov tail 1 − ε^-n.
#[derive(Debug, Clone, Serialize)]
pub struct MarkovBoundReport {
    pub k: usize,
    pub r: f64,
    pub n: usize,
    pub epsilon: f64,
    pub samples: u64,
    pub seed: u64,
    pub bound_log2: f64,
    pub violations: u64,
    pub violation_frequency: f64,
    pub markov_tail: f64,
    pub compliance_wilson_lower_99: f64,
    pub compliance_threshold: f64,
    pub slack: f64,
    pub pass: bool,
}

pub fn test_markov_count_bound(
    k: usize,
    r: f64,
    n: usize,
    epsilon: f64,
    samples: u64,
    seed: u64,
) -> Result<MarkovBoundReport, StatTestError> {
    if epsilon <= 1.0 {
        return Err(StatTestError::InvalidParams(
            "epsilon must exceed 1".into(),
        ));
    }
    if samples == 0 {
        return Err(StatTestError::InvalidParams("samples must be positive".into()));
    }
    let params = RandomModelParams::new(k, n, r, 0.0)
        .map_err(|e| StatTestError::InvalidParams(e.to_string()))?;
    let bound_log2 =
        n as f64 * (1.0 + epsilon.log2() + r * (1.0 - (0.5f64).powi(k as i32)).log2());

    let violations = (0..samples)
        .into_par_iter()
        .map(|i| {
            let f = sample_formula(&params, derive_seed(seed, &[i])).expect("params validated");
            let result = count_exact(&f)?;
            Ok(if result.is_sat() {
                (log2_exact(&result.count) >= bound_log2) as u64
            } else {
                0 // zero solutions can never reach the positive bound
            })
        })
        .collect::<Result<Vec<u64>, CountError>>()?
        .into_iter()
        .sum::<u64>();

    let violation_frequency = violations as f64 / samples as f64;
    let markov_tail = epsilon.powi(-(n as i32));
    let compliance_threshold = 1.0 - markov_tail - INEQUALITY_SLACK;
    let compliance_wilson = wilson_lower(samples - violations, samples, Z_99_ONE_SIDED);
    Ok(MarkovBoundReport {
        k,
        r,
        n,
        epsilon,
        samples,
        seed,
        bound_log2,
        violations,
        violation_frequency,
        markov_tail,
        compliance_wilson_lower_99: compliance_wilson,
        compliance_threshold,
        slack: INEQUALITY_SLACK,
        pass: compliance_wilson >= compliance_threshold,
    })
}
