//! Wilson score intervals for binomial proportions.

/// Two-sided 95%: Φ⁻¹(0.975).
pub const Z_95_TWO_SIDED: f64 = 1.959963984540054;
/// One-sided 99%: Φ⁻¹(0.99).
pub const Z_99_ONE_SIDED: f64 = 2.326347874040841;

/// Wilson score interval for `successes` out of `trials` at critical value `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let margin = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (
        ((center - margin) / denom).max(0.0),
        ((center + margin) / denom).min(1.0),
    )
}

pub fn wilson_lower(successes: u64, trials: u64, z: f64) -> f64 {
    wilson_interval(successes, trials, z).0
}

pub fn wilson_upper(successes: u64, trials: u64, z: f64) -> f64 {
    wilson_interval(successes, trials, z).1
}
