//! Experiment harness: grid scans of the empirical satisfiability
//! probability over (r, s), adaptive crossing-point estimation, and linear
//! fits of the crossing line.
//!
//! Every trial's seed is a pure function of (master seed, cell indices,
//! trial index), so scans are reproducible regardless of worker count or
//! scheduling. Budget-exhausted trials are recorded as censored and never
//! coerced to a verdict; cells where more than 5% of trials were censored
//! are flagged and report no probability estimate.

use crate::formula::RandomModelParams;
use crate::sample::sample_formula;
use crate::seed::derive_seed;
use crate::solver::{solve, SolveBudget, Verdict};
use crate::stats::{wilson_interval, Z_95_TWO_SIDED};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

/// Cells with a higher censored fraction are flagged.
pub const EXHAUSTED_CAP: f64 = 0.05;
/// Default stopping width for crossing bisection, in density units.
pub const DEFAULT_RESOLUTION: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum LabError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error(
        "initial probes do not bracket the target: p({lo}) = {p_lo}, p({hi}) = {p_hi}, target {target}"
    )]
    NotBracketed {
        lo: f64,
        hi: f64,
        p_lo: f64,
        p_hi: f64,
        target: f64,
    },
    #[error("probe at density {density} had every trial censored; raise the budget")]
    ProbeExhausted { density: f64 },
    #[error("need at least {need} crossings at distinct densities, got {got}")]
    InsufficientData { need: usize, got: usize },
}

fn budget_to_millis(budget: &SolveBudget) -> Option<u64> {
    budget.wall_timeout.map(|d| d.as_millis() as u64)
}

fn budget_from_millis(ms: Option<u64>) -> Option<std::time::Duration> {
    ms.map(std::time::Duration::from_millis)
}

mod budget_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        max_conflicts: Option<u64>,
        wall_timeout_ms: Option<u64>,
    }

    pub fn serialize<S: Serializer>(b: &SolveBudget, s: S) -> Result<S::Ok, S::Error> {
        Repr {
            max_conflicts: b.max_conflicts,
            wall_timeout_ms: budget_to_millis(b),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SolveBudget, D::Error> {
        let repr = Repr::deserialize(d)?;
        Ok(SolveBudget {
            max_conflicts: repr.max_conflicts,
            wall_timeout: budget_from_millis(repr.wall_timeout_ms),
        })
    }
}

/// A full (r, s) probability grid to scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub k: usize,
    pub n: usize,
    pub r_values: Vec<f64>,
    pub s_values: Vec<f64>,
    pub trials_per_cell: u32,
    #[serde(with = "budget_serde")]
    pub budget: SolveBudget,
    pub master_seed: u64,
}

impl GridSpec {
    fn validate(&self) -> Result<(), LabError> {
        if self.trials_per_cell == 0 {
            return Err(LabError::InvalidSpec("trials_per_cell must be positive".into()));
        }
        if self.r_values.is_empty() || self.s_values.is_empty() {
            return Err(LabError::InvalidSpec("density grids must be non-empty".into()));
        }
        for axis in [&self.r_values, &self.s_values] {
            if axis.iter().any(|d| !(*d >= 0.0)) {
                return Err(LabError::InvalidSpec("densities must be non-negative".into()));
            }
            if axis.windows(2).any(|w| w[0] > w[1]) {
                return Err(LabError::InvalidSpec("density grids must be sorted".into()));
            }
        }
        RandomModelParams::new(self.k, self.n, 0.0, 0.0)
            .map_err(|e| LabError::InvalidSpec(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub sat: u32,
    pub unsat: u32,
    pub exhausted: u32,
}

impl CellCounts {
    pub fn trials(&self) -> u32 {
        self.sat + self.unsat + self.exhausted
    }

    pub fn exhausted_fraction(&self) -> f64 {
        self.exhausted as f64 / self.trials() as f64
    }

    /// Empirical P(sat) over decided trials; None when the cell is flagged
    /// (censored fraction above the cap) or nothing was decided.
    pub fn p_sat(&self) -> Option<f64> {
        let decided = self.sat + self.unsat;
        if decided == 0 || self.exhausted_fraction() > EXHAUSTED_CAP {
            None
        } else {
            Some(self.sat as f64 / decided as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub spec: GridSpec,
    /// Row-major: index = r_index * s_values.len() + s_index.
    pub cells: Vec<CellCounts>,
}

impl ScanResult {
    pub fn cell(&self, r_index: usize, s_index: usize) -> &CellCounts {
        &self.cells[r_index * self.spec.s_values.len() + s_index]
    }
}

fn run_trials(
    k: usize,
    n: usize,
    r: f64,
    s: f64,
    trials: u32,
    budget: SolveBudget,
    seed_of_trial: impl Fn(u32) -> u64 + Sync,
) -> CellCounts {
    let params = RandomModelParams { k, n, r, s };
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let f = sample_formula(&params, seed_of_trial(t)).expect("validated spec");
            match solve(&f, budget).verdict {
                Verdict::Sat(_) => CellCounts { sat: 1, ..Default::default() },
                Verdict::Unsat => CellCounts { unsat: 1, ..Default::default() },
                Verdict::Exhausted => CellCounts { exhausted: 1, ..Default::default() },
            }
        })
        .reduce(CellCounts::default, |a, b| CellCounts {
            sat: a.sat + b.sat,
            unsat: a.unsat + b.unsat,
            exhausted: a.exhausted + b.exhausted,
        })
}

/// Tallies solver verdicts for every (r, s) cell of the grid.
pub fn scan(spec: &GridSpec) -> Result<ScanResult, LabError> {
    spec.validate()?;
    let cells: Vec<CellCounts> = spec
        .r_values
        .par_iter()
        .enumerate()
        .flat_map(|(i, &r)| {
            spec.s_values
                .par_iter()
                .enumerate()
                .map(move |(j, &s)| (i, r, j, s))
        })
        .map(|(i, r, j, s)| {
            run_trials(spec.k, spec.n, r, s, spec.trials_per_cell, spec.budget, |t| {
                derive_seed(spec.master_seed, &[i as u64, j as u64, t as u64])
            })
        })
        .collect();
    Ok(ScanResult {
        spec: spec.clone(),
        cells,
    })
}

/// Which density is held fixed while the other is searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedAxis {
    R,
    S,
}

impl FixedAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            FixedAxis::R => "r",
            FixedAxis::S => "s",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingEstimate {
    pub k: usize,
    pub n: usize,
    pub fixed_axis: FixedAxis,
    pub fixed_value: f64,
    /// Density on the searched axis where the estimated P(sat) crosses the target.
    pub crossing: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials_used: u64,
    pub probes: u32,
    pub exhausted_trials: u64,
}

pub struct CrossingRequest {
    pub k: usize,
    pub n: usize,
    pub fixed_axis: FixedAxis,
    pub fixed_value: f64,
    pub interval: (f64, f64),
    pub trials_per_probe: u32,
    pub target: f64,
    pub resolution: f64,
    pub budget: SolveBudget,
    pub seed: u64,
}

impl CrossingRequest {
    pub fn new(k: usize, n: usize, fixed_axis: FixedAxis, fixed_value: f64) -> Self {
        CrossingRequest {
            k,
            n,
            fixed_axis,
            fixed_value,
            interval: (0.0, 1.0),
            trials_per_probe: 50,
            target: 0.5,
            resolution: DEFAULT_RESOLUTION,
            budget: SolveBudget::unlimited(),
            seed: 0,
        }
    }
}

struct Probe {
    p_hat: f64,
    wilson: (f64, f64),
    decided: u64,
    exhausted: u64,
}

/// Adaptive bisection for the density where P(sat) crosses the target.
///
/// P(sat) is non-increasing along either density axis in expectation. The
/// bracket [lo, hi] shrinks while the midpoint's Wilson 95% interval
/// excludes the target; it stops when the interval straddles the target
/// (the midpoint is then statistically indistinguishable from the
/// crossing) or the bracket reaches the resolution floor. The reported
/// interval is the final bracket, which is conservative.
pub fn estimate_crossing(req: &CrossingRequest) -> Result<CrossingEstimate, LabError> {
    let (lo, hi) = req.interval;
    if !(lo >= 0.0) || !(hi > lo) {
        return Err(LabError::InvalidSpec(format!(
            "bad search interval [{lo}, {hi}]"
        )));
    }
    if req.trials_per_probe == 0 {
        return Err(LabError::InvalidSpec("trials_per_probe must be positive".into()));
    }
    if !(req.target > 0.0 && req.target < 1.0) {
        return Err(LabError::InvalidSpec(format!(
            "target must be in (0, 1), got {}",
            req.target
        )));
    }
    RandomModelParams::new(req.k, req.n, 0.0, 0.0)
        .map_err(|e| LabError::InvalidSpec(e.to_string()))?;

    let mut trials_used = 0u64;
    let mut exhausted_trials = 0u64;
    let mut probes = 0u32;

    let probe = |density: f64, probe_index: u32| -> Result<Probe, LabError> {
        let (r, s) = match req.fixed_axis {
            FixedAxis::R => (req.fixed_value, density),
            FixedAxis::S => (density, req.fixed_value),
        };
        let counts = run_trials(req.k, req.n, r, s, req.trials_per_probe, req.budget, |t| {
            derive_seed(req.seed, &[probe_index as u64, t as u64])
        });
        let decided = (counts.sat + counts.unsat) as u64;
        if decided == 0 {
            return Err(LabError::ProbeExhausted { density });
        }
        Ok(Probe {
            p_hat: counts.sat as f64 / decided as f64,
            wilson: wilson_interval(counts.sat as u64, decided, Z_95_TWO_SIDED),
            decided,
            exhausted: counts.exhausted as u64,
        })
    };
    let mut run_probe = |density: f64| -> Result<Probe, LabError> {
        let p = probe(density, probes)?;
        probes += 1;
        trials_used += p.decided + p.exhausted;
        exhausted_trials += p.exhausted;
        Ok(p)
    };

    let p_lo = run_probe(lo)?;
    let p_hi = run_probe(hi)?;
    if p_lo.p_hat < req.target || p_hi.p_hat > req.target {
        return Err(LabError::NotBracketed {
            lo,
            hi,
            p_lo: p_lo.p_hat,
            p_hi: p_hi.p_hat,
            target: req.target,
        });
    }

    let (mut lo_d, mut hi_d) = (lo, hi);
    let crossing = loop {
        if hi_d - lo_d <= req.resolution {
            break 0.5 * (lo_d + hi_d);
        }
        let mid = 0.5 * (lo_d + hi_d);
        let p = run_probe(mid)?;
        let (wl, wh) = p.wilson;
        if wl > req.target {
            lo_d = mid;
        } else if wh < req.target {
            hi_d = mid;
        } else {
            // statistically unresolvable at this trial count: mid is our
            // best crossing estimate
            break mid;
        }
    };
    Ok(CrossingEstimate {
        k: req.k,
        n: req.n,
        fixed_axis: req.fixed_axis,
        fixed_value: req.fixed_value,
        crossing,
        ci_low: lo_d,
        ci_high: hi_d,
        trials_used,
        probes,
        exhausted_trials,
    })
}

/// Least-squares line through crossing points (density, crossing).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub k: usize,
    pub n: usize,
    pub crossings: Vec<(f64, f64)>,
    /// Free-intercept fit.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Fit with the intercept pinned at 1.
    pub slope_intercept1: f64,
    pub r_squared_intercept1: f64,
}

pub fn fit_slope(k: usize, n: usize, crossings: &[(f64, f64)]) -> Result<SlopeFit, LabError> {
    let mut xs: Vec<f64> = crossings.iter().map(|c| c.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(LabError::InsufficientData {
            need: 3,
            got: xs.len(),
        });
    }
    let m = crossings.len() as f64;
    let mean_x = crossings.iter().map(|c| c.0).sum::<f64>() / m;
    let mean_y = crossings.iter().map(|c| c.1).sum::<f64>() / m;
    let sxx: f64 = crossings.iter().map(|c| (c.0 - mean_x).powi(2)).sum();
    let sxy: f64 = crossings
        .iter()
        .map(|c| (c.0 - mean_x) * (c.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = crossings.iter().map(|c| (c.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = crossings
        .iter()
        .map(|c| (c.1 - (slope * c.0 + intercept)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };

    // constrained through (0, 1): minimize Σ (y − 1 − b·x)²
    let sxx0: f64 = crossings.iter().map(|c| c.0 * c.0).sum();
    let sxy0: f64 = crossings.iter().map(|c| c.0 * (c.1 - 1.0)).sum();
    let slope1 = sxy0 / sxx0;
    let ss_res1: f64 = crossings
        .iter()
        .map(|c| (c.1 - (slope1 * c.0 + 1.0)).powi(2))
        .sum();
    let r_squared1 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res1 / ss_tot };

    Ok(SlopeFit {
        k,
        n,
        crossings: crossings.to_vec(),
        slope,
        intercept,
        r_squared,
        slope_intercept1: slope1,
        r_squared_intercept1: r_squared1,
    })
}

/// CSV rows `k,n,r,s,trials,sat,unsat,exhausted,p_sat`, r-major. Flagged
/// cells leave p_sat empty.
pub fn write_scan_csv<W: Write>(result: &ScanResult, sink: &mut W) -> std::io::Result<()> {
    writeln!(sink, "k,n,r,s,trials,sat,unsat,exhausted,p_sat")?;
    let spec = &result.spec;
    for (i, &r) in spec.r_values.iter().enumerate() {
        for (j, &s) in spec.s_values.iter().enumerate() {
            let cell = result.cell(i, j);
            let p = cell.p_sat().map(|p| p.to_string()).unwrap_or_default();
            writeln!(
                sink,
                "{},{},{},{},{},{},{},{},{}",
                spec.k, spec.n, r, s, spec.trials_per_cell, cell.sat, cell.unsat, cell.exhausted, p
            )?;
        }
    }
    Ok(())
}

/// CSV rows `k,n,axis,fixed_value,crossing,ci_low,ci_high,trials_used`.
pub fn write_crossings_csv<W: Write>(
    estimates: &[CrossingEstimate],
    sink: &mut W,
) -> std::io::Result<()> {
    writeln!(sink, "k,n,axis,fixed_value,crossing,ci_low,ci_high,trials_used")?;
    for e in estimates {
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{}",
            e.k,
            e.n,
            e.fixed_axis.as_str(),
            e.fixed_value,
            e.crossing,
            e.ci_low,
            e.ci_high,
            e.trials_used
        )?;
    }
    Ok(())
}
