//! Synthetic pairs with known lead-lag structure, recovery scoring, and an
//! exhaustive-enumeration reference for the thermal path.
//!
//! Random draws come from `ChaCha8Rng::seed_from_u64(seed)`; standard normal
//! variates use the `rand_distr` ziggurat sampler. The innovation stream is
//! drawn first (hidden history, observed window, hidden future), then the
//! observation noise, so a scenario's output depends only on its fields.

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series_prep::{standardize, ReturnSeries};
use crate::tops::{DistanceMatrix, LatticeNode, LeadLagPath, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub length: usize,
    /// Positive when X leads Y.
    pub lag: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagScenario {
    pub segments: Vec<Segment>,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: u64,
}

impl LagScenario {
    pub fn constant(n: usize, lag: i64, noise_std: f64, seed: u64) -> Self {
        Self {
            segments: vec![Segment { length: n, lag }],
            noise_std,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidConfig("scenario has no segments".into()));
        }
        for s in &self.segments {
            if s.length == 0 {
                return Err(Error::InvalidConfig("segment length must be >= 1".into()));
            }
            if s.lag.unsigned_abs() as usize >= s.length {
                return Err(Error::InvalidConfig(format!(
                    "|lag| {} must be below segment length {}",
                    s.lag, s.length
                )));
            }
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::InvalidConfig("noise_std must be non-negative".into()));
        }
        if self.len() < 3 {
            return Err(Error::InvalidConfig("scenario must span at least 3 days".into()));
        }
        Ok(())
    }

    /// Lag in force at each observed index.
    pub fn truth(&self) -> Vec<i64> {
        self.segments
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.lag, s.length))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct LaggedPair {
    pub x: ReturnSeries,
    pub y: ReturnSeries,
    pub truth: Vec<i64>,
}

pub fn synthetic_origin() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date")
}

/// Draws `X` iid standard normal and `Y(t) = X(t - lag(t)) + noise * eta(t)`.
///
/// Lags reaching before the first or past the last observation read from a
/// hidden stretch of the same innovation process, so the observed window
/// keeps the scenario's full length. Both outputs are standardized.
pub fn generate_lagged_pair(scenario: &LagScenario) -> Result<LaggedPair> {
    scenario.validate()?;
    let truth = scenario.truth();
    let n = truth.len();
    let history = truth.iter().copied().max().unwrap_or(0).max(0) as usize;
    let future = (-truth.iter().copied().min().unwrap_or(0)).max(0) as usize;
    if history + future > 0 {
        log::debug!("drawing {history} hidden leading and {future} hidden trailing innovations");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let innovations: Vec<f64> = (0..history + n + future)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let x_at = |i: i64| innovations[(i + history as i64) as usize];
    let x: Vec<f64> = (0..n as i64).map(x_at).collect();
    let y: Vec<f64> = truth
        .iter()
        .enumerate()
        .map(|(t, lag)| {
            let eta: f64 = StandardNormal.sample(&mut rng);
            x_at(t as i64 - lag) + scenario.noise_std * eta
        })
        .collect();
    let origin = synthetic_origin();
    Ok(LaggedPair {
        x: standardize(&ReturnSeries::from_values(x, origin))?,
        y: standardize(&ReturnSeries::from_values(y, origin))?,
        truth,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub rmse: f64,
    /// Worst delay over all truth changes, in days; `None` if some change is
    /// never matched within one day.
    pub switch_latency: Option<usize>,
    pub n_scored: usize,
}

/// Scores an estimated path against the true lag per calendar index.
///
/// Indices closer than `burn` to either end of the truth are ignored.
pub fn recovery_score(estimated: &LeadLagPath, truth: &[f64], burn: usize) -> Result<Recovery> {
    let n = truth.len();
    let scored: Vec<(usize, f64)> = estimated
        .indices
        .iter()
        .zip(&estimated.lag_days)
        .filter(|(tau, _)| **tau >= burn && **tau + burn < n)
        .map(|(tau, v)| (*tau, *v))
        .collect();
    if scored.is_empty() {
        return Err(Error::EmptyOverlap(
            "no estimated dates remain after burn-in".into(),
        ));
    }
    let sse: f64 = scored.iter().map(|(tau, v)| (v - truth[*tau]).powi(2)).sum();
    let rmse = (sse / scored.len() as f64).sqrt();

    let mut latency = Some(0usize);
    for change in 1..n {
        if truth[change] == truth[change - 1] {
            continue;
        }
        let hit = scored
            .iter()
            .filter(|(tau, _)| *tau >= change)
            .find(|(tau, v)| (v - truth[*tau]).abs() <= 1.0)
            .map(|(tau, _)| tau - change);
        latency = match (latency, hit) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    }
    Ok(Recovery {
        rmse,
        switch_latency: latency,
        n_scored: scored.len(),
    })
}

pub const ORACLE_MAX_N: usize = 8;

/// `<x(t)>` for every rotated time from start to end, computed by listing
/// every monotone partial path from the start (and, mirrored, from the end)
/// and summing their Boltzmann weights directly.
pub fn brute_force_thermal_oracle(
    d: &DistanceMatrix,
    temperature: f64,
    start: LatticeNode,
    end: LatticeNode,
) -> Result<Vec<f64>> {
    let n = d.n();
    if n > ORACLE_MAX_N {
        return Err(Error::InvalidConfig(format!(
            "enumeration oracle limited to N <= {ORACLE_MAX_N}, got {n}"
        )));
    }
    if !(temperature > 0.0) {
        return Err(Error::InvalidConfig("temperature must be positive".into()));
    }
    let region = Region::new(n, start, end)?;
    let mut fwd = vec![0.0; n * n];
    let mut bwd = vec![0.0; n * n];
    enumerate(d, &region, (region.s1, region.s2), 0.0, 1, temperature, &mut fwd);
    enumerate(d, &region, (region.e1, region.e2), 0.0, -1, temperature, &mut bwd);

    let mean = |w: &[f64], t: usize| {
        let mut total = 0.0;
        let mut moment = 0.0;
        for t1 in region.s1..=region.e1 {
            if t < t1 {
                break;
            }
            let t2 = t - t1;
            if t2 < region.s2 || t2 > region.e2 {
                continue;
            }
            let v = w[t1 * n + t2];
            total += v;
            moment += v * (t2 as f64 - t1 as f64);
        }
        moment / total
    };
    Ok((region.t_start()..=region.t_end())
        .map(|t| (mean(&fwd, t) + mean(&bwd, t)) / 2.0)
        .collect())
}

fn enumerate(
    d: &DistanceMatrix,
    region: &Region,
    (t1, t2): (usize, usize),
    energy: f64,
    step: isize,
    temperature: f64,
    acc: &mut [f64],
) {
    let n = d.n();
    let e = energy + d.get(t1, t2);
    acc[t1 * n + t2] += (-e / temperature).exp();
    let inside = |a: isize, b: isize| {
        a >= region.s1 as isize
            && a <= region.e1 as isize
            && b >= region.s2 as isize
            && b <= region.e2 as isize
    };
    for (da, db) in [(1, 0), (0, 1), (1, 1)] {
        let a = t1 as isize + step * da;
        let b = t2 as isize + step * db;
        if inside(a, b) {
            enumerate(d, region, (a as usize, b as usize), e, step, temperature, acc);
        }
    }
}
