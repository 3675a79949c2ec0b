use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::ensemble::ThermalPath;
use crate::error::{Error, Result};

/// A thermal path sampled on the trading calendar of the second series.
///
/// Positive `lag_days` means the first series (X) leads the second (Y).
/// Calendar indices the path does not cover are omitted; `indices` gives the
/// position of every retained date in the full calendar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadLagPath {
    pub dates: Vec<NaiveDate>,
    pub indices: Vec<usize>,
    pub lag_days: Vec<f64>,
    pub significant: Vec<Option<bool>>,
    pub member: (usize, usize),
    pub temperature: f64,
    pub free_energy_per_step: f64,
}

impl LeadLagPath {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Lag at calendar index `tau`, if covered.
    pub fn lag_at(&self, tau: usize) -> Option<f64> {
        self.indices
            .binary_search(&tau)
            .ok()
            .map(|k| self.lag_days[k])
    }
}

/// Samples `<x>` at rotated time `t = 2 tau` for each calendar index `tau`.
pub fn to_calendar_lags(
    path: &ThermalPath,
    dates: &[NaiveDate],
    temperature: f64,
) -> Result<LeadLagPath> {
    if path.is_empty() || path.t_values.len() != path.x_values.len() {
        return Err(Error::EmptyOverlap("thermal path is empty".into()));
    }
    let t_min = path.t_values[0];
    let t_max = *path.t_values.last().unwrap();
    let mut out = LeadLagPath {
        dates: Vec::new(),
        indices: Vec::new(),
        lag_days: Vec::new(),
        significant: Vec::new(),
        member: path.member,
        temperature,
        free_energy_per_step: path.free_energy_per_step,
    };
    for (tau, date) in dates.iter().enumerate() {
        let t = 2 * tau;
        if t < t_min || t > t_max {
            continue;
        }
        let value = match path.t_values.binary_search(&t) {
            Ok(k) => path.x_values[k],
            Err(k) => {
                let (ta, tb) = (path.t_values[k - 1] as f64, path.t_values[k] as f64);
                let (xa, xb) = (path.x_values[k - 1], path.x_values[k]);
                xa + (xb - xa) * (t as f64 - ta) / (tb - ta)
            }
        };
        out.dates.push(*date);
        out.indices.push(tau);
        out.lag_days.push(value);
        out.significant.push(None);
    }
    if out.is_empty() {
        return Err(Error::EmptyOverlap(
            "thermal path does not cover any calendar date".into(),
        ));
    }
    Ok(out)
}
