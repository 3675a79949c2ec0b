//! Rolling regressions of Y(t) on X(t - lag(t)) along an estimated lead-lag
//! path. A significant slope in a window means the inferred lag actually
//! lines the two series up there.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::RangeInclusive;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series_prep::ReturnSeries;
use crate::stats::ols_fit;
use crate::tops::LeadLagPath;

pub const WINDOW_RANGE: RangeInclusive<usize> = 5..=60;
pub const DEFAULT_WINDOW: usize = 20;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Response and lagged regressor, one entry per calendar index of Y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedPairs {
    pub dates: Vec<NaiveDate>,
    pub indices: Vec<usize>,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub lags: Vec<i64>,
    /// Path dates whose lagged index fell outside the sample.
    pub dropped: usize,
}

impl AlignedPairs {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Pairs `Y(tau)` with `X(tau - l)`, `l` being `lag_days(tau)` rounded half
/// away from zero.
pub fn lagged_alignment(
    x: &ReturnSeries,
    y: &ReturnSeries,
    path: &LeadLagPath,
) -> Result<AlignedPairs> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = y.len() as i64;
    let mut out = AlignedPairs {
        dates: Vec::new(),
        indices: Vec::new(),
        y: Vec::new(),
        x: Vec::new(),
        lags: Vec::new(),
        dropped: 0,
    };
    for ((&tau, &lag), &date) in path.indices.iter().zip(&path.lag_days).zip(&path.dates) {
        let tau = tau as i64;
        let lag = lag.round() as i64;
        let src = tau - lag;
        if tau >= n || src < 0 || src >= n {
            out.dropped += 1;
            continue;
        }
        out.dates.push(date);
        out.indices.push(tau as usize);
        out.y.push(y.values[tau as usize]);
        out.x.push(x.values[src as usize]);
        out.lags.push(lag);
    }
    if out.is_empty() {
        return Err(Error::EmptyOverlap(
            "no path date has its lagged regressor inside the sample".into(),
        ));
    }
    if out.dropped > 0 {
        log::info!("dropped {} pairs with out-of-range lagged index", out.dropped);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub date: NaiveDate,
    pub index: usize,
    pub slope: f64,
    pub p_value: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfConsistencyReport {
    pub window: usize,
    pub alpha: f64,
    pub records: Vec<WindowRecord>,
    /// Windows skipped because the regressor was constant.
    pub singular_windows: usize,
}

impl SelfConsistencyReport {
    pub fn significant_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| r.significant).count() as f64 / self.records.len() as f64
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        write_reports(std::slice::from_ref(self), out)
    }
}

/// Writes one or more reports as `date,window,slope,p_value,significant`.
pub fn write_reports<W: Write>(reports: &[SelfConsistencyReport], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "window", "slope", "p_value", "significant"])?;
    for report in reports {
        for r in &report.records {
            w.write_record([
                r.date.to_string(),
                report.window.to_string(),
                r.slope.to_string(),
                r.p_value.to_string(),
                r.significant.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Trailing-window OLS of `y` on `x`; record dates are the window ends.
///
/// Window sizes outside 5..=60 are rejected unless `allow_any_window` is
/// set, in which case the only requirement is room for a regression.
pub fn rolling_self_consistent_test(
    pairs: &AlignedPairs,
    window: usize,
    alpha: f64,
    allow_any_window: bool,
) -> Result<SelfConsistencyReport> {
    if !allow_any_window && !WINDOW_RANGE.contains(&window) {
        return Err(Error::InvalidConfig(format!(
            "window {window} outside {}..={} days",
            WINDOW_RANGE.start(),
            WINDOW_RANGE.end()
        )));
    }
    if window < 3 {
        return Err(Error::InvalidConfig(format!(
            "window {window} too short for a regression"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha {alpha} not in (0, 1)")));
    }
    if pairs.len() < window {
        return Err(Error::InsufficientData(format!(
            "{} aligned pairs for a {window}-day window",
            pairs.len()
        )));
    }
    let mut records = Vec::with_capacity(pairs.len() + 1 - window);
    let mut singular_windows = 0;
    for end in window - 1..pairs.len() {
        let range = end + 1 - window..=end;
        match ols_fit(&pairs.y[range.clone()], &pairs.x[range]) {
            Ok(fit) => records.push(WindowRecord {
                date: pairs.dates[end],
                index: pairs.indices[end],
                slope: fit.slope,
                p_value: fit.p_value,
                significant: fit.p_value < alpha,
            }),
            Err(Error::Singular(_)) => singular_windows += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(SelfConsistencyReport {
        window,
        alpha,
        records,
        singular_windows,
    })
}

/// One report per window size in 5..=60.
pub fn sweep_windows(pairs: &AlignedPairs, alpha: f64) -> Result<Vec<SelfConsistencyReport>> {
    WINDOW_RANGE
        .filter(|w| *w <= pairs.len())
        .map(|w| rolling_self_consistent_test(pairs, w, alpha, false))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskRecord {
    pub date: NaiveDate,
    pub frac_significant: f64,
    pub significant_majority: bool,
}

/// Fraction of window sizes significant at each date, over the sizes that
/// have a record there; the majority flag is set at one half or more.
pub fn majority_mask(reports: &[SelfConsistencyReport]) -> Vec<MaskRecord> {
    let mut tally: BTreeMap<NaiveDate, (usize, usize)> = BTreeMap::new();
    for report in reports {
        for r in &report.records {
            let e = tally.entry(r.date).or_default();
            e.0 += r.significant as usize;
            e.1 += 1;
        }
    }
    tally
        .into_iter()
        .map(|(date, (sig, total))| {
            let frac = sig as f64 / total as f64;
            MaskRecord {
                date,
                frac_significant: frac,
                significant_majority: frac >= 0.5,
            }
        })
        .collect()
}

pub fn write_mask_csv<W: Write>(mask: &[MaskRecord], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "frac_significant", "significant_majority"])?;
    for m in mask {
        w.write_record([
            m.date.to_string(),
            m.frac_significant.to_string(),
            m.significant_majority.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Copies report flags onto the path; dates without a record become `None`.
pub fn mark_significance(path: &mut LeadLagPath, report: &SelfConsistencyReport) {
    let flags: BTreeMap<NaiveDate, bool> =
        report.records.iter().map(|r| (r.date, r.significant)).collect();
    path.significant = path.dates.iter().map(|d| flags.get(d).copied()).collect();
}
