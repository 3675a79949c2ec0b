use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;

use super::output::OutputSet;
use super::AnalyzeArgs;
use crate::error::{Error, Result};
use crate::selfconsistent::{
    lagged_alignment, majority_mask, mark_significance, rolling_self_consistent_test,
    sweep_windows, write_mask_csv, write_reports,
};
use crate::series_prep::{
    align_on_common_dates, log_returns, parse_price_csv, splice_continuous_futures, standardize,
    ContractQuote, PriceFile, PriceSeries, ReturnSeries, Schema,
};
use crate::tops::{distance_matrix, run_ensemble, to_calendar_lags, EnsembleConfig, LeadLagPath};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSummary {
    pub label: String,
    /// Inclusive lower bound, `None` for the first phase.
    pub from: Option<NaiveDate>,
    /// Exclusive upper bound, `None` for the last phase.
    pub to: Option<NaiveDate>,
    pub n_days: usize,
    pub fraction_negative: Option<f64>,
    pub mean_lag: Option<f64>,
    /// `(bin center, count)` over unit bins centred on integers.
    pub histogram: Vec<(i64, usize)>,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub path: LeadLagPath,
    pub phases: Vec<PhaseSummary>,
    pub files: Vec<PathBuf>,
}

pub(crate) fn load_spot(path: &Path) -> Result<PriceSeries> {
    match parse_price_csv(path, Schema::Spot)? {
        PriceFile::Spot(s) => Ok(s),
        PriceFile::Futures(_) => unreachable!("spot schema yields a spot series"),
    }
}

pub(crate) fn load_futures(path: &Path) -> Result<Vec<ContractQuote>> {
    match parse_price_csv(path, Schema::Futures)? {
        PriceFile::Futures(q) => Ok(q),
        PriceFile::Spot(_) => unreachable!("futures schema yields quotes"),
    }
}

/// Splits the path at the break dates and summarises each piece.
pub fn phase_summaries(path: &LeadLagPath, breaks: &[NaiveDate]) -> Result<Vec<PhaseSummary>> {
    if breaks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "phase breaks must be strictly increasing".into(),
        ));
    }
    let mut out = Vec::with_capacity(breaks.len() + 1);
    for k in 0..=breaks.len() {
        let from = k.checked_sub(1).map(|i| breaks[i]);
        let to = breaks.get(k).copied();
        let lags: Vec<f64> = path
            .dates
            .iter()
            .zip(&path.lag_days)
            .filter(|(d, _)| from.is_none_or(|f| **d >= f) && to.is_none_or(|t| **d < t))
            .map(|(_, l)| *l)
            .collect();
        let n = lags.len();
        let mut histogram = Vec::new();
        if n > 0 {
            let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
            for l in &lags {
                *counts.entry((l + 0.5).floor() as i64).or_default() += 1;
            }
            let lo = *counts.keys().next().unwrap();
            let hi = *counts.keys().next_back().unwrap();
            histogram = (lo..=hi).map(|b| (b, counts.get(&b).copied().unwrap_or(0))).collect();
        }
        out.push(PhaseSummary {
            label: format!("phase{}", k + 1),
            from,
            to,
            n_days: n,
            fraction_negative: (n > 0)
                .then(|| lags.iter().filter(|l| **l < 0.0).count() as f64 / n as f64),
            mean_lag: (n > 0).then(|| lags.iter().sum::<f64>() / n as f64),
            histogram,
        });
    }
    Ok(out)
}

fn config_line(a: &AnalyzeArgs) -> String {
    let phases: Vec<String> = a.phases.iter().map(|d| d.to_string()).collect();
    format!(
        "command=analyze vix={} futures={} price_field={} temperature={} margin={} window={} \
         sweep_windows={} allow_any_window={} alpha={} phases={}",
        a.data.vix.display(),
        a.data.futures.display(),
        a.price_field,
        a.temperature,
        a.margin,
        a.window,
        a.sweep_windows,
        a.allow_any_window,
        a.alpha,
        phases.join(",")
    )
}

fn opt(v: Option<impl ToString>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn write_returns<W: Write>(
    out: W,
    raw_x: &ReturnSeries,
    raw_y: &ReturnSeries,
    x: &ReturnSeries,
    y: &ReturnSeries,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "date",
        "futures_log_return",
        "vix_log_return",
        "futures_standardized",
        "vix_standardized",
    ])?;
    for i in 0..x.len() {
        w.write_record([
            x.dates[i].to_string(),
            raw_x.values[i].to_string(),
            raw_y.values[i].to_string(),
            x.values[i].to_string(),
            y.values[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn write_path<W: Write>(out: W, path: &LeadLagPath) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "lag_days", "member_i1", "member_i2", "free_energy_per_step"])?;
    for (d, l) in path.dates.iter().zip(&path.lag_days) {
        w.write_record([
            d.to_string(),
            l.to_string(),
            path.member.0.to_string(),
            path.member.1.to_string(),
            path.free_energy_per_step.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<AnalyzeOutcome> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha {} not in (0, 1)", a.alpha)));
    }
    let spot = load_spot(&a.data.vix)?;
    let quotes = load_futures(&a.data.futures)?;
    let spliced = splice_continuous_futures(&quotes, a.price_field)?;
    let (fut, spot) = align_on_common_dates(&spliced, &spot);

    let raw_x = log_returns(&fut)?;
    let raw_y = log_returns(&spot)?;
    let x = standardize(&raw_x)?;
    let y = standardize(&raw_y)?;

    let cfg = EnsembleConfig {
        margin: a.margin,
        temperature: a.temperature,
        ..EnsembleConfig::default()
    };
    let d = distance_matrix(&x, &y)?;
    log::info!("running {} ensemble members on N = {}", (a.margin + 1).pow(2), d.n());
    let ensemble = run_ensemble(&d, &cfg)?;
    let mut path = to_calendar_lags(&ensemble.path, &y.dates, a.temperature)?;

    let pairs = lagged_alignment(&x, &y, &path)?;
    let report = rolling_self_consistent_test(&pairs, a.window, a.alpha, a.allow_any_window)?;
    mark_significance(&mut path, &report);
    let sweep = if a.sweep_windows {
        Some(sweep_windows(&pairs, a.alpha)?)
    } else {
        None
    };
    let phases = phase_summaries(&path, &a.phases)?;

    let mut out = OutputSet::new(&a.data.out, &config_line(a));
    out.add("spliced_futures.csv", |w| fut.write_spliced_csv(w))?;
    out.add("returns.csv", |w| write_returns(w, &raw_x, &raw_y, &x, &y))?;
    out.add("lead_lag_path.csv", |w| write_path(w, &path))?;
    out.add("ensemble.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["i1", "i2", "free_energy_per_step"])?;
        for m in &ensemble.members {
            w.write_record([
                m.i1.to_string(),
                m.i2.to_string(),
                m.free_energy_per_step.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    out.add("self_consistency.csv", |w| report.write_csv(w))?;
    if let Some(reports) = &sweep {
        out.add("self_consistency_sweep.csv", |w| write_reports(reports, w))?;
        let mask = majority_mask(reports);
        out.add("significance_mask.csv", |w| write_mask_csv(&mask, w))?;
    }
    out.add("phases.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["phase", "from", "to", "n_days", "fraction_negative", "mean_lag_days"])?;
        for p in &phases {
            w.write_record([
                p.label.clone(),
                opt(p.from),
                opt(p.to),
                p.n_days.to_string(),
                opt(p.fraction_negative),
                opt(p.mean_lag),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    out.add("phase_histograms.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["phase", "bin_center", "count"])?;
        for p in &phases {
            for (b, c) in &p.histogram {
                w.write_record([p.label.clone(), b.to_string(), c.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    })?;
    let files = out.commit()?;
    for p in &phases {
        println!(
            "{}: {} days, fraction negative {}, mean lag {}",
            p.label,
            p.n_days,
            p.fraction_negative.map_or("n/a".into(), |f| format!("{:.4}", f)),
            p.mean_lag.map_or("n/a".into(), |m| format!("{:.4}", m)),
        );
    }
    Ok(AnalyzeOutcome { path, phases, files })
}
