use std::path::PathBuf;

use serde::Serialize;

use super::analyze::{load_futures, load_spot};
use super::output::OutputSet;
use super::StatsArgs;
use crate::error::{Error, Result};
use crate::series_prep::{align_on_common_dates, log_returns, splice_continuous_futures, PriceField};
use crate::stats::{
    adf_test, jarque_bera, pearson_correlation, summary_stats, AdfVariant, LagOrder, SummaryStats,
    TestResult,
};

pub const SERIES: [&str; 3] = ["VIX", "VXFC", "VXFS"];

#[derive(Debug, Clone, Serialize)]
pub struct SeriesRow {
    pub series: String,
    pub n_prices: usize,
    pub summary: SummaryStats,
    pub jarque_bera: TestResult,
    /// `None` when the series is too short for the regression.
    pub adf_constant: Option<TestResult>,
    pub adf_constant_trend: Option<TestResult>,
}

/// Per-series summary rows and the correlation matrix of log returns.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryTable {
    pub config: String,
    pub panel_a: Vec<SeriesRow>,
    pub series: Vec<String>,
    pub correlation: Vec<Vec<f64>>,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

fn adf_or_short(x: &[f64], variant: AdfVariant) -> Result<Option<TestResult>> {
    match adf_test(x, variant, LagOrder::Auto) {
        Ok(r) => Ok(Some(r)),
        Err(Error::InsufficientData(msg)) => {
            log::warn!("ADF skipped: {msg}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn fmt_test(t: &Option<TestResult>, stat: bool) -> String {
    match t {
        Some(t) if stat => t.statistic.to_string(),
        Some(t) => t.p_value.to_string(),
        None => String::new(),
    }
}

pub fn cmd_stats(a: &StatsArgs) -> Result<SummaryTable> {
    let spot = load_spot(&a.data.vix)?;
    let quotes = load_futures(&a.data.futures)?;
    let close = splice_continuous_futures(&quotes, PriceField::Close)?;
    let settle = splice_continuous_futures(&quotes, PriceField::Settle)?;
    let (close, spot) = align_on_common_dates(&close, &spot);
    let (settle, spot) = align_on_common_dates(&settle, &spot);
    let (close, _) = align_on_common_dates(&close, &spot);

    let prices = [&spot, &close, &settle];
    let returns: Vec<Vec<f64>> = prices
        .iter()
        .map(|p| log_returns(p).map(|r| r.values))
        .collect::<Result<_>>()?;

    let mut panel_a = Vec::new();
    for ((name, p), r) in SERIES.iter().zip(prices).zip(&returns) {
        panel_a.push(SeriesRow {
            series: name.to_string(),
            n_prices: p.len(),
            summary: summary_stats(r)?,
            jarque_bera: jarque_bera(r)?,
            adf_constant: adf_or_short(r, AdfVariant::Constant)?,
            adf_constant_trend: adf_or_short(r, AdfVariant::ConstantAndTrend)?,
        });
    }
    let mut correlation = vec![vec![1.0; 3]; 3];
    for i in 0..3 {
        for j in i + 1..3 {
            let c = pearson_correlation(&returns[i], &returns[j])?;
            correlation[i][j] = c;
            correlation[j][i] = c;
        }
    }

    let config = format!(
        "command=stats vix={} futures={}",
        a.data.vix.display(),
        a.data.futures.display()
    );
    let mut table = SummaryTable {
        config: config.clone(),
        panel_a,
        series: SERIES.iter().map(|s| s.to_string()).collect(),
        correlation,
        files: Vec::new(),
    };

    let mut out = OutputSet::new(&a.data.out, &config);
    out.add("summary_panel_a.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        let mut header = vec!["statistic".to_string()];
        header.extend(table.panel_a.iter().map(|r| r.series.clone()));
        w.write_record(&header)?;
        type Cell = fn(&SeriesRow) -> String;
        let rows: [(&str, Cell); 14] = [
            ("prices", |r| r.n_prices.to_string()),
            ("returns", |r| r.summary.n.to_string()),
            ("mean", |r| r.summary.mean.to_string()),
            ("maximum", |r| r.summary.maximum.to_string()),
            ("minimum", |r| r.summary.minimum.to_string()),
            ("std_dev", |r| r.summary.std_dev.to_string()),
            ("skewness", |r| r.summary.skewness.to_string()),
            ("kurtosis", |r| r.summary.kurtosis.to_string()),
            ("jarque_bera", |r| r.jarque_bera.statistic.to_string()),
            ("jarque_bera_p", |r| r.jarque_bera.p_value.to_string()),
            ("adf_constant", |r| fmt_test(&r.adf_constant, true)),
            ("adf_constant_p", |r| fmt_test(&r.adf_constant, false)),
            ("adf_constant_trend", |r| fmt_test(&r.adf_constant_trend, true)),
            ("adf_constant_trend_p", |r| fmt_test(&r.adf_constant_trend, false)),
        ];
        for (label, cell) in rows {
            let mut rec = vec![label.to_string()];
            rec.extend(table.panel_a.iter().map(cell));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    })?;
    out.add("summary_panel_b.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        let mut header = vec!["series".to_string()];
        header.extend(table.series.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in table.series.iter().zip(&table.correlation) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|c| c.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    })?;
    let mut json = serde_json::to_vec_pretty(&table)
        .map_err(|e| Error::io(a.data.out.join("summary.json"), e.into()))?;
    json.push(b'\n');
    out.add_raw("summary.json", json);
    table.files = out.commit()?;
    for r in &table.panel_a {
        println!(
            "{}: n={} mean={:.5} std={:.5} skew={:.5} kurt={:.5}",
            r.series, r.summary.n, r.summary.mean, r.summary.std_dev, r.summary.skewness,
            r.summary.kurtosis
        );
    }
    Ok(table)
}
