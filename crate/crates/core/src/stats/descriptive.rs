use serde::{Deserialize, Serialize};

use super::TestResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub maximum: f64,
    pub minimum: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std_dev: f64,
    /// `m3 / m2^(3/2)` with population central moments.
    pub skewness: f64,
    /// Raw kurtosis `m4 / m2^2`.
    pub kurtosis: f64,
}

pub fn summary_stats(x: &[f64]) -> Result<SummaryStats> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "summary statistics need at least 2 values, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    if m2 == 0.0 {
        return Err(Error::Degenerate(
            "zero variance: skewness and kurtosis undefined".into(),
        ));
    }
    let std_dev = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    Ok(SummaryStats {
        n,
        mean,
        maximum: x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        minimum: x.iter().copied().fold(f64::INFINITY, f64::min),
        std_dev,
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    })
}

/// Jarque-Bera normality test, `n/6 (S^2 + (K-3)^2/4)` against chi-squared(2).
pub fn jarque_bera(x: &[f64]) -> Result<TestResult> {
    if x.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "Jarque-Bera needs at least 8 values, got {}",
            x.len()
        )));
    }
    let s = summary_stats(x)?;
    let statistic =
        s.n as f64 / 6.0 * (s.skewness.powi(2) + (s.kurtosis - 3.0).powi(2) / 4.0);
    Ok(TestResult {
        statistic,
        // chi-squared(2) survival function
        p_value: (-statistic / 2.0).exp(),
        detail: "chi2(2)".into(),
    })
}

pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData("correlation needs 2 points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("correlation of a constant series".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
