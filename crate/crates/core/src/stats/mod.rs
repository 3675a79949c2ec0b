//! Descriptive statistics, normality and unit-root tests, and simple OLS.
//!
//! Kurtosis is reported raw (a normal sample gives about 3), not as excess.

mod adf;
mod descriptive;
mod ols;

pub use adf::{adf_test, mackinnon_p_value, AdfVariant, LagOrder};
pub use descriptive::{jarque_bera, pearson_correlation, summary_stats, SummaryStats};
pub use ols::{ols_fit, RegressionResult};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub detail: String,
}
