//! Augmented Dickey-Fuller unit-root test.
//!
//! p-values use the response-surface fit of MacKinnon (1994), "Approximate
//! asymptotic distribution functions for unit-root and cointegration tests",
//! JBES 12(2), for a single series: `p = Phi(sum_k c_k tau^k)` with separate
//! coefficient sets below and above a cut-off statistic.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::ols::least_squares;
use super::TestResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdfVariant {
    Constant,
    ConstantAndTrend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LagOrder {
    /// `floor(12 (n / 100)^(1/4))`
    Auto,
    Fixed(usize),
}

struct Surface {
    tau_star: f64,
    tau_min: f64,
    tau_max: f64,
    small: [f64; 3],
    large: [f64; 4],
}

const CONSTANT: Surface = Surface {
    tau_star: -1.61,
    tau_min: -18.83,
    tau_max: 2.74,
    small: [2.1659, 1.4412, 3.8269e-2],
    large: [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2],
};

const CONSTANT_AND_TREND: Surface = Surface {
    tau_star: -2.89,
    tau_min: -16.18,
    tau_max: 0.7,
    small: [3.2512, 1.6047, 4.9588e-2],
    large: [2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2],
};

pub fn mackinnon_p_value(tau: f64, variant: AdfVariant) -> f64 {
    let s = match variant {
        AdfVariant::Constant => &CONSTANT,
        AdfVariant::ConstantAndTrend => &CONSTANT_AND_TREND,
    };
    if tau.is_nan() {
        return f64::NAN;
    }
    if tau > s.tau_max {
        return 1.0;
    }
    if tau < s.tau_min {
        return 0.0;
    }
    let coef: &[f64] = if tau <= s.tau_star { &s.small } else { &s.large };
    let z = coef.iter().rev().fold(0.0, |acc, c| acc * tau + c);
    Normal::new(0.0, 1.0).expect("standard normal").cdf(z)
}

pub(crate) fn schwert_lags(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Regresses `dx_t` on deterministic terms, `x_{t-1}` and `k` lagged
/// differences; the statistic is the t-ratio on `x_{t-1}`.
pub fn adf_test(x: &[f64], variant: AdfVariant, lags: LagOrder) -> Result<TestResult> {
    let n = x.len();
    if n < 25 {
        return Err(Error::InsufficientData(format!(
            "ADF test needs at least 25 observations, got {n}"
        )));
    }
    let k = match lags {
        LagOrder::Auto => schwert_lags(n),
        LagOrder::Fixed(k) => k,
    };
    let deterministic = match variant {
        AdfVariant::Constant => 1,
        AdfVariant::ConstantAndTrend => 2,
    };
    let params = deterministic + 1 + k;
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    if dx.len() <= k || dx.len() - k <= params + 1 {
        return Err(Error::InsufficientData(format!(
            "{n} observations too few for {k} lags"
        )));
    }
    let nobs = dx.len() - k;
    let design = DMatrix::from_fn(nobs, params, |row, col| {
        let t = row + k;
        match (col, variant) {
            (0, _) => 1.0,
            (1, AdfVariant::ConstantAndTrend) => (row + 1) as f64,
            (c, _) if c == deterministic => x[t],
            (c, _) => dx[t - (c - deterministic)],
        }
    });
    let y = DVector::from_iterator(nobs, dx[k..].iter().copied());
    let fit = least_squares(design, y)?;
    let statistic = fit.coef[deterministic] / fit.std_err[deterministic];
    Ok(TestResult {
        statistic,
        p_value: mackinnon_p_value(statistic, variant),
        detail: format!(
            "{} lags={k} nobs={nobs}",
            match variant {
                AdfVariant::Constant => "constant",
                AdfVariant::ConstantAndTrend => "constant+trend",
            }
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sequence() -> (Vec<f64>, Vec<f64>) {
        let e: Vec<f64> = (0..80u64)
            .map(|i| ((i * i * 31 + i * 17) % 97) as f64 / 97.0 - 0.5)
            .collect();
        let mut acc = 0.0;
        let level = e
            .iter()
            .map(|v| {
                acc += v;
                acc * 0.3 + v
            })
            .collect();
        (level, e)
    }

    // Reference values from statsmodels' adfuller(maxlag=2, autolag=None).
    #[test]
    fn matches_reference_implementation() {
        let (level, noise) = sequence();
        let cases = [
            (&level, AdfVariant::Constant, -1.463008174105142, 0.5517249069503734),
            (&noise, AdfVariant::Constant, -3.9710216540416767, 0.001570087566653467),
            (&level, AdfVariant::ConstantAndTrend, -3.400721162350934, 0.051291649272002304),
            (&noise, AdfVariant::ConstantAndTrend, -4.223764804414408, 0.004120707109361963),
        ];
        for (data, variant, stat, p) in cases {
            let r = adf_test(data, variant, LagOrder::Fixed(2)).unwrap();
            assert!((r.statistic - stat).abs() < 1e-9, "{variant:?}: {}", r.statistic);
            assert!((r.p_value - p).abs() < 1e-9, "{variant:?}: {}", r.p_value);
        }
    }

    #[test]
    fn response_surface_reference_points() {
        let cases = [
            (AdfVariant::Constant, -5.0, 2.2193154713956276e-05),
            (AdfVariant::Constant, -3.0, 0.034894400275345266),
            (AdfVariant::Constant, -1.0, 0.7532643012005655),
            (AdfVariant::Constant, 0.5, 0.9848730963065522),
            (AdfVariant::ConstantAndTrend, -5.0, 0.00020574728263882532),
            (AdfVariant::ConstantAndTrend, -2.0, 0.6014337722402741),
            (AdfVariant::ConstantAndTrend, 0.5, 0.996851911498776),
        ];
        for (v, tau, p) in cases {
            assert!((mackinnon_p_value(tau, v) - p).abs() < 1e-10, "{v:?} {tau}");
        }
        assert_eq!(mackinnon_p_value(-20.0, AdfVariant::Constant), 0.0);
        assert_eq!(mackinnon_p_value(3.0, AdfVariant::ConstantAndTrend), 1.0);
    }

    #[test]
    fn schwert_rule() {
        assert_eq!(schwert_lags(100), 12);
        assert_eq!(schwert_lags(2000), 25);
        assert_eq!(schwert_lags(3330), 28);
    }

    #[test]
    fn too_short() {
        assert!(adf_test(&[0.0; 10], AdfVariant::Constant, LagOrder::Auto).is_err());
        let (level, _) = sequence();
        assert!(adf_test(&level[..30], AdfVariant::Constant, LagOrder::Fixed(20)).is_err());
    }
}
