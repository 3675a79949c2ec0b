use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub intercept: f64,
    pub slope: f64,
    pub slope_std_err: f64,
    pub t_stat: f64,
    /// Two-sided p-value of the slope, Student t with n - 2 degrees of freedom.
    pub p_value: f64,
    pub residuals: Vec<f64>,
    pub n_obs: usize,
}

/// Two-sided Student t tail probability.
pub(crate) fn two_sided_t_p(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Least-squares fit of `y = c + a x`.
pub fn ols_fit(y: &[f64], x: &[f64]) -> Result<RegressionResult> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: x.len(),
        });
    }
    let n = y.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "regression needs at least 3 observations, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::Singular("regressor is constant".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| b - intercept - slope * a)
        .collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let df = nf - 2.0;
    let slope_std_err = (ssr / df / sxx).sqrt();
    let t_stat = if slope_std_err > 0.0 {
        slope / slope_std_err
    } else if slope == 0.0 {
        f64::NAN
    } else {
        slope.signum() * f64::INFINITY
    };
    Ok(RegressionResult {
        intercept,
        slope,
        slope_std_err,
        t_stat,
        p_value: two_sided_t_p(t_stat, df),
        residuals,
        n_obs: n,
    })
}

/// Coefficients and standard errors of a general least-squares fit.
#[derive(Debug, Clone)]
pub(crate) struct LinearFit {
    pub coef: Vec<f64>,
    pub std_err: Vec<f64>,
}

pub(crate) fn least_squares(design: DMatrix<f64>, y: DVector<f64>) -> Result<LinearFit> {
    let (rows, cols) = design.shape();
    if rows <= cols {
        return Err(Error::InsufficientData(format!(
            "{rows} observations for {cols} parameters"
        )));
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().amax();
    if r.diagonal().iter().any(|d| d.abs() <= scale * 1e-12) {
        return Err(Error::Singular("design matrix is rank deficient".into()));
    }
    let qty = qr.q().transpose() * &y;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    let resid = &y - &design * &coef;
    let sigma2 = resid.norm_squared() / (rows - cols) as f64;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(cols, cols))
        .ok_or_else(|| Error::Singular("triangular inverse failed".into()))?;
    // (X'X)^-1 = R^-1 R^-T, so the j-th diagonal is the squared norm of row j of R^-1.
    let std_err = (0..cols)
        .map(|j| (sigma2 * r_inv.row(j).norm_squared()).sqrt())
        .collect();
    Ok(LinearFit {
        coef: coef.iter().copied().collect(),
        std_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let r = ols_fit(&y, &x).unwrap();
        assert!((r.slope - 2.0).abs() < 1e-14);
        assert!((r.intercept - 1.0).abs() < 1e-13);
        assert!(r.residuals.iter().all(|e| e.abs() < 1e-13));
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn five_point_hand_dataset() {
        // Normal equations: Sxx = 10, Sxy = 6, so a = 0.6, c = 4 - 0.6 * 3 = 2.2;
        // SSR = 2.4, s^2 = 0.8, se = sqrt(0.08). p from scipy (df = 3).
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 4.0, 5.0, 4.0, 5.0];
        let r = ols_fit(&y, &x).unwrap();
        assert!((r.slope - 0.6).abs() < 1e-12);
        assert!((r.intercept - 2.2).abs() < 1e-12);
        assert!((r.slope_std_err - 0.08f64.sqrt()).abs() < 1e-12);
        assert!((r.t_stat - 2.1213203435596433).abs() < 1e-10);
        assert!((r.p_value - 0.12402706265755442).abs() < 1e-10);
        assert_eq!(r.n_obs, 5);
    }

    #[test]
    fn constant_regressor_is_singular() {
        assert!(matches!(
            ols_fit(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn general_fit_matches_simple_fit() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 4.0, 5.0, 4.0, 5.0];
        let design = DMatrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { x[i] });
        let fit = least_squares(design, DVector::from_column_slice(&y)).unwrap();
        assert!((fit.coef[1] - 0.6).abs() < 1e-12);
        assert!((fit.std_err[1] - 0.08f64.sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn residuals_orthogonal_to_regressor(
            pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..80),
        ) {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let fit = ols_fit(&y, &x);
            prop_assume!(fit.is_ok());
            let fit = fit.unwrap();
            prop_assert!((0.0..=1.0).contains(&fit.p_value));
            let refit = ols_fit(&fit.residuals, &x).unwrap();
            prop_assert!(refit.slope.abs() < 1e-10);
        }
    }
}
