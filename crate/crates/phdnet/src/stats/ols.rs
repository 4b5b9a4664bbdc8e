//! Least squares with the full diagnostic panel: unstandardized and
//! standardized coefficients, standard errors, t and p values, variance
//! inflation factors, R-squared, the F test and the Durbin-Watson statistic.
//!
//! The solve goes through a Householder QR of the design matrix rather than
//! the normal equations; a condition ratio above 1e12 on the R diagonal is
//! treated as collinearity and reported with the offending column labels.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::dist::{f_upper_tail, student_t_upper_tail};

/// Condition ratio on the R diagonal beyond which columns count as collinear.
const COLLINEARITY_CONDITION_RATIO: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorStats {
    pub label: String,
    /// Unstandardized coefficient.
    pub b: f64,
    pub std_error: f64,
    /// Standardized coefficient.
    pub beta: f64,
    pub t: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub vif: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterceptStats {
    pub b: f64,
    pub std_error: f64,
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub n: usize,
    pub intercept: InterceptStats,
    pub predictors: Vec<PredictorStats>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_statistic: f64,
    pub f_df1: usize,
    pub f_df2: usize,
    pub f_p: f64,
    /// NaN when the fit is exact (residuals are identically zero).
    pub durbin_watson: f64,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

/// Fits `y` on the given predictor columns with an intercept.
pub fn ols_fit(x_columns: &[Vec<f64>], y: &[f64], labels: &[&str]) -> Result<RegressionReport> {
    let k = x_columns.len();
    let n = y.len();
    if k == 0 {
        return Err(Error::Dimension("at least one predictor required".into()));
    }
    if labels.len() != k {
        return Err(Error::Dimension(format!("{} labels for {k} predictors", labels.len())));
    }
    for (j, col) in x_columns.iter().enumerate() {
        if col.len() != n {
            return Err(Error::Dimension(format!(
                "predictor `{}` has {} rows, expected {n}",
                labels[j],
                col.len()
            )));
        }
    }
    if n <= k + 1 {
        return Err(Error::Dimension(format!(
            "need more than {} observations for {k} predictors, got {n}",
            k + 1
        )));
    }

    let mut design = DMatrix::zeros(n, k + 1);
    for row in 0..n {
        design[(row, 0)] = 1.0;
        for (j, col) in x_columns.iter().enumerate() {
            design[(row, j + 1)] = col[row];
        }
    }
    let design_labels: Vec<String> =
        std::iter::once("intercept".to_string()).chain(labels.iter().map(|l| l.to_string())).collect();

    let (coef, r_inv) = qr_least_squares(&design, y, &design_labels)?;

    let y_vec = DVector::from_column_slice(y);
    let fitted = &design * &coef;
    let residuals_vec = &y_vec - &fitted;
    let residuals: Vec<f64> = residuals_vec.iter().cloned().collect();

    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();
    if sst == 0.0 {
        return Err(Error::ZeroVariance("dependent variable is constant".into()));
    }
    let r_squared = 1.0 - ssr / sst;
    let df_resid = n - k - 1;
    let adj_r_squared = 1.0 - (1.0 - r_squared) * ((n - 1) as f64 / df_resid as f64);

    // Var(beta_hat) = sigma^2 (X'X)^-1 = sigma^2 R^-1 R^-T.
    let sigma2 = ssr / df_resid as f64;
    let xtx_inv_diag: Vec<f64> =
        (0..=k).map(|j| r_inv.row(j).iter().map(|v| v * v).sum::<f64>()).collect();
    let std_errors: Vec<f64> = xtx_inv_diag.iter().map(|d| (sigma2 * d).sqrt()).collect();

    let t_and_p = |b: f64, se: f64| -> (f64, f64) {
        if se == 0.0 {
            let t = if b == 0.0 { 0.0 } else { f64::INFINITY * b.signum() };
            let p = if b == 0.0 { 1.0 } else { 0.0 };
            (t, p)
        } else {
            let t = b / se;
            (t, 2.0 * student_t_upper_tail(t.abs(), df_resid as f64))
        }
    };

    let sd = |col: &[f64]| -> f64 {
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (col.len() - 1) as f64).sqrt()
    };
    let sd_y = sd(y);

    let vifs = variance_inflation_factors(x_columns)?;

    let mut predictors = Vec::with_capacity(k);
    for j in 0..k {
        let b = coef[j + 1];
        let se = std_errors[j + 1];
        let (t, p) = t_and_p(b, se);
        predictors.push(PredictorStats {
            label: labels[j].to_string(),
            b,
            std_error: se,
            beta: b * sd(&x_columns[j]) / sd_y,
            t,
            p,
            vif: vifs[j],
        });
    }
    let (t0, p0) = t_and_p(coef[0], std_errors[0]);
    let intercept = InterceptStats { b: coef[0], std_error: std_errors[0], t: t0, p: p0 };

    let f_statistic = if r_squared >= 1.0 {
        f64::INFINITY
    } else {
        (r_squared / k as f64) / ((1.0 - r_squared) / df_resid as f64)
    };
    let f_p = if f_statistic.is_infinite() {
        0.0
    } else {
        f_upper_tail(f_statistic, k as f64, df_resid as f64)
    };

    // An (effectively) exact fit leaves only rounding noise in the residuals;
    // the statistic is undefined there and reported as NaN rather than
    // failing the whole report.
    let durbin_watson = if ssr <= 1e-24 * sst {
        f64::NAN
    } else {
        durbin_watson(&residuals).unwrap_or(f64::NAN)
    };

    Ok(RegressionReport {
        n,
        intercept,
        predictors,
        r_squared,
        adj_r_squared,
        f_statistic,
        f_df1: k,
        f_df2: df_resid,
        f_p,
        durbin_watson,
        residuals,
    })
}

/// Householder QR solve returning the coefficients and R^-1.
fn qr_least_squares(
    design: &DMatrix<f64>,
    y: &[f64],
    labels: &[String],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let cols = design.ncols();
    let qr = design.clone().qr();
    let q = qr.q();
    let r = qr.r();

    let diag: Vec<f64> = (0..cols).map(|j| r[(j, j)].abs()).collect();
    let max_diag = diag.iter().cloned().fold(0.0f64, f64::max);
    let threshold = max_diag / COLLINEARITY_CONDITION_RATIO;
    let offending: Vec<String> = diag
        .iter()
        .enumerate()
        .filter(|(_, &d)| d <= threshold || d == 0.0)
        .map(|(j, _)| labels[j].clone())
        .collect();
    if !offending.is_empty() {
        return Err(Error::Singular { columns: offending });
    }

    let qty = q.transpose() * DVector::from_column_slice(y);
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Singular { columns: labels.to_vec() })?;

    let identity = DMatrix::identity(cols, cols);
    let r_inv = r
        .solve_upper_triangular(&identity)
        .ok_or_else(|| Error::Singular { columns: labels.to_vec() })?;
    Ok((coef, r_inv))
}

/// VIF per predictor: 1 / (1 - R^2) from regressing it on the others.
///
/// A single predictor has VIF 1 by definition; an exactly collinear predictor
/// reports infinity.
pub fn variance_inflation_factors(x_columns: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = x_columns.len();
    if k <= 1 {
        return Ok(vec![1.0; k]);
    }
    let n = x_columns[0].len();
    let mut vifs = Vec::with_capacity(k);
    for j in 0..k {
        let target = &x_columns[j];
        let others: Vec<&Vec<f64>> =
            x_columns.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, c)| c).collect();
        let r2 = auxiliary_r_squared(&others, target, n)?;
        vifs.push(if r2 >= 1.0 - 1e-12 { f64::INFINITY } else { 1.0 / (1.0 - r2) });
    }
    Ok(vifs)
}

/// R^2 of regressing `y` on the given columns plus an intercept.
///
/// Solved via SVD so that a rank-deficient column set still yields the
/// (unique) fitted values.
fn auxiliary_r_squared(x_columns: &[&Vec<f64>], y: &[f64], n: usize) -> Result<f64> {
    let k = x_columns.len();
    let mut design = DMatrix::zeros(n, k + 1);
    for row in 0..n {
        design[(row, 0)] = 1.0;
        for (j, col) in x_columns.iter().enumerate() {
            design[(row, j + 1)] = col[row];
        }
    }
    let svd = design.clone().svd(true, true);
    let coef = svd
        .solve(&DVector::from_column_slice(y), 1e-12)
        .map_err(|msg| Error::Domain(format!("auxiliary regression failed: {msg}")))?;
    let fitted = design * coef;
    let ssr: f64 = y.iter().zip(fitted.iter()).map(|(v, f)| (v - f) * (v - f)).sum();
    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if sst == 0.0 {
        // A constant predictor is perfectly explained by the intercept.
        return Ok(1.0);
    }
    Ok((1.0 - ssr / sst).clamp(0.0, 1.0))
}

/// Durbin-Watson statistic over the residuals in input order.
pub fn durbin_watson(residuals: &[f64]) -> Result<f64> {
    if residuals.len() < 2 {
        return Err(Error::Dimension("Durbin-Watson needs at least 2 residuals".into()));
    }
    let denom: f64 = residuals.iter().map(|e| e * e).sum();
    if denom == 0.0 {
        return Err(Error::Domain("Durbin-Watson undefined for all-zero residuals".into()));
    }
    let numer: f64 = residuals.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
    Ok(numer / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovers_coefficients() {
        let x = vec![vec![1.0, 2.0, 3.0, 4.0, 5.0]];
        let y: Vec<f64> = x[0].iter().map(|v| 3.0 + 2.0 * v).collect();
        let report = ols_fit(&x, &y, &["x"]).unwrap();
        assert!((report.intercept.b - 3.0).abs() < 1e-10);
        assert!((report.predictors[0].b - 2.0).abs() < 1e-10);
        assert!((report.r_squared - 1.0).abs() < 1e-12);
        assert!(report.residuals.iter().all(|e| e.abs() < 1e-10));
        assert!(report.durbin_watson.is_nan());
    }

    #[test]
    fn orthogonal_standardized_predictors_have_unit_vif() {
        // Two centered, orthogonal columns.
        let x1 = vec![-1.0, -1.0, 1.0, 1.0];
        let x2 = vec![-1.0, 1.0, -1.0, 1.0];
        let vifs = variance_inflation_factors(&[x1, x2]).unwrap();
        assert!((vifs[0] - 1.0).abs() < 1e-12);
        assert!((vifs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_collinearity_names_offending_columns() {
        let x1 = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let x2: Vec<f64> = x1.iter().map(|v| 2.0 * v).collect();
        let y = vec![1.0, 2.0, 2.5, 4.0, 5.0];
        let err = ols_fit(&[x1, x2], &y, &["a", "b"]).unwrap_err();
        match err {
            Error::Singular { columns } => assert!(columns.contains(&"b".to_string())),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn too_few_observations_is_a_dimension_error() {
        let x = vec![vec![1.0, 2.0]];
        let y = vec![1.0, 2.0];
        assert!(matches!(ols_fit(&x, &y, &["x"]), Err(Error::Dimension(_))));
    }

    #[test]
    fn f_dof_are_k_and_n_minus_k_minus_1() {
        // 5 predictors, 55 rows: the reference shape for the report tables.
        let n = 55;
        let mut cols = Vec::new();
        for j in 0..5 {
            cols.push((0..n).map(|i| ((i * (j + 2) + j) % 11) as f64 + (i as f64) * 0.1).collect());
        }
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let mut v = 1.0 + i as f64 * 0.05;
                for (j, col) in cols.iter().enumerate() {
                    let col: &Vec<f64> = col;
                    v += (j as f64 + 1.0) * 0.3 * col[i];
                }
                v + if i % 2 == 0 { 0.25 } else { -0.25 }
            })
            .collect();
        let report = ols_fit(&cols, &y, &["a", "b", "c", "d", "e"]).unwrap();
        assert_eq!(report.f_df1, 5);
        assert_eq!(report.f_df2, 49);
        assert_eq!(report.n, 55);
    }

    #[test]
    fn constant_dependent_is_zero_variance() {
        let x = vec![vec![1.0, 2.0, 3.0, 4.0]];
        let y = vec![5.0, 5.0, 5.0, 5.0];
        assert!(matches!(ols_fit(&x, &y, &["x"]), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn durbin_watson_equal_residuals() {
        assert_eq!(durbin_watson(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn durbin_watson_alternating_residuals() {
        // Differences are -2, 2, -2: numerator 12 over denominator 4.
        assert_eq!(durbin_watson(&[1.0, -1.0, 1.0, -1.0]).unwrap(), 3.0);
    }

    #[test]
    fn durbin_watson_rejects_degenerate_input() {
        assert!(matches!(durbin_watson(&[1.0]), Err(Error::Dimension(_))));
        assert!(matches!(durbin_watson(&[0.0, 0.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn durbin_watson_of_white_noise_is_near_two() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let residuals: Vec<f64> = (0..500).map(|_| rng.gen::<f64>() - 0.5).collect();
        let dw = durbin_watson(&residuals).unwrap();
        assert!((1.7..=2.3).contains(&dw), "dw = {dw}");
    }

    #[test]
    fn residuals_are_orthogonal_to_design() {
        let x1 = vec![0.1, 0.4, 0.35, 0.8, 0.15, 0.6, 0.05, 0.9];
        let x2 = vec![1.0, 0.0, 2.0, 1.5, 0.5, 2.5, 1.2, 0.3];
        let y = vec![1.0, 2.0, 1.5, 3.2, 0.8, 3.9, 0.7, 2.4];
        let report = ols_fit(&[x1.clone(), x2.clone()], &y, &["a", "b"]).unwrap();
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        assert!(dot(&report.residuals, &x1).abs() < 1e-8);
        assert!(dot(&report.residuals, &x2).abs() < 1e-8);
        assert!(report.residuals.iter().sum::<f64>().abs() < 1e-8);
    }
}
