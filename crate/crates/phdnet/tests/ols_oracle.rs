//! The QR-based fit checked against exact rational normal equations.
//!
//! The oracle solves (X'X) b = X'y with arbitrary-precision rationals via
//! Gauss-Jordan elimination, then derives every report figure from the exact
//! residuals. It shares no code with the implementation's QR path.

use num_bigint::BigInt;
use num_rational::BigRational;

use phdnet::stats::ols_fit;

fn rat(v: i64) -> BigRational {
    BigRational::from(BigInt::from(v))
}

fn to_f64(r: &BigRational) -> f64 {
    let numer = r.numer().to_string().parse::<f64>().unwrap();
    let denom = r.denom().to_string().parse::<f64>().unwrap();
    numer / denom
}

/// Exact Gauss-Jordan solve of `a x = b`, also returning the inverse of `a`.
fn solve_with_inverse(
    a: &[Vec<BigRational>],
    b: &[BigRational],
) -> (Vec<BigRational>, Vec<Vec<BigRational>>) {
    let n = a.len();
    // Augment with b and the identity.
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            row.push(b[i].clone());
            for j in 0..n {
                row.push(if i == j { rat(1) } else { rat(0) });
            }
            row
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .find(|&r| m[r][col] != rat(0))
            .expect("oracle fixture must be non-singular");
        m.swap(col, pivot_row);
        let pivot = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v /= pivot.clone();
        }
        for row in 0..n {
            if row != col && m[row][col] != rat(0) {
                let factor = m[row][col].clone();
                for k in 0..m[row].len() {
                    let delta = factor.clone() * m[col][k].clone();
                    m[row][k] -= delta;
                }
            }
        }
    }
    let solution: Vec<BigRational> = (0..n).map(|i| m[i][n].clone()).collect();
    let inverse: Vec<Vec<BigRational>> =
        (0..n).map(|i| (0..n).map(|j| m[i][n + 1 + j].clone()).collect()).collect();
    (solution, inverse)
}

struct ExactOls {
    coefficients: Vec<f64>,
    std_errors: Vec<f64>,
    t_values: Vec<f64>,
    betas: Vec<f64>,
    r_squared: f64,
    f_statistic: f64,
    durbin_watson: f64,
}

/// Normal-equations OLS with intercept, in exact arithmetic until the final
/// square roots.
fn exact_ols(x_columns: &[Vec<i64>], y: &[i64]) -> ExactOls {
    let n = y.len();
    let k = x_columns.len();
    let design: Vec<Vec<BigRational>> = (0..n)
        .map(|row| {
            std::iter::once(rat(1))
                .chain(x_columns.iter().map(|col| rat(col[row])))
                .collect()
        })
        .collect();
    let y: Vec<BigRational> = y.iter().map(|&v| rat(v)).collect();

    let p = k + 1;
    let xtx: Vec<Vec<BigRational>> = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| (0..n).map(|r| design[r][i].clone() * design[r][j].clone()).sum())
                .collect()
        })
        .collect();
    let xty: Vec<BigRational> =
        (0..p).map(|i| (0..n).map(|r| design[r][i].clone() * y[r].clone()).sum()).collect();
    let (coef, xtx_inv) = solve_with_inverse(&xtx, &xty);

    let residuals: Vec<BigRational> = (0..n)
        .map(|r| {
            let fitted: BigRational =
                (0..p).map(|j| design[r][j].clone() * coef[j].clone()).sum();
            y[r].clone() - fitted
        })
        .collect();
    let ssr: BigRational = residuals.iter().map(|e| e.clone() * e.clone()).sum();
    let mean: BigRational = y.iter().cloned().sum::<BigRational>() / rat(n as i64);
    let sst: BigRational =
        y.iter().map(|v| (v.clone() - mean.clone()) * (v.clone() - mean.clone())).sum();
    let r_squared = rat(1) - ssr.clone() / sst.clone();
    let sigma2 = ssr.clone() / rat((n - p) as i64);

    let std_errors: Vec<f64> =
        (0..p).map(|j| to_f64(&(sigma2.clone() * xtx_inv[j][j].clone())).sqrt()).collect();
    let coefficients: Vec<f64> = coef.iter().map(to_f64).collect();
    let t_values: Vec<f64> =
        coefficients.iter().zip(&std_errors).map(|(b, se)| b / se).collect();

    // Standardized coefficients: b_j * sd(x_j) / sd(y); the (n-1) denominators
    // cancel inside the square root of the exact variance ratio.
    let betas: Vec<f64> = (0..k)
        .map(|j| {
            let col: Vec<BigRational> = (0..n).map(|r| design[r][j + 1].clone()).collect();
            let mx: BigRational = col.iter().cloned().sum::<BigRational>() / rat(n as i64);
            let sxx: BigRational =
                col.iter().map(|v| (v.clone() - mx.clone()) * (v.clone() - mx.clone())).sum();
            coefficients[j + 1] * to_f64(&(sxx / sst.clone())).sqrt()
        })
        .collect();

    let f_statistic = {
        let num = r_squared.clone() / rat(k as i64);
        let den = (rat(1) - r_squared.clone()) / rat((n - p) as i64);
        to_f64(&(num / den))
    };
    let dw_num: BigRational = residuals
        .windows(2)
        .map(|w| (w[1].clone() - w[0].clone()) * (w[1].clone() - w[0].clone()))
        .sum();
    ExactOls {
        coefficients,
        std_errors,
        t_values,
        betas,
        r_squared: to_f64(&r_squared),
        f_statistic,
        durbin_watson: to_f64(&(dw_num / ssr)),
    }
}

const X1: [i64; 8] = [1, 2, 3, 4, 5, 6, 7, 8];
const X2: [i64; 8] = [2, 1, 4, 3, 6, 5, 8, 7];
const Y: [i64; 8] = [3, 5, 4, 8, 9, 11, 13, 12];

#[test]
fn eight_point_fixture_matches_exact_normal_equations() {
    let x_columns: Vec<Vec<f64>> = [X1, X2]
        .iter()
        .map(|col| col.iter().map(|&v| v as f64).collect())
        .collect();
    let y: Vec<f64> = Y.iter().map(|&v| v as f64).collect();
    let report = ols_fit(&x_columns, &y, &["x1", "x2"]).unwrap();

    let oracle = exact_ols(&[X1.to_vec(), X2.to_vec()], &Y);

    let close = |a: f64, b: f64, what: &str| {
        assert!((a - b).abs() <= 1e-8, "{what}: {a} vs oracle {b}");
    };
    close(report.intercept.b, oracle.coefficients[0], "intercept b");
    close(report.predictors[0].b, oracle.coefficients[1], "b1");
    close(report.predictors[1].b, oracle.coefficients[2], "b2");
    close(report.intercept.std_error, oracle.std_errors[0], "intercept se");
    close(report.predictors[0].std_error, oracle.std_errors[1], "se1");
    close(report.predictors[1].std_error, oracle.std_errors[2], "se2");
    close(report.intercept.t, oracle.t_values[0], "intercept t");
    close(report.predictors[0].t, oracle.t_values[1], "t1");
    close(report.predictors[1].t, oracle.t_values[2], "t2");
    close(report.predictors[0].beta, oracle.betas[0], "beta1");
    close(report.predictors[1].beta, oracle.betas[1], "beta2");
    close(report.r_squared, oracle.r_squared, "r squared");
    close(report.f_statistic, oracle.f_statistic, "f");
    close(report.durbin_watson, oracle.durbin_watson, "durbin-watson");

    // Frozen oracle outputs for this fixture (exact rationals to 12 decimal
    // places). Guards the oracle itself against regressions.
    close(oracle.coefficients[0], 1.4875, "frozen intercept");
    close(oracle.coefficients[1], 1.6125, "frozen b1");
    close(oracle.coefficients[2], -0.1375, "frozen b2");
    close(oracle.std_errors[0], 0.987563289111, "frozen se0");
    close(oracle.std_errors[1], 0.450312391568, "frozen se1");
    close(oracle.std_errors[2], 0.450312391568, "frozen se2");
    close(oracle.t_values[1], 3.580847496521, "frozen t1");
    close(oracle.t_values[2], -0.305343584975, "frozen t2");
    close(oracle.betas[0], 1.040477263953, "frozen beta1");
    close(oracle.betas[1], -0.088722867469, "frozen beta2");
    close(oracle.r_squared, 0.923420074349, "frozen r squared");
    close(oracle.f_statistic, 30.145631067961, "frozen f");
    close(oracle.durbin_watson, 2.365048543689, "frozen durbin-watson");
    assert_eq!(report.f_df1, 2);
    assert_eq!(report.f_df2, 5);
}

#[test]
fn p_values_match_reference_distribution() {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    let x_columns: Vec<Vec<f64>> = [X1, X2]
        .iter()
        .map(|col| col.iter().map(|&v| v as f64).collect())
        .collect();
    let y: Vec<f64> = Y.iter().map(|&v| v as f64).collect();
    let report = ols_fit(&x_columns, &y, &["x1", "x2"]).unwrap();
    let t_dist = StudentsT::new(0.0, 1.0, report.f_df2 as f64).unwrap();
    for predictor in &report.predictors {
        let reference = 2.0 * (1.0 - t_dist.cdf(predictor.t.abs()));
        assert!(
            (predictor.p - reference).abs() < 1e-10,
            "{}: {} vs {}",
            predictor.label,
            predictor.p,
            reference
        );
    }
}
