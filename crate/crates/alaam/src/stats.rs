//! Small shared numerics: sample covariance, guarded matrix inversion,
//! moments, percentiles, and the convergence t-ratio.

use nalgebra::DMatrix;

/// Condition-number limit beyond which a covariance matrix is treated as
/// singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Population covariance of sample rows: with `U` the rows centered on
/// their mean, returns `(1/M) U^T U`.
///
/// Panics if `rows` is empty or ragged.
pub fn covariance_from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let m = rows.len();
    assert!(m > 0, "covariance needs at least one sample");
    let p = rows[0].len();
    let mean = mean_of_rows(rows);
    let mut cov = DMatrix::zeros(p, p);
    for row in rows {
        assert_eq!(row.len(), p, "ragged sample rows");
        for a in 0..p {
            let da = row[a] - mean[a];
            for b in a..p {
                cov[(a, b)] += da * (row[b] - mean[b]);
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            let v = cov[(a, b)] / m as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    cov
}

/// Column means of sample rows.
pub fn mean_of_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    let m = rows.len();
    assert!(m > 0, "mean needs at least one sample");
    let p = rows[0].len();
    let mut mean = vec![0.0; p];
    for row in rows {
        for (acc, v) in mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= m as f64;
    }
    mean
}

/// Inverts a square matrix, refusing when it is singular or its condition
/// number (largest over smallest singular value) exceeds
/// [`CONDITION_LIMIT`].
pub fn invert_checked(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if m.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let svd = m.clone().svd(false, false);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if !(min > 0.0) || max / min > CONDITION_LIMIT {
        return None;
    }
    m.clone().try_inverse()
}

/// Sample mean and standard deviation (n-1 denominator; sd is 0 for fewer
/// than two values).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n > 0, "moments need at least one value");
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Mean and standard deviation with the same denominator-`n` convention as
/// [`covariance_from_rows`], so per-column results agree with that matrix's
/// diagonal to rounding error.
pub fn mean_sd_pop(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n > 0, "moments need at least one value");
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / n as f64).sqrt())
}

/// Convergence t-ratio `(mean - reference) / sd`; NaN when `sd` is 0, which
/// callers treat as degenerate / not converged.
pub fn t_ratio(mean: f64, reference: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        if mean == reference {
            0.0
        } else {
            f64::NAN
        }
    } else {
        (mean - reference) / sd
    }
}

/// Linearly interpolated percentile of unsorted data, `q` in `[0, 1]`.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "percentile needs at least one value");
    assert!((0.0..=1.0).contains(&q), "percentile level must lie in [0, 1]");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("percentile data must not contain NaN"));
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Standard-normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::new(0.0, 1.0).expect("unit normal").inverse_cdf(p)
}
