//! Least-squares fits lying entirely above (or below) a point cloud.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::AnnualError;

/// How a conservative profile is fitted through a point cloud.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeMethod {
    /// Least squares subject to every residual having the envelope sign.
    #[default]
    ConstrainedLeastSquares,
    /// Quantile regression at `tau` for the upper envelope and `1 − tau`
    /// for the lower one; points may lie outside.
    Quantile { tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Fit on or above every point.
    Upper,
    /// Fit on or below every point.
    Lower,
}

/// Minimizes `‖Aθ − y‖²` subject to `Aθ ≥ y` (upper) or `Aθ ≤ y` (lower).
/// The first column of `a` must be the constant 1.
pub fn envelope_least_squares(a: &DMatrix<f64>, y: &DVector<f64>, side: Side) -> Result<DVector<f64>, AnnualError> {
    let sign = match side {
        Side::Upper => 1.0,
        Side::Lower => -1.0,
    };
    let n = a.ncols();
    // Unit-norm columns keep the normal equations well conditioned.
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm().max(1e-300)).collect();
    let scaled = DMatrix::from_fn(a.nrows(), n, |i, j| a[(i, j)] / norms[j]);

    // Constraints c_i φ ≥ d_i; of identical rows only the tightest is kept.
    let mut rows: Vec<usize> = (0..a.nrows()).collect();
    rows.sort_by(|&i, &k| {
        (0..n)
            .map(|j| scaled[(i, j)].total_cmp(&scaled[(k, j)]))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then((sign * y[k]).total_cmp(&(sign * y[i])))
    });
    rows.dedup_by(|k, i| (0..n).all(|j| scaled[(*i, j)] == scaled[(*k, j)]));
    let m = rows.len();
    let c = DMatrix::from_fn(m, n, |r, j| sign * scaled[(rows[r], j)]);
    let d = DVector::from_fn(m, |r, _| sign * y[rows[r]]);

    let g = scaled.transpose() * &scaled;
    let lin = -(scaled.transpose() * y);
    let mut phi = least_squares(&scaled, y)?;
    let slack = &c * &phi - &d;
    let (worst, min_slack) = slack.argmin();
    phi[0] -= min_slack.min(0.0) / c[(worst, 0)];
    let mut working: Vec<usize> = if min_slack < 0.0 { vec![worst] } else { Vec::new() };

    for _ in 0..20 * (m + n) {
        let k = working.len();
        let mut kkt = DMatrix::zeros(n + k, n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(&g);
        for (col, &i) in working.iter().enumerate() {
            for j in 0..n {
                kkt[(j, n + col)] = -c[(i, j)];
                kkt[(n + col, j)] = c[(i, j)];
            }
        }
        let grad = &g * &phi + &lin;
        let mut rhs = DVector::zeros(n + k);
        rhs.rows_mut(0, n).copy_from(&(-&grad));
        let sol = kkt
            .svd(true, true)
            .solve(&rhs, 1e-13)
            .map_err(|e| AnnualError::Fit(e.to_string()))?;
        let p = sol.rows(0, n).into_owned();
        if p.norm() <= 1e-10 * (1.0 + phi.norm()) {
            let lambda = sol.rows(n, k);
            match lambda.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)) {
                Some((j, &l)) if l < -1e-9 * (1.0 + grad.norm()) => {
                    working.remove(j);
                }
                _ => return Ok(DVector::from_fn(n, |j, _| phi[j] / norms[j])),
            }
            continue;
        }
        let mut alpha = 1.0;
        let mut blocking = None;
        let cp = &c * &p;
        let slack = &c * &phi - &d;
        for i in 0..m {
            if working.contains(&i) || cp[i] >= -1e-14 * p.norm() {
                continue;
            }
            let step = (-slack[i] / cp[i]).max(0.0);
            if step < alpha {
                alpha = step;
                blocking = Some(i);
            }
        }
        phi += alpha * p;
        if let Some(i) = blocking {
            working.push(i);
        }
    }
    Err(AnnualError::Fit("active-set iteration did not terminate".into()))
}

/// Unconstrained least squares via SVD.
pub fn least_squares(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>, AnnualError> {
    a.clone()
        .svd(true, true)
        .solve(y, 1e-12)
        .map_err(|e| AnnualError::Fit(e.to_string()))
}

/// Linear quantile regression by iteratively reweighted least squares.
pub fn quantile_regression(a: &DMatrix<f64>, y: &DVector<f64>, tau: f64) -> Result<DVector<f64>, AnnualError> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(AnnualError::Fit(format!("quantile {tau}")));
    }
    let mut theta = least_squares(a, y)?;
    for _ in 0..200 {
        let r = y - a * &theta;
        let w = DVector::from_iterator(
            r.len(),
            r.iter().map(|&ri| {
                let q = if ri > 0.0 { tau } else { 1.0 - tau };
                (q / ri.abs().max(1e-6)).sqrt()
            }),
        );
        let aw = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * w[i]);
        let yw = y.component_mul(&w);
        let next = least_squares(&aw, &yw)?;
        let done = (&next - &theta).norm() <= 1e-10 * (1.0 + theta.norm());
        theta = next;
        if done {
            break;
        }
    }
    Ok(theta)
}

/// Fits with the chosen method on `side`.
pub fn fit_envelope(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    side: Side,
    method: EnvelopeMethod,
) -> Result<DVector<f64>, AnnualError> {
    match method {
        EnvelopeMethod::ConstrainedLeastSquares => envelope_least_squares(a, y, side),
        EnvelopeMethod::Quantile { tau } => {
            let q = match side {
                Side::Upper => tau,
                Side::Lower => 1.0 - tau,
            };
            quantile_regression(a, y, q)
        }
    }
}
