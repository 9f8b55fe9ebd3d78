use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressorModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub alpha: f64,
}

impl RegressorModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.weights.len());
        self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// In-place Cholesky factorization of a symmetric `n x n` matrix. Returns
/// `None` when a pivot is not safely positive.
fn cholesky(a: &mut [f64], n: usize) -> Option<()> {
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 1e-12 * scale) {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Some(())
}

fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solves `(Xc' Xc + alpha I) w = Xc' yc` on centred data; the intercept is
/// `mean(y) - mean(x) . w`.
pub fn ridge_fit<R: AsRef<[f64]>>(x: &[R], y: &[f64], alpha: f64) -> Result<RegressorModel> {
    let n = x.len();
    if n < 2 {
        return Err(Error::invalid(format!("ridge needs at least 2 rows, got {n}")));
    }
    if y.len() != n {
        return Err(Error::invalid(format!("{n} rows but {} targets", y.len())));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be non-negative, got {alpha}")));
    }
    let d = x[0].as_ref().len();
    if x.iter().any(|r| r.as_ref().len() != d) {
        return Err(Error::invalid("feature rows have mixed dimensions"));
    }
    if x.iter().any(|r| r.as_ref().iter().any(|v| !v.is_finite())) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("ridge inputs must be finite"));
    }

    let mut xm = vec![0.0; d];
    for r in x {
        for (m, v) in xm.iter_mut().zip(r.as_ref()) {
            *m += v;
        }
    }
    xm.iter_mut().for_each(|m| *m /= n as f64);
    let ym = y.iter().sum::<f64>() / n as f64;

    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    let mut xc = vec![0.0; d];
    for (r, &yi) in x.iter().zip(y) {
        for (c, (v, m)) in xc.iter_mut().zip(r.as_ref().iter().zip(&xm)) {
            *c = v - m;
        }
        let yc = yi - ym;
        for i in 0..d {
            rhs[i] += xc[i] * yc;
            for j in 0..=i {
                gram[i * d + j] += xc[i] * xc[j];
            }
        }
    }
    for i in 0..d {
        gram[i * d + i] += alpha;
        for j in 0..i {
            gram[j * d + i] = gram[i * d + j];
        }
    }
    if d > 0 && cholesky(&mut gram, d).is_none() {
        return Err(Error::IllConditioned(format!(
            "normal equations are singular at alpha = {alpha}; features are rank-deficient"
        )));
    }
    cholesky_solve(&gram, d, &mut rhs);
    let intercept = ym - xm.iter().zip(&rhs).map(|(m, w)| m * w).sum::<f64>();
    Ok(RegressorModel { weights: rhs, intercept, alpha })
}
