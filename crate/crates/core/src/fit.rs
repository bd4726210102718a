//! Levenberg–Marquardt fit of `A·exp(−(x−x₀)²/(2σ²)) + B`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
pub const STEP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFitResult {
    pub amplitude: f64,
    pub center: f64,
    pub sigma: f64,
    pub offset: f64,
    pub amplitude_err: f64,
    pub center_err: f64,
    pub sigma_err: f64,
    /// Zero when the offset was held fixed.
    pub offset_err: f64,
    /// `sqrt(Σ w (y − f)²)`
    pub residual_norm: f64,
    pub iterations: usize,
}

impl GaussianFitResult {
    pub fn eval(&self, x: f64) -> f64 {
        gaussian(x, self.amplitude, self.center, self.sigma) + self.offset
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FitOptions {
    /// Hold `B` at this value instead of fitting it.
    pub fixed_offset: Option<f64>,
}

fn gaussian(x: f64, a: f64, x0: f64, s: f64) -> f64 {
    a * (-(x - x0).powi(2) / (2.0 * s * s)).exp()
}

pub fn gaussian_fit_1d(xs: &[f64], ys: &[f64], weights: Option<&[f64]>) -> Result<GaussianFitResult> {
    gaussian_fit_1d_with(xs, ys, weights, FitOptions::default())
}

fn failed(reason: impl Into<String>, iterations: usize) -> Error {
    Error::FitFailed {
        reason: reason.into(),
        iterations,
    }
}

pub fn gaussian_fit_1d_with(
    xs: &[f64],
    ys: &[f64],
    weights: Option<&[f64]>,
    opts: FitOptions,
) -> Result<GaussianFitResult> {
    let n = xs.len();
    if ys.len() != n || weights.is_some_and(|w| w.len() != n) {
        return Err(failed("xs, ys and weights differ in length", 0));
    }
    if n < 5 {
        return Err(failed(format!("{n} points, need at least 5"), 0));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(failed("non-finite data", 0));
    }
    let w: Vec<f64> = match weights {
        Some(w) => {
            if w.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(failed("weights must be finite and >= 0", 0));
            }
            w.to_vec()
        }
        None => vec![1.0; n],
    };
    if ys.iter().all(|y| *y == ys[0]) {
        return Err(failed("constant data has no peak (degenerate sigma)", 0));
    }
    let (x_lo, x_hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
    let range = x_hi - x_lo;
    if range <= 0.0 {
        return Err(failed("all abscissae coincide", 0));
    }

    // Moment initialization.
    let b0 = opts
        .fixed_offset
        .unwrap_or_else(|| ys.iter().copied().fold(f64::INFINITY, f64::min));
    let excess: Vec<f64> = ys
        .iter()
        .zip(&w)
        .map(|(y, wj)| if *wj > 0.0 { (y - b0).max(0.0) } else { 0.0 })
        .collect();
    let mass: f64 = excess.iter().sum();
    if mass <= 0.0 {
        return Err(failed("no signal above the offset", 0));
    }
    let x0 = xs.iter().zip(&excess).map(|(x, e)| x * e).sum::<f64>() / mass;
    let var = xs.iter().zip(&excess).map(|(x, e)| e * (x - x0).powi(2)).sum::<f64>() / mass;
    let spacing = range / (n - 1) as f64;
    let s0 = var.sqrt().clamp(spacing / 2.0, range);
    let a0 = ys
        .iter()
        .zip(&w)
        .filter(|(_, wj)| **wj > 0.0)
        .map(|(y, _)| *y)
        .fold(f64::NEG_INFINITY, f64::max)
        - b0;

    let fit_offset = opts.fixed_offset.is_none();
    let np = if fit_offset { 4 } else { 3 };
    let mut p = vec![a0, x0, s0];
    if fit_offset {
        p.push(b0);
    }
    let offset_of = |p: &[f64]| if fit_offset { p[3] } else { b0 };

    let residuals = |p: &[f64]| -> DVector<f64> {
        DVector::from_iterator(
            n,
            (0..n).map(|j| w[j].sqrt() * (ys[j] - gaussian(xs[j], p[0], p[1], p[2]) - offset_of(p))),
        )
    };
    let jacobian = |p: &[f64]| -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(n, np);
        for j in 0..n {
            let sw = w[j].sqrt();
            let d = xs[j] - p[1];
            let e = (-d * d / (2.0 * p[2] * p[2])).exp();
            jac[(j, 0)] = sw * e;
            jac[(j, 1)] = sw * p[0] * e * d / (p[2] * p[2]);
            jac[(j, 2)] = sw * p[0] * e * d * d / p[2].powi(3);
            if fit_offset {
                jac[(j, 3)] = sw;
            }
        }
        jac
    };

    let mut r = residuals(&p);
    let mut chi2 = r.norm_squared();
    let mut mu = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let jac = jacobian(&p);
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut improved = false;
        while mu < 1e20 {
            let mut lhs = jtj.clone();
            for k in 0..np {
                lhs[(k, k)] += mu * jtj[(k, k)].max(1e-300);
            }
            let Some(delta) = lhs.lu().solve(&jtr) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            let r_trial = residuals(&trial);
            let chi2_trial = r_trial.norm_squared();
            if chi2_trial.is_finite() && chi2_trial <= chi2 {
                let rel = delta
                    .iter()
                    .zip(&p)
                    .map(|(d, v)| d.abs() / v.abs().max(1e-12 * range))
                    .fold(0.0, f64::max);
                p = trial;
                r = r_trial;
                chi2 = chi2_trial;
                mu = (mu / 3.0).max(1e-12);
                improved = true;
                if rel < STEP_TOLERANCE {
                    converged = true;
                }
                break;
            }
            mu *= 3.0;
        }
        // No downhill step at any damping: already at the minimum.
        if !improved || converged {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(failed("no convergence within the iteration limit", iterations));
    }

    let sigma = p[2].abs();
    if !(sigma.is_finite() && sigma > 1e-6 * spacing && sigma < 100.0 * range) {
        return Err(failed(format!("degenerate width sigma = {sigma}"), iterations));
    }
    let jac = jacobian(&p);
    let dof = n.saturating_sub(np).max(1) as f64;
    let cov = (jac.transpose() * &jac)
        .try_inverse()
        .ok_or_else(|| failed("singular normal matrix at the solution", iterations))?
        * (chi2 / dof);
    let err = |k: usize| cov[(k, k)].max(0.0).sqrt();
    Ok(GaussianFitResult {
        amplitude: p[0],
        center: p[1],
        sigma,
        offset: offset_of(&p),
        amplitude_err: err(0),
        center_err: err(1),
        sigma_err: err(2),
        offset_err: if fit_offset { err(3) } else { 0.0 },
        residual_norm: chi2.sqrt(),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(a: f64, x0: f64, s: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let xs: Vec<f64> = (0..41).map(|i| -10.0 + 0.5 * i as f64).collect();
        let ys = xs.iter().map(|x| gaussian(*x, a, x0, s) + b).collect();
        (xs, ys)
    }

    #[test]
    fn recovers_exact_gaussian() {
        let (xs, ys) = samples(1.0, 0.0, 2.0, 0.0);
        let f = gaussian_fit_1d(&xs, &ys, None).unwrap();
        assert!((f.amplitude - 1.0).abs() < 1e-8);
        assert!(f.center.abs() < 1e-8);
        assert!((f.sigma - 2.0).abs() < 1e-8);
        assert!(f.offset.abs() < 1e-8);
    }

    #[test]
    fn recovers_shifted_with_offset() {
        let (xs, ys) = samples(3.5, 1.7, 1.3, 0.8);
        let f = gaussian_fit_1d(&xs, &ys, None).unwrap();
        assert!((f.amplitude - 3.5).abs() < 1e-8);
        assert!((f.center - 1.7).abs() < 1e-8);
        assert!((f.sigma - 1.3).abs() < 1e-8);
        assert!((f.offset - 0.8).abs() < 1e-8);
    }

    #[test]
    fn fixed_offset() {
        let (xs, ys) = samples(2.0, -0.5, 3.0, 1.0);
        let opts = FitOptions { fixed_offset: Some(1.0) };
        let f = gaussian_fit_1d_with(&xs, &ys, None, opts).unwrap();
        assert!((f.sigma - 3.0).abs() < 1e-8);
        assert_eq!(f.offset, 1.0);
        assert_eq!(f.offset_err, 0.0);
    }

    #[test]
    fn constant_data_fails() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys = vec![4.0; 10];
        assert!(matches!(gaussian_fit_1d(&xs, &ys, None), Err(Error::FitFailed { .. })));
    }

    #[test]
    fn too_few_points_fails() {
        assert!(gaussian_fit_1d(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0], None).is_err());
    }

    #[test]
    fn weighted_fit_ignores_zero_weight_outlier() {
        let (xs, mut ys) = samples(1.0, 0.0, 2.0, 0.0);
        ys[3] = 50.0;
        let mut w = vec![1.0; xs.len()];
        w[3] = 0.0;
        let f = gaussian_fit_1d(&xs, &ys, Some(&w)).unwrap();
        assert!((f.sigma - 2.0).abs() < 1e-8);
    }
}
