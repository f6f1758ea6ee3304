//! Damped least squares (Levenberg-Marquardt) for the small curve fits used
//! throughout the crate: at most a handful of parameters, a few thousand
//! residuals. The Jacobian is taken by central differences.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative tolerance on both the sum of squares and the step.
    pub rel_tol: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iterations: 200, rel_tol: 1e-9, initial_damping: 1e-3 }
    }
}

#[derive(Debug, Clone)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// One-sigma uncertainties from `s^2 (J^T J)^-1`, `s^2 = SSR / (m - n)`.
    pub uncertainties: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub residual_rms: f64,
    pub ssr: f64,
    pub iterations: usize,
}

fn ssr(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn jacobian<F>(f: &F, p: &[f64], r0_len: usize, scales: &[f64]) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = p.len();
    let mut jac = DMatrix::zeros(r0_len, n);
    let mut work = p.to_vec();
    for j in 0..n {
        let h = 1e-6 * p[j].abs().max(scales[j]);
        work[j] = p[j] + h;
        let rp = f(&work);
        work[j] = p[j] - h;
        let rm = f(&work);
        work[j] = p[j];
        for i in 0..r0_len {
            jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Minimise `sum(residuals(p)^2)` from `p0`.
///
/// `scales` gives a typical magnitude per parameter, used for the finite
/// difference step when a parameter is near zero.
pub fn levenberg_marquardt<F>(residuals: F, p0: &[f64], scales: &[f64], opts: &LmOptions) -> Result<LmFit>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = p0.len();
    assert_eq!(scales.len(), n, "one scale per parameter");
    let mut p = p0.to_vec();
    let mut r = residuals(&p);
    let m = r.len();
    if m <= n {
        return Err(Error::IllPosed(format!("{m} residuals for {n} parameters")));
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::IllPosed("non-finite residual at the initial guess".into()));
    }
    let mut cost = ssr(&r);
    let mut lambda = opts.initial_damping;
    let mut converged = cost == 0.0;
    let mut iterations = 0;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let jac = jacobian(&residuals, &p, m, scales);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);

        // raise damping until a step lowers the cost
        loop {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e20 {
                        converged = true;
                        break;
                    }
                    continue;
                }
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = residuals(&trial);
            let ct = ssr(&rt);
            if ct.is_finite() && ct <= cost {
                let rel_cost = (cost - ct) / cost.max(f64::MIN_POSITIVE);
                let rel_step = step
                    .iter()
                    .zip(p.iter().zip(scales))
                    .map(|(d, (x, s))| d.abs() / (x.abs().max(*s)))
                    .fold(0.0, f64::max);
                p = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 10.0).max(1e-12);
                if rel_cost <= opts.rel_tol || rel_step <= opts.rel_tol || cost == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                // no descent direction left at working precision
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iterations });
    }

    let jac = jacobian(&residuals, &p, m, scales);
    let jtj = jac.transpose() * &jac;
    let s2 = cost / (m - n) as f64;
    let covariance = match jtj.clone().try_inverse() {
        Some(inv) => inv * s2,
        None => DMatrix::from_element(n, n, f64::INFINITY),
    };
    let uncertainties = (0..n).map(|i| covariance[(i, i)].abs().sqrt()).collect();
    Ok(LmFit {
        params: p,
        uncertainties,
        covariance,
        residual_rms: (cost / m as f64).sqrt(),
        ssr: cost,
        iterations,
    })
}
