//! Unconstrained minimization and finite-difference Hessians.
//!
//! `minimize` runs a derivative-free Nelder–Mead descent to get into the
//! basin, then refines with BFGS using central-difference gradients. The best
//! objective value seen is non-increasing across iterations; non-finite
//! objective values during the search reject the step instead of aborting.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Tolerances and iteration caps for [`minimize`].
#[derive(Debug, Clone)]
pub struct MinimizeOptions {
    /// Relative objective-change tolerance.
    pub tol: f64,
    /// Gradient-norm tolerance.
    pub gtol: f64,
    /// BFGS iteration cap.
    pub max_iters: usize,
    /// Simplex iteration cap (scaled by dimension).
    pub nm_max_iters: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            gtol: 1e-6,
            max_iters: 500,
            nm_max_iters: 200,
        }
    }
}

/// Outcome of a minimization on the working scale.
#[derive(Debug, Clone)]
pub struct OptimResult {
    pub argmin: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Minimize `objective` starting from `start`.
///
/// The objective must be finite at the start; elsewhere non-finite values are
/// treated as +∞ (the step is rejected, the search continues).
pub fn minimize<F: Fn(&[f64]) -> f64>(
    objective: F,
    start: &[f64],
    options: &MinimizeOptions,
) -> Result<OptimResult> {
    if start.is_empty() {
        return Err(Error::Optim("empty start vector".into()));
    }
    let f0 = objective(start);
    if !f0.is_finite() {
        return Err(Error::Optim(format!("objective is {f0} at the start point")));
    }
    let safe = |x: &[f64]| {
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let (x1, f1, nm_iters) = nelder_mead(&safe, start, f0, options);
    let mut res = bfgs(&safe, &x1, f1, options);
    res.iterations += nm_iters;
    Ok(res)
}

fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    f_start: f64,
    options: &MinimizeOptions,
) -> (Vec<f64>, f64, usize) {
    let n = start.len();
    // Adaptive coefficients (tuned for dimension) keep contraction sane in
    // higher dimensions.
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, (0.75 - 0.5 / nf).max(0.5), 1.0 - 1.0 / nf.max(2.0));

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f_start));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += 0.1 * x[i].abs().max(1.0);
        let fx = f(&x);
        simplex.push((x, fx));
    }

    let max_iters = options.nm_max_iters * n;
    let mut iters = 0;
    while iters < max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (f_best, f_worst) = (simplex[0].1, simplex[n].1);
        if (f_worst - f_best).abs() <= 1e-12 * (1.0 + f_best.abs()) {
            break;
        }
        iters += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in simplex.iter().take(n) {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / nf;
            }
        }
        let at = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, x)| c + coef * (c - x))
                .collect()
        };

        let xr = at(alpha, &simplex[n].0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = at(alpha * beta, &simplex[n].0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = at(alpha * gamma, &simplex[n].0);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = at(-gamma, &simplex[n].0);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                // Shrink towards the best vertex.
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for (xi, bi) in v.0.iter_mut().zip(&best) {
                        *xi = bi + delta * (*xi - bi);
                    }
                    v.1 = f(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx, iters)
}

fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = 6e-6 * (1.0 + x[i].abs());
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

fn bfgs<F: Fn(&[f64]) -> f64>(f: &F, start: &[f64], f_start: f64, options: &MinimizeOptions) -> OptimResult {
    let n = start.len();
    let mut x = start.to_vec();
    let mut fx = f_start;
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut g = fd_gradient(f, &x);
    let mut g_norm = norm(&g);
    let mut converged = g_norm < options.gtol;
    let mut iters = 0;

    while !converged && iters < options.max_iters {
        iters += 1;
        let gv = nalgebra::DVector::from_column_slice(&g);
        let mut dir: Vec<f64> = (&h * &gv).iter().map(|v| -v).collect();
        // Fall back to steepest descent if the approximation lost descent.
        if dot(&dir, &g) >= 0.0 {
            h = DMatrix::identity(n, n);
            dir = g.iter().map(|v| -v).collect();
        }

        let slope = dot(&dir, &g);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let xt: Vec<f64> = x.iter().zip(&dir).map(|(xi, d)| xi + t * d).collect();
            let ft = f(&xt);
            if ft <= fx + 1e-4 * t * slope {
                accepted = Some((xt, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // No decrease along the search direction: the point is as good
            // as the finite-difference model can tell.
            converged = true;
            break;
        };

        let g_new = fd_gradient(f, &x_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * norm(&s) * norm(&y) {
            // Inverse-Hessian BFGS update.
            let sv = nalgebra::DVector::from_column_slice(&s);
            let yv = nalgebra::DVector::from_column_slice(&y);
            let hy = &h * &yv;
            let yhy = yv.dot(&hy);
            let rho = 1.0 / sy;
            // H <- H + (sy + yHy)·ssᵀ/sy² − (Hysᵀ + syᵀH)/sy
            let ss = &sv * sv.transpose();
            let hys = &hy * sv.transpose();
            h += ss * ((sy + yhy) * rho * rho) - (&hys + hys.transpose()) * rho;
        }

        let rel_change = (fx - f_new).abs() <= options.tol * (1.0 + f_new.abs());
        x = x_new;
        fx = f_new;
        g = g_new;
        g_norm = norm(&g);
        if g_norm < options.gtol || rel_change {
            converged = true;
        }
    }

    OptimResult {
        argmin: x,
        value: fx,
        converged,
        iterations: iters,
        gradient_norm: g_norm,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Central-difference Hessian with per-coordinate steps
/// h_i = cbrt(machine ε)·(1+|x_i|), symmetrized as (H + Hᵀ)/2.
pub fn numeric_hessian<F: Fn(&[f64]) -> f64>(objective: F, point: &[f64]) -> Result<DMatrix<f64>> {
    let n = point.len();
    let steps: Vec<f64> = point.iter().map(|&v| f64::EPSILON.cbrt() * (1.0 + v.abs())).collect();
    let f0 = objective(point);
    let mut h = DMatrix::<f64>::zeros(n, n);
    let mut bad = Vec::new();
    let mut x = point.to_vec();
    for i in 0..n {
        let hi = steps[i];
        x[i] = point[i] + hi;
        let fp = objective(&x);
        x[i] = point[i] - hi;
        let fm = objective(&x);
        x[i] = point[i];
        let second = (fp - 2.0 * f0 + fm) / (hi * hi);
        if !second.is_finite() {
            bad.push((i, i));
        }
        h[(i, i)] = second;
        for j in (i + 1)..n {
            let hj = steps[j];
            x[i] = point[i] + hi;
            x[j] = point[j] + hj;
            let fpp = objective(&x);
            x[j] = point[j] - hj;
            let fpm = objective(&x);
            x[i] = point[i] - hi;
            let fmm = objective(&x);
            x[j] = point[j] + hj;
            let fmp = objective(&x);
            x[i] = point[i];
            x[j] = point[j];
            let mixed = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            if !mixed.is_finite() {
                bad.push((i, j));
            }
            h[(i, j)] = mixed;
            h[(j, i)] = mixed;
        }
    }
    if !bad.is_empty() {
        return Err(Error::NonFinite(format!(
            "Hessian has non-finite entries at coordinate pairs {bad:?}"
        )));
    }
    let sym = (&h + h.transpose()) * 0.5;
    Ok(sym)
}
