//! Unconstrained minimizers: Nelder–Mead simplex, BFGS, and a Newton
//! refinement with an eigenvalue-modified Hessian.

use super::linalg::symmetric_eigen;

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexTol {
    /// Spread of vertex values, relative to max(1, |f_best|).
    pub f_rel: f64,
    /// Largest vertex distance from the best vertex.
    pub diameter: f64,
    pub max_iter: usize,
}

/// Nelder–Mead with the standard coefficients and an initial simplex of
/// `step` along each axis. Non-finite values are treated as +∞.
pub(crate) fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    start: &[f64],
    step: f64,
    tol: SimplexTol,
) -> Minimum {
    let n = start.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut pts: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p)).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < tol.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        if vals[0] == f64::INFINITY {
            // No finite vertex: nothing to descend on.
            break;
        }
        let spread = vals[n] - vals[0];
        let diameter = pts[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&pts[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= tol.f_rel * vals[0].abs().max(1.0) && diameter < tol.diameter {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|k| pts[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        // Outside contraction if the reflection beat the worst point.
        let xc = along(if fr < vals[n] { -0.5 } else { 0.5 });
        let fc = eval(&xc);
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            pts[i] = pts[i]
                .iter()
                .zip(&pts[0])
                .map(|(p, b)| b + 0.5 * (p - b))
                .collect();
            vals[i] = eval(&pts[i]);
        }
    }
    let best = (0..=n)
        .min_by(|&i, &j| vals[i].total_cmp(&vals[j]))
        .unwrap_or(0);
    Minimum {
        x: pts[best].clone(),
        f: vals[best],
        iterations,
        converged,
    }
}

/// BFGS with backtracking line search. Stops when the largest gradient
/// component is below `g_tol` or no descent step can be found.
pub(crate) fn bfgs<F, G>(f: F, grad: G, start: &[f64], g_tol: f64, max_iter: usize) -> Minimum
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = start.len();
    let mut x = start.to_vec();
    let mut fx = f(&x);
    let mut g = grad(&x);
    let mut h: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut iterations = 0;
    let norm = |g: &[f64]| g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    while iterations < max_iter {
        if !(norm(&g) > g_tol) {
            break;
        }
        iterations += 1;
        let mut d: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| h[i][j] * g[j]).sum::<f64>())
            .collect();
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            // Reset to steepest descent.
            for (i, row) in h.iter_mut().enumerate() {
                row.iter_mut()
                    .enumerate()
                    .for_each(|(j, v)| *v = if i == j { 1.0 } else { 0.0 });
            }
            d = g.iter().map(|v| -v).collect();
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let fn_ = f(&xn);
            if fn_.is_finite() && fn_ <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fn_));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fn_)) = accepted else { break };
        if fn_ >= fx {
            // The decrease is below the resolution of f.
            break;
        }
        let gn = grad(&xn);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
            let hy: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| h[i][j] * y[j]).sum())
                .collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h[i][j] +=
                        (1.0 + yhy / sy) * s[i] * s[j] / sy - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        x = xn;
        fx = fn_;
        g = gn;
    }
    let converged = norm(&g) <= g_tol;
    Minimum {
        x,
        f: fx,
        iterations,
        converged,
    }
}

/// Newton iterations from `start` using the eigen-decomposed Hessian with
/// eigenvalues replaced by max(|λ|, 1e-12 λ_max), so indefinite and
/// near-singular Hessians still give descent directions.
///
/// Near a flat optimum the objective changes by less than its rounding
/// error, so a step is also accepted when f stays within that noise and the
/// gradient shrinks.
pub(crate) fn newton<F, G, H>(
    f: F,
    grad: G,
    hess: H,
    start: &[f64],
    g_tol: f64,
    max_iter: usize,
) -> Minimum
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
    H: Fn(&[f64]) -> Vec<Vec<f64>>,
{
    let n = start.len();
    let norm = |g: &[f64]| g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut x = start.to_vec();
    let mut fx = f(&x);
    let mut g = grad(&x);
    let mut iterations = 0;
    while iterations < max_iter && norm(&g) > g_tol {
        iterations += 1;
        let (eig, vecs) = symmetric_eigen(&hess(&x));
        let floor = 1e-12 * eig.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        let mut d = vec![0.0; n];
        for (k, &e) in eig.iter().enumerate() {
            let proj: f64 = (0..n).map(|i| vecs[i][k] * g[i]).sum();
            let scale = e.abs().max(floor);
            if scale > 0.0 {
                for (i, di) in d.iter_mut().enumerate() {
                    *di -= vecs[i][k] * proj / scale;
                }
            }
        }
        let noise = 1e-12 * fx.abs().max(1.0);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let fn_ = f(&xn);
            if fn_.is_finite() && fn_ <= fx + noise {
                let gn = grad(&xn);
                if fn_ < fx - noise || norm(&gn) < norm(&g) {
                    accepted = Some((xn, fn_, gn));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else { break };
        x = xn;
        fx = fn_;
        g = gn;
    }
    Minimum {
        converged: norm(&g) <= g_tol,
        x,
        f: fx,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    fn rosenbrock_grad(x: &[f64]) -> Vec<f64> {
        vec![
            -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
            200.0 * (x[1] - x[0] * x[0]),
        ]
    }

    #[test]
    fn simplex_finds_rosenbrock_minimum() {
        let tol = SimplexTol {
            f_rel: 1e-14,
            diameter: 1e-8,
            max_iter: 10_000,
        };
        let m = nelder_mead(rosenbrock, &[-1.2, 1.0], 0.5, tol);
        assert!(m.converged);
        assert!(
            (m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6,
            "{:?}",
            m.x
        );
    }

    #[test]
    fn bfgs_finds_rosenbrock_minimum() {
        let m = bfgs(rosenbrock, rosenbrock_grad, &[-1.2, 1.0], 1e-10, 1000);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-8 && (m.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn newton_finds_rosenbrock_minimum() {
        let hess = |x: &[f64]| {
            vec![
                vec![2.0 - 400.0 * (x[1] - 3.0 * x[0] * x[0]), -400.0 * x[0]],
                vec![-400.0 * x[0], 200.0],
            ]
        };
        let m = newton(rosenbrock, rosenbrock_grad, hess, &[-1.2, 1.0], 1e-12, 200);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-10 && (m.x[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn simplex_treats_nan_as_infinite() {
        let f = |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NAN
            } else {
                (x[0] - 2.0).powi(2)
            }
        };
        let tol = SimplexTol {
            f_rel: 1e-14,
            diameter: 1e-9,
            max_iter: 2000,
        };
        let m = nelder_mead(f, &[0.5], 1.0, tol);
        assert!((m.x[0] - 2.0).abs() < 1e-6);
    }
}
