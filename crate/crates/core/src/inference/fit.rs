//! Maximum-likelihood fitting with multi-start simplex search, a gradient
//! polish, and standard errors from the observed information.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::likelihood::{log_likelihood, observed_information, score, Dataset};
use super::linalg::{cholesky_inverse, condition_number, pseudo_inverse, symmetric_eigen, Matrix};
use super::optim::{bfgs, nelder_mead, newton, SimplexTol};
use crate::dist::{Params, Seed, SubModel};
use crate::error::{domain, Error, Result};

/// Condition number above which standard errors come from the
/// pseudo-inverse instead of the Cholesky inverse.
pub const ILL_CONDITIONED: f64 = 1e12;

/// Distance in ln p from the search box within which a run counts as
/// having reached the boundary.
const BOUNDARY_MARGIN: f64 = 1e-2;

/// Map from unconstrained optimizer coordinates to positive parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reparam {
    /// p = e^z
    Log,
    /// p = ln(1 + e^z)
    Softplus,
}

impl Reparam {
    fn to_param(self, z: f64) -> f64 {
        match self {
            Reparam::Log => z.exp(),
            Reparam::Softplus => {
                if z > 0.0 {
                    z + (-z).exp().ln_1p()
                } else {
                    z.exp().ln_1p()
                }
            }
        }
    }

    fn from_param(self, p: f64) -> f64 {
        match self {
            Reparam::Log => p.ln(),
            // z = ln(e^p − 1)
            Reparam::Softplus => p + (-(-p).exp()).ln_1p(),
        }
    }

    /// dp/dz at the parameter value p.
    fn jacobian(self, p: f64) -> f64 {
        match self {
            Reparam::Log => p,
            Reparam::Softplus => -(-p).exp_m1(),
        }
    }

    /// d²p/dz² at the parameter value p.
    fn curvature(self, p: f64) -> f64 {
        match self {
            Reparam::Log => p,
            Reparam::Softplus => -(-p).exp_m1() * (-p).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Latin-hypercube starts over the log-parameters.
    pub n_starts: usize,
    /// Range of the log-parameters the starts are drawn from.
    pub log_range: (f64, f64),
    /// Search box |ln p| ≤ log_bound on every free parameter. Runs that end
    /// on the box are boundary runs, not local optima.
    pub log_bound: f64,
    /// Also start a full-model search from the fitted IWei sub-model.
    pub iwei_start: bool,
    pub seed: Seed,
    pub reparam: Reparam,
    pub max_iter: usize,
    /// Relative spread of −ℓ across the simplex at convergence.
    pub f_rel_tol: f64,
    /// Simplex diameter at convergence, in optimizer coordinates.
    pub simplex_tol: f64,
    /// Largest |∂ℓ/∂η_i| accepted as stationary.
    pub grad_tol: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_starts: 16,
            log_range: (-2.0, 4.0),
            log_bound: 25.0,
            iwei_start: true,
            seed: Seed(20_240_601),
            reparam: Reparam::Log,
            max_iter: 20_000,
            f_rel_tol: 1e-10,
            simplex_tol: 1e-8,
            grad_tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub sub: SubModel,
    pub params_hat: Params,
    pub loglik: f64,
    pub score_at_hat: [f64; 5],
    /// Observed information over all five parameters.
    pub observed_info: [[f64; 5]; 5],
    /// `None` for parameters pinned by the sub-model or whose variance is
    /// not positive.
    pub std_errors: [Option<f64>; 5],
    /// Condition number of the free block of the observed information.
    pub cond_number: f64,
    pub pseudo_inverse_used: bool,
    pub converged: bool,
    pub n_iter: usize,
    pub n_starts: usize,
    /// Starts whose search ran onto the box |ln p| = log_bound.
    pub boundary_runs: usize,
    /// Largest log-likelihood reached by a boundary run.
    pub boundary_loglik: Option<f64>,
}

impl FitResult {
    pub fn n_free(&self) -> usize {
        self.sub.n_free()
    }

    /// Largest |score| over the free parameters.
    pub fn max_free_score(&self) -> f64 {
        self.score_at_hat
            .iter()
            .zip(self.sub.free_mask())
            .filter(|(_, free)| *free)
            .fold(0.0, |m, (g, _)| m.max(g.abs()))
    }
}

struct Problem<'a> {
    data: &'a Dataset,
    free: Vec<usize>,
    sub: SubModel,
    reparam: Reparam,
    log_bound: f64,
}

impl Problem<'_> {
    fn params(&self, z: &[f64]) -> Option<Params> {
        let mut v = self.sub.pin([1.0; 5]);
        for (&i, &zi) in self.free.iter().zip(z) {
            v[i] = self.reparam.to_param(zi);
            if !(v[i].ln().abs() <= self.log_bound) {
                return None;
            }
        }
        Params::from_array(v).ok()
    }

    fn on_boundary(&self, p: &Params) -> bool {
        let v = p.to_array();
        self.free
            .iter()
            .any(|&i| v[i].ln().abs() > self.log_bound - BOUNDARY_MARGIN)
    }

    fn coords(&self, p: &Params) -> Vec<f64> {
        let v = p.to_array();
        self.free
            .iter()
            .map(|&i| self.reparam.from_param(v[i]))
            .collect()
    }

    fn neg_loglik(&self, z: &[f64]) -> f64 {
        self.params(z)
            .map_or(f64::INFINITY, |p| -log_likelihood(&p, self.data))
    }

    fn neg_grad(&self, z: &[f64]) -> Vec<f64> {
        match self.params(z) {
            Some(p) => {
                let g = score(&p, self.data);
                let v = p.to_array();
                self.free
                    .iter()
                    .map(|&i| -g[i] * self.reparam.jacobian(v[i]))
                    .collect()
            }
            None => vec![f64::NAN; self.free.len()],
        }
    }

    /// Hessian of −ℓ in optimizer coordinates.
    fn neg_hess(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let k = self.free.len();
        let Some(p) = self.params(z) else {
            return vec![vec![f64::NAN; k]; k];
        };
        let g = score(&p, self.data);
        let j = observed_information(&p, self.data);
        let v = p.to_array();
        let jac: Vec<f64> = self
            .free
            .iter()
            .map(|&i| self.reparam.jacobian(v[i]))
            .collect();
        let mut h = vec![vec![0.0; k]; k];
        for (r, &i) in self.free.iter().enumerate() {
            for (c, &l) in self.free.iter().enumerate() {
                h[r][c] = j[i][l] * jac[r] * jac[c];
            }
            h[r][r] -= g[i] * self.reparam.curvature(v[i]);
        }
        h
    }
}

struct Run {
    params: Params,
    loglik: f64,
    iterations: usize,
    simplex_converged: bool,
}

fn run_from(problem: &Problem, start: &Params, config: &FitConfig) -> Option<Run> {
    let tol = SimplexTol {
        f_rel: config.f_rel_tol,
        diameter: config.simplex_tol,
        max_iter: config.max_iter,
    };
    let f = |z: &[f64]| problem.neg_loglik(z);
    let z0 = problem.coords(start);
    let first = nelder_mead(f, &z0, 0.5, tol);
    // A restart from the best vertex guards against a collapsed simplex.
    let second = nelder_mead(f, &first.x, 0.1, tol);
    let grad = |z: &[f64]| problem.neg_grad(z);
    let polish = bfgs(f, grad, &second.x, 1e-10, 1000);
    let from = if polish.f.is_finite() && polish.f <= second.f {
        &polish
    } else {
        &second
    };
    let refined = newton(f, grad, |z| problem.neg_hess(z), &from.x, 1e-12, 50);
    let best = if refined.f.is_finite() && refined.f <= from.f + 1e-12 * from.f.abs().max(1.0) {
        &refined
    } else {
        from
    };
    let params = problem.params(&best.x)?;
    let loglik = -best.f;
    loglik.is_finite().then_some(Run {
        params,
        loglik,
        iterations: first.iterations + second.iterations + polish.iterations + refined.iterations,
        simplex_converged: second.converged,
    })
}

fn latin_hypercube(n_starts: usize, dims: usize, range: (f64, f64), seed: Seed) -> Vec<Vec<f64>> {
    let mut rng = seed.rng();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(dims);
    for _ in 0..dims {
        let mut strata: Vec<usize> = (0..n_starts).collect();
        strata.shuffle(&mut rng);
        columns.push(
            strata
                .into_iter()
                .map(|k| {
                    let u: f64 = rng.random();
                    range.0 + (k as f64 + u) / n_starts as f64 * (range.1 - range.0)
                })
                .collect(),
        );
    }
    (0..n_starts)
        .map(|s| columns.iter().map(|c| c[s]).collect())
        .collect()
}

/// Maximizes the log-likelihood of `sub` on `d`.
///
/// Every start runs a simplex search, a simplex restart, a BFGS polish and a
/// Newton refinement in the reparameterized coordinates, confined to the box
/// |ln p| ≤ `log_bound`. Runs that end on the box are set aside: the winner
/// is the interior run with the largest log-likelihood, ties going to the
/// lexicographically smallest parameter vector, so the result does not
/// depend on thread scheduling. Only when every run hits the box is the best
/// boundary run returned, with `converged = false`.
pub fn fit(d: &Dataset, sub: SubModel, config: &FitConfig) -> Result<FitResult> {
    let free: Vec<usize> = (0..5).filter(|&i| sub.free_mask()[i]).collect();
    if d.n() < free.len() {
        return domain(format!(
            "{} observations cannot identify {} free parameters",
            d.n(),
            free.len()
        ));
    }
    if config.n_starts == 0 && !(config.iwei_start && sub != SubModel::IWei) {
        return domain("fit needs at least one start");
    }
    let problem = Problem {
        data: d,
        free: free.clone(),
        sub,
        reparam: config.reparam,
        log_bound: config.log_bound,
    };

    let mut starts: Vec<Params> =
        latin_hypercube(config.n_starts, free.len(), config.log_range, config.seed)
            .into_iter()
            .filter_map(|logs| {
                let mut v = sub.pin([1.0; 5]);
                for (&i, l) in free.iter().zip(logs) {
                    v[i] = l.exp();
                }
                Params::from_array(v).ok()
            })
            .collect();
    if config.iwei_start && sub != SubModel::IWei {
        let inner = FitConfig {
            iwei_start: false,
            ..*config
        };
        let iwei = fit(d, SubModel::IWei, &inner)?;
        starts.push(iwei.params_hat);
    }

    let runs: Vec<Run> = starts
        .par_iter()
        .filter_map(|s| run_from(&problem, s, config))
        .collect();
    let n_starts = starts.len();
    let (boundary, interior): (Vec<Run>, Vec<Run>) = runs
        .into_iter()
        .partition(|r| problem.on_boundary(&r.params));
    let boundary_runs = boundary.len();
    let boundary_loglik = boundary.iter().map(|r| r.loglik).reduce(f64::max);
    let on_box = interior.is_empty();
    let best = pick(if on_box { boundary } else { interior }).ok_or(Error::NoConvergence {
        what: "maximum-likelihood fit",
        iterations: 0,
    })?;

    let p = best.params;
    let score_at_hat = score(&p, d);
    let observed_info = observed_information(&p, d);
    let block: Matrix = free
        .iter()
        .map(|&i| free.iter().map(|&j| observed_info[i][j]).collect())
        .collect();
    let (eigenvalues, vectors) = symmetric_eigen(&block);
    let cond_number = condition_number(&eigenvalues);
    let (cov, pseudo_inverse_used) = match (cond_number <= ILL_CONDITIONED)
        .then(|| cholesky_inverse(&block))
        .flatten()
    {
        Some(inv) => (inv, false),
        None => (pseudo_inverse(&eigenvalues, &vectors, f64::EPSILON), true),
    };
    let mut std_errors = [None; 5];
    for (k, &i) in free.iter().enumerate() {
        let var = cov[k][k];
        if var > 0.0 && var.is_finite() {
            std_errors[i] = Some(var.sqrt());
        }
    }
    let mut result = FitResult {
        sub,
        params_hat: p,
        loglik: best.loglik,
        score_at_hat,
        observed_info,
        std_errors,
        cond_number,
        pseudo_inverse_used,
        converged: false,
        n_iter: best.iterations,
        n_starts,
        boundary_runs,
        boundary_loglik,
    };
    result.converged =
        !on_box && best.simplex_converged && result.max_free_score() <= config.grad_tol;
    Ok(result)
}

/// Largest log-likelihood, ties to the lexicographically smallest vector.
fn pick(runs: Vec<Run>) -> Option<Run> {
    runs.into_iter().reduce(|x, y| {
        let better = match y.loglik.total_cmp(&x.loglik) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => lexicographic_less(&y.params, &x.params),
        };
        if better {
            y
        } else {
            x
        }
    })
}

fn lexicographic_less(x: &Params, y: &Params) -> bool {
    x.to_array()
        .iter()
        .zip(y.to_array())
        .find_map(|(a, b)| match a.total_cmp(&b) {
            std::cmp::Ordering::Equal => None,
            o => Some(o == std::cmp::Ordering::Less),
        })
        .unwrap_or(false)
}
