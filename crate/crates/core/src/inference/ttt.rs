//! Scaled total-time-on-test transforms, empirical and model-based.

use serde::{Deserialize, Serialize};

use super::likelihood::Dataset;
use crate::dist::{quantile, surv_cdf, Params};
use crate::error::{domain, Result};
use crate::oracle::{integrate, integrate_interval, QuadratureSpec, Transform};

/// Upper quantile used as the integration limit when the mean is infinite.
pub const TRUNCATION_LEVEL: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TttKind {
    Empirical,
    Fitted,
    /// Normalized by ∫₀^T S with T = quantile(1 − 1e-6), because ∫₀^∞ S diverges.
    FittedTruncated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TttCurve {
    pub u_grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub kind: TttKind,
}

impl TttCurve {
    /// Indices where φ(u) − u changes sign, ignoring points within `tol` of
    /// the diagonal.
    pub fn diagonal_crossings(&self, tol: f64) -> Vec<usize> {
        let mut out = Vec::new();
        let mut last = 0.0_f64;
        for (i, (&u, &phi)) in self.u_grid.iter().zip(&self.phi).enumerate() {
            let d = phi - u;
            if d.abs() <= tol {
                continue;
            }
            if last != 0.0 && d.signum() != last.signum() {
                out.push(i);
            }
            last = d;
        }
        out
    }
}

/// A positive lifetime law with the pieces the TTT transform needs.
pub trait Lifetime {
    fn survival(&self, x: f64) -> f64;
    fn quantile(&self, u: f64) -> Result<f64>;
    fn has_finite_mean(&self) -> bool;
}

impl Lifetime for Params {
    fn survival(&self, x: f64) -> f64 {
        surv_cdf(x, self).0
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        quantile(u, self)
    }

    /// The survival tail behaves like x^{−θac}.
    fn has_finite_mean(&self) -> bool {
        self.theta() * self.a() * self.c() > 1.0
    }
}

/// Exponential law, whose scaled TTT transform is the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantHazard {
    pub rate: f64,
}

impl Lifetime for ConstantHazard {
    fn survival(&self, x: f64) -> f64 {
        (-self.rate * x).exp()
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return domain(format!("u must lie in (0, 1), got {u}"));
        }
        Ok(-(-u).ln_1p() / self.rate)
    }

    fn has_finite_mean(&self) -> bool {
        true
    }
}

/// φ(i/n) = [Σ_{j≤i} x_(j) + (n−i) x_(i)] / Σ_j x_(j) for i = 0..=n.
pub fn ttt_empirical(d: &Dataset) -> Result<TttCurve> {
    let n = d.n();
    if n < 2 {
        return domain("empirical TTT needs at least 2 observations");
    }
    let x = d.values();
    let total: f64 = x.iter().sum();
    let mut u_grid = vec![0.0];
    let mut phi = vec![0.0];
    let mut partial = 0.0;
    for i in 1..=n {
        partial += x[i - 1];
        u_grid.push(i as f64 / n as f64);
        phi.push(if i == n {
            1.0
        } else {
            (partial + (n - i) as f64 * x[i - 1]) / total
        });
    }
    Ok(TttCurve {
        u_grid,
        phi,
        kind: TttKind::Empirical,
    })
}

/// φ(u) = ∫₀^{Q(u)} S / ∫₀^T S on u = k/grid_size, with T = ∞ when the mean
/// is finite and T = Q(1 − 1e-6) otherwise.
pub fn ttt_fitted<L: Lifetime>(law: &L, grid_size: usize) -> Result<TttCurve> {
    if grid_size < 2 || grid_size as f64 >= 1.0 / (1.0 - TRUNCATION_LEVEL) {
        return domain(format!("grid_size must lie in [2, 1e6), got {grid_size}"));
    }
    let finite = law.has_finite_mean();
    let spec = QuadratureSpec::default();
    let u_grid: Vec<f64> = (0..=grid_size)
        .map(|k| k as f64 / grid_size as f64)
        .collect();
    let mut knots = vec![0.0];
    for &u in &u_grid[1..grid_size] {
        knots.push(law.quantile(u)?);
    }
    let s = |x: f64| law.survival(x);
    let mut pieces = Vec::with_capacity(grid_size);
    for w in knots.windows(2) {
        pieces.push(integrate_interval(s, w[0], w[1], &spec)?.value);
    }
    let last = knots[grid_size - 1];
    let tail = if finite {
        let shifted = QuadratureSpec::with_transform(Transform::InverseMap);
        integrate(|t| law.survival(last + t), &shifted)?.value
    } else {
        integrate_interval(s, last, law.quantile(TRUNCATION_LEVEL)?, &spec)?.value
    };
    pieces.push(tail);
    let total: f64 = pieces.iter().sum();
    let mut phi = vec![0.0];
    let mut acc = 0.0;
    for (k, piece) in pieces.iter().enumerate() {
        acc += piece;
        phi.push(if k + 1 == grid_size { 1.0 } else { acc / total });
    }
    Ok(TttCurve {
        u_grid,
        phi,
        kind: if finite {
            TttKind::Fitted
        } else {
            TttKind::FittedTruncated
        },
    })
}
