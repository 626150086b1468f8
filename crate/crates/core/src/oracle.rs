//! Independent numerical oracles: adaptive Gauss–Kronrod quadrature on
//! (0, ∞) and finite intervals, a seeded Monte Carlo expectation engine, and
//! central finite differences.
//!
//! Nothing here touches the series evaluators; the only shared code is the
//! distribution primitives in [`crate::dist`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::dist::{sample, Params, Seed};
use crate::error::{domain, Error, Result};

/// Change of variables used to map (0, ∞) onto a finite interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transform {
    /// u = 1/(1+x) on (0, 1).
    InverseMap,
    /// x = exp(s/(1−s²)) on (−1, 1); suited to heavy or far-off tails.
    LogMap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    /// Relative floor so that large integrals are not held to an absolute
    /// tolerance below their rounding error.
    pub rel_tol: f64,
    pub max_panels: usize,
    pub transform: Transform,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-13,
            max_panels: 4096,
            transform: Transform::InverseMap,
        }
    }
}

impl QuadratureSpec {
    pub fn with_transform(transform: Transform) -> Self {
        Self {
            transform,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// 15-point Kronrod rule with the embedded 7-point Gauss rule; error
/// estimate as in QUADPACK's qk15.
fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = finite_or_zero(f(center));
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = finite_or_zero(f(center - dx));
        let f2 = finite_or_zero(f(center + dx));
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel {
        lo,
        hi,
        value,
        error,
    }
}

/// Adaptive Gauss–Kronrod on [lo, hi], always refining the panel with the
/// largest error estimate. Panel sums are accumulated in left-to-right order
/// so the result does not depend on refinement history.
pub fn integrate_interval<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    if !(spec.abs_tol > 0.0) {
        return domain("quadrature abs_tol must be > 0");
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return domain("integrate_interval needs finite limits");
    }
    if lo == hi {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            panels: 0,
        });
    }
    let (lo, hi, sign) = if lo < hi {
        (lo, hi, 1.0)
    } else {
        (hi, lo, -1.0)
    };

    const INITIAL: usize = 16;
    let mut heap = BinaryHeap::with_capacity(spec.max_panels + 2);
    let step = (hi - lo) / INITIAL as f64;
    for i in 0..INITIAL {
        let a = lo + step * i as f64;
        let b = if i + 1 == INITIAL {
            hi
        } else {
            lo + step * (i + 1) as f64
        };
        heap.push(gk15(&f, a, b));
    }

    let totals = |heap: &BinaryHeap<Panel>| {
        let mut panels: Vec<&Panel> = heap.iter().collect();
        panels.sort_by(|x, y| x.lo.total_cmp(&y.lo));
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        (value, error)
    };

    let (mut value, mut error) = totals(&heap);
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * value.abs());
        if error <= target {
            break;
        }
        if heap.len() >= spec.max_panels {
            return Err(Error::MaxPanelsExceeded {
                panels: heap.len(),
                value: sign * value,
                error_estimate: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            // Cannot split further in floating point; accept what we have.
            error -= worst.error;
            heap.push(Panel {
                error: 0.0,
                ..worst
            });
        } else {
            let left = gk15(&f, worst.lo, mid);
            let right = gk15(&f, mid, worst.hi);
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
        }
        if heap.len() % 64 == 0 {
            // Resynchronise the running totals to avoid drift.
            (value, error) = totals(&heap);
        }
    }
    let (value, error) = totals(&heap);
    Ok(Quadrature {
        value: sign * value,
        error_estimate: error,
        panels: heap.len(),
    })
}

/// ∫₀^∞ f(x) dx. Points that map to x = 0 or x = ∞, and non-finite integrand
/// values, contribute nothing.
pub fn integrate<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<Quadrature> {
    match spec.transform {
        Transform::InverseMap => integrate_interval(
            |u: f64| {
                let x = 1.0 / u - 1.0;
                if !(x > 0.0 && x.is_finite()) {
                    return 0.0;
                }
                f(x) / (u * u)
            },
            0.0,
            1.0,
            spec,
        ),
        Transform::LogMap => integrate_interval(
            |s: f64| {
                let d = 1.0 - s * s;
                let t = s / d;
                let x = t.exp();
                if !(x > 0.0 && x.is_finite()) {
                    return 0.0;
                }
                let v = f(x) * x * (1.0 + s * s) / (d * d);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            -1.0,
            1.0,
            spec,
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSpec {
    pub n_draws: usize,
    pub seed: Seed,
}

impl McSpec {
    pub fn new(n_draws: usize, seed: Seed) -> Result<Self> {
        if n_draws == 0 {
            return domain("n_draws must be >= 1");
        }
        Ok(Self { n_draws, seed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Sample mean and standard error of `h(X)` over inverse-transform draws.
pub fn mc_expect<H: Fn(f64) -> f64>(h: H, p: &Params, spec: &McSpec) -> Result<McEstimate> {
    let xs = sample(spec.n_draws, p, spec.seed)?;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let v = h(x);
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let n = xs.len() as f64;
    let std_error = if xs.len() > 1 {
        (m2 / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate { mean, std_error })
}

fn step(x: f64, h_rel: f64) -> f64 {
    h_rel * x.abs().max(1.0)
}

/// Central-difference gradient with step `h_rel · max(1, |x_i|)`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, at: &[f64], h_rel: f64) -> Vec<f64> {
    let mut x = at.to_vec();
    (0..at.len())
        .map(|i| {
            let h = step(at[i], h_rel);
            x[i] = at[i] + h;
            let up = f(&x);
            x[i] = at[i] - h;
            let down = f(&x);
            x[i] = at[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian, symmetric by construction.
pub fn fd_hessian<F: Fn(&[f64]) -> f64>(f: F, at: &[f64], h_rel: f64) -> Vec<Vec<f64>> {
    let n = at.len();
    let h: Vec<f64> = at.iter().map(|&v| step(v, h_rel)).collect();
    let mut x = at.to_vec();
    let f0 = f(&x);
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        x[i] = at[i] + h[i];
        let up = f(&x);
        x[i] = at[i] - h[i];
        let down = f(&x);
        x[i] = at[i];
        out[i][i] = (up - 2.0 * f0 + down) / (h[i] * h[i]);
        for j in 0..i {
            let mut eval = |si: f64, sj: f64| {
                x[i] = at[i] + si * h[i];
                x[j] = at[j] + sj * h[j];
                let v = f(&x);
                x[i] = at[i];
                x[j] = at[j];
                v
            };
            let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                / (4.0 * h[i] * h[j]);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// The default gradient and Hessian step sizes.
pub const FD_GRADIENT_STEP: f64 = 1e-5;
pub const FD_HESSIAN_STEP: f64 = 1e-4;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{pdf, quantile};
    use std::f64::consts::PI;

    #[test]
    fn exponential_integrals() {
        for t in [Transform::InverseMap, Transform::LogMap] {
            let spec = QuadratureSpec::with_transform(t);
            let q = integrate(|x| (-x).exp(), &spec).unwrap();
            assert!((q.value - 1.0).abs() < 1e-10, "{t:?}: {}", q.value);
            assert!(q.error_estimate <= 1e-10);
            // ∫ x^k e^{-x} = k!
            for (k, fact) in [(1, 1.0), (3, 6.0), (5, 120.0)] {
                let q = integrate(|x| x.powi(k) * (-x).exp(), &spec).unwrap();
                assert!((q.value - fact).abs() < 1e-10 * fact, "{t:?} k={k}");
            }
        }
    }

    #[test]
    fn pdf_normalisation_and_moment() {
        let spec = QuadratureSpec::default();
        let p = Params::iwei(1.0, 1.0).unwrap();
        let q = integrate(|x| pdf(x, &p).unwrap(), &spec).unwrap();
        assert!((q.value - 1.0).abs() < 1e-8);
        let p = Params::iwei(1.0, 2.0).unwrap();
        let log = QuadratureSpec::with_transform(Transform::LogMap);
        let q = integrate(|x| x * pdf(x, &p).unwrap(), &log).unwrap();
        assert!((q.value - PI.sqrt()).abs() < 1e-8, "{}", q.value);
    }

    #[test]
    fn finite_interval() {
        let spec = QuadratureSpec::default();
        let q = integrate_interval(|x| x.sin(), 0.0, PI, &spec).unwrap();
        assert!((q.value - 2.0).abs() < 1e-12);
        let r = integrate_interval(|x| x.sin(), PI, 0.0, &spec).unwrap();
        assert_eq!(r.value, -q.value);
        // Integrable endpoint singularity.
        let q = integrate_interval(|x| 1.0 / x.sqrt(), 0.0, 1.0, &spec).unwrap();
        assert!((q.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn max_panels_reports_best_estimate() {
        let spec = QuadratureSpec {
            max_panels: 20,
            ..QuadratureSpec::default()
        };
        match integrate_interval(|x| (1.0 / x).sin() / x.sqrt(), 0.0, 1.0, &spec) {
            Err(Error::MaxPanelsExceeded { panels, value, .. }) => {
                assert!(panels >= 20);
                assert!(value.is_finite());
            }
            other => panic!("expected MaxPanelsExceeded, got {other:?}"),
        }
    }

    #[test]
    fn monte_carlo_examples() {
        let p = Params::iwei(1.0, 2.0).unwrap();
        let spec = McSpec::new(200_000, Seed(3)).unwrap();
        let one = mc_expect(|_| 1.0, &p, &spec).unwrap();
        assert_eq!(one.mean, 1.0);
        assert_eq!(one.std_error, 0.0);
        let m = quantile(0.5, &p).unwrap();
        let ind = mc_expect(|x| if x <= m { 1.0 } else { 0.0 }, &p, &spec).unwrap();
        assert!((ind.mean - 0.5).abs() < 3.0 * ind.std_error);
        let mean = mc_expect(|x| x, &p, &spec).unwrap();
        assert!((mean.mean - PI.sqrt()).abs() < 3.0 * mean.std_error);
        assert_eq!(mean, mc_expect(|x| x, &p, &spec).unwrap());
    }

    #[test]
    fn monte_carlo_error_scales() {
        let p = Params::iwei(1.0, 6.0).unwrap();
        let se: Vec<f64> = [1_000usize, 10_000, 100_000]
            .iter()
            .map(|&n| {
                mc_expect(|x| x, &p, &McSpec::new(n, Seed(9)).unwrap())
                    .unwrap()
                    .std_error
            })
            .collect();
        for w in se.windows(2) {
            let ratio = w[0] / w[1];
            let expect = 10f64.sqrt();
            assert!(
                ratio > expect / 1.5 && ratio < expect * 1.5,
                "ratio {ratio}"
            );
        }
    }

    #[test]
    fn quadratic_form_hessian() {
        let a = [[4.0, 1.0, 0.5], [1.0, 3.0, -0.2], [0.5, -0.2, 2.0]];
        let f = |x: &[f64]| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += 0.5 * x[i] * a[i][j] * x[j];
                }
            }
            s + x[0] - 2.0 * x[2]
        };
        let at = [0.3, -1.2, 2.5];
        // Central differences are exact on quadratics, so a wide step removes
        // the rounding error without adding truncation error.
        let h = fd_hessian(f, &at, 1e-2);
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (h[i][j] - a[i][j]).abs() < 1e-9,
                    "H[{i}][{j}] = {}",
                    h[i][j]
                );
            }
        }
        let g = fd_gradient(f, &at, FD_GRADIENT_STEP);
        for i in 0..3 {
            let want: f64 = (0..3).map(|j| a[i][j] * at[j]).sum::<f64>() + [1.0, 0.0, -2.0][i];
            assert!((g[i] - want).abs() < 1e-8);
        }
    }

    #[test]
    fn frozen_coordinate_has_zero_curvature() {
        let f = |x: &[f64]| x[0].sin() * x[1].exp();
        let h = fd_hessian(f, &[0.4, 0.1, 7.0], FD_HESSIAN_STEP);
        for k in 0..3 {
            assert_eq!(h[2][k], 0.0);
            assert_eq!(h[k][2], 0.0);
        }
    }
}
