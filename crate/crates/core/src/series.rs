//! Series evaluators: expansion coefficients, raw moments, skewness and
//! kurtosis, the formal moment generating function, Rényi and Shannon
//! entropy, order statistics and stress–strength reliability.
//!
//! Every infinite sum is truncated by the rule in [`SeriesControl`]. A sum
//! that fails the rule, or whose terms cancel beyond what double precision
//! can resolve, is reported as unconverged and then either raised as
//! [`Error::Divergence`] or replaced by an adaptive-quadrature value,
//! depending on the control's [`DivergencePolicy`].

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::dist::{log_pdf_unchecked, surv_cdf, Params};
use crate::error::{domain, Error, Result};
use crate::oracle::{integrate, QuadratureSpec, Transform};
use crate::special::{lbeta, lgam, lgam_signed, psi, EULER_GAMMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DivergencePolicy {
    Error,
    FallbackQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub consecutive_small: usize,
    pub max_terms_per_index: usize,
    pub on_divergence: DivergencePolicy,
    /// Stop a sum over `p_{j,b}` at `j = b − 1` when `b` is a positive
    /// integer instead of running the truncation rule over the zero tail.
    pub exact_termination: bool,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            consecutive_small: 3,
            max_terms_per_index: 500,
            on_divergence: DivergencePolicy::FallbackQuadrature,
            exact_termination: true,
        }
    }
}

impl SeriesControl {
    pub fn strict() -> Self {
        Self {
            on_divergence: DivergencePolicy::Error,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return domain("series rel_tol must be > 0");
        }
        if self.max_terms_per_index == 0 || self.consecutive_small == 0 {
            return domain("series max_terms_per_index and consecutive_small must be >= 1");
        }
        Ok(())
    }
}

/// Result of a series evaluation. `converged == false` implies
/// `fallback_used == true`: an unconverged sum is never returned as is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub terms_used: usize,
    pub converged: bool,
    pub fallback_used: bool,
}

impl SeriesValue {
    fn exact(value: f64, terms_used: usize) -> Self {
        Self {
            value,
            terms_used,
            converged: true,
            fallback_used: false,
        }
    }

    fn combine(parts: &[SeriesValue], value: f64) -> Self {
        Self {
            value,
            terms_used: parts.iter().map(|p| p.terms_used).sum(),
            converged: parts.iter().all(|p| p.converged),
            fallback_used: parts.iter().any(|p| p.fallback_used),
        }
    }
}

/// Strength `X` and stress `Y` for R = P(Y < X).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressStrengthPair {
    pub x_params: Params,
    pub y_params: Params,
}

impl StressStrengthPair {
    pub fn swapped(&self) -> Self {
        Self {
            x_params: self.y_params,
            y_params: self.x_params,
        }
    }
}

/// Coefficient of `z^j` in `(1 − z)^{b−1}`:
/// `p_{j,b} = (−1)^j Γ(b) / (Γ(b−j) j!)`.
pub fn coeff_p(j: usize, b: f64) -> f64 {
    if j == 0 {
        return 1.0;
    }
    if let Some(n) = positive_integer(b) {
        if j >= n {
            return 0.0;
        }
    }
    let jf = j as f64;
    let (ln_abs, sign) = lgam_signed(b - jf);
    let parity = if j % 2 == 0 { 1.0 } else { -1.0 };
    parity * sign * (lgam(b) - ln_abs - lgam(jf + 1.0)).exp()
}

fn positive_integer(b: f64) -> Option<usize> {
    (b >= 1.0 && b == b.round() && b < 1e9).then_some(b as usize)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Partial {
    pub sum: f64,
    pub terms: usize,
    pub converged: bool,
    /// The truncation rule held here and in every inner sum, whether or not
    /// the result survived the cancellation check.
    pub truncated: bool,
}

impl Partial {
    pub(crate) fn leaf(v: f64) -> Self {
        Self {
            sum: v,
            terms: 1,
            converged: true,
            truncated: true,
        }
    }
}

/// Sums `term(0), term(1), ...` under the truncation rule. `finite_len` is
/// the number of possibly non-zero terms when that is known.
pub(crate) fn sum_series<F>(
    ctl: &SeriesControl,
    finite_len: Option<usize>,
    mut term: F,
) -> Result<Partial>
where
    F: FnMut(usize) -> Result<Partial>,
{
    let exact = finite_len.filter(|&n| ctl.exact_termination && n <= ctl.max_terms_per_index);
    let cap = exact.unwrap_or(ctl.max_terms_per_index);
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    let mut max_abs = 0.0_f64;
    let mut run = 0;
    let mut terms = 0;
    let mut inner_ok = true;
    let mut inner_truncated = true;
    let mut converged = exact.is_some();
    for j in 0..cap {
        let t = term(j)?;
        terms += t.terms.max(1);
        inner_ok &= t.converged;
        inner_truncated &= t.truncated;
        let v = t.sum;
        if !v.is_finite() {
            return Ok(Partial {
                sum: f64::NAN,
                terms,
                converged: false,
                truncated: false,
            });
        }
        // Neumaier compensated summation.
        let s = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - s) + v
        } else {
            (v - s) + sum
        };
        sum = s;
        max_abs = max_abs.max(v.abs());
        if exact.is_none() {
            let total = (sum + comp).abs();
            if v.abs() <= ctl.rel_tol * total || (v == 0.0 && total == 0.0) {
                run += 1;
                if run >= ctl.consecutive_small {
                    converged = true;
                    break;
                }
            } else {
                run = 0;
            }
        }
    }
    let total = sum + comp;
    // Alternating binomial-type sums can cancel to far below their largest
    // term; beyond ~1/rel_tol the rounding error exceeds the tolerance.
    let cancellation = max_abs * 64.0 * f64::EPSILON > ctl.rel_tol * total.abs();
    Ok(Partial {
        sum: total,
        terms,
        converged: converged && inner_ok && !cancellation,
        truncated: converged && inner_truncated,
    })
}

fn leaf(v: f64) -> Result<Partial> {
    Ok(Partial::leaf(v))
}

/// Double sum Σ_{j1} p_{j1,b1} Σ_{j2} p_{j2, m(j1)} h(j1, j2), inner first.
pub(crate) fn double_series<M, H>(ctl: &SeriesControl, b1: f64, m: M, h: H) -> Result<Partial>
where
    M: Fn(usize) -> f64,
    H: Fn(usize, usize, f64) -> f64,
{
    sum_series(ctl, positive_integer(b1), |j1| {
        let w1 = coeff_p(j1, b1);
        if w1 == 0.0 {
            return leaf(0.0);
        }
        let m1 = m(j1);
        let inner = sum_series(ctl, positive_integer(m1), |j2| {
            let w2 = coeff_p(j2, m1);
            if w2 == 0.0 {
                return leaf(0.0);
            }
            leaf(w2 * h(j1, j2, m1))
        })?;
        Ok(Partial {
            sum: w1 * inner.sum,
            ..inner
        })
    })
}

fn fallback(
    what: &'static str,
    ctl: &SeriesControl,
    partial: Partial,
    oracle: impl FnOnce() -> Result<f64>,
) -> Result<SeriesValue> {
    if partial.converged {
        return Ok(SeriesValue::exact(partial.sum, partial.terms));
    }
    match ctl.on_divergence {
        DivergencePolicy::Error => Err(Error::Divergence {
            what,
            terms: partial.terms,
        }),
        DivergencePolicy::FallbackQuadrature => Ok(SeriesValue {
            value: oracle()?,
            terms_used: partial.terms,
            converged: false,
            fallback_used: true,
        }),
    }
}

fn quad<F: Fn(f64) -> f64>(f: F) -> Result<f64> {
    Ok(integrate(f, &QuadratureSpec::with_transform(Transform::LogMap))?.value)
}

fn pdf_at(x: f64, p: &Params) -> f64 {
    log_pdf_unchecked(x, p).exp()
}

fn check_order(r: f64, p: &Params) -> Result<()> {
    if r >= p.theta() {
        return Err(Error::MomentUndefined {
            order: r,
            theta: p.theta(),
        });
    }
    Ok(())
}

/// r-th raw moment E[X^r] from the double series over the IWei components.
pub fn raw_moment(r: u32, p: &Params, ctl: &SeriesControl) -> Result<SeriesValue> {
    ctl.validate()?;
    if r == 0 {
        return Ok(SeriesValue::exact(1.0, 0));
    }
    let rf = f64::from(r);
    check_order(rf, p)?;
    let e = rf / p.theta();
    let gamma_factor = lgam(1.0 - e).exp();
    let front = p.c() * (-p.ln_beta()).exp();
    let (a, c, gamma) = (p.a(), p.c(), p.gamma());
    let partial = double_series(
        ctl,
        p.b(),
        |j1| c * (a + j1 as f64),
        |_, j2, _| {
            let k = (j2 + 1) as f64;
            (k * gamma).powf(e) * gamma_factor / k
        },
    )?;
    let partial = Partial {
        sum: front * partial.sum,
        ..partial
    };
    fallback("raw moment", ctl, partial, || {
        quad(|x| x.powf(rf) * pdf_at(x, p))
    })
}

fn raw_moments(n: u32, p: &Params, ctl: &SeriesControl) -> Result<Vec<SeriesValue>> {
    (1..=n).map(|r| raw_moment(r, p, ctl)).collect()
}

/// Standardized third central moment.
pub fn skewness(p: &Params, ctl: &SeriesControl) -> Result<SeriesValue> {
    check_order(3.0, p)?;
    let m = raw_moments(3, p, ctl)?;
    let (m1, m2, m3) = (m[0].value, m[1].value, m[2].value);
    let var = m2 - m1 * m1;
    let v = (m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3)) / var.powf(1.5);
    Ok(SeriesValue::combine(&m, v))
}

/// Standardized fourth central moment (not excess).
pub fn kurtosis(p: &Params, ctl: &SeriesControl) -> Result<SeriesValue> {
    check_order(4.0, p)?;
    let m = raw_moments(4, p, ctl)?;
    let (m1, m2, m3, m4) = (m[0].value, m[1].value, m[2].value, m[3].value);
    let var = m2 - m1 * m1;
    let v = (m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4)) / (var * var);
    Ok(SeriesValue::combine(&m, v))
}

/// Truncated formal sum Σ_{r=0}^{r_max} t^r μ_r / r!.
///
/// The moment generating function itself does not exist for t > 0: only
/// moments of order below θ are finite. This is a polynomial in `t`, not a
/// convergent expansion of anything.
pub fn formal_mgf(t: f64, r_max: u32, p: &Params, ctl: &SeriesControl) -> Result<SeriesValue> {
    check_order(f64::from(r_max), p)?;
    let m = raw_moments(r_max, p, ctl)?;
    let mut value = 1.0;
    let mut coef = 1.0;
    for (r, mu) in m.iter().enumerate() {
        coef *= t / (r + 1) as f64;
        value += coef * mu.value;
    }
    if m.is_empty() {
        return Ok(SeriesValue::exact(1.0, 0));
    }
    Ok(SeriesValue::combine(&m, value))
}

/// Rényi entropy of order ρ.
pub fn renyi_entropy(rho: f64, p: &Params, ctl: &SeriesControl) -> Result<SeriesValue> {
    ctl.validate()?;
    if !(rho > 0.0 && rho.is_finite() && rho != 1.0) {
        return domain(format!("Rényi order must be positive and != 1, got {rho}"));
    }
    let (a, b, c, gamma, theta) = (p.a(), p.b(), p.c(), p.gamma(), p.theta());
    let k = rho + (rho - 1.0) / theta;
    if !(k > 0.0) {
        return domain(format!(
            "Rényi entropy needs rho + (rho-1)/theta > 0, got {k}"
        ));
    }
    let partial = double_series(
        ctl,
        rho * (b - 1.0) + 1.0,
        |j1| rho * (a * c - 1.0) + j1 as f64 * c + 1.0,
        |_, j2, _| (-k * ((j2 as f64 + rho) * gamma).ln()).exp(),
    )?;
    let log_norm = rho * (c.ln() + gamma.ln() + theta.ln() - p.ln_beta()) + lgam(k) - theta.ln();
    let partial = Partial {
        sum: (log_norm + partial.sum.ln()) / (1.0 - rho),
        converged: partial.converged && partial.sum > 0.0,
        ..partial
    };
    fallback("Rényi entropy", ctl, partial, || {
        Ok(quad(|x| (rho * log_pdf_unchecked(x, p)).exp())?.ln() / (1.0 - rho))
    })
}

/// Largest `m` for which the alternating inner sum in the Shannon entropy is
/// evaluated directly; above it the equivalent positive series is used.
const SHANNON_DIRECT_MAX: usize = 8;

/// T(m) = Σ_{i<m} p_{i,m}/(i+1) [ψ(1) − ψ((i+1)/c + 1)] = ∫₀¹ ln(1 − (1−v)^c) v^{m−1} dv.
fn shannon_inner(m: usize, c: f64, ctl: &SeriesControl) -> Result<Partial> {
    let mf = m as f64;
    if m <= SHANNON_DIRECT_MAX {
        return sum_series(ctl, Some(m), |i| {
            let w = coeff_p(i, mf);
            let i1 = (i + 1) as f64;
            leaf(w / i1 * (-EULER_GAMMA - psi(i1 / c + 1.0)))
        });
    }
    // −Σ_{k≥1} B(m, kc+1)/k, all terms of one sign.
    let lg_m = lgam(mf);
    let s = sum_series(ctl, None, |k| {
        let k1 = (k + 1) as f64;
        let q = k1 * c + 1.0;
        leaf(-(lg_m + lgam(q) - lgam(mf + q)).exp() / k1)
    })?;
    Ok(s)
}

/// Shannon (differential) entropy −E[ln f(X)].
pub fn shannon_entropy(p: &Params, ctl: &SeriesControl) -> Result<SeriesValue> {
    ctl.validate()?;
    let (a, b, c, gamma, theta) = (p.a(), p.b(), p.c(), p.gamma(), p.theta());
    let mut cache: Vec<Option<Partial>> = Vec::new();
    let mut inner_terms = 0;
    let mut inner_ok = true;
    if b != 1.0 {
        // Pre-compute T(m) for every m the double sum can reach.
        cache.resize(ctl.max_terms_per_index + 1, None);
        for (m, slot) in cache.iter_mut().enumerate().skip(1) {
            let t = shannon_inner(m, c, ctl)?;
            inner_terms += t.terms;
            inner_ok &= t.converged;
            *slot = Some(t);
        }
    }
    let partial = double_series(
        ctl,
        b,
        |j1| c * (a + j1 as f64),
        |_, j2, _| {
            let k = (j2 + 1) as f64;
            let mut v = (theta + 1.0) / theta * ((k * gamma).ln() + EULER_GAMMA) / k
                - (a * c - 1.0) / k * (-EULER_GAMMA - psi(k + 1.0))
                + 1.0 / (k * k);
            if b != 1.0 {
                v -= (b - 1.0) * cache[j2 + 1].map_or(f64::NAN, |t| t.sum);
            }
            v
        },
    )?;
    let front = c * (-p.ln_beta()).exp();
    let partial = Partial {
        sum: -(c.ln() + theta.ln() + gamma.ln() - p.ln_beta()) + front * partial.sum,
        terms: partial.terms + inner_terms,
        converged: partial.converged && inner_ok,
        truncated: partial.truncated,
    };
    fallback("Shannon entropy", ctl, partial, || {
        quad(|x| {
            let lp = log_pdf_unchecked(x, p);
            if lp == f64::NEG_INFINITY {
                0.0
            } else {
                -lp * lp.exp()
            }
        })
    })
}

fn check_order_stat(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return domain(format!(
            "order statistic needs 1 <= k <= n, got k={k}, n={n}"
        ));
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> f64 {
    (lgam(n as f64 + 1.0) - lgam(k as f64 + 1.0) - lgam((n - k) as f64 + 1.0))
        .exp()
        .round()
}

/// Density of the k-th of n order statistics, from the binomial expansion
/// of (1 − F)^{n−k}, normalised by 1/B(k, n−k+1).
pub fn order_stat_pdf(x: f64, k: usize, n: usize, p: &Params) -> Result<f64> {
    check_order_stat(k, n)?;
    let f = crate::dist::pdf(x, p)?;
    let (_, cdf) = surv_cdf(x, p);
    let mut sum = 0.0;
    for j in 0..=(n - k) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binomial(n - k, j) * cdf.powi((k + j - 1) as i32);
    }
    Ok(sum * f * order_norm(k, n))
}

/// The same density in the closed form F^{k−1} (1−F)^{n−k} f / B(k, n−k+1).
pub fn order_stat_pdf_closed(x: f64, k: usize, n: usize, p: &Params) -> Result<f64> {
    check_order_stat(k, n)?;
    let f = crate::dist::pdf(x, p)?;
    let (surv, cdf) = surv_cdf(x, p);
    Ok(cdf.powi((k - 1) as i32) * surv.powi((n - k) as i32) * f * order_norm(k, n))
}

fn order_norm(k: usize, n: usize) -> f64 {
    (-lbeta(k as f64, (n - k + 1) as f64)).exp()
}

/// E[X_{k:n}^s] as a finite combination of probability weighted moments
/// E[X^s F(X)^{k+j−1}], each evaluated by quadrature.
pub fn order_stat_moment(
    s: u32,
    k: usize,
    n: usize,
    p: &Params,
    ctl: &SeriesControl,
) -> Result<SeriesValue> {
    ctl.validate()?;
    check_order_stat(k, n)?;
    let sf = f64::from(s);
    check_order(sf, p)?;
    let mut sum = 0.0;
    for j in 0..=(n - k) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let power = (k + j - 1) as i32;
        let pwm = quad(|x| x.powf(sf) * surv_cdf(x, p).1.powi(power) * pdf_at(x, p))?;
        sum += sign * binomial(n - k, j) * pwm;
    }
    Ok(SeriesValue::exact(sum * order_norm(k, n), n - k + 1))
}

/// Stress–strength reliability R = P(Y < X).
///
/// With a common θ the quadruple series with the closed IWei kernel is used.
/// Otherwise the kernel has no closed form and R is computed directly as
/// ∫ f_X F_Y by quadrature; that result reports `terms_used = 0`.
pub fn reliability(pair: &StressStrengthPair, ctl: &SeriesControl) -> Result<SeriesValue> {
    ctl.validate()?;
    let (px, py) = (&pair.x_params, &pair.y_params);
    let oracle = || quad(|t| pdf_at(t, px) * surv_cdf(t, py).1);
    if px.theta() != py.theta() {
        return Ok(SeriesValue::exact(oracle()?, 0));
    }
    let (gx, gy) = (px.gamma(), py.gamma());
    let (ax, cx) = (px.a(), px.c());

    // H(j2) = Σ_{j3} p_{j3,b_x} Σ_{j4} p_{j4,c_x(a_x+j3)}/(j4+1) · R_{j2,j4},
    // shared by every j1.
    let cache: RefCell<Vec<Option<f64>>> = RefCell::new(vec![None; ctl.max_terms_per_index]);
    let strength = |j2: usize| -> f64 {
        if let Some(v) = cache.borrow()[j2] {
            return v;
        }
        let ly = gy * (j2 + 1) as f64;
        let h = double_series(
            ctl,
            px.b(),
            |j3| cx * (ax + j3 as f64),
            |_, j4, _| {
                let k4 = (j4 + 1) as f64;
                let lx = gx * k4;
                lx / (lx + ly) / k4
            },
        );
        let v = match h {
            Ok(h) if h.converged => h.sum,
            _ => f64::NAN,
        };
        cache.borrow_mut()[j2] = Some(v);
        v
    };
    let partial = double_series(
        ctl,
        py.b(),
        |j1| py.c() * (py.a() + j1 as f64),
        |_, j2, _| strength(j2) / (j2 + 1) as f64,
    )?;
    let front = px.c() * py.c() * (-px.ln_beta() - py.ln_beta()).exp();
    let partial = Partial {
        sum: front * partial.sum,
        ..partial
    };
    fallback("reliability", ctl, partial, oracle)
}
