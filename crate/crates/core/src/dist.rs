//! The rGB1-IWei distribution: cdf, pdf, survival, hazard, quantile and
//! inverse-transform sampling, plus the Inverse Weibull baseline.
//!
//! With `G(x) = exp(-γ x^{-θ})` the cdf is `1 − I_{(1−G)^c}(a, b)`. All
//! evaluation goes through `s = γ x^{-θ}` and `L = ln(1 − G)`, so neither
//! `G → 0` nor `G → 1` loses precision.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{
    inc_beta_inverse_pair, inc_beta_pair, lbeta, ln_neg_log1mexp, log1mexp, log1mexp_from_ln,
};

/// Parameter names in vector order.
pub const PARAM_NAMES: [&str; 5] = ["a", "b", "c", "gamma", "theta"];

/// The parameter vector η = (a, b, c, γ, θ). Every component is finite and
/// strictly positive; this is checked once, at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct Params {
    a: f64,
    b: f64,
    c: f64,
    gamma: f64,
    theta: f64,
    ln_beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    a: f64,
    b: f64,
    c: f64,
    gamma: f64,
    theta: f64,
}

impl TryFrom<RawParams> for Params {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        Params::new(r.a, r.b, r.c, r.gamma, r.theta)
    }
}

impl From<Params> for RawParams {
    fn from(p: Params) -> Self {
        RawParams {
            a: p.a,
            b: p.b,
            c: p.c,
            gamma: p.gamma,
            theta: p.theta,
        }
    }
}

impl Params {
    pub fn new(a: f64, b: f64, c: f64, gamma: f64, theta: f64) -> Result<Self> {
        let v = [a, b, c, gamma, theta];
        for (name, x) in PARAM_NAMES.iter().zip(v) {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidParameter { name, value: x });
            }
        }
        Ok(Self {
            a,
            b,
            c,
            gamma,
            theta,
            ln_beta: lbeta(a, b),
        })
    }

    /// The Inverse Weibull baseline, i.e. a = b = c = 1.
    pub fn iwei(gamma: f64, theta: f64) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, gamma, theta)
    }

    pub fn from_array(v: [f64; 5]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3], v[4])
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.a, self.b, self.c, self.gamma, self.theta]
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    /// ln B(a, b), cached at construction.
    pub fn ln_beta(&self) -> f64 {
        self.ln_beta
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(a={}, b={}, c={}, gamma={}, theta={})",
            self.a, self.b, self.c, self.gamma, self.theta
        )
    }
}

/// Nested sub-models, obtained by pinning some of (a, b, c) to exactly 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubModel {
    Full,
    /// a = b = c = 1
    #[serde(rename = "iwei")]
    IWei,
    /// c = 1
    #[serde(rename = "beta-iwei")]
    BetaIWei,
    /// a = 1
    #[serde(rename = "expgen-iwei")]
    ExpGenIWei,
}

impl SubModel {
    pub const ALL: [SubModel; 4] = [
        SubModel::Full,
        SubModel::IWei,
        SubModel::BetaIWei,
        SubModel::ExpGenIWei,
    ];

    /// Which entries of (a, b, c, γ, θ) are free.
    pub fn free_mask(self) -> [bool; 5] {
        match self {
            SubModel::Full => [true; 5],
            SubModel::IWei => [false, false, false, true, true],
            SubModel::BetaIWei => [true, true, false, true, true],
            SubModel::ExpGenIWei => [false, true, true, true, true],
        }
    }

    pub fn n_free(self) -> usize {
        self.free_mask().iter().filter(|&&f| f).count()
    }

    /// Pins the constrained entries of `v` to 1.
    pub fn pin(self, mut v: [f64; 5]) -> [f64; 5] {
        for (x, free) in v.iter_mut().zip(self.free_mask()) {
            if !free {
                *x = 1.0;
            }
        }
        v
    }

    /// True if `p` satisfies this sub-model's constraints exactly.
    pub fn contains(self, p: &Params) -> bool {
        let v = p.to_array();
        self.pin(v) == v
    }

    pub fn name(self) -> &'static str {
        match self {
            SubModel::Full => "full",
            SubModel::IWei => "iwei",
            SubModel::BetaIWei => "beta-iwei",
            SubModel::ExpGenIWei => "expgen-iwei",
        }
    }
}

impl fmt::Display for SubModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SubModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SubModel::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown model `{s}`")))
    }
}

/// Seed for the reproducible random streams used by sampling and Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

fn check_x(x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        domain(format!("x must be > 0, got {x}"))
    }
}

fn check_scale_shape(gamma: f64, theta: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
        });
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "theta",
            value: theta,
        });
    }
    Ok(())
}

/// Inverse Weibull cdf `exp(-γ x^{-θ})`.
pub fn baseline_cdf(x: f64, gamma: f64, theta: f64) -> Result<f64> {
    check_scale_shape(gamma, theta)?;
    check_x(x)?;
    Ok((-gamma * x.powf(-theta)).exp())
}

/// Inverse Weibull density `θ γ x^{-θ-1} exp(-γ x^{-θ})`.
pub fn baseline_pdf(x: f64, gamma: f64, theta: f64) -> Result<f64> {
    check_scale_shape(gamma, theta)?;
    check_x(x)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    let s = gamma * x.powf(-theta);
    if s.is_infinite() {
        return Ok(0.0);
    }
    Ok((theta.ln() + gamma.ln() - (theta + 1.0) * x.ln() - s).exp())
}

/// Intermediate quantities shared by cdf, survival and the density.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    /// s = γ x^{-θ} = −ln G
    pub s: f64,
    /// L = ln(1 − G)
    pub l: f64,
    /// w = (1 − G)^c
    pub w: f64,
    /// 1 − w
    pub w_c: f64,
}

impl Kernel {
    pub fn new(x: f64, p: &Params) -> Self {
        let s = p.gamma * (-p.theta * x.ln()).exp();
        let l = log1mexp(s);
        let cl = p.c * l;
        Self {
            s,
            l,
            w: cl.exp(),
            w_c: -cl.exp_m1(),
        }
    }

    /// ln(1 − w), accurate when w is close to either end.
    pub fn ln_w_c(&self, p: &Params) -> f64 {
        // 1 − w = 1 − e^{−v} with ln v = ln c + ln(−L).
        log1mexp_from_ln(p.c.ln() + ln_neg_log1mexp(self.s))
    }
}

/// Survival and cdf together: `(I_w(a,b), 1 − I_w(a,b))`.
pub(crate) fn surv_cdf(x: f64, p: &Params) -> (f64, f64) {
    if x.is_infinite() {
        return (0.0, 1.0);
    }
    let k = Kernel::new(x, p);
    inc_beta_pair(k.w, k.w_c, p.a, p.b)
}

pub fn cdf(x: f64, p: &Params) -> Result<f64> {
    check_x(x)?;
    Ok(surv_cdf(x, p).1)
}

/// `1 − cdf`, evaluated directly from the incomplete beta ratio.
pub fn survival(x: f64, p: &Params) -> Result<f64> {
    check_x(x)?;
    Ok(surv_cdf(x, p).0)
}

pub(crate) fn log_pdf_unchecked(x: f64, p: &Params) -> f64 {
    if x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    let k = Kernel::new(x, p);
    if k.s.is_infinite() || k.s == 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut v = p.c.ln() - p.ln_beta + p.theta.ln() + p.gamma.ln() - (p.theta + 1.0) * x.ln() - k.s;
    let e1 = p.a * p.c - 1.0;
    if e1 != 0.0 {
        v += e1 * k.l;
    }
    if p.b != 1.0 {
        v += (p.b - 1.0) * k.ln_w_c(p);
    }
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Log-density, assembled term by term in log space.
pub fn log_pdf(x: f64, p: &Params) -> Result<f64> {
    check_x(x)?;
    Ok(log_pdf_unchecked(x, p))
}

pub fn pdf(x: f64, p: &Params) -> Result<f64> {
    Ok(log_pdf(x, p)?.exp())
}

/// Hazard rate `pdf / survival`.
pub fn hazard(x: f64, p: &Params) -> Result<f64> {
    check_x(x)?;
    let (surv, _) = surv_cdf(x, p);
    if !(surv > 0.0) {
        return Err(Error::TailDegenerate { x });
    }
    Ok((log_pdf_unchecked(x, p) - surv.ln()).exp())
}

/// Quantile function: the x with `cdf(x) = q`.
pub fn quantile(q: f64, p: &Params) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return domain(format!("q must lie in (0, 1), got {q}"));
    }
    // cdf = q  <=>  I_w(a,b) = 1 − q  <=>  I_{1−w}(b,a) = q.
    let (w_c, w) = inc_beta_inverse_pair(q, p.b, p.a)?;
    // ln w = c ln(1 − G)
    let ln_w = if w_c < 0.5 { (-w_c).ln_1p() } else { w.ln() };
    let ln_1mg = ln_w / p.c;
    // s = −ln G
    let s = if ln_1mg < -std::f64::consts::LN_2 {
        -(-ln_1mg.exp()).ln_1p()
    } else {
        -(-ln_1mg.exp_m1()).ln()
    };
    Ok(((s.ln() - p.gamma.ln()) / -p.theta).exp())
}

pub fn median(p: &Params) -> Result<f64> {
    quantile(0.5, p)
}

/// `n` draws by inverse transform from a ChaCha8 stream seeded with `seed`.
pub fn sample(n: usize, p: &Params, seed: Seed) -> Result<Vec<f64>> {
    if n == 0 {
        return domain("sample size must be >= 1");
    }
    let mut rng = seed.rng();
    (0..n).map(|_| quantile(open_unit(&mut rng), p)).collect()
}

/// Uniform draw on the open interval (0, 1).
pub(crate) fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn iwei(gamma: f64, theta: f64) -> Params {
        Params::iwei(gamma, theta).unwrap()
    }

    fn paper_hat() -> Params {
        Params::new(21.0134, 76.0581, 3.9858, 0.8176, 0.1284).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(1.0, 1.0, 1.0, 1.0, 1.0).is_ok());
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            for i in 0..5 {
                let mut v = [1.0; 5];
                v[i] = bad;
                let err = Params::from_array(v).unwrap_err();
                assert!(
                    matches!(err, Error::InvalidParameter { name, .. } if name == PARAM_NAMES[i])
                );
            }
        }
    }

    #[test]
    fn submodel_pinning() {
        let v = [2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(SubModel::IWei.pin(v), [1.0, 1.0, 1.0, 5.0, 6.0]);
        assert_eq!(SubModel::BetaIWei.pin(v), [2.0, 3.0, 1.0, 5.0, 6.0]);
        assert_eq!(SubModel::ExpGenIWei.pin(v), [1.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(SubModel::Full.pin(v), v);
        assert_eq!(SubModel::IWei.n_free(), 2);
        assert_eq!(SubModel::Full.n_free(), 5);
        for m in SubModel::ALL {
            assert_eq!(m.name().parse::<SubModel>().unwrap(), m);
        }
        assert!("weibull".parse::<SubModel>().is_err());
        assert!(SubModel::IWei.contains(&iwei(2.0, 3.0)));
        assert!(!SubModel::IWei.contains(&paper_hat()));
    }

    #[test]
    fn baseline_examples() {
        assert!((baseline_cdf(1.0, 1.0, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!((baseline_cdf(1.0, LN_2, 5.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((baseline_cdf(2.0, 1.0, 2.0).unwrap() - (-0.25f64).exp()).abs() < 1e-15);
        assert!((baseline_pdf(1.0, 1.0, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!((baseline_pdf(1.0, 2.0, 1.0).unwrap() - 2.0 * (-2f64).exp()).abs() < 1e-15);
        assert!(baseline_cdf(0.0, 1.0, 1.0).is_err());
        assert!(baseline_pdf(-1.0, 1.0, 1.0).is_err());
        assert_eq!(baseline_cdf(1e-300, 1.0, 3.0).unwrap(), 0.0);
        assert_eq!(baseline_cdf(f64::INFINITY, 1.0, 3.0).unwrap(), 1.0);
    }

    #[test]
    fn baseline_pdf_is_derivative_of_cdf() {
        for &(gamma, theta) in &[(1.0, 1.0), (0.3, 2.5), (4.0, 0.7), (0.8176, 0.1284)] {
            for &x in &[0.05, 0.4, 1.0, 3.0, 12.0] {
                let h = 1e-6 * x;
                let fd = (baseline_cdf(x + h, gamma, theta).unwrap()
                    - baseline_cdf(x - h, gamma, theta).unwrap())
                    / (2.0 * h);
                let an = baseline_pdf(x, gamma, theta).unwrap();
                assert!(
                    (fd - an).abs() <= 1e-6 * an.abs().max(1e-12),
                    "x={x} γ={gamma} θ={theta}"
                );
            }
        }
    }

    #[test]
    fn reduces_to_baseline() {
        for &(gamma, theta) in &[(1.0, 1.0), (0.25, 3.0), (7.0, 0.4)] {
            let p = iwei(gamma, theta);
            for &x in &[0.01, 0.3, 1.0, 2.5, 40.0] {
                let g = baseline_cdf(x, gamma, theta).unwrap();
                assert!((cdf(x, &p).unwrap() - g).abs() <= 1e-12);
                let gp = baseline_pdf(x, gamma, theta).unwrap();
                assert!((pdf(x, &p).unwrap() - gp).abs() <= 1e-12 * gp.max(1.0));
            }
            for &q in &[1e-6_f64, 0.1, 0.5, 0.9, 1.0 - 1e-6] {
                let closed = (-(q.ln()) / gamma).powf(-1.0 / theta);
                let got = quantile(q, &p).unwrap();
                assert!(
                    (got - closed).abs() <= 1e-12 * closed,
                    "q={q}: {got} vs {closed}"
                );
            }
        }
        assert!((cdf(1.0, &iwei(1.0, 1.0)).unwrap() - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn beta_generated_reduction() {
        let p = Params::new(2.3, 0.7, 1.0, 1.4, 1.9).unwrap();
        for &x in &[0.2, 0.8, 1.5, 6.0] {
            let g = baseline_cdf(x, 1.4, 1.9).unwrap();
            let want = 1.0 - crate::special::inc_beta_ratio(1.0 - g, 2.3, 0.7).unwrap();
            assert!((cdf(x, &p).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn pdf_direct_substitution() {
        let p = Params::new(2.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let e = (-1f64).exp();
        assert!((pdf(1.0, &p).unwrap() - 2.0 * e * (1.0 - e)).abs() < 1e-15);
        assert!((log_pdf(1.0, &iwei(1.0, 1.0)).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_pdf_at_paper_estimate() {
        // mpmath, 40 digits, direct formula.
        let got = log_pdf(0.05, &paper_hat()).unwrap();
        let want = 2.265_316_098_864_059;
        assert!((got - want).abs() < 1e-11, "{got}");
    }

    #[test]
    fn survival_and_hazard_examples() {
        let p = iwei(1.0, 1.0);
        let e = (-1f64).exp();
        assert!((survival(1.0, &p).unwrap() - (1.0 - e)).abs() < 1e-15);
        assert!((hazard(1.0, &p).unwrap() - e / (1.0 - e)).abs() < 1e-14);
        for &x in &[0.01, 0.2, 1.0, 5.0, 100.0] {
            let q = paper_hat();
            assert!((survival(x, &q).unwrap() + cdf(x, &q).unwrap() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn survival_tail_via_quantile() {
        for p in [paper_hat(), Params::new(0.7, 2.0, 3.0, 1.0, 2.0).unwrap()] {
            let x = quantile(0.999, &p).unwrap();
            let s = survival(x, &p).unwrap();
            assert!(((s - 1e-3) / 1e-3).abs() < 1e-6, "{s}");
        }
    }

    #[test]
    fn hazard_matches_log_survival_derivative() {
        let p = Params::new(1.7, 2.4, 0.6, 1.3, 2.2).unwrap();
        for &x in &[0.3, 0.7, 1.2, 2.0, 5.0] {
            let h = 1e-5 * x;
            let fd = -(survival(x + h, &p).unwrap().ln() - survival(x - h, &p).unwrap().ln())
                / (2.0 * h);
            let an = hazard(x, &p).unwrap();
            assert!((fd - an).abs() <= 1e-6 * an.max(1.0), "x={x}: {fd} vs {an}");
        }
    }

    #[test]
    fn hazard_tail_degenerate() {
        let p = iwei(1.0, 1.0);
        assert!(matches!(
            hazard(f64::INFINITY, &p),
            Err(Error::TailDegenerate { .. })
        ));
    }

    #[test]
    fn quantile_examples() {
        let p = iwei(1.0, 1.0);
        assert!((quantile(0.5, &p).unwrap() - 1.0 / LN_2).abs() < 1e-14);
        let q = paper_hat();
        assert_eq!(median(&q).unwrap(), quantile(0.5, &q).unwrap());
        assert!(quantile(0.0, &p).is_err());
        assert!(quantile(1.0, &p).is_err());
    }

    #[test]
    fn limits() {
        let p = Params::new(3.0, 76.0, 4.0, 0.8, 0.13).unwrap();
        assert_eq!(cdf(1e-300, &iwei(1.0, 3.0)).unwrap(), 0.0);
        assert_eq!(cdf(f64::INFINITY, &p).unwrap(), 1.0);
        assert_eq!(pdf(f64::INFINITY, &p).unwrap(), 0.0);
        assert_eq!(pdf(1e-300, &iwei(1.0, 3.0)).unwrap(), 0.0);
        assert_eq!(pdf(1e300, &iwei(1.0, 3.0)).unwrap(), 0.0);
    }

    #[test]
    fn sample_determinism_and_mean() {
        let p = iwei(1.0, 2.0);
        let a = sample(100_000, &p, Seed(11)).unwrap();
        let b = sample(100_000, &p, Seed(11)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample(100_000, &p, Seed(12)).unwrap());
        assert!(a.iter().all(|x| x.is_finite() && *x > 0.0));
        let n = a.len() as f64;
        let mean = a.iter().sum::<f64>() / n;
        // Var is infinite at θ = 2, so use a robust scale: E X = √π, SE from
        // a generous bound on the truncated second moment.
        let var = a.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!((mean - PI.sqrt()).abs() < 3.0 * se, "mean {mean}, se {se}");
        assert!(sample(0, &p, Seed(1)).is_err());
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> impl Strategy<Value = Params> {
        let ln = (0.2f64.ln())..(50f64.ln());
        (ln.clone(), ln.clone(), ln.clone(), ln.clone(), ln).prop_map(|(a, b, c, g, t)| {
            Params::new(a.exp(), b.exp(), c.exp(), g.exp(), t.exp()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn cdf_monotone_pdf_nonnegative(p in params()) {
            let lo = quantile(1e-6, &p).unwrap();
            let hi = quantile(1.0 - 1e-6, &p).unwrap();
            let mut prev = 0.0;
            for k in 0..=200 {
                let x = lo * (hi / lo).powf(f64::from(k) / 200.0);
                let f = cdf(x, &p).unwrap();
                prop_assert!(f >= prev && (0.0..=1.0).contains(&f));
                prop_assert!(pdf(x, &p).unwrap() >= 0.0);
                prev = f;
            }
        }

        #[test]
        fn quantile_cdf_round_trip(p in params(), q in 1e-6f64..(1.0 - 1e-6)) {
            let x = quantile(q, &p).unwrap();
            prop_assert!((cdf(x, &p).unwrap() - q).abs() <= 1e-9);
        }

        #[test]
        fn exp_log_pdf_is_pdf(p in params(), q in 1e-4f64..(1.0 - 1e-4)) {
            let x = quantile(q, &p).unwrap();
            let lp = log_pdf(x, &p).unwrap();
            prop_assert!(lp.is_finite());
            let f = pdf(x, &p).unwrap();
            if f > 1e-300 {
                prop_assert!((lp.exp() - f).abs() <= 1e-12 * f);
            }
        }

        #[test]
        fn survival_plus_cdf(p in params(), x in 1e-3f64..1e3) {
            prop_assert!((survival(x, &p).unwrap() + cdf(x, &p).unwrap() - 1.0).abs() <= 1e-13);
        }
    }
}
