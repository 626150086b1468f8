//! Information criterion, Kolmogorov–Smirnov test and likelihood-ratio test.

use serde::{Deserialize, Serialize};

use super::fit::FitResult;
use super::likelihood::Dataset;
use crate::dist::{cdf, Params};
use crate::error::{domain, Error, Result};
use crate::special::chi_square_sf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub aic: f64,
    pub ks_stat: f64,
    pub ks_pvalue: f64,
    pub lr_stat: Option<f64>,
    pub lr_df: u32,
    pub lr_pvalue: Option<f64>,
}

/// `2k − 2ℓ` for `k` free parameters.
pub fn aic_from(k: usize, loglik: f64) -> f64 {
    2.0 * k as f64 - 2.0 * loglik
}

pub fn aic(fit: &FitResult) -> f64 {
    aic_from(fit.n_free(), fit.loglik)
}

/// One-sample KS statistic `D_n` against the model cdf and its asymptotic
/// p-value `P(K > √n D_n)`.
pub fn ks_test(d: &Dataset, p: &Params) -> Result<(f64, f64)> {
    let n = d.n() as f64;
    let mut stat = 0.0_f64;
    for (i, &x) in d.values().iter().enumerate() {
        let f = cdf(x, p)?;
        stat = stat.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok((stat, kolmogorov_sf(n.sqrt() * stat)))
}

/// Upper tail of the Kolmogorov distribution,
/// `2 Σ_{k≥1} (−1)^{k−1} e^{−2k²t²}`, switching to the Jacobi-theta form
/// `1 − (√(2π)/t) Σ_{k≥1} e^{−(2k−1)²π²/(8t²)}` below t = 1 where the
/// alternating series converges slowly.
pub fn kolmogorov_sf(t: f64) -> f64 {
    if !(t > 0.0) {
        return 1.0;
    }
    let p = if t < 1.0 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let s: f64 = (1..=100)
            .map(|k| {
                let m = (2 * k - 1) as f64;
                (-m * m * pi2 / (8.0 * t * t)).exp()
            })
            .sum();
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / t * s
    } else {
        2.0 * (1..=100)
            .map(|k: u32| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                let k = f64::from(k);
                sign * (-2.0 * k * k * t * t).exp()
            })
            .sum::<f64>()
    };
    p.clamp(0.0, 1.0)
}

/// Likelihood-ratio statistic `2(ℓ_full − ℓ_restricted)` with its χ²_df
/// upper-tail p-value. Small negative values from optimizer noise are
/// clamped to 0; anything below −1e-8 means the full fit is not a maximum.
pub fn lr_test(full: &FitResult, restricted: &FitResult, df: u32) -> Result<(f64, f64)> {
    lr_from_loglik(full.loglik, restricted.loglik, df)
}

pub fn lr_from_loglik(full: f64, restricted: f64, df: u32) -> Result<(f64, f64)> {
    if df == 0 {
        return domain("likelihood-ratio test needs df >= 1");
    }
    let stat = 2.0 * (full - restricted);
    if stat < -1e-8 {
        return Err(Error::NegativeLr { stat });
    }
    let stat = stat.max(0.0);
    Ok((stat, chi_square_sf(stat, df)?))
}

/// AIC and KS for `full`, plus the LR test against `restricted` when given.
pub fn gof_report(
    d: &Dataset,
    full: &FitResult,
    restricted: Option<&FitResult>,
) -> Result<GofReport> {
    let (ks_stat, ks_pvalue) = ks_test(d, &full.params_hat)?;
    let (lr_stat, lr_df, lr_pvalue) = match restricted {
        Some(r) => {
            let df = full.n_free().saturating_sub(r.n_free()) as u32;
            let (s, p) = lr_test(full, r, df)?;
            (Some(s), df, Some(p))
        }
        None => (None, 0, None),
    };
    Ok(GofReport {
        aic: aic(full),
        ks_stat,
        ks_pvalue,
        lr_stat,
        lr_df,
        lr_pvalue,
    })
}
