//! Log-likelihood, analytic score and observed information for a sample.
//!
//! Per observation, with s = γx^{−θ}, L = ln(1−e^{−s}) and u = cL,
//!
//! ℓ_i = ln c − ln B(a,b) + (ac−1) L + (b−1) ln(1−e^u) + ln θ + ln γ − (θ+1) ln x − s.
//!
//! The derivatives are written in terms of e1 = 1/(e^s − 1) = dL/ds and
//! q = 1/(e^{−u} − 1) = −d ln(1−e^u)/du, with the products e1·q and q·L formed
//! in log space so that neither factor's overflow leaks into the result.

use serde::{Deserialize, Serialize};

use crate::dist::{log_pdf_unchecked, Params};
use crate::error::{Error, Result};
use crate::special::{ln_neg_log1mexp, log1mexp, log1mexp_from_ln, psi, psi1};

/// A positive, finite, ascending sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    values: Vec<f64>,
    label: String,
    scale_note: String,
}

impl Dataset {
    /// Validates and sorts `values`.
    pub fn new(
        mut values: Vec<f64>,
        label: impl Into<String>,
        scale_note: impl Into<String>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dataset("no observations".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::Dataset(format!(
                "observation {} is {v}; values must be finite and > 0",
                i + 1
            )));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self {
            values,
            label: label.into(),
            scale_note: scale_note.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn scale_note(&self) -> &str {
        &self.scale_note
    }
}

/// Σ log pdf(x_i). Returns −∞ when any observation sits where the density
/// degenerates.
pub fn log_likelihood(p: &Params, d: &Dataset) -> f64 {
    let mut total = 0.0;
    for &x in d.values() {
        let v = log_pdf_unchecked(x, p);
        if !v.is_finite() {
            return f64::NEG_INFINITY;
        }
        total += v;
    }
    total
}

/// Per-observation quantities shared by the score and the information.
struct Obs {
    /// s = γ x^{−θ}
    s: f64,
    ln_x: f64,
    /// L = ln(1 − G)
    l: f64,
    /// ln(1 − (1 − G)^c)
    m: f64,
    /// dL/ds
    e1: f64,
    /// e1 · q
    eq: f64,
    /// q · L
    ql: f64,
}

impl Obs {
    fn new(x: f64, p: &Params) -> Self {
        let ln_x = x.ln();
        let s = p.gamma() * (-p.theta() * ln_x).exp();
        let l = log1mexp(s);
        // v = −cL, carried as ln v so that it survives underflow of L.
        let ln_neg_l = ln_neg_log1mexp(s);
        let ln_v = p.c().ln() + ln_neg_l;
        let v = ln_v.exp();
        let m = log1mexp_from_ln(ln_v);
        let e1 = 1.0 / s.exp_m1();
        // ln(e^s − 1) = s + L and ln(e^v − 1).
        let ln_em1_v = if v < 1e-8 {
            ln_v + 0.5 * v
        } else {
            v + log1mexp(v)
        };
        let eq = (-(s + l) - ln_em1_v).exp();
        let ql = -(ln_neg_l - ln_em1_v).exp();
        Self {
            s,
            ln_x,
            l,
            m,
            e1,
            eq,
            ql,
        }
    }

    /// ∂s/∂γ and ∂s/∂θ.
    fn ds(&self, p: &Params) -> [f64; 2] {
        [self.s / p.gamma(), -self.s * self.ln_x]
    }

    /// Second partials of s in (γ, θ).
    fn d2s(&self, p: &Params) -> [[f64; 2]; 2] {
        let gt = -self.s * self.ln_x / p.gamma();
        [[0.0, gt], [gt, self.s * self.ln_x * self.ln_x]]
    }
}

/// ∂ℓ/∂(a, b, c, γ, θ).
pub fn score(p: &Params, d: &Dataset) -> [f64; 5] {
    let (a, b, c) = (p.a(), p.b(), p.c());
    let n = d.n() as f64;
    let psi_ab = psi(a + b);
    let mut g = [
        -n * (psi(a) - psi_ab),
        -n * (psi(b) - psi_ab),
        n / c,
        n / p.gamma(),
        n / p.theta(),
    ];
    for &x in d.values() {
        let o = Obs::new(x, p);
        g[0] += c * o.l;
        g[1] += o.m;
        g[2] += a * o.l - (b - 1.0) * o.ql;
        // dℓ/ds through L and through ln(1 − e^{cL}), then the −s of ln g.
        let dds = (a * c - 1.0) * o.e1 - (b - 1.0) * c * o.eq - 1.0;
        let [sg, st] = o.ds(p);
        g[3] += dds * sg;
        g[4] += dds * st - o.ln_x;
    }
    g
}

/// Symmetric 5×5 observed information J = −∂²ℓ, ordered (a, b, c, γ, θ).
pub fn observed_information(p: &Params, d: &Dataset) -> [[f64; 5]; 5] {
    let (a, b, c) = (p.a(), p.b(), p.c());
    let (gamma, theta) = (p.gamma(), p.theta());
    let n = d.n() as f64;
    let t_ab = psi1(a + b);

    let j_aa = n * (psi1(a) - t_ab);
    let j_ab = -n * t_ab;
    let j_bb = n * (psi1(b) - t_ab);
    let mut j_ac = 0.0;
    let mut j_bc = 0.0;
    let mut j_cc = n / (c * c);
    let mut j_at = [0.0; 2];
    let mut j_bt = [0.0; 2];
    let mut j_ct = [0.0; 2];
    let mut j_tt = [[n / (gamma * gamma), 0.0], [0.0, n / (theta * theta)]];

    for &x in d.values() {
        let o = Obs::new(x, p);
        let ds = o.ds(p);
        let d2s = o.d2s(p);
        // dℓ/ds and d²ℓ/ds², with the −s of ln g included in the first.
        let k = (a * c - 1.0) * o.e1 - (b - 1.0) * c * o.eq;
        let dds = k - 1.0;
        let d2ds = -(1.0 + o.e1) * k - (b - 1.0) * c * c * o.eq * (o.e1 + o.eq);

        j_ac -= o.l;
        j_bc += o.ql;
        j_cc += (b - 1.0) * o.ql * (o.l + o.ql);
        for t in 0..2 {
            j_at[t] -= c * o.e1 * ds[t];
            j_bt[t] += c * o.eq * ds[t];
            j_ct[t] -= (a * o.e1 - (b - 1.0) * (o.eq + c * o.ql * (o.e1 + o.eq))) * ds[t];
            for h in 0..2 {
                j_tt[t][h] -= d2ds * ds[t] * ds[h] + dds * d2s[t][h];
            }
        }
    }

    let mut out = [[0.0; 5]; 5];
    let upper = [
        (0, 0, j_aa),
        (0, 1, j_ab),
        (0, 2, j_ac),
        (1, 1, j_bb),
        (1, 2, j_bc),
        (2, 2, j_cc),
        (0, 3, j_at[0]),
        (0, 4, j_at[1]),
        (1, 3, j_bt[0]),
        (1, 4, j_bt[1]),
        (2, 3, j_ct[0]),
        (2, 4, j_ct[1]),
        (3, 3, j_tt[0][0]),
        (3, 4, j_tt[0][1]),
        (4, 4, j_tt[1][1]),
    ];
    for (i, k, v) in upper {
        out[i][k] = v;
        out[k][i] = v;
    }
    out
}
