//! Maximum-likelihood inference: likelihood and its derivatives, fitting,
//! goodness of fit and total-time-on-test curves.

mod fit;
mod gof;
mod likelihood;
mod linalg;
mod optim;
mod ttt;

pub use fit::{fit, FitConfig, FitResult, Reparam, ILL_CONDITIONED};
pub use gof::{
    aic, aic_from, gof_report, kolmogorov_sf, ks_test, lr_from_loglik, lr_test, GofReport,
};
pub use likelihood::{log_likelihood, observed_information, score, Dataset};
pub use ttt::{
    ttt_empirical, ttt_fitted, ConstantHazard, Lifetime, TttCurve, TttKind, TRUNCATION_LEVEL,
};
