//! Command-line front end for `rgbiw`: data loading, fitting, goodness of
//! fit, sampling and plot-ready property tables, reported as versioned JSON
//! or CSV.

pub mod args;
pub mod data;
pub mod report;

use rgbiw::dist::{cdf, hazard, pdf, quantile, sample};
use rgbiw::inference::{
    aic_from, fit, gof_report, ks_test, log_likelihood, ttt_empirical, ttt_fitted, Dataset,
    FitConfig, FitResult, TttCurve, TttKind,
};
use rgbiw::series::{kurtosis, raw_moment, reliability, renyi_entropy, shannon_entropy, skewness};
use rgbiw::series::{SeriesValue, StressStrengthPair};
use rgbiw::{Error, Params, Seed, SubModel};
use thiserror::Error;

pub use args::{Command, Format, RunConfig};
pub use data::{load_dataset, parse_dataset, DataError};
pub use report::{Report, Table, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Data(#[from] DataError),

    #[error(transparent)]
    Numerical(#[from] Error),
}

impl CliError {
    /// 1 for bad input, 2 for a numerical failure on valid input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Data(_) => 1,
            CliError::Numerical(
                Error::Domain(_)
                | Error::InvalidParameter { .. }
                | Error::MomentUndefined { .. }
                | Error::Dataset(_),
            ) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new(config.command.name());
    let seed = config.seed;
    match &config.command {
        Command::Fit {
            data,
            model,
            compare,
            optim,
        } => {
            let d = load_dataset(&data.data, data.scale)?;
            let cfg = optim.config(seed);
            let full = fit_and_warn(&d, (*model).into(), &cfg, &mut report)?;
            let restricted = match compare {
                Some(m) => {
                    let sub = SubModel::from(*m);
                    if sub.n_free() >= full.sub.n_free() || !nested(sub, full.sub) {
                        return Err(CliError::Usage(format!(
                            "{sub} is not nested in {}",
                            full.sub
                        )));
                    }
                    Some(fit_and_warn(&d, sub, &cfg, &mut report)?)
                }
                None => None,
            };
            let gof = gof_report(&d, &full, restricted.as_ref())?;
            report.put("n", d.n() as f64);
            report.put("loglik", full.loglik);
            report.put("aic", gof.aic);
            if let Some(r) = &restricted {
                report.put("compare_loglik", r.loglik);
                report.put("compare_aic", aic_from(r.n_free(), r.loglik));
                let (ks, p) = ks_test(&d, &r.params_hat)?;
                report.put("compare_ks_stat", ks);
                report.put("compare_ks_pvalue", p);
            }
            report.gof = Some(gof);
            report.fit = Some(full);
            report.compare = restricted;
        }
        Command::Gof {
            data,
            model,
            params,
        } => {
            let d = load_dataset(&data.data, data.scale)?;
            let p = params.params()?;
            let sub = SubModel::from(*model);
            check_submodel(&p, sub)?;
            let ll = log_likelihood(&p, &d);
            let (ks, pv) = ks_test(&d, &p)?;
            report.put("n", d.n() as f64);
            report.put("loglik", ll);
            report.put("aic", aic_from(sub.n_free(), ll));
            report.put("ks_stat", ks);
            report.put("ks_pvalue", pv);
        }
        Command::Sample { n, params } => {
            let x = sample(*n, &params.params()?, Seed(seed))?;
            report.tables.push(Table {
                name: "sample".into(),
                columns: vec!["x".into()],
                rows: x.into_iter().map(|v| vec![v]).collect(),
            });
        }
        Command::Quantile { q, params } => {
            let p = params.params()?;
            let rows = q
                .iter()
                .map(|&u| Ok(vec![u, quantile(u, &p)?]))
                .collect::<rgbiw::Result<_>>()?;
            report.tables.push(Table {
                name: "quantile".into(),
                columns: vec!["q".into(), "x".into()],
                rows,
            });
        }
        Command::Moments {
            max_order,
            params,
            series,
        } => {
            let p = params.params()?;
            let ctl = series.control();
            let mut rows = Vec::new();
            for r in 1..=*max_order {
                match raw_moment(r, &p, &ctl) {
                    Ok(v) => {
                        note_series(&mut report, &format!("raw_moment({r})"), &v);
                        rows.push(vec![f64::from(r), v.value]);
                    }
                    Err(e @ Error::MomentUndefined { .. }) => {
                        report.warn(format!("MomentUndefined: {e}"))
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            report.tables.push(Table {
                name: "raw_moments".into(),
                columns: vec!["r".into(), "value".into()],
                rows,
            });
            if p.theta() > 3.0 {
                scalar_series(&mut report, "skewness", skewness(&p, &ctl)?);
            }
            if p.theta() > 4.0 {
                scalar_series(&mut report, "kurtosis", kurtosis(&p, &ctl)?);
            }
        }
        Command::Entropy {
            rho,
            params,
            series,
        } => {
            let p = params.params()?;
            let ctl = series.control();
            let mut rows = Vec::new();
            for &r in rho {
                let v = renyi_entropy(r, &p, &ctl)?;
                note_series(&mut report, &format!("renyi_entropy({r})"), &v);
                rows.push(vec![r, v.value]);
            }
            report.tables.push(Table {
                name: "renyi_entropy".into(),
                columns: vec!["rho".into(), "value".into()],
                rows,
            });
            scalar_series(&mut report, "shannon_entropy", shannon_entropy(&p, &ctl)?);
        }
        Command::Reliability {
            params,
            stress,
            series,
        } => {
            let pair = StressStrengthPair {
                x_params: params.params()?,
                y_params: stress.params()?,
            };
            scalar_series(
                &mut report,
                "reliability",
                reliability(&pair, &series.control())?,
            );
        }
        Command::Ttt {
            data,
            model,
            grid,
            at_params,
            params,
            optim,
        } => {
            let d = load_dataset(&data.data, data.scale)?;
            let p = if *at_params {
                params.params()?
            } else {
                let f = fit_and_warn(&d, (*model).into(), &optim.config(seed), &mut report)?;
                let p = f.params_hat;
                report.fit = Some(f);
                p
            };
            let fitted = ttt_fitted(&p, *grid)?;
            if fitted.kind == TttKind::FittedTruncated {
                report.warn(format!(
                    "TruncatedTtt: theta*a*c = {:.4} <= 1, so the mean is infinite; the fitted curve is normalized on (0, Q(1 - 1e-6)]",
                    p.theta() * p.a() * p.c()
                ));
            }
            report.put(
                "fitted_diagonal_crossings",
                fitted.diagonal_crossings(1e-9).len() as f64,
            );
            report
                .tables
                .push(ttt_table("ttt_empirical", &ttt_empirical(&d)?));
            report.tables.push(ttt_table("ttt_fitted", &fitted));
        }
        Command::Table {
            from,
            to,
            points,
            log_grid,
            params,
        } => {
            let p = params.params()?;
            let grid = x_grid(*from, *to, *points, *log_grid)?;
            let mut rows = Vec::with_capacity(grid.len());
            let mut degenerate = 0;
            for x in grid {
                match hazard(x, &p) {
                    Ok(h) => rows.push(vec![x, pdf(x, &p)?, cdf(x, &p)?, h]),
                    Err(Error::TailDegenerate { .. }) => degenerate += 1,
                    Err(e) => return Err(e.into()),
                }
            }
            if degenerate > 0 {
                report.warn(format!(
                    "TailDegenerate: {degenerate} grid points dropped where the survival function underflows"
                ));
            }
            report.tables.push(Table {
                name: "density".into(),
                columns: ["x", "pdf", "cdf", "hazard"].map(String::from).to_vec(),
                rows,
            });
        }
    }
    Ok(report)
}

/// `sub` pins a superset of what `full` pins.
fn nested(sub: SubModel, full: SubModel) -> bool {
    sub.free_mask()
        .iter()
        .zip(full.free_mask())
        .all(|(&s, f)| !s || f)
}

fn fit_and_warn(
    d: &Dataset,
    sub: SubModel,
    cfg: &FitConfig,
    report: &mut Report,
) -> Result<FitResult, CliError> {
    let f = fit(d, sub, cfg)?;
    if f.pseudo_inverse_used {
        report.warn(format!(
            "SingularInformation: {sub} fit has information condition number {:.3e}; standard errors use the pseudo-inverse",
            f.cond_number
        ));
    }
    if !f.converged {
        report.warn(format!(
            "NoConvergence: {sub} fit stopped with max |score| {:.3e}",
            f.max_free_score()
        ));
    }
    if let Some(b) = f.boundary_loglik.filter(|&b| b > f.loglik) {
        report.warn(format!(
            "BoundarySupremum: {} of {} {sub} starts reached the search box with loglik {b:.6} above the reported local maximum {:.6}",
            f.boundary_runs, f.n_starts, f.loglik
        ));
    }
    Ok(f)
}

fn note_series(report: &mut Report, what: &str, v: &SeriesValue) {
    if v.fallback_used {
        report.warn(format!(
            "FallbackQuadrature: {what} series did not converge; value from quadrature"
        ));
    }
}

fn scalar_series(report: &mut Report, name: &str, v: SeriesValue) {
    note_series(report, name, &v);
    report.put(name, v.value);
}

fn ttt_table(name: &str, t: &TttCurve) -> Table {
    Table {
        name: name.into(),
        columns: vec!["u".into(), "phi".into()],
        rows: t
            .u_grid
            .iter()
            .zip(&t.phi)
            .map(|(&u, &phi)| vec![u, phi])
            .collect(),
    }
}

fn x_grid(from: f64, to: f64, points: usize, log: bool) -> Result<Vec<f64>, CliError> {
    if !(from > 0.0 && to > from && to.is_finite()) || points < 2 {
        return Err(CliError::Usage(
            "grid needs 0 < from < to and at least 2 points".into(),
        ));
    }
    let step = |k: usize| k as f64 / (points - 1) as f64;
    Ok((0..points)
        .map(|k| {
            if log {
                (from.ln() + step(k) * (to / from).ln()).exp()
            } else {
                from + step(k) * (to - from)
            }
        })
        .collect())
}

/// Parameters must satisfy a sub-model's constraints to be evaluated under it.
pub fn check_submodel(p: &Params, sub: SubModel) -> Result<(), CliError> {
    if sub.contains(p) {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "parameters {p} violate the {sub} constraints"
        )))
    }
}
