//! Versioned run reports and their JSON and CSV renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rgbiw::dist::PARAM_NAMES;
use rgbiw::inference::{FitResult, GofReport};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

/// Significant digits kept for every real in an emitted report.
pub const SIGNIFICANT_DIGITS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<FitResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gof: Option<GofReport>,
    #[serde(default)]
    pub values: BTreeMap<String, f64>,
    #[serde(default)]
    pub tables: Vec<Table>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            args: Vec::new(),
            fit: None,
            compare: None,
            gof: None,
            values: BTreeMap::new(),
            tables: Vec::new(),
            warnings: Vec::new(),
            error: None,
        }
    }

    /// Records a scalar; non-finite values become a warning instead.
    pub fn put(&mut self, name: &str, value: f64) {
        if value.is_finite() {
            self.values.insert(name.to_string(), value);
        } else {
            self.warn(format!("NonFinite: {name} evaluated to {value}"));
        }
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    /// Copy with every real rounded to [`SIGNIFICANT_DIGITS`].
    pub fn rounded(&self) -> serde_json::Result<Self> {
        let mut v = serde_json::to_value(self)?;
        round_value(&mut v);
        serde_json::from_value(v)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&self.rounded()?)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Tables as `# table: NAME` blocks. Scalars, fitted estimates and
    /// warnings become tables of their own.
    pub fn to_csv(&self) -> serde_json::Result<String> {
        let r = self.rounded()?;
        let mut out = String::new();
        let _ = writeln!(out, "# schema_version: {}", r.schema_version);
        let _ = writeln!(out, "# command: {}", r.command);
        if let Some(e) = &r.error {
            let _ = writeln!(out, "# error: {e}");
        }
        if !r.values.is_empty() {
            let _ = writeln!(out, "# table: values\nname,value");
            for (k, v) in &r.values {
                let _ = writeln!(out, "{k},{v}");
            }
        }
        for (label, f) in [("fit", &r.fit), ("compare", &r.compare)] {
            if let Some(f) = f {
                let _ = writeln!(
                    out,
                    "# table: {label}_{}\nparameter,estimate,std_error",
                    f.sub
                );
                for (i, (name, est)) in PARAM_NAMES.iter().zip(f.params_hat.to_array()).enumerate()
                {
                    let se = f.std_errors[i].map_or_else(String::new, |s| s.to_string());
                    let _ = writeln!(out, "{name},{est},{se}");
                }
            }
        }
        if let Some(g) = &r.gof {
            let _ = writeln!(out, "# table: gof\nname,value");
            let _ = writeln!(
                out,
                "aic,{}\nks_stat,{}\nks_pvalue,{}",
                g.aic, g.ks_stat, g.ks_pvalue
            );
            if let (Some(s), Some(p)) = (g.lr_stat, g.lr_pvalue) {
                let _ = writeln!(out, "lr_stat,{s}\nlr_df,{}\nlr_pvalue,{p}", g.lr_df);
            }
        }
        for t in &r.tables {
            let _ = writeln!(out, "# table: {}\n{}", t.name, t.columns.join(","));
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(f64::to_string).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        for w in &r.warnings {
            let _ = writeln!(out, "# warning: {w}");
        }
        Ok(out)
    }
}

/// `x` rounded to [`SIGNIFICANT_DIGITS`], ties to even.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .map(round_sig)
                .and_then(serde_json::Number::from_f64)
            {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}
