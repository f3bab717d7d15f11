use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::Args;
use levy_core::quasipotential::DomainDelta;
use levy_core::{LevyError, LevyTriplet, ModelConfig};
use serde::{Deserialize, Serialize};

fn parse_model(s: &str) -> Result<ModelConfig, String> {
    let text = if s.trim_start().starts_with('{') { s.to_string() } else { fs::read_to_string(s).map_err(|e| format!("{s}: {e}"))? };
    ModelConfig::from_json(&text).map_err(|e| e.to_string())
}

/// Options shared by every subcommand; each command reads the ones it needs
/// and applies its own defaults.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Model as JSON text or a path to a JSON file.
    #[arg(long, value_parser = parse_model)]
    pub model: Option<ModelConfig>,
    /// Intervals "a,b;c,d".
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xmax: Option<f64>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub ymin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ymax: Option<f64>,
    /// Largest Laplace / resolvent parameter.
    #[arg(long)]
    pub smax: Option<f64>,
    /// Number of `s` values in `[0, smax]`.
    #[arg(long)]
    pub ns: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// laplace | penalized
    #[arg(long)]
    pub method: Option<String>,
    /// Penalty strength.
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c2: Option<f64>,
    /// Gaver–Stehfest half order.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Verification suite.
    #[arg(long)]
    pub suite: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LevyError> {
        serde_json::from_str(text).map_err(|e| LevyError::Parse(format!("run config: {e}")))
    }

    pub fn triplet(&self) -> Result<LevyTriplet, LevyError> {
        self.model.as_ref().ok_or_else(|| LevyError::Parse("--model is required".into()))?.to_triplet()
    }

    pub fn domain(&self) -> Result<DomainDelta, LevyError> {
        self.domain.as_deref().ok_or_else(|| LevyError::Parse("--domain is required".into()))?.parse()
    }

    /// `tmax·k/nt`, `k = 1..=nt`.
    pub fn time_grid(&self, tmax: f64, nt: usize) -> Result<Vec<f64>, LevyError> {
        let tmax = self.tmax.unwrap_or(tmax);
        let nt = self.nt.unwrap_or(nt);
        if !(tmax > 0.0) || nt == 0 {
            return Err(LevyError::Domain(format!("need tmax > 0 and nt ≥ 1, got {tmax} and {nt}")));
        }
        Ok((1..=nt).map(|k| tmax * k as f64 / nt as f64).collect())
    }
}

/// `%.12g`.
pub fn fmt12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-5..12).contains(&exp) {
        format!("{}e{}{:02}", trim(mant), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{v:.decimals$}"))
    }
}

pub enum Cell<'a> {
    Num(f64),
    Text(&'a str),
}

/// Header row and records, comma separated, LF line endings.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<Cell<'static>>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let fields: Vec<String> = row
            .into_iter()
            .map(|c| match c {
                Cell::Num(v) => fmt12(v),
                Cell::Text(t) => t.to_string(),
            })
            .collect();
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

pub fn write_output(out: Option<&PathBuf>, text: &str) -> io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}
