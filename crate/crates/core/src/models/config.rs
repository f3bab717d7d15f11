//! JSON model descriptions, e.g.
//! `{"model":"stable","alpha":1.5,"c1":1.0,"c2":1.0,"a":0.0,"gamma":0.0}`.

use serde::{Deserialize, Serialize};

use super::{CompoundPoisson, LevyMeasure, LevyTriplet};
use crate::error::{LevyError, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Jump shape for compound Poisson: `laplace` (`c e^{-b|y|}`) or
    /// `gaussian` (`c e^{-y²/2σ²}`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

fn default_model() -> String {
    "pure_diffusion".to_string()
}

fn need(v: Option<f64>, field: &str, model: &str) -> Result<f64> {
    v.ok_or_else(|| LevyError::Parse(format!("model '{model}' requires field '{field}'")))
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LevyError::Parse(format!("model json: {e}")))
    }

    pub fn to_triplet(&self) -> Result<LevyTriplet> {
        let name = self.model.as_str();
        let n = |v, f| need(v, f, name);
        let measure = match name {
            "pure_diffusion" | "brownian" => LevyMeasure::PureDiffusion,
            "stable" => LevyMeasure::Stable { alpha: n(self.alpha, "alpha")?, c1: n(self.c1, "c1")?, c2: n(self.c2, "c2")? },
            "damped_stable" => LevyMeasure::DampedStable {
                alpha: n(self.alpha, "alpha")?,
                c1: n(self.c1, "c1")?,
                c2: n(self.c2, "c2")?,
                lambda1: n(self.lambda1, "lambda1")?,
                lambda2: n(self.lambda2, "lambda2")?,
            },
            "variance_gamma" => LevyMeasure::VarianceGamma { c1: n(self.c1, "c1")?, c2: n(self.c2, "c2")?, g: n(self.g, "g")?, m: n(self.m, "m")? },
            "nig" => LevyMeasure::Nig { c: n(self.c, "c")?, beta: n(self.beta, "beta")? },
            "meixner" => LevyMeasure::Meixner { c: n(self.c, "c")?, beta: n(self.beta, "beta")? },
            "compound_poisson" => {
                let c = n(self.c, "c")?;
                match self.density.as_deref().unwrap_or("laplace") {
                    "laplace" => LevyMeasure::CompoundPoisson(CompoundPoisson::laplace(c, n(self.b, "b")?)),
                    "gaussian" => LevyMeasure::CompoundPoisson(CompoundPoisson::gaussian(c, n(self.sigma, "sigma")?)),
                    other => return Err(LevyError::Parse(format!("unknown jump density '{other}'"))),
                }
            }
            other => return Err(LevyError::Parse(format!("unknown model '{other}'"))),
        };
        LevyTriplet::new(self.a, self.gamma, measure)
    }

    /// Inverse of [`to_triplet`](Self::to_triplet) for catalog measures.
    pub fn from_triplet(t: &LevyTriplet) -> Result<Self> {
        let mut cfg = ModelConfig { model: t.measure.name().to_string(), a: t.a, gamma: t.gamma, ..Default::default() };
        match &t.measure {
            LevyMeasure::PureDiffusion => {}
            LevyMeasure::Stable { alpha, c1, c2 } => {
                cfg.alpha = Some(*alpha);
                cfg.c1 = Some(*c1);
                cfg.c2 = Some(*c2);
            }
            LevyMeasure::DampedStable { alpha, c1, c2, lambda1, lambda2 } => {
                cfg.alpha = Some(*alpha);
                cfg.c1 = Some(*c1);
                cfg.c2 = Some(*c2);
                cfg.lambda1 = Some(*lambda1);
                cfg.lambda2 = Some(*lambda2);
            }
            LevyMeasure::VarianceGamma { c1, c2, g, m } => {
                cfg.c1 = Some(*c1);
                cfg.c2 = Some(*c2);
                cfg.g = Some(*g);
                cfg.m = Some(*m);
            }
            LevyMeasure::Nig { c, beta } | LevyMeasure::Meixner { c, beta } => {
                cfg.c = Some(*c);
                cfg.beta = Some(*beta);
            }
            LevyMeasure::CompoundPoisson(cp) => match cp.density {
                super::JumpDensity::Laplace { c, b } => {
                    cfg.density = Some("laplace".into());
                    cfg.c = Some(c);
                    cfg.b = Some(b);
                }
                super::JumpDensity::Gaussian { c, sigma } => {
                    cfg.density = Some("gaussian".into());
                    cfg.c = Some(c);
                    cfg.sigma = Some(sigma);
                }
                super::JumpDensity::Function { .. } => {
                    return Err(LevyError::Unsupported("function-valued jump densities have no JSON form".into()))
                }
            },
            LevyMeasure::Custom(_) => return Err(LevyError::Unsupported("custom measures have no JSON form".into())),
        }
        Ok(cfg)
    }
}

impl std::str::FromStr for ModelConfig {
    type Err = LevyError;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_json(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_stable() {
        let cfg = ModelConfig::from_json(r#"{"model":"stable","alpha":1.5,"c1":1.0,"c2":1.0,"a":0.0,"gamma":0.0}"#).unwrap();
        let t = cfg.to_triplet().unwrap();
        assert!(matches!(t.measure, LevyMeasure::Stable { alpha, .. } if alpha == 1.5));
    }

    #[test]
    fn missing_field_and_unknown_model() {
        let cfg = ModelConfig::from_json(r#"{"model":"stable","alpha":1.5}"#).unwrap();
        assert!(matches!(cfg.to_triplet(), Err(LevyError::Parse(_))));
        let cfg = ModelConfig::from_json(r#"{"model":"levy-flight"}"#).unwrap();
        assert!(cfg.to_triplet().is_err());
        assert!(ModelConfig::from_json(r#"{"model":"nig","c":1,"beta":0,"bogus":3}"#).is_err());
    }

    #[test]
    fn round_trip() {
        for text in [
            r#"{"model":"variance_gamma","c1":1,"c2":2,"g":1,"m":3,"a":0.5}"#,
            r#"{"model":"compound_poisson","density":"gaussian","c":1,"sigma":0.5}"#,
            r#"{"model":"meixner","c":1,"beta":0.2,"gamma":1}"#,
        ] {
            let t = ModelConfig::from_json(text).unwrap().to_triplet().unwrap();
            let cfg = ModelConfig::from_triplet(&t).unwrap();
            let back = cfg.to_triplet().unwrap();
            assert_eq!(ModelConfig::from_triplet(&back).unwrap(), cfg);
        }
    }
}
