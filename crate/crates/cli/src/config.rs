//! Experiment configuration: one flat TOML file, every key optional.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        message: message.into(),
    }
}

/// All parameters of a run. Catalog entries are written as calls, for
/// example `map = "perturbed_doubling(0.05)"` or `roof = "trig(1, 0.2, 1)"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: String,
    pub roof: String,
    /// Hölder exponent of the roof.
    pub alpha: f64,
    pub seed: u64,
    /// Grid points per axis for the assumption verifier.
    pub verify_grid: usize,
    /// Grid nodes per axis per element for fields.
    pub field_res: usize,
    pub density_tol: f64,
    pub density_max_iter: usize,
    pub word_budget: u64,

    pub sigma: f64,
    pub b0: f64,
    pub big_b: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub q: Option<f64>,

    pub ly_n: usize,
    pub ly_probes: usize,
    pub ly_res: usize,
    pub ly_a: Vec<f64>,
    pub ly_b: Vec<f64>,

    pub scan_a: f64,
    pub b_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub scan_res: usize,
    pub probe_count: usize,
    pub probe_bandwidth: usize,

    pub phi_depths: Vec<usize>,
    pub phi_grid: usize,
    pub varphi_depths: Vec<usize>,
    pub varphi_slopes: usize,
    pub invariance_samples: usize,
    pub cancellation_b: Vec<f64>,
    pub cancellation_n1: usize,
    pub cancellation_n2: usize,

    pub cohomology_tol: f64,
    pub cohomology_samples: usize,

    pub oscint_cases: usize,
    pub oscint_b_min: f64,
    pub oscint_b_max: f64,

    pub mc_samples: usize,
    pub t_max: f64,
    pub t_step: f64,
    pub observable_f: String,
    pub observable_g: String,

    /// Output directory; not part of the configuration hash.
    pub out: String,
    /// Worker threads; not part of the configuration hash.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            map: "perturbed_doubling(0.05)".into(),
            roof: "trig(1, 0.2, 1)".into(),
            alpha: 1.0,
            seed: 1,
            verify_grid: 4097,
            field_res: 4097,
            density_tol: 1e-10,
            density_max_iter: 10_000,
            word_budget: 1 << 20,
            sigma: 0.01,
            b0: 10.0,
            big_b: None,
            beta1: None,
            beta2: None,
            q: None,
            ly_n: 10,
            ly_probes: 20,
            ly_res: 1025,
            ly_a: vec![0.0, 0.005, 0.005],
            ly_b: vec![0.0, 50.0, -50.0],
            scan_a: 0.0,
            b_list: vec![10.0, 20.0, 40.0, 80.0],
            n_list: (0..=14).collect(),
            scan_res: 1025,
            probe_count: 32,
            probe_bandwidth: 4,
            phi_depths: (4..=10).collect(),
            phi_grid: 8,
            varphi_depths: (1..=10).collect(),
            varphi_slopes: 100,
            invariance_samples: 1000,
            cancellation_b: vec![30.0, 60.0, 120.0],
            cancellation_n1: 4,
            cancellation_n2: 4,
            cohomology_tol: 1e-6,
            cohomology_samples: 50,
            oscint_cases: 100,
            oscint_b_min: 2.0,
            oscint_b_max: 1000.0,
            mc_samples: 1_000_000,
            t_max: 15.0,
            t_step: 0.5,
            observable_f: "fiber_phase(1)".into(),
            observable_g: "fiber_phase(1)".into(),
            out: "out".into(),
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, format!("{v} must be positive")))
            }
        };
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(invalid("alpha", format!("{} is not in (0, 1]", self.alpha)));
        }
        for (key, v) in [
            ("verify_grid", self.verify_grid),
            ("field_res", self.field_res),
            ("ly_res", self.ly_res),
            ("scan_res", self.scan_res),
        ] {
            if v < 2 {
                return Err(invalid(key, "needs at least 2 grid nodes"));
            }
        }
        positive("density_tol", self.density_tol)?;
        positive("sigma", self.sigma)?;
        positive("cohomology_tol", self.cohomology_tol)?;
        positive("t_step", self.t_step)?;
        if !(self.t_max >= 0.0) {
            return Err(invalid("t_max", "must be non-negative"));
        }
        if self.ly_a.len() != self.ly_b.len() {
            return Err(invalid("ly_b", "must have as many entries as `ly_a`"));
        }
        if self.ly_probes == 0 {
            return Err(invalid("ly_probes", "at least one probe is needed"));
        }
        if self.b_list.is_empty() {
            return Err(invalid("b_list", "is empty"));
        }
        if self.n_list.is_empty() {
            return Err(invalid("n_list", "is empty"));
        }
        if self.phi_depths.is_empty() {
            return Err(invalid("phi_depths", "is empty"));
        }
        if !(self.oscint_b_min > 1.0 && self.oscint_b_max >= self.oscint_b_min) {
            return Err(invalid("oscint_b_min", "need 1 < oscint_b_min <= oscint_b_max"));
        }
        if self.cancellation_n1 == 0 || self.cancellation_n2 == 0 {
            return Err(invalid("cancellation_n1", "both cancellation depths must be positive"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, ignoring `out` and `threads`.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = String::new();
        c.threads = None;
        let canonical = serde_json::to_string(&c).expect("configuration serializes");
        hex(&Sha256::digest(canonical.as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// A catalog entry `name(p1, p2, ...)`; the parentheses are optional.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogCall {
    pub name: String,
    pub params: Vec<f64>,
}

impl CatalogCall {
    pub fn parse(key: &'static str, text: &str) -> Result<Self, ConfigError> {
        let text = text.trim();
        let (name, rest) = match text.find('(') {
            Some(i) => (&text[..i], Some(&text[i + 1..])),
            None => (text, None),
        };
        let params = match rest {
            None => Vec::new(),
            Some(r) => {
                let inner = r
                    .strip_suffix(')')
                    .ok_or_else(|| invalid(key, format!("missing `)` in {text:?}")))?;
                if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner
                        .split(',')
                        .map(|p| {
                            p.trim()
                                .parse::<f64>()
                                .map_err(|_| invalid(key, format!("{p:?} is not a number")))
                        })
                        .collect::<Result<_, _>>()?
                }
            }
        };
        Ok(Self {
            name: name.trim().to_string(),
            params,
        })
    }

    pub fn expect_params(&self, key: &'static str, counts: &[usize]) -> Result<(), ConfigError> {
        if counts.contains(&self.params.len()) {
            Ok(())
        } else {
            Err(invalid(
                key,
                format!("`{}` takes {:?} parameters, got {}", self.name, counts, self.params.len()),
            ))
        }
    }
}
