//! JSON documents accepted by the subcommands. Every field has a default
//! unless noted, and unknown fields are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::chain::ChainState;
use crate::continuum::ContinuumCurve;
use crate::convergence::InitialData;
use crate::curvature::TangentVector;
use crate::error::{Result, WhipError};
use crate::profile::{Analytic, ProfileSpec};

use super::output::Format;

/// Keys shared by every config: `seed`, `output_dir`, `format`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Common {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Splits the common keys off a config document and parses the rest.
pub fn parse<T: for<'de> Deserialize<'de>>(mut doc: serde_json::Value) -> Result<(Common, T)> {
    let mut common = serde_json::Map::new();
    if let Some(obj) = doc.as_object_mut() {
        for key in ["seed", "output_dir", "format"] {
            if let Some(v) = obj.remove(key) {
                common.insert(key.into(), v);
            }
        }
    } else {
        return Err(WhipError::Invalid("config must be a JSON object".into()));
    }
    let common = serde_json::from_value(serde_json::Value::Object(common))?;
    Ok((common, serde_json::from_value(doc)?))
}

/// Picks the chain from `--state`, then `state`, then `initial` sampled
/// with `n` links.
pub fn resolve_chain(
    flag: Option<ChainState>,
    state: &Option<ChainState>,
    initial: &Option<InitialData>,
    n: Option<usize>,
) -> Result<ChainState> {
    if let Some(s) = flag.or_else(|| state.clone()) {
        return Ok(s);
    }
    match (initial, n) {
        (Some(data), Some(n)) if n > 0 => data.chain(n),
        (Some(_), _) => Err(WhipError::Invalid("`initial` needs a positive `n`".into())),
        _ => Err(WhipError::Invalid("no chain given: use --state, `state` or `initial` + `n`".into())),
    }
}

macro_rules! chain_source {
    ($t:ty) => {
        impl $t {
            pub fn chain(&self, flag: Option<ChainState>) -> Result<ChainState> {
                resolve_chain(flag, &self.state, &self.initial, self.n)
            }
        }
    };
}

fn default_t_end() -> f64 {
    1.0
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub state: Option<ChainState>,
    pub initial: Option<InitialData>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "one")]
    pub sample_every: usize,
}

chain_source!(SimulateConfig);

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensionConfig {
    pub state: Option<ChainState>,
    pub initial: Option<InitialData>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureConfig {
    pub state: Option<ChainState>,
    pub initial: Option<InitialData>,
    pub n: Option<usize>,
    /// Explicit sections as `[eta, xi]` pairs.
    #[serde(default)]
    pub sections: Vec<(TangentVector, TangentVector)>,
    /// Number of random sections with components uniform in `[-1, 1]`.
    #[serde(default)]
    pub random: usize,
}

chain_source!(TensionConfig);
chain_source!(CurvatureConfig);

fn default_m() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenConfig {
    /// `κ(s)`; ignored when `curve` is present.
    pub kappa: Option<Analytic>,
    /// Curve whose `θ_s` supplies `κ`.
    pub curve: Option<ContinuumCurve>,
    #[serde(default = "default_m")]
    pub m: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub curve: Option<ContinuumCurve>,
    pub initial: Option<InitialData>,
    pub m: Option<usize>,
    pub dt: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "one")]
    pub sample_every: usize,
}

impl EvolveConfig {
    pub fn resolve(&self) -> Result<ContinuumCurve> {
        if let Some(c) = &self.curve {
            return Ok(c.clone());
        }
        match (&self.initial, self.m) {
            (Some(d), Some(m)) => {
                ContinuumCurve::from_fn(m, |s| d.theta.value(s), |s| d.theta_t.value(s), d.g)
            }
            _ => Err(WhipError::Invalid("evolve needs `curve` or `initial` + `m`".into())),
        }
    }
}

fn default_profile() -> ProfileSpec {
    ProfileSpec::straight(0.0)
}

fn default_riccati_m() -> usize {
    1000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiccatiConfig {
    #[serde(default = "default_profile")]
    pub profile: ProfileSpec,
    #[serde(default = "default_riccati_m")]
    pub m: usize,
    /// When set, also compares the pivots of the `n`-link chain.
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinkGreenConfig {
    #[serde(default = "default_profile")]
    pub profile: ProfileSpec,
    #[serde(default = "default_riccati_m")]
    pub m: usize,
    pub points: Vec<(f64, f64)>,
    /// Chain sizes for the discrete limit `(1/n) M^{ij}`.
    #[serde(default)]
    pub n_list: Vec<usize>,
}

fn default_ref_m() -> usize {
    4000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Study {
    /// Truncation residuals of the scaled chain equations.
    Truncation { theta: Analytic, sigma: Analytic, n_list: Vec<usize> },
    /// Chain dynamics against the finest level.
    Refinement {
        initial: InitialData,
        n_list: Vec<usize>,
        #[serde(default = "default_t_end")]
        t_end: f64,
        dt: Option<f64>,
    },
    /// `max_k |λ_k/n² - σ(k/n)|`.
    Tension { initial: InitialData, sigma: Analytic, n_list: Vec<usize> },
    /// `(1/n) M^{ij}` against a fine continuum Green column.
    GreenLimit {
        profile: ProfileSpec,
        x: f64,
        y: f64,
        n_list: Vec<usize>,
        #[serde(default = "default_ref_m")]
        m_ref: usize,
    },
}

impl Study {
    pub fn default_threshold(&self) -> f64 {
        match self {
            Study::Truncation { .. } => 1.9,
            _ => 0.9,
        }
    }
}

/// Parses a study document; `threshold` sits next to `kind`.
pub fn parse_study(doc: serde_json::Value) -> Result<(Common, Option<f64>, Study)> {
    let (common, mut rest): (Common, serde_json::Value) = parse(doc)?;
    let threshold = match rest.as_object_mut().and_then(|o| o.remove("threshold")) {
        Some(v) => Some(serde_json::from_value(v)?),
        None => None,
    };
    Ok((common, threshold, serde_json::from_value(rest)?))
}

fn default_probe_angles() -> Vec<f64> {
    let h = std::f64::consts::FRAC_PI_2;
    vec![-h, 0.0, h]
}

fn default_probe_n() -> usize {
    8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default = "default_probe_angles")]
    pub theta1: Vec<f64>,
    #[serde(default = "default_probe_n")]
    pub n: usize,
    /// Optional chain whose unit-velocity tensions are probed.
    pub state: Option<ChainState>,
    /// Number of random `n`-link configurations to probe.
    #[serde(default)]
    pub random: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { theta1: default_probe_angles(), n: default_probe_n(), state: None, random: 0 }
    }
}
