//! JSON model descriptors.
//!
//! Every CLI entry point takes a model as a JSON object selected by a
//! `family` tag:
//!
//! ```json
//! {"family": "geometric", "mu": 2.0}
//! {"family": "markov", "head": [0.1, 0.45], "lambda": 0.5}
//! {"family": "polynomial", "gamma": 2.0, "scale": 1.0}
//! {"family": "stretched", "beta": 0.5, "kappa": 1.0}
//! {"family": "table", "density": [0.5, 0.25, 0.25], "eps_tail": 0.0}
//! {"family": "inverse", "xi": 0.5, "m": 0.25,
//!  "phi": {"kind": "power_log", "gamma": 2.0}, "horizon": 20000}
//! ```

use serde::{Deserialize, Serialize};

use crate::dist::WaitingTimeDistribution;
use crate::error::{Error, Result};
use crate::inverse::{
    covariance_from_spec, invert_autocovariance, CovarianceSpec, InversionResult, PhiKind,
    DEFAULT_CLIP_TOL, DEFAULT_INVERSION_HORIZON,
};
use crate::sampler::Sampler;

/// Concave exponent descriptor for inverse-problem models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiDescriptor {
    PowerLog { gamma: f64 },
    Stretched { beta: f64, kappa: f64 },
}

impl From<PhiDescriptor> for PhiKind {
    fn from(d: PhiDescriptor) -> Self {
        match d {
            PhiDescriptor::PowerLog { gamma } => PhiKind::PowerLog { gamma },
            PhiDescriptor::Stretched { beta, kappa } => PhiKind::StretchedExp { beta, kappa },
        }
    }
}

fn default_horizon() -> usize {
    DEFAULT_INVERSION_HORIZON
}

fn default_clip_tol() -> f64 {
    DEFAULT_CLIP_TOL
}

/// Serializable model description; the single input of every experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModelDescriptor {
    Geometric {
        mu: f64,
    },
    Markov {
        head: Vec<f64>,
        lambda: f64,
    },
    Polynomial {
        gamma: f64,
        scale: f64,
    },
    Stretched {
        beta: f64,
        kappa: f64,
    },
    Table {
        density: Vec<f64>,
        #[serde(default)]
        eps_tail: f64,
    },
    Inverse {
        xi: f64,
        m: f64,
        phi: PhiDescriptor,
        #[serde(default = "default_horizon")]
        horizon: usize,
        #[serde(default = "default_clip_tol")]
        clip_tol: f64,
    },
}

impl ModelDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serialization cannot fail")
    }

    /// Stable descriptor hash (FNV-1a of the canonical JSON); stamped into
    /// generated sequences as the model id.
    pub fn id(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        for b in self.to_json().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }

    /// Build the waiting-time distribution this descriptor denotes.
    pub fn build(&self) -> Result<WaitingTimeDistribution> {
        match self {
            ModelDescriptor::Geometric { mu } => WaitingTimeDistribution::geometric(*mu),
            ModelDescriptor::Markov { head, lambda } => {
                WaitingTimeDistribution::markov_family(head, *lambda)
            }
            ModelDescriptor::Polynomial { gamma, scale } => {
                WaitingTimeDistribution::polynomial_tail(*gamma, *scale)
            }
            ModelDescriptor::Stretched { beta, kappa } => {
                WaitingTimeDistribution::stretched_exp_tail(*beta, *kappa)
            }
            ModelDescriptor::Table { density, eps_tail } => {
                WaitingTimeDistribution::from_density(density, *eps_tail)
            }
            ModelDescriptor::Inverse { .. } => Ok(self.invert()?.distribution),
        }
    }

    /// Run the full inversion for an `inverse` descriptor, keeping the
    /// diagnostic fields.
    pub fn invert(&self) -> Result<InversionResult> {
        match self {
            ModelDescriptor::Inverse {
                xi,
                m,
                phi,
                horizon,
                clip_tol,
            } => {
                let spec = CovarianceSpec::new(*xi, *m, (*phi).into())?;
                let cov = covariance_from_spec(&spec, *horizon)?;
                invert_autocovariance(&cov, *clip_tol)
            }
            _ => Err(Error::Model(
                "only inverse-family descriptors can be inverted".into(),
            )),
        }
    }

    /// Sampler for this model, stamped with the descriptor id.
    pub fn sampler(&self) -> Result<Sampler> {
        Ok(Sampler::new(&self.build()?).with_model_id(self.id()))
    }
}
