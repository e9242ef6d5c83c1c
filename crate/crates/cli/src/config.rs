//! JSON run configuration: `{"geometry": …, "operator": …, "numerics": …}`.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use wres_core::geometry::MetricField;
use wres_core::laplacian::{build_lichnerowicz, GeneralizedLaplacian};
use wres_core::residue::SphereRule;
use wres_core::trig::TrigMatrix;

use crate::error::VerifyError;

pub const DEFAULT_SEED: u64 = 7;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub geometry: Option<MetricField>,
    #[serde(default)]
    pub operator: Option<OperatorConfig>,
    #[serde(default)]
    pub numerics: Numerics,
}

/// Every key is optional; cases fill in their own defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    pub jet_order: Option<usize>,
    pub symbol_cutoff: Option<i32>,
    pub x_grid: Option<usize>,
    pub sphere_rule: Option<SphereRule>,
    pub fit_window: Option<[f64; 2]>,
    pub fit_points: Option<usize>,
    pub seed: Option<u64>,
    /// `m` in `Δ^{−m}` for `wres residue`.
    pub power: Option<u32>,
    /// Collocation grid of the curved-torus eigensolver.
    pub spectral_grid: Option<usize>,
}

impl Numerics {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomConnection {
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_max_freq")]
    pub max_freq: i32,
    #[serde(default = "default_terms")]
    pub terms: usize,
}

fn default_amplitude() -> f64 {
    0.2
}
fn default_max_freq() -> i32 {
    1
}
fn default_terms() -> usize {
    2
}
fn default_rank() -> usize {
    1
}

impl Default for RandomConnection {
    fn default() -> Self {
        RandomConnection {
            amplitude: default_amplitude(),
            max_freq: default_max_freq(),
            terms: default_terms(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorConfig {
    LaplaceBeltrami {
        #[serde(default = "default_rank")]
        rank: usize,
    },
    /// `∇*∇ + r/4` with an explicit or seeded random skew connection.
    Lichnerowicz {
        rank: usize,
        #[serde(default)]
        connection: Option<Vec<TrigMatrix>>,
        #[serde(default)]
        random_connection: Option<RandomConnection>,
    },
    Coefficients {
        rank: usize,
        first_order: Vec<TrigMatrix>,
        zeroth_order: TrigMatrix,
    },
    Connection {
        rank: usize,
        connection: Vec<TrigMatrix>,
        potential: TrigMatrix,
        #[serde(default)]
        curvature_coupling: f64,
    },
}

impl OperatorConfig {
    pub fn rank(&self) -> usize {
        match self {
            OperatorConfig::LaplaceBeltrami { rank }
            | OperatorConfig::Lichnerowicz { rank, .. }
            | OperatorConfig::Coefficients { rank, .. }
            | OperatorConfig::Connection { rank, .. } => *rank,
        }
    }

    pub fn build(&self, metric: &MetricField, seed: u64) -> Result<GeneralizedLaplacian, VerifyError> {
        let op = match self {
            OperatorConfig::LaplaceBeltrami { rank } => GeneralizedLaplacian::laplace_beltrami(metric.clone(), *rank),
            OperatorConfig::Lichnerowicz {
                rank,
                connection,
                random_connection,
            } => {
                let w = match (connection, random_connection) {
                    (Some(_), Some(_)) => {
                        return Err(VerifyError::Config(
                            "operator: give either connection or random_connection, not both".into(),
                        ))
                    }
                    (Some(w), None) => w.clone(),
                    (None, r) => random_skew_connection(metric.dim(), *rank, &r.clone().unwrap_or_default(), seed),
                };
                build_lichnerowicz(metric.clone(), *rank, w)?
            }
            OperatorConfig::Coefficients {
                rank,
                first_order,
                zeroth_order,
            } => GeneralizedLaplacian::from_coefficients(metric.clone(), *rank, first_order.clone(), zeroth_order.clone())?,
            OperatorConfig::Connection {
                rank,
                connection,
                potential,
                curvature_coupling,
            } => GeneralizedLaplacian::from_connection(
                metric.clone(),
                *rank,
                connection.clone(),
                potential.clone(),
                *curvature_coupling,
            )?,
        };
        Ok(op)
    }
}

/// Seeded skew-symmetric connection one-form.
pub fn random_skew_connection(dim: usize, rank: usize, spec: &RandomConnection, seed: u64) -> Vec<TrigMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| TrigMatrix::random_skew(dim, rank, spec.max_freq, spec.terms, spec.amplitude, &mut rng))
        .collect()
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, VerifyError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| VerifyError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, VerifyError> {
        let text = std::fs::read_to_string(path).map_err(|e| VerifyError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }
}
