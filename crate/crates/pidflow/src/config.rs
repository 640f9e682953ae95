//! Experiment configuration: JSON schema, validation, and construction of
//! the runtime objects.
//!
//! A run is described by one JSON document; unknown keys are rejected so
//! typos fail loudly. Randomized pieces (objective generation, default
//! initial states) always flow through explicit seeds, so a config fully
//! determines its outputs.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{init_state, DynamicsVariant, Gains, SystemState};
use crate::error::{Error, Result};
use crate::graph::{Graph, LaplacianBundle};
use crate::integrator::IntegratorConfig;
use crate::objectives::{ObjectiveSet, Quadratic};

/// Graph section of the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    /// `{"type": "ring", "n": N}`
    Ring { n: usize },
    /// `{"type": "edges", "n": N, "edges": [[i, j, w], ...]}` with 1-based
    /// vertex indices.
    Edges {
        n: usize,
        edges: Vec<(usize, usize, f64)>,
    },
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphSpec::Ring { n } => Graph::ring(*n),
            GraphSpec::Edges { n, edges } => Graph::from_edges(*n, edges),
        }
    }
}

/// Objective section of the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    /// `{"type": "random_quadratic", "N": ..., "n": ..., "seed": ...}`
    RandomQuadratic {
        #[serde(rename = "N")]
        n_agents: usize,
        n: usize,
        seed: u64,
    },
    /// The four-agent trigonometrically perturbed benchmark over a random
    /// quadratic base: `{"type": "example1_trig", "seed": ...}`.
    Example1Trig { seed: u64 },
    /// Explicit quadratics: `{"type": "quadratic_list", "Q": [...], "q": [...]}`
    /// with one row-major matrix and one vector per agent.
    QuadraticList {
        #[serde(rename = "Q")]
        matrices: Vec<Vec<Vec<f64>>>,
        #[serde(rename = "q")]
        linears: Vec<Vec<f64>>,
    },
}

impl ObjectiveSpec {
    pub fn build(&self) -> Result<ObjectiveSet> {
        match self {
            ObjectiveSpec::RandomQuadratic { n_agents, n, seed } => {
                ObjectiveSet::random_quadratic(*n_agents, *n, *seed)
            }
            ObjectiveSpec::Example1Trig { seed } => {
                let base = ObjectiveSet::random_quadratic(4, 10, *seed)?;
                ObjectiveSet::example1_trig(&base)
            }
            ObjectiveSpec::QuadraticList { matrices, linears } => {
                if matrices.len() != linears.len() || matrices.is_empty() {
                    return Err(Error::InvalidConfig(format!(
                        "objective.Q lists {} matrices but objective.q lists {} vectors",
                        matrices.len(),
                        linears.len()
                    )));
                }
                let quads = matrices
                    .iter()
                    .zip(linears)
                    .map(|(m, l)| {
                        let dim = l.len();
                        if m.len() != dim || m.iter().any(|row| row.len() != dim) {
                            return Err(Error::InvalidConfig(
                                "objective.Q entries must be square and match objective.q".into(),
                            ));
                        }
                        let flat: Vec<f64> = m.iter().flatten().copied().collect();
                        Quadratic::new(
                            DMatrix::from_row_slice(dim, dim, &flat),
                            DVector::from_vec(l.clone()),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                ObjectiveSet::from_quadratics(quads)
            }
        }
    }

    /// Agent count implied by the spec.
    pub fn n_agents(&self) -> usize {
        match self {
            ObjectiveSpec::RandomQuadratic { n_agents, .. } => *n_agents,
            ObjectiveSpec::Example1Trig { .. } => 4,
            ObjectiveSpec::QuadraticList { matrices, .. } => matrices.len(),
        }
    }
}

/// Gains section; `c5` may be omitted for variants that do not use it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSpec {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c5: Option<f64>,
}

impl GainsSpec {
    pub fn to_gains(self, variant: DynamicsVariant) -> Result<Gains> {
        if variant == DynamicsVariant::SecondOrderPid || variant == DynamicsVariant::Corollary {
            if self.c5.is_none() {
                return Err(Error::InvalidConfig(
                    "gains.c5 is required for second-order variants".into(),
                ));
            }
        }
        let gains = Gains::new(
            self.c1,
            self.c2,
            self.c3,
            self.c4,
            // The friction-free baseline pins c5 = 0 regardless of input.
            if variant == DynamicsVariant::Zhu2022 {
                0.0
            } else {
                self.c5.unwrap_or(0.0)
            },
        );
        gains.validate_for(variant)?;
        Ok(gains)
    }
}

/// Initialization section. `x0`, `lambda0`, `v0` are stacked vectors in
/// agent-block order; omitted vectors default to uniform `[−1, 1]` draws
/// from `seed` for `x0` and zero for the rest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<Vec<f64>>,
}

/// Output section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    #[serde(default = "default_true")]
    pub emit_csv: bool,
    #[serde(default = "default_true")]
    pub emit_svg: bool,
}

fn default_true() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            directory: None,
            emit_csv: true,
            emit_svg: true,
        }
    }
}

/// One single-run experiment document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub objective: ObjectiveSpec,
    pub variant: DynamicsVariant,
    pub gains: GainsSpec,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// One block of a comparison document: a variant and gains, optionally
/// restating shared sections (which must then match them).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareRunSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub variant: DynamicsVariant,
    pub gains: GainsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfig>,
}

/// Comparison document: shared graph/objective/integrator/init plus at
/// least two run blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub graph: GraphSpec,
    pub objective: ObjectiveSpec,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default)]
    pub output: OutputSpec,
    pub runs: Vec<CompareRunSpec>,
}

impl CompareConfig {
    /// Splits into per-run [`ExperimentConfig`]s after validating that any
    /// restated sections match the shared ones.
    pub fn expand(&self) -> Result<Vec<(String, ExperimentConfig)>> {
        if self.runs.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "compare needs at least 2 run blocks, got {}",
                self.runs.len()
            )));
        }
        let mut out = Vec::with_capacity(self.runs.len());
        let mut seen = std::collections::HashSet::new();
        for (idx, run) in self.runs.iter().enumerate() {
            if let Some(g) = &run.graph {
                if g != &self.graph {
                    return Err(Error::InvalidConfig(format!(
                        "runs[{idx}].graph differs from the shared graph spec"
                    )));
                }
            }
            if let Some(o) = &run.objective {
                if o != &self.objective {
                    return Err(Error::InvalidConfig(format!(
                        "runs[{idx}].objective differs from the shared objective spec"
                    )));
                }
            }
            if let Some(i) = &run.integrator {
                if i != &self.integrator {
                    return Err(Error::InvalidConfig(format!(
                        "runs[{idx}].integrator differs from the shared integrator spec"
                    )));
                }
            }
            let name = run
                .name
                .clone()
                .unwrap_or_else(|| format!("{}_{idx}", run.variant.as_str()));
            if !seen.insert(name.clone()) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate run name `{name}`"
                )));
            }
            out.push((
                name,
                ExperimentConfig {
                    graph: self.graph.clone(),
                    objective: self.objective.clone(),
                    variant: run.variant,
                    gains: run.gains,
                    integrator: self.integrator,
                    init: self.init.clone(),
                    output: self.output.clone(),
                },
            ));
        }
        Ok(out)
    }
}

/// Fully built runtime experiment.
#[derive(Debug)]
pub struct Experiment {
    pub bundle: Arc<LaplacianBundle>,
    pub set: Arc<ObjectiveSet>,
    pub variant: DynamicsVariant,
    pub gains: Gains,
    pub integrator: IntegratorConfig,
    pub state0: SystemState,
    pub seed: Option<u64>,
    pub config_hash: String,
    pub config_echo: serde_json::Value,
}

/// SHA-256 of the canonical JSON serialization of a config.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Validates a config and builds every runtime object it describes.
pub fn build_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.integrator.validate()?;
    let graph = cfg.graph.build()?;
    let set = cfg.objective.build()?;
    if graph.n_agents() != set.n_agents() {
        return Err(Error::InvalidConfig(format!(
            "graph.n = {} does not match the objective's {} agents",
            graph.n_agents(),
            set.n_agents()
        )));
    }
    let bundle = graph.laplacian_bundle()?;
    let gains = cfg.gains.to_gains(cfg.variant)?;

    let len = set.n_agents() * set.dim();
    let x0 = match &cfg.init.x0 {
        Some(values) => {
            if values.len() != len {
                return Err(Error::InvalidConfig(format!(
                    "init.x0 has length {}, expected {len}",
                    values.len()
                )));
            }
            DVector::from_vec(values.clone())
        }
        None => {
            let seed = cfg.init.seed.ok_or_else(|| {
                Error::InvalidConfig(
                    "init.seed is required when init.x0 is not supplied".into(),
                )
            })?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            DVector::from_iterator(len, (0..len).map(|_| rng.random_range(-1.0..1.0)))
        }
    };
    let lambda0 = cfg.init.lambda0.as_ref().map(|v| DVector::from_vec(v.clone()));
    let v0 = cfg.init.v0.as_ref().map(|v| DVector::from_vec(v.clone()));
    let state0 = init_state(cfg.variant, set.n_agents(), set.dim(), x0, lambda0, v0)?;

    Ok(Experiment {
        bundle: Arc::new(bundle),
        set: Arc::new(set),
        variant: cfg.variant,
        gains,
        integrator: cfg.integrator,
        state0,
        seed: cfg.init.seed,
        config_hash: config_hash(cfg),
        config_echo: serde_json::to_value(cfg)?,
    })
}

/// Reads and parses a single-run config file.
pub fn load_experiment_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

/// Reads and parses a comparison config file.
pub fn load_compare_config(path: &Path) -> Result<CompareConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

/// Built-in configs reproducing the benchmark experiments.
pub mod presets {
    use super::*;

    /// First-order dynamics, 4-ring, 10-dimensional random quadratics.
    pub fn example1() -> ExperimentConfig {
        ExperimentConfig {
            graph: GraphSpec::Ring { n: 4 },
            objective: ObjectiveSpec::RandomQuadratic {
                n_agents: 4,
                n: 10,
                seed: 1,
            },
            variant: DynamicsVariant::FirstOrderPid,
            gains: GainsSpec {
                c1: 0.8,
                c2: 2.9,
                c3: 5.0,
                c4: 5.0,
                c5: None,
            },
            integrator: IntegratorConfig {
                h: 1e-3,
                t_end: 150.0,
                record_stride: 10,
            },
            init: InitSpec {
                seed: Some(1),
                ..Default::default()
            },
            output: OutputSpec::default(),
        }
    }

    /// Same as [`example1`] but with the trigonometrically perturbed
    /// (locally nonconvex) objective set.
    pub fn example1_nonconvex() -> ExperimentConfig {
        ExperimentConfig {
            objective: ObjectiveSpec::Example1Trig { seed: 1 },
            ..example1()
        }
    }

    /// Second-order dynamics against the friction-free baseline on a
    /// 20-ring with 7-dimensional states.
    pub fn example2() -> CompareConfig {
        let gains = GainsSpec {
            c1: 0.14,
            c2: 0.65,
            c3: 0.156,
            c4: 0.52,
            c5: Some(0.52),
        };
        CompareConfig {
            graph: GraphSpec::Ring { n: 20 },
            objective: ObjectiveSpec::RandomQuadratic {
                n_agents: 20,
                n: 7,
                seed: 2,
            },
            integrator: IntegratorConfig {
                h: 5e-3,
                t_end: 800.0,
                record_stride: 10,
            },
            init: InitSpec {
                seed: Some(2),
                ..Default::default()
            },
            output: OutputSpec::default(),
            runs: vec![
                CompareRunSpec {
                    name: Some("second_order_pid".into()),
                    variant: DynamicsVariant::SecondOrderPid,
                    gains,
                    graph: None,
                    objective: None,
                    integrator: None,
                },
                CompareRunSpec {
                    name: Some("zhu2022".into()),
                    variant: DynamicsVariant::Zhu2022,
                    gains: GainsSpec { c5: None, ..gains },
                    graph: None,
                    objective: None,
                    integrator: None,
                },
            ],
        }
    }
}
