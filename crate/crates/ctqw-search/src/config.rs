//! Run configuration: a single JSON document drives every subcommand.
//!
//! Unknown keys are rejected everywhere so typos fail loudly instead of
//! silently falling back to defaults.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::experiments::{InstanceOptions, DEFAULT_HORIZON};
use crate::graph::{GraphSpec, Normalization};
use crate::predictor::{CostInputs, PredictorConfig};
use crate::spectra::{DPolicy, InitialStatePolicy, GROUP_TOL};
use crate::Result;

/// Quasi-degenerate dimension selection, as written in JSON: either an
/// explicit integer or `"auto"` / an object with detection thresholds.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum DSelect {
    Explicit(usize),
    Auto(AutoD),
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AutoD {
    #[serde(default = "default_theta_near")]
    pub theta_near: f64,
    #[serde(default = "default_theta_far")]
    pub theta_far: f64,
    #[serde(default = "default_d_max")]
    pub d_max: usize,
}

fn default_theta_near() -> f64 {
    0.1
}
fn default_theta_far() -> f64 {
    0.1
}
fn default_d_max() -> usize {
    32
}

impl Default for DSelect {
    fn default() -> Self {
        DSelect::Auto(AutoD {
            theta_near: default_theta_near(),
            theta_far: default_theta_far(),
            d_max: default_d_max(),
        })
    }
}

impl DSelect {
    pub fn to_policy(&self) -> DPolicy {
        match self {
            DSelect::Explicit(d) => DPolicy::Explicit(*d),
            DSelect::Auto(a) => DPolicy::Auto {
                theta_near: a.theta_near,
                theta_far: a.theta_far,
                d_max: a.d_max,
            },
        }
    }
}

/// Initial-state choice; the seed for the random variant comes from the
/// command line so reruns are reproducible from the invocation alone.
#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    #[default]
    TopEigenvector,
    UniformInExcluded,
}

impl InitialState {
    pub fn to_policy(self, seed: u64) -> InitialStatePolicy {
        match self {
            InitialState::TopEigenvector => InitialStatePolicy::TopEigenvector,
            InitialState::UniformInExcluded => InitialStatePolicy::UniformInD { seed },
        }
    }
}

/// Grid of couplings for the `sweep-r` subcommand, as multiples of the
/// critical value s1.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RGridConfig {
    pub min_factor: f64,
    pub max_factor: f64,
    pub points: usize,
    /// peak-search horizon in beat half-periods
    #[serde(default = "default_horizon")]
    pub horizon_multiple: f64,
}

/// Size scan for the `rook-table` subcommand: rook graphs n1 x n2 with
/// n1 ~ n^sigma at total sizes n = 2^k.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RookTableConfig {
    pub sigmas: Vec<f64>,
    pub log2_sizes: Vec<u32>,
    /// additionally scan n1 = 2 with the coupling tuned to the
    /// column-subspace critical value
    #[serde(default)]
    pub include_column_subspace: bool,
}

fn default_horizon() -> f64 {
    DEFAULT_HORIZON
}
fn default_group_tol() -> f64 {
    GROUP_TOL
}
fn default_curve_points() -> usize {
    1024
}

/// The full run configuration. `analyze` uses the top-level fields;
/// `sweep-r` additionally needs `r_grid`; `rook-table` needs `rook_table`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSpec,
    /// override the family's default Hamiltonian normalization
    #[serde(default)]
    pub normalization: Option<Normalization>,
    /// marked node index (default 0)
    #[serde(default)]
    pub marked: Option<usize>,
    #[serde(default)]
    pub d: DSelect,
    #[serde(default)]
    pub initial_state: InitialState,
    /// measure at this coupling instead of the predicted critical one
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub predictor: PredictorConfig,
    #[serde(default)]
    pub costs: CostInputs,
    #[serde(default = "default_horizon")]
    pub horizon_multiple: f64,
    #[serde(default = "default_group_tol")]
    pub group_tol: f64,
    /// samples written to the amplitude-curve CSV (0 disables it)
    #[serde(default = "default_curve_points")]
    pub curve_points: usize,
    /// also write the graph's edge list (dense families only)
    #[serde(default)]
    pub export_edges: bool,
    #[serde(default)]
    pub r_grid: Option<RGridConfig>,
    #[serde(default)]
    pub rook_table: Option<RookTableConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        let n = self.graph.node_count();
        if let Some(m) = self.marked {
            if m >= n {
                return Err(Error::Config(format!(
                    "marked node {m} out of range for {n} nodes"
                )));
            }
        }
        if let Some(r) = self.r {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Config(format!(
                    "r must be finite and positive, got {r}"
                )));
            }
        }
        if let DSelect::Explicit(d) = self.d {
            if d == 0 || d >= n {
                return Err(Error::Config(format!(
                    "excluded dimension {d} must be in 1..{n}"
                )));
            }
        }
        if !(self.horizon_multiple.is_finite() && self.horizon_multiple > 0.0) {
            return Err(Error::Config("horizon_multiple must be positive".into()));
        }
        if !(self.group_tol.is_finite() && self.group_tol > 0.0) {
            return Err(Error::Config("group_tol must be positive".into()));
        }
        if let Some(g) = &self.r_grid {
            if g.points == 0 {
                return Err(Error::Config("r_grid.points must be nonzero".into()));
            }
            if !(g.min_factor > 0.0 && g.max_factor >= g.min_factor) {
                return Err(Error::Config(
                    "r_grid factors must satisfy 0 < min_factor <= max_factor".into(),
                ));
            }
        }
        if let Some(t) = &self.rook_table {
            if t.sigmas.is_empty() && !t.include_column_subspace {
                return Err(Error::Config("rook_table.sigmas is empty".into()));
            }
            for &s in &t.sigmas {
                if !(s > 0.0 && s <= 0.5) {
                    return Err(Error::Config(format!(
                        "rook_table sigma {s} must be in (0, 0.5]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn instance_options(&self, seed: u64) -> InstanceOptions {
        InstanceOptions {
            d_policy: self.d.to_policy(),
            initial_state: self.initial_state.to_policy(seed),
            r_override: self.r,
            normalization: self.normalization,
            group_tol: self.group_tol,
            horizon_multiple: self.horizon_multiple,
        }
    }
}
