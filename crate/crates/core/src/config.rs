//! Experiment configuration: a single TOML file, schema-validated with
//! unknown keys rejected. See docs/config.md for the full schema.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainKind, ProxSetup};
use crate::noise::NoiseModel;
use crate::problems::{self, Matrix, SaddleProblem};
use crate::solver::{Mode, SolverConfig, StepRule};
use crate::Real;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub prox: ProxSpec,
    pub solver: SolverSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub rate: RateSpec,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    /// matching_pennies | matrix_game | bilinear_ball |
    /// strongly_monotone_ball | pareto_bilinear | abs_1d
    pub kind: String,
    /// Block dimensions for the generated instances (square Matrix).
    pub dx: Option<usize>,
    pub dy: Option<usize>,
    /// Seed of the random ±1 payoff matrix (matrix_game, pareto_bilinear).
    pub matrix_seed: Option<u64>,
    /// Multiplicative payoff-noise amplitude.
    pub noise_amp: Option<Real>,
    /// Strong-monotonicity modulus (strongly_monotone_ball).
    pub mu: Option<Real>,
    pub radius_x: Option<Real>,
    pub radius_y: Option<Real>,
    /// Pareto tail index (pareto_bilinear).
    pub alpha: Option<Real>,
    /// Heavy-tail moment order parameter κ ∈ (0, 1].
    pub kappa: Option<Real>,
}

impl ProblemSpec {
    /// Build the instance; `d_override` replaces the total dimension for
    /// dimension sweeps (split evenly across blocks).
    pub fn build(&self, d_override: Option<usize>) -> Result<SaddleProblem> {
        let (mut dx, mut dy) = (self.dx.unwrap_or(2), self.dy.unwrap_or(2));
        if let Some(d) = d_override {
            if d < 2 || d % 2 != 0 {
                return Err(Error::ConfigError(format!(
                    "dimension-sweep entries must be even and ≥ 2, got {d}"
                )));
            }
            dx = d / 2;
            dy = d / 2;
        }
        let rx = self.radius_x.unwrap_or(1.0);
        let ry = self.radius_y.unwrap_or(1.0);
        match self.kind.as_str() {
            "matching_pennies" => Ok(problems::matching_pennies()),
            "abs_1d" => Ok(problems::abs_problem_1d()),
            "matrix_game" => {
                let mut r = crate::rng::derive(self.matrix_seed.unwrap_or(0), "config-matrix", 0);
                let a = Matrix::random_pm1(dx, dy, &mut r);
                Ok(problems::matrix_game_noisy(
                    a,
                    self.noise_amp.unwrap_or(0.0),
                    self.matrix_seed.unwrap_or(0),
                ))
            }
            "bilinear_ball" => {
                if dx != dy {
                    return Err(Error::ConfigError(
                        "bilinear_ball generator requires dx == dy".into(),
                    ));
                }
                Ok(problems::bilinear_ball_game(
                    Matrix::identity(dx),
                    vec![0.0; dx],
                    vec![0.0; dy],
                    rx,
                    ry,
                ))
            }
            "strongly_monotone_ball" => {
                if dx != dy {
                    return Err(Error::ConfigError(
                        "strongly_monotone_ball generator requires dx == dy".into(),
                    ));
                }
                Ok(problems::strongly_monotone_ball_game(
                    Matrix::identity(dx),
                    self.mu.unwrap_or(1.0),
                    rx,
                    ry,
                ))
            }
            "pareto_bilinear" => {
                if dx != dy {
                    return Err(Error::ConfigError(
                        "pareto_bilinear generator requires dx == dy".into(),
                    ));
                }
                Ok(problems::bilinear_ball_game_pareto(
                    Matrix::identity(dx),
                    rx,
                    ry,
                    self.alpha.unwrap_or(1.75),
                    self.noise_amp.unwrap_or(1.0),
                    self.kappa.unwrap_or(0.5),
                ))
            }
            other => Err(Error::ConfigError(format!("unknown problem kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// none | bounded | lipschitz
    #[serde(default = "default_none")]
    pub kind: String,
    pub delta_max: Option<Real>,
    pub wavelength: Option<Real>,
    pub m2_delta: Option<Real>,
    #[serde(default)]
    pub seed: u64,
}

fn default_none() -> String {
    "none".into()
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            kind: "none".into(),
            delta_max: None,
            wavelength: None,
            m2_delta: None,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    /// Build the model for a problem of total dimension `dim`;
    /// `delta_override` supports Δ-grid sweeps.
    pub fn build(&self, dim: usize, tau: Real, delta_override: Option<Real>) -> Result<NoiseModel> {
        match self.kind.as_str() {
            "none" => {
                if let Some(d) = delta_override {
                    if d > 0.0 {
                        return Ok(NoiseModel::bounded(
                            d,
                            self.wavelength.unwrap_or(tau),
                            dim,
                            self.seed,
                        ));
                    }
                }
                Ok(NoiseModel::none())
            }
            "bounded" => {
                let delta = delta_override.or(self.delta_max).ok_or_else(|| {
                    Error::ConfigError("bounded noise requires delta_max".into())
                })?;
                Ok(NoiseModel::bounded(
                    delta,
                    self.wavelength.unwrap_or(tau),
                    dim,
                    self.seed,
                ))
            }
            "lipschitz" => {
                let m = self.m2_delta.ok_or_else(|| {
                    Error::ConfigError("lipschitz noise requires m2_delta".into())
                })?;
                Ok(NoiseModel::lipschitz(m, dim, self.seed))
            }
            other => Err(Error::ConfigError(format!("unknown noise kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProxSpec {
    /// euclidean | entropy (entropy is valid on simplex domains only)
    #[serde(default = "default_euclidean")]
    pub kind: String,
}

fn default_euclidean() -> String {
    "euclidean".into()
}

impl Default for ProxSpec {
    fn default() -> Self {
        ProxSpec {
            kind: "euclidean".into(),
        }
    }
}

impl ProxSpec {
    pub fn setup_for(&self, domain: &crate::geometry::DomainSpec<Real>) -> Result<ProxSetup<Real>> {
        match self.kind.as_str() {
            "euclidean" => ProxSetup::euclidean(domain.clone()),
            "entropy" => match domain.kind {
                DomainKind::Simplex => Ok(ProxSetup::entropy_simplex(domain.dim)),
                _ => Err(Error::ConfigError(
                    "entropy prox requires a simplex domain".into(),
                )),
            },
            other => Err(Error::ConfigError(format!("unknown prox kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub n_iters: usize,
    pub tau: Real,
    /// case1 | case2 | heavy_tail | manual
    #[serde(default = "default_case1")]
    pub step_rule: String,
    pub delta_max: Option<Real>,
    pub m2_delta: Option<Real>,
    pub kappa: Option<Real>,
    pub gamma: Option<Real>,
    /// joint | separated
    #[serde(default = "default_joint")]
    pub mode: String,
    #[serde(default = "default_one")]
    pub step_constant: Real,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub gap_checkpoints: bool,
    /// Record wall-clock times in runs.csv. Off by default so reruns with
    /// identical config and seed produce byte-identical CSV output.
    #[serde(default)]
    pub record_timing: bool,
}

fn default_case1() -> String {
    "case1".into()
}
fn default_joint() -> String {
    "joint".into()
}
fn default_one() -> Real {
    1.0
}
fn default_seed() -> u64 {
    0
}

impl SolverSpec {
    pub fn step_rule(&self) -> Result<StepRule> {
        match self.step_rule.as_str() {
            "case1" => Ok(StepRule::Case1 {
                delta_max: self.delta_max.unwrap_or(0.0),
            }),
            "case2" => Ok(StepRule::Case2 {
                m2_delta: self.m2_delta.unwrap_or(0.0),
            }),
            "heavy_tail" => Ok(StepRule::HeavyTail {
                kappa: self
                    .kappa
                    .ok_or_else(|| Error::ConfigError("heavy_tail step rule requires kappa".into()))?,
            }),
            "manual" => Ok(StepRule::Manual {
                gamma: self
                    .gamma
                    .ok_or_else(|| Error::ConfigError("manual step rule requires gamma".into()))?,
            }),
            other => Err(Error::ConfigError(format!("unknown step rule '{other}'"))),
        }
    }

    /// Solver config for one sweep point.
    pub fn build(&self, n: usize, seed: u64) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(n, self.tau, self.step_rule()?, seed);
        cfg.mode = match self.mode.as_str() {
            "joint" => Mode::Joint,
            "separated" => Mode::Separated,
            other => return Err(Error::ConfigError(format!("unknown mode '{other}'"))),
        };
        cfg.step_constant = self.step_constant;
        cfg.gap_checkpoints = self.gap_checkpoints;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Iteration-budget ladder; empty means a single run at solver.n_iters.
    #[serde(default)]
    pub n_ladder: Vec<usize>,
    /// Bounded-noise Δ grid.
    #[serde(default)]
    pub delta_grid: Vec<Real>,
    /// Total-dimension grid (even entries; split evenly across blocks).
    #[serde(default)]
    pub d_grid: Vec<usize>,
    /// Seed list; empty means the single solver.seed.
    #[serde(default)]
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_out_dir")]
    pub dir: String,
}

fn default_out_dir() -> String {
    "out".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: default_out_dir(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RateSpec {
    /// iterations (gap vs N on sweep.n_ladder) |
    /// restart_eps (total budget vs ε on eps_ladder)
    #[serde(default = "default_rate_kind")]
    pub kind: String,
    #[serde(default)]
    pub eps_ladder: Vec<Real>,
}

fn default_rate_kind() -> String {
    "iterations".into()
}

impl Default for RateSpec {
    fn default() -> Self {
        RateSpec {
            kind: default_rate_kind(),
            eps_ladder: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| Error::ConfigError(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.solver.n_iters == 0 {
            return Err(Error::ConfigError("solver.n_iters must be ≥ 1".into()));
        }
        if !(self.solver.tau > 0.0) {
            return Err(Error::ConfigError("solver.tau must be > 0".into()));
        }
        // fail early on malformed enum-like fields
        self.solver.step_rule()?;
        self.solver.build(self.solver.n_iters, self.solver.seed)?;
        self.problem.build(None)?;
        self.noise.build(2, self.solver.tau, None)?;
        Ok(())
    }

    /// Stable content hash (FNV-1a over the canonical JSON form), recorded
    /// in reports for provenance.
    pub fn hash(&self) -> u64 {
        let canon = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf29ce484222325;
        for b in canon.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}
