//! Run configuration: parsing, validation and the model objects it describes.
//!
//! Units follow the library: lengths in the pore's length unit, times in its time
//! unit, concentrations per volume (bulk) or per area (wall).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use porestab::mesh::{build_mesh, CylinderMesh, CylinderSpec};
use porestab::model::{equilibrium_chemical_balance, Equilibrium, SpeciesParams, SpeciesSystem};
use porestab::operators::{build_velocity, VelocityField, VelocityProfile};
use porestab::spectral::{SpectrumMethod, Which};
use porestab::time::SimulationSettings;
use porestab::Error;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Directory receiving every output file; `--output` overrides it.
    pub output_dir: PathBuf,
    /// Seed of the perturbation and of the iterative eigensolver's start block; `--seed` overrides it.
    #[serde(default)]
    pub seed: u64,
    pub geometry: Geometry,
    pub species: SpeciesParams,
    pub velocity: Velocity,
    /// Linearization point; chemical balance with equal wall values when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<EquilibriumChoice>,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    /// Pore radius R (length).
    pub radius: f64,
    /// Pore height h (length).
    pub height: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub n_z: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Velocity {
    pub profile: VelocityProfile,
    /// Peak axial speed (length/time), at least zero.
    pub w_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumChoice {
    /// Wall concentrations; bulk values follow from vanishing sorption.
    pub surface: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Scenario {
    Analyze {
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default = "default_which")]
        which: Which,
        #[serde(default = "default_method")]
        method: SpectrumMethod,
    },
    Simulate {
        /// Final time.
        t_end: f64,
        /// Step size; must not exceed the explicit-reaction bound.
        dt: f64,
        /// Steps between trajectory samples.
        #[serde(default = "default_sample_every")]
        sample_every: usize,
        /// Perturbation amplitude (concentration units) added to the equilibrium.
        delta: f64,
        /// Eigenvalues computed for the predicted decay rate.
        #[serde(default = "default_simulate_k")]
        k: usize,
    },
    Poincare {
        /// Angular and axial wall resolutions, one run each.
        #[serde(default = "default_resolutions")]
        resolutions: Vec<usize>,
    },
    Sweep {
        axes: Vec<SweepAxis>,
        /// Upper bound on the number of grid points.
        #[serde(default = "default_max_points")]
        max_points: usize,
        #[serde(default = "default_sweep_k")]
        k: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    KappaF,
    KappaB,
    /// Applied to every species.
    KAd,
    /// Applied to every species.
    KDe,
    Radius,
    Height,
    WMax,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::KappaF => "kappa_f",
            Self::KappaB => "kappa_b",
            Self::KAd => "k_ad",
            Self::KDe => "k_de",
            Self::Radius => "radius",
            Self::Height => "height",
            Self::WMax => "w_max",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

fn default_k() -> usize {
    40
}
fn default_which() -> Which {
    Which::SmallestReal
}
fn default_method() -> SpectrumMethod {
    SpectrumMethod::Auto
}
fn default_sample_every() -> usize {
    1
}
fn default_simulate_k() -> usize {
    8
}
fn default_resolutions() -> Vec<usize> {
    vec![32, 64, 128]
}
fn default_max_points() -> usize {
    256
}
fn default_sweep_k() -> usize {
    20
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> CliError {
    CliError::Model(Error::Config {
        field: field.into(),
        reason: reason.into(),
    })
}

/// Mesh, species, flow and equilibrium built from a validated config.
pub struct Setup {
    pub mesh: CylinderMesh,
    pub sys: SpeciesSystem,
    pub velocity: VelocityField,
    pub eq: Equilibrium,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Io(format!("config serialization failed: {e}")))
    }

    /// Checks every field against the preconditions of the code it feeds.
    pub fn validate(&self) -> Result<(), CliError> {
        self.setup()?;
        match &self.scenario {
            Scenario::Analyze { k, .. } => positive_count("scenario.k", *k),
            Scenario::Simulate {
                t_end,
                dt,
                sample_every,
                delta,
                k,
            } => {
                SimulationSettings {
                    t_end: *t_end,
                    dt: *dt,
                    sample_every: *sample_every,
                }
                .validate()
                    .map_err(|e| CliError::Model(rename_field(e)))?;
                if !(delta.is_finite() && *delta >= 0.0) {
                    return Err(invalid("scenario.delta", format!("must be >= 0, got {delta}")));
                }
                positive_count("scenario.k", *k)
            }
            Scenario::Poincare { resolutions } => {
                if resolutions.is_empty() {
                    return Err(invalid("scenario.resolutions", "needs at least one resolution"));
                }
                for (i, &n) in resolutions.iter().enumerate() {
                    if n < 4 {
                        return Err(invalid(format!("scenario.resolutions[{i}]"), format!("must be >= 4, got {n}")));
                    }
                }
                Ok(())
            }
            Scenario::Sweep { axes, max_points, k } => {
                positive_count("scenario.k", *k)?;
                if axes.is_empty() {
                    return Err(invalid("scenario.axes", "needs at least one axis"));
                }
                for (i, axis) in axes.iter().enumerate() {
                    if axis.values.is_empty() {
                        return Err(invalid(
                            format!("scenario.axes[{i}].values"),
                            format!("axis {} has no values", axis.parameter.name()),
                        ));
                    }
                    if let Some(v) = axis.values.iter().find(|v| !v.is_finite()) {
                        return Err(invalid(format!("scenario.axes[{i}].values"), format!("non-finite value {v}")));
                    }
                    if axes[..i].iter().any(|a| a.parameter == axis.parameter) {
                        return Err(invalid(
                            format!("scenario.axes[{i}].parameter"),
                            format!("{} is swept twice", axis.parameter.name()),
                        ));
                    }
                }
                let points = axes.iter().map(|a| a.values.len()).product::<usize>();
                if points > *max_points {
                    return Err(invalid(
                        "scenario.max_points",
                        format!("sweep has {points} points, limit is {max_points}"),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn setup(&self) -> Result<Setup, CliError> {
        let g = &self.geometry;
        let spec = CylinderSpec::new(g.radius, g.height)?;
        let mesh = build_mesh(spec, g.n_r, g.n_theta, g.n_z)?;
        let sys = SpeciesSystem::new(self.species.clone())?;
        let velocity = build_velocity(&mesh, self.velocity.w_max, self.velocity.profile)?;
        let eq = match &self.equilibrium {
            Some(choice) => Equilibrium::sorption_matched(&sys, choice.surface.clone()).map_err(|e| {
                invalid("equilibrium.surface", e.to_string())
            })?,
            None => equilibrium_chemical_balance(&sys)
                .map_err(|e| invalid("equilibrium", format!("{e}; give equilibrium.surface instead")))?
                .equilibrium,
        };
        Ok(Setup {
            mesh,
            sys,
            velocity,
            eq,
        })
    }

    /// Copy with one swept parameter replaced.
    pub fn with_parameter(&self, p: SweepParameter, value: f64) -> Self {
        let mut c = self.clone();
        let n = c.species.alpha.len();
        match p {
            SweepParameter::KappaF => c.species.kappa_f = value,
            SweepParameter::KappaB => c.species.kappa_b = value,
            SweepParameter::KAd => c.species.k_ad = vec![value; n],
            SweepParameter::KDe => c.species.k_de = vec![value; n],
            SweepParameter::Radius => c.geometry.radius = value,
            SweepParameter::Height => c.geometry.height = value,
            SweepParameter::WMax => c.velocity.w_max = value,
        }
        c
    }
}

fn positive_count(field: &str, k: usize) -> Result<(), CliError> {
    if k == 0 {
        return Err(invalid(field, "must be >= 1"));
    }
    Ok(())
}

/// Simulation settings live under `[scenario]` in the config file.
fn rename_field(e: Error) -> Error {
    match e {
        Error::Config { field, reason } if field.starts_with("simulate.") => Error::Config {
            field: field.replacen("simulate.", "scenario.", 1),
            reason,
        },
        other => other,
    }
}
