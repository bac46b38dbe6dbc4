//! Time runs with sampled deviation norms and mass ledgers.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::CylinderMesh;
use crate::model::SpeciesSystem;
use crate::operators::{InflowProfile, VelocityField};
use crate::state::StateField;
use crate::time::{mass_ledger, reaction_dt_bound, ImexStepper, LedgerRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    pub t_end: f64,
    pub dt: f64,
    /// Record a sample every this many steps (the initial state is always sampled).
    pub sample_every: usize,
}

impl SimulationSettings {
    pub fn validate(&self) -> Result<usize> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::config("simulate.t_end", format!("must be positive, got {}", self.t_end)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= self.t_end) {
            return Err(Error::config("simulate.dt", format!("must lie in (0, t_end], got {}", self.dt)));
        }
        if self.sample_every == 0 {
            return Err(Error::config("simulate.sample_every", "must be >= 1"));
        }
        Ok((self.t_end / self.dt).round() as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub bulk_mass: Vec<f64>,
    pub surface_mass: Vec<f64>,
    /// Weighted 2-norm distance to the reference state.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub ledger: Vec<LedgerRecord>,
    pub final_state: StateField,
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn deviations(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.deviation).collect()
    }

    pub fn max_ledger_residual(&self) -> f64 {
        self.ledger.iter().map(LedgerRecord::max_residual).fold(0.0, f64::max)
    }

    /// `t, bulk_mass_i..., surface_mass_i..., deviation`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", crate::CSV_HEADER)?;
        let n = self.samples.first().map_or(0, |s| s.bulk_mass.len());
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("bulk_mass_{i}")));
        header.extend((0..n).map(|i| format!("surface_mass_{i}")));
        header.push("deviation".into());
        writeln!(w, "{}", header.join(","))?;
        for s in &self.samples {
            let mut row = vec![format!("{:e}", s.time)];
            row.extend(s.bulk_mass.iter().chain(&s.surface_mass).map(|v| format!("{v:e}")));
            row.push(format!("{:e}", s.deviation));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// `t, delta_i..., expected_i..., residual_i...` per step.
    pub fn write_ledger_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", crate::CSV_HEADER)?;
        let n = self.ledger.first().map_or(0, |r| r.delta.len());
        let mut header = vec!["t".to_string()];
        for name in ["delta", "expected", "residual"] {
            header.extend((0..n).map(|i| format!("{name}_{i}")));
        }
        writeln!(w, "{}", header.join(","))?;
        for r in &self.ledger {
            let mut row = vec![format!("{:e}", r.time)];
            row.extend(r.delta.iter().chain(&r.expected).chain(&r.residual).map(|v| format!("{v:e}")));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn sample(mesh: &CylinderMesh, s: &StateField, reference: &StateField) -> Sample {
    let n = s.n_species();
    Sample {
        time: s.time,
        bulk_mass: (0..n).map(|i| s.bulk_mass(mesh, i)).collect(),
        surface_mass: (0..n).map(|i| s.surface_mass(mesh, i)).collect(),
        deviation: s.deviation_norm(mesh, reference),
    }
}

/// Integrate from `state0` to `t_end`, sampling the distance to `reference`.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    sys: &SpeciesSystem,
    mesh: &CylinderMesh,
    velocity: &VelocityField,
    g_in: &InflowProfile,
    state0: &StateField,
    reference: &StateField,
    settings: &SimulationSettings,
) -> Result<Trajectory> {
    let steps = settings.validate()?;
    state0.check_shape(mesh, sys.n_species())?;
    reference.check_shape(mesh, sys.n_species())?;
    let bound = reaction_dt_bound(sys, state0)?;
    if settings.dt > bound {
        return Err(Error::Precondition(format!(
            "dt = {} exceeds the explicit reaction bound {bound:e} at the initial state",
            settings.dt
        )));
    }
    let stepper = ImexStepper::new(mesh, sys, velocity, g_in, settings.dt)?;
    let mut state = state0.clone();
    let mut samples = vec![sample(mesh, &state, reference)];
    let mut ledger = Vec::with_capacity(steps);
    for n in 1..=steps {
        let (next, fluxes) = stepper.step(&state).map_err(|e| Error::Step {
            time: state.time,
            source: Box::new(e),
        })?;
        ledger.push(mass_ledger(mesh, &state, &next, settings.dt, &fluxes));
        state = next;
        if n % settings.sample_every == 0 || n == steps {
            samples.push(sample(mesh, &state, reference));
        }
    }
    Ok(Trajectory {
        samples,
        ledger,
        final_state: state,
        steps,
    })
}
