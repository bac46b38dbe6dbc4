//! Per-step mass balance.
//!
//! Integrating the model over the pore and the wall gives, per species,
//! `d/dt (bulk mass + surface mass) = -int g_in - int_out (u.nu) c + int r_ch`;
//! sorption only moves mass between the two. The scheme is conservative, so the
//! discrete balance closes to round-off.

use serde::{Deserialize, Serialize};

use crate::mesh::CylinderMesh;
use crate::state::StateField;
use crate::time::StepFluxes;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRecord {
    /// Time at the end of the step.
    pub time: f64,
    /// Change of bulk plus surface mass per species.
    pub delta: Vec<f64>,
    /// `dt (influx - outflux + reaction)` per species.
    pub expected: Vec<f64>,
    /// `|delta - expected|` relative to the species' mass.
    pub residual: Vec<f64>,
}

impl LedgerRecord {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().copied().fold(0.0, f64::max)
    }
}

fn total_mass(mesh: &CylinderMesh, s: &StateField, species: usize) -> f64 {
    s.bulk_mass(mesh, species) + s.surface_mass(mesh, species)
}

pub fn mass_ledger(
    mesh: &CylinderMesh,
    before: &StateField,
    after: &StateField,
    dt: f64,
    fluxes: &StepFluxes,
) -> LedgerRecord {
    let n = before.n_species();
    let mut rec = LedgerRecord {
        time: after.time,
        delta: Vec::with_capacity(n),
        expected: Vec::with_capacity(n),
        residual: Vec::with_capacity(n),
    };
    for s in 0..n {
        let (m0, m1) = (total_mass(mesh, before, s), total_mass(mesh, after, s));
        let delta = m1 - m0;
        let expected = dt * (fluxes.influx[s] - fluxes.outflux[s] + fluxes.reaction[s]);
        let scale = m0.abs().max(m1.abs()).max(expected.abs()).max(f64::MIN_POSITIVE);
        rec.residual.push((delta - expected).abs() / scale);
        rec.delta.push(delta);
        rec.expected.push(expected);
    }
    rec
}
