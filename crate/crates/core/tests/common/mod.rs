//! Shared A <-> B pore configurations for the integration tests.
#![allow(dead_code)]

use porestab::mesh::{build_mesh, CylinderMesh, CylinderSpec};
use porestab::model::{Equilibrium, SpeciesSystem};
use porestab::operators::{build_velocity, matched_inflow, InflowProfile, VelocityField, VelocityProfile};
use porestab::state::StateField;

/// Forward and backward rate of the reference isomerization.
pub const KAPPA: f64 = 0.3;

pub struct Pore {
    pub sys: SpeciesSystem,
    pub mesh: CylinderMesh,
    pub eq: Equilibrium,
    pub velocity: VelocityField,
    pub g_in: InflowProfile,
}

impl Pore {
    /// A <-> B in the unit pore (R = h = 1) with `k_de = 1` and unit diffusivities,
    /// linearized at the sorption-matched equilibrium with unit surface values.
    pub fn ab(n: usize, k_ad: f64, w_max: f64) -> Self {
        Self::ab_mesh(n, n, n, k_ad, w_max)
    }

    pub fn ab_mesh(n_r: usize, n_theta: usize, n_z: usize, k_ad: f64, w_max: f64) -> Self {
        let sys = SpeciesSystem::isomerization(KAPPA, KAPPA, k_ad, 1.0, 1.0, 1.0).unwrap();
        let mesh = build_mesh(CylinderSpec::new(1.0, 1.0).unwrap(), n_r, n_theta, n_z).unwrap();
        let eq = Equilibrium::sorption_matched(&sys, vec![1.0, 1.0]).unwrap();
        let velocity = build_velocity(&mesh, w_max, VelocityProfile::Poiseuille).unwrap();
        let g_in = matched_inflow(&mesh, &sys, &eq, &velocity).unwrap();
        Self {
            sys,
            mesh,
            eq,
            velocity,
            g_in,
        }
    }

    pub fn equilibrium_state(&self) -> StateField {
        StateField::constant(&self.mesh, &self.eq)
    }
}
