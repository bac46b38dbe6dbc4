//! Compatibility of initial data with the boundary conditions.
//!
//! For `p > 3` the initial traces must satisfy the four flux conditions at `t = 0`.
//! Normal derivatives are one-sided differences of the two cells next to the
//! boundary and traces are linear extrapolations from the same two cells.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mesh::CylinderMesh;
use crate::model::SpeciesSystem;
use crate::operators::{InflowProfile, VelocityField};
use crate::state::StateField;

/// Max-norm residuals of the four boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    /// `(u.nu) c - d dc/dnu - g_in` on the inflow disk.
    pub inflow: f64,
    /// `-d dc/dnu - (k_ad c - k_de c_surf)` on the wall.
    pub sorption: f64,
    /// `-d dc/dnu` on the outflow disk.
    pub outflow: f64,
    /// `-d_surf dc_surf/dnu` on the rims of the wall.
    pub edge: f64,
    pub p: f64,
    /// The conditions are only required for `p > 3`; below that the report is informational.
    pub advisory: bool,
}

impl CompatibilityReport {
    pub fn max_residual(&self) -> f64 {
        self.inflow.max(self.sorption).max(self.outflow).max(self.edge)
    }

    pub fn is_compatible(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

fn extrapolate(inner: f64, next: f64) -> f64 {
    inner + 0.5 * (inner - next)
}

pub fn check_compatibility(
    mesh: &CylinderMesh,
    sys: &SpeciesSystem,
    state0: &StateField,
    velocity: &VelocityField,
    g_in: &InflowProfile,
    p: f64,
) -> Result<CompatibilityReport> {
    state0.check_shape(mesh, sys.n_species())?;
    let (nr, nt, nz) = (mesh.n_r(), mesh.n_theta(), mesh.n_z());
    let (dr, dz) = (mesh.dr(), mesh.dz());
    let mut rep = CompatibilityReport {
        inflow: 0.0,
        sorption: 0.0,
        outflow: 0.0,
        edge: 0.0,
        p,
        advisory: p <= 3.0,
    };
    for s in 0..sys.n_species() {
        let d = sys.d_bulk()[s];
        let c = |i, j, k| state0.c[s][mesh.bulk_index(i, j, k)];
        for j in 0..nt {
            for i in 0..nr {
                let (c0, c1) = (c(i, j, 0), c(i, j, 1));
                // nu = -e_z, so -d dc/dnu = d dc/dz
                let r = -velocity.w(i) * extrapolate(c0, c1) + d * (c1 - c0) / dz - g_in.at(s, i, j, mesh);
                rep.inflow = rep.inflow.max(r.abs());
                let (ct, cb) = (c(i, j, nz - 1), c(i, j, nz - 2));
                rep.outflow = rep.outflow.max((d * (ct - cb) / dz).abs());
            }
            for k in 0..nz {
                let (cw, ci) = (c(nr - 1, j, k), c(nr - 2, j, k));
                let trace = extrapolate(cw, ci);
                let surf = state0.c_surf[s][mesh.surface_index(j, k)];
                let r = -d * (cw - ci) / dr - (sys.k_ad()[s] * trace - sys.k_de()[s] * surf);
                rep.sorption = rep.sorption.max(r.abs());
            }
            let cs = |k| state0.c_surf[s][mesh.surface_index(j, k)];
            let ds = sys.d_surf()[s];
            rep.edge = rep.edge.max((ds * (cs(1) - cs(0)) / dz).abs());
            rep.edge = rep.edge.max((ds * (cs(nz - 1) - cs(nz - 2)) / dz).abs());
        }
    }
    Ok(rep)
}
