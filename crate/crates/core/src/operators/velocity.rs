//! Stationary axial flow `u = (0, 0, w(r))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::CylinderMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VelocityProfile {
    /// `w(r) = w_max (1 - r^2 / R^2)`
    Poiseuille,
    /// `w(r) = w_max`
    Plug,
}

/// Axial speed at the radial cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    profile: VelocityProfile,
    w_max: f64,
    w: Vec<f64>,
}

pub fn build_velocity(mesh: &CylinderMesh, w_max: f64, profile: VelocityProfile) -> Result<VelocityField> {
    if !(w_max.is_finite() && w_max >= 0.0) {
        return Err(Error::config("velocity.w_max", format!("must be >= 0, got {w_max}")));
    }
    let r2 = mesh.radius() * mesh.radius();
    let w = (0..mesh.n_r())
        .map(|i| match profile {
            VelocityProfile::Poiseuille => w_max * (1.0 - mesh.r_center(i).powi(2) / r2),
            VelocityProfile::Plug => w_max,
        })
        .collect();
    Ok(VelocityField { profile, w_max, w })
}

impl VelocityField {
    pub fn profile(&self) -> VelocityProfile {
        self.profile
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    /// Axial speed in radial column `i`.
    pub fn w(&self, i: usize) -> f64 {
        self.w[i]
    }

    pub fn n_r(&self) -> usize {
        self.w.len()
    }

    /// `w` evaluated at an arbitrary radius.
    pub fn profile_at(&self, r: f64, radius: f64) -> f64 {
        match self.profile {
            VelocityProfile::Poiseuille => self.w_max * (1.0 - (r / radius).powi(2)),
            VelocityProfile::Plug => self.w_max,
        }
    }

    /// Non-trivial inflow: `u.nu < 0` somewhere on the inflow disk.
    pub fn has_inflow(&self) -> bool {
        self.w.iter().any(|&w| w > 0.0)
    }

    /// Largest `|div u|` over cells, from the face fluxes of each cell.
    pub fn divergence_residual(&self, mesh: &CylinderMesh) -> f64 {
        // radial and angular components vanish; both axial faces of a cell see w(r_i)
        let face_w = |i: usize, _face_k: usize| self.w[i];
        (0..mesh.n_bulk())
            .map(|p| {
                let (i, _, k) = mesh.bulk_coords(p);
                let a = mesh.axial_face_area(i);
                ((face_w(i, k + 1) - face_w(i, k)) * a / mesh.cell_volume(i)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Sign conditions: `u.nu <= 0` on the inflow disk, `>= 0` on the outflow disk, `0` on the wall.
    pub fn satisfies_sign_conditions(&self) -> bool {
        self.w.iter().all(|&w| w >= 0.0)
    }
}
