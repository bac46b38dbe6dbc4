//! Prescribed total flux `g_in` through the inflow disk `z = 0`.
//!
//! The inflow condition reads `(u.nu) c - d dc/dnu = g_in` with outward normal
//! `nu = -e_z`, so `-g_in` is the mass entering per unit area and `g_in <= 0`
//! deposits mass.

use crate::error::{check_len, Error, Result};
use crate::mesh::CylinderMesh;
use crate::model::{Equilibrium, SpeciesSystem};
use crate::operators::VelocityField;
use crate::state::Layout;

/// `g[i][face]` for species `i` on the bottom faces `face = i_r + n_r j`.
#[derive(Debug, Clone, PartialEq)]
pub struct InflowProfile {
    g: Vec<Vec<f64>>,
}

impl InflowProfile {
    pub fn zero(mesh: &CylinderMesh, n_species: usize) -> Self {
        Self {
            g: vec![vec![0.0; mesh.n_r() * mesh.n_theta()]; n_species],
        }
    }

    /// Spatially constant flux per species.
    pub fn uniform(mesh: &CylinderMesh, g: &[f64]) -> Self {
        Self {
            g: g.iter().map(|&v| vec![v; mesh.n_r() * mesh.n_theta()]).collect(),
        }
    }

    pub fn from_fields(mesh: &CylinderMesh, g: Vec<Vec<f64>>) -> Result<Self> {
        for field in &g {
            check_len("inflow faces", mesh.n_r() * mesh.n_theta(), field.len())?;
        }
        Ok(Self { g })
    }

    pub fn n_species(&self) -> usize {
        self.g.len()
    }

    pub fn species(&self, i: usize) -> &[f64] {
        &self.g[i]
    }

    /// `g` on the bottom face below column `(i_r, j)`.
    pub fn at(&self, species: usize, i_r: usize, j: usize, mesh: &CylinderMesh) -> f64 {
        self.g[species][i_r + mesh.n_r() * j]
    }

    /// `-int_{inflow disk} g_i`, the mass entering per unit time.
    pub fn influx(&self, mesh: &CylinderMesh, species: usize) -> f64 {
        (0..mesh.n_theta())
            .flat_map(|j| (0..mesh.n_r()).map(move |i| (i, j)))
            .map(|(i, j)| -self.at(species, i, j, mesh) * mesh.axial_face_area(i))
            .sum()
    }

    pub fn is_nonpositive(&self) -> bool {
        self.g.iter().flatten().all(|&v| v <= 0.0)
    }
}

/// Inflow that makes the constant pair `(psi, xi)` stationary: `g_i = (k_de_i xi_i / k_ad_i)(u.nu)`.
pub fn matched_inflow(
    mesh: &CylinderMesh,
    sys: &SpeciesSystem,
    eq: &Equilibrium,
    velocity: &VelocityField,
) -> Result<InflowProfile> {
    check_len("equilibrium", sys.n_species(), eq.n_species())?;
    check_len("velocity columns", mesh.n_r(), velocity.n_r())?;
    if let Some(k) = eq.xi.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Domain(format!(
            "matched inflow needs positive surface equilibrium, species {k} has {}",
            eq.xi[k]
        )));
    }
    let g = (0..sys.n_species())
        .map(|s| {
            let scale = sys.k_de()[s] * eq.xi[s] / sys.k_ad()[s];
            (0..mesh.n_theta())
                .flat_map(|_| (0..mesh.n_r()).map(|i| -velocity.w(i) * scale))
                .collect()
        })
        .collect();
    Ok(InflowProfile { g })
}

/// Source vector `f` with `dc/dt + A0 c = f`: `-g A_z / V = -g / dz` in the bottom cells.
pub fn inflow_source(mesh: &CylinderMesh, g: &InflowProfile) -> Result<Vec<f64>> {
    let layout = Layout::new(mesh, g.n_species());
    let mut f = vec![0.0; layout.len()];
    for s in 0..g.n_species() {
        for j in 0..mesh.n_theta() {
            for i in 0..mesh.n_r() {
                f[layout.bulk(s, mesh.bulk_index(i, j, 0))] = -g.at(s, i, j, mesh) / mesh.dz();
            }
        }
    }
    Ok(f)
}
