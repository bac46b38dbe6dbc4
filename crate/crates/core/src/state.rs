//! Concentration fields and the flat unknown layout shared by operators and solvers.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::mesh::CylinderMesh;
use crate::model::Equilibrium;

/// Ordering of the flat unknown vector: all bulk cells of species 1, ..., species N,
/// then all surface cells of species 1, ..., species N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub n_species: usize,
    pub n_bulk: usize,
    pub n_surface: usize,
}

impl Layout {
    pub fn new(mesh: &CylinderMesh, n_species: usize) -> Self {
        Self {
            n_species,
            n_bulk: mesh.n_bulk(),
            n_surface: mesh.n_surface(),
        }
    }

    #[inline]
    pub fn bulk(&self, species: usize, cell: usize) -> usize {
        species * self.n_bulk + cell
    }

    #[inline]
    pub fn surface(&self, species: usize, cell: usize) -> usize {
        self.surface_offset() + species * self.n_surface + cell
    }

    pub fn surface_offset(&self) -> usize {
        self.n_species * self.n_bulk
    }

    pub fn len(&self) -> usize {
        self.n_species * (self.n_bulk + self.n_surface)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Bulk and surface concentrations of every species at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    /// `c[i][cell]`, bulk concentration of species `i`.
    pub c: Vec<Vec<f64>>,
    /// `c_surf[i][cell]`, surface concentration of species `i`.
    pub c_surf: Vec<Vec<f64>>,
    pub time: f64,
}

impl StateField {
    pub fn zeros(mesh: &CylinderMesh, n_species: usize) -> Self {
        Self {
            c: vec![vec![0.0; mesh.n_bulk()]; n_species],
            c_surf: vec![vec![0.0; mesh.n_surface()]; n_species],
            time: 0.0,
        }
    }

    /// Spatially constant state `(psi, xi)`.
    pub fn constant(mesh: &CylinderMesh, eq: &Equilibrium) -> Self {
        Self {
            c: eq.psi.iter().map(|&v| vec![v; mesh.n_bulk()]).collect(),
            c_surf: eq.xi.iter().map(|&v| vec![v; mesh.n_surface()]).collect(),
            time: 0.0,
        }
    }

    pub fn n_species(&self) -> usize {
        self.c.len()
    }

    pub fn layout(&self) -> Layout {
        Layout {
            n_species: self.c.len(),
            n_bulk: self.c.first().map_or(0, Vec::len),
            n_surface: self.c_surf.first().map_or(0, Vec::len),
        }
    }

    /// Check that the field lives on `mesh` with `n_species` species.
    pub fn check_shape(&self, mesh: &CylinderMesh, n_species: usize) -> Result<()> {
        check_len("bulk species", n_species, self.c.len())?;
        check_len("surface species", n_species, self.c_surf.len())?;
        for c in &self.c {
            check_len("bulk cells", mesh.n_bulk(), c.len())?;
        }
        for c in &self.c_surf {
            check_len("surface cells", mesh.n_surface(), c.len())?;
        }
        Ok(())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.c.iter().chain(&self.c_surf).flatten().copied().collect()
    }

    pub fn from_flat(layout: Layout, flat: &[f64], time: f64) -> Result<Self> {
        check_len("state vector", layout.len(), flat.len())?;
        let (bulk, surf) = flat.split_at(layout.surface_offset());
        Ok(Self {
            c: bulk.chunks(layout.n_bulk.max(1)).map(<[f64]>::to_vec).collect(),
            c_surf: surf.chunks(layout.n_surface.max(1)).map(<[f64]>::to_vec).collect(),
            time,
        })
    }

    /// Surface species vector at surface cell `cell`.
    pub fn surface_point(&self, cell: usize) -> Vec<f64> {
        self.c_surf.iter().map(|c| c[cell]).collect()
    }

    /// `sum_cells V c_i`.
    pub fn bulk_mass(&self, mesh: &CylinderMesh, species: usize) -> f64 {
        self.c[species]
            .iter()
            .enumerate()
            .map(|(p, v)| mesh.cell_volume(mesh.bulk_coords(p).0) * v)
            .sum()
    }

    /// `sum_cells a_S c_surf_i`.
    pub fn surface_mass(&self, mesh: &CylinderMesh, species: usize) -> f64 {
        mesh.surface_cell_area() * self.c_surf[species].iter().sum::<f64>()
    }

    /// Most negative entry as `(species, value)`, if any entry is below `floor`.
    pub fn most_negative(&self, floor: f64) -> Option<(usize, f64)> {
        let mut worst: Option<(usize, f64)> = None;
        for (i, field) in self.c.iter().zip(&self.c_surf).enumerate() {
            for &v in field.0.iter().chain(field.1) {
                if v < floor && worst.is_none_or(|(_, w)| v < w) {
                    worst = Some((i, v));
                }
            }
        }
        worst
    }

    /// Volume/area-weighted 2-norm of `self - reference`.
    pub fn deviation_norm(&self, mesh: &CylinderMesh, reference: &StateField) -> f64 {
        let mut sum = 0.0;
        for (a, b) in self.c.iter().zip(&reference.c) {
            for (p, (x, y)) in a.iter().zip(b).enumerate() {
                sum += mesh.cell_volume(mesh.bulk_coords(p).0) * (x - y).powi(2);
            }
        }
        let a_s = mesh.surface_cell_area();
        for (a, b) in self.c_surf.iter().zip(&reference.c_surf) {
            sum += a_s * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        }
        sum.sqrt()
    }
}
