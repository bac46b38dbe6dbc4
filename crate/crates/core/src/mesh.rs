//! Cell-centred grids on the cylinder `disk(R) x (0, h)` and its lateral wall.
//!
//! Bulk cells are annular sectors `[i dr, (i+1) dr] x [j dtheta, (j+1) dtheta] x [k dz, (k+1) dz]`
//! with centres at half-integer positions, so no unknown sits on the axis and the
//! innermost radial face has zero area. The wall `r = R` carries one surface cell
//! per outermost bulk column, indexed by `(j, k)`; it is periodic in `theta` and
//! bounded by the rims `z = 0` and `z = h`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{AngularOrbits, CsrMatrix};

/// Radius and height of the pore.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderSpec {
    pub radius: f64,
    pub height: f64,
}

impl CylinderSpec {
    pub fn new(radius: f64, height: f64) -> Result<Self> {
        let spec = Self { radius, height };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::config("geometry.radius", format!("must be positive, got {}", self.radius)));
        }
        if !(self.height.is_finite() && self.height > 0.0) {
            return Err(Error::config("geometry.height", format!("must be positive, got {}", self.height)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderMesh {
    spec: CylinderSpec,
    n_r: usize,
    n_theta: usize,
    n_z: usize,
    dr: f64,
    dtheta: f64,
    dz: f64,
}

/// Dimensions and quadrature checks of a mesh, for run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSummary {
    pub radius: f64,
    pub height: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub n_z: usize,
    pub bulk_cells: usize,
    pub surface_cells: usize,
    pub total_volume: f64,
    pub volume_rel_error: f64,
    pub total_area: f64,
    pub area_rel_error: f64,
}

/// Build a uniform mesh; every count must be at least 2 and `n_theta` at least 4.
pub fn build_mesh(spec: CylinderSpec, n_r: usize, n_theta: usize, n_z: usize) -> Result<CylinderMesh> {
    spec.validate()?;
    if n_r < 2 {
        return Err(Error::config("geometry.n_r", format!("must be >= 2, got {n_r}")));
    }
    if n_theta < 4 {
        return Err(Error::config("geometry.n_theta", format!("must be >= 4, got {n_theta}")));
    }
    if n_z < 2 {
        return Err(Error::config("geometry.n_z", format!("must be >= 2, got {n_z}")));
    }
    Ok(CylinderMesh {
        spec,
        n_r,
        n_theta,
        n_z,
        dr: spec.radius / n_r as f64,
        dtheta: 2.0 * PI / n_theta as f64,
        dz: spec.height / n_z as f64,
    })
}

impl CylinderMesh {
    pub fn spec(&self) -> CylinderSpec {
        self.spec
    }

    pub fn radius(&self) -> f64 {
        self.spec.radius
    }

    pub fn height(&self) -> f64 {
        self.spec.height
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn dtheta(&self) -> f64 {
        self.dtheta
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn n_bulk(&self) -> usize {
        self.n_r * self.n_theta * self.n_z
    }

    pub fn n_surface(&self) -> usize {
        self.n_theta * self.n_z
    }

    #[inline]
    pub fn bulk_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n_r * (j + self.n_theta * k)
    }

    /// Inverse of [`bulk_index`](Self::bulk_index).
    pub fn bulk_coords(&self, idx: usize) -> (usize, usize, usize) {
        let i = idx % self.n_r;
        let rest = idx / self.n_r;
        (i, rest % self.n_theta, rest / self.n_theta)
    }

    #[inline]
    pub fn surface_index(&self, j: usize, k: usize) -> usize {
        j + self.n_theta * k
    }

    pub fn surface_coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.n_theta, idx / self.n_theta)
    }

    pub fn r_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr
    }

    pub fn theta_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dtheta
    }

    pub fn z_center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.dz
    }

    /// Exact volume of the annular sector, `r_i dr dtheta dz`.
    pub fn cell_volume(&self, i: usize) -> f64 {
        self.r_center(i) * self.dr * self.dtheta * self.dz
    }

    /// Area of the radial face at `r = face dr` (face 0 is the axis, face `n_r` the wall).
    pub fn radial_face_area(&self, face: usize) -> f64 {
        face as f64 * self.dr * self.dtheta * self.dz
    }

    /// Area of a face normal to `theta` in radial column `i`.
    pub fn angular_face_area(&self) -> f64 {
        self.dr * self.dz
    }

    /// Area of a face normal to `z` in radial column `i`.
    pub fn axial_face_area(&self, i: usize) -> f64 {
        self.r_center(i) * self.dr * self.dtheta
    }

    /// Area of one surface cell, `R dtheta dz`.
    pub fn surface_cell_area(&self) -> f64 {
        self.spec.radius * self.dtheta * self.dz
    }

    /// Bulk wall cell under surface cell `s`.
    pub fn wall_cell(&self, s: usize) -> usize {
        let (j, k) = self.surface_coords(s);
        self.bulk_index(self.n_r - 1, j, k)
    }

    /// Surface cell over bulk cell `b`, if `b` touches the wall.
    pub fn surface_over(&self, b: usize) -> Option<usize> {
        let (i, j, k) = self.bulk_coords(b);
        (i + 1 == self.n_r).then(|| self.surface_index(j, k))
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.n_r).map(|i| self.cell_volume(i)).sum::<f64>() * (self.n_theta * self.n_z) as f64
    }

    pub fn total_surface_area(&self) -> f64 {
        self.surface_cell_area() * self.n_surface() as f64
    }

    pub fn summary(&self) -> MeshSummary {
        let (r, h) = (self.spec.radius, self.spec.height);
        let vol = self.total_volume();
        let area = self.total_surface_area();
        let exact_vol = PI * r * r * h;
        let exact_area = 2.0 * PI * r * h;
        MeshSummary {
            radius: r,
            height: h,
            n_r: self.n_r,
            n_theta: self.n_theta,
            n_z: self.n_z,
            bulk_cells: self.n_bulk(),
            surface_cells: self.n_surface(),
            total_volume: vol,
            volume_rel_error: (vol - exact_vol).abs() / exact_vol,
            total_area: area,
            area_rel_error: (area - exact_area).abs() / exact_area,
        }
    }

    /// Rotation orbits of the surface unknowns (one orbit per axial index).
    pub fn surface_orbits(&self) -> AngularOrbits {
        AngularOrbits::from_fn(self.n_z, self.n_theta, self.theta_center(0), |k, j| self.surface_index(j, k))
    }
}

/// Discrete Laplace-Beltrami operator on the wall (area-normalized, negative semidefinite).
///
/// The wall is flat, so in the unrolled coordinates `(R theta, z)` this is the
/// 5-point Laplacian, periodic in `theta` and with zero flux through the rims.
pub fn surface_laplacian(mesh: &CylinderMesh) -> CsrMatrix {
    let ds = mesh.radius() * mesh.dtheta();
    let (nt, nz) = (mesh.n_theta(), mesh.n_z());
    let ct = 1.0 / (ds * ds);
    let cz = 1.0 / (mesh.dz() * mesh.dz());
    let mut t = Vec::with_capacity(5 * mesh.n_surface());
    for k in 0..nz {
        for j in 0..nt {
            let p = mesh.surface_index(j, k);
            for jn in [(j + 1) % nt, (j + nt - 1) % nt] {
                t.push((p, mesh.surface_index(jn, k), ct));
                t.push((p, p, -ct));
            }
            if k + 1 < nz {
                t.push((p, mesh.surface_index(j, k + 1), cz));
                t.push((p, p, -cz));
            }
            if k > 0 {
                t.push((p, mesh.surface_index(j, k - 1), cz));
                t.push((p, p, -cz));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.n_surface(), mesh.n_surface(), &t).expect("indices in range")
}

/// Poincare constant of the wall and the eigenvalue it comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareConstant {
    /// Smallest nonzero eigenvalue of the discrete `-Laplace-Beltrami` with zero rim flux.
    pub mu_1: f64,
    /// `1 / sqrt(mu_1)`.
    pub c_p: f64,
}

impl PoincareConstant {
    /// Subspace the constant refers to.
    pub const SUBSPACE: &'static str = "mean-zero functions on the wall (first nonzero Neumann eigenvalue)";
}

/// `min(1/R^2, pi^2/h^2)`, the first nonzero Neumann eigenvalue on the unrolled wall.
pub fn poincare_oracle(spec: CylinderSpec) -> f64 {
    (1.0 / (spec.radius * spec.radius)).min(PI * PI / (spec.height * spec.height))
}

/// Poincare constant of the discrete wall Laplacian.
///
/// The operator commutes with rotations, so it is block diagonal in the angular
/// Fourier modes; each block is a small symmetric tridiagonal-plus-shift matrix
/// solved densely.
pub fn poincare_constant_surface(mesh: &CylinderMesh) -> Result<PoincareConstant> {
    let lap = surface_laplacian(mesh).shifted(0.0, -1.0)?;
    let orbits = mesh.surface_orbits();
    if !orbits.is_invariant(&lap) {
        return Err(Error::Numerical("surface Laplacian is not rotation invariant".into()));
    }
    let mut all = Vec::with_capacity(mesh.n_surface());
    for (mode, _) in orbits.modes() {
        let block = orbits.block(&lap, mode);
        let ev = block
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::Numerical(format!("symmetric eigensolve failed in mode {mode}: {e:?}")))?;
        all.extend(ev);
    }
    all.sort_by(f64::total_cmp);
    let scale = all.last().copied().unwrap_or(1.0).abs().max(1.0);
    let kernel = all[0];
    if kernel.abs() > 1e-10 * scale {
        return Err(Error::Numerical(format!(
            "expected a one-dimensional kernel, smallest eigenvalue is {kernel:e}"
        )));
    }
    let mu_1 = all
        .get(1)
        .copied()
        .ok_or_else(|| Error::Numerical("surface grid too small".into()))?;
    if !(mu_1 > 1e-10 * scale) {
        return Err(Error::Numerical(format!("second eigenvalue {mu_1:e} is not separated from zero")));
    }
    Ok(PoincareConstant {
        mu_1,
        c_p: 1.0 / mu_1.sqrt(),
    })
}
