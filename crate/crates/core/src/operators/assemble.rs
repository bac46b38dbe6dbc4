//! Finite-volume assembly of the linearized operator `A0 = A - M`.
//!
//! Each bulk row is `(1/V) * sum of outward face fluxes`:
//!
//! * diffusion `-d area/dist (c_nb - c)` on interior faces, none on the axis;
//! * upwind advection `w A_z c` through every upper face, including the outflow disk;
//!   the inflow disk carries the prescribed total flux, which is zero for `A0`;
//! * sorption `A_wall s (k_ad c - k_de c_surf)` through the wall, where
//!   `s = sigma / (sigma + k_ad)` and `sigma = 2 d / dr` come from eliminating the
//!   wall trace of the Robin condition.
//!
//! Surface rows carry `-d_surf Laplace-Beltrami`, the same sorption flux with the
//! opposite sign, and `-M`.

use faer::c64;

use crate::error::{check_len, Error, Result};
use crate::mesh::{surface_laplacian, CylinderMesh};
use crate::model::{SpeciesSystem, SurfaceLinearization};
use crate::operators::VelocityField;
use crate::sparse::{AngularOrbits, CsrMatrix};
use crate::state::Layout;

/// Assembled `A0` together with the data needed to interpret it.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    mesh: CylinderMesh,
    layout: Layout,
    d_bulk: Vec<f64>,
    d_surf: Vec<f64>,
    k_ad: Vec<f64>,
    k_de: Vec<f64>,
    wall_factor: Vec<f64>,
    w: Vec<f64>,
    lin: SurfaceLinearization,
    transport: CsrMatrix,
    matrix: CsrMatrix,
    has_inflow: bool,
}

/// Wall-trace factor `s` of species with bulk diffusivity `d`.
pub fn wall_factor(mesh: &CylinderMesh, d: f64, k_ad: f64) -> f64 {
    let sigma = 2.0 * d / mesh.dr();
    sigma / (sigma + k_ad)
}

pub fn assemble_a0(
    mesh: &CylinderMesh,
    sys: &SpeciesSystem,
    velocity: &VelocityField,
    lin: &SurfaceLinearization,
) -> Result<LinearizedOperator> {
    let n = sys.n_species();
    if lin.n_species() != n {
        return Err(Error::Assembly(format!(
            "linearization has {} species, system has {n}",
            lin.n_species()
        )));
    }
    if !lin.is_uniform() && lin.n_points() != mesh.n_surface() {
        return Err(Error::Assembly(format!(
            "linearization has {} points, surface grid has {}",
            lin.n_points(),
            mesh.n_surface()
        )));
    }
    if velocity.n_r() != mesh.n_r() {
        return Err(Error::Assembly(format!(
            "velocity has {} radial columns, mesh has {}",
            velocity.n_r(),
            mesh.n_r()
        )));
    }
    let layout = Layout::new(mesh, n);
    let wall_factor = (0..n)
        .map(|s| wall_factor(mesh, sys.d_bulk()[s], sys.k_ad()[s]))
        .collect();
    let mut op = LinearizedOperator {
        mesh: mesh.clone(),
        layout,
        d_bulk: sys.d_bulk().to_vec(),
        d_surf: sys.d_surf().to_vec(),
        k_ad: sys.k_ad().to_vec(),
        k_de: sys.k_de().to_vec(),
        wall_factor,
        w: (0..mesh.n_r()).map(|i| velocity.w(i)).collect(),
        lin: lin.clone(),
        transport: CsrMatrix::from_triplets(0, 0, &[])?,
        matrix: CsrMatrix::from_triplets(0, 0, &[])?,
        has_inflow: velocity.has_inflow(),
    };
    let mut t = op.transport_triplets();
    op.transport = CsrMatrix::from_triplets(layout.len(), layout.len(), &t)?;
    for q in 0..mesh.n_surface() {
        let b = lin.b(q);
        for (si, &ai) in lin.a().iter().enumerate() {
            for (sj, &bj) in b.iter().enumerate() {
                let v = ai * bj;
                if v != 0.0 {
                    t.push((layout.surface(si, q), layout.surface(sj, q), -v));
                }
            }
        }
    }
    op.matrix = CsrMatrix::from_triplets(layout.len(), layout.len(), &t)?;
    Ok(op)
}

impl LinearizedOperator {
    fn transport_triplets(&self) -> Vec<(usize, usize, f64)> {
        let m = &self.mesh;
        let l = self.layout;
        let (nr, nt, nz) = (m.n_r(), m.n_theta(), m.n_z());
        let mut t = Vec::with_capacity(l.len() * 8);
        // flux coefficient `coef` from cell p to cell q: adds coef (u_p - u_q) to p's outflow
        let exchange = |t: &mut Vec<_>, p: usize, q: usize, coef: f64, vp: f64, vq: f64| {
            t.push((p, p, coef / vp));
            t.push((p, q, -coef / vp));
            t.push((q, q, coef / vq));
            t.push((q, p, -coef / vq));
        };
        let lap = surface_laplacian(m);
        for s in 0..l.n_species {
            let d = self.d_bulk[s];
            for k in 0..nz {
                for j in 0..nt {
                    for i in 0..nr {
                        let p = m.bulk_index(i, j, k);
                        let gp = l.bulk(s, p);
                        let vp = m.cell_volume(i);
                        if i + 1 < nr {
                            let q = l.bulk(s, m.bulk_index(i + 1, j, k));
                            let coef = d * m.radial_face_area(i + 1) / m.dr();
                            exchange(&mut t, gp, q, coef, vp, m.cell_volume(i + 1));
                        }
                        let q = l.bulk(s, m.bulk_index(i, (j + 1) % nt, k));
                        let coef = d * m.angular_face_area() / (m.r_center(i) * m.dtheta());
                        exchange(&mut t, gp, q, coef, vp, vp);
                        let az = m.axial_face_area(i);
                        let flow = self.w[i] * az;
                        if k + 1 < nz {
                            let q = l.bulk(s, m.bulk_index(i, j, k + 1));
                            exchange(&mut t, gp, q, d * az / m.dz(), vp, vp);
                            t.push((q, gp, -flow / vp));
                        }
                        // upwind outflow through the upper face, including the outflow disk
                        t.push((gp, gp, flow / vp));
                        if i + 1 == nr {
                            let sq = l.surface(s, m.surface_index(j, k));
                            let a_w = m.radial_face_area(nr);
                            let sf = self.wall_factor[s];
                            t.push((gp, gp, a_w * sf * self.k_ad[s] / vp));
                            t.push((gp, sq, -a_w * sf * self.k_de[s] / vp));
                            // a_w equals the surface cell area
                            t.push((sq, sq, sf * self.k_de[s]));
                            t.push((sq, gp, -sf * self.k_ad[s]));
                        }
                    }
                }
            }
            for (r, c, v) in lap.triplets() {
                t.push((l.surface(s, r), l.surface(s, c), -self.d_surf[s] * v));
            }
        }
        t
    }

    pub fn mesh(&self) -> &CylinderMesh {
        &self.mesh
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn n_species(&self) -> usize {
        self.layout.n_species
    }

    pub fn dim(&self) -> usize {
        self.layout.len()
    }

    /// Assembled `A0 = A - M`.
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Reaction-free part `A`.
    pub fn transport(&self) -> &CsrMatrix {
        &self.transport
    }

    pub fn linearization(&self) -> &SurfaceLinearization {
        &self.lin
    }

    pub fn has_inflow(&self) -> bool {
        self.has_inflow
    }

    pub fn wall_factors(&self) -> &[f64] {
        &self.wall_factor
    }

    pub fn k_ad(&self) -> &[f64] {
        &self.k_ad
    }

    pub fn k_de(&self) -> &[f64] {
        &self.k_de
    }

    pub fn d_bulk(&self) -> &[f64] {
        &self.d_bulk
    }

    pub fn d_surf(&self) -> &[f64] {
        &self.d_surf
    }

    /// Axial speed per radial column.
    pub fn axial_speed(&self) -> &[f64] {
        &self.w
    }

    /// Energy weight of bulk species `s`, `k_ad / k_de`; surface species carry weight 1.
    pub fn bulk_weight(&self, s: usize) -> f64 {
        self.k_ad[s] / self.k_de[s]
    }

    /// Quadrature weight (cell volume or surface cell area) of each unknown.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let m = &self.mesh;
        let mut q = Vec::with_capacity(self.dim());
        for _ in 0..self.n_species() {
            q.extend((0..m.n_bulk()).map(|p| m.cell_volume(m.bulk_coords(p).0)));
        }
        for _ in 0..self.n_species() {
            q.extend(std::iter::repeat_n(m.surface_cell_area(), m.n_surface()));
        }
        q
    }

    /// Angular orbits of all unknowns: one per (species, radial, axial) index and
    /// one per (species, axial) index on the wall.
    pub fn angular_orbits(&self) -> AngularOrbits {
        let m = &self.mesh;
        let l = self.layout;
        let per_species_bulk = m.n_r() * m.n_z();
        let n_bulk_orbits = l.n_species * per_species_bulk;
        AngularOrbits::from_fn(n_bulk_orbits + l.n_species * m.n_z(), m.n_theta(), m.theta_center(0), |q, j| {
            if q < n_bulk_orbits {
                let (s, rest) = (q / per_species_bulk, q % per_species_bulk);
                l.bulk(s, m.bulk_index(rest % m.n_r(), j, rest / m.n_r()))
            } else {
                let q = q - n_bulk_orbits;
                l.surface(q / m.n_z(), m.surface_index(j, q % m.n_z()))
            }
        })
    }

    /// Whether `A0` commutes with rotations and reflections in `theta`.
    pub fn is_rotation_invariant(&self) -> bool {
        self.lin.is_uniform() && self.angular_orbits().is_invariant(&self.matrix)
    }

    /// Cell-by-cell evaluation of `A0 x` straight from the flux definitions,
    /// independent of the assembled matrix.
    pub fn apply_reference(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("state vector", self.dim(), x.len())?;
        let m = &self.mesh;
        let l = self.layout;
        let (nr, nt, nz) = (m.n_r(), m.n_theta(), m.n_z());
        let mut y = vec![0.0; self.dim()];
        for s in 0..l.n_species {
            let d = self.d_bulk[s];
            let c = |i: usize, j: usize, k: usize| x[l.bulk(s, m.bulk_index(i, j, k))];
            for k in 0..nz {
                for j in 0..nt {
                    for i in 0..nr {
                        let here = c(i, j, k);
                        let mut out = 0.0;
                        if i > 0 {
                            out -= d * m.radial_face_area(i) * (c(i - 1, j, k) - here) / m.dr();
                        }
                        if i + 1 < nr {
                            out -= d * m.radial_face_area(i + 1) * (c(i + 1, j, k) - here) / m.dr();
                        }
                        let ang = d * m.angular_face_area() / (m.r_center(i) * m.dtheta());
                        out -= ang * (c(i, (j + 1) % nt, k) - here);
                        out -= ang * (c(i, (j + nt - 1) % nt, k) - here);
                        let az = m.axial_face_area(i);
                        if k > 0 {
                            out -= d * az * (c(i, j, k - 1) - here) / m.dz();
                            out -= self.w[i] * az * c(i, j, k - 1);
                        }
                        if k + 1 < nz {
                            out -= d * az * (c(i, j, k + 1) - here) / m.dz();
                        }
                        out += self.w[i] * az * here;
                        if i + 1 == nr {
                            let surf = x[l.surface(s, m.surface_index(j, k))];
                            let flux = self.wall_factor[s] * (self.k_ad[s] * here - self.k_de[s] * surf);
                            out += m.radial_face_area(nr) * flux;
                        }
                        y[l.bulk(s, m.bulk_index(i, j, k))] = out / m.cell_volume(i);
                    }
                }
            }
            let ds = m.radius() * m.dtheta();
            for k in 0..nz {
                for j in 0..nt {
                    let cs = |j: usize, k: usize| x[l.surface(s, m.surface_index(j, k))];
                    let here = cs(j, k);
                    let mut lap = (cs((j + 1) % nt, k) + cs((j + nt - 1) % nt, k) - 2.0 * here) / (ds * ds);
                    if k > 0 {
                        lap += (cs(j, k - 1) - here) / (m.dz() * m.dz());
                    }
                    if k + 1 < nz {
                        lap += (cs(j, k + 1) - here) / (m.dz() * m.dz());
                    }
                    let trace = c(nr - 1, j, k);
                    let sorp = self.wall_factor[s] * (self.k_ad[s] * trace - self.k_de[s] * here);
                    y[l.surface(s, m.surface_index(j, k))] = -self.d_surf[s] * lap - sorp;
                }
            }
        }
        for q in 0..m.n_surface() {
            let b = self.lin.b(q);
            let bc: f64 = (0..l.n_species).map(|t| b[t] * x[l.surface(t, q)]).sum();
            for (s, &a) in self.lin.a().iter().enumerate() {
                y[l.surface(s, q)] -= a * bc;
            }
        }
        Ok(y)
    }

    /// Complex action of `A0`.
    pub fn apply_complex(&self, x: &[c64]) -> Vec<c64> {
        self.matrix.mul_vec_complex(x)
    }

    /// Write `A0` as `row col value` lines.
    pub fn write_triplets(&self, w: impl std::io::Write) -> std::io::Result<()> {
        self.matrix.write_triplets(w)
    }
}

/// `A0 x`.
pub fn apply_a0(op: &LinearizedOperator, x: &[f64]) -> Result<Vec<f64>> {
    check_len("state vector", op.dim(), x.len())?;
    Ok(op.matrix.mul_vec(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, CylinderSpec};
    use crate::model::{linearize_reaction, Equilibrium, SpeciesParams};
    use crate::operators::{build_velocity, VelocityProfile};
    use crate::state::StateField;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn system() -> SpeciesSystem {
        SpeciesSystem::new(SpeciesParams {
            alpha: vec![1.0, 0.0],
            beta: vec![0.0, 1.0],
            kappa_f: 0.7,
            kappa_b: 1.3,
            k_ad: vec![0.8, 1.7],
            k_de: vec![1.2, 0.6],
            d_bulk: vec![1.0, 0.4],
            d_surf: vec![0.3, 0.9],
        })
        .unwrap()
    }

    fn setup(w_max: f64) -> (CylinderMesh, SpeciesSystem, VelocityField) {
        let mesh = build_mesh(CylinderSpec::new(1.0, 1.5).unwrap(), 3, 5, 4).unwrap();
        let v = build_velocity(&mesh, w_max, VelocityProfile::Poiseuille).unwrap();
        (mesh, system(), v)
    }

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn matrix_matches_reference() {
        let (mesh, sys, v) = setup(1.3);
        let lin = linearize_reaction(&sys, &[0.9, 1.4]).unwrap();
        let op = assemble_a0(&mesh, &sys, &v, &lin).unwrap();
        let x = random(op.dim(), 1);
        let a = apply_a0(&op, &x).unwrap();
        let b = op.apply_reference(&x).unwrap();
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() <= 1e-12 * scale, "{p} vs {q}");
        }
        assert!(op.is_rotation_invariant());
    }

    #[test]
    fn sorption_matched_constants_are_in_the_kernel() {
        let (mesh, sys, v) = setup(0.0);
        let op = assemble_a0(&mesh, &sys, &v, &SurfaceLinearization::zero(2)).unwrap();
        let eq = Equilibrium::sorption_matched(&sys, vec![1.1, 0.4]).unwrap();
        let y = apply_a0(&op, &StateField::constant(&mesh, &eq).to_flat()).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn unmatched_constants_show_the_sorption_mismatch() {
        let (mesh, sys, v) = setup(0.0);
        let op = assemble_a0(&mesh, &sys, &v, &SurfaceLinearization::zero(2)).unwrap();
        let eq = Equilibrium {
            psi: vec![1.0, 1.0],
            xi: vec![1.0, 1.0],
        };
        let y = apply_a0(&op, &StateField::constant(&mesh, &eq).to_flat()).unwrap();
        let l = op.layout();
        for s in 0..2 {
            let expected = op.wall_factors()[s] * (sys.k_de()[s] - sys.k_ad()[s]);
            assert!((y[l.surface(s, 3)] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn inflow_removes_constants_from_the_kernel() {
        let (mesh, sys, v) = setup(1.0);
        let op = assemble_a0(&mesh, &sys, &v, &SurfaceLinearization::zero(2)).unwrap();
        let eq = Equilibrium::sorption_matched(&sys, vec![1.0, 1.0]).unwrap();
        let y = apply_a0(&op, &StateField::constant(&mesh, &eq).to_flat()).unwrap();
        assert!(y.iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn linear_and_columnwise() {
        let (mesh, sys, v) = setup(0.5);
        let lin = linearize_reaction(&sys, &[1.0, 1.0]).unwrap();
        let op = assemble_a0(&mesh, &sys, &v, &lin).unwrap();
        assert!(apply_a0(&op, &vec![0.0; op.dim()]).unwrap().iter().all(|&v| v == 0.0));
        let dense = op.matrix().to_dense();
        for col in [0, 17, op.dim() - 1] {
            let mut e = vec![0.0; op.dim()];
            e[col] = 1.0;
            let y = apply_a0(&op, &e).unwrap();
            for row in 0..op.dim() {
                assert_eq!(y[row], dense[(row, col)]);
            }
        }
        let x = random(op.dim(), 3);
        let twice = apply_a0(&op, &apply_a0(&op, &x).unwrap()).unwrap();
        let sq = &dense * &dense;
        let scale = twice.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for row in 0..op.dim() {
            let r: f64 = (0..op.dim()).map(|c| sq[(row, c)] * x[c]).sum();
            assert!((r - twice[row]).abs() <= 1e-10 * scale);
        }
        assert!(apply_a0(&op, &x[1..]).is_err());
    }

    #[test]
    fn bulk_diffusion_is_volume_symmetric() {
        let (mesh, _, v) = setup(0.0);
        let sys = system();
        let op = assemble_a0(&mesh, &sys, &v, &SurfaceLinearization::zero(2)).unwrap();
        let l = op.layout();
        let q = op.quadrature_weights();
        // away from the wall coupling, V_p A_pq = V_q A_qp
        for (r, c, val) in op.transport().triplets() {
            if r < l.surface_offset() && c < l.surface_offset() {
                let mirror = op.transport().get(c, r);
                assert!((q[r] * val - q[c] * mirror).abs() < 1e-10 * (q[r] * val).abs().max(1.0));
            }
        }
    }

    #[test]
    fn sparsity_pattern() {
        let (mesh, sys, v) = setup(1.0);
        let lin = linearize_reaction(&sys, &[1.0, 1.0]).unwrap();
        let op = assemble_a0(&mesh, &sys, &v, &lin).unwrap();
        let l = op.layout();
        for row in 0..op.dim() {
            let nnz = op.matrix().row(row).count();
            if row < l.surface_offset() {
                assert!(nnz <= 8, "bulk row {row} has {nnz}");
            } else {
                assert!(nnz <= 5 + 1 + l.n_species, "surface row {row} has {nnz}");
            }
        }
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let (mesh, sys, v) = setup(1.0);
        assert!(matches!(
            assemble_a0(&mesh, &sys, &v, &SurfaceLinearization::zero(3)),
            Err(Error::Assembly(_))
        ));
        let other = build_mesh(CylinderSpec::new(1.0, 1.0).unwrap(), 4, 5, 4).unwrap();
        let v2 = build_velocity(&other, 1.0, VelocityProfile::Plug).unwrap();
        assert!(assemble_a0(&mesh, &sys, &v2, &SurfaceLinearization::zero(2)).is_err());
    }
}
