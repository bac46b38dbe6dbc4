//! Backward Euler for transport and sorption, forward Euler for the surface reaction.
//!
//! One step solves `(I + dt A) u_new = u + dt (f_in + R(u))` where `A` is the
//! reaction-free operator, `f_in` the inflow source and `R` the reaction rates on
//! the surface rows. `I + dt A` is factorized once per stepper.

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::CylinderMesh;
use crate::model::{driving_force, linearize_reaction_field, SpeciesSystem, SurfaceLinearization};
use crate::operators::{assemble_a0, inflow_source, InflowProfile, VelocityField};
use crate::sparse::CsrMatrix;
use crate::state::{Layout, StateField};

/// Entries below this value abort the run.
pub const POSITIVITY_FLOOR: f64 = -1e-10;

/// Boundary and reaction terms of one step, per species, already integrated over space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFluxes {
    /// `-int g_in` over the inflow disk.
    pub influx: Vec<f64>,
    /// `int (u.nu) c` over the outflow disk, evaluated at the new state.
    pub outflux: Vec<f64>,
    /// `int r_ch` over the wall, evaluated at the old state.
    pub reaction: Vec<f64>,
}

pub struct ImexStepper {
    mesh: CylinderMesh,
    sys: SpeciesSystem,
    layout: Layout,
    dt: f64,
    source: Vec<f64>,
    influx: Vec<f64>,
    w: Vec<f64>,
    lu: Lu<usize, f64>,
    transport: CsrMatrix,
}

impl std::fmt::Debug for ImexStepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImexStepper")
            .field("dt", &self.dt)
            .field("unknowns", &self.layout.len())
            .finish_non_exhaustive()
    }
}

/// Explicit-reaction step bound `0.5 / max |a||b(c_surf)|` at the given surface state.
pub fn reaction_dt_bound(sys: &SpeciesSystem, state: &StateField) -> Result<f64> {
    if !sys.stoichiometry_differs() {
        return Ok(f64::INFINITY);
    }
    let n_surf = state.c_surf.first().map_or(0, Vec::len);
    let field: Vec<Vec<f64>> = (0..n_surf).map(|q| state.surface_point(q)).collect();
    let lin: SurfaceLinearization = linearize_reaction_field(sys, &field)?;
    let m = lin.max_ab_norm();
    Ok(if m > 0.0 { 0.5 / m } else { f64::INFINITY })
}

impl ImexStepper {
    pub fn new(
        mesh: &CylinderMesh,
        sys: &SpeciesSystem,
        velocity: &VelocityField,
        g_in: &InflowProfile,
        dt: f64,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::config("simulate.dt", format!("must be positive, got {dt}")));
        }
        if g_in.n_species() != sys.n_species() {
            return Err(Error::LengthMismatch {
                what: "inflow species",
                expected: sys.n_species(),
                got: g_in.n_species(),
            });
        }
        let op = assemble_a0(mesh, sys, velocity, &SurfaceLinearization::zero(sys.n_species()))?;
        let transport = op.transport().clone();
        let system = transport.shifted(1.0, dt)?;
        let lu = system
            .to_faer()?
            .sp_lu()
            .map_err(|e| Error::Numerical(format!("factorization of I + dt A failed: {e:?}")))?;
        Ok(Self {
            mesh: mesh.clone(),
            sys: sys.clone(),
            layout: op.layout(),
            dt,
            source: inflow_source(mesh, g_in)?,
            influx: (0..sys.n_species()).map(|s| g_in.influx(mesh, s)).collect(),
            w: op.axial_speed().to_vec(),
            lu,
            transport,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Reaction-free operator `A` used by the implicit part.
    pub fn transport(&self) -> &CsrMatrix {
        &self.transport
    }

    fn outflux(&self, state: &StateField, species: usize) -> f64 {
        let m = &self.mesh;
        let top = m.n_z() - 1;
        (0..m.n_theta())
            .flat_map(|j| (0..m.n_r()).map(move |i| (i, j)))
            .map(|(i, j)| self.w[i] * m.axial_face_area(i) * state.c[species][m.bulk_index(i, j, top)])
            .sum()
    }

    /// Advance one step; checks the reaction step bound and positivity.
    pub fn step(&self, state: &StateField) -> Result<(StateField, StepFluxes)> {
        state.check_shape(&self.mesh, self.sys.n_species())?;
        let bound = reaction_dt_bound(&self.sys, state)?;
        if self.dt > bound {
            return Err(Error::Precondition(format!(
                "dt = {} exceeds the explicit reaction bound {bound:e}",
                self.dt
            )));
        }
        let l = self.layout;
        let a = self.sys.net_stoichiometry();
        let a_s = self.mesh.surface_cell_area();
        let mut rhs = state.to_flat();
        for (r, f) in rhs.iter_mut().zip(&self.source) {
            *r += self.dt * f;
        }
        let mut reaction = vec![0.0; l.n_species];
        if self.sys.stoichiometry_differs() {
            for q in 0..l.n_surface {
                let force = driving_force(&self.sys, &state.surface_point(q));
                for s in 0..l.n_species {
                    let r = a[s] * force;
                    rhs[l.surface(s, q)] += self.dt * r;
                    reaction[s] += a_s * r;
                }
            }
        }
        let mut x = Mat::from_fn(l.len(), 1, |i, _| rhs[i]);
        self.lu.solve_in_place(x.as_mut());
        let flat: Vec<f64> = (0..l.len()).map(|i| x[(i, 0)]).collect();
        let next = StateField::from_flat(l, &flat, state.time + self.dt)?;
        if let Some((species, value)) = next.most_negative(POSITIVITY_FLOOR) {
            return Err(Error::Positivity {
                time: next.time,
                species,
                value,
            });
        }
        let fluxes = StepFluxes {
            influx: self.influx.clone(),
            outflux: (0..l.n_species).map(|s| self.outflux(&next, s)).collect(),
            reaction,
        };
        Ok((next, fluxes))
    }
}

/// One step from scratch (factorizes `I + dt A`; use [`ImexStepper`] for many steps).
pub fn step_imex(
    state: &StateField,
    dt: f64,
    sys: &SpeciesSystem,
    mesh: &CylinderMesh,
    velocity: &VelocityField,
    g_in: &InflowProfile,
) -> Result<StateField> {
    Ok(ImexStepper::new(mesh, sys, velocity, g_in, dt)?.step(state)?.0)
}
