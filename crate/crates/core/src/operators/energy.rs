//! Weighted energy forms of `A0`.
//!
//! In the inner product that weights bulk species by `k_ad / k_de` and surface
//! species by 1 (both times cell volume or area), the real part of `<A0 v, v>`
//! splits into the face-by-face terms
//!
//! ```text
//! Re F_bulk    = bulk gradient + advection + wall (bulk side) - wall cross
//! Re F_surface = surface gradient + desorption - wall cross - reaction
//! ```
//!
//! all of which except the reaction term are nonnegative. The wall terms combine
//! to `A_wall s |k_ad c - k_de c_surf|^2 / k_de`, and upwind advection contributes
//! `w A_z (|c_bottom|^2 + |c_top|^2 + sum of axial jumps^2) / 2`.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::operators::LinearizedOperator;

/// Sign-definite pieces of `Re <A0 v, v>` in the weighted inner product.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub bulk_gradient: f64,
    pub advection: f64,
    pub wall_bulk: f64,
    pub wall_cross: f64,
    pub surface_gradient: f64,
    pub desorption: f64,
    pub reaction: f64,
}

impl EnergyBreakdown {
    pub fn re_f_omega(&self) -> f64 {
        self.bulk_gradient + self.advection + self.wall_bulk - self.wall_cross
    }

    pub fn re_f_sigma(&self) -> f64 {
        self.surface_gradient + self.desorption - self.wall_cross - self.reaction
    }

    pub fn total(&self) -> f64 {
        self.re_f_omega() + self.re_f_sigma()
    }

    /// Sum of absolute values, the natural scale for relative comparisons.
    pub fn magnitude(&self) -> f64 {
        self.bulk_gradient.abs()
            + self.advection.abs()
            + self.wall_bulk.abs()
            + 2.0 * self.wall_cross.abs()
            + self.surface_gradient.abs()
            + self.desorption.abs()
            + self.reaction.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyForms {
    /// Weighted `<A0 v, v>` restricted to bulk rows.
    pub f_omega: c64,
    /// `<A0 v, v>` restricted to surface rows.
    pub f_sigma: c64,
    /// `sum (k_ad / k_de) V |c|^2`.
    pub norm_bulk: f64,
    /// `sum a_S |c_surf|^2`.
    pub norm_surface: f64,
    pub breakdown: EnergyBreakdown,
}

impl EnergyForms {
    pub fn weighted_norm_sq(&self) -> f64 {
        self.norm_bulk + self.norm_surface
    }
}

/// Energy forms of `state` (a complex vector in the operator's layout).
pub fn energy_forms(op: &LinearizedOperator, state: &[c64]) -> Result<EnergyForms> {
    check_len("state vector", op.dim(), state.len())?;
    let m = op.mesh();
    let l = op.layout();
    let (nr, nt, nz) = (m.n_r(), m.n_theta(), m.n_z());
    let y = op.apply_complex(state);
    let a_s = m.surface_cell_area();

    let mut f_omega = c64::new(0.0, 0.0);
    let mut f_sigma = c64::new(0.0, 0.0);
    let mut norm_bulk = 0.0;
    let mut norm_surface = 0.0;
    let mut e = EnergyBreakdown::default();

    for s in 0..l.n_species {
        let wt = op.bulk_weight(s);
        let d = op.d_bulk()[s];
        let ds = op.d_surf()[s];
        let sf = op.wall_factors()[s];
        let (k_ad, k_de) = (op.k_ad()[s], op.k_de()[s]);
        let c = |i: usize, j: usize, k: usize| state[l.bulk(s, m.bulk_index(i, j, k))];
        let cs = |j: usize, k: usize| state[l.surface(s, m.surface_index(j, k))];
        for p in 0..m.n_bulk() {
            let g = l.bulk(s, p);
            let v = m.cell_volume(m.bulk_coords(p).0);
            f_omega += y[g] * state[g].conj() * (wt * v);
            norm_bulk += wt * v * state[g].norm_sqr();
        }
        for q in 0..m.n_surface() {
            let g = l.surface(s, q);
            f_sigma += y[g] * state[g].conj() * a_s;
            norm_surface += a_s * state[g].norm_sqr();
        }
        for k in 0..nz {
            for j in 0..nt {
                for i in 0..nr {
                    let here = c(i, j, k);
                    if i + 1 < nr {
                        e.bulk_gradient +=
                            wt * d * m.radial_face_area(i + 1) / m.dr() * (c(i + 1, j, k) - here).norm_sqr();
                    }
                    let ang = m.angular_face_area() / (m.r_center(i) * m.dtheta());
                    e.bulk_gradient += wt * d * ang * (c(i, (j + 1) % nt, k) - here).norm_sqr();
                    let az = m.axial_face_area(i);
                    if k + 1 < nz {
                        e.bulk_gradient += wt * d * az / m.dz() * (c(i, j, k + 1) - here).norm_sqr();
                    }
                }
            }
        }
        for j in 0..nt {
            for i in 0..nr {
                let half_flow = 0.5 * op.axial_speed()[i] * m.axial_face_area(i);
                let mut sum = c(i, j, 0).norm_sqr() + c(i, j, nz - 1).norm_sqr();
                for k in 1..nz {
                    sum += (c(i, j, k) - c(i, j, k - 1)).norm_sqr();
                }
                e.advection += wt * half_flow * sum;
            }
        }
        let a_w = m.radial_face_area(nr);
        let ang = m.radius() * m.dtheta();
        for k in 0..nz {
            for j in 0..nt {
                let (cb, cw) = (c(nr - 1, j, k), cs(j, k));
                e.wall_bulk += wt * a_w * sf * k_ad * cb.norm_sqr();
                e.wall_cross += a_w * sf * k_ad * (cb * cw.conj()).re;
                e.desorption += a_s * sf * k_de * cw.norm_sqr();
                e.surface_gradient += ds * a_s / (ang * ang) * (cs((j + 1) % nt, k) - cw).norm_sqr();
                if k + 1 < nz {
                    e.surface_gradient += ds * a_s / (m.dz() * m.dz()) * (cs(j, k + 1) - cw).norm_sqr();
                }
            }
        }
    }
    let lin = op.linearization();
    for q in 0..m.n_surface() {
        let b = lin.b(q);
        let mut bc = c64::new(0.0, 0.0);
        let mut ac = c64::new(0.0, 0.0);
        for s in 0..l.n_species {
            let v = state[l.surface(s, q)];
            bc += v * b[s];
            ac += v.conj() * lin.a()[s];
        }
        e.reaction += a_s * (bc * ac).re;
    }
    Ok(EnergyForms {
        f_omega,
        f_sigma,
        norm_bulk,
        norm_surface,
        breakdown: e,
    })
}

/// Real-valued convenience wrapper.
pub fn energy_forms_real(op: &LinearizedOperator, state: &[f64]) -> Result<EnergyForms> {
    let z: Vec<c64> = state.iter().map(|&v| c64::new(v, 0.0)).collect();
    energy_forms(op, &z)
}
