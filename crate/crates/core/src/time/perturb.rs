//! Seeded smooth perturbation fields.
//!
//! Bulk fields are sums of `(r/R)^p trig(m theta) cos(k pi z / h)` with
//! `p, m, k <= 2`; surface fields drop the radial factor. Every term has zero
//! normal derivative on the disks and the rims, so the fields stay close to the
//! compatibility conditions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::CylinderMesh;
use crate::state::StateField;

/// Perturbation with entries in `[-amplitude, amplitude]`, reproducible from `seed`.
pub fn smooth_perturbation(mesh: &CylinderMesh, n_species: usize, seed: u64, amplitude: f64) -> StateField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (r_max, h) = (mesh.radius(), mesh.height());
    let mut field = StateField::zeros(mesh, n_species);
    let coeff = |rng: &mut ChaCha8Rng| rng.gen_range(-1.0..1.0);
    for s in 0..n_species {
        for p in 0..=2 {
            for m in 0..=2 {
                for k in 0..=2 {
                    let (a, b) = (coeff(&mut rng), coeff(&mut rng));
                    for (idx, v) in field.c[s].iter_mut().enumerate() {
                        let (i, j, kk) = mesh.bulk_coords(idx);
                        let (r, th, z) = (mesh.r_center(i), mesh.theta_center(j), mesh.z_center(kk));
                        let trig = a * (m as f64 * th).cos() + b * (m as f64 * th).sin();
                        *v += (r / r_max).powi(p) * trig * (k as f64 * std::f64::consts::PI * z / h).cos();
                    }
                }
            }
        }
        for m in 0..=2 {
            for k in 0..=2 {
                let (a, b) = (coeff(&mut rng), coeff(&mut rng));
                for (idx, v) in field.c_surf[s].iter_mut().enumerate() {
                    let (j, kk) = mesh.surface_coords(idx);
                    let (th, z) = (mesh.theta_center(j), mesh.z_center(kk));
                    let trig = a * (m as f64 * th).cos() + b * (m as f64 * th).sin();
                    *v += trig * (k as f64 * std::f64::consts::PI * z / h).cos();
                }
            }
        }
    }
    let peak = field
        .c
        .iter()
        .chain(&field.c_surf)
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        let scale = amplitude / peak;
        field.c.iter_mut().chain(field.c_surf.iter_mut()).flatten().for_each(|v| *v *= scale);
    }
    field
}

/// `base + delta * direction`, keeping the time of `base`.
pub fn perturbed(base: &StateField, direction: &StateField, delta: f64) -> StateField {
    let add = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        x.iter()
            .zip(y)
            .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u + delta * v).collect())
            .collect()
    };
    StateField {
        c: add(&base.c, &direction.c),
        c_surf: add(&base.c_surf, &direction.c_surf),
        time: base.time,
    }
}
