//! Jacobian of the surface reaction at an equilibrium.
//!
//! Because every species reacts through the same scalar driving force, the
//! Jacobian is the rank-one matrix `M = a b^T` with `a = alpha - beta` and
//!
//! ```text
//! b_k = kappa_b beta_k c^(beta - e_k) - kappa_f alpha_k c^(alpha - e_k).
//! ```
//!
//! Its symmetric part `S = (M + M^T) / 2` has at most two nonzero eigenvalues,
//! `(a.b +- |a||b|) / 2`, which is what the stability criterion bounds.

use faer::Mat;

use crate::error::{check_len, Error, Result};
use crate::model::kinetics::{check_nonnegative, monomial_lowered};
use crate::model::SpeciesSystem;

/// Reaction Jacobian data, either uniform on the surface or per surface point.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceLinearization {
    a: Vec<f64>,
    /// One entry when uniform, otherwise one per surface cell.
    b: Vec<Vec<f64>>,
}

fn b_vector(sys: &SpeciesSystem, c: &[f64]) -> Result<Vec<f64>> {
    check_len("surface concentration", sys.n_species(), c.len())?;
    check_nonnegative(c)?;
    (0..sys.n_species())
        .map(|k| {
            let mut v = 0.0;
            if sys.beta()[k] != 0.0 {
                v += sys.kappa_b() * sys.beta()[k] * monomial_lowered(c, sys.beta(), k)?;
            }
            if sys.alpha()[k] != 0.0 {
                v -= sys.kappa_f() * sys.alpha()[k] * monomial_lowered(c, sys.alpha(), k)?;
            }
            Ok(v)
        })
        .collect()
}

/// Linearize the reaction at a spatially constant surface state.
pub fn linearize_reaction(sys: &SpeciesSystem, c_surf_star: &[f64]) -> Result<SurfaceLinearization> {
    Ok(SurfaceLinearization {
        a: sys.net_stoichiometry(),
        b: vec![b_vector(sys, c_surf_star)?],
    })
}

/// Linearize the reaction pointwise; `field[p]` is the species vector at surface cell `p`.
pub fn linearize_reaction_field(sys: &SpeciesSystem, field: &[Vec<f64>]) -> Result<SurfaceLinearization> {
    if field.is_empty() {
        return Err(Error::Domain("empty surface field".into()));
    }
    let b = field.iter().map(|c| b_vector(sys, c)).collect::<Result<_>>()?;
    Ok(SurfaceLinearization {
        a: sys.net_stoichiometry(),
        b,
    })
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

impl SurfaceLinearization {
    /// Build directly from `a` and a single `b`.
    pub fn from_vectors(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        check_len("b", a.len(), b.len())?;
        Ok(Self { a, b: vec![b] })
    }

    /// The zero Jacobian, used for the purely linear transport-sorption operator.
    pub fn zero(n_species: usize) -> Self {
        Self {
            a: vec![0.0; n_species],
            b: vec![vec![0.0; n_species]],
        }
    }

    pub fn n_species(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// `b` at surface cell `point` (any point when uniform).
    pub fn b(&self, point: usize) -> &[f64] {
        if self.b.len() == 1 {
            &self.b[0]
        } else {
            &self.b[point]
        }
    }

    pub fn is_uniform(&self) -> bool {
        self.b.len() == 1
    }

    /// Number of stored `b` vectors.
    pub fn n_points(&self) -> usize {
        self.b.len()
    }

    /// `M[i][j] = a_i b_j` at `point`.
    pub fn m_tilde(&self, point: usize) -> Mat<f64> {
        let b = self.b(point);
        Mat::from_fn(self.a.len(), self.a.len(), |i, j| self.a[i] * b[j])
    }

    /// `(M + M^T) / 2` at `point`.
    pub fn s_sym(&self, point: usize) -> Mat<f64> {
        let b = self.b(point);
        let a = &self.a;
        Mat::from_fn(a.len(), a.len(), |i, j| 0.5 * (a[i] * b[j] + a[j] * b[i]))
    }

    /// `a . b` at `point`, the only possibly nonzero eigenvalue of `M`.
    pub fn a_dot_b(&self, point: usize) -> f64 {
        dot(&self.a, self.b(point))
    }

    /// `|a| |b|` at `point`, the spectral norm of `M`.
    pub fn ab_norm(&self, point: usize) -> f64 {
        norm(&self.a) * norm(self.b(point))
    }

    /// Largest `|a| |b|` over all stored points.
    pub fn max_ab_norm(&self) -> f64 {
        (0..self.b.len()).map(|p| self.ab_norm(p)).fold(0.0, f64::max)
    }

    /// Same `a`, with every `b` multiplied by `factor`.
    pub fn scaled_b(&self, factor: f64) -> Self {
        Self {
            a: self.a.clone(),
            b: self
                .b
                .iter()
                .map(|b| b.iter().map(|v| v * factor).collect())
                .collect(),
        }
    }

    /// Closed-form spectrum of the symmetric part at `point`.
    pub fn symmetric_part_spectrum(&self, point: usize) -> Vec<f64> {
        symmetric_part_spectrum(&self.a, self.b(point))
    }

    /// Closed-form spectrum of `M` itself: `a.b` and `N-1` zeros.
    pub fn jacobian_spectrum(&self, point: usize) -> Vec<f64> {
        let mut ev = vec![0.0; self.a.len()];
        if let Some(first) = ev.first_mut() {
            *first = self.a_dot_b(point);
        }
        ev
    }
}

/// Eigenvalues of `(a b^T + b a^T) / 2`, sorted descending.
///
/// For `N >= 2` these are `(a.b + |a||b|)/2`, `(a.b - |a||b|)/2` and `N-2` zeros.
/// When `a` and `b` are parallel one of the first two vanishes, so the same
/// expression covers both cases.
pub fn symmetric_part_spectrum(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let ab = dot(a, b);
    if n == 1 {
        return vec![ab];
    }
    let nn = norm(a) * norm(b);
    let mut ev = vec![0.0; n];
    ev[0] = 0.5 * (ab + nn);
    ev[1] = 0.5 * (ab - nn);
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}
