use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw parameters of an N-species system with one reversible surface reaction
///
/// `alpha` and `beta` are the educt and product stoichiometric coefficients.
/// Rate constants and diffusivities carry the usual units: `kappa_f` is in
/// 1/(time concentration^(|alpha|-1)), `k_ad` in length/time, `k_de` in 1/time,
/// diffusivities in length^2/time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub kappa_f: f64,
    pub kappa_b: f64,
    pub k_ad: Vec<f64>,
    pub k_de: Vec<f64>,
    pub d_bulk: Vec<f64>,
    pub d_surf: Vec<f64>,
}

/// A validated species system.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesSystem {
    params: SpeciesParams,
    stoichiometry_differs: bool,
}

fn check_stoichiometry(field: &str, coeffs: &[f64]) -> Result<()> {
    for (k, &c) in coeffs.iter().enumerate() {
        if !c.is_finite() || !(c == 0.0 || c >= 1.0) {
            return Err(Error::config(
                format!("species.{field}[{k}]"),
                format!("stoichiometric coefficient must be 0 or >= 1, got {c}"),
            ));
        }
    }
    if coeffs.iter().all(|&c| c == 0.0) {
        return Err(Error::config(
            format!("species.{field}"),
            "at least one coefficient must be nonzero",
        ));
    }
    Ok(())
}

fn check_positive_vec(field: &str, values: &[f64], n: usize) -> Result<()> {
    if values.len() != n {
        return Err(Error::config(
            format!("species.{field}"),
            format!("expected {n} entries, got {}", values.len()),
        ));
    }
    for (k, &v) in values.iter().enumerate() {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::config(
                format!("species.{field}[{k}]"),
                format!("must be strictly positive, got {v}"),
            ));
        }
    }
    Ok(())
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::config(
            format!("species.{field}"),
            format!("must be strictly positive, got {v}"),
        ));
    }
    Ok(())
}

impl SpeciesSystem {
    pub fn new(params: SpeciesParams) -> Result<Self> {
        let n = params.alpha.len();
        if n == 0 {
            return Err(Error::config("species.alpha", "need at least one species"));
        }
        if params.beta.len() != n {
            return Err(Error::config(
                "species.beta",
                format!("expected {n} entries, got {}", params.beta.len()),
            ));
        }
        check_stoichiometry("alpha", &params.alpha)?;
        check_stoichiometry("beta", &params.beta)?;
        check_positive("kappa_f", params.kappa_f)?;
        check_positive("kappa_b", params.kappa_b)?;
        check_positive_vec("k_ad", &params.k_ad, n)?;
        check_positive_vec("k_de", &params.k_de, n)?;
        check_positive_vec("d_bulk", &params.d_bulk, n)?;
        check_positive_vec("d_surf", &params.d_surf, n)?;
        let stoichiometry_differs = params.alpha != params.beta;
        Ok(Self {
            params,
            stoichiometry_differs,
        })
    }

    /// The reversible isomerization A <-> B with identical transport data for both species.
    pub fn isomerization(kappa_f: f64, kappa_b: f64, k_ad: f64, k_de: f64, d_bulk: f64, d_surf: f64) -> Result<Self> {
        Self::new(SpeciesParams {
            alpha: vec![1.0, 0.0],
            beta: vec![0.0, 1.0],
            kappa_f,
            kappa_b,
            k_ad: vec![k_ad; 2],
            k_de: vec![k_de; 2],
            d_bulk: vec![d_bulk; 2],
            d_surf: vec![d_surf; 2],
        })
    }

    pub fn n_species(&self) -> usize {
        self.params.alpha.len()
    }

    pub fn params(&self) -> &SpeciesParams {
        &self.params
    }

    pub fn alpha(&self) -> &[f64] {
        &self.params.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.params.beta
    }

    pub fn kappa_f(&self) -> f64 {
        self.params.kappa_f
    }

    pub fn kappa_b(&self) -> f64 {
        self.params.kappa_b
    }

    pub fn k_ad(&self) -> &[f64] {
        &self.params.k_ad
    }

    pub fn k_de(&self) -> &[f64] {
        &self.params.k_de
    }

    pub fn d_bulk(&self) -> &[f64] {
        &self.params.d_bulk
    }

    pub fn d_surf(&self) -> &[f64] {
        &self.params.d_surf
    }

    /// Whether `alpha != beta`; when false the reaction is inert.
    pub fn stoichiometry_differs(&self) -> bool {
        self.stoichiometry_differs
    }

    /// Net stoichiometric vector `alpha - beta`.
    pub fn net_stoichiometry(&self) -> Vec<f64> {
        self.alpha().iter().zip(self.beta()).map(|(a, b)| a - b).collect()
    }

    /// Total educt order `|alpha|`.
    pub fn educt_order(&self) -> f64 {
        self.alpha().iter().sum()
    }

    /// Total product order `|beta|`.
    pub fn product_order(&self) -> f64 {
        self.beta().iter().sum()
    }

    /// Copy of this system with modified parameters, revalidated.
    pub fn with_params(&self, f: impl FnOnce(&mut SpeciesParams)) -> Result<Self> {
        let mut p = self.params.clone();
        f(&mut p);
        Self::new(p)
    }
}
