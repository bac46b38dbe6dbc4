//! Mass-action surface chemistry and linear sorption.
//!
//! The single reversible reaction `sum alpha_k C_k <-> sum beta_k C_k` has rate
//!
//! ```text
//! r_i(c) = (alpha_i - beta_i) (kappa_b c^beta - kappa_f c^alpha),   c^gamma = prod_k c_k^gamma_k
//! ```
//!
//! and sorption exchanges mass between the wall-adjacent bulk and the surface at
//! rate `k_ad_i c_i - k_de_i c_surf_i`.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::model::SpeciesSystem;

/// `prod_k x_k^e_k` with `0^0 = 1`.
pub fn monomial(x: &[f64], exponents: &[f64]) -> f64 {
    x.iter()
        .zip(exponents)
        .filter(|(_, &e)| e != 0.0)
        .map(|(&xk, &e)| xk.powf(e))
        .product()
}

/// `x^(e - e_k)`: the monomial with the k-th exponent lowered by one.
///
/// Fails when a zero base would be raised to a negative power.
pub fn monomial_lowered(x: &[f64], exponents: &[f64], k: usize) -> Result<f64> {
    let mut prod = 1.0;
    for (j, (&xj, &e)) in x.iter().zip(exponents).enumerate() {
        let e = if j == k { e - 1.0 } else { e };
        if e == 0.0 {
            continue;
        }
        if e < 0.0 && xj == 0.0 {
            return Err(Error::SingularLinearization { species: j });
        }
        prod *= xj.powf(e);
    }
    Ok(prod)
}

pub(crate) fn check_nonnegative(c: &[f64]) -> Result<()> {
    for (k, &v) in c.iter().enumerate() {
        if !(v >= 0.0) {
            return Err(Error::NegativeConcentration {
                species: k,
                value: v,
            });
        }
    }
    Ok(())
}

/// Scalar driving force `kappa_b c^beta - kappa_f c^alpha`, no checks.
pub(crate) fn driving_force(sys: &SpeciesSystem, c: &[f64]) -> f64 {
    sys.kappa_b() * monomial(c, sys.beta()) - sys.kappa_f() * monomial(c, sys.alpha())
}

/// Reaction rate vector at the surface concentrations `c_surf`.
pub fn reaction_rate(sys: &SpeciesSystem, c_surf: &[f64]) -> Result<Vec<f64>> {
    check_len("surface concentration", sys.n_species(), c_surf.len())?;
    check_nonnegative(c_surf)?;
    let f = driving_force(sys, c_surf);
    Ok(sys.net_stoichiometry().into_iter().map(|a| a * f).collect())
}

/// Sorption rate `k_ad_i c_i - k_de_i c_surf_i` (positive means net adsorption).
pub fn sorption_rate(sys: &SpeciesSystem, c_bulk_trace: &[f64], c_surf: &[f64]) -> Result<Vec<f64>> {
    let n = sys.n_species();
    check_len("bulk trace", n, c_bulk_trace.len())?;
    check_len("surface concentration", n, c_surf.len())?;
    Ok((0..n)
        .map(|i| sys.k_ad()[i] * c_bulk_trace[i] - sys.k_de()[i] * c_surf[i])
        .collect())
}

/// Spatially constant equilibrium: bulk values `psi`, surface values `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub psi: Vec<f64>,
    pub xi: Vec<f64>,
}

impl Equilibrium {
    /// Surface values `xi` with the sorption-matched bulk values `psi_i = (k_de_i / k_ad_i) xi_i`.
    pub fn sorption_matched(sys: &SpeciesSystem, xi: Vec<f64>) -> Result<Self> {
        check_len("surface equilibrium", sys.n_species(), xi.len())?;
        check_nonnegative(&xi)?;
        let psi = xi
            .iter()
            .zip(sys.k_de().iter().zip(sys.k_ad()))
            .map(|(x, (kde, kad))| kde / kad * x)
            .collect();
        Ok(Self { psi, xi })
    }

    pub fn n_species(&self) -> usize {
        self.xi.len()
    }
}

/// Chemical-balance equilibrium with all surface concentrations equal to `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChemicalBalance {
    pub gamma: f64,
    pub equilibrium: Equilibrium,
}

/// Constant equilibrium of chemical balance with equal surface components.
///
/// All surface concentrations equal `gamma = (kappa_b / kappa_f)^(1 / (|alpha| - |beta|))`,
/// which zeroes the reaction rate; the bulk values follow from vanishing sorption.
pub fn equilibrium_chemical_balance(sys: &SpeciesSystem) -> Result<ChemicalBalance> {
    let order_gap = sys.educt_order() - sys.product_order();
    if order_gap == 0.0 {
        return Err(Error::UnsupportedConstruction(
            "equal-component chemical balance needs |alpha| != |beta|".into(),
        ));
    }
    let gamma = (sys.kappa_b() / sys.kappa_f()).powf(1.0 / order_gap);
    let equilibrium = Equilibrium::sorption_matched(sys, vec![gamma; sys.n_species()])?;
    Ok(ChemicalBalance { gamma, equilibrium })
}
