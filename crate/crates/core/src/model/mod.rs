//! Species, rate laws, equilibria and the reaction Jacobian.

mod compatibility;
mod kinetics;
mod linearization;
mod species;

pub use compatibility::{check_compatibility, CompatibilityReport};
pub use kinetics::{
    equilibrium_chemical_balance, monomial, monomial_lowered, reaction_rate, sorption_rate, ChemicalBalance,
    Equilibrium,
};
pub(crate) use kinetics::{check_nonnegative, driving_force};
pub use linearization::{
    linearize_reaction, linearize_reaction_field, symmetric_part_spectrum, SurfaceLinearization,
};
pub use species::{SpeciesParams, SpeciesSystem};
