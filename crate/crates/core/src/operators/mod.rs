//! Velocity, inflow data and the discrete linearized operator.

mod assemble;
mod energy;
mod inflow;
mod velocity;

pub use assemble::{apply_a0, assemble_a0, wall_factor, LinearizedOperator};
pub use energy::{energy_forms, energy_forms_real, EnergyBreakdown, EnergyForms};
pub use inflow::{inflow_source, matched_inflow, InflowProfile};
pub use velocity::{build_velocity, VelocityField, VelocityProfile};
