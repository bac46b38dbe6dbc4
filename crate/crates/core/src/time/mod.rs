//! Nonlinear time stepping, mass ledgers and decay-rate fits.

mod decay;
mod imex;
mod ledger;
mod perturb;
mod simulate;

pub use decay::{decay_rate, decay_rate_with_floor, DecayFit, MIN_TAIL_SAMPLES};
pub use imex::{reaction_dt_bound, step_imex, ImexStepper, StepFluxes, POSITIVITY_FLOOR};
pub use ledger::{mass_ledger, LedgerRecord};
pub use perturb::{perturbed, smooth_perturbation};
pub use simulate::{simulate, Sample, SimulationSettings, Trajectory};
