//! Spectrum of the linearized operator and the stability verdict built on it.

mod eigen;
mod report;

pub use eigen::{
    compute_spectrum, compute_spectrum_with, conjugate_pairs_closed, matrix_spectrum, residual, Eigenpair,
    Spectrum, SpectrumMethod, SpectrumOptions, Which, DENSE_LIMIT, RESIDUAL_TOL,
};
pub use report::{
    energy_identity_check, energy_identity_residuals, instability_probe, stability_verdict, stability_verdict_with, AnalysisOptions,
    EigenRecord, ProbeRecord, StabilityReport, Verdict,
};
