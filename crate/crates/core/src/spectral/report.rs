//! Stability verdicts, the energy identity and the instability probe.

use std::io::Write;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::mesh::{poincare_constant_surface, CylinderMesh, PoincareConstant};
use crate::model::{check_nonnegative, linearize_reaction, Equilibrium, SpeciesSystem, SurfaceLinearization};
use crate::operators::{assemble_a0, energy_forms, LinearizedOperator, VelocityField};
use crate::spectral::eigen::{
    compute_spectrum_with, conjugate_pairs_closed, Eigenpair, SpectrumMethod, SpectrumOptions, Which,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    StableByCriterion,
    CriterionInconclusive,
    UnstableDetected,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::StableByCriterion => "stable-by-criterion",
            Verdict::CriterionInconclusive => "criterion-inconclusive",
            Verdict::UnstableDetected => "unstable-detected",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub re: f64,
    pub im: f64,
    pub residual: f64,
    /// Relative mismatch of the energy identity for this pair.
    pub energy_residual: f64,
}

/// Both sides of the instability condition for one eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub index: usize,
    /// `Re sum a_S (b . c_surf) conj(a . c_surf)`.
    pub lhs: f64,
    /// `|<A v, v>|` with the reaction-free operator, unweighted quadrature.
    pub rhs: f64,
    pub satisfied: bool,
    /// Zero vector: nothing to evaluate.
    pub degenerate: bool,
    pub eigenvalue_re: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Number of eigenvalues to compute.
    pub k: usize,
    pub which: Which,
    pub method: SpectrumMethod,
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            k: 40,
            which: Which::SmallestReal,
            method: SpectrumMethod::Auto,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub verdict: Verdict,
    /// Criterion holds but the computed gap is not positive.
    pub discretization_anomaly: bool,
    pub criterion_lhs: f64,
    pub criterion_rhs: f64,
    /// `criterion_rhs - criterion_lhs`; nonnegative means the criterion holds.
    pub criterion_margin: f64,
    pub criterion_satisfied: bool,
    pub nontrivial_inflow: bool,
    pub spectral_gap: f64,
    pub gap_tolerance: f64,
    pub c_p: f64,
    pub mu_1: f64,
    pub poincare_subspace: String,
    pub equilibrium: Equilibrium,
    pub a: Vec<f64>,
    /// `b` at the surface point where `|a||b|` is largest.
    pub b: Vec<f64>,
    pub n_unknowns: usize,
    pub k_computed: usize,
    pub method: SpectrumMethod,
    pub max_residual: f64,
    pub energy_identity_residual: f64,
    pub conjugate_pairs_closed: bool,
    pub probe_hits: usize,
    /// Norm in which decay and spectra are measured.
    pub norm_convention: String,
    pub eigenvalues: Vec<EigenRecord>,
    pub probe: Vec<ProbeRecord>,
}

impl StabilityReport {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Numerical(format!("report serialization failed: {e}")))
    }

    /// `re,im,residual` rows under the versioned header.
    pub fn write_eigenvalues_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", crate::CSV_HEADER)?;
        writeln!(w, "re,im,residual")?;
        for e in &self.eigenvalues {
            writeln!(w, "{:e},{:e},{:e}", e.re, e.im, e.residual)?;
        }
        Ok(())
    }

    /// `index,re,im,energy_residual` rows under the versioned header.
    pub fn write_energy_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", crate::CSV_HEADER)?;
        writeln!(w, "index,re,im,energy_residual")?;
        for (i, e) in self.eigenvalues.iter().enumerate() {
            writeln!(w, "{i},{:e},{:e},{:e}", e.re, e.im, e.energy_residual)?;
        }
        Ok(())
    }

    /// `index,eigenvalue_re,lhs,rhs,satisfied,degenerate` rows under the versioned header.
    pub fn write_probe_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", crate::CSV_HEADER)?;
        writeln!(w, "index,eigenvalue_re,lhs,rhs,satisfied,degenerate")?;
        for p in &self.probe {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{},{}",
                p.index, p.eigenvalue_re, p.lhs, p.rhs, p.satisfied, p.degenerate
            )?;
        }
        Ok(())
    }
}

/// Relative mismatch of `Re lambda |v|_W^2 = Re F_bulk + Re F_surface` per pair.
pub fn energy_identity_residuals(op: &LinearizedOperator, pairs: &[Eigenpair]) -> Result<Vec<f64>> {
    pairs
        .iter()
        .map(|p| {
            let f = energy_forms(op, &p.vector)?;
            let lhs = p.value.re * f.weighted_norm_sq();
            let rhs = f.breakdown.total();
            let scale = (p.value.norm() * f.weighted_norm_sq()).max(f.breakdown.magnitude());
            Ok(if scale > 0.0 { (lhs - rhs).abs() / scale } else { 0.0 })
        })
        .collect()
}

/// Worst entry of [`energy_identity_residuals`].
pub fn energy_identity_check(op: &LinearizedOperator, pairs: &[Eigenpair]) -> Result<f64> {
    Ok(energy_identity_residuals(op, pairs)?.into_iter().fold(0.0, f64::max))
}

/// Evaluate the instability condition on each eigenvector.
///
/// Where it holds, `Re lambda |v|^2 = Re <A v, v> - lhs < 0` follows, so such an
/// eigenvalue must have negative real part.
pub fn instability_probe(
    op: &LinearizedOperator,
    pairs: &[Eigenpair],
    lin: &SurfaceLinearization,
) -> Result<Vec<ProbeRecord>> {
    let l = op.layout();
    let m = op.mesh();
    check_len("linearization species", l.n_species, lin.n_species())?;
    let quad = op.quadrature_weights();
    let a_s = m.surface_cell_area();
    let mut out = Vec::with_capacity(pairs.len());
    for (index, p) in pairs.iter().enumerate() {
        let v = &p.vector;
        check_len("eigenvector", op.dim(), v.len())?;
        if v.iter().all(|z| z.norm() == 0.0) {
            out.push(ProbeRecord {
                index,
                lhs: 0.0,
                rhs: 0.0,
                satisfied: false,
                degenerate: true,
                eigenvalue_re: p.value.re,
            });
            continue;
        }
        let mut lhs = 0.0;
        for q in 0..m.n_surface() {
            let b = lin.b(q);
            let mut bc = c64::new(0.0, 0.0);
            let mut ac = c64::new(0.0, 0.0);
            for s in 0..l.n_species {
                let z = v[l.surface(s, q)];
                bc += z * b[s];
                ac += z.conj() * lin.a()[s];
            }
            lhs += a_s * (bc * ac).re;
        }
        let av = op.transport().mul_vec_complex(v);
        let form: c64 = av.iter().zip(v).zip(&quad).map(|((y, x), w)| y * x.conj() * *w).sum();
        let rhs = form.norm();
        out.push(ProbeRecord {
            index,
            lhs,
            rhs,
            satisfied: lhs > rhs,
            degenerate: false,
            eigenvalue_re: p.value.re,
        });
    }
    Ok(out)
}

/// Stability analysis of `eq` with the reaction Jacobian evaluated there.
pub fn stability_verdict(
    sys: &SpeciesSystem,
    mesh: &CylinderMesh,
    eq: &Equilibrium,
    velocity: &VelocityField,
    opts: &AnalysisOptions,
) -> Result<StabilityReport> {
    check_len("equilibrium", sys.n_species(), eq.n_species())?;
    check_nonnegative(&eq.psi).and_then(|_| check_nonnegative(&eq.xi)).map_err(|e| {
        Error::Precondition(format!("equilibrium must be nonnegative: {e}"))
    })?;
    let lin = linearize_reaction(sys, &eq.xi)?;
    stability_verdict_with(sys, mesh, eq, velocity, &lin, opts)
}

/// Stability analysis with a caller-supplied Jacobian (e.g. a deliberately modified one).
pub fn stability_verdict_with(
    sys: &SpeciesSystem,
    mesh: &CylinderMesh,
    eq: &Equilibrium,
    velocity: &VelocityField,
    lin: &SurfaceLinearization,
    opts: &AnalysisOptions,
) -> Result<StabilityReport> {
    if eq.psi.iter().chain(&eq.xi).any(|&v| !(v >= 0.0)) {
        return Err(Error::Precondition("equilibrium must be nonnegative".into()));
    }
    if !velocity.satisfies_sign_conditions() {
        return Err(Error::Precondition("velocity violates the boundary sign conditions".into()));
    }
    let pc: PoincareConstant = poincare_constant_surface(mesh)?;
    let op = assemble_a0(mesh, sys, velocity, lin)?;
    let k = opts.k.min(op.dim());
    let spec = compute_spectrum_with(
        &op,
        k,
        opts.which,
        &SpectrumOptions {
            method: opts.method,
            seed: opts.seed,
            ..Default::default()
        },
    )?;
    let energy = energy_identity_residuals(&op, &spec.pairs)?;
    let probe = instability_probe(&op, &spec.pairs, lin)?;

    let (arg_max, lhs) = (0..lin.n_points())
        .map(|p| (p, lin.ab_norm(p)))
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let rhs = 1.0 / pc.c_p;
    let satisfied = lhs <= rhs;
    let values = spec.values();
    let gap = values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = 1e-8 * scale;
    let inflow = op.has_inflow();
    let (verdict, anomaly) = if gap < -tol {
        (Verdict::UnstableDetected, satisfied && inflow)
    } else if satisfied && inflow && gap > tol {
        (Verdict::StableByCriterion, false)
    } else {
        (Verdict::CriterionInconclusive, satisfied && inflow)
    };
    Ok(StabilityReport {
        verdict,
        discretization_anomaly: anomaly,
        criterion_lhs: lhs,
        criterion_rhs: rhs,
        criterion_margin: rhs - lhs,
        criterion_satisfied: satisfied,
        nontrivial_inflow: inflow,
        spectral_gap: gap,
        gap_tolerance: tol,
        c_p: pc.c_p,
        mu_1: pc.mu_1,
        poincare_subspace: PoincareConstant::SUBSPACE.into(),
        equilibrium: eq.clone(),
        a: lin.a().to_vec(),
        b: lin.b(arg_max).to_vec(),
        n_unknowns: op.dim(),
        k_computed: spec.pairs.len(),
        method: spec.method,
        max_residual: spec.max_residual(),
        energy_identity_residual: energy.iter().copied().fold(0.0, f64::max),
        conjugate_pairs_closed: conjugate_pairs_closed(&values, 1e-8),
        probe_hits: probe.iter().filter(|p| p.satisfied).count(),
        norm_convention: "discrete L2 with cell-volume and surface-area weights".into(),
        eigenvalues: spec
            .pairs
            .iter()
            .zip(&energy)
            .map(|(p, &e)| EigenRecord {
                re: p.value.re,
                im: p.value.im,
                residual: p.residual,
                energy_residual: e,
            })
            .collect(),
        probe,
    })
}
