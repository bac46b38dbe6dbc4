//! The analyze, simulate, poincare and sweep runs.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use porestab::mesh::{build_mesh, poincare_constant_surface, poincare_oracle, CylinderSpec};
use porestab::operators::matched_inflow;
use porestab::spectral::{stability_verdict, AnalysisOptions, StabilityReport, Which};
use porestab::state::StateField;
use porestab::time::{decay_rate, perturbed, simulate, smooth_perturbation, DecayFit, SimulationSettings};
use porestab::{Error, CSV_HEADER};

use crate::config::{RunConfig, Scenario, Setup};
use crate::manifest::{mesh_checksum, OutputDir};
use crate::CliError;

/// Run the scenario in `cfg`, writing into `out`; the manifest is written by the caller.
pub fn run(cfg: &RunConfig, out: &mut OutputDir, jobs: usize) -> Result<(), CliError> {
    match &cfg.scenario {
        Scenario::Analyze { k, which, method } => analyze(cfg, out, *k, *which, *method),
        Scenario::Simulate {
            t_end,
            dt,
            sample_every,
            delta,
            k,
        } => simulate_run(
            cfg,
            out,
            &SimulationSettings {
                t_end: *t_end,
                dt: *dt,
                sample_every: *sample_every,
            },
            *delta,
            *k,
        ),
        Scenario::Poincare { resolutions } => poincare(cfg, out, resolutions),
        Scenario::Sweep { k, .. } => sweep(cfg, out, *k, jobs),
    }
}

fn setup(cfg: &RunConfig, out: &mut OutputDir) -> Result<Setup, CliError> {
    let s = out.time("setup", || cfg.setup())?;
    out.manifest
        .mesh_checksums
        .insert("bulk".into(), mesh_checksum(&s.mesh.summary()));
    Ok(s)
}

fn analysis_options(cfg: &RunConfig, k: usize) -> AnalysisOptions {
    AnalysisOptions {
        k,
        seed: cfg.seed,
        ..Default::default()
    }
}

fn analyze(
    cfg: &RunConfig,
    out: &mut OutputDir,
    k: usize,
    which: Which,
    method: porestab::spectral::SpectrumMethod,
) -> Result<(), CliError> {
    let s = setup(cfg, out)?;
    let opts = AnalysisOptions {
        which,
        method,
        ..analysis_options(cfg, k)
    };
    let report = out.time("analysis", || stability_verdict(&s.sys, &s.mesh, &s.eq, &s.velocity, &opts))?;
    out.manifest.verdicts.insert("stability".into(), report.verdict.to_string());
    out.write("report.toml", report.to_toml()?.as_bytes())?;
    out.write_with("eigenvalues.csv", |w| report.write_eigenvalues_csv(w))?;
    out.write_with("energy.csv", |w| report.write_energy_csv(w))?;
    out.write_with("probe.csv", |w| report.write_probe_csv(w))?;
    Ok(())
}

/// Summary of a simulate run's decay fit.
#[derive(Debug, Serialize)]
struct DecaySummary {
    /// `fitted`, or `insufficient-decay` when no rate could be fitted.
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    spectral_gap: f64,
    verdict: String,
    steps: usize,
    max_ledger_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fitted_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    confidence_halfwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_start_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_len: Option<usize>,
}

fn simulate_run(
    cfg: &RunConfig,
    out: &mut OutputDir,
    settings: &SimulationSettings,
    delta: f64,
    k: usize,
) -> Result<(), CliError> {
    let s = setup(cfg, out)?;
    let g_in = matched_inflow(&s.mesh, &s.sys, &s.eq, &s.velocity)?;
    let eq = StateField::constant(&s.mesh, &s.eq);
    let state0 = perturbed(&eq, &smooth_perturbation(&s.mesh, s.sys.n_species(), cfg.seed, 1.0), delta);
    let traj = out.time("simulation", || {
        simulate(&s.sys, &s.mesh, &s.velocity, &g_in, &state0, &eq, settings)
    })?;
    out.write_with("trajectory.csv", |w| traj.write_csv(w))?;
    out.write_with("ledger.csv", |w| traj.write_ledger_csv(w))?;
    let report = out.time("analysis", || {
        stability_verdict(&s.sys, &s.mesh, &s.eq, &s.velocity, &analysis_options(cfg, k))
    })?;
    out.manifest.verdicts.insert("stability".into(), report.verdict.to_string());
    let gap = report.spectral_gap;
    let base = DecaySummary {
        status: "fitted".into(),
        reason: None,
        spectral_gap: gap,
        verdict: report.verdict.to_string(),
        steps: traj.steps,
        max_ledger_residual: traj.max_ledger_residual(),
        fitted_rate: None,
        confidence_halfwidth: None,
        ratio: None,
        tail_start_time: None,
        tail_len: None,
    };
    let summary = match decay_rate(&traj.times(), &traj.deviations(), Some(gap)) {
        Ok(DecayFit {
            times,
            fitted_rate,
            confidence_halfwidth,
            tail_start,
            tail_len,
            ratio,
            ..
        }) => DecaySummary {
            fitted_rate: Some(fitted_rate),
            confidence_halfwidth: Some(confidence_halfwidth),
            ratio,
            tail_start_time: Some(times[tail_start]),
            tail_len: Some(tail_len),
            ..base
        },
        Err(Error::InsufficientDecay(reason)) => DecaySummary {
            status: "insufficient-decay".into(),
            reason: Some(reason),
            ..base
        },
        Err(e) => return Err(e.into()),
    };
    out.manifest.verdicts.insert("decay".into(), summary.status.clone());
    let text = toml::to_string(&summary).map_err(|e| CliError::Io(format!("decay summary: {e}")))?;
    out.write("decay.toml", text.as_bytes())
}

fn poincare(cfg: &RunConfig, out: &mut OutputDir, resolutions: &[usize]) -> Result<(), CliError> {
    let g = &cfg.geometry;
    let spec = CylinderSpec::new(g.radius, g.height)?;
    let oracle = poincare_oracle(spec);
    let mut rows = Vec::new();
    for &n in resolutions {
        let mesh = build_mesh(spec, g.n_r, n, n)?;
        out.manifest
            .mesh_checksums
            .insert(format!("wall_{n}x{n}"), mesh_checksum(&mesh.summary()));
        let pc = out.time(&format!("poincare_{n}"), || poincare_constant_surface(&mesh))?;
        rows.push((n, pc.mu_1, pc.c_p, (pc.mu_1 - oracle).abs() / oracle));
    }
    out.write_with("poincare.csv", |w| {
        writeln!(w, "{CSV_HEADER}")?;
        writeln!(w, "n_theta,n_z,mu_1,c_p,oracle_mu_1,rel_error")?;
        for (n, mu, cp, err) in &rows {
            writeln!(w, "{n},{n},{mu:e},{cp:e},{oracle:e},{err:e}")?;
        }
        Ok(())
    })
}

/// One sweep grid point: the parameter values and the report or the error it produced.
struct SweepRow {
    values: Vec<f64>,
    result: Result<StabilityReport, String>,
}

fn sweep(cfg: &RunConfig, out: &mut OutputDir, k: usize, jobs: usize) -> Result<(), CliError> {
    let Scenario::Sweep { axes, .. } = &cfg.scenario else {
        unreachable!("sweep called with another scenario")
    };
    setup(cfg, out)?;
    // row-major grid, the last axis varying fastest
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    let eval = |values: &Vec<f64>| -> SweepRow {
        let point = axes
            .iter()
            .zip(values)
            .fold(cfg.clone(), |c, (a, &v)| c.with_parameter(a.parameter, v));
        let result = point.setup().map_err(|e| e.to_string()).and_then(|s| {
            stability_verdict(&s.sys, &s.mesh, &s.eq, &s.velocity, &analysis_options(cfg, k)).map_err(|e| e.to_string())
        });
        SweepRow {
            values: values.clone(),
            result,
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> = out.time("sweep", || pool.install(|| points.par_iter().map(eval).collect()));
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    out.manifest
        .verdicts
        .insert("sweep".into(), format!("{} points, {failed} failed", rows.len()));
    out.write_with("sweep.csv", |w| {
        writeln!(w, "{CSV_HEADER}")?;
        for a in axes {
            write!(w, "{},", a.parameter.name())?;
        }
        writeln!(w, "criterion_lhs,criterion_rhs,spectral_gap,verdict,error")?;
        for row in &rows {
            for v in &row.values {
                write!(w, "{v:e},")?;
            }
            match &row.result {
                Ok(r) => writeln!(
                    w,
                    "{:e},{:e},{:e},{},",
                    r.criterion_lhs, r.criterion_rhs, r.spectral_gap, r.verdict
                )?,
                Err(e) => writeln!(w, ",,,error,\"{}\"", e.replace('"', "'"))?,
            }
        }
        Ok(())
    })
}
