//! Assembled operator, energy forms and the stability analysis built on them.

mod common;

use faer::c64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::Pore;
use porestab::mesh::{build_mesh, surface_laplacian, CylinderSpec};
use porestab::model::{linearize_reaction, Equilibrium, SurfaceLinearization};
use porestab::operators::{apply_a0, assemble_a0, energy_forms, energy_forms_real};
use porestab::spectral::{
    compute_spectrum_with, energy_identity_check, matrix_spectrum, stability_verdict, stability_verdict_with,
    AnalysisOptions, Eigenpair, SpectrumMethod, SpectrumOptions, Verdict, Which,
};
use porestab::Error;

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn dense_opts() -> SpectrumOptions {
    SpectrumOptions {
        method: SpectrumMethod::Dense,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn apply_is_linear(seed in any::<u64>(), s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let p = Pore::ab_mesh(3, 4, 3, 1.3, 0.8);
        let lin = linearize_reaction(&p.sys, &p.eq.xi).unwrap();
        let op = assemble_a0(&p.mesh, &p.sys, &p.velocity, &lin).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (random_vec(&mut rng, op.dim()), random_vec(&mut rng, op.dim()));
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| s * a + t * b).collect();
        let lhs = apply_a0(&op, &combo).unwrap();
        let (ax, ay) = (apply_a0(&op, &x).unwrap(), apply_a0(&op, &y).unwrap());
        let scale = lhs.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for i in 0..op.dim() {
            prop_assert!((lhs[i] - s * ax[i] - t * ay[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn upwind_advection_is_dissipative(seed in any::<u64>(), w in 0.0f64..5.0, plug in any::<bool>()) {
        let p = Pore::ab_mesh(4, 6, 4, 1.0, 0.0);
        let profile = if plug {
            porestab::operators::VelocityProfile::Plug
        } else {
            porestab::operators::VelocityProfile::Poiseuille
        };
        let velocity = porestab::operators::build_velocity(&p.mesh, w, profile).unwrap();
        let op = assemble_a0(&p.mesh, &p.sys, &velocity, &SurfaceLinearization::zero(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let forms = energy_forms_real(&op, &random_vec(&mut rng, op.dim())).unwrap();
        let b = forms.breakdown;
        prop_assert!(b.advection >= -1e-10 * b.magnitude());
        prop_assert!(b.total() >= -1e-10 * b.magnitude());
    }
}

#[test]
fn apply_zero_is_zero_and_length_is_checked() {
    let p = Pore::ab(4, 1.0, 1.0);
    let op = assemble_a0(&p.mesh, &p.sys, &p.velocity, &linearize_reaction(&p.sys, &p.eq.xi).unwrap()).unwrap();
    assert!(apply_a0(&op, &vec![0.0; op.dim()]).unwrap().iter().all(|&v| v == 0.0));
    assert!(apply_a0(&op, &[1.0]).is_err());
}

#[test]
fn constant_pairs_are_never_eigenvectors_with_reaction() {
    for (k_ad, w) in [(0.5, 0.0), (1.0, 1.0), (2.0, 0.5)] {
        let p = Pore::ab(4, k_ad, w);
        let lin = linearize_reaction(&p.sys, &p.eq.xi).unwrap();
        let op = assemble_a0(&p.mesh, &p.sys, &p.velocity, &lin).unwrap();
        for xi in [[1.0, 1.0], [1.0, -1.0], [0.3, 2.0]] {
            let eq = Equilibrium::sorption_matched(&p.sys, vec![1.0, 1.0]).unwrap();
            let l = op.layout();
            let mut v = vec![0.0; op.dim()];
            for s in 0..2 {
                let psi = eq.psi[s] * xi[s];
                (0..l.n_bulk).for_each(|c| v[l.bulk(s, c)] = psi);
                (0..l.n_surface).for_each(|c| v[l.surface(s, c)] = xi[s]);
            }
            let av = apply_a0(&op, &v).unwrap();
            // best Rayleigh fit lambda v leaves a residual of the same order as A v
            let lambda = av.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / v.iter().map(|b| b * b).sum::<f64>();
            let res: f64 = av.iter().zip(&v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
            let norm: f64 = av.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(res > 1e-3 * norm.max(1e-300) && norm > 0.0, "k_ad={k_ad} w={w} xi={xi:?}");
        }
    }
}

#[test]
fn dissipative_part_has_nonnegative_spectrum() {
    let p = Pore::ab(8, 1.0, 0.0);
    let op = assemble_a0(&p.mesh, &p.sys, &p.velocity, &SurfaceLinearization::zero(2)).unwrap();
    let spec = compute_spectrum_with(&op, 20, Which::SmallestReal, &dense_opts()).unwrap();
    assert_eq!(spec.method, SpectrumMethod::Dense);
    assert!(spec.pairs.iter().all(|e| e.value.re >= -1e-8 && e.residual <= 1e-8));
    // one constant pair per species spans the kernel
    assert_eq!(spec.pairs.iter().filter(|e| e.value.norm() < 1e-8).count(), 2);
}

#[test]
fn shifted_surface_laplacian_matches_separation_of_variables() {
    // decoupled heat equation on the lateral surface with desorption shift k_de
    let (r, h, nt, nz, k_de) = (1.0, 2.0, 24, 10, 0.7);
    let mesh = build_mesh(CylinderSpec::new(r, h).unwrap(), 2, nt, nz).unwrap();
    let op = surface_laplacian(&mesh).shifted(k_de, -1.0).unwrap();
    let spec = matrix_spectrum(&op, 15, Which::SmallestReal, &dense_opts()).unwrap();
    let (ds, dz) = (2.0 * std::f64::consts::PI * r / nt as f64, h / nz as f64);
    let mut exact: Vec<f64> = (0..nt)
        .flat_map(|m| (0..nz).map(move |k| (m, k)))
        .map(|(m, k)| {
            let th = (2.0 / ds * (std::f64::consts::PI * m as f64 / nt as f64).sin()).powi(2);
            let zz = (2.0 / dz * (std::f64::consts::PI * k as f64 / (2.0 * nz as f64)).sin()).powi(2);
            th + zz + k_de
        })
        .collect();
    exact.sort_by(f64::total_cmp);
    for (e, x) in spec.pairs.iter().zip(&exact) {
        assert!((e.value.re - x).abs() < 1e-10 && e.value.im.abs() < 1e-10, "{} vs {x}", e.value);
    }
    // the continuum Neumann values are approached within grid error
    assert!((exact[0] - k_de).abs() < 1e-12);
    let continuum = (1.0 / (r * r)).min((std::f64::consts::PI / h).powi(2)) + k_de;
    assert!((exact[1] - continuum).abs() / continuum < 0.01);
}

fn match_sets(a: &[Eigenpair], b: &[Eigenpair], tol: f64) {
    for x in a {
        let d = b.iter().map(|y| (x.value - y.value).norm()).fold(f64::INFINITY, f64::min);
        assert!(d <= tol * x.value.norm().max(1.0), "{} has no partner within {tol}", x.value);
    }
}

#[test]
fn reduced_and_dense_spectra_agree() {
    let p = Pore::ab_mesh(3, 6, 4, 1.5, 1.0);
    let lin = linearize_reaction(&p.sys, &p.eq.xi).unwrap();
    let op = assemble_a0(&p.mesh, &p.sys, &p.velocity, &lin).unwrap();
    let n = op.dim();
    let dense = compute_spectrum_with(&op, n, Which::SmallestReal, &dense_opts()).unwrap();
    let blocks = compute_spectrum_with(
        &op,
        n,
        Which::SmallestReal,
        &SpectrumOptions {
            method: SpectrumMethod::FourierBlocks,
            ..Default::default()
        },
    )
    .unwrap();
    let si = compute_spectrum_with(
        &op,
        10,
        Which::SmallestReal,
        &SpectrumOptions {
            method: SpectrumMethod::ShiftInvert,
            ..Default::default()
        },
    )
    .unwrap();
    match_sets(&blocks.pairs, &dense.pairs, 1e-8);
    match_sets(&dense.pairs, &blocks.pairs, 1e-8);
    match_sets(&si.pairs, &dense.pairs, 1e-8);
    assert!(blocks.max_residual() <= 1e-8 && si.max_residual() <= 1e-8);
}

#[test]
fn energy_identity_holds_for_eigenpairs_only() {
    let p = Pore::ab(5, 1.0, 1.0);
    let lin = linearize_reaction(&p.sys, &p.eq.xi).unwrap();
    let op = assemble_a0(&p.mesh, &p.sys, &p.velocity, &lin).unwrap();
    let spec = compute_spectrum_with(&op, 12, Which::SmallestReal, &SpectrumOptions::default()).unwrap();
    let base = energy_identity_check(&op, &spec.pairs).unwrap();
    assert!(base <= 1e-6);

    let scaled: Vec<Eigenpair> = spec
        .pairs
        .iter()
        .map(|e| Eigenpair {
            value: e.value,
            vector: e.vector.iter().map(|v| v * 10.0).collect(),
            residual: e.residual,
        })
        .collect();
    assert!((energy_identity_check(&op, &scaled).unwrap() - base).abs() <= 1e-9);

    // a random state paired with a computed eigenvalue breaks the identity
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let fake = Eigenpair {
        value: spec.pairs[0].value,
        vector: random_vec(&mut rng, op.dim()).into_iter().map(|v| c64::new(v, 0.0)).collect(),
        residual: 0.0,
    };
    assert!(energy_identity_check(&op, &[fake]).unwrap() > 1e-3);
    let zero = energy_forms(&op, &vec![c64::new(0.0, 0.0); op.dim()]).unwrap();
    assert_eq!((zero.f_omega, zero.f_sigma, zero.norm_bulk, zero.norm_surface), (c64::new(0.0, 0.0), c64::new(0.0, 0.0), 0.0, 0.0));
}

#[test]
fn verdict_examples() {
    // criterion holds with inflow: stable with positive gap and closed conjugate pairs
    let p = Pore::ab(6, 1.0, 1.0);
    let r = stability_verdict(&p.sys, &p.mesh, &p.eq, &p.velocity, &AnalysisOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::StableByCriterion);
    assert!(r.spectral_gap > 0.0 && r.conjugate_pairs_closed && r.probe_hits == 0);
    let toml = r.to_toml().unwrap();
    assert!(toml.contains("verdict = \"stable-by-criterion\""));

    // no inflow and no reaction: the sorption-matched constants are a kernel
    let p = Pore::ab(6, 1.0, 0.0);
    let zero = SurfaceLinearization::zero(2);
    let r = stability_verdict_with(&p.sys, &p.mesh, &p.eq, &p.velocity, &zero, &AnalysisOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::CriterionInconclusive);
    assert!(!r.nontrivial_inflow && r.spectral_gap.abs() <= r.gap_tolerance);

    // strongly destabilized Jacobian
    let p = Pore::ab(6, 1.0, 1.0);
    let lin = linearize_reaction(&p.sys, &p.eq.xi).unwrap().scaled_b(-20.0);
    let r = stability_verdict_with(&p.sys, &p.mesh, &p.eq, &p.velocity, &lin, &AnalysisOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::UnstableDetected);
    assert!(!r.criterion_satisfied && r.spectral_gap < 0.0);
    assert!(r.probe.iter().filter(|q| q.satisfied).all(|q| q.eigenvalue_re < 0.0) && r.probe_hits > 0);

    // negative equilibrium
    let bad = Equilibrium {
        psi: vec![1.0, -1.0],
        xi: vec![1.0, 1.0],
    };
    assert!(matches!(
        stability_verdict(&p.sys, &p.mesh, &bad, &p.velocity, &AnalysisOptions::default()),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn eigenvalue_csv_has_versioned_header() {
    let p = Pore::ab(4, 1.0, 1.0);
    let opts = AnalysisOptions {
        k: 5,
        ..Default::default()
    };
    let r = stability_verdict(&p.sys, &p.mesh, &p.eq, &p.velocity, &opts).unwrap();
    let mut buf = Vec::new();
    r.write_eigenvalues_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], porestab::CSV_HEADER);
    assert_eq!(lines[1], "re,im,residual");
    assert_eq!(lines.len(), 7);
}
