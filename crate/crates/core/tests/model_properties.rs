//! Rate laws, chemical balance and the rank-one reaction Jacobian.

use faer::Mat;
use proptest::prelude::*;

use porestab::model::{
    equilibrium_chemical_balance, linearize_reaction, monomial, reaction_rate, sorption_rate, symmetric_part_spectrum,
    SpeciesParams, SpeciesSystem, SurfaceLinearization,
};
use porestab::Error;

fn system(alpha: Vec<f64>, beta: Vec<f64>, kappa_f: f64, kappa_b: f64) -> SpeciesSystem {
    let n = alpha.len();
    SpeciesSystem::new(SpeciesParams {
        alpha,
        beta,
        kappa_f,
        kappa_b,
        k_ad: vec![1.5; n],
        k_de: vec![0.5; n],
        d_bulk: vec![1.0; n],
        d_surf: vec![1.0; n],
    })
    .unwrap()
}

fn stoichiometry(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(0u8..=3, n), prop::collection::vec(0u8..=3, n))
        .prop_filter("alpha != beta, both sides present", |(a, b)| {
            a != b && a.iter().any(|&v| v > 0) && b.iter().any(|&v| v > 0)
        })
        .prop_map(|(a, b)| (a.into_iter().map(f64::from).collect(), b.into_iter().map(f64::from).collect()))
}

fn dense_symmetric(m: &Mat<f64>) -> Vec<f64> {
    m.self_adjoint_eigenvalues(faer::Side::Lower).unwrap()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #[test]
    fn stoichiometric_proportionality(
        (alpha, beta) in (2usize..=4).prop_flat_map(stoichiometry),
        kf in 0.1f64..5.0,
        kb in 0.1f64..5.0,
        c in prop::collection::vec(0.0f64..3.0, 4),
    ) {
        let n = alpha.len();
        let sys = system(alpha, beta, kf, kb);
        let a = sys.net_stoichiometry();
        let r = reaction_rate(&sys, &c[..n]).unwrap();
        let scale = r.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..n {
                prop_assert!((r[i] * a[j] - r[j] * a[i]).abs() <= 4.0 * f64::EPSILON * 3.0 * scale);
            }
        }
    }

    #[test]
    fn monomial_is_log_linear_under_scaling(
        gamma in prop::collection::vec(0u8..=3, 3),
        x in prop::collection::vec(0.1f64..3.0, 3),
        t in 0.1f64..10.0,
    ) {
        let gamma: Vec<f64> = gamma.into_iter().map(f64::from).collect();
        let order: f64 = gamma.iter().sum();
        let scaled: Vec<f64> = x.iter().map(|v| t * v).collect();
        let lhs = monomial(&scaled, &gamma).ln() - monomial(&x, &gamma).ln();
        prop_assert!((lhs - order * t.ln()).abs() <= 1e-12 * (1.0 + order * t.ln().abs()));
    }

    #[test]
    fn closed_form_symmetric_spectrum_matches_dense(
        a in prop::collection::vec(-3.0f64..3.0, 2..6),
        seed_b in prop::collection::vec(-3.0f64..3.0, 6),
        dependent in any::<bool>(),
    ) {
        let n = a.len();
        let b: Vec<f64> = if dependent { a.iter().map(|v| -0.7 * v).collect() } else { seed_b[..n].to_vec() };
        let lin = SurfaceLinearization::from_vectors(a.clone(), b.clone()).unwrap();
        let scale = lin.ab_norm(0).max(1e-300);
        let closed = sorted(symmetric_part_spectrum(&a, &b));
        let dense = sorted(dense_symmetric(&lin.s_sym(0)));
        prop_assert_eq!(closed.len(), n);
        for (c, d) in closed.iter().zip(&dense) {
            prop_assert!((c - d).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn chemical_balance_is_a_root_with_antiparallel_b(
        (alpha, beta) in (2usize..=4).prop_flat_map(stoichiometry)
            .prop_filter("unequal orders", |(a, b)| a.iter().sum::<f64>() != b.iter().sum::<f64>()),
        kf in 0.1f64..5.0,
        kb in 0.1f64..5.0,
    ) {
        let sys = system(alpha, beta, kf, kb);
        let cb = equilibrium_chemical_balance(&sys).unwrap();
        let xi = &cb.equilibrium.xi;
        let flux = kf * monomial(xi, sys.alpha());
        let r = reaction_rate(&sys, xi).unwrap();
        prop_assert!(r.iter().all(|v| v.abs() <= 1e-12 * 3.0 * flux));
        let s = sorption_rate(&sys, &cb.equilibrium.psi, xi).unwrap();
        prop_assert!(s.iter().all(|v| v.abs() <= 1e-12 * xi[0]));
        // xi_i b_i = -kappa_f xi^alpha a_i
        let lin = linearize_reaction(&sys, xi).unwrap();
        let a = sys.net_stoichiometry();
        for (i, (x, b)) in xi.iter().zip(lin.b(0)).enumerate() {
            prop_assert!((x * b + flux * a[i]).abs() <= 1e-12 * 3.0 * flux);
        }
        let top = dense_symmetric(&lin.s_sym(0)).into_iter().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(top <= 1e-12 * lin.ab_norm(0));
    }
}

#[test]
fn rate_examples() {
    let iso = system(vec![1.0, 0.0], vec![0.0, 1.0], 1.0, 1.0);
    assert_eq!(reaction_rate(&iso, &[1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
    assert_eq!(reaction_rate(&iso, &[2.0, 1.0]).unwrap(), vec![-1.0, 1.0]);
}

#[test]
fn sorption_examples() {
    let mut sys = system(vec![1.0, 0.0], vec![0.0, 1.0], 1.0, 1.0);
    sys = sys
        .with_params(|p| {
            p.k_ad = vec![1.0, 1.0];
            p.k_de = vec![1.0, 1.0];
        })
        .unwrap();
    assert_eq!(sorption_rate(&sys, &[1.0, 2.0], &[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
    let sys = sys.with_params(|p| p.k_ad = vec![2.0, 3.0]).unwrap();
    assert_eq!(sorption_rate(&sys, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), vec![1.0, 2.0]);
    assert!(matches!(sorption_rate(&sys, &[1.0], &[1.0, 1.0]), Err(Error::LengthMismatch { .. })));
}

#[test]
fn equal_rates_give_unit_gamma() {
    let sys = system(vec![2.0, 0.0], vec![0.0, 1.0], 0.7, 0.7);
    let cb = equilibrium_chemical_balance(&sys).unwrap();
    assert_eq!(cb.gamma, 1.0);
    assert_eq!(cb.equilibrium.xi, vec![1.0, 1.0]);
}

#[test]
fn dependent_vectors_have_nonpositive_symmetric_part() {
    // b = -a: spectrum {0, -2}, top eigenvalue 0
    let spec = sorted(symmetric_part_spectrum(&[1.0, -1.0], &[-1.0, 1.0]));
    assert!((spec[0] + 2.0).abs() < 1e-15 && spec[1].abs() < 1e-15);
    let dense = sorted(dense_symmetric(&SurfaceLinearization::from_vectors(vec![1.0, -1.0], vec![-1.0, 1.0]).unwrap().s_sym(0)));
    assert!((dense[0] + 2.0).abs() < 1e-14 && dense[1].abs() < 1e-14);
}

#[test]
fn zero_concentration_with_first_order_exponent_is_regular() {
    // c^alpha with alpha_k = 1 differentiates to a constant, so c_k = 0 is fine
    let sys = system(vec![1.0, 0.0], vec![0.0, 1.0], 1.0, 1.0);
    let lin = linearize_reaction(&sys, &[0.0, 0.0]).unwrap();
    assert_eq!(lin.b(0), &[-1.0, 1.0]);
}
