mod common;

use common::{expr, newton_degree};
use phibvp::certificates::{
    brouwer_degree, brouwer_degree_sampled, check_growth, check_signs, winding, CertificateError,
    SampleBox, Verdict,
};
use phibvp::homeomorphism::Homeomorphism;
use proptest::prelude::*;

#[test]
fn winding_matches_newton_sign_sum() {
    let cases = [
        ("exp(v)/2 - 1", 1.0, 3.0 * 3f64.cbrt()),
        ("exp(v)/2 - 1", 0.5, 3.0),
        ("(v - 1)*(v + 1)*(v - 0.5)", 1.0, 3.0),
        ("(v - 1)*(v + 1)*(v - 0.5) + 0.2*u", 0.7, 3.0),
        ("v - 1 + 0.5*u", 2.0, 4.0),
    ];
    for (f, t, rho) in cases {
        let f = expr(f);
        let w = brouwer_degree(&f, t, rho).unwrap();
        let oracle = newton_degree(&f, t, rho);
        assert!(
            oracle.all_converged && oracle.nondegenerate,
            "{f}: {oracle:?}"
        );
        assert_eq!(
            w.winding, oracle.degree,
            "{f} T={t}: zeros {:?}",
            oracle.zeros
        );
    }
}

#[test]
fn worked_example_certificate_chain() {
    let phi = Homeomorphism::power(4.0).unwrap();
    let f = expr("exp(v)/2 - 1");
    let signs = check_signs(&phi, &f, -1.0, 1.0, &expr("-1"), 1.0, None).unwrap();
    let rho = signs.rho_min.unwrap();
    let d = brouwer_degree(&f, 1.0, rho).unwrap();
    assert_eq!(d.winding, -1);
    let oracle = newton_degree(&f, 1.0, rho);
    assert_eq!(oracle.zeros.len(), 1);
    let (a, b, det) = oracle.zeros[0];
    assert!(a.abs() < 1e-9 && (b - 2f64.ln()).abs() < 1e-9);
    assert!((det + 1.0).abs() < 1e-6);
}

#[test]
fn degenerate_g_is_refused_for_every_radius() {
    for rho in [0.1, 1.0, 10.0] {
        assert!(matches!(
            brouwer_degree(&expr("0"), 1.0, rho),
            Err(CertificateError::BoundaryZero { .. })
        ));
    }
}

#[test]
fn constants_are_bit_reproducible() {
    let phi = Homeomorphism::power(4.0).unwrap();
    let run = || {
        check_signs(
            &phi,
            &expr("exp(v)/2 - 1"),
            -1.0,
            1.0,
            &expr("-1"),
            1.0,
            None,
        )
        .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.l.to_bits(), b.l.to_bits());
    assert_eq!(a.r.unwrap().to_bits(), b.r.unwrap().to_bits());
    assert_eq!(a.rho_min.unwrap().to_bits(), b.rho_min.unwrap().to_bits());
    assert_eq!(a.to_key_value(), b.to_key_value());
}

fn is_failed(v: &Verdict) -> bool {
    matches!(v, Verdict::FailedAt { .. })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn winding_is_stable_under_doubling(rho in 0.8f64..20.0, samples in 16usize..300) {
        let f = expr("exp(v)/2 - 1");
        let a = brouwer_degree_sampled(&f, 1.0, rho, samples).unwrap();
        let b = brouwer_degree_sampled(&f, 1.0, rho, 2 * samples).unwrap();
        prop_assert_eq!(a.winding, b.winding);
        prop_assert_eq!(a.winding, -1);
    }

    #[test]
    fn identity_winds_once(rho in 1e-6f64..1e6) {
        prop_assert_eq!(winding(|a, b| Ok((a, b)), rho, 256).unwrap().winding, 1);
    }

    #[test]
    fn growth_verdicts_are_monotone_in_the_box(
        p in -2.0f64..2.0, q in -1.0f64..1.0, hc in 0.5f64..4.0, x in 0.5f64..6.0, k in 2usize..8,
    ) {
        let phi = Homeomorphism::mean_curvature(1.0).unwrap();
        let f = expr(&format!("{p}*u + {q}*v - 1"));
        let (h, n, dn) = (expr(&format!("{hc}")), expr("u"), expr("1"));
        let samples = 2 * k + 1;
        let small = SampleBox::new(x, x, samples).unwrap();
        let big = SampleBox::new(2.0 * x, 2.0 * x, 2 * samples - 1).unwrap();
        let vs = check_growth(&phi, &f, &h, &n, &dn, 0.05, Some(small)).unwrap();
        let vb = check_growth(&phi, &f, &h, &n, &dn, 0.05, Some(big)).unwrap();
        if is_failed(&vs.verdict) {
            prop_assert!(is_failed(&vb.verdict));
        }
    }

    #[test]
    fn sign_verdicts_are_monotone_in_the_box(
        s in 0.1f64..2.0, p in -0.5f64..0.5, y in 1.5f64..6.0, k in 2usize..8,
    ) {
        let phi = Homeomorphism::power(3.0).unwrap();
        let f = expr(&format!("{s}*v + {p}*u*v"));
        let samples = 2 * k + 1;
        let small = SampleBox::new(y, y, samples).unwrap();
        let big = SampleBox::new(2.0 * y, 2.0 * y, 2 * samples - 1).unwrap();
        let c = expr("-10");
        let vs = check_signs(&phi, &f, -1.0, 1.0, &c, 1.0, Some(small)).unwrap();
        let vb = check_signs(&phi, &f, -1.0, 1.0, &c, 1.0, Some(big)).unwrap();
        if is_failed(&vs.verdict) {
            prop_assert!(is_failed(&vb.verdict));
        }
    }
}
