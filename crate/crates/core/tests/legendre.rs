use lp_ldp::legendre::*;
use lp_ldp::measures::{MeasureSpec, PExponent};
use lp_ldp::mgf::{LambdaP, PhiP, PsiPNu, SmoothConvex};
use lp_ldp::rates::{rate, RateKind};
use proptest::prelude::*;

fn fin(p: f64) -> PExponent {
    PExponent::Finite(p)
}

fn finite_conjugate(f: &dyn SmoothConvex, tau: &[f64]) -> bool {
    let r = conjugate(f, tau, None).unwrap();
    r.status == Status::Converged && r.value.is_finite()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lambda_biconjugate_is_lambda(t1 in -2.0..2.0f64, t2 in -1.0..0.2f64) {
        let f = LambdaP::new(fin(4.0)).unwrap();
        let r = biconjugate(&f, &[t1, t2]).unwrap();
        let v = f.eval(&[t1, t2]).unwrap().value;
        prop_assert!((r.value - v).abs() < 1e-6, "{} {v}", r.value);
    }

    #[test]
    fn conjugates_are_nonnegative(a in 0.05..0.95f64, t2 in 0.2..3.0f64) {
        // τ1 = a·τ2^{1/4} stays inside the Hölder region
        let tau = [a * t2.powf(0.25), t2];
        let f = LambdaP::new(fin(4.0)).unwrap();
        let r = conjugate(&f, &tau, None).unwrap();
        prop_assert_eq!(r.status, Status::Converged);
        prop_assert!(r.value >= -1e-12 && r.grad_norm_at_argmax < GRAD_TOL, "{r:?}");
    }

    #[test]
    fn phi_conjugate_is_even_in_tau1(t0 in 0.5..2.0f64, a in 0.05..0.9f64, t2 in 0.3..2.0f64) {
        let f = PhiP::new(fin(4.0)).unwrap();
        let tau1 = a * t0.sqrt() * t2.powf(0.25);
        let x = conjugate(&f, &[t0, tau1, t2], None).unwrap();
        let y = conjugate(&f, &[t0, -tau1, t2], None).unwrap();
        prop_assert!((x.value - y.value).abs() < 1e-9 * x.value.abs().max(1.0), "{} {}", x.value, y.value);
    }
}

#[test]
fn conjugates_vanish_at_the_mean_gradient() {
    let lambda = LambdaP::new(fin(4.0)).unwrap();
    let psi = PsiPNu::new(fin(4.0), &MeasureSpec::mu2()).unwrap();
    let phi = PhiP::new(fin(4.0)).unwrap();
    for f in [&lambda as &dyn SmoothConvex, &psi, &phi] {
        let mean = f.eval(&f.start()).unwrap().grad;
        let r = conjugate(f, &mean, None).unwrap();
        assert!(r.value.abs() < 1e-12, "{mean:?} {r:?}");
        assert!(r.argmax.iter().all(|x| x.abs() < 1e-8), "{r:?}");
    }
}

#[test]
fn lambda_conjugate_is_finite_only_in_the_hoelder_region() {
    let f = LambdaP::new(fin(4.0)).unwrap();
    let mut checked = 0;
    for &t1 in &[0.0f64, 0.3, 0.6, 0.9, 1.2] {
        for &t2 in &[-0.5, 0.0, 0.05, 0.2, 0.5, 1.0, 2.0] {
            let ratio = t1.powi(4) / t2;
            // the boundary band is left out; the conjugate grows without bound towards it
            if t2 > 0.0 && (0.6..=1.6).contains(&ratio) {
                continue;
            }
            let inside = t2 > 0.0 && ratio < 1.0;
            assert_eq!(finite_conjugate(&f, &[t1, t2]), inside, "τ = ({t1}, {t2})");
            checked += 1;
        }
    }
    assert!(checked >= 25);
}

#[test]
fn annealed_is_below_quenched_at_p4() {
    let a = rate(fin(4.0), &RateKind::Annealed, 0.3).unwrap();
    let q = rate(fin(4.0), &RateKind::quenched_mu2(), 0.3).unwrap();
    assert!(a <= q + 1e-6, "{a} {q}");
}

#[test]
fn quenched_infimum_reports_its_minimizer() {
    let f = PsiPNu::new(fin(4.0), &MeasureSpec::mu2()).unwrap();
    let r = rate_infimum(&f, &ContractionSpec { kind: ContractionKind::Quenched2, w: 0.3, p: fin(4.0) }).unwrap();
    let tau = r.minimizer.clone().unwrap();
    // the minimizer sits on the contraction manifold τ1 τ2^{-1/4} = w
    assert!((tau[0] * tau[1].powf(-0.25) - 0.3).abs() < 1e-9, "{tau:?}");
    let direct = conjugate(&f, &tau, None).unwrap();
    assert!((direct.value - r.value).abs() < 1e-9, "{} {}", direct.value, r.value);
    assert!(rate_infimum(&f, &ContractionSpec { kind: ContractionKind::Quenched2, w: f64::NAN, p: fin(4.0) }).is_err());
}
