use lp_ldp::measures::{density_mu_p, MeasureSpec, PExponent};
use lp_ldp::mgf::*;
use lp_ldp::numeric::quadrature::{integrate_pieces, Tolerance};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fin(p: f64) -> PExponent {
    PExponent::Finite(p)
}

fn value(f: &dyn SmoothConvex, t: &[f64]) -> f64 {
    f.eval(t).unwrap().value
}

/// Hessian by central differences of the analytic gradient, symmetrized.
fn fd_hessian(f: &dyn SmoothConvex, t: &[f64]) -> Vec<f64> {
    let d = t.len();
    let mut h = vec![0.0; d * d];
    for j in 0..d {
        let step = 1e-5 * t[j].abs().max(1.0);
        let mut a = t.to_vec();
        let mut b = t.to_vec();
        a[j] += step;
        b[j] -= step;
        let (ga, gb) = (f.eval(&a).unwrap().grad, f.eval(&b).unwrap().grad);
        for i in 0..d {
            h[i * d + j] = (ga[i] - gb[i]) / (2.0 * step);
        }
    }
    for i in 0..d {
        for j in 0..i {
            let m = 0.5 * (h[i * d + j] + h[j * d + i]);
            h[i * d + j] = m;
            h[j * d + i] = m;
        }
    }
    h
}

fn min_eigenvalue(h: &[f64], d: usize) -> f64 {
    let m = nalgebra::DMatrix::from_row_slice(d, d, h);
    m.symmetric_eigenvalues().min()
}

/// A random point with `t2 ∈ [lo2, hi2]` and the rest in `[-r, r]`.
fn point(rng: &mut ChaCha8Rng, d: usize, r: f64, lo2: f64, hi2: f64) -> Vec<f64> {
    let mut t: Vec<f64> = (0..d).map(|_| r * (2.0 * rng.random::<f64>() - 1.0)).collect();
    t[d - 1] = lo2 + (hi2 - lo2) * rng.random::<f64>();
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lambda_is_even_in_t1(t1 in -4.0..4.0f64, t2 in -2.0..0.24f64) {
        let f = LambdaP::new(fin(4.0)).unwrap();
        let (a, b) = (value(&f, &[t1, t2]), value(&f, &[-t1, t2]));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} {b}");
    }

    #[test]
    fn phi_is_even_in_t1(t0 in -1.0..0.45f64, t1 in -2.0..2.0f64, t2 in -1.0..0.24f64) {
        let f = PhiP::new(fin(4.0)).unwrap();
        let (a, b) = (value(&f, &[t0, t1, t2]), value(&f, &[t0, -t1, t2]));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} {b}");
    }

    #[test]
    fn lambda_is_non_decreasing_in_t2(p in 1.2..6.0f64, t1 in -3.0..3.0f64, u in 0.0..0.9f64, v in 0.0..0.9f64) {
        let f = LambdaP::new(fin(p)).unwrap();
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        // map [0, 0.9] onto t2 ∈ [-2, 0.9/p]
        let t2 = |s: f64| -2.0 + s * (2.0 + 1.0 / p);
        let (a, b) = (value(&f, &[t1, t2(lo)]), value(&f, &[t1, t2(hi)]));
        prop_assert!(b >= a - 1e-12 * a.abs().max(1.0), "{a} {b}");
    }

    #[test]
    fn domain_flag_matches_value(p in 1.5..5.0f64, t1 in -2.0..2.0f64, t2 in -1.0..1.0f64) {
        let f = LambdaP::new(fin(p)).unwrap();
        let inside = MgfPoint2::new(t1, t2).interior(fin(p));
        prop_assert_eq!(inside, t2 < 1.0 / p);
        prop_assert_eq!(value(&f, &[t1, t2]).is_finite(), inside);
    }
}

#[test]
fn hessians_are_positive_semidefinite() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let lambda = LambdaP::new(fin(4.0)).unwrap();
    let psi = PsiPNu::new(fin(4.0), &MeasureSpec::mu2()).unwrap();
    let phi = PhiP::new(fin(4.0)).unwrap();
    for _ in 0..100 {
        let t = point(&mut rng, 2, 2.0, -1.0, 0.2);
        for f in [&lambda as &dyn SmoothConvex, &psi] {
            let h = fd_hessian(f, &t);
            assert!(min_eigenvalue(&h, 2) >= -1e-6, "{t:?} {h:?}");
        }
        let t = point(&mut rng, 3, 1.0, -1.0, 0.2);
        let t = [0.4 * t[0], t[1], t[2]];
        let h = fd_hessian(&phi, &t);
        assert!(min_eigenvalue(&h, 3) >= -1e-6, "{t:?} {h:?}");
    }
}

#[test]
fn psi_is_dominated_by_lambda() {
    let lambda = LambdaP::new(fin(4.0)).unwrap();
    let psi = PsiPNu::new(fin(4.0), &MeasureSpec::mu2()).unwrap();
    for &t2 in &[-1.0, -0.2, 0.0, 0.1, 0.2] {
        for &t1 in &[-3.0, -1.0, -0.3, 0.3, 1.0, 3.0] {
            let (a, b) = (value(&psi, &[t1, t2]), value(&lambda, &[t1, t2]));
            assert!(a <= b - 1e-6, "t = ({t1}, {t2}): Ψ {a} Λ {b}");
        }
        // the gap is O(t1⁴) near zero
        let (a, b) = (value(&psi, &[0.05, t2]), value(&lambda, &[0.05, t2]));
        assert!(a < b, "{a} {b}");
        let (a, b) = (value(&psi, &[0.0, t2]), value(&lambda, &[0.0, t2]));
        assert!((a - b).abs() < 1e-10, "{a} {b}");
    }
}

/// `log ∫∫ exp(t0 z² + t1 z y + t2 |y|^p) φ(z) f(y) dz dy` by nested adaptive quadrature;
/// `log_f` is the log-density of `f`.
fn phi_tensor(log_f: impl Fn(f64) -> f64, ybreaks: &[f64], t0: f64, t1: f64, t2: f64, p: f64) -> f64 {
    let tol = Tolerance { abs: 1e-15, rel: 1e-12, ..Tolerance::default() };
    let c = (2.0 * std::f64::consts::PI).sqrt();
    let outer = integrate_pieces(
        |y| {
            let centre = t1 * y / (1.0 - 2.0 * t0);
            let zb: Vec<f64> = [-60.0, -20.0, -5.0, 0.0, 5.0, 20.0, 60.0].iter().map(|s| centre + s).collect();
            let inner = integrate_pieces(|z| [((t0 - 0.5) * z * z + t1 * z * y).exp() / c], &zb, tol).value[0];
            [inner * (t2 * y.abs().powf(p) + log_f(y)).exp()]
        },
        ybreaks,
        tol,
    );
    outer.value[0].ln()
}

#[test]
fn quadratic_reductions_match_tensor_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let phi = PhiP::new(fin(4.0)).unwrap();
    let uniform = MeasureSpec::UniformInterval { a: -1.0, b: 1.0 };
    let phi_u = PhiGamma::new(&uniform).unwrap();
    let log_z4 = density_mu_p(fin(4.0), 0.0).ln();
    let ybreaks = [-9.0, -3.0, -1.0, 0.0, 1.0, 3.0, 9.0];
    for _ in 0..50 {
        let (t0, t1, t2) = (-1.0 + 1.3 * rng.random::<f64>(), 2.0 * rng.random::<f64>() - 1.0, -1.0 + 1.15 * rng.random::<f64>());
        let oracle = phi_tensor(|y| log_z4 - 0.25 * y.powi(4), &ybreaks, t0, t1, t2, 4.0);
        let v = value(&phi, &[t0, t1, t2]);
        assert!((v - oracle).abs() < 1e-6, "Φ_4({t0}, {t1}, {t2}) = {v}, tensor {oracle}");
        let oracle = phi_tensor(|_| -std::f64::consts::LN_2, &[-1.0, 0.0, 1.0], t0, t1, 0.0, 1.0);
        let v = value(&phi_u, &[t0, t1]);
        assert!((v - oracle).abs() < 1e-6, "Φ_U({t0}, {t1}) = {v}, tensor {oracle}");
    }
}

#[test]
fn lambda_conjugate_domain_hint_is_the_hoelder_region() {
    let f = LambdaP::new(fin(4.0)).unwrap();
    assert_eq!(f.conjugate_domain(&[0.5, 0.1]), Some(true));
    assert_eq!(f.conjugate_domain(&[0.6, 0.1]), Some(false));
    assert_eq!(f.conjugate_domain(&[0.0, 0.0]), Some(false));
    assert_eq!(f.conjugate_domain(&[0.0, -1.0]), Some(false));
    // the mean gradient (0, 1) lies inside
    let g = f.eval(&[0.0, 0.0]).unwrap().grad;
    assert_eq!(f.conjugate_domain(&g), Some(true));
}

#[test]
fn gradients_at_origin_are_the_mean_point() {
    let phi = phi_p(fin(4.0), MgfPoint3::new(0.0, 0.0, 0.0)).unwrap();
    let g = phi.gradient.unwrap();
    assert!((g[0] - 1.0).abs() < 1e-10 && g[1].abs() < 1e-12 && (g[2] - 1.0).abs() < 1e-10, "{g:?}");
    // E|Y|^3 under μ_3 is 1
    let lam = lambda_p(fin(3.0), MgfPoint2::new(0.0, 0.0)).unwrap();
    let g = lam.gradient.unwrap();
    assert!(g[0].abs() < 1e-12 && (g[1] - 1.0).abs() < 1e-10, "{g:?}");
}

#[test]
fn psi_rejects_p_one_and_infinity() {
    assert!(PsiPNu::new(fin(1.0), &MeasureSpec::mu2()).is_err());
    assert!(PsiPNu::new(PExponent::Infinite, &MeasureSpec::mu2()).is_err());
    assert!(psi_p_nu(fin(1.0), &MeasureSpec::mu2(), MgfPoint2::new(0.3, 0.0)).is_err());
}
