use lp_ldp::legendre::conjugate;
use lp_ldp::measures::{default_grid, MeasureSpec, PExponent};
use lp_ldp::rates::*;

fn fin(p: f64) -> PExponent {
    PExponent::Finite(p)
}

#[test]
fn p2_minimizer_is_gaussian() {
    let grid = default_grid();
    let s = variational_annealed(&Family::P { p: 2.0 }, 0.5, &grid).unwrap();
    assert!((s.value - j2(0.5)).abs() < 2e-3, "{} {}", s.value, j2(0.5));
    assert!(s.kkt_residual < 1e-6, "{}", s.kkt_residual);
    let (pts, w) = s.minimizer.atoms().unwrap();
    let (_, mu) = MeasureSpec::mu2().discretize(&grid).unwrap().atoms().unwrap();
    let d = wasserstein1_grid(&pts, &w, &mu);
    assert!(d < 0.05, "W1 to discretized μ_2: {d}");
    assert!(s.entropy.second_moment <= 1.0 + 1e-9);
    let total: f64 = w.iter().sum();
    assert!((total - 1.0).abs() < 1e-12 && w.iter().all(|x| *x >= 0.0));
}

#[test]
fn objective_trace_does_not_increase() {
    let s = variational_annealed(&Family::P { p: 4.0 }, 0.3, &default_grid()).unwrap();
    let t = &s.objective_trace;
    assert!(t.windows(2).all(|x| x[1] <= x[0] + 1e-12), "{t:?}");
    assert_eq!(*t.last().unwrap(), s.value);
}

#[test]
fn zero_level_costs_nothing() {
    let s = variational_annealed(&Family::P { p: 4.0 }, 0.0, &default_grid()).unwrap();
    // the grid minimum of 𝕙 under m2 ≤ 1 is only zero up to discretization
    assert!(s.value.abs() < 1e-6, "{}", s.value);
}

#[test]
fn minimax_conjugate_edge_cases() {
    let grid = default_grid();
    // (0, 1) is the mean point of every admissible ν with m_2 ≤ 1
    let s = minimax_conjugate(fin(4.0), 0.0, 1.0, &grid).unwrap();
    assert!(s.value.abs() < 1e-6, "{}", s.value);
    for (t1, t2) in [(0.3, -0.1), (0.5, 0.0), (0.9, 0.5)] {
        let s = minimax_conjugate(fin(4.0), t1, t2, &grid).unwrap();
        assert_eq!(s.value, f64::INFINITY, "τ = ({t1}, {t2})");
    }
    assert!(minimax_conjugate(PExponent::Infinite, 0.1, 1.0, &grid).is_err());
}

#[test]
fn minimax_agrees_with_conjugate_of_the_varadhan_dual() {
    let grid = default_grid();
    let family = Family::P { p: 4.0 };
    let dual = VaradhanDual::new(&family, &grid).unwrap();
    for tau in [[0.1, 0.8], [0.2, 1.0], [0.3, 1.1], [0.0, 0.7], [0.4, 1.3]] {
        let a = minimax_conjugate_family(&family, &tau, &grid).unwrap();
        let b = conjugate(&dual, &tau, None).unwrap();
        assert!((a.value - b.value).abs() < 5e-3, "τ = {tau:?}: minimax {} dual {}", a.value, b.value);
    }
}

#[test]
fn uniform_product_witness() {
    // μ_∞ products: w = 0.83 exceeds m_1(μ_2) ≈ 0.798 but not m_1 of the uniform law on [−√3, √3]
    let grid = default_grid();
    let family = Family::Gamma { gamma: MeasureSpec::mu_p(PExponent::Infinite) };
    let s3 = 3f64.sqrt();
    let mu = MeasureSpec::mu2().discretize(&grid).unwrap();
    let uni = MeasureSpec::UniformInterval { a: -s3, b: s3 }.discretize(&grid).unwrap();
    // both measures have finite 𝕙, so infinity comes from the contraction alone
    assert!(entropy_h(&mu).unwrap().value.is_finite() && entropy_h(&uni).unwrap().value.is_finite());
    assert_eq!(variational_objective(&family, 0.83, &mu).unwrap(), f64::INFINITY);
    let v = variational_objective(&family, 0.83, &uni).unwrap();
    assert!(v.is_finite() && v > 0.0, "{v}");
}
