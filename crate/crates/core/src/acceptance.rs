//! The self-test battery: a quadrature preflight followed by ten numbered criteria. Each check
//! pairs the library computation with a route written independently here (closed forms,
//! separate quadrature, exact marginals, seeded Monte-Carlo) and reports pass/fail with detail.

use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::Serialize;

use crate::error::Result;
use crate::legendre::{biconjugate, Status};
use crate::mc::{estimate_tail, gc_report, DirSpec, DirectionKind, DirectionSequence, Method};
use crate::measures::{default_grid, sample_ball, sample_sphere, MeasureSpec, MuPSampler, PExponent, QuadratureRule};
use crate::mgf::{LambdaP, PhiP, PsiPNu, SmoothConvex};
use crate::numeric::quadrature::{integrate, integrate_pieces, Tolerance};
use crate::numeric::stats::{ks_pvalue, ks_statistic, pearson};
use crate::rates::{j2, rate, tail_product_exponent, variational_annealed, Family, RateKind, SpeedSpec};

/// Identifier and one-line title of every check, in run order.
pub const CHECKS: [(&str, &str); 11] = [
    ("quadrature-preflight", "μ_2 quadrature rule reproduces Gaussian moments"),
    ("p2-equalities", "p=2: annealed = quenched(μ_2) = J_2"),
    ("sub2-closed-form", "p<2 annealed closed form and product tail exponent"),
    ("atypicality", "quenched vs Cramér ordering for p=4, 1.5, 2"),
    ("variational", "variational formula vs Legendre annealed rate, p=4"),
    ("duality", "biconjugates and gradients of Λ_4, Ψ_{4,μ_2}, Φ_4"),
    ("curvature", "sign of d²/dt² Λ_p(√t, t2)"),
    ("samplers", "ball radius uniformity, sphere moments, norm independence"),
    ("mc-vs-rate", "direct MC slope vs J_2, p=2, e1, n=100"),
    ("glivenko-cantelli", "W_1(L_n, μ_2) decreasing for typical directions"),
    ("p-inf-witness", "p=∞ non-Gaussian witness at w=0.83"),
];

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckReport {
    pub fn line(&self) -> String {
        format!("[{}] {:<22} {:>8.2}s  {}", if self.passed { "PASS" } else { "FAIL" }, self.id, self.seconds, self.detail)
    }
}

/// Inputs that can be swapped to exercise failure paths.
#[derive(Clone, Debug)]
pub struct Settings {
    pub gaussian_rule: QuadratureRule,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { gaussian_rule: QuadratureRule::gaussian() }
    }
}

/// Runs one check by id; unknown ids and solver errors surface as `Err`.
pub fn run_check(id: &str, settings: &Settings) -> Result<CheckReport> {
    let title = CHECKS
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, t)| t.to_string())
        .ok_or_else(|| crate::Error::domain(format!("unknown check '{id}'")))?;
    let start = Instant::now();
    let (passed, detail) = match id {
        "quadrature-preflight" => quadrature_preflight(&settings.gaussian_rule)?,
        "p2-equalities" => p2_equalities()?,
        "sub2-closed-form" => sub2_closed_form()?,
        "atypicality" => atypicality()?,
        "variational" => variational()?,
        "duality" => duality()?,
        "curvature" => curvature()?,
        "samplers" => samplers()?,
        "mc-vs-rate" => mc_vs_rate()?,
        "glivenko-cantelli" => glivenko_cantelli()?,
        "p-inf-witness" => p_inf_witness()?,
        _ => unreachable!(),
    };
    Ok(CheckReport { id: id.to_string(), title, passed, detail, seconds: start.elapsed().as_secs_f64() })
}

/// Runs the given checks in order; a check that errors is reported as failed.
pub fn run_all(ids: &[&str], settings: &Settings) -> Vec<CheckReport> {
    ids.iter()
        .map(|id| {
            let start = Instant::now();
            run_check(id, settings).unwrap_or_else(|e| CheckReport {
                id: id.to_string(),
                title: String::new(),
                passed: false,
                detail: format!("error: {e}"),
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

fn fin(p: f64) -> PExponent {
    PExponent::Finite(p)
}

fn tenths(from: usize) -> Vec<f64> {
    (from..10).map(|k| k as f64 / 10.0).collect()
}

fn double_factorial(k: i32) -> f64 {
    (1..=k).rev().step_by(2).map(|x| x as f64).product::<f64>().max(1.0)
}

fn quadrature_preflight(rule: &QuadratureRule) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for k in 0..=10 {
        let m = rule.integrate(|x| x.powi(k));
        let exact = if k % 2 == 1 { 0.0 } else { double_factorial(k - 1) };
        worst = worst.max((m - exact).abs());
    }
    // Gaussian log-mgf t²/2 through the rule
    for t in [0.5, 1.0, 2.0] {
        worst = worst.max((rule.integrate(|x| (t * x).exp()).ln() - 0.5 * t * t).abs());
    }
    Ok((worst <= 1e-10, format!("max moment/mgf error {worst:.2e} (tol 1e-10)")))
}

fn p2_equalities() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for w in tenths(0) {
        let oracle = -0.5 * (1.0 - w * w).ln();
        let a = rate(fin(2.0), &RateKind::Annealed, w)?;
        let q = rate(fin(2.0), &RateKind::quenched_mu2(), w)?;
        worst = worst.max((a - oracle).abs()).max((q - oracle).abs());
    }
    Ok((worst <= 1e-4, format!("max |I - J_2| = {worst:.2e} over w=0..0.9 (tol 1e-4)")))
}

fn sub2_closed_form() -> Result<(bool, String)> {
    let mut worst_rel: f64 = 0.0;
    for p in [1.0, 1.25, 1.5, 1.9] {
        let r = 2.0 * p / (2.0 + p);
        for w in tenths(1) {
            let v = rate(fin(p), &RateKind::AnnealedSub2, w)?;
            let oracle = w.powf(r) / r;
            worst_rel = worst_rel.max((v - oracle).abs() / oracle);
        }
    }
    // p = 1: P(YZ ≥ t) = ∫_0^∞ φ(z) e^{−t/z} dz for Laplace Y, integrated around the mode z = t^{1/3}
    let t: f64 = 40.0;
    let e = tail_product_exponent(1.0, t)?;
    let zm = t.powf(1.0 / 3.0);
    let hm = -0.5 * zm * zm - t / zm;
    let ln_phi = -0.5 * (2.0 * std::f64::consts::PI).ln();
    let r = integrate_pieces(|z| [(-0.5 * z * z - t / z - hm).exp()], &[0.05 * zm, zm, 6.0 * zm], Tolerance::default());
    let oracle = (ln_phi + hm + r.value[0].ln()) / t.powf(2.0 / 3.0);
    let ok = worst_rel <= 4.0 * f64::EPSILON && (e - -1.5).abs() <= 0.15 && (e - oracle).abs() <= 1e-8;
    Ok((ok, format!("closed form rel err {worst_rel:.1e}; exponent(p=1,t=40) = {e:.6} (oracle {oracle:.6}, target -1.5 ± 0.15)")))
}

fn atypicality() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [4.0, 1.5, 2.0] {
        let mut gaps = Vec::new();
        for w in tenths(1) {
            let q = rate(fin(p), &RateKind::quenched_mu2(), w)?;
            let c = rate(fin(p), &RateKind::Cramer, w)?;
            let gap = if q.is_infinite() && c.is_finite() { f64::INFINITY } else { q - c };
            let good = match p {
                4.0 => gap >= 1e-4,
                1.5 => gap <= -1e-4,
                _ => gap.abs() <= 1e-4,
            };
            if !good {
                ok = false;
                parts.push(format!("p={p} w={w:.1}: I^q - I^cr = {gap:.3e}"));
            }
            gaps.push(gap);
        }
        if p == 4.0 || p == 1.5 {
            // the two rates share their w² coefficient, so the gap grows like w⁴ near 0
            let ratio = gaps[1] / gaps[0];
            let m2 = MeasureSpec::mu_p(fin(p)).second_moment();
            let q1 = rate(fin(p), &RateKind::quenched_mu2(), 0.1)?;
            let c1 = rate(fin(p), &RateKind::Cramer, 0.1)?;
            parts.push(format!(
                "p={p} gap(0.2)/gap(0.1) = {ratio:.1}, at w=0.1 I^q {q1:.8} I^cr {c1:.8} vs common w²/(2m2) {:.8}",
                0.01 / (2.0 * m2)
            ));
        }
    }
    let detail = if ok { "ordering holds on w=0.1..0.9".to_string() } else { format!("violations: {}", parts.join("; ")) };
    Ok((ok, detail))
}

fn variational() -> Result<(bool, String)> {
    let grid = default_grid();
    let family = Family::P { p: 4.0 };
    let mut ok = true;
    let mut parts = Vec::new();
    for w in [0.2, 0.4] {
        let v = variational_annealed(&family, w, &grid)?;
        let a = rate(fin(4.0), &RateKind::Annealed, w)?;
        let diff = (v.value - a).abs();
        ok &= diff <= 5e-3 && v.kkt_residual < 1e-6;
        parts.push(format!("w={w}: grid {:.8} vs Legendre {a:.8} (kkt {:.1e})", v.value, v.kkt_residual));
    }
    let mut worst = f64::NEG_INFINITY;
    for w in tenths(1) {
        let a = rate(fin(4.0), &RateKind::Annealed, w)?;
        let q = rate(fin(4.0), &RateKind::quenched_mu2(), w)?;
        if q.is_finite() {
            worst = worst.max(a - q);
        }
    }
    ok &= worst <= 1e-6;
    parts.push(format!("max(I^a - I^q) = {worst:.2e}"));
    Ok((ok, parts.join("; ")))
}

fn fd_gradient(f: &dyn SmoothConvex, t: &[f64]) -> Result<Vec<f64>> {
    (0..t.len())
        .map(|i| {
            let h = 1e-5 * t[i].abs().max(1.0);
            let mut a = t.to_vec();
            let mut b = t.to_vec();
            a[i] += h;
            b[i] -= h;
            Ok((f.eval(&a)?.value - f.eval(&b)?.value) / (2.0 * h))
        })
        .collect()
}

fn duality() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let l4 = LambdaP::new(fin(4.0))?;
    let psi = PsiPNu::new(fin(4.0), &MeasureSpec::mu2())?;
    let phi = PhiP::new(fin(4.0))?;
    let funcs: [(&str, &dyn SmoothConvex); 3] = [("Λ_4", &l4), ("Ψ_{4,μ2}", &psi), ("Φ_4", &phi)];
    let mut u = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, f) in funcs {
        let mut draw = || -> Vec<f64> {
            if f.dim() == 2 {
                vec![u(-1.5, 1.5), u(-1.0, 0.2)]
            } else {
                vec![u(-1.0, 0.3), u(-1.0, 1.0), u(-1.0, 0.15)]
            }
        };
        let mut worst_bi: f64 = 0.0;
        for _ in 0..20 {
            let t = draw();
            let b = biconjugate(f, &t)?;
            let err = if b.status == Status::Converged { (b.value - f.eval(&t)?.value).abs() } else { f64::INFINITY };
            worst_bi = worst_bi.max(err);
        }
        let mut worst_grad: f64 = 0.0;
        for _ in 0..100 {
            let t = draw();
            let g = f.eval(&t)?.grad;
            let fd = fd_gradient(f, &t)?;
            let num: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-3);
            worst_grad = worst_grad.max(num / den);
        }
        ok &= worst_bi <= 1e-6 && worst_grad <= 1e-5;
        parts.push(format!("{name}: |f**-f| {worst_bi:.1e}, grad rel {worst_grad:.1e}"));
    }
    Ok((ok, parts.join("; ")))
}

fn curvature() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [4.0, 1.5] {
        let f = LambdaP::new(fin(p))?;
        let mut extreme = if p > 2.0 { f64::NEG_INFINITY } else { f64::INFINITY };
        for t2 in [0.0, 0.1] {
            let g = |t: f64| -> Result<f64> { Ok(f.eval(&[t.sqrt(), t2])?.value) };
            for k in 0..50 {
                let t = 0.01 * 2000f64.powf(k as f64 / 49.0);
                let h = 1e-3 * t;
                let d2 = (g(t + h)? - 2.0 * g(t)? + g(t - h)?) / (h * h);
                extreme = if p > 2.0 { extreme.max(d2) } else { extreme.min(d2) };
            }
        }
        let good = if p > 2.0 { extreme <= 1e-8 } else { extreme >= -1e-8 };
        ok &= good;
        parts.push(format!("p={p}: {} d2 = {extreme:.3e}", if p > 2.0 { "max" } else { "min" }));
    }
    Ok((ok, parts.join("; ")))
}

fn samplers() -> Result<(bool, String)> {
    const DRAWS: usize = 100_000;
    let mut parts = Vec::new();
    let mut ok = true;
    // ‖X‖_p^n ~ Uniform[0,1]
    for p in [fin(4.0), fin(1.5), PExponent::Infinite] {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let n = 50;
        let mut radii = Vec::with_capacity(DRAWS);
        for _ in 0..DRAWS {
            let x = sample_ball(p, n, &mut rng)?;
            let norm = match p {
                PExponent::Infinite => x.coords.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                PExponent::Finite(q) => x.coords.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q),
            };
            radii.push(norm.powi(n as i32));
        }
        let d = ks_statistic(&mut radii, |u| u.clamp(0.0, 1.0));
        let pv = ks_pvalue(d, DRAWS);
        ok &= pv > 0.01;
        parts.push(format!("radius KS p={} pval {pv:.3}", p.value()));
    }
    // sphere: E[(√n Θ_1)²] = 1, corr(Θ_1, Θ_2) = 0 (sign symmetry) and
    // corr(Θ_1², Θ_2²) = −1/(n−1) (exchangeable squares with constant sum)
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let n = 100;
    let (mut a, mut b) = (Vec::with_capacity(DRAWS), Vec::with_capacity(DRAWS));
    for _ in 0..DRAWS {
        let s = sample_sphere(n, &mut rng)?;
        a.push(s.coords[0]);
        b.push(s.coords[1]);
    }
    let sq: Vec<f64> = a.iter().map(|x| n as f64 * x * x).collect();
    let m = sq.iter().sum::<f64>() / DRAWS as f64;
    let sd = (sq.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (DRAWS - 1) as f64).sqrt();
    let z_m = (m - 1.0) / (sd / (DRAWS as f64).sqrt());
    let a2: Vec<f64> = a.iter().map(|x| x * x).collect();
    let b2: Vec<f64> = b.iter().map(|x| x * x).collect();
    let z_lin = batch_z(&a, &b, 0.0);
    let z_sq = batch_z(&a2, &b2, -1.0 / (n as f64 - 1.0));
    ok &= z_m.abs() <= 3.0 && z_lin.abs() <= 3.0 && z_sq.abs() <= 3.0;
    parts.push(format!("sphere z: second moment {z_m:.2}, corr {z_lin:.2}, corr of squares {z_sq:.2}"));
    // ‖Y‖_p independent of Y/‖Y‖_p
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let (p, n) = (4.0, 20);
    let sampler = MuPSampler::new(fin(p));
    let (mut norms, mut first, mut first_abs) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..DRAWS {
        let y: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
        let norm = y.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        norms.push(norm);
        first.push(y[0] / norm);
        first_abs.push(y[0].abs() / norm);
    }
    let z1 = pearson(&norms, &first) * (DRAWS as f64).sqrt();
    let z2 = pearson(&norms, &first_abs) * (DRAWS as f64).sqrt();
    ok &= z1.abs() <= 3.0 && z2.abs() <= 3.0;
    parts.push(format!("independence z {z1:.2} (signed), {z2:.2} (abs)"));
    Ok((ok, parts.join("; ")))
}

/// `(ρ̂ − target) / se` with ρ̂ the full-sample correlation and `se` from 100 batch correlations.
fn batch_z(x: &[f64], y: &[f64], target: f64) -> f64 {
    let k = 100;
    let len = x.len() / k;
    let rs: Vec<f64> = (0..k).map(|i| pearson(&x[i * len..(i + 1) * len], &y[i * len..(i + 1) * len])).collect();
    let mean = rs.iter().sum::<f64>() / k as f64;
    let sd = (rs.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt();
    (pearson(x, y) - target) / (sd / (k as f64).sqrt())
}

fn mc_vs_rate() -> Result<(bool, String)> {
    let (n, w) = (100usize, 0.3);
    let dir = DirSpec::Fixed(DirectionSequence::new(DirectionKind::E1, 0));
    let est = &estimate_tail(fin(2.0), &[n], w, &dir, 1_000_000, SpeedSpec::LinearN, Method::Direct, 8)?[0];
    // exact: X_1 has density ∝ (1−x²)^{(n−1)/2} on [−1, 1]
    let k = (n as f64 - 1.0) / 2.0;
    let tol = Tolerance { abs: 0.0, rel: 1e-12, max_intervals: 200 };
    let tail = integrate(|x| [(1.0 - x * x).powf(k)], w, 1.0, tol).value[0];
    let total = 2.0 * integrate(|x| [(1.0 - x * x).powf(k)], 0.0, 1.0, tol).value[0];
    let exact = tail / total;
    let exact_slope = -exact.ln() / n as f64;
    let target = j2(w);
    let z = (est.p_hat - exact) / est.stderr;
    let rel = (est.slope - target).abs() / target;
    let ok = z.abs() <= 3.0 && rel <= 0.15;
    Ok((
        ok,
        format!(
            "MC slope {:.5} (hits {}), exact-marginal slope {exact_slope:.5}, J_2 {target:.6}: rel dev {:.1}% (engineering tol 15%); MC vs exact z = {z:.2}",
            est.slope,
            est.hits,
            100.0 * rel
        ),
    ))
}

fn glivenko_cantelli() -> Result<(bool, String)> {
    let ns = [100, 1000, 10000];
    let mut good = 0;
    let mut finals = Vec::new();
    for seed in 1..=5 {
        let rep = gc_report(&DirectionSequence::new(DirectionKind::Typical, seed), &ns, 1.0)?;
        let v = &rep.wasserstein_r;
        if v[0] > v[1] && v[1] > v[2] && v[2] < 0.05 {
            good += 1;
        }
        finals.push(format!("{:.4}", v[2]));
    }
    Ok((good >= 3, format!("{good}/5 seeds decreasing with final < 0.05 (engineering tol); finals [{}]", finals.join(", "))))
}

/// `Ψ_{∞,U[−√3,√3]}(t) = E log(sinh(tU)/(tU))`, by quadrature written out here.
fn psi_inf_uniform(t: f64) -> f64 {
    let b = 3f64.sqrt();
    let ls = |x: f64| -> f64 {
        let x = x.abs();
        if x < 1e-4 {
            x * x / 6.0
        } else {
            x + (-(-2.0 * x).exp_m1()).ln() - std::f64::consts::LN_2 - x.ln()
        }
    };
    integrate(|u| [ls(t * u)], 0.0, b, Tolerance { abs: 1e-15, rel: 1e-13, max_intervals: 200 }).value[0] / b
}

fn p_inf_witness() -> Result<(bool, String)> {
    let w = 0.83;
    let b = 3f64.sqrt();
    let uniform = MeasureSpec::UniformInterval { a: -b, b };
    let inf = PExponent::Infinite;
    let vu = rate(inf, &RateKind::Quenched { nu: uniform }, w)?;
    let vg = rate(inf, &RateKind::quenched_mu2(), w)?;
    // independent route: golden-section maximization of tw − Ψ(t) over an expanding bracket
    let obj = |t: f64| t * w - psi_inf_uniform(t);
    let mut hi = 1.0;
    while obj(2.0 * hi) > obj(hi) {
        hi *= 2.0;
    }
    let (mut a, mut c) = (0.0, 2.0 * hi);
    let gr = 0.618_033_988_749_894_9;
    for _ in 0..200 {
        let x = c - gr * (c - a);
        let y = a + gr * (c - a);
        if obj(x) > obj(y) {
            c = y;
        } else {
            a = x;
        }
    }
    let oracle = obj(0.5 * (a + c));
    let ok = vu.is_finite() && (vu - oracle).abs() <= 1e-6 && vg == f64::INFINITY;
    Ok((ok, format!("Ψ*_uniform(0.83) = {vu:.8} (oracle {oracle:.8}); Ψ*_μ2(0.83) = {vg}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preflight_detects_corrupted_weights() {
        let good = Settings::default();
        assert!(run_check("quadrature-preflight", &good).unwrap().passed);
        let bad = Settings { gaussian_rule: QuadratureRule::gaussian().corrupted(1.001) };
        assert!(!run_check("quadrature-preflight", &bad).unwrap().passed);
    }

    #[test]
    fn unknown_check_is_an_error() {
        assert!(run_check("nope", &Settings::default()).is_err());
    }

    #[test]
    fn uniform_psi_oracle_small_t() {
        // E log(sinh(tU)/(tU)) ≈ t² E U² / 6 = t²/6 for small t
        let t = 1e-3;
        assert!((psi_inf_uniform(t) / (t * t / 6.0) - 1.0).abs() < 1e-5);
    }
}
