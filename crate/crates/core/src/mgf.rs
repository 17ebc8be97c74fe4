//! Log-moment-generating functionals Λ_p, Ψ_{p,ν}, Φ_p and their product-measure analogues
//! Φ_γ, Ψ_{γ,ν}, with analytic gradients and Hessians.
//!
//! Every functional reduces to one-dimensional tilted integrals against a reference measure:
//! `L(s) = log M_{μ_p}(s)` for the linear tilts and `K(c) = log ∫ e^{c y²} γ(dy)` for the
//! quadratic ones. Derivatives are integrals of the same tilted measures, never differences.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{self, drop_point, log_mgf_mu_p, log_mgf_uniform_sym, LogMgf, MeasureSpec, PExponent};
use crate::numeric::quadrature::{integrate_pieces, Tolerance};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MgfPoint2 {
    pub t1: f64,
    pub t2: f64,
}

impl MgfPoint2 {
    pub fn new(t1: f64, t2: f64) -> Self {
        MgfPoint2 { t1, t2 }
    }

    /// Interior of the domain of Λ_p and Ψ_{p,ν}: `t2 < 1/p`.
    pub fn interior(&self, p: PExponent) -> bool {
        self.t2 < p.recip()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MgfPoint3 {
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
}

impl MgfPoint3 {
    pub fn new(t0: f64, t1: f64, t2: f64) -> Self {
        MgfPoint3 { t0, t1, t2 }
    }

    /// Interior of the domain of Φ_p. For p = 2 the reduced Gaussian integral also needs
    /// `t1² < (1 − 2t0)(1 − 2t2)`.
    pub fn interior(&self, p: PExponent) -> bool {
        if !(self.t0 < 0.5 && self.t2 < p.recip()) {
            return false;
        }
        match p {
            PExponent::Finite(q) if q == 2.0 => self.t1 * self.t1 < (1.0 - 2.0 * self.t0) * (1.0 - 2.0 * self.t2),
            _ => true,
        }
    }
}

/// Value, gradient and quadrature error of a functional evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    pub gradient: Option<Vec<f64>>,
    pub quadrature_error: f64,
}

/// Value with gradient and row-major Hessian.
#[derive(Clone, Debug, PartialEq)]
pub struct Eval {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    pub error: f64,
}

impl Eval {
    fn infinite(dim: usize) -> Self {
        Eval { value: f64::INFINITY, grad: vec![f64::NAN; dim], hess: vec![f64::NAN; dim * dim], error: 0.0 }
    }

    pub fn into_result(self) -> EvalResult {
        let finite = self.value.is_finite();
        EvalResult { value: self.value, gradient: finite.then_some(self.grad), quadrature_error: self.error }
    }
}

/// A smooth convex function on an open domain in ℝ^d, the input of the Legendre engine.
pub trait SmoothConvex: Sync {
    fn dim(&self) -> usize;
    fn in_domain(&self, t: &[f64]) -> bool;
    /// Must return `+∞` outside the domain.
    fn eval(&self, t: &[f64]) -> Result<Eval>;
    /// An interior starting point.
    fn start(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
    /// Whether `f*(τ) < ∞`, when the range of `∇f` is known in closed form.
    fn conjugate_domain(&self, _tau: &[f64]) -> Option<bool> {
        None
    }
}

fn accept_error(what: impl FnOnce() -> String, err: f64) -> Result<()> {
    if err > 1e-8 {
        Err(Error::Quadrature { what: what(), error: err })
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------------------------
// Λ_p

/// Λ_p at `(t1, t2)` with gradient and Hessian, through the scaling reduction to `L = log M_{μ_p}`.
pub(crate) fn lambda_eval(p: f64, t1: f64, t2: f64) -> Result<Eval> {
    if !(t2 < 1.0 / p) {
        return Ok(Eval::infinite(2));
    }
    let q = 1.0 - p * t2;
    let a = q.powf(-1.0 / p);
    let s = t1 * a;
    let l = log_mgf_mu_p(PExponent::Finite(p), s)?;
    if !l.is_finite() {
        return Ok(Eval::infinite(2));
    }
    let value = -q.ln() / p + l.value;
    let g1 = l.d1 * a;
    let g2 = (1.0 + s * l.d1) / q;
    let h11 = l.d2 * a * a;
    let h12 = a * (s * l.d2 + l.d1) / q;
    let h22 = (s * l.d1 + s * s * l.d2 + p * (1.0 + s * l.d1)) / (q * q);
    Ok(Eval { value, grad: vec![g1, g2], hess: vec![h11, h12, h12, h22], error: l.error })
}

fn check_lambda_p(p: PExponent) -> Result<f64> {
    match p {
        PExponent::Finite(q) => Ok(q),
        PExponent::Infinite => Err(Error::domain("Λ_p needs finite p")),
    }
}

/// Λ_p(t1, t2) = log ∫ e^{t1 y + t2 |y|^p} μ_p(dy).
pub fn lambda_p(p: PExponent, pt: MgfPoint2) -> Result<EvalResult> {
    let q = check_lambda_p(p)?;
    let e = lambda_eval(q, pt.t1, pt.t2)?;
    accept_error(|| format!("lambda_{q}"), e.error)?;
    Ok(e.into_result())
}

#[derive(Clone, Debug)]
pub struct LambdaP {
    pub p: f64,
}

impl LambdaP {
    pub fn new(p: PExponent) -> Result<Self> {
        Ok(LambdaP { p: check_lambda_p(p)? })
    }
}

impl SmoothConvex for LambdaP {
    fn dim(&self) -> usize {
        2
    }
    fn in_domain(&self, t: &[f64]) -> bool {
        t[1] < 1.0 / self.p && (self.p != 1.0 || (t[0] * (1.0 - t[1]).recip()).abs() < 1.0)
    }
    fn eval(&self, t: &[f64]) -> Result<Eval> {
        lambda_eval(self.p, t[0], t[1])
    }
    fn conjugate_domain(&self, tau: &[f64]) -> Option<bool> {
        Some(tau[1] > 0.0 && tau[0].abs().powf(self.p) < tau[1])
    }
}

// ---------------------------------------------------------------------------------------------
// Integration against ν

/// A measure prepared for repeated integration of test functions.
#[derive(Clone, Debug)]
pub(crate) enum NuIntegrator {
    Atoms { u: Vec<f64>, w: Vec<f64> },
    Density { spec: MeasureSpec, breaks: Vec<f64> },
}

impl NuIntegrator {
    /// `even` means the test functions only depend on `|u|`, so atoms at `±u` are merged.
    pub(crate) fn new(nu: &MeasureSpec, even: bool) -> Result<Self> {
        nu.validate()?;
        if let Some((mut u, mut w)) = nu.atoms() {
            if even {
                let mut pairs: Vec<(f64, f64)> = u.iter().zip(&w).map(|(x, m)| (x.abs(), *m)).collect();
                pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let mut merged: Vec<(f64, f64)> = Vec::new();
                for (x, m) in pairs {
                    if m == 0.0 {
                        continue;
                    }
                    match merged.last_mut() {
                        Some(last) if last.0 == x => last.1 += m,
                        _ => merged.push((x, m)),
                    }
                }
                u = merged.iter().map(|v| v.0).collect();
                w = merged.iter().map(|v| v.1).collect();
            } else {
                let keep: Vec<usize> = (0..u.len()).filter(|&i| w[i] > 0.0).collect();
                u = keep.iter().map(|&i| u[i]).collect();
                w = keep.iter().map(|&i| w[i]).collect();
            }
            return Ok(NuIntegrator::Atoms { u, w });
        }
        let breaks = match nu {
            MeasureSpec::GeneralizedNormal { p: PExponent::Infinite } => vec![-1.0, 0.0, 1.0],
            MeasureSpec::GeneralizedNormal { p: PExponent::Finite(q) } => {
                let q = *q;
                let up = drop_point(&|y: f64| -y.powf(q) / q, 0.0) * 1.15;
                let mut b = vec![0.0, 0.5, 1.0, 2.0, 3.0];
                b.retain(|x| *x < up);
                b.push(up);
                let mut full: Vec<f64> = b.iter().rev().map(|x| -x).collect();
                full.extend_from_slice(&b[1..]);
                full
            }
            MeasureSpec::UniformInterval { a, b } => {
                if *a < 0.0 && *b > 0.0 {
                    vec![*a, 0.0, *b]
                } else {
                    vec![*a, *b]
                }
            }
            _ => unreachable!(),
        };
        Ok(NuIntegrator::Density { spec: nu.clone(), breaks })
    }

    pub(crate) fn integrate<const N: usize, F>(&self, f: F, even: bool, tol: Tolerance) -> Result<([f64; N], f64)>
    where
        F: Fn(f64) -> Result<[f64; N]>,
    {
        match self {
            NuIntegrator::Atoms { u, w } => {
                let mut acc = [0.0; N];
                for (x, m) in u.iter().zip(w) {
                    let v = f(*x)?;
                    for i in 0..N {
                        acc[i] += m * v[i];
                    }
                }
                Ok((acc, 0.0))
            }
            NuIntegrator::Density { spec, breaks } => {
                let failure: RefCell<Option<Error>> = RefCell::new(None);
                let dens = |u: f64| match spec {
                    MeasureSpec::GeneralizedNormal { p } => measures::density_mu_p(*p, u),
                    MeasureSpec::UniformInterval { a, b } => 1.0 / (b - a),
                    _ => unreachable!(),
                };
                let eval = |u: f64| -> [f64; N] {
                    match f(u) {
                        Ok(v) => {
                            let d = dens(u);
                            let mut out = v;
                            out.iter_mut().for_each(|x| *x *= d);
                            out
                        }
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            [f64::NAN; N]
                        }
                    }
                };
                let symmetric = matches!(spec, MeasureSpec::GeneralizedNormal { .. });
                let r = if even && symmetric {
                    let half: Vec<f64> = breaks.iter().copied().filter(|x| *x >= 0.0).collect();
                    let mut r = integrate_pieces(eval, &half, tol);
                    r.value.iter_mut().for_each(|x| *x *= 2.0);
                    r.error.iter_mut().for_each(|x| *x *= 2.0);
                    r
                } else {
                    integrate_pieces(eval, breaks, tol)
                };
                if let Some(e) = failure.into_inner() {
                    return Err(e);
                }
                Ok((r.value, r.scaled_error()))
            }
        }
    }
}

fn tol_nu() -> Tolerance {
    Tolerance { abs: 1e-14, rel: 1e-12, max_intervals: 200 }
}

// ---------------------------------------------------------------------------------------------
// Ψ_{p,ν}

/// Ψ_{p,ν}(t1, t2) = ∫ Λ_p(t1 u, t2) ν(du), prepared for repeated evaluation.
#[derive(Clone, Debug)]
pub struct PsiPNu {
    pub p: f64,
    nu: NuIntegrator,
    /// `m_{p'}(ν)^{1/p'}`
    radius: f64,
}

impl PsiPNu {
    pub fn new(p: PExponent, nu: &MeasureSpec) -> Result<Self> {
        let q = match p {
            PExponent::Finite(q) if q > 1.0 => q,
            _ => return Err(Error::domain("Ψ_{p,ν} needs p in (1, ∞); use the dedicated p=1 and p=∞ routes")),
        };
        let c = q / (q - 1.0);
        Ok(PsiPNu { p: q, nu: NuIntegrator::new(nu, true)?, radius: nu.abs_moment(c).powf(1.0 / c) })
    }
}

impl SmoothConvex for PsiPNu {
    fn dim(&self) -> usize {
        2
    }
    fn in_domain(&self, t: &[f64]) -> bool {
        t[1] < 1.0 / self.p
    }
    fn eval(&self, t: &[f64]) -> Result<Eval> {
        let (t1, t2) = (t[0], t[1]);
        if !(t2 < 1.0 / self.p) {
            return Ok(Eval::infinite(2));
        }
        let p = self.p;
        let (v, err) = self.nu.integrate(
            |u| {
                let e = lambda_eval(p, t1 * u, t2)?;
                Ok([e.value, u * e.grad[0], e.grad[1], u * u * e.hess[0], u * e.hess[1], e.hess[3], e.error])
            },
            true,
            tol_nu(),
        )?;
        Ok(Eval {
            value: v[0],
            grad: vec![v[1], v[2]],
            hess: vec![v[3], v[4], v[4], v[5]],
            error: err.max(v[6]),
        })
    }
    fn conjugate_domain(&self, tau: &[f64]) -> Option<bool> {
        Some(tau[1] > 0.0 && tau[0].abs() < self.radius * tau[1].powf(1.0 / self.p))
    }
}

pub fn psi_p_nu(p: PExponent, nu: &MeasureSpec, pt: MgfPoint2) -> Result<EvalResult> {
    let f = PsiPNu::new(p, nu)?;
    let e = f.eval(&[pt.t1, pt.t2])?;
    accept_error(|| "psi_p_nu".into(), e.error)?;
    Ok(e.into_result())
}

// ---------------------------------------------------------------------------------------------
// One-dimensional kernels against a general measure γ

/// `log ∫ e^{t x} γ(dx)` with derivatives.
pub fn log_mgf(gamma: &MeasureSpec, t: f64) -> Result<LogMgf> {
    match gamma {
        MeasureSpec::GeneralizedNormal { p } => log_mgf_mu_p(*p, t),
        MeasureSpec::UniformInterval { a, b } => {
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            let l = log_mgf_uniform_sym(h * t);
            Ok(LogMgf { value: c * t + l.value, d1: c + h * l.d1, d2: h * h * l.d2, error: 0.0 })
        }
        other => {
            let (x, w) = other.atoms().unwrap();
            Ok(log_sum_exp_moments(&x, &w, |xi| t * xi, |xi| xi))
        }
    }
}

/// For atoms `x` with masses `w`: log Σ w e^{a(x)} with mean and variance of `b(x)` under the tilt.
fn log_sum_exp_moments(x: &[f64], w: &[f64], a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64) -> LogMgf {
    let m = x.iter().zip(w).filter(|(_, w)| **w > 0.0).map(|(xi, _)| a(*xi)).fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut s1) = (0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        if *wi > 0.0 {
            let e = wi * (a(*xi) - m).exp();
            z += e;
            s1 += e * b(*xi);
        }
    }
    let mean = s1 / z;
    let mut var = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        if *wi > 0.0 {
            let d = b(*xi) - mean;
            var += wi * (a(*xi) - m).exp() * d * d;
        }
    }
    LogMgf { value: m + z.ln(), d1: mean, d2: var / z, error: 0.0 }
}

/// `K(k) = log ∫ e^{k x²} γ(dx)` with derivatives in `k`.
pub fn log_mgf_square(gamma: &MeasureSpec, k: f64) -> Result<LogMgf> {
    if !k.is_finite() {
        return Err(Error::domain("quadratic tilt must be finite"));
    }
    match gamma {
        MeasureSpec::GeneralizedNormal { p: PExponent::Finite(q) } => {
            let q = *q;
            if q == 2.0 {
                if k >= 0.5 {
                    return Ok(LogMgf::INFINITE);
                }
                let v = 1.0 - 2.0 * k;
                return Ok(LogMgf { value: -0.5 * v.ln(), d1: 1.0 / v, d2: 2.0 / (v * v), error: 0.0 });
            }
            if q < 2.0 && k > 0.0 {
                return Ok(LogMgf::INFINITE);
            }
            let mode = if k > 0.0 { (2.0 * k).powf(1.0 / (q - 2.0)) } else { 0.0 };
            let gmax = k * mode * mode - mode.powf(q) / q;
            let lnc = std::f64::consts::LN_2 + q.ln() / q + statrs::function::gamma::ln_gamma(1.0 + 1.0 / q);
            let km2 = k * mode * mode;
            let h = move |y: f64| {
                if mode > 0.0 {
                    let r = (y - mode) / mode;
                    km2 * (r * (2.0 + r) - 2.0 / q * (q * r.ln_1p()).exp_m1())
                } else {
                    k * y * y - y.powf(q) / q
                }
            };
            square_tilt(h, mode, 0.0, None, gmax + std::f64::consts::LN_2 - lnc)
        }
        MeasureSpec::GeneralizedNormal { p: PExponent::Infinite } => square_interval(k, -1.0, 1.0),
        MeasureSpec::UniformInterval { a, b } => square_interval(k, *a, *b),
        other => {
            let (x, w) = other.atoms().unwrap();
            Ok(log_sum_exp_moments(&x, &w, |xi| k * xi * xi, |xi| xi * xi))
        }
    }
}

fn square_interval(k: f64, a: f64, b: f64) -> Result<LogMgf> {
    // ∫_a^b e^{k x²} dx/(b−a), folded onto |x|.
    let piece = |lo: f64, hi: f64| {
        let mode = if k > 0.0 { hi } else { lo };
        let gmax = k * mode * mode;
        square_tilt(move |y| k * y * y - gmax, mode, lo, Some(hi), gmax - (b - a).ln())
    };
    if a >= 0.0 {
        piece(a, b)
    } else if b <= 0.0 {
        piece(-b, -a)
    } else {
        combine_log_mgf(piece(0.0, -a)?, piece(0.0, b)?)
    }
}

fn combine_log_mgf(x: LogMgf, y: LogMgf) -> Result<LogMgf> {
    // sum of two tilted masses: value = log(e^x + e^y), moments mix
    let m = x.value.max(y.value);
    let (wx, wy) = ((x.value - m).exp(), (y.value - m).exp());
    let z = wx + wy;
    let mean = (wx * x.d1 + wy * y.d1) / z;
    let second = (wx * (x.d2 + x.d1 * x.d1) + wy * (y.d2 + y.d1 * y.d1)) / z;
    Ok(LogMgf { value: m + z.ln(), d1: mean, d2: second - mean * mean, error: x.error.max(y.error) })
}

/// `offset + log ∫_{lo}^{hi} e^{h(y)} dy` (hi = ∞ uses the tail drop) with moments of `y²` centred at `mode²`.
fn square_tilt<H: Fn(f64) -> f64>(h: H, mode: f64, lo: f64, hi: Option<f64>, offset: f64) -> Result<LogMgf> {
    let upper = match hi {
        Some(b) => b,
        None => drop_point(&h, mode),
    };
    let c = mode * mode;
    let mut breaks = vec![lo];
    if mode > lo && mode < upper {
        breaks.push(mode);
    }
    breaks.push(upper);
    let r = integrate_pieces(
        |y| {
            let e = h(y).exp();
            let d = y * y - c;
            [e, e * d, e * d * d]
        },
        &breaks,
        measures::tol_tilted(),
    );
    let [b0, b1, b2] = r.value;
    let err = r.error[0] / b0;
    if !r.converged && err > 1e-10 {
        return Err(Error::Quadrature { what: "quadratic tilt".into(), error: err });
    }
    let shift = b1 / b0;
    Ok(LogMgf { value: offset + b0.ln(), d1: c + shift, d2: b2 / b0 - shift * shift, error: err })
}

// ---------------------------------------------------------------------------------------------
// Φ_p and Φ_γ

/// Φ_p(t0, t1, t2) = log ∫∫ e^{t0 z² + t1 z y + t2 |y|^p} μ_2(dz) μ_p(dy), for p ≥ 2.
#[derive(Clone, Debug)]
pub struct PhiP {
    pub p: PExponent,
    gamma: MeasureSpec,
}

impl PhiP {
    pub fn new(p: PExponent) -> Result<Self> {
        match p {
            PExponent::Finite(q) if q >= 2.0 => Ok(PhiP { p, gamma: MeasureSpec::mu_p(p) }),
            _ => Err(Error::domain("Φ_p is used for finite p ≥ 2")),
        }
    }
}

/// Shared evaluation of `A(t2) − ½ log(1 − 2t0) + K(c)` with `c = ½ t1² q^{−2/p} / (1 − 2t0)`.
fn quadratic_reduced(gamma: &MeasureSpec, p: Option<f64>, t0: f64, t1: f64, t2: f64) -> Result<Eval> {
    let dim = if p.is_some() { 3 } else { 2 };
    let v = 1.0 - 2.0 * t0;
    if !(v > 0.0) {
        return Ok(Eval::infinite(dim));
    }
    let (q, e_q) = match p {
        Some(p) => {
            let q = 1.0 - p * t2;
            if !(q > 0.0) {
                return Ok(Eval::infinite(dim));
            }
            (q, q.powf(-2.0 / p))
        }
        None => (1.0, 1.0),
    };
    let e = e_q / v;
    let c = 0.5 * t1 * t1 * e;
    let k = log_mgf_square(gamma, c)?;
    if !k.is_finite() {
        return Ok(Eval::infinite(dim));
    }
    let c0 = 2.0 * c / v;
    let c1 = t1 * e;
    let c00 = 8.0 * c / (v * v);
    let c11 = e;
    let c01 = 2.0 * c1 / v;
    let mut value = -0.5 * v.ln() + k.value;
    let (k1, k2) = (k.d1, k.d2);
    if let Some(p) = p {
        value += -q.ln() / p;
        let c2 = 2.0 * c / q;
        let c22 = (4.0 + 2.0 * p) * c / (q * q);
        let c02 = 4.0 * c / (q * v);
        let c12 = 2.0 * c1 / q;
        let g = vec![1.0 / v + k1 * c0, k1 * c1, 1.0 / q + k1 * c2];
        let h00 = 2.0 / (v * v) + k2 * c0 * c0 + k1 * c00;
        let h01 = k2 * c0 * c1 + k1 * c01;
        let h02 = k2 * c0 * c2 + k1 * c02;
        let h11 = k2 * c1 * c1 + k1 * c11;
        let h12 = k2 * c1 * c2 + k1 * c12;
        let h22 = p / (q * q) + k2 * c2 * c2 + k1 * c22;
        Ok(Eval { value, grad: g, hess: vec![h00, h01, h02, h01, h11, h12, h02, h12, h22], error: k.error })
    } else {
        let g = vec![1.0 / v + k1 * c0, k1 * c1];
        let h00 = 2.0 / (v * v) + k2 * c0 * c0 + k1 * c00;
        let h01 = k2 * c0 * c1 + k1 * c01;
        let h11 = k2 * c1 * c1 + k1 * c11;
        Ok(Eval { value, grad: g, hess: vec![h00, h01, h01, h11], error: k.error })
    }
}

impl SmoothConvex for PhiP {
    fn dim(&self) -> usize {
        3
    }
    fn in_domain(&self, t: &[f64]) -> bool {
        MgfPoint3::new(t[0], t[1], t[2]).interior(self.p)
    }
    fn eval(&self, t: &[f64]) -> Result<Eval> {
        quadratic_reduced(&self.gamma, self.p.finite(), t[0], t[1], t[2])
    }
    fn conjugate_domain(&self, tau: &[f64]) -> Option<bool> {
        // (a, c) ↦ a^{1/2} c^{1/p} is concave for p ≥ 2, so the hull of {(z², yz, |y|^p)} is cut out by it
        let p = self.p.value();
        Some(tau[0] > 0.0 && tau[2] > 0.0 && tau[1].abs() < tau[0].sqrt() * tau[2].powf(1.0 / p))
    }
}

pub fn phi_p(p: PExponent, pt: MgfPoint3) -> Result<EvalResult> {
    let f = PhiP::new(p)?;
    let e = f.eval(&[pt.t0, pt.t1, pt.t2])?;
    accept_error(|| "phi_p".into(), e.error)?;
    Ok(e.into_result())
}

/// Φ_γ(t0, t1) = log ∫∫ e^{t0 z² + t1 z x} μ_2(dz) γ(dx).
#[derive(Clone, Debug)]
pub struct PhiGamma {
    gamma: MeasureSpec,
}

impl PhiGamma {
    pub fn new(gamma: &MeasureSpec) -> Result<Self> {
        gamma.validate()?;
        Ok(PhiGamma { gamma: gamma.clone() })
    }
}

impl SmoothConvex for PhiGamma {
    fn dim(&self) -> usize {
        2
    }
    fn in_domain(&self, t: &[f64]) -> bool {
        if !(t[0] < 0.5) {
            return false;
        }
        match &self.gamma {
            MeasureSpec::GeneralizedNormal { p: PExponent::Finite(q) } if *q == 2.0 => t[1] * t[1] < 1.0 - 2.0 * t[0],
            MeasureSpec::GeneralizedNormal { p: PExponent::Finite(q) } if *q < 2.0 => t[1] == 0.0,
            _ => true,
        }
    }
    fn eval(&self, t: &[f64]) -> Result<Eval> {
        quadratic_reduced(&self.gamma, None, t[0], t[1], 0.0)
    }
}

pub fn phi_gamma(gamma: &MeasureSpec, t0: f64, t1: f64) -> Result<EvalResult> {
    let e = PhiGamma::new(gamma)?.eval(&[t0, t1])?;
    accept_error(|| "phi_gamma".into(), e.error)?;
    Ok(e.into_result())
}

/// Ψ_{γ,ν}(t) = ∫ log M_γ(t u) ν(du).
#[derive(Clone, Debug)]
pub struct PsiGammaNu {
    gamma: MeasureSpec,
    nu: NuIntegrator,
    even: bool,
}

impl PsiGammaNu {
    pub fn new(gamma: &MeasureSpec, nu: &MeasureSpec) -> Result<Self> {
        gamma.validate()?;
        let even = match gamma {
            MeasureSpec::GeneralizedNormal { .. } => true,
            MeasureSpec::UniformInterval { a, b } => a == &-b,
            _ => false,
        };
        Ok(PsiGammaNu { gamma: gamma.clone(), nu: NuIntegrator::new(nu, even)?, even })
    }
}

impl SmoothConvex for PsiGammaNu {
    fn dim(&self) -> usize {
        1
    }
    fn in_domain(&self, t: &[f64]) -> bool {
        match &self.gamma {
            MeasureSpec::GeneralizedNormal { p: PExponent::Finite(q) } if *q == 1.0 => {
                // needs |t u| < 1 on the support of ν
                t[0] == 0.0 || self.support_radius().map(|r| t[0].abs() * r < 1.0).unwrap_or(false)
            }
            _ => true,
        }
    }
    fn eval(&self, t: &[f64]) -> Result<Eval> {
        let t = t[0];
        let gamma = &self.gamma;
        let (v, err) = self.nu.integrate(
            |u| {
                let l = log_mgf(gamma, t * u)?;
                if !l.is_finite() {
                    return Ok([f64::INFINITY, 0.0, 0.0, 0.0]);
                }
                Ok([l.value, u * l.d1, u * u * l.d2, l.error])
            },
            self.even,
            tol_nu(),
        )?;
        if !v[0].is_finite() {
            return Ok(Eval::infinite(1));
        }
        Ok(Eval { value: v[0], grad: vec![v[1]], hess: vec![v[2]], error: err.max(v[3]) })
    }
}

impl PsiGammaNu {
    fn support_radius(&self) -> Option<f64> {
        match &self.nu {
            NuIntegrator::Atoms { u, .. } => Some(u.iter().fold(0.0, |m, x| m.max(x.abs()))),
            NuIntegrator::Density { spec: MeasureSpec::UniformInterval { a, b }, .. } => Some(a.abs().max(b.abs())),
            NuIntegrator::Density { spec: MeasureSpec::GeneralizedNormal { p: PExponent::Infinite }, .. } => Some(1.0),
            _ => None,
        }
    }
}

pub fn psi_gamma_nu(gamma: &MeasureSpec, nu: &MeasureSpec, t: f64) -> Result<EvalResult> {
    let e = PsiGammaNu::new(gamma, nu)?.eval(&[t])?;
    accept_error(|| "psi_gamma_nu".into(), e.error)?;
    Ok(e.into_result())
}
