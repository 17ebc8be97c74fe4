//! Rate functions, the entropy functional 𝕙 and the grid-measure variational problems that link
//! the annealed and quenched rates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::legendre::{conjugate, rate_infimum, rate_infimum_warm, ContractionKind, ContractionSpec, LegendreResult};
use crate::measures::{gaussian_cell_masses, MeasureSpec, PExponent};
use crate::mgf::{lambda_eval, log_mgf, Eval, LambdaP, PhiGamma, PhiP, PsiGammaNu, PsiPNu, SmoothConvex};
use crate::numeric::quadrature::{integrate_pieces, Tolerance};
use crate::numeric::special::{ln_gamma, ln_gamma_upper_regularized, LN_SQRT_2PI};

/// Which rate function to evaluate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateKind {
    Annealed,
    Quenched { nu: MeasureSpec },
    Cramer,
    J2,
    QuenchedP1 { c: f64 },
    E1Projection,
    AnnealedSub2,
}

impl RateKind {
    pub fn quenched_mu2() -> Self {
        RateKind::Quenched { nu: MeasureSpec::mu2() }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RateKind::Annealed => "annealed",
            RateKind::Quenched { .. } => "quenched",
            RateKind::Cramer => "cramer",
            RateKind::J2 => "j2",
            RateKind::QuenchedP1 { .. } => "quenched_p1",
            RateKind::E1Projection => "e1_projection",
            RateKind::AnnealedSub2 => "annealed_sub2",
        }
    }

    pub fn validate(&self, p: PExponent) -> Result<()> {
        match self {
            RateKind::QuenchedP1 { c } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::domain("quenched_p1 needs c > 0"));
                }
                if p != PExponent::Finite(1.0) {
                    return Err(Error::domain("quenched_p1 is the p = 1 rate"));
                }
                Ok(())
            }
            RateKind::AnnealedSub2 => match p {
                PExponent::Finite(q) if q < 2.0 => Ok(()),
                _ => Err(Error::domain("annealed_sub2 needs p < 2")),
            },
            RateKind::Quenched { nu } => {
                nu.validate()?;
                if p == PExponent::Finite(1.0) {
                    return Err(Error::Unsupported("the p = 1 quenched rate depends on the direction sequence; use quenched_p1".into()));
                }
                Ok(())
            }
            RateKind::Cramer if p == PExponent::Finite(1.0) => Err(Error::Unsupported("the Cramér rate is defined for p > 1".into())),
            _ => Ok(()),
        }
    }

    /// The speed at which this rate governs the projections.
    pub fn speed(&self, p: PExponent) -> SpeedSpec {
        match (self, p) {
            (RateKind::AnnealedSub2, PExponent::Finite(q)) => SpeedSpec::Power { r: r_p(q) },
            (RateKind::Annealed, PExponent::Finite(q)) if q < 2.0 => SpeedSpec::Power { r: r_p(q) },
            (RateKind::QuenchedP1 { .. }, _) => SpeedSpec::NOverSqrtLogN,
            _ => SpeedSpec::LinearN,
        }
    }
}

/// The normalizing sequence `s(n)` of a large deviation principle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SpeedSpec {
    LinearN,
    Power { r: f64 },
    NOverSqrtLogN,
}

impl SpeedSpec {
    pub fn at(&self, n: f64) -> f64 {
        match self {
            SpeedSpec::LinearN => n,
            SpeedSpec::Power { r } => n.powf(*r),
            SpeedSpec::NOverSqrtLogN => n / n.ln().sqrt(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SpeedSpec::LinearN => "n".into(),
            SpeedSpec::Power { r } => format!("n^{r}"),
            SpeedSpec::NOverSqrtLogN => "n/sqrt(log n)".into(),
        }
    }
}

/// `r_p = 2p/(2+p)`.
pub fn r_p(p: f64) -> f64 {
    2.0 * p / (2.0 + p)
}

/// `J_2(w) = −½ log(1 − w²)`.
pub fn j2(w: f64) -> f64 {
    if w.abs() >= 1.0 {
        f64::INFINITY
    } else {
        -0.5 * (-w * w).ln_1p()
    }
}

fn e1_rate(p: PExponent, x: f64) -> f64 {
    let x = x.abs();
    match p {
        PExponent::Infinite => {
            if x <= 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        }
        PExponent::Finite(q) => {
            if x >= 1.0 {
                f64::INFINITY
            } else {
                -(-x.powf(q)).ln_1p() / q
            }
        }
    }
}

fn annealed_sub2(p: f64, w: f64) -> f64 {
    let r = r_p(p);
    w.abs().powf(r) / r
}

/// Value of a rate with the solver record behind it, if any.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    #[serde(with = "crate::extreal")]
    pub value: f64,
    pub diagnostic: Option<LegendreResult>,
}

impl RatePoint {
    fn closed(value: f64) -> Result<Self> {
        Ok(RatePoint { value, diagnostic: None })
    }

    fn solved(r: LegendreResult) -> Result<Self> {
        Ok(RatePoint { value: r.value, diagnostic: Some(r) })
    }
}

/// Radius of the domain of `I^q_{p,ν}`: `m_{p'}(ν)^{1/p'}` by Hölder, `m_1(ν)` for `p = ∞`.
pub fn quenched_radius(p: PExponent, nu: &MeasureSpec) -> f64 {
    match p {
        PExponent::Infinite => nu.abs_moment(1.0),
        PExponent::Finite(q) => {
            let c = q / (q - 1.0);
            nu.abs_moment(c).powf(1.0 / c)
        }
    }
}

/// Rate of kind `kind` at `w`, evaluated at `|w|`.
pub fn rate(p: PExponent, kind: &RateKind, w: f64) -> Result<f64> {
    Ok(rate_point(p, kind, w)?.value)
}

pub fn rate_point(p: PExponent, kind: &RateKind, w: f64) -> Result<RatePoint> {
    if !w.is_finite() {
        return Err(Error::domain("w must be finite"));
    }
    kind.validate(p)?;
    let a = w.abs();
    let mu_inf = MeasureSpec::mu_p(PExponent::Infinite);
    match kind {
        RateKind::J2 => RatePoint::closed(j2(a)),
        RateKind::E1Projection => RatePoint::closed(e1_rate(p, a)),
        RateKind::QuenchedP1 { c } => RatePoint::closed(a / c),
        RateKind::AnnealedSub2 => RatePoint::closed(annealed_sub2(p.value(), a)),
        RateKind::Annealed => match p {
            PExponent::Finite(q) if q < 2.0 => RatePoint::closed(annealed_sub2(q, a)),
            _ if a >= 1.0 => RatePoint::closed(f64::INFINITY),
            _ if a == 0.0 => RatePoint::closed(0.0),
            PExponent::Finite(_) => {
                let f = PhiP::new(p)?;
                RatePoint::solved(rate_infimum(&f, &ContractionSpec { kind: ContractionKind::Annealed3, w: a, p })?)
            }
            PExponent::Infinite => {
                let f = PhiGamma::new(&mu_inf)?;
                RatePoint::solved(rate_infimum(&f, &ContractionSpec { kind: ContractionKind::Product2, w: a, p })?)
            }
        },
        RateKind::Cramer => {
            if a >= 1.0 {
                return RatePoint::closed(f64::INFINITY);
            }
            if a == 0.0 {
                return RatePoint::closed(0.0);
            }
            match p {
                PExponent::Finite(_) => {
                    let f = LambdaP::new(p)?;
                    RatePoint::solved(rate_infimum(&f, &ContractionSpec { kind: ContractionKind::Quenched2, w: a, p })?)
                }
                PExponent::Infinite => {
                    let f = PsiGammaNu::new(&mu_inf, &MeasureSpec::Dirac { point: 1.0 })?;
                    RatePoint::solved(conjugate(&f, &[a], None)?)
                }
            }
        }
        RateKind::Quenched { nu } => {
            if a >= quenched_radius(p, nu) {
                return RatePoint::closed(f64::INFINITY);
            }
            if a == 0.0 {
                return RatePoint::closed(0.0);
            }
            match p {
                PExponent::Finite(_) => {
                    let f = PsiPNu::new(p, nu)?;
                    RatePoint::solved(rate_infimum(&f, &ContractionSpec { kind: ContractionKind::Quenched2, w: a, p })?)
                }
                PExponent::Infinite => {
                    let f = PsiGammaNu::new(&mu_inf, nu)?;
                    RatePoint::solved(conjugate(&f, &[a], None)?)
                }
            }
        }
    }
}

/// A rate function tabulated on a grid of `w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub p: PExponent,
    pub kind: RateKind,
    pub speed: SpeedSpec,
    pub w_grid: Vec<f64>,
    #[serde(with = "crate::extreal::vec")]
    pub values: Vec<f64>,
    pub minimizers: Vec<Option<LegendreResult>>,
}

/// Evaluates a rate on every point of `w_grid` in parallel.
pub fn rate_curve(p: PExponent, kind: &RateKind, w_grid: &[f64]) -> Result<RateCurve> {
    kind.validate(p)?;
    let points: Vec<RatePoint> = w_grid.par_iter().map(|&w| rate_point(p, kind, w)).collect::<Result<_>>()?;
    Ok(RateCurve {
        p,
        kind: kind.clone(),
        speed: kind.speed(p),
        w_grid: w_grid.to_vec(),
        values: points.iter().map(|r| r.value).collect(),
        minimizers: points.into_iter().map(|r| r.diagnostic).collect(),
    })
}

// ---------------------------------------------------------------------------------------------
// 𝕙 on grid measures

/// Components of `𝕙(ν) = H(ν | μ_2) + ½(1 − m_2(ν))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entropy {
    #[serde(with = "crate::extreal")]
    pub value: f64,
    #[serde(with = "crate::extreal")]
    pub relative_entropy: f64,
    pub second_moment: f64,
}

/// `𝕙(ν)` for a grid measure, with the relative entropy taken against the μ_2 masses of the
/// midpoint cells of the grid.
pub fn entropy_h(nu: &MeasureSpec) -> Result<Entropy> {
    nu.validate()?;
    let MeasureSpec::GridDiscrete { points, weights } = nu else {
        return Err(Error::Unsupported("entropy_h needs a grid measure".into()));
    };
    let pi = gaussian_cell_masses(points);
    let m2: f64 = points.iter().zip(weights).map(|(u, w)| w * u * u).sum();
    let mut h = 0.0;
    for (w, c) in weights.iter().zip(&pi) {
        if *w > 0.0 {
            if *c <= 0.0 {
                h = f64::INFINITY;
                break;
            }
            h += w * (w / c).ln();
        }
    }
    let value = if m2 > 1.0 + 1e-12 { f64::INFINITY } else { h + 0.5 * (1.0 - m2) };
    Ok(Entropy { value, relative_entropy: h, second_moment: m2 })
}

/// First Wasserstein distance between two measures on the same grid.
pub fn wasserstein1_grid(points: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut fa = 0.0;
    let mut fb = 0.0;
    let mut d = 0.0;
    for j in 0..points.len().saturating_sub(1) {
        fa += a[j];
        fb += b[j];
        d += (fa - fb).abs() * (points[j + 1] - points[j]);
    }
    d
}

// ---------------------------------------------------------------------------------------------
// Variational problems over grid measures

/// The projection family: `ℓ^p` balls with `p ∈ (1, ∞)`, or products of a measure γ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    P { p: f64 },
    Gamma { gamma: MeasureSpec },
}

impl Family {
    /// `p = ∞` maps to the product family with γ = μ_∞.
    pub fn from_p(p: PExponent) -> Result<Self> {
        match p {
            PExponent::Finite(q) if q > 1.0 => Ok(Family::P { p: q }),
            PExponent::Infinite => Ok(Family::Gamma { gamma: MeasureSpec::mu_p(PExponent::Infinite) }),
            _ => Err(Error::domain("variational problems need p > 1")),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Family::P { .. } => 2,
            Family::Gamma { .. } => 1,
        }
    }

    fn t_in_domain(&self, t: &[f64]) -> bool {
        match self {
            Family::P { p } => t[1] < 1.0 / p,
            Family::Gamma { .. } => true,
        }
    }

    /// The integrand `u ↦ Λ(t u)` of Ψ_ν with its derivatives in `t`.
    fn atom(&self, t: &[f64], u: f64) -> Result<Eval> {
        match self {
            Family::P { p } => {
                let e = lambda_eval(*p, t[0] * u, t[1])?;
                Ok(Eval {
                    value: e.value,
                    grad: vec![u * e.grad[0], e.grad[1]],
                    hess: vec![u * u * e.hess[0], u * e.hess[1], u * e.hess[1], e.hess[3]],
                    error: e.error,
                })
            }
            Family::Gamma { gamma } => {
                let l = log_mgf(gamma, t[0] * u)?;
                if !l.is_finite() {
                    return Ok(Eval { value: f64::INFINITY, grad: vec![f64::NAN], hess: vec![f64::NAN], error: 0.0 });
                }
                Ok(Eval { value: l.value, grad: vec![u * l.d1], hess: vec![u * u * l.d2], error: l.error })
            }
        }
    }

    fn psi(&self, nu: &MeasureSpec) -> Result<Box<dyn SmoothConvex>> {
        match self {
            Family::P { p } => Ok(Box::new(PsiPNu::new(PExponent::Finite(*p), nu)?)),
            Family::Gamma { gamma } => Ok(Box::new(PsiGammaNu::new(gamma, nu)?)),
        }
    }

    fn gamma_radius(&self) -> f64 {
        match self {
            Family::Gamma { gamma: MeasureSpec::GeneralizedNormal { p: PExponent::Infinite } } => 1.0,
            Family::Gamma { gamma: MeasureSpec::UniformInterval { a, b } } if *a == -*b => *b,
            _ => f64::INFINITY,
        }
    }

    /// Whether `Ψ*_ν(τ) < ∞`, by the Hölder bound on the range of `∇Ψ_ν`.
    fn conjugate_feasible(&self, tau: &[f64], nu: &MeasureSpec) -> bool {
        match self {
            Family::P { p } => {
                tau[1] > 0.0 && tau[0].abs() < quenched_radius(PExponent::Finite(*p), nu) * tau[1].powf(1.0 / p)
            }
            Family::Gamma { .. } => tau[0].abs() < self.gamma_radius() * nu.abs_moment(1.0),
        }
    }

    fn contraction_feasible(&self, w: f64, nu: &MeasureSpec) -> bool {
        match self {
            Family::P { p } => w.abs() < quenched_radius(PExponent::Finite(*p), nu),
            Family::Gamma { .. } => w.abs() < self.gamma_radius() * nu.abs_moment(1.0),
        }
    }
}

/// A minimizing or maximizing grid measure with its diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalSolution {
    #[serde(with = "crate::extreal")]
    pub value: f64,
    pub minimizer: MeasureSpec,
    #[serde(with = "crate::extreal::vec")]
    pub objective_trace: Vec<f64>,
    #[serde(with = "crate::extreal")]
    pub kkt_residual: f64,
    /// The dual point `t` at the solution.
    pub dual: Vec<f64>,
    pub entropy: Entropy,
}

/// Grid, reference cell masses and validation shared by the variational solvers.
struct GridCtx {
    u: Vec<f64>,
    u2: Vec<f64>,
    ln_pi: Vec<f64>,
}

const GRID_SPAN: f64 = 6.0;

impl GridCtx {
    fn new(grid: &[f64]) -> Result<Self> {
        let n = grid.len();
        if n < 3 || grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("grid must have at least 3 strictly increasing points"));
        }
        if (0..n).any(|i| (grid[i] + grid[n - 1 - i]).abs() > 1e-12 * grid[n - 1].abs().max(1.0)) {
            return Err(Error::domain("grid must be symmetric about 0"));
        }
        if grid[n - 1] < GRID_SPAN - 1e-12 {
            return Err(Error::domain("grid must cover [-6, 6]"));
        }
        let pi = gaussian_cell_masses(grid);
        if pi.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::domain("grid reaches cells with no Gaussian mass"));
        }
        Ok(GridCtx { u: grid.to_vec(), u2: grid.iter().map(|x| x * x).collect(), ln_pi: pi.iter().map(|c| c.ln()).collect() })
    }

    /// Normalizes log weights; returns the weights.
    fn normalize(&self, ln_nu: &mut [f64]) -> Vec<f64> {
        let m = ln_nu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = ln_nu.iter().map(|x| (x - m).exp()).sum();
        let c = m + z.ln();
        ln_nu.iter_mut().for_each(|x| *x -= c);
        ln_nu.iter().map(|x| x.exp()).collect()
    }

    fn m2(&self, w: &[f64]) -> f64 {
        w.iter().zip(&self.u2).map(|(a, b)| a * b).sum()
    }

    /// KL projection onto `{m_2 ≤ 1}`: `ν ∝ ν e^{−β u²}` with the smallest `β ≥ 0` that works.
    fn project(&self, ln_nu: &mut [f64]) -> (Vec<f64>, f64) {
        let w = self.normalize(ln_nu);
        let target = 1.0 - 1e-13;
        if self.m2(&w) <= target {
            return (w, 0.0);
        }
        let base = ln_nu.to_vec();
        let moment = |beta: f64| -> (f64, f64) {
            let mut l: Vec<f64> = base.iter().zip(&self.u2).map(|(a, b)| a - beta * b).collect();
            let w = self.normalize(&mut l);
            let m = self.m2(&w);
            let v: f64 = w.iter().zip(&self.u2).map(|(a, b)| a * (b - m) * (b - m)).sum();
            (m, v)
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while moment(hi).0 > target {
            lo = hi;
            hi *= 2.0;
        }
        let mut beta = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (m, v) = moment(beta);
            if m > target {
                lo = beta;
            } else {
                hi = beta;
            }
            let newton = beta + (m - target) / v.max(1e-300);
            beta = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-15 * hi.max(1.0) || (m - target).abs() < 1e-15 {
                break;
            }
        }
        // land on the feasible side
        let mut b = beta.max(lo);
        while moment(b).0 > 1.0 {
            b = hi;
            hi *= 1.0 + 1e-12;
        }
        ln_nu.iter_mut().zip(&self.u2).for_each(|(a, u2)| *a -= b * u2);
        (self.normalize(ln_nu), b)
    }

    fn measure(&self, w: &[f64]) -> MeasureSpec {
        let s: f64 = w.iter().sum();
        MeasureSpec::GridDiscrete { points: self.u.clone(), weights: w.iter().map(|x| x / s).collect() }
    }

    fn entropy(&self, ln_nu: &[f64], w: &[f64]) -> Entropy {
        let m2 = self.m2(w);
        let h: f64 = w.iter().zip(ln_nu).zip(&self.ln_pi).filter(|((a, _), _)| **a > 0.0).map(|((a, l), p)| a * (l - p)).sum();
        let value = if m2 > 1.0 + 1e-12 { f64::INFINITY } else { h + 0.5 * (1.0 - m2) };
        Entropy { value, relative_entropy: h, second_moment: m2 }
    }

    /// Weighted standard deviation of `g + β u²` with the best admissible multiplier `β ≥ 0`.
    fn kkt(&self, w: &[f64], g: &[f64]) -> f64 {
        let mean = |f: &dyn Fn(usize) -> f64| -> f64 { (0..w.len()).map(|j| w[j] * f(j)).sum() };
        let gm = mean(&|j| g[j]);
        let um = mean(&|j| self.u2[j]);
        let cov = mean(&|j| (g[j] - gm) * (self.u2[j] - um));
        let var_u = mean(&|j| (self.u2[j] - um).powi(2));
        let beta = if um >= 1.0 - 1e-9 { (-cov / var_u).max(0.0) } else { 0.0 };
        let h: Vec<f64> = (0..w.len()).map(|j| g[j] + beta * self.u2[j]).collect();
        let hm = mean(&|j| h[j]);
        mean(&|j| (h[j] - hm).powi(2)).sqrt()
    }
}

const KKT_TOL: f64 = 1e-7;
const KKT_ACCEPT: f64 = 1e-6;
const MAX_MIRROR_ITERATIONS: usize = 400;

/// Exponentiated-gradient descent of `ν ↦ Q(ν) + 𝕙(ν)` over grid measures with `m_2 ≤ 1`,
/// where `Q(ν)` is a conjugate-type functional evaluated by `inner`, whose argmax `t*`
/// gives the gradient `−Λ(t* u_j)` by the envelope theorem.
fn mirror_descent<F>(family: &Family, ctx: &GridCtx, feasible: impl Fn(&MeasureSpec) -> bool, mut inner: F) -> Result<VariationalSolution>
where
    F: FnMut(&MeasureSpec, Option<&LegendreResult>) -> Result<LegendreResult>,
{
    let mut ln_nu = ctx.ln_pi.clone();
    let (mut w, _) = ctx.project(&mut ln_nu);
    if !feasible(&ctx.measure(&w)) {
        // push mass towards |u| = 1, where the first moments are largest under m_2 ≤ 1
        let mut found = false;
        for kappa in [0.25, 1.0, 4.0, 16.0, 64.0, 256.0, 1024.0, 4096.0] {
            let mut l: Vec<f64> = ctx.ln_pi.iter().zip(&ctx.u2).map(|(a, b)| a - kappa * (b - 1.0).powi(2)).collect();
            let (wk, _) = ctx.project(&mut l);
            if feasible(&ctx.measure(&wk)) {
                ln_nu = l;
                w = wk;
                found = true;
                break;
            }
        }
        if !found {
            let entropy = ctx.entropy(&ln_nu, &w);
            return Ok(VariationalSolution {
                value: f64::INFINITY,
                minimizer: ctx.measure(&w),
                objective_trace: vec![f64::INFINITY],
                kkt_residual: 0.0,
                dual: vec![f64::NAN; family.dim()],
                entropy,
            });
        }
    }
    let mut sol = inner(&ctx.measure(&w), None)?;
    let mut ent = ctx.entropy(&ln_nu, &w);
    let mut obj = sol.value + ent.value;
    let mut trace = vec![obj];
    let mut eta: f64 = 1.0;
    let mut kkt = f64::INFINITY;
    for _ in 0..MAX_MIRROR_ITERATIONS {
        let a: Vec<f64> = ctx.u.iter().map(|&u| family.atom(&sol.argmax, u).map(|e| e.value)).collect::<Result<_>>()?;
        let target: Vec<f64> = (0..a.len()).map(|j| ctx.ln_pi[j] + a[j] + 0.5 * ctx.u2[j]).collect();
        let g: Vec<f64> = (0..a.len()).map(|j| ln_nu[j] - target[j]).collect();
        kkt = ctx.kkt(&w, &g);
        if kkt < KKT_TOL {
            break;
        }
        let mut moved = false;
        while eta > 1e-10 {
            let mut trial: Vec<f64> = (0..a.len()).map(|j| (1.0 - eta) * ln_nu[j] + eta * target[j]).collect();
            let (wt, _) = ctx.project(&mut trial);
            let m = ctx.measure(&wt);
            if !feasible(&m) {
                eta *= 0.5;
                continue;
            }
            let s = inner(&m, Some(&sol))?;
            let e = ctx.entropy(&trial, &wt);
            let o = s.value + e.value;
            if o.is_finite() && o <= obj + 1e-12 * obj.abs().max(1.0) {
                ln_nu = trial;
                w = wt;
                sol = s;
                ent = e;
                obj = o;
                trace.push(obj);
                moved = true;
                eta = (eta * 2.0).min(1.0);
                break;
            }
            eta *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if kkt >= KKT_ACCEPT {
        // one last measurement at the final point
        let a: Vec<f64> = ctx.u.iter().map(|&u| family.atom(&sol.argmax, u).map(|e| e.value)).collect::<Result<_>>()?;
        let g: Vec<f64> = (0..a.len()).map(|j| ln_nu[j] - ctx.ln_pi[j] - a[j] - 0.5 * ctx.u2[j]).collect();
        kkt = ctx.kkt(&w, &g);
        if kkt >= KKT_ACCEPT {
            return Err(Error::NonConvergence { what: "mirror descent".into(), iterations: trace.len(), last: trace, grad_norm: kkt });
        }
    }
    Ok(VariationalSolution { value: obj, minimizer: ctx.measure(&w), objective_trace: trace, kkt_residual: kkt, dual: sol.argmax, entropy: ent })
}

/// `inf_ν { I^q_{ν}(w) + 𝕙(ν) }` over measures on `grid`: the annealed rate through the
/// quenched rates of all limiting empirical measures of the directions.
pub fn variational_annealed(family: &Family, w: f64, grid: &[f64]) -> Result<VariationalSolution> {
    let ctx = GridCtx::new(grid)?;
    let a = w.abs();
    if !a.is_finite() {
        return Err(Error::domain("w must be finite"));
    }
    let fam = family.clone();
    mirror_descent(family, &ctx, |nu| fam.contraction_feasible(a, nu), |nu, warm| quenched_on(family, nu, a, warm))
}

fn quenched_on(family: &Family, nu: &MeasureSpec, w: f64, warm: Option<&LegendreResult>) -> Result<LegendreResult> {
    let f = family.psi(nu)?;
    match family {
        Family::P { p } => {
            let spec = ContractionSpec { kind: ContractionKind::Quenched2, w, p: PExponent::Finite(*p) };
            rate_infimum_warm(f.as_ref(), &spec, warm)
        }
        Family::Gamma { .. } => conjugate(f.as_ref(), &[w], warm.map(|r| r.argmax.as_slice())),
    }
}

/// The objective `I^q_{ν}(w) + 𝕙(ν)` at a given grid measure.
pub fn variational_objective(family: &Family, w: f64, nu: &MeasureSpec) -> Result<f64> {
    let e = entropy_h(nu)?;
    if !e.value.is_finite() || !family.contraction_feasible(w, nu) {
        return Ok(f64::INFINITY);
    }
    Ok(quenched_on(family, nu, w.abs(), None)?.value + e.value)
}

/// `Φ̃(t) = sup_ν { Ψ_ν(t) − 𝕙(ν) }` over measures on a grid, in closed form through its
/// Gibbs maximizer `ν° ∝ π e^{Λ(t u) + (½ − λ) u²}` with `λ ≥ 0` the multiplier of `m_2 ≤ 1`.
#[derive(Clone, Debug)]
pub struct VaradhanDual {
    family: Family,
    ctx_u: Vec<f64>,
    u2: Vec<f64>,
    ln_pi: Vec<f64>,
}

struct Gibbs {
    value: f64,
    ln_nu: Vec<f64>,
    lambda: f64,
    atoms: Vec<Eval>,
}

impl VaradhanDual {
    pub fn new(family: &Family, grid: &[f64]) -> Result<Self> {
        let ctx = GridCtx::new(grid)?;
        Ok(VaradhanDual { family: family.clone(), ctx_u: ctx.u, u2: ctx.u2, ln_pi: ctx.ln_pi })
    }

    fn gibbs(&self, t: &[f64]) -> Result<Option<Gibbs>> {
        if !self.family.t_in_domain(t) {
            return Ok(None);
        }
        let atoms: Vec<Eval> = self.ctx_u.iter().map(|&u| self.family.atom(t, u)).collect::<Result<_>>()?;
        if atoms.iter().any(|e| !e.value.is_finite()) {
            return Ok(None);
        }
        let base: Vec<f64> = (0..atoms.len()).map(|j| self.ln_pi[j] + atoms[j].value + 0.5 * self.u2[j]).collect();
        // G(λ) = log Σ e^{base − λu²} + λ is convex with G'(λ) = 1 − m_2(ν_λ)
        let at = |lambda: f64| -> (f64, Vec<f64>, f64, f64) {
            let l: Vec<f64> = base.iter().zip(&self.u2).map(|(b, u2)| b - lambda * u2).collect();
            let m = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = l.iter().map(|x| (x - m).exp()).sum();
            let lz = m + z.ln();
            let ln_nu: Vec<f64> = l.iter().map(|x| x - lz).collect();
            let (mut m2, mut s2) = (0.0, 0.0);
            for (a, u2) in ln_nu.iter().zip(&self.u2) {
                let w = a.exp();
                m2 += w * u2;
                s2 += w * u2 * u2;
            }
            (lz + lambda, ln_nu, m2, s2 - m2 * m2)
        };
        let (g0, l0, m0, _) = at(0.0);
        if m0 <= 1.0 {
            return Ok(Some(Gibbs { value: g0 - 0.5, ln_nu: l0, lambda: 0.0, atoms }));
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while at(hi).2 > 1.0 {
            lo = hi;
            hi *= 2.0;
        }
        let mut lambda = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (_, _, m, v) = at(lambda);
            if m > 1.0 {
                lo = lambda;
            } else {
                hi = lambda;
            }
            let newton = lambda + (m - 1.0) / v.max(1e-300);
            lambda = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-15 * hi.max(1.0) || (m - 1.0).abs() < 1e-15 {
                break;
            }
        }
        let (g, ln_nu, _, _) = at(lambda);
        Ok(Some(Gibbs { value: g - 0.5, ln_nu, lambda, atoms }))
    }
}

impl SmoothConvex for VaradhanDual {
    fn dim(&self) -> usize {
        self.family.dim()
    }
    fn in_domain(&self, t: &[f64]) -> bool {
        self.family.t_in_domain(t)
    }
    fn eval(&self, t: &[f64]) -> Result<Eval> {
        let d = self.dim();
        let Some(gb) = self.gibbs(t)? else {
            return Ok(Eval { value: f64::INFINITY, grad: vec![f64::NAN; d], hess: vec![f64::NAN; d * d], error: 0.0 });
        };
        let w: Vec<f64> = gb.ln_nu.iter().map(|x| x.exp()).collect();
        let mut grad = vec![0.0; d];
        let mut m2 = 0.0;
        for (j, e) in gb.atoms.iter().enumerate() {
            for i in 0..d {
                grad[i] += w[j] * e.grad[i];
            }
            m2 += w[j] * self.u2[j];
        }
        let mut hess = vec![0.0; d * d];
        let mut cov_u = vec![0.0; d];
        let mut var_u = 0.0;
        for (j, e) in gb.atoms.iter().enumerate() {
            let du = self.u2[j] - m2;
            var_u += w[j] * du * du;
            for i in 0..d {
                let gi = e.grad[i] - grad[i];
                cov_u[i] += w[j] * gi * du;
                for k in 0..d {
                    hess[i * d + k] += w[j] * (e.hess[i * d + k] + gi * (e.grad[k] - grad[k]));
                }
            }
        }
        if gb.lambda > 0.0 {
            for i in 0..d {
                for k in 0..d {
                    hess[i * d + k] -= cov_u[i] * cov_u[k] / var_u;
                }
            }
        }
        let error = gb.atoms.iter().map(|e| e.error).fold(0.0, f64::max);
        Ok(Eval { value: gb.value, grad, hess, error })
    }
}

/// `Φ̃_p(t1, t2)` and its maximizing grid measure.
pub fn varadhan_sup(p: PExponent, t1: f64, t2: f64, grid: &[f64]) -> Result<VariationalSolution> {
    let family = Family::from_p(p)?;
    if family.dim() != 2 {
        return Err(Error::domain("varadhan_sup takes (t1, t2); use the product family for p = ∞"));
    }
    varadhan_sup_family(&family, &[t1, t2], grid)
}

pub fn varadhan_sup_family(family: &Family, t: &[f64], grid: &[f64]) -> Result<VariationalSolution> {
    let dual = VaradhanDual::new(family, grid)?;
    let ctx = GridCtx::new(grid)?;
    let Some(gb) = dual.gibbs(t)? else {
        return Err(Error::domain("t outside the domain of Φ̃"));
    };
    let w: Vec<f64> = gb.ln_nu.iter().map(|x| x.exp()).collect();
    let entropy = ctx.entropy(&gb.ln_nu, &w);
    let m2 = entropy.second_moment;
    let kkt = if gb.lambda > 0.0 { (m2 - 1.0).abs() } else { (m2 - 1.0).max(0.0) };
    Ok(VariationalSolution {
        value: gb.value,
        minimizer: ctx.measure(&w),
        objective_trace: vec![gb.value],
        kkt_residual: kkt,
        dual: t.to_vec(),
        entropy,
    })
}

/// `Φ̃*_p(τ1, τ2) = inf_ν { Ψ*_ν(τ1, τ2) + 𝕙(ν) }` by mirror descent over grid measures.
pub fn minimax_conjugate(p: PExponent, tau1: f64, tau2: f64, grid: &[f64]) -> Result<VariationalSolution> {
    let family = Family::from_p(p)?;
    if family.dim() != 2 {
        return Err(Error::domain("minimax_conjugate takes (τ1, τ2); use the product family for p = ∞"));
    }
    minimax_conjugate_family(&family, &[tau1, tau2], grid)
}

pub fn minimax_conjugate_family(family: &Family, tau: &[f64], grid: &[f64]) -> Result<VariationalSolution> {
    let ctx = GridCtx::new(grid)?;
    if let Family::P { p } = family {
        // m_{p'} ≤ m_2^{p'/2} ≤ 1 for p ≥ 2 rules out |τ1|^p ≥ τ2 for every admissible ν
        if !(tau[1] > 0.0) || (*p >= 2.0 && tau[0].abs().powf(*p) >= tau[1]) {
            let w: Vec<f64> = ctx.ln_pi.iter().map(|x| x.exp()).collect();
            return Ok(VariationalSolution {
                value: f64::INFINITY,
                minimizer: ctx.measure(&w),
                objective_trace: vec![f64::INFINITY],
                kkt_residual: 0.0,
                dual: vec![f64::NAN; 2],
                entropy: ctx.entropy(&ctx.ln_pi, &w),
            });
        }
    }
    let fam = family.clone();
    mirror_descent(family, &ctx, |nu| fam.conjugate_feasible(tau, nu), |nu, warm| {
        let f = family.psi(nu)?;
        conjugate(f.as_ref(), tau, warm.map(|r| r.argmax.as_slice()))
    })
}

// ---------------------------------------------------------------------------------------------
// Tails

/// Log of `∫_x^∞ e^{−y^p/p} dy` with the two-sided bounds `x/(x^p+1) e^{−x^p/p}` and
/// `x^{1−p} e^{−x^p/p}` (valid for `x ≥ 1`), all as logarithms `(lower, exact, upper)`.
pub fn mu_p_tail_brackets(p: f64, x: f64) -> (f64, f64, f64) {
    let xp = x.powf(p);
    let exact = ln_gamma_upper_regularized(1.0 / p, xp / p) + ln_gamma(1.0 / p) + (1.0 / p - 1.0) * p.ln();
    let lower = x.ln() - xp.ln_1p() - xp / p;
    let upper = (1.0 - p) * x.ln() - xp / p;
    (lower, exact, upper)
}

/// `t^{−r_p} log P(Y Z ≥ t)` for independent `Y ~ μ_p`, `Z ~ μ_2`, computed in the log domain.
pub fn tail_product_exponent(p: f64, t: f64) -> Result<f64> {
    if !(1.0..2.0).contains(&p) {
        return Err(Error::domain("tail_product_exponent needs p in [1, 2)"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain("tail_product_exponent needs t > 0"));
    }
    // P(YZ ≥ t) = ∫_0^∞ φ(z) 2 P(Y ≥ t/z) dz and 2 P(Y ≥ x) = Q(1/p, x^p/p)
    let band_violation = std::cell::Cell::new(false);
    let h = |z: f64| -> f64 {
        let x = t / z;
        let lq = ln_gamma_upper_regularized(1.0 / p, x.powf(p) / p);
        if x >= 1.0 {
            let (lo, ex, hi) = mu_p_tail_brackets(p, x);
            if ex < lo - 1e-9 * lo.abs().max(1.0) || ex > hi + 1e-9 * hi.abs().max(1.0) {
                band_violation.set(true);
            }
        }
        -0.5 * z * z - LN_SQRT_2PI + lq
    };
    // mode of −z²/2 − (t/z)^p/p
    let guess = t.powf(p / (p + 2.0));
    let (mut a, mut b) = (guess * 1e-3, guess * 10.0);
    let gr = 0.618_033_988_749_894_9;
    for _ in 0..200 {
        let c = b - gr * (b - a);
        let d = a + gr * (b - a);
        if h(c) > h(d) {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-12 * guess {
            break;
        }
    }
    let mode = 0.5 * (a + b);
    let hmax = h(mode);
    let drop = 46.0;
    let mut lo = mode;
    while lo > 1e-300 && h(lo) > hmax - drop {
        lo *= 0.5;
    }
    let mut hi = mode + 1.0;
    while h(hi) > hmax - drop {
        hi = mode + 2.0 * (hi - mode);
    }
    let r = integrate_pieces(|z| [(h(z) - hmax).exp()], &[lo, mode, hi], Tolerance { abs: 1e-16, rel: 1e-12, max_intervals: 400 });
    if band_violation.get() {
        return Err(Error::Quadrature { what: "μ_p tail outside its analytic bounds".into(), error: f64::NAN });
    }
    if !r.converged && r.scaled_error() > 1e-9 {
        return Err(Error::Quadrature { what: "product tail".into(), error: r.scaled_error() });
    }
    let log_p = hmax + r.value[0].ln();
    Ok(log_p / t.powf(r_p(p)))
}

/// `(−m_1(ν), m_1(ν))`, the domain endpoints of `Ψ*_{∞,ν}`.
pub fn psi_inf_domain(nu: &MeasureSpec) -> Result<(f64, f64)> {
    nu.validate()?;
    let m1 = nu.abs_moment(1.0);
    Ok((-m1, m1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{default_grid, density_mu_p};
    use crate::numeric::quadrature::integrate;

    fn fin(p: f64) -> PExponent {
        PExponent::Finite(p)
    }

    #[test]
    fn closed_forms() {
        assert!((rate(fin(2.0), &RateKind::J2, 0.5).unwrap() - 0.143_841_036_225_890_2).abs() < 1e-15);
        let v = rate(fin(1.0), &RateKind::AnnealedSub2, 0.5).unwrap();
        assert!((v - 1.5 * 0.5f64.powf(2.0 / 3.0)).abs() < 1e-15);
        assert!((v - 0.944_940_787_421_155).abs() < 1e-12);
        let v = rate(fin(1.0), &RateKind::QuenchedP1 { c: 2f64.sqrt() }, 0.5).unwrap();
        assert!((v - 0.353_553_390_593_273_8).abs() < 1e-15);
        assert_eq!(rate(fin(4.0), &RateKind::Cramer, 0.0).unwrap(), 0.0);
        assert_eq!(rate(fin(3.0), &RateKind::E1Projection, 1.0).unwrap(), f64::INFINITY);
        assert!((rate(fin(2.0), &RateKind::E1Projection, 0.3).unwrap() - j2(0.3)).abs() < 1e-15);
    }

    #[test]
    fn invalid_kinds() {
        assert!(rate(fin(4.0), &RateKind::AnnealedSub2, 0.3).is_err());
        assert!(rate(fin(1.0), &RateKind::QuenchedP1 { c: 0.0 }, 0.3).is_err());
        assert!(rate(fin(2.0), &RateKind::QuenchedP1 { c: 1.0 }, 0.3).is_err());
    }

    #[test]
    fn speeds() {
        assert_eq!(RateKind::AnnealedSub2.speed(fin(1.0)), SpeedSpec::Power { r: 2.0 / 3.0 });
        assert_eq!(RateKind::QuenchedP1 { c: 1.0 }.speed(fin(1.0)), SpeedSpec::NOverSqrtLogN);
        assert_eq!(RateKind::Cramer.speed(fin(4.0)), SpeedSpec::LinearN);
    }

    #[test]
    fn entropy_examples() {
        let grid = default_grid();
        let mu = MeasureSpec::mu2().discretize(&grid).unwrap();
        let e = entropy_h(&mu).unwrap();
        assert!(e.value.abs() < 1e-3 && e.value >= 0.0, "{e:?}");

        let mut w = vec![0.0; grid.len()];
        w[0] = 0.5 * 1.5 / 36.0;
        w[240] = w[0];
        w[120] = 1.0 - 2.0 * w[0];
        let e = entropy_h(&MeasureSpec::GridDiscrete { points: grid.clone(), weights: w }).unwrap();
        assert!((e.second_moment - 1.5).abs() < 1e-12);
        assert_eq!(e.value, f64::INFINITY);

        // ∫ f log(f/φ) for the uniform law on [−√3, √3], by quadrature
        let s3 = 3f64.sqrt();
        let f = 1.0 / (2.0 * s3);
        let oracle = integrate(|x| [f * (f.ln() + LN_SQRT_2PI + 0.5 * x * x)], -s3, s3, Tolerance::default()).value[0];
        let u = MeasureSpec::UniformInterval { a: -s3, b: s3 }.discretize(&grid).unwrap();
        let e = entropy_h(&u).unwrap();
        assert!((e.relative_entropy - oracle).abs() < 1e-3, "{} {oracle}", e.relative_entropy);
    }

    #[test]
    fn wasserstein_of_shift() {
        let g = linspace_sym();
        let mut a = vec![0.0; g.len()];
        let mut b = vec![0.0; g.len()];
        a[10] = 1.0;
        b[14] = 1.0;
        assert!((wasserstein1_grid(&g, &a, &b) - (g[14] - g[10])).abs() < 1e-14);
    }

    fn linspace_sym() -> Vec<f64> {
        crate::measures::linspace(-6.0, 6.0, 49)
    }

    #[test]
    fn tail_brackets_hold() {
        for p in [1.0, 1.3, 1.7] {
            for k in 0..40 {
                let x = 1.0 + 0.5 * k as f64;
                let (lo, ex, hi) = mu_p_tail_brackets(p, x);
                assert!(lo <= ex + 1e-12 && ex <= hi + 1e-12, "p={p} x={x}: {lo} {ex} {hi}");
            }
        }
        // exact tail against direct quadrature of the density
        let p: f64 = 1.5;
        let c = 2.0 * p.powf(1.0 / p) * ln_gamma(1.0 + 1.0 / p).exp();
        let direct = integrate(|y| [density_mu_p(fin(p), y)], 2.0, 60.0, Tolerance::default()).value[0];
        let (_, ex, _) = mu_p_tail_brackets(p, 2.0);
        assert!((ex.exp() / c - direct).abs() < 1e-13);
    }

    #[test]
    fn product_tail_exponent() {
        assert!(tail_product_exponent(1.0, 0.0).is_err());
        // t → 0+: P(YZ ≥ t) → ½
        let small = tail_product_exponent(1.0, 1e-9).unwrap() * 1e-9f64.powf(2.0 / 3.0);
        assert!((small - 0.5f64.ln()).abs() < 1e-5);
        // p = 1 has a closed form inner tail e^{−x}/1: brute-force 2D oracle at t = 10
        let t = 10.0;
        let inner = |z: f64| [(-0.5 * z * z - LN_SQRT_2PI - t / z).exp()];
        let oracle = integrate(inner, 1e-6, 40.0, Tolerance::default()).value[0].ln() / t.powf(2.0 / 3.0);
        assert!((tail_product_exponent(1.0, t).unwrap() - oracle).abs() < 1e-10);
        let v: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|&t| tail_product_exponent(1.0, t).unwrap()).collect();
        assert!(v[0] < v[1] && v[1] < v[2] && v[2] < -1.5 + 0.15 && v[2] > -1.5 - 0.15, "{v:?}");
    }

    #[test]
    fn psi_inf_domain_examples() {
        let (lo, hi) = psi_inf_domain(&MeasureSpec::mu2()).unwrap();
        assert!((hi - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14 && lo == -hi);
        let s3 = 3f64.sqrt();
        let (_, hi) = psi_inf_domain(&MeasureSpec::UniformInterval { a: -s3, b: s3 }).unwrap();
        assert!((hi - s3 / 2.0).abs() < 1e-14);
        assert_eq!(psi_inf_domain(&MeasureSpec::Dirac { point: 0.0 }).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn quenched_domain_radius() {
        // (E|Z|^{4/3})^{3/4} for p = 4
        let r = quenched_radius(fin(4.0), &MeasureSpec::mu2());
        let m = 2f64.powf(2.0 / 3.0) * ln_gamma(7.0 / 6.0).exp() / std::f64::consts::PI.sqrt();
        assert!((r - m.powf(0.75)).abs() < 1e-13);
        assert_eq!(rate(fin(4.0), &RateKind::quenched_mu2(), 0.9).unwrap(), f64::INFINITY);
    }

    #[test]
    fn varadhan_examples() {
        let grid = default_grid();
        let p = fin(4.0);
        let z = varadhan_sup(p, 0.0, 0.0, &grid).unwrap();
        assert!(z.value.abs() < 1e-6, "{}", z.value);

        let lam = LambdaP::new(p).unwrap();
        let s = varadhan_sup(p, 0.0, 0.1, &grid).unwrap();
        let l = lam.eval(&[0.0, 0.1]).unwrap().value;
        assert!((s.value - l).abs() < 1e-6);
        // oracle: the objective at discretized μ_2 and at perturbations of it is not larger
        let mu = MeasureSpec::mu2().discretize(&grid).unwrap();
        let (pts, base) = mu.atoms().unwrap();
        for k in 0..5 {
            let eps = 0.02 * (k as f64 + 1.0);
            let mut w: Vec<f64> = base.iter().zip(&pts).map(|(b, u)| b * (1.0 + eps * (u * (k as f64 + 1.0)).cos())).collect();
            let s_: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= s_);
            let nu = MeasureSpec::GridDiscrete { points: pts.clone(), weights: w };
            let h = entropy_h(&nu).unwrap().value;
            assert!(l - h <= s.value + 1e-12);
        }
        let h0 = entropy_h(&mu).unwrap().value;
        assert!(l - h0 <= s.value + 1e-12 && l - h0 >= s.value - 1e-6);

        let s = varadhan_sup(p, 1.0, 0.0, &grid).unwrap();
        let l = lam.eval(&[1.0, 0.0]).unwrap().value;
        assert!(l - s.value >= 1e-4, "{} {l}", s.value);
    }

    #[test]
    fn varadhan_dual_derivatives() {
        let f = VaradhanDual::new(&Family::P { p: 4.0 }, &default_grid()).unwrap();
        let t = [0.7, 0.05];
        let e = f.eval(&t).unwrap();
        for i in 0..2 {
            let h = 1e-5;
            let mut a = t;
            let mut b = t;
            a[i] += h;
            b[i] -= h;
            let (ea, eb) = (f.eval(&a).unwrap(), f.eval(&b).unwrap());
            assert!(((ea.value - eb.value) / (2.0 * h) - e.grad[i]).abs() < 1e-7);
            for k in 0..2 {
                let fd = (ea.grad[k] - eb.grad[k]) / (2.0 * h);
                assert!((fd - e.hess[i * 2 + k]).abs() < 1e-5 * (1.0 + fd.abs()), "{i}{k} {fd} {}", e.hess[i * 2 + k]);
            }
        }
    }

    #[test]
    fn gibbs_measure_is_optimal_against_perturbations() {
        let grid = default_grid();
        let fam = Family::P { p: 4.0 };
        let t = [0.8, 0.05];
        let s = varadhan_sup_family(&fam, &t, &grid).unwrap();
        let obj = |nu: &MeasureSpec| -> f64 {
            let psi = fam.psi(nu).unwrap().eval(&t).unwrap().value;
            psi - entropy_h(nu).unwrap().value
        };
        assert!((obj(&s.minimizer) - s.value).abs() < 1e-9);
        let (pts, base) = s.minimizer.atoms().unwrap();
        for k in 1..6 {
            let mut w: Vec<f64> = base.iter().zip(&pts).map(|(b, u)| b * (1.0 + 0.05 * (k as f64 * u).sin() - 0.01 * u * u)).collect();
            let z: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= z);
            let nu = MeasureSpec::GridDiscrete { points: pts.clone(), weights: w };
            assert!(obj(&nu) <= s.value + 1e-12);
        }
    }
}
