//! Reference measures on the line: the generalized normal family μ_p, the uniform law on ℓ^p
//! balls, Haar directions on the sphere, and quadrature rules for integrating against them.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngExt};
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::quadrature::{self, integrate_pieces, Tolerance};
use crate::numeric::special::{ln_gamma, normal_cdf, normal_quantile};

/// The exponent `p ∈ [1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PExponent {
    Finite(f64),
    Infinite,
}

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(PExponent::Infinite)
        } else if p.is_finite() && p >= 1.0 {
            Ok(PExponent::Finite(p))
        } else {
            Err(Error::domain(format!("p must lie in [1, inf], got {p}")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            PExponent::Finite(p) => p,
            PExponent::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            PExponent::Finite(p) => Some(p),
            PExponent::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, PExponent::Infinite)
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        match self {
            PExponent::Finite(p) => 1.0 / p,
            PExponent::Infinite => 0.0,
        }
    }

    /// Hölder conjugate `p/(p−1)`; `+∞` at `p = 1` and `1` at `p = ∞`.
    pub fn conjugate(self) -> f64 {
        match self {
            PExponent::Finite(p) if p == 1.0 => f64::INFINITY,
            PExponent::Finite(p) => p / (p - 1.0),
            PExponent::Infinite => 1.0,
        }
    }

    /// `n^{1/p}`, with `n^{1/∞} = 1`.
    pub fn n_pow_recip(self, n: usize) -> f64 {
        (n as f64).powf(self.recip())
    }

    /// `‖x‖_p`.
    pub fn norm(self, x: &[f64]) -> f64 {
        match self {
            PExponent::Infinite => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            PExponent::Finite(p) if p == 2.0 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            PExponent::Finite(p) if p == 1.0 => x.iter().map(|v| v.abs()).sum(),
            PExponent::Finite(p) => x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for PExponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(PExponent::Infinite),
            t => {
                let p: f64 = t.parse().map_err(|_| Error::domain(format!("cannot parse p from {s:?}")))?;
                PExponent::new(p)
            }
        }
    }
}

impl Serialize for PExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PExponent::Finite(p) => s.serialize_f64(*p),
            PExponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => PExponent::new(p),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// A probability measure on ℝ used as ν, γ or a reference law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum MeasureSpec {
    GeneralizedNormal { p: PExponent },
    UniformInterval { a: f64, b: f64 },
    Dirac { point: f64 },
    GridDiscrete { points: Vec<f64>, weights: Vec<f64> },
    Empirical { samples: Vec<f64> },
}

impl MeasureSpec {
    pub fn mu_p(p: PExponent) -> Self {
        MeasureSpec::GeneralizedNormal { p }
    }

    /// The standard Gaussian μ_2.
    pub fn mu2() -> Self {
        MeasureSpec::GeneralizedNormal { p: PExponent::Finite(2.0) }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MeasureSpec::GeneralizedNormal { .. } => Ok(()),
            MeasureSpec::UniformInterval { a, b } => {
                if a.is_finite() && b.is_finite() && a < b {
                    Ok(())
                } else {
                    Err(Error::InvalidMeasure(format!("uniform interval needs a < b, got [{a}, {b}]")))
                }
            }
            MeasureSpec::Dirac { point } => {
                if point.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidMeasure("dirac point must be finite".into()))
                }
            }
            MeasureSpec::GridDiscrete { points, weights } => {
                if points.is_empty() || points.len() != weights.len() {
                    return Err(Error::InvalidMeasure("grid points and weights must be nonempty and of equal length".into()));
                }
                if points.windows(2).any(|w| !(w[0] < w[1])) || points.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidMeasure("grid points must be finite and strictly increasing".into()));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(Error::InvalidMeasure("grid weights must be finite and nonnegative".into()));
                }
                let s: f64 = weights.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidMeasure(format!("grid weights sum to {s}, not 1")));
                }
                Ok(())
            }
            MeasureSpec::Empirical { samples } => {
                if samples.is_empty() || samples.iter().any(|x| !x.is_finite()) {
                    Err(Error::InvalidMeasure("empirical measure needs finite samples".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// `∫ |x|^r dν`.
    pub fn abs_moment(&self, r: f64) -> f64 {
        match self {
            MeasureSpec::GeneralizedNormal { p: PExponent::Infinite } => 1.0 / (r + 1.0),
            MeasureSpec::GeneralizedNormal { p: PExponent::Finite(p) } => {
                (r / p * p.ln() + ln_gamma((r + 1.0) / p) - ln_gamma(1.0 / p)).exp()
            }
            MeasureSpec::UniformInterval { a, b } => {
                let prim = |x: f64| x.signum() * x.abs().powf(r + 1.0) / (r + 1.0);
                (prim(*b) - prim(*a)) / (b - a)
            }
            MeasureSpec::Dirac { point } => point.abs().powf(r),
            MeasureSpec::GridDiscrete { points, weights } => {
                points.iter().zip(weights).map(|(x, w)| w * x.abs().powf(r)).sum()
            }
            MeasureSpec::Empirical { samples } => {
                samples.iter().map(|x| x.abs().powf(r)).sum::<f64>() / samples.len() as f64
            }
        }
    }

    pub fn second_moment(&self) -> f64 {
        match self {
            MeasureSpec::GridDiscrete { points, weights } => {
                points.iter().zip(weights).map(|(x, w)| w * x * x).sum()
            }
            _ => self.abs_moment(2.0),
        }
    }

    /// Weights at `points` proportional to the density (or indicator) of an absolutely
    /// continuous measure, normalized to a probability vector.
    pub fn discretize(&self, points: &[f64]) -> Result<MeasureSpec> {
        let raw: Vec<f64> = match self {
            MeasureSpec::GeneralizedNormal { p } => points.iter().map(|&y| density_mu_p(*p, y)).collect(),
            MeasureSpec::UniformInterval { a, b } => {
                points.iter().map(|&y| if *a <= y && y <= *b { 1.0 } else { 0.0 }).collect()
            }
            _ => return Err(Error::Unsupported("only absolutely continuous measures can be discretized".into())),
        };
        let s: f64 = raw.iter().sum();
        if !(s > 0.0) {
            return Err(Error::InvalidMeasure("discretization grid misses the support".into()));
        }
        Ok(MeasureSpec::GridDiscrete { points: points.to_vec(), weights: raw.iter().map(|w| w / s).collect() })
    }

    /// Atoms and masses of a finitely supported measure.
    pub fn atoms(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            MeasureSpec::Dirac { point } => Some((vec![*point], vec![1.0])),
            MeasureSpec::GridDiscrete { points, weights } => Some((points.clone(), weights.clone())),
            MeasureSpec::Empirical { samples } => {
                let w = 1.0 / samples.len() as f64;
                Some((samples.clone(), vec![w; samples.len()]))
            }
            _ => None,
        }
    }
}

/// Equispaced grid of `count` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let h = (hi - lo) / (count - 1) as f64;
    (0..count).map(|k| if k + 1 == count { hi } else { lo + h * k as f64 }).collect()
}

/// The default support grid for discretized measures: 241 points on `[−6, 6]`.
pub fn default_grid() -> Vec<f64> {
    linspace(-6.0, 6.0, 241)
}

/// μ_2 masses of the cells of `points`, with cell boundaries at midpoints and outer cells unbounded.
pub fn gaussian_cell_masses(points: &[f64]) -> Vec<f64> {
    let n = points.len();
    (0..n)
        .map(|j| {
            let lo = if j == 0 { f64::NEG_INFINITY } else { 0.5 * (points[j - 1] + points[j]) };
            let hi = if j + 1 == n { f64::INFINITY } else { 0.5 * (points[j] + points[j + 1]) };
            // difference of tails on the side away from zero keeps far cells accurate
            if lo >= 0.0 {
                normal_cdf(-lo) - normal_cdf(-hi)
            } else {
                normal_cdf(hi) - normal_cdf(lo)
            }
        })
        .collect()
}

fn ln_norm_const(p: f64) -> f64 {
    // ln(2 p^{1/p} Γ(1 + 1/p))
    std::f64::consts::LN_2 + p.ln() / p + ln_gamma(1.0 + 1.0 / p)
}

/// Density of μ_p.
pub fn density_mu_p(p: PExponent, y: f64) -> f64 {
    match p {
        PExponent::Infinite => {
            if y.abs() <= 1.0 {
                0.5
            } else {
                0.0
            }
        }
        PExponent::Finite(p) => (-y.abs().powf(p) / p - ln_norm_const(p)).exp(),
    }
}

/// Sampler for μ_p: `|Y| = (pG)^{1/p}` with `G ~ Gamma(1/p, 1)` and an independent sign.
#[derive(Clone, Debug)]
pub struct MuPSampler {
    p: PExponent,
    gamma: Option<Gamma<f64>>,
}

impl MuPSampler {
    pub fn new(p: PExponent) -> Self {
        let gamma = match p {
            PExponent::Finite(q) if q != 1.0 && q != 2.0 => Some(Gamma::new(1.0 / q, 1.0).expect("valid shape")),
            _ => None,
        };
        MuPSampler { p, gamma }
    }
}

impl Distribution<f64> for MuPSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.p {
            PExponent::Infinite => 2.0 * rng.random::<f64>() - 1.0,
            PExponent::Finite(p) if p == 2.0 => rng.sample(StandardNormal),
            PExponent::Finite(p) if p == 1.0 => {
                let e: f64 = rng.sample(Exp1);
                if rng.random::<bool>() { e } else { -e }
            }
            PExponent::Finite(p) => {
                let g = self.gamma.as_ref().unwrap().sample(rng);
                let m = (p * g).powf(1.0 / p);
                if rng.random::<bool>() { m } else { -m }
            }
        }
    }
}

pub fn sample_mu_p<R: Rng + ?Sized>(p: PExponent, rng: &mut R) -> f64 {
    MuPSampler::new(p).sample(rng)
}

/// A unit vector in ℝ^n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub coords: Vec<f64>,
}

impl Direction {
    pub fn from_vector(mut v: Vec<f64>) -> Result<Self> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::domain("cannot normalize a zero or non-finite vector"));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        Ok(Direction { coords: v })
    }

    /// `ι^{(n)} = n^{−1/2}(1, …, 1)`.
    pub fn iota(n: usize) -> Self {
        Direction { coords: vec![1.0 / (n as f64).sqrt(); n] }
    }

    pub fn e1(n: usize) -> Self {
        let mut c = vec![0.0; n];
        c[0] = 1.0;
        Direction { coords: c }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Atoms `√n θ_i` of the empirical measure `L_{n,θ}`.
    pub fn scaled_atoms(&self) -> Vec<f64> {
        let s = (self.dim() as f64).sqrt();
        self.coords.iter().map(|t| s * t).collect()
    }
}

/// Haar-distributed direction on the sphere `S^{n−1}`.
pub fn sample_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Direction> {
    if n == 0 {
        return Err(Error::domain("sphere dimension must be positive"));
    }
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if v.iter().any(|x: &f64| *x != 0.0) {
            return Direction::from_vector(v);
        }
    }
}

/// A point of the ball `B_{n,p}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallSample {
    pub coords: Vec<f64>,
    pub p: PExponent,
}

/// Uniform point in `B_{n,p}`, as `U^{1/n} Y/‖Y‖_p` with `Y ~ μ_p^{⊗n}` (uniform cube for p = ∞).
pub fn sample_ball<R: Rng + ?Sized>(p: PExponent, n: usize, rng: &mut R) -> Result<BallSample> {
    if n == 0 {
        return Err(Error::domain("ball dimension must be positive"));
    }
    let sampler = MuPSampler::new(p);
    let mut coords = vec![0.0; n];
    fill_ball(p, &sampler, &mut coords, rng);
    Ok(BallSample { coords, p })
}

pub(crate) fn fill_ball<R: Rng + ?Sized>(p: PExponent, sampler: &MuPSampler, out: &mut [f64], rng: &mut R) {
    for x in out.iter_mut() {
        *x = sampler.sample(rng);
    }
    if p.is_infinite() {
        return;
    }
    let norm = p.norm(out);
    let u: f64 = rng.random::<f64>();
    let scale = u.powf(1.0 / out.len() as f64) / norm;
    out.iter_mut().for_each(|x| *x *= scale);
}

/// Generalized inverse cdf `F^{−1}(u) = inf{x : F(x) ≥ u}` for `u ∈ (0, 1)`.
pub fn quantile(measure: &MeasureSpec, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!("quantile needs u in (0,1), got {u}")));
    }
    measure.validate()?;
    Ok(match measure {
        MeasureSpec::GeneralizedNormal { p: PExponent::Finite(p) } if *p == 2.0 => normal_quantile(u).unwrap(),
        MeasureSpec::GeneralizedNormal { p: PExponent::Infinite } => 2.0 * u - 1.0,
        MeasureSpec::GeneralizedNormal { p: PExponent::Finite(p) } => mu_p_quantile(*p, u),
        MeasureSpec::UniformInterval { a, b } => a + (b - a) * u,
        MeasureSpec::Dirac { point } => *point,
        other => {
            let (x, w) = other.atoms().unwrap();
            let mut acc = 0.0;
            for (xi, wi) in x.iter().zip(&w) {
                acc += wi;
                if acc >= u * (1.0 - 1e-15) {
                    return Ok(*xi);
                }
            }
            *x.last().unwrap()
        }
    })
}

/// `P(|Y| ≤ y) = P(1/p, y^p/p)` for `Y ~ μ_p`, inverted by bisection.
fn mu_p_quantile(p: f64, u: f64) -> f64 {
    let target = (2.0 * u - 1.0).abs();
    let cdf = |y: f64| statrs::function::gamma::gamma_lr(1.0 / p, y.powf(p) / p);
    let mut hi = 1.0;
    while cdf(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    (2.0 * u - 1.0).signum() * 0.5 * (lo + hi)
}

/// Log moment generating function value with its first two derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogMgf {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub error: f64,
}

impl LogMgf {
    pub const INFINITE: LogMgf = LogMgf { value: f64::INFINITY, d1: f64::NAN, d2: f64::NAN, error: 0.0 };

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

const TAIL_DROP: f64 = 46.0;

pub(crate) fn tol_tilted() -> Tolerance {
    Tolerance { abs: 1e-16, rel: 2e-14, max_intervals: 200 }
}

/// `log ∫ e^{s y} μ_∞(dy) = log(sinh s / s)` and derivatives.
pub(crate) fn log_mgf_uniform_sym(s: f64) -> LogMgf {
    let a = s.abs();
    let (value, d1, d2) = if a < 0.1 {
        let s2 = a * a;
        (
            s2 * (1.0 / 6.0 + s2 * (-1.0 / 180.0 + s2 * (1.0 / 2835.0 + s2 * (-1.0 / 37800.0 + s2 / 467_775.0)))),
            a * (1.0 / 3.0 + s2 * (-1.0 / 45.0 + s2 * (2.0 / 945.0 + s2 * (-1.0 / 4725.0 + s2 * 2.0 / 93555.0)))),
            1.0 / 3.0 + s2 * (-1.0 / 15.0 + s2 * (2.0 / 189.0 + s2 * (-7.0 / 4725.0 + s2 * 18.0 / 93555.0))),
        )
    } else {
        let e = (-2.0 * a).exp();
        let value = a + (-e).ln_1p() - std::f64::consts::LN_2 - a.ln();
        let coth = (1.0 + e) / (1.0 - e);
        let csch2 = 4.0 * e / ((1.0 - e) * (1.0 - e));
        (value, coth - 1.0 / a, 1.0 / (a * a) - csch2)
    };
    LogMgf { value, d1: d1.copysign(s), d2, error: 0.0 }
}

/// `log M_{μ_p}(s)` and its first two derivatives.
///
/// Closed forms for p ∈ {1, 2, ∞}. Otherwise the integral is taken over `y ≥ 0` on the folded
/// representation, shifted by the maximum of the log-integrand so that nothing overflows, and
/// with moments centred at the mode so that the second derivative does not cancel.
pub fn log_mgf_mu_p(p: PExponent, s: f64) -> Result<LogMgf> {
    if !s.is_finite() {
        return Err(Error::domain("mgf argument must be finite"));
    }
    match p {
        PExponent::Infinite => Ok(log_mgf_uniform_sym(s)),
        PExponent::Finite(q) if q == 2.0 => Ok(LogMgf { value: 0.5 * s * s, d1: s, d2: 1.0, error: 0.0 }),
        PExponent::Finite(q) if q == 1.0 => {
            if s.abs() >= 1.0 {
                return Ok(LogMgf::INFINITE);
            }
            let u = 1.0 - s * s;
            Ok(LogMgf { value: -u.ln(), d1: 2.0 * s / u, d2: 2.0 * (1.0 + s * s) / (u * u), error: 0.0 })
        }
        PExponent::Finite(q) => log_mgf_quadrature(q, s),
    }
}

fn log_mgf_quadrature(p: f64, s: f64) -> Result<LogMgf> {
    let sign = if s < 0.0 { -1.0 } else { 1.0 };
    let s = s.abs();
    let mode = if s > 0.0 { s.powf(1.0 / (p - 1.0)) } else { 0.0 };
    let gmax = (1.0 - 1.0 / p) * mode.powf(p);
    let mp = mode.powf(p);
    // centred at the mode to avoid cancelling s·y against y^p/p
    let h = |y: f64| {
        if mode > 0.0 {
            let r = (y - mode) / mode;
            mp * (r - (p * r.ln_1p()).exp_m1() / p)
        } else {
            -y.powf(p) / p
        }
    };
    let upper = drop_point(&h, mode);
    let c = mode;
    let mut breaks = vec![0.0];
    if mode > 0.0 {
        let width = 1.0 / ((p - 1.0) * mode.powf(p - 2.0)).sqrt();
        for k in [-4.0, 0.0, 4.0] {
            let b = mode + k * width;
            if b > *breaks.last().unwrap() && b < upper {
                breaks.push(b);
            }
        }
    }
    breaks.push(upper);
    let r = integrate_pieces(
        |y| {
            let e = h(y).exp();
            let t = (-2.0 * s * y).exp();
            let (dm, dp) = (y - c, y + c);
            [e * (1.0 + t), e * (dm - dp * t), e * (dm * dm + dp * dp * t)]
        },
        &breaks,
        tol_tilted(),
    );
    let [b0, b1, b2] = r.value;
    let err = r.error[0] / b0;
    if !r.converged && err > 1e-10 {
        return Err(Error::Quadrature { what: format!("log mgf of mu_{p} at s={s}"), error: err });
    }
    let shift = b1 / b0;
    Ok(LogMgf {
        value: gmax + b0.ln() - ln_norm_const(p),
        d1: sign * (c + shift),
        d2: b2 / b0 - shift * shift,
        error: err,
    })
}

/// First point right of `mode` where the concave log-integrand `h` (with `h(mode) = 0`) has dropped below `−TAIL_DROP`.
pub(crate) fn drop_point<H: Fn(f64) -> f64>(h: &H, mode: f64) -> f64 {
    let mut step = 1.0;
    while h(mode + step) > -TAIL_DROP {
        step *= 2.0;
    }
    let mut lo = if step > 1.0 { mode + 0.5 * step } else { mode };
    let mut hi = mode + step;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > -TAIL_DROP {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Nodes and weights approximating integration against a target measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub target: MeasureSpec,
}

impl QuadratureRule {
    /// Gauss rule with `n` nodes for an absolutely continuous target; atomic targets return their atoms.
    pub fn gauss(target: &MeasureSpec, n: usize) -> Result<Self> {
        target.validate()?;
        if n == 0 {
            return Err(Error::domain("a quadrature rule needs at least one node"));
        }
        let (nodes, weights) = match target {
            MeasureSpec::GeneralizedNormal { p: PExponent::Finite(p) } if *p == 2.0 => quadrature::gauss_hermite_prob(n),
            MeasureSpec::GeneralizedNormal { p: PExponent::Infinite } => {
                let (x, w) = quadrature::gauss_legendre(n, -1.0, 1.0);
                (x, w.iter().map(|v| 0.5 * v).collect())
            }
            MeasureSpec::GeneralizedNormal { p: PExponent::Finite(p) } => gauss_mu_p(*p, n),
            MeasureSpec::UniformInterval { a, b } => {
                let (x, w) = quadrature::gauss_legendre(n, *a, *b);
                (x, w.iter().map(|v| v / (b - a)).collect())
            }
            other => other.atoms().unwrap(),
        };
        Ok(QuadratureRule { nodes, weights, target: target.clone() })
    }

    /// The default μ_2 rule: 64-node Gauss–Hermite.
    pub fn gaussian() -> Self {
        Self::gauss(&MeasureSpec::mu2(), 64).expect("gaussian rule")
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }

    /// Copy with every weight multiplied by `factor`; used to exercise failure paths.
    pub fn corrupted(&self, factor: f64) -> Self {
        QuadratureRule { weights: self.weights.iter().map(|w| w * factor).collect(), ..self.clone() }
    }
}

fn gauss_mu_p(p: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    // Discretize μ_p finely (geometric panels near the origin where |y|^p is not smooth) and run
    // the Stieltjes procedure on the symmetric discrete measure.
    let upper = (p * 150.0).powf(1.0 / p).max(3.0 * (2.0 * n as f64).powf(1.0 / p));
    let mut breaks: Vec<f64> = vec![0.0];
    breaks.extend((1..=8).rev().map(|k| 10f64.powi(-k)));
    let mut y = 0.25;
    while y < upper {
        breaks.push(y);
        y += 0.25;
    }
    breaks.push(upper);
    let lnc = ln_norm_const(p);
    let mut pts = Vec::new();
    let mut mass = Vec::new();
    for w in breaks.windows(2) {
        let (x, wt) = quadrature::gauss_legendre(24, w[0], w[1]);
        for (xi, wi) in x.into_iter().zip(wt) {
            let m = wi * (-xi.powf(p) / p - lnc).exp();
            pts.push(xi);
            mass.push(m);
            pts.push(-xi);
            mass.push(m);
        }
    }
    let (alpha, beta) = quadrature::stieltjes(&pts, &mass, n);
    let alpha: Vec<f64> = alpha.iter().map(|_| 0.0).collect();
    quadrature::gauss_from_recurrence(&alpha, &beta)
}

pub(crate) fn tol_outer() -> Tolerance {
    Tolerance { abs: 1e-15, rel: 1e-13, max_intervals: 300 }
}

/// `∫ g dμ` for an absolutely continuous μ by adaptive quadrature (used for oracle cross-checks).
pub fn expect_adaptive<F: Fn(f64) -> f64>(target: &MeasureSpec, g: F) -> Result<f64> {
    match target {
        MeasureSpec::GeneralizedNormal { p: PExponent::Infinite } => {
            Ok(0.5 * integrate_pieces(|y| [g(y)], &[-1.0, 0.0, 1.0], tol_outer()).value[0])
        }
        MeasureSpec::GeneralizedNormal { p: PExponent::Finite(p) } => {
            let p = *p;
            let up = drop_point(&|y: f64| -y.powf(p) / p, 0.0) * 1.2;
            let r = integrate_pieces(|y| [density_mu_p(PExponent::Finite(p), y) * (g(y) + g(-y))], &[0.0, 1.0, up], tol_outer());
            Ok(r.value[0])
        }
        MeasureSpec::UniformInterval { a, b } => {
            Ok(integrate_pieces(|y| [g(y)], &[*a, *b], tol_outer()).value[0] / (b - a))
        }
        other => {
            let (x, w) = other.atoms().unwrap();
            Ok(x.iter().zip(&w).map(|(x, w)| w * g(*x)).sum())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::special::normal_pdf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fin(p: f64) -> PExponent {
        PExponent::Finite(p)
    }

    #[test]
    fn density_reference_values() {
        assert!((density_mu_p(fin(2.0), 0.0) - 0.398_942_280_401_432_7).abs() < 1e-12);
        assert_eq!(density_mu_p(PExponent::Infinite, 0.3), 0.5);
        assert_eq!(density_mu_p(PExponent::Infinite, 1.3), 0.0);
        assert!((density_mu_p(fin(1.0), 0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn densities_integrate_to_one() {
        for p in [1.0, 1.5, 3.0, 4.0, 7.5] {
            let m = expect_adaptive(&MeasureSpec::mu_p(fin(p)), |_| 1.0).unwrap();
            assert!((m - 1.0).abs() < 1e-12, "p={p}");
            // E|Y|^p = 1
            let mp = expect_adaptive(&MeasureSpec::mu_p(fin(p)), |y| y.abs().powf(p)).unwrap();
            assert!((mp - 1.0).abs() < 1e-11, "p={p}");
        }
    }

    #[test]
    fn closed_form_log_mgfs() {
        let l1 = log_mgf_mu_p(fin(1.0), 0.5).unwrap();
        assert!((l1.value - (4.0f64 / 3.0).ln()).abs() < 1e-14);
        let linf = log_mgf_mu_p(PExponent::Infinite, 1.0).unwrap();
        assert!((linf.value - 1f64.sinh().ln()).abs() < 1e-14);
        assert!((log_mgf_mu_p(fin(2.0), 1.0).unwrap().value - 0.5).abs() < 1e-15);
        assert!(!log_mgf_mu_p(fin(1.0), 1.0).unwrap().is_finite());
        assert!(!log_mgf_mu_p(fin(1.0), -1.5).unwrap().is_finite());
    }

    #[test]
    fn uniform_log_mgf_series_matches_direct_form() {
        for s in [0.0999999, 0.1, 0.05] {
            let a = log_mgf_uniform_sym(s);
            let v = (s.sinh() / s).ln();
            let d1 = 1.0 / s.tanh() - 1.0 / s;
            let d2 = 1.0 / (s * s) - 1.0 / (s.sinh() * s.sinh());
            assert!((a.value - v).abs() < 1e-14 && (a.d1 - d1).abs() < 1e-13 && (a.d2 - d2).abs() < 1e-11);
        }
    }

    // Oracle: plain adaptive integration over a wide window on the whole line, shifted by a
    // brute-force maximum of the exponent found on a grid.
    fn oracle_log_mgf(p: f64, s: f64) -> (f64, f64, f64) {
        let expo = |y: f64| s * y - y.abs().powf(p) / p;
        let shift = (0..200_001).map(|k| expo(-100.0 + k as f64 * 1e-3)).fold(f64::MIN, f64::max);
        let lnc = std::f64::consts::LN_2 + p.ln() / p + ln_gamma(1.0 + 1.0 / p);
        let breaks: Vec<f64> = (0..=40).map(|k| -100.0 + 5.0 * k as f64).collect();
        let r = integrate_pieces(
            |y| {
                let e = (expo(y) - shift).exp();
                [e, y * e, y * y * e]
            },
            &breaks,
            tol_outer(),
        );
        let [m0, m1, m2] = r.value;
        (shift + m0.ln() - lnc, m1 / m0, m2 / m0 - (m1 / m0).powi(2))
    }

    #[test]
    fn quadrature_log_mgf_matches_direct_integration() {
        for p in [1.5, 3.0, 4.0] {
            for s in [0.0, 0.3, -1.7, 6.0] {
                let l = log_mgf_mu_p(fin(p), s).unwrap();
                let (v, d1, d2) = oracle_log_mgf(p, s);
                assert!((l.value - v).abs() < 1e-11 * v.abs().max(1.0), "p={p} s={s} {} {v}", l.value);
                assert!((l.d1 - d1).abs() < 1e-10 * d1.abs().max(1.0), "p={p} s={s}");
                assert!((l.d2 - d2).abs() < 1e-9 * d2.abs().max(1.0), "p={p} s={s} {} {d2}", l.d2);
            }
        }
    }

    #[test]
    fn log_mgf_is_finite_far_out() {
        let l = log_mgf_mu_p(fin(4.0), 2000.0).unwrap();
        // leading order (1 − 1/p) s^{p/(p−1)}
        let lead = 0.75 * 2000f64.powf(4.0 / 3.0);
        assert!(l.value.is_finite() && (l.value / lead - 1.0).abs() < 1e-2);
        assert!(l.d2 > 0.0);
    }

    #[test]
    fn gaussian_rule_moments() {
        let rule = QuadratureRule::gaussian();
        assert_eq!(rule.nodes.len(), 64);
        let mut df = 1.0;
        for k in 0..=10 {
            let m = rule.integrate(|x| x.powi(k));
            let e = if k % 2 == 1 { 0.0 } else { df };
            assert!((m - e).abs() < 1e-10 * e.max(1.0));
            if k % 2 == 0 {
                df *= (k + 1) as f64;
            }
        }
    }

    #[test]
    fn generalized_normal_rules_reproduce_moments() {
        for p in [1.0, 1.5, 3.0, 4.0] {
            let target = MeasureSpec::mu_p(fin(p));
            let rule = QuadratureRule::gauss(&target, 24).unwrap();
            for k in 1..=8 {
                let m = rule.integrate(|x| x.powi(k));
                let e = if k % 2 == 1 { 0.0 } else { target.abs_moment(k as f64) };
                assert!((m - e).abs() < 1e-10 * e.max(1.0), "p={p} k={k} m={m} e={e}");
            }
        }
    }

    #[test]
    fn quantile_domain() {
        let g = MeasureSpec::mu2();
        assert!(quantile(&g, 0.0).is_err());
        assert!(quantile(&g, 1.0).is_err());
        assert!((quantile(&g, 0.5).unwrap()).abs() < 1e-15);
        let unif = MeasureSpec::UniformInterval { a: -1.0, b: 1.0 };
        assert!((quantile(&unif, 0.75).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(quantile(&MeasureSpec::Dirac { point: 3.0 }, 0.3).unwrap(), 3.0);
        let grid = MeasureSpec::GridDiscrete { points: vec![-1.0, 0.0, 2.0], weights: vec![0.25, 0.5, 0.25] };
        assert_eq!(quantile(&grid, 0.25).unwrap(), -1.0);
        assert_eq!(quantile(&grid, 0.26).unwrap(), 0.0);
        assert_eq!(quantile(&grid, 0.9).unwrap(), 2.0);
        // p = 2 through the Gamma route agrees with the rational approximation
        for u in [0.01, 0.3, 0.8, 0.999] {
            let a = mu_p_quantile(2.0, u);
            assert!((a - quantile(&g, u).unwrap()).abs() < 1e-9, "u={u}");
        }
        // p = 1 is Laplace
        let l = mu_p_quantile(1.0, 0.9);
        assert!((l - (0.2f64).ln().abs()).abs() < 1e-12);
    }

    #[test]
    fn cell_masses_sum_to_one() {
        let g = default_grid();
        let m = gaussian_cell_masses(&g);
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((m[120] / (normal_pdf(0.0) * 0.05) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn ball_samples_are_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [fin(1.0), fin(1.5), fin(2.0), fin(5.0), PExponent::Infinite] {
            for _ in 0..50 {
                let b = sample_ball(p, 17, &mut rng).unwrap();
                assert!(p.norm(&b.coords) <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn pexponent_parsing_and_serde() {
        assert_eq!("inf".parse::<PExponent>().unwrap(), PExponent::Infinite);
        assert!("0.5".parse::<PExponent>().is_err());
        let spec = MeasureSpec::mu_p(PExponent::Infinite);
        let js = serde_json::to_string(&spec).unwrap();
        assert_eq!(js, r#"{"kind":"generalized_normal","params":{"p":"inf"}}"#);
        assert_eq!(serde_json::from_str::<MeasureSpec>(&js).unwrap(), spec);
    }

    #[test]
    fn validation_rejects_bad_measures() {
        assert!(MeasureSpec::UniformInterval { a: 1.0, b: 1.0 }.validate().is_err());
        let bad = MeasureSpec::GridDiscrete { points: vec![0.0, 1.0], weights: vec![0.5, 0.6] };
        assert!(bad.validate().is_err());
        let unsorted = MeasureSpec::GridDiscrete { points: vec![1.0, 0.0], weights: vec![0.5, 0.5] };
        assert!(unsorted.validate().is_err());
    }
}
