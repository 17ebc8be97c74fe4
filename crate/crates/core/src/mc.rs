//! Monte-Carlo laboratory for the projections `W = n^{1/p − 1/2} ⟨X, θ⟩`.
//!
//! Replications run in blocks of [`BLOCK`] draws. Block `b` draws from its own ChaCha8 stream
//! derived from the master seed, and block results are combined in index order, so results do
//! not depend on the number of worker threads.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::legendre::{rate_infimum, ContractionKind, ContractionSpec, Status};
use crate::measures::{quantile, Direction, MeasureSpec, MuPSampler, PExponent};
use crate::mgf::{lambda_eval, PsiPNu};
use crate::numeric::stats::wilson_interval;
use crate::rates::SpeedSpec;

pub const BLOCK: usize = 4096;

const TAG_DIRECT: u64 = 1;
const TAG_TILTED: u64 = 2;
const TAG_TYPICAL: u64 = 3;
const TAG_COUPLED: u64 = 4;
const TAG_PAIR: u64 = 5;

fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream((tag << 56) | index);
    r
}

/// Runs `f(rng, count)` on consecutive blocks of `reps` replications and returns the block
/// results in order.
fn run_blocks<T, F>(reps: usize, seed: u64, tag: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let blocks = reps.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, tag, b as u64);
            f(&mut rng, BLOCK.min(reps - b * BLOCK))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKind {
    /// A fresh normalized Gaussian vector for every n.
    Typical,
    /// Normalized prefixes of one fixed Gaussian sequence.
    ColumnCoupled,
    Iota,
    E1,
}

/// A deterministic sequence of directions `θ^{(n)}`, one per dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionSequence {
    pub generator: DirectionKind,
    pub seed: u64,
}

impl DirectionSequence {
    pub fn new(generator: DirectionKind, seed: u64) -> Self {
        DirectionSequence { generator, seed }
    }

    pub fn direction(&self, n: usize) -> Result<Direction> {
        if n == 0 {
            return Err(Error::domain("direction dimension must be positive"));
        }
        match self.generator {
            DirectionKind::Iota => Ok(Direction::iota(n)),
            DirectionKind::E1 => Ok(Direction::e1(n)),
            DirectionKind::Typical => {
                let mut rng = stream(self.seed, TAG_TYPICAL, n as u64);
                Direction::from_vector((0..n).map(|_| rng.sample(StandardNormal)).collect())
            }
            DirectionKind::ColumnCoupled => Direction::from_vector(self.coupled_prefix(n)),
        }
    }

    fn coupled_prefix(&self, n: usize) -> Vec<f64> {
        let mut rng = stream(self.seed, TAG_COUPLED, 0);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }
}

/// Fixed direction sequence, or a fresh uniform direction for every replication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirSpec {
    Fixed(DirectionSequence),
    Random,
}

#[inline]
fn abs_pow(y: f64, p: f64) -> f64 {
    if p == 2.0 {
        y * y
    } else if p == 4.0 {
        let s = y * y;
        s * s
    } else if p == 1.0 {
        y.abs()
    } else {
        y.abs().powf(p)
    }
}

/// One draw of `W`. `theta = None` draws a Haar direction.
#[inline]
fn draw_w<R: Rng + ?Sized>(p: PExponent, sampler: &MuPSampler, theta: Option<&[f64]>, n: usize, radial: bool, rng: &mut R) -> f64 {
    let (mut dot, mut np, mut g2) = (0.0, 0.0, 0.0);
    let q = p.value();
    for i in 0..n {
        let y = sampler.sample(rng);
        let t = match theta {
            Some(th) => th[i],
            None => {
                let g: f64 = rng.sample(StandardNormal);
                g2 += g * g;
                g
            }
        };
        dot += y * t;
        if !p.is_infinite() {
            np += abs_pow(y, q);
        }
    }
    if theta.is_none() {
        dot /= g2.sqrt();
    }
    let nf = n as f64;
    match p {
        // uniform cube: X = Y
        PExponent::Infinite => dot / nf.sqrt(),
        PExponent::Finite(q) => {
            let r = if radial { rng.random::<f64>().powf(1.0 / nf) } else { 1.0 };
            nf.powf(1.0 / q - 0.5) * r * dot / np.powf(1.0 / q)
        }
    }
}

/// `reps` independent draws of `W^{(n,p)}_θ` (fixed direction) or `W^{(n,p)}` (random direction).
pub fn simulate_w(p: PExponent, n: usize, dir: &DirSpec, reps: usize, seed: u64) -> Result<Vec<f64>> {
    simulate_w_with(p, n, dir, reps, seed, true)
}

/// As [`simulate_w`]; `radial = false` drops the `U^{1/n}` factor.
pub fn simulate_w_with(p: PExponent, n: usize, dir: &DirSpec, reps: usize, seed: u64, radial: bool) -> Result<Vec<f64>> {
    if reps == 0 || n == 0 {
        return Err(Error::domain("simulate_w needs reps ≥ 1 and n ≥ 1"));
    }
    let theta = fixed_theta(dir, n)?;
    let sampler = MuPSampler::new(p);
    let blocks = run_blocks(reps, seed, TAG_DIRECT, |rng, count| {
        (0..count).map(|_| draw_w(p, &sampler, theta.as_deref(), n, radial, rng)).collect::<Vec<f64>>()
    });
    Ok(blocks.concat())
}

fn fixed_theta(dir: &DirSpec, n: usize) -> Result<Option<Vec<f64>>> {
    Ok(match dir {
        DirSpec::Fixed(d) => Some(d.direction(n)?.coords),
        DirSpec::Random => None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Tilted,
}

/// Estimate of `P(W ≥ w)` at one dimension, normalized by the speed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub n: usize,
    pub w: f64,
    pub p_hat: f64,
    pub stderr: f64,
    #[serde(with = "crate::extreal")]
    pub log_p: f64,
    /// `−log_p / s(n)`.
    #[serde(with = "crate::extreal")]
    pub slope: f64,
    pub reps: usize,
    pub method: Method,
    pub speed: SpeedSpec,
    /// Indicator hits (direct) or accepted events under the tilted law.
    pub hits: u64,
    pub wilson: Option<(f64, f64)>,
    pub acceptance_rate: Option<f64>,
    pub flags: Vec<String>,
}

/// Tail probabilities `P(W ≥ w)` along `n_grid`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_tail(
    p: PExponent,
    n_grid: &[usize],
    w: f64,
    dir: &DirSpec,
    reps: usize,
    speed: SpeedSpec,
    method: Method,
    seed: u64,
) -> Result<Vec<MCEstimate>> {
    estimate_tail_with(p, n_grid, w, dir, reps, speed, method, seed, true)
}

/// As [`estimate_tail`]; `radial = false` drops the `U^{1/n}` factor from `W`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_tail_with(
    p: PExponent,
    n_grid: &[usize],
    w: f64,
    dir: &DirSpec,
    reps: usize,
    speed: SpeedSpec,
    method: Method,
    seed: u64,
    radial: bool,
) -> Result<Vec<MCEstimate>> {
    if reps == 0 || !w.is_finite() {
        return Err(Error::domain("estimate_tail needs reps ≥ 1 and finite w"));
    }
    n_grid
        .iter()
        .map(|&n| match method {
            Method::Direct => direct_tail(p, n, w, dir, reps, speed, seed, radial),
            Method::Tilted => tilted_tail(p, n, w, dir, reps, speed, seed, radial),
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn direct_tail(p: PExponent, n: usize, w: f64, dir: &DirSpec, reps: usize, speed: SpeedSpec, seed: u64, radial: bool) -> Result<MCEstimate> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let theta = fixed_theta(dir, n)?;
    let sampler = MuPSampler::new(p);
    let hits: u64 = run_blocks(reps, seed ^ n as u64, TAG_DIRECT, |rng, count| {
        (0..count).filter(|_| draw_w(p, &sampler, theta.as_deref(), n, radial, rng) >= w).count() as u64
    })
    .iter()
    .sum();
    let r = reps as f64;
    let p_hat = hits as f64 / r;
    let log_p = p_hat.ln();
    let mut flags = Vec::new();
    if hits == 0 {
        flags.push("zero_hits".to_string());
    } else if hits < 100 {
        flags.push("few_hits".to_string());
    }
    Ok(MCEstimate {
        n,
        w,
        p_hat,
        stderr: (p_hat * (1.0 - p_hat) / r).sqrt(),
        log_p,
        slope: -log_p / speed.at(n as f64),
        reps,
        method: Method::Direct,
        speed,
        hits,
        wilson: Some(wilson_interval(hits, reps as u64, 1.96)),
        acceptance_rate: None,
        flags,
    })
}

/// Rejection sampler for the density `∝ exp(σx − |x|^p/p)`, `p > 1`.
///
/// The envelope is flat between the two points where the log-density has dropped by one below
/// its mode, and follows the tangent lines of the concave log-density beyond them.
#[derive(Clone, Debug)]
pub struct TiltedMuP {
    p: f64,
    sigma: f64,
    hmax: f64,
    a: f64,
    b: f64,
    slope_a: f64,
    slope_b: f64,
    mass_flat: f64,
    mass_left: f64,
    total: f64,
}

impl TiltedMuP {
    pub fn new(p: f64, sigma: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite() && sigma.is_finite()) {
            return Err(Error::domain("tilted sampler needs finite p > 1 and finite tilt"));
        }
        let mode = sigma.signum() * sigma.abs().powf(1.0 / (p - 1.0));
        let h = |x: f64| sigma * x - x.abs().powf(p) / p;
        let hmax = h(mode);
        let cut = |dir: f64| -> f64 {
            let mut step = 1.0;
            while h(mode + dir * step) > hmax - 1.0 {
                step *= 2.0;
            }
            let (mut lo, mut hi) = (0.0, step);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if h(mode + dir * mid) > hmax - 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            mode + dir * hi
        };
        let (a, b) = (cut(-1.0), cut(1.0));
        let dh = |x: f64| sigma - x.signum() * x.abs().powf(p - 1.0);
        let (slope_a, slope_b) = (dh(a), dh(b));
        let mass_flat = b - a;
        let mass_left = (-(hmax - h(a))).exp() / slope_a;
        let mass_right = (-(hmax - h(b))).exp() / -slope_b;
        Ok(TiltedMuP { p, sigma, hmax, a, b, slope_a, slope_b, mass_flat, mass_left, total: mass_flat + mass_left + mass_right })
    }

    fn log_target(&self, x: f64) -> f64 {
        self.sigma * x - x.abs().powf(self.p) / self.p - self.hmax
    }

    /// A draw and the number of proposals it took.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, u32) {
        let ha = self.log_target(self.a);
        let hb = self.log_target(self.b);
        let mut tries = 0;
        loop {
            tries += 1;
            let r = rng.random::<f64>() * self.total;
            let (x, env) = if r < self.mass_flat {
                (self.a + r, 0.0)
            } else if r < self.mass_flat + self.mass_left {
                let e: f64 = rng.sample(rand_distr::Exp1);
                let x = self.a - e / self.slope_a;
                (x, ha + self.slope_a * (x - self.a))
            } else {
                let e: f64 = rng.sample(rand_distr::Exp1);
                let x = self.b + e / -self.slope_b;
                (x, hb + self.slope_b * (x - self.b))
            };
            let u: f64 = rng.random::<f64>();
            if u.ln() <= self.log_target(x) - env {
                return (x, tries);
            }
        }
    }
}

/// Importance sampling under the exponentially tilted product law. Coordinate `i` is drawn from
/// `∝ exp(t1 √n θ_i y + t2 |y|^p) μ_p(dy)` where `(t1, t2)` is the optimizer of the quenched
/// rate for the empirical measure of `√n θ`, and draws are reweighted by the likelihood ratio.
#[allow(clippy::too_many_arguments)]
fn tilted_tail(p: PExponent, n: usize, w: f64, dir: &DirSpec, reps: usize, speed: SpeedSpec, seed: u64, radial: bool) -> Result<MCEstimate> {
    let DirSpec::Fixed(seq) = dir else {
        return Err(Error::domain("tilted sampling needs a fixed direction sequence"));
    };
    let q = match p {
        PExponent::Finite(q) if q > 1.0 => q,
        _ => return Err(Error::domain("tilted sampling needs p in (1, ∞)")),
    };
    if !(w > 0.0) {
        return Err(Error::domain("tilted sampling targets w > 0"));
    }
    let theta = seq.direction(n)?;
    let atoms = theta.scaled_atoms();
    let nu = MeasureSpec::Empirical { samples: atoms.clone() };
    let psi = PsiPNu::new(p, &nu)?;
    let sol = rate_infimum(&psi, &ContractionSpec { kind: ContractionKind::Quenched2, w, p })?;
    if sol.status != Status::Converged {
        return Err(Error::domain(format!("no finite tilt: w = {w} is outside the rate domain for this direction")));
    }
    let (t1, t2) = (sol.argmax[0], sol.argmax[1]);
    let kappa = (1.0 - q * t2).powf(-1.0 / q);
    // per-coordinate samplers and log-mgf values, shared between equal atoms
    let mut cache: HashMap<u64, usize> = HashMap::new();
    let mut samplers: Vec<(TiltedMuP, f64)> = Vec::new();
    let mut which = Vec::with_capacity(n);
    for &a in &atoms {
        let key = a.to_bits();
        let k = match cache.get(&key) {
            Some(&k) => k,
            None => {
                let lam = lambda_eval(q, t1 * a, t2)?.value;
                samplers.push((TiltedMuP::new(q, t1 * a * kappa)?, lam));
                cache.insert(key, samplers.len() - 1);
                samplers.len() - 1
            }
        };
        which.push(k);
    }
    let lam_sum: f64 = which.iter().map(|&k| samplers[k].1).sum();
    let nf = n as f64;
    let scale = nf.powf(1.0 / q - 0.5);
    // weights are stored relative to e^{−n·rate} to stay in range
    let shift = -nf * sol.value;
    let blocks = run_blocks(reps, seed ^ n as u64, TAG_TILTED, |rng, count| {
        let (mut s1, mut s2, mut hits, mut tries) = (0.0, 0.0, 0u64, 0u64);
        for _ in 0..count {
            let (mut dot, mut np, mut lin) = (0.0, 0.0, 0.0);
            for i in 0..n {
                let (x, t) = samplers[which[i]].0.draw(rng);
                tries += t as u64;
                let y = kappa * x;
                dot += y * theta.coords[i];
                lin += atoms[i] * y;
                np += abs_pow(y, q);
            }
            let r = if radial { rng.random::<f64>().powf(1.0 / nf) } else { 1.0 };
            let wv = scale * r * dot / np.powf(1.0 / q);
            if wv >= w {
                let v = (lam_sum - t1 * lin - t2 * np - shift).exp();
                s1 += v;
                s2 += v * v;
                hits += 1;
            }
        }
        (s1, s2, hits, tries)
    });
    let (mut s1, mut s2, mut hits, mut tries) = (0.0, 0.0, 0u64, 0u64);
    for b in &blocks {
        s1 += b.0;
        s2 += b.1;
        hits += b.2;
        tries += b.3;
    }
    let r = reps as f64;
    let mean = s1 / r;
    let var = (s2 / r - mean * mean).max(0.0) * r / (r - 1.0).max(1.0);
    let log_p = mean.ln() + shift;
    let mut flags = Vec::new();
    if hits == 0 {
        flags.push("zero_hits".to_string());
    }
    Ok(MCEstimate {
        n,
        w,
        p_hat: log_p.exp(),
        stderr: (var / r).sqrt() * shift.exp(),
        log_p,
        slope: -log_p / speed.at(nf),
        reps,
        method: Method::Tilted,
        speed,
        hits,
        wilson: None,
        acceptance_rate: Some((r * nf) / tries as f64),
        flags,
    })
}

/// Unrooted Wasserstein-r distances (`inf ∫|x − y|^r dπ`, no `1/r` root) between `L_{n,θ}` and μ_2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GCReport {
    pub n_grid: Vec<usize>,
    pub wasserstein_r: Vec<f64>,
    pub r: f64,
}

/// Size of the midpoint grid on (0, 1) used for quantile couplings.
pub const U_GRID: usize = 10_000;

fn normal_quantile_grid() -> &'static [f64] {
    static GRID: OnceLock<Vec<f64>> = OnceLock::new();
    GRID.get_or_init(|| (0..U_GRID).map(|k| quantile(&MeasureSpec::mu2(), (k as f64 + 0.5) / U_GRID as f64).unwrap()).collect())
}

fn sorted(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s
}

fn empirical_quantile(sorted: &[f64], k: usize) -> f64 {
    let u = (k as f64 + 0.5) / U_GRID as f64;
    sorted[((u * sorted.len() as f64) as usize).min(sorted.len() - 1)]
}

/// `∫_0^1 |F^{−1}(u) − Φ^{−1}(u)|^r du` on the midpoint grid.
pub fn wasserstein_r_to_gaussian(samples: &[f64], r: f64) -> Result<f64> {
    if samples.is_empty() || !(r >= 1.0) {
        return Err(Error::domain("needs a nonempty sample and r ≥ 1"));
    }
    let s = sorted(samples);
    let g = normal_quantile_grid();
    Ok((0..U_GRID).map(|k| (empirical_quantile(&s, k) - g[k]).abs().powf(r)).sum::<f64>() / U_GRID as f64)
}

/// The same quantile coupling between two empirical measures.
pub fn wasserstein_r_empirical(a: &[f64], b: &[f64], r: f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() || !(r >= 1.0) {
        return Err(Error::domain("needs nonempty samples and r ≥ 1"));
    }
    let (sa, sb) = (sorted(a), sorted(b));
    Ok((0..U_GRID).map(|k| (empirical_quantile(&sa, k) - empirical_quantile(&sb, k)).abs().powf(r)).sum::<f64>() / U_GRID as f64)
}

pub fn gc_report(dir: &DirectionSequence, n_grid: &[usize], r: f64) -> Result<GCReport> {
    let wasserstein_r = n_grid
        .par_iter()
        .map(|&n| wasserstein_r_to_gaussian(&dir.direction(n)?.scaled_atoms(), r))
        .collect::<Result<Vec<f64>>>()?;
    Ok(GCReport { n_grid: n_grid.to_vec(), wasserstein_r, r })
}

/// `√(n / log n) · max_i θ_i^{(n)}` along `n_grid`.
pub fn max_coordinate_scaling(dir: &DirectionSequence, n_grid: &[usize]) -> Result<Vec<f64>> {
    if n_grid.iter().any(|&n| n < 2) {
        return Err(Error::domain("max-coordinate scaling needs n ≥ 2"));
    }
    let factor = |n: usize| (n as f64 / (n as f64).ln()).sqrt();
    match dir.generator {
        DirectionKind::ColumnCoupled => {
            let top = n_grid.iter().copied().max().unwrap_or(0);
            let z = dir.coupled_prefix(top);
            let mut wanted: Vec<usize> = n_grid.to_vec();
            wanted.sort_unstable();
            let mut at: HashMap<usize, f64> = HashMap::new();
            let (mut mx, mut ss) = (f64::NEG_INFINITY, 0.0);
            let mut next = 0;
            for (i, &x) in z.iter().enumerate() {
                mx = mx.max(x);
                ss += x * x;
                while next < wanted.len() && wanted[next] == i + 1 {
                    at.insert(i + 1, factor(i + 1) * mx / ss.sqrt());
                    next += 1;
                }
            }
            Ok(n_grid.iter().map(|n| at[n]).collect())
        }
        _ => n_grid
            .par_iter()
            .map(|&n| {
                let d = dir.direction(n)?;
                Ok(factor(n) * d.coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
            })
            .collect(),
    }
}

/// Pairs `(W̃, V)` with `V = (1/n) Σ Y_i Z_i` and `W̃ = V / ((Σ|Y_i|^p/n)^{1/p} (Σ Z_i²/n)^{1/2})`
/// for `Y ~ μ_p^{⊗n}`, `Z ~ μ_2^{⊗n}`.
pub fn normalized_pairs(p: PExponent, n: usize, reps: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let q = match p {
        PExponent::Finite(q) => q,
        PExponent::Infinite => return Err(Error::domain("normalized pairs need finite p")),
    };
    if n == 0 || reps == 0 {
        return Err(Error::domain("needs n ≥ 1 and reps ≥ 1"));
    }
    let sampler = MuPSampler::new(p);
    let nf = n as f64;
    Ok(run_blocks(reps, seed, TAG_PAIR, |rng, count| {
        (0..count)
            .map(|_| {
                let (mut v, mut yp, mut z2) = (0.0, 0.0, 0.0);
                for _ in 0..n {
                    let y = sampler.sample(rng);
                    let z: f64 = rng.sample(StandardNormal);
                    v += y * z;
                    yp += abs_pow(y, q);
                    z2 += z * z;
                }
                let v = v / nf;
                (v / ((yp / nf).powf(1.0 / q) * (z2 / nf).sqrt()), v)
            })
            .collect::<Vec<_>>()
    })
    .concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quadrature::{integrate, Tolerance};

    #[test]
    fn tilted_sampler_matches_density() {
        // compare the empirical mean and second moment with quadrature of the tilted density
        for (p, sigma) in [(4.0, 1.3), (1.5, -0.7), (2.0, 2.0), (3.0, 0.0)] {
            let s = TiltedMuP::new(p, sigma).unwrap();
            let f = |x: f64| (sigma * x - x.abs().powf(p) / p - s.hmax).exp();
            let m = integrate(|x| [f(x), x * f(x), x * x * f(x)], -30.0, 30.0, Tolerance::default()).value;
            let (mean, second) = (m[1] / m[0], m[2] / m[0]);
            let mut rng = stream(11, 0, 0);
            let k = 200_000;
            let (mut a, mut b) = (0.0, 0.0);
            for _ in 0..k {
                let (x, _) = s.draw(&mut rng);
                a += x;
                b += x * x;
            }
            let var = second - mean * mean;
            assert!((a / k as f64 - mean).abs() < 5.0 * (var / k as f64).sqrt(), "p={p} σ={sigma}");
            assert!((b / k as f64 - second).abs() < 0.02 * second.max(0.1));
        }
    }

    #[test]
    fn wasserstein_identical_is_zero() {
        let x = vec![0.3, -1.0, 2.0, 0.1];
        assert_eq!(wasserstein_r_empirical(&x, &x, 1.0).unwrap(), 0.0);
        assert_eq!(wasserstein_r_empirical(&x, &x, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn iota_scaling_is_closed_form() {
        let ns = [10, 100, 1000];
        let v = max_coordinate_scaling(&DirectionSequence::new(DirectionKind::Iota, 0), &ns).unwrap();
        for (x, n) in v.iter().zip(ns) {
            assert!((x - 1.0 / (n as f64).ln().sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn coupled_directions_are_prefixes() {
        let d = DirectionSequence::new(DirectionKind::ColumnCoupled, 3);
        let a = d.direction(10).unwrap();
        let b = d.direction(20).unwrap();
        let ratio = a.coords[0] / b.coords[0];
        for i in 0..10 {
            assert!((a.coords[i] / b.coords[i] - ratio).abs() < 1e-12);
        }
        let s = max_coordinate_scaling(&d, &[10, 20]).unwrap();
        let direct = |x: &Direction, n: f64| (n / n.ln()).sqrt() * x.coords.iter().cloned().fold(f64::MIN, f64::max);
        assert!((s[0] - direct(&a, 10.0)).abs() < 1e-14 && (s[1] - direct(&b, 20.0)).abs() < 1e-14);
    }
}
