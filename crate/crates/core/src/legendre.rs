//! Convex conjugates of the mgf functionals and the constrained infima over the contraction
//! manifolds `τ0^{−1/2} τ1 τ2^{−1/p} = w`, `τ1 τ2^{−1/p} = w` and `τ0^{−1/2} τ1 = w`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::PExponent;
use crate::mgf::{Eval, SmoothConvex};

pub const MAX_NEWTON_ITERATIONS: usize = 200;
pub const GRAD_TOL: f64 = 1e-8;
const UNBOUNDED_ARG: f64 = 1e9;
const FAR_ARG: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    BoundaryDivergent,
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegendreResult {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub grad_norm_at_argmax: f64,
    pub status: Status,
    /// For contraction infima: the minimizing `τ`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub minimizer: Option<Vec<f64>>,
}

impl LegendreResult {
    fn infinite(argmax: Vec<f64>) -> Self {
        LegendreResult {
            value: f64::INFINITY,
            argmax,
            grad_norm_at_argmax: f64::NAN,
            status: Status::Infinite,
            minimizer: None,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `H d = g` for a symmetric positive definite `H`, regularizing if Cholesky fails.
fn newton_direction(hess: &[f64], g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let h = DMatrix::from_row_slice(n, n, hess);
    let rhs = DVector::from_column_slice(g);
    let scale = (0..n).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut shift = 0.0;
    for _ in 0..30 {
        let m = &h + DMatrix::identity(n, n) * shift;
        if let Some(ch) = m.cholesky() {
            return ch.solve(&rhs).iter().copied().collect();
        }
        shift = if shift == 0.0 { 1e-12 * scale } else { shift * 10.0 };
    }
    g.to_vec()
}

/// `sup_t { ⟨t, τ⟩ − f(t) }` by damped Newton iterations from `start` (or `f.start()`).
///
/// Steps are halved until the trial point is inside the domain and the Armijo condition holds.
/// When the iterates run off to infinity while the objective keeps increasing along the last
/// direction, the supremum is reported as `+∞`.
pub fn conjugate(f: &dyn SmoothConvex, tau: &[f64], start: Option<&[f64]>) -> Result<LegendreResult> {
    let d = f.dim();
    if tau.len() != d || tau.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("conjugate argument has the wrong dimension or is not finite"));
    }
    let mut t = match start {
        Some(s) if f.in_domain(s) => s.to_vec(),
        _ => f.start(),
    };
    let mut ev = f.eval(&t)?;
    if !ev.value.is_finite() {
        t = f.start();
        ev = f.eval(&t)?;
    }
    let mut obj = dot(tau, &t) - ev.value;
    let mut blocked = 0;
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let g: Vec<f64> = tau.iter().zip(&ev.grad).map(|(a, b)| a - b).collect();
        let gn = norm(&g);
        if gn < GRAD_TOL {
            // a vanishing gradient far out can be a logarithmic divergence
            if t.iter().any(|x| x.abs() > FAR_ARG) && ray_increases(f, tau, &t, &t, obj)? {
                return Ok(LegendreResult::infinite(t));
            }
            return Ok(LegendreResult { value: obj, argmax: t, grad_norm_at_argmax: gn, status: Status::Converged, minimizer: None });
        }
        let dir = newton_direction(&ev.hess, &g);
        let predicted = dot(&g, &dir);
        let mut alpha = 1.0;
        let mut accepted: Option<(Vec<f64>, Eval, f64)> = None;
        let mut hit_boundary = false;
        for _ in 0..80 {
            let trial: Vec<f64> = t.iter().zip(&dir).map(|(a, b)| a + alpha * b).collect();
            if !f.in_domain(&trial) {
                hit_boundary = true;
                alpha *= 0.5;
                continue;
            }
            let e = f.eval(&trial)?;
            if !e.value.is_finite() {
                hit_boundary = true;
                alpha *= 0.5;
                continue;
            }
            let o = dot(tau, &trial) - e.value;
            let noise = 1e-13 * obj.abs().max(1.0);
            if o >= obj + 1e-4 * alpha * predicted || (predicted < noise && o >= obj - noise) {
                accepted = Some((trial, e, o));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, e, o)) = accepted else {
            if hit_boundary {
                blocked += 1;
                if blocked >= 3 {
                    return Ok(LegendreResult { value: obj, argmax: t, grad_norm_at_argmax: gn, status: Status::BoundaryDivergent, minimizer: None });
                }
                continue;
            }
            return Err(Error::NonConvergence { what: "conjugate line search".into(), iterations: 0, last: t, grad_norm: gn });
        };
        blocked = 0;
        let step: Vec<f64> = trial.iter().zip(&t).map(|(a, b)| a - b).collect();
        t = trial;
        ev = e;
        let gained = o - obj;
        obj = o;
        if t.iter().any(|x| x.abs() > UNBOUNDED_ARG) && gained > 0.0 && ray_increases(f, tau, &t, &step, obj)? {
            return Ok(LegendreResult::infinite(t));
        }
    }
    let g: Vec<f64> = tau.iter().zip(&ev.grad).map(|(a, b)| a - b).collect();
    Err(Error::NonConvergence { what: "conjugate".into(), iterations: MAX_NEWTON_ITERATIONS, last: t, grad_norm: norm(&g) })
}

fn ray_increases(f: &dyn SmoothConvex, tau: &[f64], t: &[f64], step: &[f64], obj: f64) -> Result<bool> {
    let mut prev = obj;
    for k in 1..=3 {
        let s = (1 << k) as f64;
        let x: Vec<f64> = t.iter().zip(step).map(|(a, b)| a + s * b).collect();
        if !f.in_domain(&x) {
            return Ok(false);
        }
        let e = f.eval(&x)?;
        let o = dot(tau, &x) - e.value;
        if !(o > prev) {
            return Ok(false);
        }
        prev = o;
    }
    Ok(true)
}

/// `f**(t) = sup_τ { ⟨t, τ⟩ − f*(τ) }`, with the inner conjugates solved by [`conjugate`].
///
/// The outer Newton iteration starts from the mean point `∇f(start)` and uses
/// `∇f*(τ) = argmax` and `∇²f*(τ) = (∇²f(argmax))^{−1}`.
pub fn biconjugate(f: &dyn SmoothConvex, t: &[f64]) -> Result<LegendreResult> {
    let e0 = f.eval(&f.start())?;
    let mut tau = e0.grad.clone();
    let mut warm = f.start();
    let mut inner = conjugate(f, &tau, Some(&warm))?;
    if inner.status != Status::Converged {
        return Err(Error::NonConvergence { what: "biconjugate start".into(), iterations: 0, last: tau, grad_norm: f64::NAN });
    }
    let mut obj = dot(t, &tau) - inner.value;
    let mut stalled = 0;
    for it in 0..MAX_NEWTON_ITERATIONS {
        let g: Vec<f64> = t.iter().zip(&inner.argmax).map(|(a, b)| a - b).collect();
        let gn = norm(&g);
        // the inner argmax is only resolved to about GRAD_TOL
        if gn < 10.0 * GRAD_TOL || (stalled >= 2 && gn < 1e3 * GRAD_TOL) {
            return Ok(LegendreResult { value: obj, argmax: tau, grad_norm_at_argmax: gn, status: Status::Converged, minimizer: None });
        }
        warm = inner.argmax.clone();
        let h = f.eval(&warm)?.hess;
        let n = g.len();
        let hm = DMatrix::from_row_slice(n, n, &h);
        let dir: Vec<f64> = (hm * DVector::from_column_slice(&g)).iter().copied().collect();
        let mut alpha = 1.0;
        let mut done = false;
        for _ in 0..60 {
            let trial: Vec<f64> = tau.iter().zip(&dir).map(|(a, b)| a + alpha * b).collect();
            if f.conjugate_domain(&trial) == Some(false) {
                alpha *= 0.5;
                continue;
            }
            let r = conjugate(f, &trial, Some(&warm));
            if let Ok(r) = r {
                if r.status == Status::Converged {
                    let o = dot(t, &trial) - r.value;
                    if o >= obj - 1e-13 * obj.abs().max(1.0) {
                        stalled = if o - obj <= 1e-14 * obj.abs().max(1.0) { stalled + 1 } else { 0 };
                        tau = trial;
                        inner = r;
                        obj = o;
                        done = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !done {
            return Err(Error::NonConvergence { what: "biconjugate".into(), iterations: it, last: tau, grad_norm: gn });
        }
    }
    Err(Error::NonConvergence { what: "biconjugate".into(), iterations: MAX_NEWTON_ITERATIONS, last: tau, grad_norm: f64::NAN })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractionKind {
    /// `τ0^{−1/2} τ1 τ2^{−1/p} = w` over the conjugate of a 3D functional.
    Annealed3,
    /// `τ1 τ2^{−1/p} = w` over the conjugate of a 2D functional.
    Quenched2,
    /// `τ0^{−1/2} τ1 = w` over the conjugate of a 2D functional.
    Product2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionSpec {
    pub kind: ContractionKind,
    pub w: f64,
    pub p: PExponent,
}

/// Search range for the free coordinates, in `log τ`.
const LOG_TAU_MIN: f64 = -13.815_510_557_964_274; // ln 1e-6
const LOG_TAU_MAX: f64 = 13.815_510_557_964_274;

/// `inf f*(τ)` over the contraction manifold of `spec`.
///
/// The free coordinates are searched in log scale. One free coordinate (quenched2, product2):
/// expanding bracket from `τ = 1`, then a safeguarded secant on the derivative supplied by the
/// envelope theorem. Two free coordinates (annealed3): Nelder–Mead, then a quasi-Newton polish
/// on the envelope gradient.
pub fn rate_infimum(f: &dyn SmoothConvex, spec: &ContractionSpec) -> Result<LegendreResult> {
    rate_infimum_warm(f, spec, None)
}

/// [`rate_infimum`] started from a previous solution on a nearby problem.
pub fn rate_infimum_warm(f: &dyn SmoothConvex, spec: &ContractionSpec, warm: Option<&LegendreResult>) -> Result<LegendreResult> {
    if !spec.w.is_finite() {
        return Err(Error::domain("contraction level w must be finite"));
    }
    let rp = spec.p.recip();
    let w = spec.w;
    match spec.kind {
        ContractionKind::Quenched2 => {
            if f.dim() != 2 || spec.p.is_infinite() {
                return Err(Error::domain("quenched2 needs a 2D functional and finite p"));
            }
            let mut cache = WarmCache::seeded(warm, 1);
            let x0 = warm_log(warm, 1);
            let mut eval = |x: f64| -> Result<Point1> {
                let tau = vec![w * (rp * x).exp(), x.exp()];
                let r = conjugate(f, &tau, cache.near(x))?;
                let d = r.argmax[0] * tau[0] * rp + r.argmax[1] * tau[1];
                cache.push(x, &r);
                Ok(Point1 { x, value: r.value, slope: d, result: r, tau })
            };
            minimize_1d(&mut eval, x0)
        }
        ContractionKind::Product2 => {
            if f.dim() != 2 {
                return Err(Error::domain("product2 needs a 2D functional"));
            }
            let mut cache = WarmCache::seeded(warm, 0);
            let x0 = warm_log(warm, 0);
            let mut eval = |x: f64| -> Result<Point1> {
                let tau = vec![x.exp(), w * (0.5 * x).exp()];
                let r = conjugate(f, &tau, cache.near(x))?;
                let d = r.argmax[0] * tau[0] + 0.5 * r.argmax[1] * tau[1];
                cache.push(x, &r);
                Ok(Point1 { x, value: r.value, slope: d, result: r, tau })
            };
            minimize_1d(&mut eval, x0)
        }
        ContractionKind::Annealed3 => {
            if f.dim() != 3 || spec.p.is_infinite() {
                return Err(Error::domain("annealed3 needs a 3D functional and finite p"));
            }
            annealed3(f, w, rp, warm)
        }
    }
}

fn warm_log(warm: Option<&LegendreResult>, k: usize) -> f64 {
    warm.and_then(|r| r.minimizer.as_ref())
        .map(|m| m[k].ln())
        .filter(|x| x.is_finite())
        .map(|x| x.clamp(LOG_TAU_MIN, LOG_TAU_MAX))
        .unwrap_or(0.0)
}

#[derive(Default)]
struct WarmCache {
    points: Vec<(f64, Vec<f64>)>,
}

impl WarmCache {
    fn seeded(warm: Option<&LegendreResult>, k: usize) -> Self {
        let mut c = WarmCache::default();
        if let Some(r) = warm.filter(|r| r.status == Status::Converged) {
            c.points.push((warm_log(Some(r), k), r.argmax.clone()));
        }
        c
    }

    fn near(&self, x: f64) -> Option<&[f64]> {
        self.points
            .iter()
            .min_by(|a, b| (a.0 - x).abs().partial_cmp(&(b.0 - x).abs()).unwrap())
            .map(|(_, t)| t.as_slice())
    }

    fn push(&mut self, x: f64, r: &LegendreResult) {
        if r.status == Status::Converged {
            self.points.push((x, r.argmax.clone()));
        }
    }
}

struct Point1 {
    x: f64,
    value: f64,
    slope: f64,
    result: LegendreResult,
    tau: Vec<f64>,
}

fn finish(p: Point1) -> LegendreResult {
    let mut r = p.result;
    r.minimizer = Some(p.tau);
    r
}

fn minimize_1d<F: FnMut(f64) -> Result<Point1>>(eval: &mut F, x0: f64) -> Result<LegendreResult> {
    let mut a = eval(x0)?;
    if !a.value.is_finite() && x0 != 0.0 {
        a = eval(0.0)?;
    }
    if !a.value.is_finite() {
        // the conjugate may be finite only on part of the manifold
        let mut found = None;
        for k in 1..=14 {
            for x in [k as f64, -(k as f64)] {
                let p = eval(x)?;
                if p.value.is_finite() {
                    found = Some(p);
                    break;
                }
            }
            if found.is_some() {
                break;
            }
        }
        match found {
            Some(p) => a = p,
            None => return Ok(LegendreResult::infinite(a.result.argmax)),
        }
    }
    if a.slope == 0.0 {
        return Ok(finish(a));
    }
    // Expand in the descent direction until the envelope derivative changes sign.
    let dir = -a.slope.signum();
    let mut step = 0.5;
    let mut b;
    loop {
        let x = (a.x + dir * step).clamp(LOG_TAU_MIN, LOG_TAU_MAX);
        b = eval(x)?;
        if !b.value.is_finite() || b.slope * dir >= 0.0 || b.value > a.value {
            break;
        }
        if x == LOG_TAU_MIN || x == LOG_TAU_MAX {
            return Ok(finish(b));
        }
        a = b;
        step *= 2.0;
    }
    // Shrink an infinite endpoint back towards the finite one.
    let mut guard = 0;
    while !b.value.is_finite() {
        let x = 0.5 * (a.x + b.x);
        b = eval(x)?;
        guard += 1;
        if guard > 60 {
            return Ok(finish(a));
        }
    }
    if b.slope * dir < 0.0 {
        // value went up while the slope still points onward: the minimum lies between
        return golden(eval, a, b);
    }
    secant_on_slope(eval, a, b)
}

fn secant_on_slope<F: FnMut(f64) -> Result<Point1>>(eval: &mut F, mut lo: Point1, mut hi: Point1) -> Result<LegendreResult> {
    // lo and hi have slopes of opposite sign; Illinois-type regula falsi with bisection fallback.
    let mut side = 0;
    for _ in 0..100 {
        let width = (hi.x - lo.x).abs();
        let mut x = if lo.slope != hi.slope { lo.x - lo.slope * (hi.x - lo.x) / (hi.slope - lo.slope) } else { 0.5 * (lo.x + hi.x) };
        let (mn, mx) = (lo.x.min(hi.x), lo.x.max(hi.x));
        if !(x > mn + 1e-3 * width && x < mx - 1e-3 * width) {
            x = 0.5 * (lo.x + hi.x);
        }
        let m = eval(x)?;
        if !m.value.is_finite() {
            return golden(eval, lo, hi);
        }
        if m.slope.abs() < 1e-12 || width < 1e-12 {
            return Ok(finish(m));
        }
        if m.slope.signum() == lo.slope.signum() {
            lo = m;
            if side == -1 {
                hi.slope *= 0.5;
            }
            side = -1;
        } else {
            hi = m;
            if side == 1 {
                lo.slope *= 0.5;
            }
            side = 1;
        }
        if (hi.x - lo.x).abs() < 1e-11 {
            break;
        }
    }
    let best = if lo.value <= hi.value { lo } else { hi };
    Ok(finish(best))
}

fn golden<F: FnMut(f64) -> Result<Point1>>(eval: &mut F, a: Point1, b: Point1) -> Result<LegendreResult> {
    let r = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a.x.min(b.x), a.x.max(b.x));
    let mut best = if a.value <= b.value { a } else { b };
    let mut c = eval(hi - r * (hi - lo))?;
    let mut d = eval(lo + r * (hi - lo))?;
    while hi - lo > 1e-7 {
        if c.value <= d.value {
            hi = d.x;
            d = c;
            c = eval(hi - r * (hi - lo))?;
        } else {
            lo = c.x;
            c = d;
            d = eval(lo + r * (hi - lo))?;
        }
    }
    for p in [c, d] {
        if p.value < best.value || (p.value == best.value && p.x < best.x) {
            best = p;
        }
    }
    Ok(finish(best))
}

fn annealed3(f: &dyn SmoothConvex, w: f64, rp: f64, warm: Option<&LegendreResult>) -> Result<LegendreResult> {
    let mut cache: Vec<(f64, f64, Vec<f64>)> = Vec::new();
    let x0 = [warm_log(warm, 0), warm_log(warm, 2)];
    if let Some(r) = warm.filter(|r| r.status == Status::Converged) {
        cache.push((x0[0], x0[1], r.argmax.clone()));
    }
    let mut eval = |x: &[f64]| -> Result<(f64, Vec<f64>, LegendreResult, Vec<f64>)> {
        let tau = vec![x[0].exp(), w * (0.5 * x[0] + rp * x[1]).exp(), x[1].exp()];
        let warm = cache
            .iter()
            .min_by(|a, b| {
                let da = (a.0 - x[0]).powi(2) + (a.1 - x[1]).powi(2);
                let db = (b.0 - x[0]).powi(2) + (b.1 - x[1]).powi(2);
                da.partial_cmp(&db).unwrap()
            })
            .map(|c| c.2.clone());
        let r = conjugate(f, &tau, warm.as_deref())?;
        if r.status == Status::Converged {
            cache.push((x[0], x[1], r.argmax.clone()));
            if cache.len() > 64 {
                cache.remove(0);
            }
        }
        let t = &r.argmax;
        let g = vec![t[0] * tau[0] + 0.5 * t[1] * tau[1], t[2] * tau[2] + rp * t[1] * tau[1]];
        Ok((r.value, g, r, tau))
    };

    let (v0, _, r0, _) = eval(&x0)?;
    if !v0.is_finite() {
        return Ok(LegendreResult::infinite(r0.argmax));
    }
    // Nelder–Mead on (log τ0, log τ2)
    let step = if warm.is_some() { 0.05 } else { 0.4 };
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), v0)];
    for v in [vec![x0[0] + step, x0[1]], vec![x0[0], x0[1] + step]] {
        let (fv, ..) = eval(&v)?;
        simplex.push((v, fv));
    }
    for _ in 0..400 {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Greater));
        let spread = (simplex[2].1 - simplex[0].1).abs();
        let size = simplex.iter().map(|s| (s.0[0] - simplex[0].0[0]).abs().max((s.0[1] - simplex[0].0[1]).abs())).fold(0.0, f64::max);
        if spread < 1e-10 && size < 1e-4 {
            break;
        }
        let c: Vec<f64> = (0..2).map(|i| 0.5 * (simplex[0].0[i] + simplex[1].0[i])).collect();
        let worst = simplex[2].clone();
        let along = |s: f64| -> Vec<f64> { (0..2).map(|i| (c[i] + s * (worst.0[i] - c[i])).clamp(LOG_TAU_MIN, LOG_TAU_MAX)).collect() };
        let xr = along(-1.0);
        let (fr, ..) = eval(&xr)?;
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let (fe, ..) = eval(&xe)?;
            simplex[2] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (xr, fr);
        } else {
            let xc = if fr < worst.1 { along(-0.5) } else { along(0.5) };
            let (fc, ..) = eval(&xc)?;
            if fc < worst.1.min(fr) {
                simplex[2] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for k in 1..3 {
                    let xs: Vec<f64> = (0..2).map(|i| best[i] + 0.5 * (simplex[k].0[i] - best[i])).collect();
                    let (fs, ..) = eval(&xs)?;
                    simplex[k] = (xs, fs);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Greater));
    // BFGS polish with the envelope gradient.
    let mut x = simplex[0].0.clone();
    let (mut fx, mut gx, mut rx, mut tx) = eval(&x)?;
    let mut hinv = [[1.0, 0.0], [0.0, 1.0]];
    for _ in 0..100 {
        if norm(&gx) < 1e-9 {
            break;
        }
        let d = [-(hinv[0][0] * gx[0] + hinv[0][1] * gx[1]), -(hinv[1][0] * gx[0] + hinv[1][1] * gx[1])];
        let slope = d[0] * gx[0] + d[1] * gx[1];
        if slope >= 0.0 {
            hinv = [[1.0, 0.0], [0.0, 1.0]];
            continue;
        }
        let mut alpha = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let xn = vec![x[0] + alpha * d[0], x[1] + alpha * d[1]];
            let (fnew, gnew, rnew, tnew) = eval(&xn)?;
            if fnew.is_finite() && fnew <= fx + 1e-4 * alpha * slope + 1e-14 * fx.abs().max(1.0) {
                let s = [xn[0] - x[0], xn[1] - x[1]];
                let y = [gnew[0] - gx[0], gnew[1] - gx[1]];
                let sy = s[0] * y[0] + s[1] * y[1];
                if sy > 1e-300 {
                    let hy = [hinv[0][0] * y[0] + hinv[0][1] * y[1], hinv[1][0] * y[0] + hinv[1][1] * y[1]];
                    let yhy = y[0] * hy[0] + y[1] * hy[1];
                    for i in 0..2 {
                        for j in 0..2 {
                            hinv[i][j] += (sy + yhy) * s[i] * s[j] / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                        }
                    }
                }
                x = xn;
                fx = fnew;
                gx = gnew;
                rx = rnew;
                tx = tnew;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let mut r = rx;
    r.value = fx;
    r.minimizer = Some(tx);
    Ok(r)
}
