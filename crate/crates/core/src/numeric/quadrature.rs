//! Adaptive Gauss–Kronrod integration and Gauss rules built from three-term recurrences.

use nalgebra::{DMatrix, SymmetricEigen};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_545_515_520,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Weights of the embedded 10-point Gauss rule, at XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-15, rel: 1e-13, max_intervals: 400 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub intervals: usize,
    pub converged: bool,
}

impl<const N: usize> Integral<N> {
    /// Largest error estimate relative to the magnitude of its component (absolute below 1).
    pub fn scaled_error(&self) -> f64 {
        (0..N)
            .map(|i| self.error[i] / self.value[i].abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
}

fn kronrod<const N: usize, F: FnMut(f64) -> [f64; N]>(f: &mut F, a: f64, b: f64) -> Panel<N> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = [0.0; N];
    let mut rg = [0.0; N];
    let mut rabs = [0.0; N];
    let mut samples = [[0.0; N]; 21];
    for i in 0..N {
        rk[i] = WGK[10] * fc[i];
        rabs[i] = WGK[10] * fc[i].abs();
    }
    samples[20] = fc;
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for i in 0..N {
            rk[i] += WGK[j] * (f1[i] + f2[i]);
            rabs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                rg[i] += WG[j / 2] * (f1[i] + f2[i]);
            }
        }
        samples[2 * j] = f1;
        samples[2 * j + 1] = f2;
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for i in 0..N {
        let mean = 0.5 * rk[i];
        let mut asc = WGK[10] * (fc[i] - mean).abs();
        for j in 0..10 {
            asc += WGK[j] * ((samples[2 * j][i] - mean).abs() + (samples[2 * j + 1][i] - mean).abs());
        }
        let asc = asc * h.abs();
        let raw = ((rk[i] - rg[i]) * h).abs();
        let mut err = raw;
        if asc != 0.0 && raw != 0.0 {
            err = asc * (200.0 * raw / asc).powf(1.5).min(1.0);
        }
        let resabs = rabs[i] * h.abs();
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        value[i] = rk[i] * h;
        error[i] = err;
    }
    Panel { a, b, value, error }
}

/// Globally adaptive 21-point Gauss–Kronrod integration of a vector-valued integrand.
///
/// Every component must meet `max(tol.abs, tol.rel * |value|)`; the panel with the worst
/// normalized error is bisected until that holds or the interval budget runs out.
pub fn integrate<const N: usize, F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Integral<N>
where
    F: FnMut(f64) -> [f64; N],
{
    if a == b {
        return Integral { value: [0.0; N], error: [0.0; N], intervals: 0, converged: true };
    }
    let mut panels = vec![kronrod(&mut f, a, b)];
    loop {
        let mut value = [0.0; N];
        let mut error = [0.0; N];
        for p in &panels {
            for i in 0..N {
                value[i] += p.value[i];
                error[i] += p.error[i];
            }
        }
        let target: Vec<f64> = (0..N).map(|i| tol.abs.max(tol.rel * value[i].abs())).collect();
        let done = (0..N).all(|i| error[i] <= target[i]);
        if done || panels.len() >= tol.max_intervals {
            return Integral { value, error, intervals: panels.len(), converged: done };
        }
        let score = |p: &Panel<N>| (0..N).map(|i| p.error[i] / target[i]).fold(0.0, f64::max);
        let (worst, _) = panels
            .iter()
            .enumerate()
            .map(|(k, p)| (k, score(p)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a.min(p.b) || mid >= p.a.max(p.b) {
            return Integral { value, error, intervals: panels.len() + 1, converged: false };
        }
        panels.push(kronrod(&mut f, p.a, mid));
        panels.push(kronrod(&mut f, mid, p.b));
    }
}

/// Integrates over consecutive breakpoints and sums the pieces.
pub fn integrate_pieces<const N: usize, F>(mut f: F, breaks: &[f64], tol: Tolerance) -> Integral<N>
where
    F: FnMut(f64) -> [f64; N],
{
    let mut out = Integral { value: [0.0; N], error: [0.0; N], intervals: 0, converged: true };
    for w in breaks.windows(2) {
        let r = integrate(&mut f, w[0], w[1], tol);
        for i in 0..N {
            out.value[i] += r.value[i];
            out.error[i] += r.error[i];
        }
        out.intervals += r.intervals;
        out.converged &= r.converged;
    }
    out
}

/// Gauss rule from the monic recurrence `p_{k+1} = (x − α_k) p_k − β_k p_{k−1}`, `β_0` = total mass.
///
/// Nodes come from the Jacobi matrix and are then Newton-polished; weights use the
/// Christoffel form `1 / Σ P_k(x)²` with orthonormal `P_k`, which keeps small tail weights accurate.
pub fn gauss_from_recurrence(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = alpha.len();
    assert!(beta.len() >= n && n > 0);
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        j[(k, k)] = alpha[k];
        if k + 1 < n {
            let s = beta[k + 1].sqrt();
            j[(k, k + 1)] = s;
            j[(k + 1, k)] = s;
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let orthonormal = |x: f64| -> (f64, f64, f64) {
        // returns (Σ P_k², P_n, P_n') with P_n unnormalized by the final β
        let mut p_prev = 0.0;
        let mut p = 1.0 / beta[0].sqrt();
        let mut d_prev = 0.0;
        let mut d = 0.0;
        let mut sum = p * p;
        for k in 0..n {
            let sb_next = if k + 1 < beta.len() { beta[k + 1].sqrt() } else { 1.0 };
            let sb = if k > 0 { beta[k].sqrt() } else { 0.0 };
            let p_next = ((x - alpha[k]) * p - sb * p_prev) / sb_next;
            let d_next = (p + (x - alpha[k]) * d - sb * d_prev) / sb_next;
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
            if k + 1 < n {
                sum += p * p;
            }
        }
        (sum, p, d)
    };

    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (_, pn, dn) = orthonormal(*x);
            if dn == 0.0 {
                break;
            }
            let step = pn / dn;
            *x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (sum, _, _) = orthonormal(*x);
        weights.push(1.0 / sum);
    }
    (nodes, weights)
}

/// Recurrence coefficients of a discrete measure by the Stieltjes procedure.
pub fn stieltjes(points: &[f64], masses: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut p_prev = vec![0.0; points.len()];
    let mut p: Vec<f64> = vec![1.0; points.len()];
    let mut norm_prev = 1.0;
    for k in 0..n {
        let norm: f64 = p.iter().zip(masses).map(|(v, m)| m * v * v).sum();
        let a = p.iter().zip(masses).zip(points).map(|((v, m), x)| m * x * v * v).sum::<f64>() / norm;
        let b = if k == 0 { norm } else { norm / norm_prev };
        alpha.push(a);
        beta.push(b);
        let next: Vec<f64> = (0..points.len())
            .map(|i| (points[i] - a) * p[i] - if k == 0 { 0.0 } else { b * p_prev[i] })
            .collect();
        p_prev = std::mem::replace(&mut p, next);
        norm_prev = norm;
    }
    (alpha, beta)
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let alpha = vec![0.0; n];
    let beta: Vec<f64> = (0..n)
        .map(|k| if k == 0 { 2.0 } else { let k = k as f64; k * k / (4.0 * k * k - 1.0) })
        .collect();
    let (x, w) = gauss_from_recurrence(&alpha, &beta);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect())
}

/// Gauss–Hermite rule for the standard Gaussian measure (probabilists' weight, total mass 1).
pub fn gauss_hermite_prob(n: usize) -> (Vec<f64>, Vec<f64>) {
    let alpha = vec![0.0; n];
    let beta: Vec<f64> = (0..n).map(|k| if k == 0 { 1.0 } else { k as f64 }).collect();
    gauss_from_recurrence(&alpha, &beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_is_exact_on_polynomials() {
        let r = integrate(|x| [x.powi(30), x.powi(7)], -1.0, 2.0, Tolerance::default());
        assert!((r.value[0] - (2f64.powi(31) + 1.0) / 31.0).abs() < 1e-6);
        assert!((r.value[1] - (256.0 - 1.0) / 8.0).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(|x| [x.sqrt()], 0.0, 1.0, Tolerance::default());
        assert!((r.value[0] - 2.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_degree_2n_minus_1() {
        let (x, w) = gauss_legendre(8, 0.0, 1.0);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(15)).sum();
        assert!((s - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn hermite_64_reproduces_gaussian_moments() {
        let (x, w) = gauss_hermite_prob(64);
        let mut double_fact = 1.0;
        for k in 0..=10 {
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let expect = if k % 2 == 1 { 0.0 } else { double_fact };
            assert!((m - expect).abs() < 1e-10 * expect.max(1.0), "k={k} m={m}");
            if k % 2 == 0 {
                double_fact *= (k + 1) as f64;
            }
        }
    }

    #[test]
    fn stieltjes_recovers_legendre_coefficients() {
        let (x, w) = gauss_legendre(200, -1.0, 1.0);
        let (a, b) = stieltjes(&x, &w, 5);
        assert!(a.iter().all(|v| v.abs() < 1e-14));
        assert!((b[0] - 2.0).abs() < 1e-13);
        assert!((b[3] - 9.0 / 35.0).abs() < 1e-13);
    }
}
