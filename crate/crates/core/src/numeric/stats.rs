//! Small goodness-of-fit and interval helpers used by the sampler checks and the MC laboratory.

/// Kolmogorov–Smirnov statistic of `sample` against a continuous cdf. Sorts the sample in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Two-sample Kolmogorov–Smirnov statistic. Sorts both samples in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic Kolmogorov survival function `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=6).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum();
        return 1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// p-value of a one-sample KS statistic with the usual small-sample correction of the argument.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

/// p-value of a two-sample KS statistic.
pub fn ks_two_sample_pvalue(d: f64, n: usize, m: usize) -> f64 {
    let ne = (n as f64 * m as f64) / (n + m) as f64;
    ks_pvalue(d, ne.round().max(1.0) as usize)
}

/// Wilson score interval at `z` standard deviations.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_branches_agree() {
        for &l in &[1.0, 1.1, 1.18, 1.25] {
            let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * l * l);
            let small: f64 = 1.0
                - (2.0 * std::f64::consts::PI).sqrt() / l
                    * (1..=6).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum::<f64>();
            let large: f64 = 2.0
                * (1..=50)
                    .map(|k: i32| (-1f64).powi(k - 1) * (-2.0 * (k * k) as f64 * l * l).exp())
                    .sum::<f64>();
            assert!((small - large).abs() < 1e-12);
        }
        // 1% critical value of the Kolmogorov distribution
        assert!((kolmogorov_sf(1.627_62) - 0.01).abs() < 1e-5);
    }

    #[test]
    fn wilson_contains_point_estimate() {
        let (lo, hi) = wilson_interval(30, 1000, 1.96);
        assert!(lo < 0.03 && 0.03 < hi);
        assert_eq!(wilson_interval(0, 100, 1.96).0, 0.0);
    }

    #[test]
    fn two_sample_identical_is_zero() {
        let mut a = vec![0.3, 0.1, 0.2];
        let mut b = a.clone();
        assert_eq!(ks_two_sample(&mut a, &mut b), 0.0);
    }
}
