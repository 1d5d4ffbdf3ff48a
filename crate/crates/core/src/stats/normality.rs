use super::special::chi2_sf_2df;
use super::{check_finite, Alternative, StatsError, TestResult};

/// Below this size the skewness and kurtosis z-transforms are unreliable.
pub const DAGOSTINO_MIN_N: usize = 20;

/// D'Agostino-Pearson omnibus normality test. The statistic is
/// `K^2 = Z(skewness)^2 + Z(kurtosis)^2`, referred to chi-square(2).
pub fn dagostino_pearson(a: &[f64]) -> Result<TestResult, StatsError> {
    let n = a.len();
    if n < DAGOSTINO_MIN_N {
        return Err(StatsError::SampleTooSmall { n, minimum: DAGOSTINO_MIN_N });
    }
    check_finite(a)?;
    let nf = n as f64;
    let mean = a.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in a {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    // Relative threshold: rounding leaves a few ulps of spread on constants.
    if m2 <= f64::EPSILON * mean * mean * 16.0 || m2 == 0.0 {
        return Err(StatsError::DegenerateSample);
    }
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2);
    let zs = skew_z(skew, nf);
    let zk = kurtosis_z(kurt, nf);
    let k2 = zs * zs + zk * zk;
    Ok(TestResult {
        statistic: k2,
        p_value: chi2_sf_2df(k2),
        df: None,
        alternative: Alternative::TwoSided,
    })
}

fn skew_z(b1: f64, n: f64) -> f64 {
    let y = b1 * ((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0))).sqrt();
    let beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0)
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = -1.0 + (2.0 * (beta2 - 1.0)).sqrt();
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let alpha = (2.0 / (w2 - 1.0)).sqrt();
    let y = if y == 0.0 { 1.0 } else { y };
    let r = y / alpha;
    delta * (r + (r * r + 1.0).sqrt()).ln()
}

fn kurtosis_z(b2: f64, n: f64) -> f64 {
    let expected = 3.0 * (n - 1.0) / (n + 1.0);
    let var_b2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0).powi(2) * (n + 3.0) * (n + 5.0));
    let x = (b2 - expected) / var_b2.sqrt();
    let sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * (6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0))).sqrt();
    let a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + (1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)).sqrt());
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * (2.0 / (a - 4.0)).sqrt();
    let term2 = denom.signum() * ((1.0 - 2.0 / a) / denom.abs()).cbrt();
    (term1 - term2) / (2.0 / (9.0 * a)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_small_and_degenerate() {
        assert!(matches!(
            dagostino_pearson(&[1.0, 2.0, 3.0, 4.0, 5.0]),
            Err(StatsError::SampleTooSmall { n: 5, minimum: 20 })
        ));
        assert!(matches!(dagostino_pearson(&[0.1; 30]), Err(StatsError::DegenerateSample)));
    }

    #[test]
    fn affine_invariance() {
        let xs: Vec<f64> = (0..200).map(|i| ((i * 37 % 101) as f64).sqrt() + (i % 7) as f64).collect();
        let base = dagostino_pearson(&xs).unwrap().statistic;
        for &(scale, shift) in &[(3.5, 10.0), (0.001, -4.0), (1e6, 1e3)] {
            let ys: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
            let k2 = dagostino_pearson(&ys).unwrap().statistic;
            assert!((k2 - base).abs() < 1e-9 * base.max(1.0), "scale {scale}: {k2} vs {base}");
        }
    }
}
