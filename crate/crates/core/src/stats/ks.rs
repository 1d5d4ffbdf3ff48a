use super::special::kolmogorov_sf;
use super::{check_finite, Alternative, StatsError, TestResult};

/// Two-sample Kolmogorov-Smirnov test. `D` is exact; the p-value uses the
/// asymptotic Kolmogorov law at `(sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) * D`
/// with `ne = n m / (n + m)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    check_finite(a)?;
    check_finite(b)?;
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let d = ks_statistic(&xs, &ys);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let ne = n * m / (n + m);
    let root = ne.sqrt();
    let p_value = kolmogorov_sf((root + 0.12 + 0.11 / root) * d);
    Ok(TestResult { statistic: d, p_value, df: None, alternative: Alternative::TwoSided })
}

/// Largest ECDF gap between two sorted samples, evaluated after every
/// distinct value so ties are stepped together.
fn ks_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}
