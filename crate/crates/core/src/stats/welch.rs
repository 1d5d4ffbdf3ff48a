use super::special::student_t_sf;
use super::{check_finite, mean, variance, Alternative, StatsError, TestResult};

/// Welch's unequal-variance t-test of `mean(a)` against `mean(b)`.
pub fn welch_t(a: &[f64], b: &[f64], alternative: Alternative) -> Result<TestResult, StatsError> {
    let got = a.len().min(b.len());
    if got < 2 {
        return Err(StatsError::InsufficientSample { needed: 2, got });
    }
    check_finite(a)?;
    check_finite(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (sa, sb) = (variance(a) / na, variance(b) / nb);
    let se2 = sa + sb;

    if se2 == 0.0 {
        if ma == mb {
            return Err(StatsError::DegenerateVariance);
        }
        let statistic = if ma > mb { f64::INFINITY } else { f64::NEG_INFINITY };
        let greater = if ma > mb { 0.0 } else { 1.0 };
        let p_value = match alternative {
            Alternative::Greater => greater,
            Alternative::Less => 1.0 - greater,
            Alternative::TwoSided => 0.0,
        };
        return Ok(TestResult { statistic, p_value, df: None, alternative });
    }

    let statistic = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let p_value = match alternative {
        Alternative::Greater => student_t_sf(statistic, df),
        Alternative::Less => student_t_sf(-statistic, df),
        Alternative::TwoSided => (2.0 * student_t_sf(statistic.abs(), df)).min(1.0),
    };
    Ok(TestResult { statistic, p_value: p_value.clamp(0.0, 1.0), df: Some(df), alternative })
}
