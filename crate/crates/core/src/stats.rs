//! Small descriptive-statistics helpers shared across modules.

/// Arithmetic mean. Returns `NaN` for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with divisor `n - 1`. Returns `NaN` when fewer than two observations.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Sample standard deviation (divisor `n - 1`).
pub fn sample_std(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

/// Sample covariance with divisor `n - 1`.
pub fn sample_covariance(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mx = mean(xs);
    let my = mean(ys);
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (xs.len() - 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_of_two_points() {
        assert!((sample_variance(&[0.0, 0.02]) - 2e-4).abs() < 1e-18);
        assert!(sample_variance(&[1.0]).is_nan());
    }

    #[test]
    fn covariance_matches_variance_on_diagonal() {
        let xs = [0.1, -0.3, 0.25, 0.0];
        assert!((sample_covariance(&xs, &xs) - sample_variance(&xs)).abs() < 1e-15);
    }
}
