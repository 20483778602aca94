//! Small descriptive-statistics helpers shared across the crate.

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

/// Unbiased (n - 1 denominator) sample variance computed in two passes.
///
/// Returns `None` for fewer than two values.
pub fn sample_variance(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some(ss / (values.len() - 1) as f64)
}

pub fn sample_std(values: &[f64]) -> Option<f64> {
    sample_variance(values).map(f64::sqrt)
}

/// Mean and sample standard deviation; the deviation is 0 for a single value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = mean(values).unwrap_or(f64::NAN);
    let s = sample_std(values).unwrap_or(0.0);
    (m, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_of_two_points() {
        assert_eq!(sample_variance(&[0.0, 2.0]), Some(2.0));
        assert_eq!(sample_variance(&[1.0]), None);
        assert_eq!(mean(&[]), None);
    }

    #[test]
    fn constant_has_zero_variance() {
        assert_eq!(sample_variance(&[3.5; 10]), Some(0.0));
    }
}
