//! Small descriptive-statistics helpers shared by the sweep aggregators.

/// Arithmetic mean; NaN on empty input.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator); 0 for fewer than 2 points.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Standard error of the mean; 0 for fewer than 2 points.
pub fn standard_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    std_dev(xs) / (xs.len() as f64).sqrt()
}

/// Histogram over [lo, hi] with equal-width bins; the last bin is closed so
/// a value exactly at `hi` is counted. Out-of-range values are clipped into
/// the edge bins.
pub fn histogram(xs: &[f64], lo: f64, hi: f64, bins: usize) -> (Vec<usize>, Vec<f64>) {
    assert!(bins >= 1 && hi > lo);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        let idx = (((x - lo) / width).floor().max(0.0) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
    (counts, edges)
}
