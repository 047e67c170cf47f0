use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::CoincidenceError;

/// Upper-tail probability of a chi-square statistic.
pub fn chi_square_sf(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).expect("positive dof").sf(statistic.max(0.0))
}

/// Chi-square p-value of `counts` against a uniform distribution over bins.
pub fn flatness_test(counts: &[u64]) -> Result<f64, CoincidenceError> {
    let total: u64 = counts.iter().sum();
    let expected = if counts.is_empty() { 0.0 } else { total as f64 / counts.len() as f64 };
    if counts.len() < 2 || expected < 5.0 {
        return Err(CoincidenceError::InsufficientCounts { expected });
    }
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    Ok(chi_square_sf(stat, counts.len() - 1))
}

/// Two-sample chi-square homogeneity p-value for histograms `a` and `b`.
///
/// Bins whose pooled count is below 10 are lumped together so that every
/// cell keeps a usable expected count.
pub fn homogeneity_test(a: &[u64], b: &[u64]) -> Result<f64, CoincidenceError> {
    if a.len() != b.len() {
        return Err(CoincidenceError::ScanMismatch);
    }
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut rest = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        if x + y >= 10 {
            cells.push((x as f64, y as f64));
        } else {
            rest.0 += x as f64;
            rest.1 += y as f64;
        }
    }
    if rest.0 + rest.1 > 0.0 {
        cells.push(rest);
    }
    let na: f64 = cells.iter().map(|c| c.0).sum();
    let nb: f64 = cells.iter().map(|c| c.1).sum();
    if cells.len() < 2 || na == 0.0 || nb == 0.0 {
        return Err(CoincidenceError::InsufficientCounts { expected: 0.0 });
    }
    let n = na + nb;
    let stat: f64 = cells
        .iter()
        .map(|&(x, y)| {
            let m = x + y;
            let (ea, eb) = (m * na / n, m * nb / n);
            (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
        })
        .sum();
    Ok(chi_square_sf(stat, cells.len() - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coincidence::shard_rng;
    use rand::Rng;

    fn uniform_counts(seed: u64, bins: usize, n: usize) -> Vec<u64> {
        let mut rng = shard_rng(seed, 0);
        let mut c = vec![0; bins];
        for _ in 0..n {
            c[rng.random_range(0..bins)] += 1;
        }
        c
    }

    #[test]
    fn sf_known_value() {
        // P(chi2_2 > x) = exp(-x/2)
        assert!((chi_square_sf(3.0, 2) - (-1.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn all_zero_is_insufficient() {
        assert!(matches!(flatness_test(&[0; 10]), Err(CoincidenceError::InsufficientCounts { .. })));
    }

    #[test]
    fn uniform_counts_pass_calibration() {
        let runs = 1000;
        let passed = (0..runs).filter(|&s| flatness_test(&uniform_counts(s, 50, 5_000)).unwrap() > 0.01).count();
        // Nominal pass rate is 99%; allow three binomial standard deviations.
        let floor = runs as f64 * (0.99 - 3.0 * (0.99f64 * 0.01 / runs as f64).sqrt());
        assert!(passed as f64 >= floor, "{passed}/{runs}");
    }

    #[test]
    fn structure_is_detected() {
        let mut c = uniform_counts(5, 50, 20_000);
        c[20..25].iter_mut().for_each(|x| *x += 300);
        assert!(flatness_test(&c).unwrap() < 1e-6);
    }

    #[test]
    fn homogeneity_of_equal_and_shifted_samples() {
        let a = uniform_counts(1, 40, 40_000);
        let b = uniform_counts(2, 40, 40_000);
        assert!(homogeneity_test(&a, &b).unwrap() > 1e-4);
        let mut c = b.clone();
        c[0] += 2_000;
        assert!(homogeneity_test(&a, &c).unwrap() < 1e-6);
    }
}
