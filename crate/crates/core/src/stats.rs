//! Rank transforms and rank correlations shared by the feature builders and
//! the evaluation metrics.

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;

/// A correlation statistic with its two-sided p-value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correlation {
    pub statistic: f64,
    pub pvalue: f64,
}

/// 1-based ascending ranks with ties given the mean of their span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Sizes of the groups of equal values.
fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        groups.push(end - start);
        start = end;
    }
    groups
}

/// Two-sided standard normal tail probability of `|z|`.
pub fn normal_two_sided(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Kendall tau-b with a normal-approximation p-value using the
/// tie-corrected null variance. `None` when fewer than two points are given,
/// the lengths differ, or either series is constant.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<Correlation> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mut score = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i].partial_cmp(&x[j])? as i64;
            let dy = y[i].partial_cmp(&y[j])? as i64;
            score += dx * dy;
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let ties_x = tie_groups(x);
    let ties_y = tie_groups(y);
    let tied = |g: &[usize]| g.iter().map(|&t| (t * (t - 1) / 2) as f64).sum::<f64>();
    let (tx, ty) = (tied(&ties_x), tied(&ties_y));
    let denom = ((pairs - tx) * (pairs - ty)).sqrt();
    if denom == 0.0 {
        return None;
    }
    let tau = (score as f64 / denom).clamp(-1.0, 1.0);

    let nf = n as f64;
    let sum = |g: &[usize], f: &dyn Fn(f64) -> f64| g.iter().map(|&t| f(t as f64)).sum::<f64>();
    let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let vt = sum(&ties_x, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = sum(&ties_y, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let v1 = sum(&ties_x, &|t| t * (t - 1.0)) * sum(&ties_y, &|t| t * (t - 1.0));
    let v2 = sum(&ties_x, &|t| t * (t - 1.0) * (t - 2.0)) * sum(&ties_y, &|t| t * (t - 1.0) * (t - 2.0));
    let mut var = (v0 - vt - vu) / 18.0 + v1 / (2.0 * nf * (nf - 1.0));
    if n > 2 {
        var += v2 / (9.0 * nf * (nf - 1.0) * (nf - 2.0));
    }
    let pvalue = if var > 0.0 {
        normal_two_sided(score as f64 / var.sqrt())
    } else {
        1.0
    };
    Some(Correlation { statistic: tau, pvalue })
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with a Student-t p-value on `n - 2` degrees of
/// freedom. `None` below three points, on a length mismatch, or when either
/// series is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<Correlation> {
    let n = x.len();
    if n < 3 || y.len() != n || x.iter().chain(y).any(|v| v.is_nan()) {
        return None;
    }
    let rho = pearson(&average_ranks(x), &average_ranks(y))?;
    let df = (n - 2) as f64;
    let pvalue = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
        (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
    };
    Some(Correlation { statistic: rho, pvalue })
}

/// Arithmetic mean, `None` for an empty slice.
pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Median of a non-empty slice (mean of the two middle values for even
/// lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[10.0, 30.0, 20.0]), vec![1.0, 3.0, 2.0]);
        assert_eq!(average_ranks(&[5.0, 5.0, 5.0, 5.0]), vec![2.5; 4]);
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 3.0]), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn kendall_one_swap() {
        let c = kendall_tau_b(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((c.statistic - 2.0 / 3.0).abs() < 1e-15);
        // var = 4*3*13/18, S = 4
        let z = 4.0 / (4.0 * 3.0 * 13.0 / 18.0f64).sqrt();
        assert!((c.pvalue - normal_two_sided(z)).abs() < 1e-15);
    }

    #[test]
    fn kendall_identity_and_reversal() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        assert_eq!(kendall_tau_b(&x, &x).unwrap().statistic, 1.0);
        assert_eq!(kendall_tau_b(&x, &rev).unwrap().statistic, -1.0);
        assert!(kendall_tau_b(&x, &[1.0; 5]).is_none());
        assert!(kendall_tau_b(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn kendall_with_ties_matches_reference() {
        // Reference values from an independent tau-b implementation.
        let x = [12.0, 2.0, 1.0, 12.0, 2.0];
        let y = [1.0, 4.0, 7.0, 1.0, 0.0];
        let c = kendall_tau_b(&x, &y).unwrap();
        assert!((c.statistic - (-0.47140452079103173)).abs() < 1e-12, "{}", c.statistic);
        assert!((c.pvalue - 0.28274545993277467).abs() < 1e-9, "{}", c.pvalue);
    }

    #[test]
    fn spearman_reference() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [5.0, 6.0, 7.0, 8.0, 7.0];
        let c = spearman(&x, &y).unwrap();
        assert!((c.statistic - 0.8207826816681233).abs() < 1e-12, "{}", c.statistic);
        assert!((c.pvalue - 0.08858700531354381).abs() < 1e-10, "{}", c.pvalue);
        assert!(spearman(&x[..2], &y[..2]).is_none());
        assert!(spearman(&x, &[3.0; 5]).is_none());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    proptest! {
        #[test]
        fn kendall_is_symmetric(v in prop::collection::vec((0u8..6, 0u8..6), 2..12)) {
            let x: Vec<f64> = v.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = v.iter().map(|p| p.1 as f64).collect();
            prop_assert_eq!(kendall_tau_b(&x, &y), kendall_tau_b(&y, &x));
        }

        #[test]
        fn ranks_sum_to_triangular(v in prop::collection::vec(0u8..5, 1..20)) {
            let x: Vec<f64> = v.iter().map(|&a| a as f64).collect();
            let n = x.len() as f64;
            prop_assert!((average_ranks(&x).iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
        }
    }
}
