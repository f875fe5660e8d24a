//! Rank-based comparison statistics for the simulation reports.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::{Error, Result};

/// Kruskal-Wallis H with tie correction and a chi-squared p-value on k-1
/// degrees of freedom.
///
/// The chi-squared approximation is asymptotic; samples of at least 5 are
/// advisable, fewer than 2 per group is an error.
pub fn kruskal_wallis(samples: &[&[f64]]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::Config("need at least two samples".into()));
    }
    for (i, s) in samples.iter().enumerate() {
        if s.len() < 2 {
            return Err(Error::Config(format!(
                "sample {i} has {} observations, need at least 2",
                s.len()
            )));
        }
    }

    let n_total: usize = samples.iter().map(|s| s.len()).sum();
    let mut pooled: Vec<(f64, usize)> = Vec::with_capacity(n_total);
    for (group, sample) in samples.iter().enumerate() {
        pooled.extend(sample.iter().map(|&v| (v, group)));
    }
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Mid-ranks for ties, and the tie-correction sum of t^3 - t.
    let mut rank_sums = vec![0.0; samples.len()];
    let mut tie_sum = 0.0;
    let mut i = 0;
    while i < n_total {
        let mut j = i;
        while j < n_total && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for entry in &pooled[i..j] {
            rank_sums[entry.1] += rank;
        }
        let t = (j - i) as f64;
        tie_sum += t * t * t - t;
        i = j;
    }

    let n = n_total as f64;
    let mut h = 0.0;
    for (group, sample) in samples.iter().enumerate() {
        h += rank_sums[group] * rank_sums[group] / sample.len() as f64;
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);

    let correction = 1.0 - tie_sum / (n * n * n - n);
    let h = if correction > 0.0 {
        h / correction
    } else {
        // Every pooled value identical: no evidence of any difference.
        0.0
    };

    let df = (samples.len() - 1) as f64;
    let p = 1.0 - ChiSquared::new(df).expect("df >= 1").cdf(h.max(0.0));
    Ok((h, p))
}

/// Effect size for a Kruskal-Wallis result: `(H - k + 1) / (n - k)`, clamped
/// at zero.
pub fn eta_squared(h: f64, n_total: usize, k_groups: usize) -> f64 {
    assert!(n_total > k_groups, "need more observations than groups");
    ((h - k_groups as f64 + 1.0) / (n_total - k_groups) as f64).max(0.0)
}

/// Conventional small/medium/large interpretation of an eta-squared value.
pub fn effect_size_label(eta: f64) -> &'static str {
    if eta >= 0.14 {
        "large"
    } else if eta >= 0.06 {
        "medium"
    } else if eta >= 0.01 {
        "small"
    } else {
        "negligible"
    }
}
