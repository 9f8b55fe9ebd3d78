//! Multi-level Otsu thresholding by exact dynamic programming.
//!
//! Maximizing between-class variance is equivalent to minimizing the summed
//! within-class squared deviation, which decomposes over contiguous bin ranges.
//! The DP runs in `O(classes * bins^2)` with prefix sums.

/// Splits histogram bins into `classes` contiguous ranges minimizing total
/// within-class variance.
///
/// Returns the inclusive last bin of every class except the final one, so the
/// result has `classes - 1` strictly increasing entries. Ties resolve to the
/// leftmost split.
pub fn multi_otsu(hist: &[f64], classes: usize) -> Vec<usize> {
    let bins = hist.len();
    assert!(classes >= 1, "need at least one class");
    assert!(classes <= bins, "more classes than histogram bins");

    let mut w = vec![0.0; bins + 1];
    let mut s = vec![0.0; bins + 1];
    let mut s2 = vec![0.0; bins + 1];
    for (i, &h) in hist.iter().enumerate() {
        let x = i as f64;
        w[i + 1] = w[i] + h;
        s[i + 1] = s[i] + h * x;
        s2[i + 1] = s2[i] + h * x * x;
    }
    let cost = |i: usize, j: usize| -> f64 {
        let wt = w[j + 1] - w[i];
        if wt <= 0.0 {
            return 0.0;
        }
        let st = s[j + 1] - s[i];
        ((s2[j + 1] - s2[i]) - st * st / wt).max(0.0)
    };

    // dp[k][j]: best cost of covering bins 0..=j with k+1 classes.
    let mut dp = vec![vec![f64::INFINITY; bins]; classes];
    let mut arg = vec![vec![0usize; bins]; classes];
    for j in 0..bins {
        dp[0][j] = cost(0, j);
    }
    for k in 1..classes {
        for j in k..bins {
            let mut best = f64::INFINITY;
            let mut best_i = k;
            for i in k..=j {
                let c = dp[k - 1][i - 1] + cost(i, j);
                if !best.is_finite() || c < best - 1e-9 * best.max(1.0) {
                    best = c;
                    best_i = i;
                }
            }
            dp[k][j] = best;
            arg[k][j] = best_i;
        }
    }

    let mut thresholds = vec![0usize; classes - 1];
    let mut j = bins - 1;
    for k in (1..classes).rev() {
        let i = arg[k][j];
        thresholds[k - 1] = i - 1;
        j = i - 1;
    }
    thresholds
}

/// Total within-class squared deviation for a given threshold set.
pub fn within_class_cost(hist: &[f64], thresholds: &[usize]) -> f64 {
    let mut total = 0.0;
    let mut start = 0;
    for end in thresholds.iter().copied().chain(std::iter::once(hist.len() - 1)) {
        let range = &hist[start..=end];
        let wt: f64 = range.iter().sum();
        if wt > 0.0 {
            let mean = range.iter().enumerate().map(|(i, h)| h * (start + i) as f64).sum::<f64>() / wt;
            total += range.iter().enumerate().map(|(i, h)| h * ((start + i) as f64 - mean).powi(2)).sum::<f64>();
        }
        start = end + 1;
    }
    total
}

/// Quantizes one unit-range plane to at most `classes` values, each class
/// represented by the mean of its members.
pub(crate) fn quantize_plane(plane: &[f32], classes: usize) -> Vec<f32> {
    let bin = |v: f32| ((v.clamp(0.0, 1.0) * 255.0).round() as usize).min(255);
    let mut hist = vec![0.0; 256];
    for &v in plane {
        hist[bin(v)] += 1.0;
    }
    let thresholds = multi_otsu(&hist, classes);
    let class_of = |b: usize| thresholds.partition_point(|&t| t < b);
    let mut sums = vec![0.0f64; classes];
    let mut counts = vec![0usize; classes];
    let labels: Vec<usize> = plane
        .iter()
        .map(|&v| {
            let c = class_of(bin(v));
            sums[c] += v as f64;
            counts[c] += 1;
            c
        })
        .collect();
    let means: Vec<f32> =
        sums.iter().zip(&counts).map(|(&s, &n)| if n > 0 { (s / n as f64) as f32 } else { 0.0 }).collect();
    labels.into_iter().map(|c| means[c]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive enumeration over all increasing threshold tuples.
    fn brute_force(hist: &[f64], classes: usize) -> f64 {
        fn rec(hist: &[f64], start: usize, left: usize, chosen: &mut Vec<usize>, best: &mut f64) {
            if left == 0 {
                *best = best.min(within_class_cost(hist, chosen));
                return;
            }
            for t in start..hist.len() - left {
                chosen.push(t);
                rec(hist, t + 1, left - 1, chosen, best);
                chosen.pop();
            }
        }
        let mut best = f64::INFINITY;
        rec(hist, 0, classes - 1, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn dp_matches_exhaustive_search() {
        let hists: [Vec<f64>; 3] = [
            vec![5.0, 1.0, 0.0, 7.0, 3.0, 3.0, 0.0, 9.0, 2.0, 4.0, 1.0, 6.0],
            (0..14).map(|i| ((i * 37) % 11) as f64).collect(),
            vec![0.0, 0.0, 10.0, 0.0, 0.0, 0.0, 10.0, 0.0, 0.0, 10.0],
        ];
        for hist in &hists {
            for classes in 2..=5 {
                let t = multi_otsu(hist, classes);
                assert_eq!(t.len(), classes - 1);
                assert!(t.windows(2).all(|w| w[0] < w[1]));
                let got = within_class_cost(hist, &t);
                let want = brute_force(hist, classes);
                assert!((got - want).abs() < 1e-9, "{classes}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn two_class_matches_classic_otsu_split() {
        let mut hist = vec![0.0; 256];
        hist[40] = 100.0;
        hist[200] = 100.0;
        let t = multi_otsu(&hist, 2);
        assert!((40..200).contains(&t[0]));
    }

    #[test]
    fn quantize_respects_class_count() {
        let plane: Vec<f32> = (0..1000).map(|i| (i as f32 / 999.0).powf(1.7)).collect();
        for classes in [2, 4, 8] {
            let q = quantize_plane(&plane, classes);
            let mut distinct: Vec<u32> = q.iter().map(|v| v.to_bits()).collect();
            distinct.sort_unstable();
            distinct.dedup();
            assert!(distinct.len() <= classes);
        }
    }
}
