use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GmadPair {
    pub level: usize,
    pub low_index: usize,
    pub high_index: usize,
}

/// Equal-count quantile bins of the defender scores, lowest scores first.
/// With `n = q * k + r`, the first `r` bins hold `q + 1` items. Equal scores
/// are ordered by index.
pub fn gmad_bins(defender: &[f64], n_levels: usize) -> Result<Vec<Vec<usize>>> {
    if n_levels < 1 {
        return Err(Error::invalid("gMAD needs at least one level"));
    }
    if defender.len() < 2 * n_levels {
        return Err(Error::invalid(format!(
            "gMAD with {n_levels} levels needs at least {} scores, got {}",
            2 * n_levels,
            defender.len()
        )));
    }
    if defender.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("gMAD scores must be finite"));
    }
    let mut order: Vec<usize> = (0..defender.len()).collect();
    order.sort_by(|&a, &b| defender[a].total_cmp(&defender[b]));
    let (q, r) = (defender.len() / n_levels, defender.len() % n_levels);
    let mut bins = Vec::with_capacity(n_levels);
    let mut start = 0;
    for level in 0..n_levels {
        let size = q + usize::from(level < r);
        bins.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(bins)
}

/// Within every defender level, the items with the lowest and highest attacker
/// score. Ties go to the lower index.
pub fn gmad_pairs(defender: &[f64], attacker: &[f64], n_levels: usize) -> Result<Vec<GmadPair>> {
    if defender.len() != attacker.len() {
        return Err(Error::invalid(format!("score lists differ in length: {} vs {}", defender.len(), attacker.len())));
    }
    if attacker.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("gMAD scores must be finite"));
    }
    let bins = gmad_bins(defender, n_levels)?;
    Ok(bins
        .iter()
        .enumerate()
        .map(|(level, bin)| {
            let mut lo = bin[0];
            let mut hi = bin[0];
            for &i in bin {
                if attacker[i] < attacker[lo] || (attacker[i] == attacker[lo] && i < lo) {
                    lo = i;
                }
                if attacker[i] > attacker[hi] || (attacker[i] == attacker[hi] && i < hi) {
                    hi = i;
                }
            }
            GmadPair { level, low_index: lo, high_index: hi }
        })
        .collect())
}
