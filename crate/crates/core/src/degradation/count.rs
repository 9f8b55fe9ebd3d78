use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How to read the composition-count formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// The nested sums exactly as printed: `m` independent sums whose start
    /// index is `1..=m`, each running to the last group.
    Literal,
    /// `m` distinct groups in order: `sum_m m! L^m e_m(sizes)`.
    DistinctGroups,
}

impl FromStr for CountMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(CountMode::Literal),
            "distinct_groups" | "distinct-groups" => Ok(CountMode::DistinctGroups),
            other => Err(Error::invalid(format!("unknown count mode `{other}`"))),
        }
    }
}

/// Number of ordered compositions of up to `n_dist_max` steps with `levels`
/// intensity levels per step.
pub fn count_compositions(group_sizes: &[u64], levels: u64, n_dist_max: usize, mode: CountMode) -> Result<BigUint> {
    let g = group_sizes.len();
    if g == 0 {
        return Err(Error::invalid("at least one group is required"));
    }
    if levels < 1 {
        return Err(Error::invalid("levels must be at least 1"));
    }
    if n_dist_max < 1 || n_dist_max > g {
        return Err(Error::invalid(format!("n_dist_max must be in 1..={g}, got {n_dist_max}")));
    }

    let inner: Vec<BigUint> = match mode {
        CountMode::Literal => {
            // suffix[t] = sum of sizes from group t onwards
            let mut suffix = vec![0u64; g + 1];
            for t in (0..g).rev() {
                suffix[t] = suffix[t + 1] + group_sizes[t];
            }
            let mut prod = BigUint::from(1u32);
            (0..n_dist_max)
                .map(|t| {
                    prod *= suffix[t];
                    prod.clone()
                })
                .collect()
        }
        CountMode::DistinctGroups => {
            // coefficients of prod_i (1 + a_i x) give e_0..e_g
            let mut e = vec![BigUint::from(0u32); g + 1];
            e[0] = BigUint::from(1u32);
            for &a in group_sizes {
                for m in (1..=g).rev() {
                    let add = &e[m - 1] * a;
                    e[m] += add;
                }
            }
            e[1..=n_dist_max].to_vec()
        }
    };

    let mut total = BigUint::from(0u32);
    let mut factorial = BigUint::from(1u32);
    let mut power = BigUint::from(1u32);
    for (i, term) in inner.iter().enumerate() {
        let m = i as u64 + 1;
        factorial *= m;
        power *= levels;
        total += &factorial * &power * term;
    }
    Ok(total)
}
