//! Which player subsets get evaluated at each size.
//!
//! Subsets are bitmasks over player indices. Plans are complement-closed:
//! the sets used at size `N − ℓ` are the complements of those used at `ℓ`,
//! so complementarity identities can be checked pair by pair.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest player count a subset bitmask supports.
pub const MAX_PLAYERS: usize = 30;

/// How many subsets of each size to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetStrategy {
    /// Every subset of every size.
    All,
    /// At most `k` distinct subsets per size; exhaustive where `C(N, ℓ) ≤ k`.
    RandomK(usize),
}

impl SubsetStrategy {
    /// Default subset budget for random sampling.
    pub const DEFAULT_K: usize = 64;

    /// Exhaustive for `N ≤ 10`, 64 random subsets per size beyond.
    pub fn default_for(n_players: usize) -> Self {
        if n_players <= 10 {
            SubsetStrategy::All
        } else {
            SubsetStrategy::RandomK(Self::DEFAULT_K)
        }
    }
}

impl fmt::Display for SubsetStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubsetStrategy::All => f.write_str("all"),
            SubsetStrategy::RandomK(k) => write!(f, "random_k({k})"),
        }
    }
}

impl FromStr for SubsetStrategy {
    type Err = Error;

    /// Accepts `all`, a bare integer `k`, or `random_k(k)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(SubsetStrategy::All);
        }
        let inner = s
            .strip_prefix("random_k(")
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(s);
        match inner.parse::<usize>() {
            Ok(k) if k >= 2 => Ok(SubsetStrategy::RandomK(k)),
            _ => Err(Error::Parse(format!(
                "subset strategy must be 'all' or an integer ≥ 2, got '{s}'"
            ))),
        }
    }
}

/// `C(n, k)` saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// All `ℓ`-subsets of `n` players in increasing bitmask order.
pub fn all_subsets(n: usize, l: usize) -> Vec<u32> {
    if l > n {
        return Vec::new();
    }
    if l == 0 {
        return vec![0];
    }
    let limit: u64 = 1 << n;
    let mut out = Vec::with_capacity(binomial(n, l) as usize);
    let mut v: u64 = (1 << l) - 1;
    while v < limit {
        out.push(v as u32);
        // Next integer with the same popcount.
        let t = v | (v - 1);
        v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
    }
    out
}

fn random_subset<R: Rng + ?Sized>(rng: &mut R, pool: &[usize], l: usize) -> u32 {
    sample_indices(rng, pool.len(), l)
        .into_iter()
        .fold(0u32, |m, i| m | 1 << pool[i])
}

/// Complement-closed subset plan for `n` players: entry `ℓ` lists the masks
/// evaluated at size `ℓ`.
pub fn subset_plan<R: Rng + ?Sized>(n: usize, strategy: SubsetStrategy, rng: &mut R) -> Result<Vec<Vec<u32>>> {
    if n == 0 || n > MAX_PLAYERS {
        return Err(Error::InvalidParameter(format!(
            "subset plans need 1 ≤ N ≤ {MAX_PLAYERS}, got {n}"
        )));
    }
    let full: u32 = ((1u64 << n) - 1) as u32;
    let mut plan: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    let exhaustive = |l: usize| match strategy {
        SubsetStrategy::All => true,
        SubsetStrategy::RandomK(k) => binomial(n, l) <= k as u128,
    };
    let everyone: Vec<usize> = (0..n).collect();
    for l in 0..=n / 2 {
        if exhaustive(l) {
            plan[l] = all_subsets(n, l);
        } else if 2 * l < n {
            let SubsetStrategy::RandomK(k) = strategy else { unreachable!() };
            let mut chosen = BTreeSet::new();
            while chosen.len() < k {
                chosen.insert(random_subset(rng, &everyone, l));
            }
            plan[l] = chosen.into_iter().collect();
        } else {
            // ℓ = N/2: half the budget on sets holding player 0, the rest their complements.
            let SubsetStrategy::RandomK(k) = strategy else { unreachable!() };
            let others: Vec<usize> = (1..n).collect();
            let half = (k / 2).max(1);
            let mut chosen = BTreeSet::new();
            while chosen.len() < half {
                chosen.insert(1 | random_subset(rng, &others, l - 1));
            }
            let mut both: Vec<u32> = chosen.iter().copied().collect();
            both.extend(chosen.iter().map(|m| full & !m));
            both.sort_unstable();
            plan[l] = both;
        }
    }
    for l in n / 2 + 1..=n {
        let mut comp: Vec<u32> = plan[n - l].iter().map(|m| full & !m).collect();
        comp.sort_unstable();
        plan[l] = comp;
    }
    Ok(plan)
}

/// Player indices set in `mask`.
pub fn mask_members(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |k| mask >> k & 1 == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::stream_rng;
    use proptest::prelude::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(12, 6), 924);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
    }

    #[test]
    fn enumerates_all() {
        assert_eq!(all_subsets(4, 2), vec![0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
        assert_eq!(all_subsets(3, 0), vec![0]);
        assert_eq!(all_subsets(3, 3), vec![0b111]);
        for n in 1..=12 {
            for l in 0..=n {
                let v = all_subsets(n, l);
                assert_eq!(v.len() as u128, binomial(n, l));
                assert!(v.iter().all(|m| m.count_ones() as usize == l));
            }
        }
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("all".parse::<SubsetStrategy>().unwrap(), SubsetStrategy::All);
        assert_eq!("64".parse::<SubsetStrategy>().unwrap(), SubsetStrategy::RandomK(64));
        assert_eq!("random_k(8)".parse::<SubsetStrategy>().unwrap(), SubsetStrategy::RandomK(8));
        assert!("x".parse::<SubsetStrategy>().is_err());
        assert!("1".parse::<SubsetStrategy>().is_err());
        assert_eq!(SubsetStrategy::RandomK(64).to_string().parse::<SubsetStrategy>().unwrap(), SubsetStrategy::RandomK(64));
        assert_eq!(SubsetStrategy::default_for(10), SubsetStrategy::All);
        assert_eq!(SubsetStrategy::default_for(12), SubsetStrategy::RandomK(64));
    }

    #[test]
    fn n12_plan_shape() {
        let plan = subset_plan(12, SubsetStrategy::RandomK(64), &mut stream_rng(1, 1)).unwrap();
        assert_eq!(plan[0], vec![0]);
        assert_eq!(plan[1].len(), 12);
        assert_eq!(plan[11].len(), 12);
        assert_eq!(plan[12], vec![0xfff]);
        for l in 2..=10 {
            assert_eq!(plan[l].len(), 64, "ℓ={l}");
        }
    }

    proptest! {
        #[test]
        fn plans_are_complement_closed(n in 1usize..14, k in 2usize..40, seed in any::<u64>()) {
            let plan = subset_plan(n, SubsetStrategy::RandomK(k), &mut stream_rng(seed, 0)).unwrap();
            let full = ((1u64 << n) - 1) as u32;
            for l in 0..=n {
                let set: BTreeSet<u32> = plan[l].iter().copied().collect();
                prop_assert_eq!(set.len(), plan[l].len());
                prop_assert!(plan[l].iter().all(|m| m.count_ones() as usize == l && m & !full == 0));
                for m in &plan[l] {
                    prop_assert!(plan[n - l].contains(&(full & !m)));
                }
                prop_assert!(plan[l].len() as u128 <= binomial(n, l).min(k.max(1) as u128));
            }
        }
    }
}
