use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::tiles::seeded_rng;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];
}

/// Train/val/test fractions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let all = [train, val, test];
        if all.iter().any(|r| !r.is_finite() || *r < 0.0) || ((train + val + test) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "split ratios {train}:{val}:{test} must be non-negative and sum to 1"
            )));
        }
        Ok(Self { train, val, test })
    }

    fn as_array(&self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

/// Parses `train:val:test`, either as fractions or as parts such as `80:10:10`.
impl std::str::FromStr for SplitRatios {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidArgument(format!("bad split string {s:?}")))?;
        let [a, b, c] = parts[..] else {
            return Err(Error::InvalidArgument(format!("split string {s:?} needs three parts")));
        };
        let total = a + b + c;
        if total <= 0.0 || total.is_nan() {
            return Err(Error::InvalidArgument(format!("split string {s:?} sums to zero")));
        }
        SplitRatios::new(a / total, b / total, c / total)
    }
}

/// Bucket sizes by largest remainder. Leftover groups go to the largest
/// fractional parts; ties prefer the larger ratio, then the earlier bucket.
fn bucket_sizes(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let exact = ratios.map(|r| r * n as f64);
    let mut sizes = exact.map(|e| e.floor() as usize);
    let leftover = n - sizes.iter().sum::<usize>().min(n);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| {
        let fi = exact[i] - exact[i].floor();
        let fj = exact[j] - exact[j].floor();
        fj.total_cmp(&fi).then(ratios[j].total_cmp(&ratios[i])).then(i.cmp(&j))
    });
    for &i in order.iter().take(leftover) {
        sizes[i] += 1;
    }
    sizes
}

/// Shuffles the distinct group ids with a seeded generator and deals them
/// into train, val and test by `ratios`. A group never spans two splits.
pub fn assign_splits(groups: &[String], ratios: SplitRatios, seed: u64) -> Result<BTreeMap<String, Split>> {
    let mut ids: Vec<&String> = groups.iter().collect();
    ids.sort();
    ids.dedup();
    if ids.is_empty() {
        return Err(Error::EmptyInput("no groups to split"));
    }
    ids.shuffle(&mut seeded_rng(seed, 1));
    let sizes = bucket_sizes(ids.len(), ratios.as_array());
    let mut out = BTreeMap::new();
    let mut it = ids.into_iter();
    for (split, size) in Split::ALL.into_iter().zip(sizes) {
        for id in it.by_ref().take(size) {
            out.insert(id.clone(), split);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("scene{i:03}")).collect()
    }

    fn tally(map: &BTreeMap<String, Split>) -> [usize; 3] {
        let mut t = [0; 3];
        for s in map.values() {
            t[*s as usize] += 1;
        }
        t
    }

    #[test]
    fn ten_groups_eighty_ten_ten() {
        let map = assign_splits(&names(10), SplitRatios::default(), 4).unwrap();
        assert_eq!(tally(&map), [8, 1, 1]);
    }

    #[test]
    fn single_group_goes_to_train() {
        let map = assign_splits(&names(1), SplitRatios::default(), 0).unwrap();
        assert_eq!(tally(&map), [1, 0, 0]);
        let map = assign_splits(&names(1), SplitRatios::new(0.15, 0.7, 0.15).unwrap(), 0).unwrap();
        assert_eq!(tally(&map), [0, 1, 0]);
    }

    #[test]
    fn empty_rejected() {
        assert!(assign_splits(&[], SplitRatios::default(), 0).is_err());
    }

    #[test]
    fn parse_ratios() {
        assert_eq!("80:10:10".parse::<SplitRatios>().unwrap(), SplitRatios::default());
        let r: SplitRatios = "0.7:0.15:0.15".parse().unwrap();
        assert!((r.train - 0.7).abs() < 1e-12);
        assert!("1:2".parse::<SplitRatios>().is_err());
        assert!("a:b:c".parse::<SplitRatios>().is_err());
        assert!("0:0:0".parse::<SplitRatios>().is_err());
        assert!(SplitRatios::new(0.5, 0.5, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn group_atomic_and_close_to_ratios(ids in proptest::collection::vec(0u8..40, 1..80), seed: u64, a in 0u32..10, b in 0u32..10, c in 1u32..10) {
            let groups: Vec<String> = ids.iter().map(|i| format!("g{i}")).collect();
            let total = (a + b + c) as f64;
            let ratios = SplitRatios::new(a as f64 / total, b as f64 / total, c as f64 / total).unwrap();
            let map = assign_splits(&groups, ratios, seed).unwrap();
            let distinct: std::collections::BTreeSet<_> = groups.iter().collect();
            prop_assert_eq!(map.len(), distinct.len());
            let n = distinct.len() as f64;
            for (got, want) in tally(&map).iter().zip([ratios.train, ratios.val, ratios.test]) {
                prop_assert!((*got as f64 - want * n).abs() <= 1.0 + 1e-9);
            }
            prop_assert_eq!(map, assign_splits(&groups, ratios, seed).unwrap());
        }
    }
}
