//! Exhaustive schema-partition effects over small search spaces.
//!
//! A fitness function over `{0,1}^n` is held as a full table. Entry `x`
//! is the fitness of the chromosome whose locus 1 is the most significant
//! bit of `x`. Fixing the loci of an index set `I` to a pattern gives a
//! schema; its mean fitness under the uniform distribution is the schema
//! mean, and the effect of the partition `[[I]]` is the population variance
//! of its `2^|I|` schema means.

use std::collections::BTreeMap;

use num::bigint::BigUint;
use num::rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::chromo::IndexSet;
use crate::error::{Error, Result};

/// Largest `n` handled by exhaustive enumeration.
pub const MAX_EXHAUSTIVE_N: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct FitnessTable {
    n: usize,
    values: Vec<f64>,
}

impl FitnessTable {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        check_n(n)?;
        if values.len() != 1 << n {
            return Err(Error::arg(format!("table for n = {n} needs {} entries, got {}", 1u64 << n, values.len())));
        }
        Ok(FitnessTable { n, values })
    }

    /// Tabulates `f` over every chromosome; `f` sees one-based-locus order.
    pub fn from_fn(n: usize, mut f: impl FnMut(&[u8]) -> f64) -> Result<Self> {
        check_n(n)?;
        let mut bits = vec![0u8; n];
        let values = (0..1u32 << n)
            .map(|x| {
                for (j, b) in bits.iter_mut().enumerate() {
                    *b = ((x >> (n - 1 - j)) & 1) as u8;
                }
                f(&bits)
            })
            .collect();
        Ok(FitnessTable { n, values })
    }

    /// Noiseless parity of the loci in `essential`.
    pub fn parity(n: usize, essential: &IndexSet) -> Result<Self> {
        essential.check_within(n)?;
        FitnessTable::from_fn(n, |x| essential.iter().fold(0u8, |acc, i| acc ^ x[i - 1]) as f64)
    }

    /// Expected fitness under a label-flipping oracle with rate `eta`:
    /// `(1 - eta) f + eta (1 - f)`.
    pub fn with_noise(&self, eta: Ratio<u64>) -> Self {
        let eta = *eta.numer() as f64 / *eta.denom() as f64;
        FitnessTable {
            n: self.n,
            values: self.values.iter().map(|&f| (1.0 - eta) * f + eta * (1.0 - f)).collect(),
        }
    }

    /// Parses whitespace-separated values, `2^n` of them, in table order.
    /// Lines starting with `#` are comments.
    pub fn from_text(n: usize, text: &str) -> Result<Self> {
        let values = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .flat_map(str::split_whitespace)
            .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad fitness value {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        FitnessTable::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fitness of one chromosome.
    pub fn at(&self, x: &[u8]) -> f64 {
        let idx = x.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        self.values[idx]
    }

    /// Same function with loci relabeled: old locus `j` becomes `perm[j-1]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        crate::chromo::validate_permutation(perm, self.n)?;
        let mut old = vec![0u8; self.n];
        FitnessTable::from_fn(self.n, |x| {
            for (j, &p) in perm.iter().enumerate() {
                old[j] = x[p - 1];
            }
            self.at(&old)
        })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::Capability(format!(
            "exhaustive schema analysis is limited to n <= {MAX_EXHAUSTIVE_N}, got {n}"
        )));
    }
    if n == 0 {
        return Err(Error::arg("n must be positive"));
    }
    Ok(())
}

/// Pattern index of `x` on the loci of `set`, first locus most significant.
#[inline]
fn pattern_of(x: usize, n: usize, set: &[usize]) -> usize {
    set.iter().fold(0, |acc, &i| (acc << 1) | ((x >> (n - i)) & 1))
}

fn all_schema_means(fitness: &FitnessTable, set: &IndexSet) -> Result<Vec<f64>> {
    set.check_within(fitness.n)?;
    let order = set.len();
    let mut sums = vec![0.0; 1 << order];
    for (x, &f) in fitness.values.iter().enumerate() {
        sums[pattern_of(x, fitness.n, set.as_slice())] += f;
    }
    let per_schema = (1u64 << (fitness.n - order)) as f64;
    Ok(sums.into_iter().map(|s| s / per_schema).collect())
}

/// Mean fitness of the schema fixing `set` to `pattern`, over all
/// `2^(n - |set|)` completions.
pub fn schema_mean(fitness: &FitnessTable, set: &IndexSet, pattern: &[u8]) -> Result<f64> {
    set.check_within(fitness.n)?;
    if pattern.len() != set.len() || pattern.iter().any(|&b| b > 1) {
        return Err(Error::arg(format!("pattern must be {} bits", set.len())));
    }
    let want = pattern.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    let mut sum = 0.0;
    let mut count = 0u64;
    for (x, &f) in fitness.values.iter().enumerate() {
        if pattern_of(x, fitness.n, set.as_slice()) == want {
            sum += f;
            count += 1;
        }
    }
    Ok(sum / count as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionEffect {
    pub index_set: IndexSet,
    pub effect: f64,
    /// Keyed by the pattern as a bitstring, first locus of the set first.
    pub schema_means: BTreeMap<String, f64>,
}

/// Population variance of the schema means of `[[set]]`.
pub fn partition_effect(fitness: &FitnessTable, set: &IndexSet) -> Result<PartitionEffect> {
    let means = all_schema_means(fitness, set)?;
    let global = means.iter().sum::<f64>() / means.len() as f64;
    let effect = means.iter().map(|m| (m - global).powi(2)).sum::<f64>() / means.len() as f64;
    let order = set.len();
    let schema_means = means
        .into_iter()
        .enumerate()
        .map(|(p, m)| {
            let key: String = (0..order).map(|j| if (p >> (order - 1 - j)) & 1 == 1 { '1' } else { '0' }).collect();
            (key, m)
        })
        .collect();
    Ok(PartitionEffect { index_set: set.clone(), effect, schema_means })
}

/// Number of schema partitions of order `k` over `n` loci, `C(n, k)`.
pub fn count_partitions(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::from(1u32), |acc, i| acc * BigUint::from(n - i) / BigUint::from(i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chromo::IndexSet;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn set(s: &str) -> IndexSet {
        s.parse().unwrap()
    }

    #[test]
    fn constant_fitness() {
        let t = FitnessTable::new(4, vec![2.5; 16]).unwrap();
        assert_eq!(schema_mean(&t, &set("1,3"), &[1, 0]).unwrap(), 2.5);
        assert_eq!(partition_effect(&t, &set("2,3,4")).unwrap().effect, 0.0);
    }

    #[test]
    fn parity_of_three_bits() {
        let t = FitnessTable::parity(3, &IndexSet::first(3)).unwrap();
        assert_eq!(schema_mean(&t, &set("1"), &[1]).unwrap(), 0.5);
    }

    #[test]
    fn singleton_schema_is_a_point() {
        let t = FitnessTable::from_fn(4, |x| x.iter().map(|&b| b as f64).sum::<f64>() * 1.5).unwrap();
        assert_eq!(schema_mean(&t, &IndexSet::first(4), &[1, 0, 1, 1]).unwrap(), 4.5);
    }

    #[test]
    fn empty_set_has_no_effect() {
        let t = FitnessTable::from_fn(5, |x| x[0] as f64 * 3.0 + x[4] as f64).unwrap();
        let e = partition_effect(&t, &IndexSet::empty()).unwrap();
        assert_eq!(e.effect, 0.0);
        assert_eq!(e.schema_means.len(), 1);
        assert_eq!(e.schema_means[""], 2.0);
    }

    #[test]
    fn parity_effect_only_at_full_order() {
        let t = FitnessTable::parity(7, &IndexSet::first(7)).unwrap();
        assert_eq!(partition_effect(&t, &IndexSet::first(7)).unwrap().effect, 0.25);
        assert_eq!(partition_effect(&t, &set("1,2,3,4,5,6")).unwrap().effect, 0.0);
        assert_eq!(partition_effect(&t, &set("2,7")).unwrap().effect, 0.0);
    }

    #[test]
    fn noisy_parity_effect() {
        let t = FitnessTable::parity(7, &IndexSet::first(7)).unwrap().with_noise(Ratio::new(1, 5));
        assert_abs_diff_eq!(partition_effect(&t, &IndexSet::first(7)).unwrap().effect, 0.09, epsilon = 1e-12);
    }

    #[test]
    fn effect_by_hand() {
        // n = 2, f(x1, x2) = x1: partition {1} means 0 and 1, variance 0.25.
        let t = FitnessTable::from_fn(2, |x| x[0] as f64).unwrap();
        let e = partition_effect(&t, &set("1")).unwrap();
        assert_eq!(e.effect, 0.25);
        assert_eq!(e.schema_means["0"], 0.0);
        assert_eq!(e.schema_means["1"], 1.0);
        assert_eq!(partition_effect(&t, &set("2")).unwrap().effect, 0.0);
    }

    #[test]
    fn capability_limit() {
        assert!(matches!(FitnessTable::from_fn(25, |_| 0.0), Err(Error::Capability(_))));
        assert!(FitnessTable::new(3, vec![0.0; 7]).is_err());
    }

    #[test]
    fn partition_counts() {
        assert_eq!(count_partitions(1_000_000, 2), BigUint::from(499_999_500_000u64));
        assert_eq!(count_partitions(17, 0), BigUint::from(1u32));
        assert_eq!(count_partitions(17, 1), BigUint::from(17u32));
        assert_eq!(count_partitions(10, 3), BigUint::from(120u32));
        assert_eq!(count_partitions(3, 4), BigUint::from(0u32));
    }

    #[test]
    fn table_text_format() {
        let t = FitnessTable::from_text(2, "# f = x1\n0 0\n1 1\n").unwrap();
        assert_eq!(t.values(), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(t.at(&[1, 0]), 1.0);
        assert!(FitnessTable::from_text(2, "0 1 2").is_err());
    }

    fn random_table(n: usize, seed: u64) -> FitnessTable {
        let mut rng = crate::rng::Stream::new(seed);
        use rand::Rng;
        FitnessTable::from_fn(n, |_| rng.gen_range(0.0..10.0)).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn effect_grows_along_chains(seed in any::<u64>(), n in 1usize..=8, order in any::<prop::sample::Index>()) {
            let t = random_table(n, seed);
            let mut loci: Vec<usize> = (1..=n).collect();
            loci.rotate_left(order.index(n));
            let mut prev = 0.0;
            for k in 0..=n {
                let e = partition_effect(&t, &IndexSet::new(loci[..k].to_vec()).unwrap()).unwrap().effect;
                prop_assert!(e >= prev - 1e-12, "effect fell from {prev} to {e} at order {k}");
                prev = e;
            }
        }

        #[test]
        fn effect_is_relabeling_invariant(
            seed in any::<u64>(),
            perm in Just((1..=6usize).collect::<Vec<_>>()).prop_shuffle(),
            mask in 0u32..64,
        ) {
            let t = random_table(6, seed);
            let s = IndexSet::new((1..=6).filter(|i| mask >> (i - 1) & 1 == 1).collect()).unwrap();
            let a = partition_effect(&t, &s).unwrap().effect;
            let b = partition_effect(&t.permuted(&perm).unwrap(), &s.permuted(&perm).unwrap()).unwrap().effect;
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
