//! Bitstring chromosomes, populations and per-locus 1-frequencies.
//!
//! Loci are numbered from 1, matching the index sets used throughout the
//! crate (`K = {1, 2, 4}` names the first, second and fourth locus).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed-length binary string. Each element is 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chromosome(Vec<u8>);

impl Chromosome {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::arg("chromosome must have at least one locus"));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::arg(format!("bit value {b} is not 0 or 1")));
        }
        Ok(Chromosome(bits))
    }

    pub fn zeros(n: usize) -> Self {
        Chromosome(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }
}

impl std::ops::Deref for Chromosome {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Chromosome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse(format!("unexpected character {other:?} in bitstring"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Chromosome::new(bits)
    }
}

/// An `m x n` bit matrix stored row-major, one byte per bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Population {
    m: usize,
    n: usize,
    bits: Vec<u8>,
}

impl Population {
    pub fn from_rows(rows: Vec<Chromosome>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::arg("population must have at least one row"));
        }
        let n = rows[0].len();
        let mut bits = Vec::with_capacity(m * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::arg(format!(
                    "row {} has length {}, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            bits.extend_from_slice(&row);
        }
        Ok(Population { m, n, bits })
    }

    /// Builds a population from a flat row-major buffer of 0/1 bytes.
    pub fn from_flat(m: usize, n: usize, bits: Vec<u8>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::arg("population dimensions must be positive"));
        }
        if bits.len() != m * n {
            return Err(Error::arg(format!(
                "buffer has {} bits, expected {m} x {n}",
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::arg("population bits must be 0 or 1"));
        }
        Ok(Population { m, n, bits })
    }

    pub(crate) fn from_flat_unchecked(m: usize, n: usize, bits: Vec<u8>) -> Self {
        debug_assert!(bits.len() == m * n && bits.iter().all(|&b| b <= 1));
        Population { m, n, bits }
    }

    /// `m` copies of the same chromosome.
    pub fn uniform(m: usize, x: &Chromosome) -> Result<Self> {
        if m == 0 {
            return Err(Error::arg("population must have at least one row"));
        }
        Ok(Population { m, n: x.len(), bits: x.repeat(m) })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row `i`, zero-based.
    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.bits[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.bits.chunks_exact(self.n)
    }

    pub fn as_flat(&self) -> &[u8] {
        &self.bits
    }

    /// Bit at zero-based `row` and one-based `locus`.
    pub fn get(&self, row: usize, locus: usize) -> Result<u8> {
        if row >= self.m {
            return Err(Error::Index { index: row + 1, len: self.m });
        }
        check_locus(locus, self.n)?;
        Ok(self.bits[row * self.n + locus - 1])
    }

    /// Applies a locus relabeling: locus `j` of every row moves to position
    /// `perm[j - 1]` (both one-based).
    pub fn permute_loci(&self, perm: &[usize]) -> Result<Self> {
        validate_permutation(perm, self.n)?;
        let mut bits = vec![0u8; self.bits.len()];
        for (src, dst) in self.rows().zip(bits.chunks_exact_mut(self.n)) {
            for (j, &p) in perm.iter().enumerate() {
                dst[p - 1] = src[j];
            }
        }
        Ok(Population { m: self.m, n: self.n, bits })
    }

    /// Plain text form: one row per line, characters `0`/`1`.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.m * (self.n + 1));
        for row in self.rows() {
            out.extend(row.iter().map(|&b| if b == 1 { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(Chromosome::from_str)
            .collect::<Result<Vec<_>>>()?;
        Population::from_rows(rows)
    }
}

pub(crate) fn check_locus(locus: usize, n: usize) -> Result<()> {
    if locus == 0 || locus > n {
        Err(Error::Index { index: locus, len: n })
    } else {
        Ok(())
    }
}

pub(crate) fn validate_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::arg(format!("permutation has {} entries, expected {n}", perm.len())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p == 0 || p > n || std::mem::replace(&mut seen[p - 1], true) {
            return Err(Error::arg(format!("{perm:?} is not a permutation of 1..={n}")));
        }
    }
    Ok(())
}

/// Draws an `m x n` population with every bit independently 1 with
/// probability 1/2.
pub fn random_population<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<Population> {
    if m == 0 || n == 0 {
        return Err(Error::arg(format!("population dimensions must be positive, got {m} x {n}")));
    }
    let bits = (0..m * n).map(|_| u8::from(rng.gen::<bool>())).collect();
    Ok(Population { m, n, bits })
}

/// Count of ones at a locus over the population size; an element of
/// `D_m = {0, 1/m, ..., 1}` kept as exact integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocusFrequency {
    pub ones: u32,
    pub m: u32,
}

impl LocusFrequency {
    pub fn new(ones: u32, m: u32) -> Result<Self> {
        if m == 0 || ones > m {
            return Err(Error::arg(format!("{ones}/{m} is not an element of D_m")));
        }
        Ok(LocusFrequency { ones, m })
    }

    pub fn value(self) -> f64 {
        self.ones as f64 / self.m as f64
    }
}

impl fmt::Display for LocusFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.ones, self.m)
    }
}

/// 1-frequency of a one-based locus.
pub fn one_frequency(pop: &Population, locus: usize) -> Result<LocusFrequency> {
    check_locus(locus, pop.n)?;
    let ones = pop.rows().filter(|row| row[locus - 1] == 1).count();
    Ok(LocusFrequency { ones: ones as u32, m: pop.m as u32 })
}

/// A strictly increasing set of one-based loci.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Sorts and deduplicates; rejects index 0.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.first() == Some(&0) {
            return Err(Error::arg("loci are numbered from 1"));
        }
        Ok(IndexSet(indices))
    }

    /// `{1, ..., k}`.
    pub fn first(k: usize) -> Self {
        IndexSet((1..=k).collect())
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn contains(&self, locus: usize) -> bool {
        self.0.binary_search(&locus).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn check_within(&self, n: usize) -> Result<()> {
        match self.max() {
            Some(max) if max > n => Err(Error::Index { index: max, len: n }),
            _ => Ok(()),
        }
    }

    /// Image under a one-based permutation of `1..=n`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        self.check_within(perm.len())?;
        IndexSet::new(self.iter().map(|i| perm[i - 1]).collect())
    }
}

impl TryFrom<Vec<usize>> for IndexSet {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        IndexSet::new(v)
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses `"1,2,4"`, `"1..7"` (inclusive), or mixtures such as `"1..3,9"`.
/// The empty string is the empty set.
impl FromStr for IndexSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('[').trim_end_matches(']');
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let parse = |t: &str| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad locus {t:?} in index set {s:?}")))
            };
            match part.split_once("..") {
                Some((lo, hi)) => {
                    let hi = hi.strip_prefix('=').unwrap_or(hi);
                    let (lo, hi) = (parse(lo)?, parse(hi)?);
                    if lo > hi {
                        return Err(Error::Parse(format!("empty range {part:?}")));
                    }
                    out.extend(lo..=hi);
                }
                None => out.push(parse(part)?),
            }
        }
        IndexSet::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use proptest::prelude::*;

    fn pop(rows: &[&str]) -> Population {
        Population::from_text(&rows.join("\n")).unwrap()
    }

    #[test]
    fn all_zero_population() {
        let p = pop(&["0000"; 4]);
        assert_eq!(one_frequency(&p, 1).unwrap(), LocusFrequency { ones: 0, m: 4 });
    }

    #[test]
    fn all_one_population() {
        let p = pop(&["1111"; 4]);
        assert_eq!(one_frequency(&p, 3).unwrap(), LocusFrequency { ones: 4, m: 4 });
    }

    #[test]
    fn mixed_population_first_locus() {
        let p = pop(&["1010", "0011", "1111"]);
        assert_eq!(one_frequency(&p, 1).unwrap().to_string(), "2/3");
    }

    #[test]
    fn locus_out_of_range() {
        let p = pop(&["1010"]);
        assert!(matches!(one_frequency(&p, 0), Err(Error::Index { .. })));
        assert!(matches!(one_frequency(&p, 5), Err(Error::Index { index: 5, len: 4 })));
    }

    #[test]
    fn random_population_shape_and_determinism() {
        let p = random_population(1, 1, &mut Stream::new(3)).unwrap();
        assert_eq!((p.m(), p.n()), (1, 1));
        let a = random_population(20, 9, &mut Stream::new(42)).unwrap();
        let b = random_population(20, 9, &mut Stream::new(42)).unwrap();
        assert_eq!(a, b);
        assert!(random_population(0, 3, &mut Stream::new(0)).is_err());
        assert!(random_population(3, 0, &mut Stream::new(0)).is_err());
    }

    #[test]
    fn random_population_is_balanced() {
        // 12000 fair bits: sd of the mean is 0.00456, so [0.45, 0.55] is
        // beyond 10 sd.
        let p = random_population(1500, 8, &mut Stream::new(11)).unwrap();
        let mean = p.as_flat().iter().map(|&b| b as f64).sum::<f64>() / 12000.0;
        assert!((0.45..=0.55).contains(&mean), "{mean}");
    }

    #[test]
    fn text_format_round_trip() {
        let text = "1010\n0011\n1111\n";
        assert_eq!(Population::from_text(text).unwrap().to_text(), text);
        assert!(Population::from_text("101\n11\n").is_err());
        assert!(Population::from_text("10a\n").is_err());
    }

    #[test]
    fn index_set_parsing() {
        assert_eq!("1..7".parse::<IndexSet>().unwrap(), IndexSet::first(7));
        assert_eq!("4,1,2".parse::<IndexSet>().unwrap().as_slice(), &[1, 2, 4]);
        assert_eq!("1..=3,9".parse::<IndexSet>().unwrap().as_slice(), &[1, 2, 3, 9]);
        assert!("0,1".parse::<IndexSet>().is_err());
        assert!("".parse::<IndexSet>().unwrap().is_empty());
    }

    #[test]
    fn permutation_moves_loci() {
        let p = pop(&["1100"]);
        let q = p.permute_loci(&[4, 3, 2, 1]).unwrap();
        assert_eq!(q.to_text(), "0011\n");
        assert!(p.permute_loci(&[1, 1, 2, 3]).is_err());
    }

    proptest! {
        #[test]
        fn frequency_is_row_permutation_invariant(
            seed in any::<u64>(), m in 1usize..40, n in 1usize..12, shift in 0usize..40,
        ) {
            let p = random_population(m, n, &mut Stream::new(seed)).unwrap();
            let mut rows: Vec<Chromosome> =
                p.rows().map(|r| Chromosome::new(r.to_vec()).unwrap()).collect();
            rows.rotate_left(shift % m);
            rows.reverse();
            let q = Population::from_rows(rows).unwrap();
            for locus in 1..=n {
                prop_assert_eq!(one_frequency(&p, locus).unwrap(), one_frequency(&q, locus).unwrap());
            }
        }

        #[test]
        fn frequency_lies_in_support(seed in any::<u64>(), m in 1usize..50, n in 1usize..6) {
            let p = random_population(m, n, &mut Stream::new(seed)).unwrap();
            for locus in 1..=n {
                let f = one_frequency(&p, locus).unwrap();
                prop_assert_eq!(f.m as usize, m);
                prop_assert!(f.ones <= f.m);
            }
        }
    }
}
