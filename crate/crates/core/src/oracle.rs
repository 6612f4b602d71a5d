//! Essential-attribute oracle with random classification error.
//!
//! An oracle `<n, k, K, f, eta>` answers a query `x in {0,1}^n` with
//! `f(proj_K(x))`, negated with probability `eta`. Noise is drawn fresh on
//! every call, so repeating a query re-flips independently.

use std::fmt;
use std::ops::AddAssign;
use std::path::Path;

use num::rational::Ratio;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::chromo::{Chromosome, IndexSet};
use crate::error::{Error, Result};

/// Boolean function over `{0,1}^k`, addressed by a stable identifier.
#[derive(Clone, Copy)]
pub struct BooleanFn {
    id: &'static str,
    eval: fn(&[u8]) -> u8,
    builtin_parity: bool,
}

const BUILTIN: &[BooleanFn] =
    &[BooleanFn { id: "parity", eval: parity_unchecked, builtin_parity: true }];

impl BooleanFn {
    pub fn parity() -> Self {
        BUILTIN[0]
    }

    /// Looks up a built-in function by identifier.
    pub fn lookup(id: &str) -> Result<Self> {
        BUILTIN
            .iter()
            .find(|f| f.id == id)
            .copied()
            .ok_or_else(|| Error::arg(format!("unknown boolean function {id:?}")))
    }

    /// A user-supplied function. It is not resolvable by `lookup`, so specs
    /// using it cannot be read back from a config file.
    pub fn custom(id: &'static str, eval: fn(&[u8]) -> u8) -> Self {
        BooleanFn { id, eval, builtin_parity: false }
    }

    pub fn id(&self) -> &'static str {
        self.id
    }

    #[inline]
    pub fn eval(&self, y: &[u8]) -> u8 {
        (self.eval)(y) & 1
    }
}

impl fmt::Debug for BooleanFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("BooleanFn").field(&self.id).finish()
    }
}

impl PartialEq for BooleanFn {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for BooleanFn {}

#[inline]
fn parity_unchecked(y: &[u8]) -> u8 {
    y.iter().fold(0, |acc, &b| acc ^ b) & 1
}

/// 1 iff `y` has an odd number of ones.
pub fn parity(y: &[u8]) -> Result<u8> {
    if y.is_empty() {
        return Err(Error::arg("parity of an empty bit vector"));
    }
    Ok(parity_unchecked(y))
}

/// `proj_K(x)`: the bits of `x` at the loci in `K`, in increasing locus order.
pub fn project(x: &[u8], essential: &IndexSet) -> Result<Vec<u8>> {
    essential.check_within(x.len()).map_err(|_| {
        Error::arg(format!(
            "index set reaches locus {} but x has length {}",
            essential.max().unwrap_or(0),
            x.len()
        ))
    })?;
    Ok(essential.iter().map(|i| x[i - 1]).collect())
}

/// Number of oracle queries made so far.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QueryCounter(u64);

impl QueryCounter {
    pub fn new() -> Self {
        QueryCounter(0)
    }

    pub fn starting_at(count: u64) -> Self {
        QueryCounter(count)
    }

    pub fn count(&self) -> u64 {
        self.0
    }

    #[inline]
    fn tick(&mut self) {
        self.0 += 1;
    }
}

impl AddAssign for QueryCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for QueryCounter {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        QueryCounter(iter.map(|c| c.0).sum())
    }
}

/// The oracle `<n, k, K, f, eta>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleSpec {
    n: usize,
    essential: IndexSet,
    f: BooleanFn,
    eta: Ratio<u64>,
}

impl OracleSpec {
    pub fn new(n: usize, essential: IndexSet, f: BooleanFn, eta: Ratio<u64>) -> Result<Self> {
        let k = essential.len();
        if k == 0 {
            return Err(Error::arg("oracle needs at least one essential attribute"));
        }
        if k >= n {
            return Err(Error::arg(format!("need k < n, got k = {k}, n = {n}")));
        }
        essential.check_within(n)?;
        if *eta.numer() == 0 || eta >= Ratio::new(1, 2) {
            return Err(Error::arg(format!("eta must lie in (0, 1/2), got {eta}")));
        }
        Ok(OracleSpec { n, essential, f, eta })
    }

    /// Parity over `K` with the given noise rate.
    pub fn parity(n: usize, essential: IndexSet, eta: Ratio<u64>) -> Result<Self> {
        OracleSpec::new(n, essential, BooleanFn::parity(), eta)
    }

    /// `<n = 8, k = 7, K = [7], f = parity, eta = 1/5>`.
    pub fn paper_psi() -> Self {
        OracleSpec::parity(8, IndexSet::first(7), Ratio::new(1, 5)).expect("valid preset")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.essential.len()
    }

    pub fn essential(&self) -> &IndexSet {
        &self.essential
    }

    pub fn function(&self) -> BooleanFn {
        self.f
    }

    pub fn eta(&self) -> Ratio<u64> {
        self.eta
    }

    /// Same oracle with `K` replaced by its image under a one-based locus
    /// permutation.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        crate::chromo::validate_permutation(perm, self.n)?;
        OracleSpec::new(self.n, self.essential.permuted(perm)?, self.f, self.eta)
    }

    /// Noiseless label `f(proj_K(x))`. Does not count as a query.
    #[inline]
    pub fn label(&self, x: &[u8]) -> u8 {
        if self.f.builtin_parity {
            return self.essential.iter().fold(0, |acc, i| acc ^ x[i - 1]) & 1;
        }
        let y: SmallVec<[u8; 32]> = self.essential.iter().map(|i| x[i - 1]).collect();
        self.f.eval(&y)
    }

    /// One noisy query. Increments `counter` by exactly one.
    pub fn query<R: RngCore + ?Sized>(
        &self,
        x: &[u8],
        rng: &mut R,
        counter: &mut QueryCounter,
    ) -> Result<u8> {
        if x.len() != self.n {
            return Err(Error::arg(format!("query of length {} to an oracle over n = {}", x.len(), self.n)));
        }
        Ok(self.query_unchecked(x, rng.next_u64(), counter))
    }

    /// Query with a caller-supplied 64-bit noise draw. The label is flipped
    /// iff `draw / 2^64 < eta`, decided in exact integer arithmetic.
    #[inline]
    pub(crate) fn query_unchecked(&self, x: &[u8], draw: u64, counter: &mut QueryCounter) -> u8 {
        counter.tick();
        let flip = (draw as u128) * (*self.eta.denom() as u128) < ((*self.eta.numer() as u128) << 64);
        self.label(x) ^ u8::from(flip)
    }

    pub fn target_concept(&self) -> TargetConcept {
        let mut bits = vec![0u8; self.n];
        for i in self.essential.iter() {
            bits[i - 1] = 1;
        }
        TargetConcept(Chromosome::new(bits).expect("n >= 1"))
    }

    pub fn to_config(&self) -> OracleConfig {
        OracleConfig {
            n: self.n,
            k: self.k(),
            essential: self.essential.clone(),
            f: self.f.id().to_string(),
            eta_num: *self.eta.numer(),
            eta_den: *self.eta.denom(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_config()).expect("flat config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: OracleConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.build()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        OracleSpec::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml())?;
        Ok(())
    }
}

/// Flat key-value form of an [`OracleSpec`]: `n`, `k`, `K`, `f`, `eta_num`,
/// `eta_den`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "K")]
    pub essential: IndexSet,
    pub f: String,
    pub eta_num: u64,
    pub eta_den: u64,
}

impl OracleConfig {
    pub fn build(&self) -> Result<OracleSpec> {
        if self.essential.len() != self.k {
            return Err(Error::arg(format!("|K| = {} but k = {}", self.essential.len(), self.k)));
        }
        if self.eta_den == 0 {
            return Err(Error::arg("eta_den must be positive"));
        }
        OracleSpec::new(
            self.n,
            self.essential.clone(),
            BooleanFn::lookup(&self.f)?,
            Ratio::new(self.eta_num, self.eta_den),
        )
    }
}

/// `c*`: bit `i` is 1 iff locus `i` is essential.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TargetConcept(Chromosome);

impl TargetConcept {
    pub fn bits(&self) -> &[u8] {
        self.0.bits()
    }
}

impl fmt::Display for TargetConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Parses `"1/5"`, `"0.2"` or `"3"` as an exact rational.
pub fn parse_ratio(s: &str) -> Result<Ratio<u64>> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse {s:?} as a rational"));
    if let Some((num, den)) = s.split_once('/') {
        let num: u64 = num.trim().parse().map_err(|_| bad())?;
        let den: u64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(num, den));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 18 || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let den = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int.checked_mul(den).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
    Ok(Ratio::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use proptest::prelude::*;

    fn bits(s: &str) -> Vec<u8> {
        s.chars().map(|c| (c == '1') as u8).collect()
    }

    #[test]
    fn projection_examples() {
        let k: IndexSet = "1,2,4".parse().unwrap();
        assert_eq!(project(&bits("10110"), &k).unwrap(), bits("101"));
        let all = IndexSet::first(5);
        assert_eq!(project(&bits("01101"), &all).unwrap(), bits("01101"));
        let k: IndexSet = "3,5".parse().unwrap();
        assert_eq!(project(&bits("00101"), &k).unwrap(), bits("11"));
        let k: IndexSet = "2,6".parse().unwrap();
        assert!(project(&bits("00101"), &k).is_err());
    }

    #[test]
    fn parity_examples() {
        assert_eq!(parity(&bits("0000000")).unwrap(), 0);
        assert_eq!(parity(&bits("1000000")).unwrap(), 1);
        assert_eq!(parity(&bits("1010101")).unwrap(), 0);
        assert!(parity(&[]).is_err());
    }

    #[test]
    fn target_concepts() {
        assert_eq!(OracleSpec::paper_psi().target_concept().to_string(), "11111110");
        let eta = Ratio::new(1, 5);
        let spec = OracleSpec::parity(5, "5".parse().unwrap(), eta).unwrap();
        assert_eq!(spec.target_concept().to_string(), "00001");
        let spec = OracleSpec::parity(10, "2,4,9".parse().unwrap(), eta).unwrap();
        assert_eq!(spec.target_concept().to_string(), "0101000010");
    }

    #[test]
    fn spec_validation() {
        let eta = Ratio::new(1, 5);
        assert!(OracleSpec::parity(5, IndexSet::first(7), eta).is_err());
        assert!(OracleSpec::parity(7, IndexSet::first(7), eta).is_err());
        assert!(OracleSpec::parity(8, "1,9".parse().unwrap(), eta).is_err());
        assert!(OracleSpec::parity(8, IndexSet::empty(), eta).is_err());
        assert!(OracleSpec::parity(8, IndexSet::first(7), Ratio::new(1, 2)).is_err());
        assert!(OracleSpec::parity(8, IndexSet::first(7), Ratio::new(0, 1)).is_err());
    }

    #[test]
    fn near_noiseless_query() {
        let spec = OracleSpec::parity(8, IndexSet::first(7), Ratio::new(1, 1_000_000_000)).unwrap();
        let mut counter = QueryCounter::new();
        let x = bits("10000000");
        let mut rng = Stream::new(1);
        assert_eq!(spec.query(&x, &mut rng, &mut counter).unwrap(), 1);
    }

    #[test]
    fn query_increments_counter() {
        let spec = OracleSpec::paper_psi();
        let mut counter = QueryCounter::starting_at(5);
        spec.query(&bits("00000000"), &mut Stream::new(0), &mut counter).unwrap();
        assert_eq!(counter.count(), 6);
        assert!(spec.query(&bits("0000"), &mut Stream::new(0), &mut counter).is_err());
        assert_eq!(counter.count(), 6);
    }

    #[test]
    fn empirical_flip_rate() {
        // 10^6 Bernoulli(0.2) trials: sd 0.0004, tolerance 0.002 is 5 sd.
        let spec = OracleSpec::paper_psi();
        let x = bits("11010010");
        let clean = spec.label(&x);
        let mut rng = Stream::new(2024);
        let mut counter = QueryCounter::new();
        let flips = (0..1_000_000)
            .filter(|_| spec.query(&x, &mut rng, &mut counter).unwrap() != clean)
            .count();
        let rate = flips as f64 / 1e6;
        assert!((rate - 0.2).abs() < 0.002, "{rate}");
        assert_eq!(counter.count(), 1_000_000);
    }

    #[test]
    fn config_round_trip() {
        let spec = OracleSpec::parity(10, "2,4,9".parse().unwrap(), Ratio::new(1, 5)).unwrap();
        let text = spec.to_toml();
        assert!(text.contains("eta_num = 1"));
        assert!(text.contains("K = [2, 4, 9]"));
        assert_eq!(OracleSpec::from_toml(&text).unwrap(), spec);
        let bad = text.replace("k = 3", "k = 2");
        assert!(OracleSpec::from_toml(&bad).is_err());
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(parse_ratio("1/5").unwrap(), Ratio::new(1, 5));
        assert_eq!(parse_ratio("0.2").unwrap(), Ratio::new(1, 5));
        assert_eq!(parse_ratio("0.125").unwrap(), Ratio::new(1, 8));
        assert_eq!(parse_ratio(".5").unwrap(), Ratio::new(1, 2));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("x").is_err());
    }

    proptest! {
        #[test]
        fn parity_flips_with_any_single_bit(y in prop::collection::vec(0u8..2, 1..40), pos in any::<prop::sample::Index>()) {
            let p = parity(&y).unwrap();
            prop_assert_eq!(p, y.iter().fold(0, |a, b| a ^ b));
            let mut z = y.clone();
            let i = pos.index(z.len());
            z[i] ^= 1;
            prop_assert_eq!(parity(&z).unwrap(), 1 - p);
        }

        #[test]
        fn query_depends_only_on_projection(
            seed in any::<u64>(),
            x in prop::collection::vec(0u8..2, 8),
            noise in 0u8..2,
        ) {
            let spec = OracleSpec::paper_psi();
            let mut y = x.clone();
            y[7] = noise;
            let (mut ca, mut cb) = (QueryCounter::new(), QueryCounter::new());
            let (mut ra, mut rb) = (Stream::new(seed), Stream::new(seed));
            for _ in 0..16 {
                prop_assert_eq!(
                    spec.query(&x, &mut ra, &mut ca).unwrap(),
                    spec.query(&y, &mut rb, &mut cb).unwrap()
                );
            }
        }
    }
}
