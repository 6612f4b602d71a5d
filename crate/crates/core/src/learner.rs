//! Attributewise learning with the GA, recursive 3-way majority voting, and
//! the boosted (approximately correct) learner built from them.

use std::fmt;

use num::bigint::BigUint;
use num::rational::{BigRational, Ratio};
use num::{One, Zero};
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chromo::{one_frequency, Chromosome, Population};
use crate::error::{Error, Result};
use crate::oracle::{OracleSpec, QueryCounter};
use crate::rng::{derive_seed, Stream};
use crate::stats::{band_membership, Band};
use crate::uga::{GaConfig, Uga};

/// A guess at the target concept: bit `i` set means locus `i` is essential.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypothesis(Chromosome);

impl Hypothesis {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        Chromosome::new(bits).map(Hypothesis)
    }

    pub fn bits(&self) -> &[u8] {
        self.0.bits()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn matches(&self, spec: &OracleSpec) -> bool {
        self.bits() == spec.target_concept().bits()
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// GA parameters for the attributewise learner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: &'static str,
    pub m: usize,
    pub tau: u32,
    pub p_m: f64,
}

impl Preset {
    /// Population 1500, 800 generations, mutation rate 0.004.
    pub const PAPER: Preset = Preset { name: "paper", m: 1500, tau: 800, p_m: 0.004 };

    /// Small CI profile. Its per-bit error rate is not established; never
    /// use it as evidence for the validated-regime guarantees.
    pub const FAST: Preset = Preset { name: "fast", m: 200, tau: 200, p_m: 0.004 };

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "paper" => Ok(Preset::PAPER),
            "fast" => Ok(Preset::FAST),
            other => Err(Error::arg(format!("unknown preset {other:?} (expected paper or fast)"))),
        }
    }

    pub fn ga_config(&self, n: usize, seed: u64) -> Result<GaConfig> {
        GaConfig::new(self.m, n, self.tau, self.p_m, seed)
    }

    /// Queries per attributewise run, `m * tau`.
    pub fn queries_per_run(&self) -> u64 {
        self.m as u64 * self.tau as u64
    }

    /// True only for the paper preset on a `<k = 7, parity, eta = 1/5>`
    /// oracle, the one regime with statistical evidence behind it.
    pub fn validated_for(&self, spec: &OracleSpec) -> bool {
        *self == Preset::PAPER
            && spec.k() == 7
            && spec.function().id() == "parity"
            && spec.eta() == Ratio::new(1, 5)
    }
}

/// Reads a hypothesis off a final population: loci whose 1-frequency is
/// strictly inside `(0.05, 0.95)` are drifting and get 0, fixated loci get 1.
pub fn hypothesis_from_population(pop: &Population) -> Hypothesis {
    let bits = (1..=pop.n())
        .map(|locus| {
            let freq = one_frequency(pop, locus).expect("locus in range");
            match band_membership(freq) {
                Band::Inside => 0,
                Band::Outside => 1,
            }
        })
        .collect();
    Hypothesis::new(bits).expect("n >= 1")
}

/// Something that maps an oracle to a hypothesis, each bit wrong with
/// bounded probability.
pub trait AttributewiseLearner: Sync {
    fn learn(&self, spec: &OracleSpec, seed: u64, counter: &mut QueryCounter) -> Result<Hypothesis>;

    /// Upper bound on queries per call, when known.
    fn queries_per_run(&self) -> Option<u64> {
        None
    }
}

/// The GA-based attributewise learner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaLearner {
    pub preset: Preset,
}

impl GaLearner {
    pub fn paper() -> Self {
        GaLearner { preset: Preset::PAPER }
    }

    pub fn fast() -> Self {
        GaLearner { preset: Preset::FAST }
    }
}

impl AttributewiseLearner for GaLearner {
    fn learn(&self, spec: &OracleSpec, seed: u64, counter: &mut QueryCounter) -> Result<Hypothesis> {
        let cfg = self.preset.ga_config(spec.n(), seed)?;
        let outcome = Uga::new(spec, cfg)?.run(&crate::chromo::IndexSet::empty())?;
        *counter += outcome.queries;
        Ok(hypothesis_from_population(&outcome.population))
    }

    fn queries_per_run(&self) -> Option<u64> {
        Some(self.preset.queries_per_run())
    }
}

/// One run of the GA learner; see [`GaLearner`].
pub fn attributewise_learn(
    spec: &OracleSpec,
    preset: Preset,
    seed: u64,
    counter: &mut QueryCounter,
) -> Result<Hypothesis> {
    GaLearner { preset }.learn(spec, seed, counter)
}

/// Stand-in learner that returns the target concept with each bit flipped
/// independently with probability exactly `error`. Makes no queries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoisyConceptLearner {
    pub error: Ratio<u64>,
}

impl AttributewiseLearner for NoisyConceptLearner {
    fn learn(&self, spec: &OracleSpec, seed: u64, _counter: &mut QueryCounter) -> Result<Hypothesis> {
        let mut rng = Stream::new(seed);
        let (num, den) = (*self.error.numer() as u128, *self.error.denom() as u128);
        let bits = spec
            .target_concept()
            .bits()
            .iter()
            .map(|&b| {
                let flip = (rng.next_u64() as u128) * den < (num << 64);
                b ^ u8::from(flip)
            })
            .collect();
        Hypothesis::new(bits)
    }

    fn queries_per_run(&self) -> Option<u64> {
        Some(0)
    }
}

/// Mode of three bits.
#[inline]
pub fn majority3(a: u8, b: u8, c: u8) -> u8 {
    u8::from(a + b + c >= 2)
}

/// Depth-`ell` ternary majority tree over `3^ell` bits.
pub fn recursive_majority(ell: u32, xs: &[u8]) -> Result<u8> {
    if ell == 0 {
        return Err(Error::arg("recursion depth must be at least 1"));
    }
    let expected = 3usize
        .checked_pow(ell)
        .ok_or_else(|| Error::arg(format!("depth {ell} is too large")))?;
    if xs.len() != expected {
        return Err(Error::arg(format!("depth {ell} needs {expected} bits, got {}", xs.len())));
    }
    Ok(majority_tree(xs))
}

fn majority_tree(xs: &[u8]) -> u8 {
    if xs.len() == 3 {
        return majority3(xs[0], xs[1], xs[2]);
    }
    let third = xs.len() / 3;
    majority3(
        majority_tree(&xs[..third]),
        majority_tree(&xs[third..2 * third]),
        majority_tree(&xs[2 * third..]),
    )
}

/// Exact probability that the depth-`ell` majority of i.i.d. bits, each
/// wrong with probability `p`, is wrong:
/// `q_0 = p`, `q_l = q^3 + 3 q^2 (1 - q)` with `q = q_{l-1}`.
pub fn majority_failure_probability(ell: u32, p: &BigRational) -> BigRational {
    let three = BigRational::from_integer(3.into());
    (0..ell).fold(p.clone(), |q, _| {
        let q2 = &q * &q;
        &q2 * &q + &three * &q2 * (BigRational::one() - &q)
    })
}

/// `4^(2^ell - 1) * p^(2^ell)`, the closed-form bound on the same failure.
pub fn majority_failure_bound(ell: u32, p: &BigRational) -> BigRational {
    let power = 1usize << ell;
    let four = BigRational::from_integer(4.into());
    num::pow(four, power - 1) * num::pow(p.clone(), power)
}

/// Recursion depth and run count for the boosted learner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoostPlan {
    pub ell: u32,
    pub runs: u64,
    pub epsilon: Ratio<u64>,
}

impl BoostPlan {
    /// Checks `n / 2^(2^ell) < epsilon` exactly.
    pub fn meets_target(&self, n: u64) -> bool {
        let lhs = BigUint::from(n) * BigUint::from(*self.epsilon.denom());
        let rhs = BigUint::from(*self.epsilon.numer()) << (1usize << self.ell);
        lhs < rhs
    }
}

/// `ell = ceil(log2(log2 n + log2(1/eps))) + 1`, `runs = 3^ell`.
///
/// The ceiling is evaluated in exact integer arithmetic: it is the least
/// `L` with `2^(2^L) >= n / eps`.
pub fn boost_plan(n: u64, epsilon: Ratio<u64>) -> Result<BoostPlan> {
    if n < 2 {
        return Err(Error::arg(format!("need n >= 2, got {n}")));
    }
    if epsilon.numer().is_zero() || epsilon > Ratio::new(1, 8) {
        return Err(Error::arg(format!("epsilon must lie in (0, 1/8], got {epsilon}")));
    }
    let target = BigUint::from(n) * BigUint::from(*epsilon.denom());
    let num = BigUint::from(*epsilon.numer());
    let mut ceil = 0u32;
    while (&num << (1usize << ceil)) < target {
        ceil += 1;
    }
    let ell = ceil + 1;
    Ok(BoostPlan { ell, runs: 3u64.pow(ell), epsilon })
}

/// `9 c_A (log2 n + log2(1/eps))^1.585`, the query bound for the boosted
/// learner given `c_A` queries per attributewise run.
pub fn query_bound(n: u64, epsilon: Ratio<u64>, c_a: f64) -> f64 {
    let eps = *epsilon.numer() as f64 / *epsilon.denom() as f64;
    9.0 * c_a * ((n as f64).log2() + (1.0 / eps).log2()).powf(1.585)
}

#[derive(Clone, Debug)]
pub struct LearnOutcome {
    pub hypothesis: Hypothesis,
    pub plan: BoostPlan,
    pub queries: QueryCounter,
    /// Sub-run hypotheses in run order.
    pub votes: Vec<Hypothesis>,
}

/// Boosts an attributewise learner: `3^ell` independent runs, then a
/// recursive majority per bit. Run `r` is seeded with
/// `derive_seed(seed, r)`. Runs execute on the current rayon pool.
pub fn approx_learn<L: AttributewiseLearner>(
    spec: &OracleSpec,
    epsilon: Ratio<u64>,
    seed: u64,
    learner: &L,
) -> Result<LearnOutcome> {
    let plan = boost_plan(spec.n() as u64, epsilon)?;
    let results = (0..plan.runs)
        .into_par_iter()
        .map(|r| {
            let mut counter = QueryCounter::new();
            learner.learn(spec, derive_seed(seed, r), &mut counter).map(|h| (h, counter))
        })
        .collect::<Result<Vec<_>>>()?;
    let queries = results.iter().map(|(_, c)| *c).sum();
    let votes: Vec<Hypothesis> = results.into_iter().map(|(h, _)| h).collect();

    let mut column = vec![0u8; votes.len()];
    let bits = (0..spec.n())
        .map(|i| {
            for (slot, h) in column.iter_mut().zip(&votes) {
                *slot = h.bits()[i];
            }
            recursive_majority(plan.ell, &column)
        })
        .collect::<Result<Vec<u8>>>()?;
    Ok(LearnOutcome { hypothesis: Hypothesis::new(bits)?, plan, queries, votes })
}
