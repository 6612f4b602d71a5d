//! Simple genetic algorithm with uniform crossover.
//!
//! Each generation evaluates all `m` chromosomes with one noisy oracle
//! query apiece, draws `2m` parents by fitness-proportionate (roulette)
//! selection, crosses parent `i` with parent `i + m` under a uniform mask,
//! and flips every child bit with probability `p_m`. There is no elitism
//! or fitness scaling.
//!
//! All randomness is counter-based, keyed on `(seed, generation, phase,
//! row)` and then on a per-position locus key. By default the key of
//! position `j` is `j`. Keys are grouped in blocks of 64: the initial bit and
//! the crossover mask bit of key `k` are bit `k % 64` of a word drawn for
//! block `k / 64`, and the mutated keys of a block are placed by geometric
//! gap sampling from a stream owned by that block. Every per-locus decision
//! is a function of the key alone, so relabeling the keys lets a permuted
//! problem replay the original run bit for bit.

use std::collections::BTreeMap;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::chromo::{one_frequency, IndexSet, LocusFrequency, Population};
use crate::error::{Error, Result};
use crate::oracle::{OracleSpec, QueryCounter};
use crate::rng::{self, Key};

const PHASE_INIT: u64 = 0;
const PHASE_NOISE: u64 = 1;
const PHASE_SELECT: u64 = 2;
const PHASE_VARY: u64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    /// Population size.
    pub m: usize,
    /// Chromosome length.
    pub n: usize,
    /// Number of generations.
    pub tau: u32,
    /// Per-bit mutation probability.
    pub p_m: f64,
    pub seed: u64,
}

impl GaConfig {
    pub fn new(m: usize, n: usize, tau: u32, p_m: f64, seed: u64) -> Result<Self> {
        let cfg = GaConfig { m, n, tau, p_m, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::arg(format!("population size must be at least 2, got {}", self.m)));
        }
        if self.n == 0 {
            return Err(Error::arg("chromosome length must be positive"));
        }
        if self.tau == 0 {
            return Err(Error::arg("number of generations must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.p_m) {
            return Err(Error::arg(format!("mutation rate must lie in [0, 1), got {}", self.p_m)));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        GaConfig { seed, ..self }
    }

}

/// Tracked 1-frequencies of one generation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub generation: u32,
    pub frequencies: BTreeMap<usize, LocusFrequency>,
}

impl GenerationTrace {
    pub fn capture(generation: u32, pop: &Population, tracked: &IndexSet) -> Result<Self> {
        let frequencies = tracked
            .iter()
            .map(|locus| one_frequency(pop, locus).map(|f| (locus, f)))
            .collect::<Result<_>>()?;
        Ok(GenerationTrace { generation, frequencies })
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub population: Population,
    pub traces: Vec<GenerationTrace>,
    pub queries: QueryCounter,
}

/// Roulette selection of `count` indices into `fitness`.
///
/// Index `i` is drawn with probability `fitness[i] / sum(fitness)`. When the
/// total is zero every index is equally likely.
pub fn select_parents<R: RngCore + ?Sized>(
    fitness: &[f64],
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if fitness.is_empty() {
        return Err(Error::arg("cannot select from an empty population"));
    }
    if let Some(bad) = fitness.iter().find(|f| !f.is_finite() || **f < 0.0) {
        return Err(Error::arg(format!("fitness values must be finite and non-negative, got {bad}")));
    }
    let total: f64 = fitness.iter().sum();
    let m = fitness.len() as u64;
    if total > 0.0 && fitness.iter().all(|&f| f == 0.0 || f == 1.0) {
        // Binary fitness: cumulative sums are exact integers, so the first
        // index whose sum exceeds the target is the (floor(target)+1)-th
        // fit row. Same result as the search below, in O(1) per draw.
        let fit: Vec<usize> = (0..fitness.len()).filter(|&i| fitness[i] == 1.0).collect();
        return Ok((0..count)
            .map(|_| {
                let target = rng::unit_f64(rng.next_u64()) * total;
                fit[(target as usize).min(fit.len() - 1)]
            })
            .collect());
    }
    let cumulative: Vec<f64> = fitness
        .iter()
        .scan(0.0, |acc, &f| {
            *acc += f;
            Some(*acc)
        })
        .collect();
    Ok((0..count)
        .map(|_| {
            let bits = rng.next_u64();
            if total == 0.0 {
                return rng::below(bits, m) as usize;
            }
            let target = rng::unit_f64(bits) * total;
            // first index whose cumulative mass exceeds the target; a
            // zero-fitness row never satisfies this strictly.
            cumulative.partition_point(|&c| c <= target).min(fitness.len() - 1)
        })
        .collect())
}

/// Child bit `j` comes from `parent_a` where `mask[j] = 1`, else `parent_b`.
pub fn uniform_crossover(parent_a: &[u8], parent_b: &[u8], mask: &[u8]) -> Result<Vec<u8>> {
    if parent_a.len() != parent_b.len() || parent_a.len() != mask.len() {
        return Err(Error::arg(format!(
            "length mismatch: parents {} and {}, mask {}",
            parent_a.len(),
            parent_b.len(),
            mask.len()
        )));
    }
    Ok(parent_a
        .iter()
        .zip(parent_b)
        .zip(mask)
        .map(|((&a, &b), &s)| if s == 1 { a } else { b })
        .collect())
}

/// Bitwise XOR of `x` with a mutation mask.
pub fn mutate(x: &[u8], mask: &[u8]) -> Result<Vec<u8>> {
    if x.len() != mask.len() {
        return Err(Error::arg(format!("length mismatch: chromosome {}, mask {}", x.len(), mask.len())));
    }
    Ok(x.iter().zip(mask).map(|(a, b)| a ^ b).collect())
}

/// A length-`n` mask whose bits are independently 1 with probability `p`.
pub fn bernoulli_mask<R: RngCore + ?Sized>(n: usize, p: f64, rng: &mut R) -> Vec<u8> {
    let threshold = (p * 2f64.powi(64)) as u64;
    (0..n).map(|_| u8::from(rng.next_u64() < threshold)).collect()
}

/// `SPREAD[x]` has byte `i` equal to bit `i` of `x`.
const SPREAD: [u64; 256] = {
    let mut table = [0u64; 256];
    let mut x = 0;
    while x < 256 {
        let mut i = 0;
        while i < 8 {
            table[x] |= (((x >> i) & 1) as u64) << (8 * i);
            i += 1;
        }
        x += 1;
    }
    table
};

const ONES: u64 = 0x0101_0101_0101_0101;

/// Crossover and mutation with identity locus keys, 8 loci per step.
#[inline]
fn vary_bytewise(a: &[u8], b: &[u8], cross: &[u64], mutation: &[u64], child: &mut [u8]) {
    let mask_byte = |words: &[u64], chunk: usize| SPREAD[((words[chunk / 8] >> (8 * (chunk % 8))) & 0xFF) as usize];
    for (chunk, ((out, pa), pb)) in child.chunks_mut(8).zip(a.chunks(8)).zip(b.chunks(8)).enumerate() {
        let take_a = mask_byte(cross, chunk);
        let flip = mask_byte(mutation, chunk);
        if out.len() == 8 {
            let wa = u64::from_le_bytes(pa.try_into().unwrap());
            let wb = u64::from_le_bytes(pb.try_into().unwrap());
            let w = ((wa & take_a) | (wb & (take_a ^ ONES))) ^ flip;
            out.copy_from_slice(&w.to_le_bytes());
        } else {
            for (j, o) in out.iter_mut().enumerate() {
                let (t, f) = ((take_a >> (8 * j)) as u8 & 1, (flip >> (8 * j)) as u8 & 1);
                *o = ((pa[j] & t) | (pb[j] & (t ^ 1))) ^ f;
            }
        }
    }
}

#[inline]
fn word_bit(words: &[u64], key: u64) -> u8 {
    ((words[(key >> 6) as usize] >> (key & 63)) & 1) as u8
}

/// A GA bound to one oracle and configuration.
#[derive(Clone, Debug)]
pub struct Uga<'a> {
    spec: &'a OracleSpec,
    cfg: GaConfig,
    locus_keys: Vec<u64>,
    identity_keys: bool,
}

impl<'a> Uga<'a> {
    pub fn new(spec: &'a OracleSpec, cfg: GaConfig) -> Result<Self> {
        cfg.validate()?;
        if spec.n() != cfg.n {
            return Err(Error::arg(format!("oracle has n = {} but GA has n = {}", spec.n(), cfg.n)));
        }
        Ok(Uga { spec, cfg, locus_keys: (0..cfg.n as u64).collect(), identity_keys: true })
    }

    /// Replaces the random-stream label of each position. `keys[j]` is the
    /// label used for position `j + 1`; labels must be distinct.
    pub fn with_locus_keys(mut self, keys: Vec<u64>) -> Result<Self> {
        if keys.len() != self.cfg.n {
            return Err(Error::arg(format!("{} locus keys for n = {}", keys.len(), self.cfg.n)));
        }
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != keys.len() {
            return Err(Error::arg("locus keys must be distinct"));
        }
        self.identity_keys = keys.iter().enumerate().all(|(j, &k)| k == j as u64);
        self.locus_keys = keys;
        Ok(self)
    }

    /// Locus keys that make a run on `spec.permuted(perm)` the exact image of
    /// a run on `spec` under `perm`.
    pub fn permuted_keys(perm: &[usize]) -> Result<Vec<u64>> {
        crate::chromo::validate_permutation(perm, perm.len())?;
        let mut keys = vec![0u64; perm.len()];
        for (j, &p) in perm.iter().enumerate() {
            keys[p - 1] = j as u64;
        }
        Ok(keys)
    }

    pub fn config(&self) -> &GaConfig {
        &self.cfg
    }

    fn generation_key(&self, generation: u32) -> Key {
        Key::root(self.cfg.seed).with(generation as u64)
    }

    /// The generation-0 population: every bit a fair coin.
    pub fn initial_population(&self) -> Population {
        let (m, n) = (self.cfg.m, self.cfg.n);
        let phase = self.generation_key(0).with(PHASE_INIT);
        let mut words = vec![0u64; self.blocks()];
        let mut bits = vec![0u8; m * n];
        for (row, out) in bits.chunks_exact_mut(n).enumerate() {
            let key = phase.with(row as u64);
            for (b, w) in words.iter_mut().enumerate() {
                *w = key.draw(b as u64);
            }
            for (&lk, bit) in self.locus_keys.iter().zip(out.iter_mut()) {
                *bit = word_bit(&words, lk);
            }
        }
        Population::from_flat_unchecked(m, n, bits)
    }

    fn gap_cdf(&self) -> Vec<f64> {
        if self.cfg.p_m == 0.0 {
            return Vec::new();
        }
        let keep = 1.0 - self.cfg.p_m;
        (1..=64).map(|g| 1.0 - keep.powi(g)).collect()
    }

    fn blocks(&self) -> usize {
        let max = self.locus_keys.iter().copied().max().unwrap_or(0);
        (max / 64 + 1) as usize
    }

    /// Mutation mask words of one row. Each key's bit is set independently
    /// with probability `p_m`: gaps between set bits are geometric, drawn by
    /// inversion against `gap_cdf[g] = 1 - (1 - p_m)^(g + 1)`.
    fn mutation_words<R: RngCore>(&self, stream: &mut R, words: &mut [u64], gap_cdf: &[f64]) {
        words.iter_mut().for_each(|w| *w = 0);
        if gap_cdf.is_empty() {
            return;
        }
        for w in words.iter_mut() {
            let mut pos = 0usize;
            loop {
                let u = rng::unit_f64(stream.next_u64());
                pos += gap_cdf.partition_point(|&c| c <= u);
                if pos >= 64 {
                    break;
                }
                *w |= 1 << pos;
                pos += 1;
            }
        }
    }

    /// Produces generation `generation` from its predecessor. Makes exactly
    /// `m` oracle queries.
    pub fn step(&self, pop: &Population, generation: u32, counter: &mut QueryCounter) -> Result<Population> {
        let (m, n) = (self.cfg.m, self.cfg.n);
        if pop.m() != m || pop.n() != n {
            return Err(Error::arg(format!(
                "population is {} x {}, GA expects {m} x {n}",
                pop.m(),
                pop.n()
            )));
        }
        let gkey = self.generation_key(generation);

        let noise = gkey.with(PHASE_NOISE);
        let fitness: Vec<f64> = pop
            .rows()
            .enumerate()
            .map(|(i, row)| self.spec.query_unchecked(row, noise.draw(i as u64), counter) as f64)
            .collect();

        let parents = select_parents(&fitness, 2 * m, &mut gkey.with(PHASE_SELECT).stream())?;

        let vary = gkey.with(PHASE_VARY);
        let gap_cdf = self.gap_cdf();
        let blocks = self.blocks();
        let mut cross_words = vec![0u64; blocks];
        let mut mut_words = vec![0u64; blocks];
        let mut bits = vec![0u8; m * n];
        for (i, child) in bits.chunks_exact_mut(n).enumerate() {
            let (a, b) = (pop.row(parents[i]), pop.row(parents[i + m]));
            // crossover words are leaves 0..blocks of the row key; the
            // mutation stream continues from leaf `blocks`
            let mut stream = vary.with(i as u64).stream();
            for w in cross_words.iter_mut() {
                *w = stream.next_u64();
            }
            self.mutation_words(&mut stream, &mut mut_words, &gap_cdf);
            if self.identity_keys {
                vary_bytewise(a, b, &cross_words, &mut_words, child);
            } else {
                for (j, (&lk, out)) in self.locus_keys.iter().zip(child.iter_mut()).enumerate() {
                    let take_a = word_bit(&cross_words, lk);
                    let flip = word_bit(&mut_words, lk);
                    *out = ((a[j] & take_a) | (b[j] & (take_a ^ 1))) ^ flip;
                }
            }
        }
        Ok(Population::from_flat_unchecked(m, n, bits))
    }

    /// Runs `tau` generations from a fresh population, recording the tracked
    /// loci after every generation (`1..=tau`).
    pub fn run(&self, tracked: &IndexSet) -> Result<RunOutcome> {
        self.run_from(self.initial_population(), tracked)
    }

    pub fn run_from(&self, mut pop: Population, tracked: &IndexSet) -> Result<RunOutcome> {
        tracked.check_within(self.cfg.n)?;
        let mut counter = QueryCounter::new();
        let mut traces = Vec::with_capacity(self.cfg.tau as usize);
        for generation in 1..=self.cfg.tau {
            pop = self.step(&pop, generation, &mut counter)?;
            traces.push(GenerationTrace::capture(generation, &pop, tracked)?);
        }
        Ok(RunOutcome { population: pop, traces, queries: counter })
    }
}

/// One generation; see [`Uga::step`].
pub fn step(
    pop: &Population,
    spec: &OracleSpec,
    cfg: &GaConfig,
    generation: u32,
    counter: &mut QueryCounter,
) -> Result<Population> {
    Uga::new(spec, *cfg)?.step(pop, generation, counter)
}

/// A full run; see [`Uga::run`].
pub fn run(spec: &OracleSpec, cfg: &GaConfig, tracked: &IndexSet) -> Result<RunOutcome> {
    Uga::new(spec, *cfg)?.run(tracked)
}
