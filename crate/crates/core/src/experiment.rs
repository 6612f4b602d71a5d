//! Seeded multi-run experiments and their on-disk formats.
//!
//! Run `r` of an experiment with master seed `s` uses GA seed
//! [`derive_seed`]`(s, r)`; run ids in traces are zero-based. Traces are CSV
//! with header `run_id,generation,locus,ones_count,m`, one row per run,
//! generation (`1..=tau`) and tracked locus, ordered by run, then
//! generation, then locus. Output is identical for any worker count.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num::rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chromo::{IndexSet, LocusFrequency};
use crate::error::{Error, Result};
use crate::learner::{approx_learn, GaLearner, Preset};
use crate::oracle::{OracleConfig, OracleSpec};
use crate::rng::derive_seed;
use crate::schema::{partition_effect, FitnessTable};
use crate::stats::{band_membership, global_null_test, Band, EmpiricalDistribution, GlobalNullReport};
use crate::uga::{GaConfig, Uga};

/// Runs simulated per parallel batch; rows are flushed after each batch.
const BATCH: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub oracle: OracleConfig,
    pub pop_size: usize,
    pub generations: u32,
    pub mutation_rate: f64,
    pub runs: u64,
    pub seed: u64,
    pub track_loci: IndexSet,
}

impl ExperimentConfig {
    /// The validated regime: `n = 8`, `K = [7]`, parity, `eta = 1/5`, 1500 x 800,
    /// `p_m = 0.004`, tracking the first and last locus.
    pub fn paper(runs: u64, seed: u64) -> Self {
        ExperimentConfig {
            oracle: OracleSpec::paper_psi().to_config(),
            pop_size: Preset::PAPER.m,
            generations: Preset::PAPER.tau,
            mutation_rate: Preset::PAPER.p_m,
            runs,
            seed,
            track_loci: IndexSet::new(vec![1, 8]).expect("valid"),
        }
    }

    pub fn validate(&self) -> Result<(OracleSpec, GaConfig)> {
        let spec = self.oracle.build()?;
        let ga = GaConfig::new(self.pop_size, spec.n(), self.generations, self.mutation_rate, self.seed)?;
        if self.runs == 0 {
            return Err(Error::arg("runs must be at least 1"));
        }
        if self.track_loci.is_empty() {
            return Err(Error::arg("track at least one locus"));
        }
        self.track_loci.check_within(spec.n())?;
        Ok((spec, ga))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }
}

/// One CSV row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub run_id: u64,
    pub generation: u32,
    pub locus: usize,
    pub ones_count: u32,
    pub m: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandCounts {
    pub inside: u64,
    pub outside: u64,
}

impl BandCounts {
    fn add(&mut self, freq: LocusFrequency) {
        match band_membership(freq) {
            Band::Inside => self.inside += 1,
            Band::Outside => self.outside += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub trace_rows: u64,
    pub total_queries: u64,
    pub final_generation: u32,
    /// Band membership at the final generation, keyed by locus.
    pub final_band_counts: BTreeMap<usize, BandCounts>,
    pub validated_regime: bool,
}

/// Runs every seeded GA run of `cfg`, writing trace rows to `out` in run
/// order. Parallelism comes from the current rayon pool.
pub fn simulate<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<SimulationSummary> {
    let (spec, ga) = cfg.validate()?;
    let mut writer = csv::Writer::from_writer(out);
    let mut summary = SimulationSummary {
        config: cfg.clone(),
        master_seed: cfg.seed,
        trace_rows: 0,
        total_queries: 0,
        final_generation: cfg.generations,
        final_band_counts: cfg.track_loci.iter().map(|l| (l, BandCounts::default())).collect(),
        validated_regime: Preset::PAPER.validated_for(&spec)
            && cfg.pop_size == Preset::PAPER.m
            && cfg.generations == Preset::PAPER.tau
            && cfg.mutation_rate == Preset::PAPER.p_m,
    };
    let run_ids: Vec<u64> = (0..cfg.runs).collect();
    for batch in run_ids.chunks(BATCH) {
        let outcomes = batch
            .par_iter()
            .map(|&r| {
                let ga = ga.with_seed(derive_seed(cfg.seed, r));
                Uga::new(&spec, ga)?.run(&cfg.track_loci).map(|o| (r, o))
            })
            .collect::<Result<Vec<_>>>()?;
        for (run_id, outcome) in outcomes {
            summary.total_queries += outcome.queries.count();
            for trace in &outcome.traces {
                for (&locus, freq) in &trace.frequencies {
                    writer.serialize(TraceRow {
                        run_id,
                        generation: trace.generation,
                        locus,
                        ones_count: freq.ones,
                        m: freq.m,
                    })?;
                    summary.trace_rows += 1;
                }
            }
            if let Some(last) = outcome.traces.last() {
                for (locus, freq) in &last.frequencies {
                    summary.final_band_counts.get_mut(locus).expect("tracked").add(*freq);
                }
            }
        }
    }
    writer.flush()?;
    Ok(summary)
}

/// Parsed trace CSV.
#[derive(Clone, Debug, Default)]
pub struct TraceTable {
    rows: Vec<TraceRow>,
}

impl TraceTable {
    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let rows = reader.deserialize().collect::<std::result::Result<Vec<TraceRow>, _>>()?;
        Ok(TraceTable { rows })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        TraceTable::read(std::fs::File::open(path)?)
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn last_generation(&self) -> Option<u32> {
        self.rows.iter().map(|r| r.generation).max()
    }

    /// Distribution of a locus's ones-count across runs at one generation.
    pub fn distribution(&self, locus: usize, generation: u32) -> Result<EmpiricalDistribution> {
        let mut picked = self.rows.iter().filter(|r| r.locus == locus && r.generation == generation);
        let first = picked
            .next()
            .ok_or_else(|| Error::arg(format!("no trace rows for locus {locus} at generation {generation}")))?;
        let mut dist = EmpiricalDistribution::new(first.m);
        dist.observe(LocusFrequency::new(first.ones_count, first.m)?)?;
        for r in picked {
            dist.observe(LocusFrequency::new(r.ones_count, r.m)?)?;
        }
        Ok(dist)
    }

    /// Per generation and locus: how many runs sit below, inside and above
    /// the band, plus the mean 1-frequency. Plot-ready.
    pub fn band_series(&self) -> Vec<BandSeriesPoint> {
        let mut acc: BTreeMap<(u32, usize), BandSeriesPoint> = BTreeMap::new();
        for r in &self.rows {
            let p = acc.entry((r.generation, r.locus)).or_insert(BandSeriesPoint {
                generation: r.generation,
                locus: r.locus,
                ..Default::default()
            });
            let freq = LocusFrequency { ones: r.ones_count, m: r.m };
            p.runs += 1;
            p.mean_frequency += freq.value();
            match band_membership(freq) {
                Band::Inside => p.inside += 1,
                Band::Outside if 2 * r.ones_count < r.m => p.below += 1,
                Band::Outside => p.above += 1,
            }
        }
        acc.into_values()
            .map(|mut p| {
                p.mean_frequency /= p.runs as f64;
                p
            })
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BandSeriesPoint {
    pub generation: u32,
    pub locus: usize,
    pub runs: u64,
    pub below: u64,
    pub inside: u64,
    pub above: u64,
    pub mean_frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub alpha: f64,
    pub generation: u32,
    pub essential_locus: usize,
    pub nonessential_locus: usize,
    pub global_null: GlobalNullReport,
    /// Band counts at the tested generation for every listed locus.
    pub band_counts: BTreeMap<usize, BandCounts>,
    pub series: Vec<BandSeriesPoint>,
}

/// Global null test on a trace: the first listed essential and nonessential
/// loci are tested at `generation` (default: the last one in the trace).
pub fn trace_stats(
    table: &TraceTable,
    alpha: f64,
    essential: &IndexSet,
    nonessential: &IndexSet,
    generation: Option<u32>,
) -> Result<StatsReport> {
    let generation = match generation {
        Some(g) => g,
        None => table.last_generation().ok_or_else(|| Error::arg("trace is empty"))?,
    };
    let essential_locus = essential.iter().next().ok_or_else(|| Error::arg("no essential locus given"))?;
    let nonessential_locus =
        nonessential.iter().next().ok_or_else(|| Error::arg("no nonessential locus given"))?;
    let global_null = global_null_test(
        &table.distribution(essential_locus, generation)?,
        &table.distribution(nonessential_locus, generation)?,
        alpha,
    )?;
    let mut band_counts = BTreeMap::new();
    for locus in essential.iter().chain(nonessential.iter()) {
        let dist = table.distribution(locus, generation)?;
        band_counts.insert(locus, BandCounts { inside: dist.inside_band(), outside: dist.outside_band() });
    }
    Ok(StatsReport {
        alpha,
        generation,
        essential_locus,
        nonessential_locus,
        global_null,
        band_counts,
        series: table.band_series(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnReport {
    pub hypothesis: String,
    pub target_concept: String,
    #[serde(rename = "match")]
    pub matched: bool,
    pub total_queries: u64,
    pub ell: u32,
    pub runs: u64,
    pub epsilon: String,
    pub preset: String,
    pub validated_regime: bool,
    pub oracle: OracleConfig,
    pub seed: u64,
    pub wall_time_secs: f64,
}

/// Boosted learning with the GA learner at `preset`.
pub fn learn(spec: &OracleSpec, epsilon: Ratio<u64>, seed: u64, preset: Preset) -> Result<LearnReport> {
    let start = Instant::now();
    let outcome = approx_learn(spec, epsilon, seed, &GaLearner { preset })?;
    Ok(LearnReport {
        hypothesis: outcome.hypothesis.to_string(),
        target_concept: spec.target_concept().to_string(),
        matched: outcome.hypothesis.matches(spec),
        total_queries: outcome.queries.count(),
        ell: outcome.plan.ell,
        runs: outcome.plan.runs,
        epsilon: epsilon.to_string(),
        preset: preset.name.to_string(),
        validated_regime: preset.validated_for(spec),
        oracle: spec.to_config(),
        seed,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemaReport {
    pub n: usize,
    pub function: String,
    pub index_set: IndexSet,
    pub eta: Option<String>,
    pub effect: f64,
    pub schema_means: BTreeMap<String, f64>,
}

/// Where the fitness table comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum FitnessSource {
    /// Parity of the given loci (all loci when `None`).
    Parity(Option<IndexSet>),
    /// Whitespace-separated table file; see [`FitnessTable::from_text`].
    TableFile(PathBuf),
}

pub fn schema_effect(
    n: usize,
    source: &FitnessSource,
    index_set: &IndexSet,
    eta: Option<Ratio<u64>>,
) -> Result<SchemaReport> {
    let (mut table, function) = match source {
        FitnessSource::Parity(loci) => {
            let loci = loci.clone().unwrap_or_else(|| IndexSet::first(n));
            (FitnessTable::parity(n, &loci)?, format!("parity({loci})"))
        }
        FitnessSource::TableFile(path) => {
            (FitnessTable::from_text(n, &std::fs::read_to_string(path)?)?, format!("table:{}", path.display()))
        }
    };
    if let Some(eta) = eta {
        table = table.with_noise(eta);
    }
    let effect = partition_effect(&table, index_set)?;
    Ok(SchemaReport {
        n,
        function,
        index_set: index_set.clone(),
        eta: eta.map(|e| e.to_string()),
        effect: effect.effect,
        schema_means: effect.schema_means,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(runs: u64, generations: u32) -> ExperimentConfig {
        ExperimentConfig {
            pop_size: 40,
            generations,
            runs,
            ..ExperimentConfig::paper(runs, 17)
        }
    }

    #[test]
    fn one_run_one_generation() {
        let mut buf = Vec::new();
        let s = simulate(&tiny(1, 1), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "run_id,generation,locus,ones_count,m");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,1,1,") && lines[1].ends_with(",40"));
        assert!(lines[2].starts_with("0,1,8,"));
        assert_eq!(s.trace_rows, 2);
        assert_eq!(s.total_queries, 40);
        assert!(!s.validated_regime);
    }

    #[test]
    fn simulation_is_byte_identical_across_reruns_and_pools() {
        let cfg = tiny(70, 6);
        let mut a = Vec::new();
        simulate(&cfg, &mut a).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let mut b = Vec::new();
        pool.install(|| simulate(&cfg, &mut b)).unwrap();
        assert_eq!(a, b);
        let mut c = Vec::new();
        simulate(&ExperimentConfig { seed: 18, ..cfg }, &mut c).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn trace_round_trip_and_stats() {
        let cfg = tiny(30, 4);
        let mut buf = Vec::new();
        let summary = simulate(&cfg, &mut buf).unwrap();
        let table = TraceTable::read(&buf[..]).unwrap();
        assert_eq!(table.rows().len() as u64, summary.trace_rows);
        assert_eq!(table.last_generation(), Some(4));
        let dist = table.distribution(1, 4).unwrap();
        assert_eq!(dist.total_runs(), 30);
        let report = trace_stats(&table, 0.01, &"1".parse().unwrap(), &"8".parse().unwrap(), None).unwrap();
        assert_eq!(report.generation, 4);
        assert_eq!(report.band_counts[&1].inside + report.band_counts[&1].outside, 30);
        assert_eq!(report.band_counts[&1], summary.final_band_counts[&1]);
        assert_eq!(report.series.len(), 4 * 2);
        assert!(table.distribution(3, 4).is_err());
    }

    #[test]
    fn config_round_trip() {
        let cfg = ExperimentConfig::paper(3000, 5);
        let text = cfg.to_toml();
        assert!(text.contains("pop_size = 1500"));
        assert!(text.contains("eta_den = 5"));
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
        let (spec, ga) = cfg.validate().unwrap();
        assert_eq!(spec, OracleSpec::paper_psi());
        assert_eq!(ga.m, 1500);
    }

    #[test]
    fn invalid_experiments() {
        assert!(ExperimentConfig { runs: 0, ..tiny(1, 1) }.validate().is_err());
        assert!(ExperimentConfig { generations: 0, ..tiny(1, 1) }.validate().is_err());
        let mut cfg = tiny(1, 1);
        cfg.track_loci = "9".parse().unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn schema_report_for_parity() {
        let r = schema_effect(7, &FitnessSource::Parity(None), &IndexSet::first(7), None).unwrap();
        assert_eq!(r.effect, 0.25);
        assert_eq!(r.schema_means.len(), 128);
        let r = schema_effect(7, &FitnessSource::Parity(None), &IndexSet::first(7), Some(Ratio::new(1, 5))).unwrap();
        assert!((r.effect - 0.09).abs() < 1e-12);
        assert!(matches!(
            schema_effect(30, &FitnessSource::Parity(None), &IndexSet::first(3), None),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn learn_report_fast_preset() {
        let spec = OracleSpec::parity(4, "1,2".parse().unwrap(), Ratio::new(1, 10)).unwrap();
        let r = learn(&spec, Ratio::new(1, 8), 1, Preset { m: 40, tau: 20, ..Preset::FAST }).unwrap();
        assert_eq!(r.runs, 3u64.pow(r.ell));
        assert_eq!(r.total_queries, r.runs * 40 * 20);
        assert_eq!(r.target_concept, "1100");
        assert!(!r.validated_regime);
    }
}
