//! Empirical 1-frequency distributions and the hypothesis tests run on them.

use std::collections::BTreeMap;

use num::rational::Ratio;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::chromo::LocusFrequency;
use crate::error::{Error, Result};

/// Position of a 1-frequency relative to the open band `(0.05, 0.95)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    /// Strictly inside: the locus is drifting.
    Inside,
    /// At or beyond either edge: the locus is fixated.
    Outside,
}

/// Exact band test: inside iff `20 * ones > m` and `20 * ones < 19 * m`.
pub fn band_membership(freq: LocusFrequency) -> Band {
    let (ones, m) = (freq.ones as u64 * 20, freq.m as u64);
    if ones > m && ones < 19 * m {
        Band::Inside
    } else {
        Band::Outside
    }
}

/// Counts of observed ones-counts over independent runs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    m: u32,
    counts: BTreeMap<u32, u64>,
    total_runs: u64,
}

impl EmpiricalDistribution {
    pub fn new(m: u32) -> Self {
        EmpiricalDistribution { m, counts: BTreeMap::new(), total_runs: 0 }
    }

    pub fn from_frequencies<I: IntoIterator<Item = LocusFrequency>>(m: u32, freqs: I) -> Result<Self> {
        let mut dist = EmpiricalDistribution::new(m);
        for f in freqs {
            dist.observe(f)?;
        }
        Ok(dist)
    }

    pub fn observe(&mut self, freq: LocusFrequency) -> Result<()> {
        if freq.m != self.m || freq.ones > self.m {
            return Err(Error::arg(format!("{freq} does not belong to D_{}", self.m)));
        }
        *self.counts.entry(freq.ones).or_default() += 1;
        self.total_runs += 1;
        Ok(())
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn total_runs(&self) -> u64 {
        self.total_runs
    }

    pub fn count(&self, ones: u32) -> u64 {
        self.counts.get(&ones).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<u32, u64> {
        &self.counts
    }

    /// Runs whose frequency fell strictly inside the band.
    pub fn inside_band(&self) -> u64 {
        self.counts
            .iter()
            .filter(|(&ones, _)| band_membership(LocusFrequency { ones, m: self.m }) == Band::Inside)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn outside_band(&self) -> u64 {
        self.total_runs - self.inside_band()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub null_name: String,
    /// Runs inside the band, for the band-based nulls.
    pub observed_in_band: Option<u64>,
    pub trials: u64,
    /// log10 of the p-value (or of an upper bound on it).
    pub log10_p_value: f64,
    pub adjusted_alpha: f64,
    pub rejected: bool,
    /// Chi-square statistic and degrees of freedom, for homogeneity tests.
    pub statistic: Option<f64>,
    pub degrees_of_freedom: Option<usize>,
}

impl TestReport {
    pub fn p_value(&self) -> f64 {
        10f64.powf(self.log10_p_value)
    }
}

/// log10 of `(1 - eps)^trials`, the bound on the chance that `trials`
/// i.i.d. observations all land in a set of mass below `1 - eps`.
pub fn null_p_value_bound(threshold_eps: Ratio<u64>, trials: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::arg("need at least one trial"));
    }
    if threshold_eps.numer() == &0 || threshold_eps >= Ratio::from_integer(1) {
        return Err(Error::arg(format!("threshold must lie in (0, 1), got {threshold_eps}")));
    }
    let keep = Ratio::from_integer(1) - threshold_eps;
    let log10_keep = (*keep.numer() as f64).log10() - (*keep.denom() as f64).log10();
    Ok(trials as f64 * log10_keep)
}

/// Both halves of the global null test and the combined decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalNullReport {
    pub essential: TestReport,
    pub nonessential: TestReport,
    pub alpha: f64,
    /// The disjunction of the two nulls is rejected iff both are rejected
    /// at the Bonferroni level `alpha / 2`.
    pub rejected: bool,
}

/// Probability mass that each null assumes on the "wrong" side of the band.
pub const NULL_MASS: Ratio<u64> = Ratio::new_raw(1, 8);

/// Tests `H0_essential` (mass inside the band >= 1/8) and
/// `H0_nonessential` (mass outside the band >= 1/8) at `alpha / 2` each.
///
/// A null gets the bound `(7/8)^N` only when all `N` runs conform (every
/// essential run outside the band, every nonessential run inside). A
/// single nonconforming run makes the reported bound 1.
pub fn global_null_test(
    essential: &EmpiricalDistribution,
    nonessential: &EmpiricalDistribution,
    alpha: f64,
) -> Result<GlobalNullReport> {
    if essential.total_runs() == 0 || nonessential.total_runs() == 0 {
        return Err(Error::arg("global null test needs non-empty distributions"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::arg(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let adjusted = alpha / 2.0;
    let report = |name: &str, dist: &EmpiricalDistribution, nonconforming: u64| -> Result<TestReport> {
        let log10_p = if nonconforming == 0 {
            null_p_value_bound(NULL_MASS, dist.total_runs())?
        } else {
            0.0
        };
        Ok(TestReport {
            null_name: name.to_string(),
            observed_in_band: Some(dist.inside_band()),
            trials: dist.total_runs(),
            log10_p_value: log10_p,
            adjusted_alpha: adjusted,
            rejected: log10_p < adjusted.log10(),
            statistic: None,
            degrees_of_freedom: None,
        })
    };
    let essential = report("H0_essential", essential, essential.inside_band())?;
    let nonessential = report("H0_nonessential", nonessential, nonessential.outside_band())?;
    let rejected = essential.rejected && nonessential.rejected;
    Ok(GlobalNullReport { essential, nonessential, alpha, rejected })
}

/// Smallest expected count per cell in the homogeneity test.
pub const MIN_EXPECTED: f64 = 5.0;

/// Two-sample chi-square homogeneity test on ones-counts.
///
/// Adjacent support values are merged, scanning upward from 0, until each
/// bin's expected count is at least 5 in both samples. A short tail is
/// folded into the last bin.
pub fn symmetry_test(
    a: &EmpiricalDistribution,
    b: &EmpiricalDistribution,
    alpha: f64,
) -> Result<TestReport> {
    if a.m() != b.m() {
        return Err(Error::arg(format!("distributions over D_{} and D_{}", a.m(), b.m())));
    }
    let (na, nb) = (a.total_runs() as f64, b.total_runs() as f64);
    let total = na + nb;
    let min_share = na.min(nb) / total;

    let mut bins: Vec<(u64, u64)> = Vec::new();
    let mut open = (0u64, 0u64);
    let support: std::collections::BTreeSet<u32> = a.counts().keys().chain(b.counts().keys()).copied().collect();
    for ones in support {
        open.0 += a.count(ones);
        open.1 += b.count(ones);
        if (open.0 + open.1) as f64 * min_share >= MIN_EXPECTED {
            bins.push(std::mem::take(&mut open));
        }
    }
    if open.0 + open.1 > 0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += open.0;
                last.1 += open.1;
            }
            None => bins.push(open),
        }
    }
    if bins.len() < 2 {
        return Err(Error::Capability(format!(
            "{} and {} runs give fewer than two bins with expected count >= {MIN_EXPECTED}",
            a.total_runs(),
            b.total_runs()
        )));
    }

    let statistic: f64 = bins
        .iter()
        .map(|&(oa, ob)| {
            let pooled = (oa + ob) as f64;
            let (ea, eb) = (pooled * na / total, pooled * nb / total);
            (oa as f64 - ea).powi(2) / ea + (ob as f64 - eb).powi(2) / eb
        })
        .sum();
    let dof = bins.len() - 1;
    let p = ChiSquared::new(dof as f64).expect("dof >= 1").sf(statistic);
    let log10_p = p.max(f64::MIN_POSITIVE).log10();
    Ok(TestReport {
        null_name: "homogeneity".to_string(),
        observed_in_band: None,
        trials: a.total_runs() + b.total_runs(),
        log10_p_value: log10_p,
        adjusted_alpha: alpha,
        rejected: log10_p < alpha.log10(),
        statistic: Some(statistic),
        degrees_of_freedom: Some(dof),
    })
}
