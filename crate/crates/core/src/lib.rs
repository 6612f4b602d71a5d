//! A genetic algorithm with uniform crossover used as an attributewise
//! learner for noisy parities, boosted to an approximately correct learner
//! by recursive 3-way majority voting.
//!
//! Modules:
//! - [`chromo`]: bitstring populations and 1-frequencies
//! - [`oracle`]: the noisy essential-attribute oracle with query counting
//! - [`uga`]: the genetic algorithm itself
//! - [`learner`]: the attributewise learner, majority voting, boosting
//! - [`schema`]: brute-force schema-partition effects
//! - [`stats`]: band tests, p-value bounds, homogeneity tests
//! - [`experiment`]: seeded multi-run experiments, CSV traces, reports

pub mod chromo;
pub mod error;
pub mod experiment;
pub mod learner;
pub mod oracle;
pub mod rng;
pub mod schema;
pub mod stats;
pub mod uga;

pub use chromo::{one_frequency, random_population, Chromosome, IndexSet, LocusFrequency, Population};
pub use error::{Error, Result};
pub use learner::{approx_learn, boost_plan, BoostPlan, GaLearner, Hypothesis, Preset};
pub use oracle::{OracleSpec, QueryCounter};
pub use uga::{GaConfig, Uga};
