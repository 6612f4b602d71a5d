//! Global null test and two-sample symmetry tests on final 1-frequencies.
//!
//! ```text
//! cargo run --release --example hypothesis_tests -- [runs]
//! ```

use ugalearn::rng::derive_seed;
use ugalearn::stats::{global_null_test, null_p_value_bound, symmetry_test, EmpiricalDistribution};
use ugalearn::{one_frequency, GaConfig, IndexSet, OracleSpec, Preset, Uga};

fn finals(spec: &OracleSpec, seed: u64, runs: u64, locus: usize) -> ugalearn::Result<EmpiricalDistribution> {
    let p = Preset::PAPER;
    let mut dist = EmpiricalDistribution::new(p.m as u32);
    for r in 0..runs {
        let cfg = GaConfig::new(p.m, spec.n(), p.tau, p.p_m, derive_seed(seed, r))?;
        let pop = Uga::new(spec, cfg)?.run(&IndexSet::empty())?.population;
        dist.observe(one_frequency(&pop, locus)?)?;
    }
    Ok(dist)
}

fn main() -> ugalearn::Result<()> {
    let runs: u64 = std::env::args().nth(1).map_or(40, |a| a.parse().expect("runs"));
    println!("3000 conforming runs: log10 p <= {:.2}", null_p_value_bound(num::rational::Ratio::new(1, 8), 3000)?);

    let spec = OracleSpec::paper_psi();
    let essential = finals(&spec, 1, runs, 1)?;
    let nonessential = finals(&spec, 2, runs, 8)?;
    let report = global_null_test(&essential, &nonessential, 0.01)?;
    println!(
        "{runs} runs: essential log10 p {:.2}, nonessential log10 p {:.2}, global null rejected: {}",
        report.essential.log10_p_value, report.nonessential.log10_p_value, report.rejected
    );

    let other_essential = finals(&spec, 3, runs, 4)?;
    for (name, a, b) in [("1 vs 4", &essential, &other_essential), ("1 vs 8", &essential, &nonessential)] {
        match symmetry_test(a, b, 0.01) {
            Ok(t) => println!(
                "symmetry {name}: chi2 {:.2} on {} dof, p {:.3e}, rejected {}",
                t.statistic.unwrap(),
                t.degrees_of_freedom.unwrap(),
                t.p_value(),
                t.rejected
            ),
            Err(e) => println!("symmetry {name}: {e}"),
        }
    }
    Ok(())
}
