//! 1-frequency trajectories of an essential (1) and a nonessential (8)
//! locus under the validated regime.
//!
//! ```text
//! cargo run --release --example fixation_dynamics -- [runs] [seed]
//! ```

use ugalearn::stats::{band_membership, Band};
use ugalearn::{GaConfig, IndexSet, OracleSpec, Preset, Uga};

fn main() -> ugalearn::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs: u64 = args.next().map_or(Ok(4), |a| a.parse()).expect("runs");
    let seed: u64 = args.next().map_or(Ok(1), |a| a.parse()).expect("seed");

    let spec = OracleSpec::paper_psi();
    let tracked = IndexSet::new(vec![1, 8])?;
    let p = Preset::PAPER;
    for run in 0..runs {
        let cfg = GaConfig::new(p.m, spec.n(), p.tau, p.p_m, ugalearn::rng::derive_seed(seed, run))?;
        let out = Uga::new(&spec, cfg)?.run(&tracked)?;
        println!("run {run}");
        for t in out.traces.iter().filter(|t| t.generation % 100 == 0 || t.generation == 1) {
            let cell = |l: usize| {
                let f = t.frequencies[&l];
                let tag = match band_membership(f) {
                    Band::Inside => "in ",
                    Band::Outside => "out",
                };
                format!("{:.3} {tag}", f.value())
            };
            println!("  gen {:>3}: locus 1 {}  locus 8 {}", t.generation, cell(1), cell(8));
        }
    }
    Ok(())
}
