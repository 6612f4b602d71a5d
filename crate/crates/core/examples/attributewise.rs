//! One run of the GA as an attributewise learner: fixated loci are
//! guessed essential, drifting loci nonessential.

use ugalearn::learner::{attributewise_learn, hypothesis_from_population};
use ugalearn::{GaConfig, IndexSet, OracleSpec, Preset, QueryCounter, Uga};

fn main() -> ugalearn::Result<()> {
    let spec = OracleSpec::paper_psi();
    let mut counter = QueryCounter::new();
    let h = attributewise_learn(&spec, Preset::PAPER, 3, &mut counter)?;
    println!("hypothesis {h} vs target {} ({} queries)", spec.target_concept(), counter.count());

    // The same thing spelled out.
    let p = Preset::PAPER;
    let cfg = GaConfig::new(p.m, spec.n(), p.tau, p.p_m, 3)?;
    let out = Uga::new(&spec, cfg)?.run(&IndexSet::empty())?;
    assert_eq!(hypothesis_from_population(&out.population), h);
    assert_eq!(out.queries, counter);
    Ok(())
}
