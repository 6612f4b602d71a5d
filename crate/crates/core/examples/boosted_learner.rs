//! Boosting the attributewise learner with a recursive 3-way majority.
//!
//! Uses the fast preset unless `paper` is given as the first argument
//! (81 full runs, about 97 million queries).

use num::rational::Ratio;
use ugalearn::{approx_learn, boost_plan, GaLearner, OracleSpec, Preset};

fn main() -> ugalearn::Result<()> {
    let preset = match std::env::args().nth(1).as_deref() {
        Some(name) => Preset::by_name(name)?,
        None => Preset::FAST,
    };
    let spec = OracleSpec::paper_psi();
    let eps = Ratio::new(1, 8);
    let plan = boost_plan(spec.n() as u64, eps)?;
    println!("depth {} -> {} runs of the {} preset", plan.ell, plan.runs, preset.name);
    if !preset.validated_for(&spec) {
        println!("note: the {} preset has no measured error rate here", preset.name);
    }

    let start = std::time::Instant::now();
    let out = approx_learn(&spec, eps, 2024, &GaLearner { preset })?;
    let wrong_votes = out.votes.iter().filter(|h| !h.matches(&spec)).count();
    println!(
        "h = {} (target {}), {} of {} sub-runs wrong, {} queries, {:.1?}",
        out.hypothesis,
        spec.target_concept(),
        wrong_votes,
        out.votes.len(),
        out.queries.count(),
        start.elapsed()
    );
    Ok(())
}
