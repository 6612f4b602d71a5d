//! How a recursive majority amplifies per-bit confidence: exact failure
//! probabilities, the closed-form bound, and a Monte Carlo check with a
//! learner that is wrong on each bit with probability exactly 1/8.

use num::rational::{BigRational, Ratio};
use num::{BigInt, ToPrimitive};
use ugalearn::learner::{majority_failure_bound, majority_failure_probability, NoisyConceptLearner};
use ugalearn::{approx_learn, OracleSpec};

fn main() -> ugalearn::Result<()> {
    let p = BigRational::new(BigInt::from(1), BigInt::from(8));
    println!("ell  exact q          bound            2^-(2^ell)");
    for ell in 1..=4 {
        let q = majority_failure_probability(ell, &p).to_f64().unwrap();
        let b = majority_failure_bound(ell, &p).to_f64().unwrap();
        println!("{ell:>3}  {q:<15.6e}  {b:<15.6e}  {:.6e}", 0.5f64.powi(1 << ell));
    }

    let spec = OracleSpec::paper_psi();
    let mock = NoisyConceptLearner { error: Ratio::new(1, 8) };
    let trials = 2000;
    let wrong = (0..trials)
        .filter(|&t| !approx_learn(&spec, Ratio::new(1, 8), t, &mock).unwrap().hypothesis.matches(&spec))
        .count();
    println!("mock boosting: {wrong}/{trials} wrong hypotheses");
    Ok(())
}
