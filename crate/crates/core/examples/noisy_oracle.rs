//! A noisy parity oracle: labels, noisy queries and query accounting.

use num::rational::Ratio;
use ugalearn::rng::Stream;
use ugalearn::{OracleSpec, QueryCounter};

fn main() -> ugalearn::Result<()> {
    // 7 essential loci out of 8, labels flipped with probability 1/5.
    let spec = OracleSpec::parity(8, "1..7".parse()?, Ratio::new(1, 5))?;
    println!("target concept {}", spec.target_concept());
    println!("oracle config:\n{}", spec.to_toml());

    let x = [1, 0, 1, 1, 0, 0, 1, 0];
    let clean = spec.label(&x);
    let mut rng = Stream::new(42);
    let mut counter = QueryCounter::new();
    let trials = 100_000;
    let mut flipped = 0;
    for _ in 0..trials {
        flipped += u32::from(spec.query(&x, &mut rng, &mut counter)? != clean);
    }
    println!(
        "noiseless label {clean}; {flipped}/{trials} queries flipped ({:.4}, eta = {}); counter = {}",
        flipped as f64 / trials as f64,
        spec.eta(),
        counter.count()
    );
    Ok(())
}
