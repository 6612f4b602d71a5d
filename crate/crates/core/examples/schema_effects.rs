//! Exhaustive schema-partition effects: parity hides every coarse
//! partition, and label noise shrinks the one that is visible.

use num::rational::Ratio;
use ugalearn::schema::{count_partitions, partition_effect, FitnessTable};
use ugalearn::IndexSet;

fn main() -> ugalearn::Result<()> {
    let n = 7;
    let parity = FitnessTable::parity(n, &IndexSet::first(n))?;
    for k in 1..=n {
        let e = partition_effect(&parity, &IndexSet::first(k))?;
        println!("order {k}: effect {}", e.effect);
    }
    let noisy = parity.with_noise(Ratio::new(1, 5));
    println!("eta = 1/5, order 7: effect {:.12}", partition_effect(&noisy, &IndexSet::first(n))?.effect);

    // A fitness that rewards locus 1 and, less, locus 2.
    let table = FitnessTable::from_fn(4, |x| 1.0 + 0.5 * x[0] as f64 + 0.25 * x[1] as f64)?;
    for set in ["1", "2", "3", "1,2", "1,2,3"] {
        let e = partition_effect(&table, &set.parse()?)?;
        println!("I = {{{set}}}: effect {:.5}, schema means {:?}", e.effect, e.schema_means);
    }

    println!("order-7 partitions of 8 loci: {}", count_partitions(8, 7));
    println!("order-7 partitions of 1000 loci: {}", count_partitions(1000, 7));
    Ok(())
}
