//! Chromosomes, populations, 1-frequencies and the plain-text population
//! format.

use ugalearn::rng::Stream;
use ugalearn::{one_frequency, random_population, Chromosome, IndexSet, Population};

fn main() -> ugalearn::Result<()> {
    let x: Chromosome = "11111110".parse()?;
    println!("chromosome {x}, {} loci", x.len());

    let mut rng = Stream::new(7);
    let pop = random_population(1500, 8, &mut rng)?;
    for locus in 1..=pop.n() {
        let f = one_frequency(&pop, locus)?;
        println!("locus {locus}: {f} = {:.4}", f.value());
    }

    // Loci are 1-based; a permutation sends locus j to perm[j - 1].
    let small = Population::from_rows(vec!["1100".parse()?, "1010".parse()?])?;
    let moved = small.permute_loci(&[4, 3, 2, 1])?;
    print!("before:\n{}after reversal:\n{}", small.to_text(), moved.to_text());
    assert_eq!(Population::from_text(&moved.to_text())?, moved);

    let set: IndexSet = "1..=3,7".parse()?;
    println!("index set {set} has {} loci", set.len());
    Ok(())
}
