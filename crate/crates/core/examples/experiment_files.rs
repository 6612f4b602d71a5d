//! The experiment pipeline through its file formats: a TOML config, a trace
//! CSV, and the JSON summaries written by the command-line tool.

use ugalearn::experiment::{self, ExperimentConfig, FitnessSource, TraceTable};
use ugalearn::IndexSet;

fn main() -> ugalearn::Result<()> {
    let dir = std::env::temp_dir().join("ugalearn-example");
    std::fs::create_dir_all(&dir)?;

    let cfg = ExperimentConfig { pop_size: 300, generations: 200, ..ExperimentConfig::paper(30, 11) };
    let config_path = dir.join("experiment.toml");
    std::fs::write(&config_path, cfg.to_toml())?;
    println!("wrote {}", config_path.display());

    let cfg = ExperimentConfig::from_toml(&std::fs::read_to_string(&config_path)?)?;
    let trace_path = dir.join("trace.csv");
    let summary = experiment::simulate(&cfg, std::fs::File::create(&trace_path)?)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);

    let table = TraceTable::load(&trace_path)?;
    let stats = experiment::trace_stats(&table, 0.01, &"1".parse()?, &"8".parse()?, None)?;
    println!(
        "generation {}: global null rejected = {} (essential log10 p {:.2}, nonessential log10 p {:.2})",
        stats.generation,
        stats.global_null.rejected,
        stats.global_null.essential.log10_p_value,
        stats.global_null.nonessential.log10_p_value
    );
    for point in stats.series.iter().filter(|p| p.generation % 50 == 0) {
        println!(
            "  gen {:>3} locus {}: below {:>2} inside {:>2} above {:>2}",
            point.generation, point.locus, point.below, point.inside, point.above
        );
    }

    let schema = experiment::schema_effect(7, &FitnessSource::Parity(None), &IndexSet::first(7), None)?;
    println!("schema effect of [7] under parity: {}", schema.effect);
    Ok(())
}
