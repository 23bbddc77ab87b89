//! Generate a six-class synthetic set and print, per class, the most
//! populated histogram bin of every header byte.
//!
//! cargo run --example synth_and_stats -- [per_class]

use hdrclass::dataset::{synth_generate, SynthSpec};
use hdrclass::stats::compute_histograms;

fn main() -> anyhow::Result<()> {
    let per_class = std::env::args().nth(1).map_or(Ok(500), |s| s.parse())?;
    let data = synth_generate(&SynthSpec::service_like(6, 12)?, per_class, 7)?;
    let grid = compute_histograms(&data)?;

    println!("{} samples, classes {:?}", data.len(), data.class_names());
    println!("modal bin (0-19) per byte position:");
    for (c, name) in grid.class_names.iter().enumerate() {
        let modes: Vec<String> = grid.counts[c]
            .iter()
            .map(|bins| {
                let (bin, _) = bins.iter().enumerate().max_by_key(|(i, n)| (**n, usize::MAX - i)).unwrap();
                format!("{bin:>2}")
            })
            .collect();
        println!("{name:>14}  {}", modes.join(" "));
    }
    println!("first rows of the CSV export:");
    for line in grid.to_csv().lines().take(5) {
        println!("  {line}");
    }
    Ok(())
}
