//! Stratified k-fold cross-validation on the six-class synthetic set.
//!
//! cargo run --release --example cross_validate -- [folds] [epochs] [per_class]

use hdrclass::dataset::{synth_generate, SynthSpec};
use hdrclass::model::ModelConfig;
use hdrclass::train::{cross_validate, TrainConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>());
    let folds = args.next().unwrap_or(Ok(5))?;
    let epochs = args.next().unwrap_or(Ok(6))?;
    let per_class = args.next().unwrap_or(Ok(1000))?;

    let data = synth_generate(&SynthSpec::service_like(6, 12)?, per_class, 7)?;
    let model = ModelConfig {
        classes: 6,
        ..ModelConfig::default()
    };
    let train = TrainConfig {
        epochs,
        fold_count: folds,
        ..TrainConfig::default()
    };
    let report = cross_validate(&data, &model, &train, |f| {
        println!(
            "fold {:>2}: accuracy {:.4}  macro F1 {:.4}",
            f.fold, f.report.accuracy, f.report.macro_avg.f1
        );
    })?;
    let s = &report.summary;
    println!("accuracy  {:.4} +- {:.4}", s.accuracy.mean, s.accuracy.std);
    println!("macro F1  {:.4} +- {:.4}", s.macro_f1.mean, s.macro_f1.std);
    println!("micro F1  {:.4} +- {:.4}", s.micro_f1.mean, s.micro_f1.std);
    Ok(())
}
