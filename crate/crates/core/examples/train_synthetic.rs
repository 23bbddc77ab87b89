//! Train the default model on the separable two-class synthetic set and
//! report held-out accuracy per epoch.
//!
//! cargo run --release --example train_synthetic -- [epochs]

use hdrclass::dataset::{stratified_folds, synth_generate, SynthSpec};
use hdrclass::metrics::evaluate;
use hdrclass::model::{EamModel, ModelConfig};
use hdrclass::train::{train, TrainConfig};

fn main() -> anyhow::Result<()> {
    let epochs = std::env::args().nth(1).map_or(Ok(5), |s| s.parse())?;
    let data = synth_generate(&SynthSpec::separable_two_class(), 1000, 7)?;
    let plan = stratified_folds(&data, 5, 7)?;
    let (train_idx, test_idx) = (plan.train_indices(0), plan.test_indices(0));

    let config = ModelConfig {
        classes: data.num_classes(),
        ..ModelConfig::default()
    };
    let mut model = EamModel::new(config, data.class_names().to_vec())?;
    println!("{} parameters", model.params.parameter_count());

    let train_config = TrainConfig {
        epochs,
        ..TrainConfig::default()
    };
    let report = train(&mut model, &data, &train_idx, Some(&test_idx), &train_config, |e| {
        println!(
            "epoch {:>3}  loss {:.4}  train acc {:.4}  held-out acc {:.4}  {:.2}s",
            e.epoch,
            e.mean_loss,
            e.train_accuracy,
            e.held_out_accuracy.unwrap_or(f64::NAN),
            e.seconds
        );
    })?;
    println!("first batch loss {:.4} (ln 2 = {:.4})", report.first_batch_loss, 2f64.ln());

    let eval = evaluate(&model, &data, &test_idx)?;
    println!("held-out accuracy {:.4}, macro F1 {:.4}", eval.accuracy, eval.macro_avg.f1);
    Ok(())
}
