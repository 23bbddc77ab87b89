//! Train briefly, save the model file, load it back and classify the six
//! published header samples. The model only saw synthetic data, so the
//! predicted names say nothing about the real services.
//!
//! cargo run --release --example model_io

use hdrclass::dataset::{synth_generate, SynthSpec};
use hdrclass::model::{EamModel, ModelConfig};
use hdrclass::train::{train, TrainConfig};

const HEADERS: [[u8; 12]; 6] = [
    [69, 0, 4, 143, 108, 209, 64, 0, 128, 6, 3, 94],
    [69, 0, 5, 220, 90, 160, 64, 0, 32, 6, 101, 46],
    [69, 0, 0, 72, 75, 84, 64, 0, 34, 6, 46, 146],
    [69, 0, 0, 40, 100, 20, 64, 0, 128, 6, 25, 118],
    [69, 0, 0, 52, 129, 17, 64, 0, 64, 6, 145, 40],
    [69, 0, 0, 211, 172, 169, 64, 0, 76, 6, 251, 65],
];

fn main() -> anyhow::Result<()> {
    let data = synth_generate(&SynthSpec::service_like(6, 12)?, 1000, 7)?;
    let config = ModelConfig {
        classes: 6,
        ..ModelConfig::default()
    };
    let mut model = EamModel::new(config, data.class_names().to_vec())?;
    let all: Vec<usize> = (0..data.len()).collect();
    let cfg = TrainConfig {
        epochs: 6,
        ..TrainConfig::default()
    };
    train(&mut model, &data, &all, None, &cfg, |e| println!("epoch {} loss {:.4}", e.epoch, e.mean_loss))?;

    let path = std::env::temp_dir().join(format!("hdrclass-model-{}.json", std::process::id()));
    model.save(&path)?;
    let loaded = EamModel::load(&path)?;
    println!("saved {} bytes to {}", std::fs::metadata(&path)?.len(), path.display());
    std::fs::remove_file(&path)?;

    for h in &HEADERS {
        let p = loaded.predict_proba(h)?;
        let c = loaded.predict(h)?;
        println!("{h:?} -> {} ({:.3})", loaded.class_names[c], p[c]);
    }
    Ok(())
}
