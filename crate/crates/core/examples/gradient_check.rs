//! Compare tape gradients of the full model loss with central differences.
//!
//! cargo run --example gradient_check

use hdrclass::grad::Tape;
use hdrclass::model::{forward, ModelConfig, ModelParams};
use rand::rngs::mock::StepRng;

fn loss(params: &ModelParams, cfg: &ModelConfig, batch: &[&[u8]], labels: &[usize]) -> anyhow::Result<f64> {
    let mut tape = Tape::new();
    let pv = params.register(&mut tape);
    let probs = forward(&mut tape, &pv, cfg, batch, false, &mut StepRng::new(0, 0))?;
    let l = tape.cross_entropy(probs, labels)?;
    Ok(tape.value(l).item())
}

fn main() -> anyhow::Result<()> {
    let cfg = ModelConfig {
        input_len: 4,
        embed_dim: 3,
        memory_rows: 5,
        kernels: 2,
        kernel_width: 3,
        classes: 2,
        dropout_p: 0.0,
        seed: 2024,
        ..ModelConfig::default()
    };
    let params = ModelParams::init(&cfg)?;
    let batch: [&[u8]; 2] = [&[69, 0, 4, 143], &[69, 0, 5, 220]];
    let labels = [0, 1];

    let mut tape = Tape::new();
    let pv = params.register(&mut tape);
    let probs = forward(&mut tape, &pv, &cfg, &batch, false, &mut StepRng::new(0, 0))?;
    let l = tape.cross_entropy(probs, &labels)?;
    let mut grads = tape.backward(l)?;
    let analytic = pv.collect_grads(&mut grads, &params);

    let h = 1e-5;
    for (ti, ((name, _), g)) in cfg.shapes().iter().zip(&analytic).enumerate() {
        let mut worst = 0.0f64;
        let mut checked = 0;
        for e in 0..g.len() {
            let mut plus = params.clone();
            plus.tensors_mut()[ti].data_mut()[e] += h;
            let mut minus = params.clone();
            minus.tensors_mut()[ti].data_mut()[e] -= h;
            let numeric = (loss(&plus, &cfg, &batch, &labels)? - loss(&minus, &cfg, &batch, &labels)?) / (2.0 * h);
            let a = g.data()[e];
            if a.abs().max(numeric.abs()) > 1e-6 {
                checked += 1;
                worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()));
            }
        }
        println!("{name:>20}: {checked:>3} of {:>4} entries checked, worst relative error {worst:.2e}", g.len());
    }
    Ok(())
}
