//! Batch-size-1 inference latency for a few input lengths.
//!
//! cargo run --release --example latency_bench -- [iterations]

use hdrclass::metrics::bench_latency;
use hdrclass::model::{EamModel, ModelConfig};
use rand::{Rng, SeedableRng};

fn main() -> anyhow::Result<()> {
    let iterations: usize = std::env::args().nth(1).map_or(Ok(500), |s| s.parse())?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    println!("{:>5} {:>10} {:>10} {:>10}", "N", "mean ms", "p50 ms", "p99 ms");
    for n in [12, 50, 200, 784] {
        let config = ModelConfig {
            input_len: n,
            ..ModelConfig::default()
        };
        let names = (0..config.classes).map(|c| format!("class{c}")).collect();
        let model = EamModel::new(config, names)?;
        let inputs: Vec<Vec<u8>> = (0..64).map(|_| (0..n).map(|_| rng.gen()).collect()).collect();
        let t = bench_latency(&model, &inputs, iterations, iterations / 10)?.forward;
        println!("{n:>5} {:>10.4} {:>10.4} {:>10.4}", t.mean_us / 1e3, t.p50_us / 1e3, t.p99_us / 1e3);
    }
    Ok(())
}
