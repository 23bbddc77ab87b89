use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use anyhow::{bail, Context};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::args::*;
use super::manifest::{self, RunManifest, MANIFEST_SCHEMA_ID, MANIFEST_SCHEMA_VERSION};
use super::{ensure_parent, usage};
use crate::dataset::{stratified_folds, synth_generate, Dataset, SynthSpec};
use crate::metrics::{bench_latency, bench_preprocess, evaluate};
use crate::model::{argmax, EamModel, ModelConfig};
use crate::pcap::{check_input_len, extract_sample, ingest, read_pcap, LabeledPath};
use crate::stats::{compute_histograms, GridFormat};
use crate::train::{cross_validate, sweep, train, TrainConfig};

/// Bookkeeping for the manifest of one command.
struct Run {
    command: &'static str,
    argv: Vec<String>,
    config: serde_json::Value,
    seeds: BTreeMap<String, u64>,
    inputs: Vec<PathBuf>,
    started: SystemTime,
}

impl Run {
    fn new(command: &Command, argv: Vec<String>) -> Self {
        Run {
            command: command.name(),
            argv,
            config: serde_json::to_value(command).unwrap_or(serde_json::Value::Null),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            started: SystemTime::now(),
        }
    }

    fn seed(&mut self, name: &str, value: u64) -> &mut Self {
        self.seeds.insert(name.to_string(), value);
        self
    }

    fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    /// Writes the manifest beside the first output.
    fn finish(self, outputs: &[(&Path, bool)]) -> anyhow::Result<()> {
        let Some((primary, _)) = outputs.first() else {
            return Ok(());
        };
        if let Some((p, _)) = outputs.iter().find(|(p, _)| !p.is_file()) {
            eprintln!("warning: {} is not a regular file; no manifest written", p.display());
            return Ok(());
        }
        let inputs = self
            .inputs
            .iter()
            .map(|p| manifest::digest_input(p).with_context(|| format!("hashing {}", p.display())))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let outputs_d = outputs
            .iter()
            .map(|(p, det)| manifest::digest_output(p, *det).with_context(|| format!("hashing {}", p.display())))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let m = RunManifest {
            schema: MANIFEST_SCHEMA_ID.into(),
            schema_version: MANIFEST_SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: self.command.into(),
            argv: self.argv,
            cwd: std::env::current_dir().unwrap_or_default(),
            config: self.config,
            seeds: self.seeds,
            threads: rayon::current_num_threads(),
            inputs,
            outputs: outputs_d,
            started_at: manifest::timestamp(self.started),
            finished_at: manifest::timestamp(SystemTime::now()),
        };
        let path = manifest::manifest_path(primary);
        m.write(&path).with_context(|| format!("writing {}", path.display()))
    }
}

pub(crate) fn execute(command: Command, argv: Vec<String>) -> anyhow::Result<()> {
    let mut run = Run::new(&command, argv);
    match command {
        Command::Ingest(a) => cmd_ingest(a, run),
        Command::Synth(a) => cmd_synth(a, run),
        Command::Stats(a) => cmd_stats(a, run),
        Command::Train(a) => {
            run.seed("seed", a.optim.seed);
            cmd_train(a, run)
        }
        Command::Sweep(a) => {
            run.seed("seed", a.optim.seed);
            cmd_sweep(a, run)
        }
        Command::Crossval(a) => {
            run.seed("seed", a.optim.seed);
            cmd_crossval(a, run)
        }
        Command::Eval(a) => cmd_eval(a, run),
        Command::Infer(a) => cmd_infer(a, run),
        Command::Bench(a) => cmd_bench(a, run),
        Command::Replay(a) => cmd_replay(a),
    }
}

fn load_dataset(path: &Path) -> anyhow::Result<Dataset> {
    Dataset::read_csv(path).with_context(|| format!("reading dataset {}", path.display()))
}

fn load_model(path: &Path) -> anyhow::Result<EamModel> {
    EamModel::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    ensure_parent(path)?;
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn cmd_ingest(a: IngestArgs, mut run: Run) -> anyhow::Result<()> {
    let mut inputs = Vec::new();
    for spec in &a.pcaps {
        let (path, label) = spec
            .rsplit_once(':')
            .filter(|(p, l)| !p.is_empty() && !l.is_empty())
            .ok_or_else(|| usage(format!("--pcap expects PATH:LABEL, got {spec:?}")))?;
        inputs.push(LabeledPath::new(path, label));
    }
    check_input_len(a.input_len).map_err(|e| usage(e.to_string()))?;
    let (mut dataset, summary) = ingest(&inputs, a.input_len)?;
    for f in &summary.files {
        match &f.error {
            Some(err) => eprintln!("{}: {err}", f.path.display()),
            None => eprintln!(
                "{}: {} records, {} IPv4 samples, {} skipped{}",
                f.path.display(),
                f.records,
                f.ipv4,
                f.skipped,
                if f.length_anomalies > 0 {
                    format!(", {} with captured > original length", f.length_anomalies)
                } else {
                    String::new()
                }
            ),
        }
        if f.error.is_none() {
            run.input(&f.path);
        }
    }
    if a.dedup {
        let dropped = dataset.dedup();
        eprintln!("dropped {dropped} duplicate samples");
    }
    ensure_parent(&a.out)?;
    dataset.write_csv(&a.out)?;
    eprintln!("wrote {} samples in {} classes to {}", dataset.len(), dataset.num_classes(), a.out.display());
    let mut outputs: Vec<(&Path, bool)> = vec![(&a.out, true)];
    if let Some(p) = &a.summary {
        write_json(p, &summary)?;
        outputs.push((p, true));
    }
    run.finish(&outputs)
}

fn cmd_synth(a: SynthArgs, mut run: Run) -> anyhow::Result<()> {
    run.seed("seed", a.seed);
    let spec = if a.separable {
        if a.input_len != 12 {
            return Err(usage("--separable generates 12-byte samples; drop --input-len"));
        }
        SynthSpec::separable_two_class()
    } else {
        SynthSpec::service_like(a.classes, a.input_len).map_err(|e| usage(e.to_string()))?
    };
    let dataset = synth_generate(&spec, a.per_class, a.seed)?;
    ensure_parent(&a.out)?;
    dataset.write_csv(&a.out)?;
    eprintln!("wrote {} samples in {} classes to {}", dataset.len(), dataset.num_classes(), a.out.display());
    run.finish(&[(&a.out, true)])
}

fn cmd_stats(a: StatsArgs, mut run: Run) -> anyhow::Result<()> {
    run.input(&a.dataset);
    let dataset = load_dataset(&a.dataset)?;
    let grid = compute_histograms(&dataset)?;
    ensure_parent(&a.out)?;
    grid.export(&a.out, a.format)?;
    let kind = if a.format == GridFormat::Csv { "CSV" } else { "JSON" };
    eprintln!(
        "{} classes x {} bytes x 20 bins written as {kind} to {}",
        grid.class_names.len(),
        grid.input_len,
        a.out.display()
    );
    run.finish(&[(&a.out, true)])
}

fn model_config(dataset: &Dataset, s: usize, d: usize, arch: &ArchFlags, seed: u64) -> anyhow::Result<ModelConfig> {
    let cfg = ModelConfig {
        input_len: dataset.input_len(),
        embed_dim: d,
        memory_rows: s,
        kernels: arch.kernels,
        kernel_width: arch.q,
        classes: dataset.num_classes(),
        dropout_p: arch.dropout,
        dropout_after_embedding: matches!(arch.dropout_at, DropoutPlacement::Both | DropoutPlacement::Embedding),
        dropout_after_attention: matches!(arch.dropout_at, DropoutPlacement::Both | DropoutPlacement::Attention),
        seed,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn train_config(o: &OptimFlags, folds: usize) -> anyhow::Result<TrainConfig> {
    let cfg = TrainConfig {
        lr: o.lr,
        beta1: o.beta1,
        beta2: o.beta2,
        eps: o.adam_eps,
        batch_size: o.batch,
        epochs: o.epochs,
        seed: o.seed,
        fold_count: folds,
        early_stop: o.patience,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn cmd_train(a: TrainArgs, mut run: Run) -> anyhow::Result<()> {
    run.input(&a.dataset);
    if !(0.0..0.5).contains(&a.holdout) {
        return Err(usage(format!("--holdout must be in [0, 0.5), got {}", a.holdout)));
    }
    let dataset = load_dataset(&a.dataset)?;
    let mcfg = model_config(&dataset, a.s, a.d, &a.arch, a.optim.seed)?;
    let tcfg = train_config(&a.optim, 10)?;
    let (train_idx, held_out) = if a.holdout > 0.0 {
        let k = ((1.0 / a.holdout).round() as usize).max(2);
        let plan = stratified_folds(&dataset, k, a.optim.seed)?;
        (plan.train_indices(0), Some(plan.test_indices(0)))
    } else {
        ((0..dataset.len()).collect(), None)
    };

    let mut log = match &a.log {
        Some(p) => {
            ensure_parent(p)?;
            let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
            writeln!(w, "epoch,mean_loss,train_accuracy,held_out_loss,held_out_accuracy,seconds")?;
            w.flush()?;
            Some(w)
        }
        None => None,
    };
    let mut log_err: Option<io::Error> = None;
    let mut model = EamModel::new(mcfg, dataset.class_names().to_vec())?;
    eprintln!(
        "training {} parameters on {} samples ({} held out)",
        model.params.parameter_count(),
        train_idx.len(),
        held_out.as_ref().map_or(0, Vec::len)
    );
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let report = train(&mut model, &dataset, &train_idx, held_out.as_deref(), &tcfg, |e| {
        let held = e
            .held_out_accuracy
            .map_or(String::new(), |acc| format!("  held-out acc {acc:.4}"));
        eprintln!(
            "epoch {:>4}  loss {:.5}  train acc {:.4}{held}  {:.2}s",
            e.epoch, e.mean_loss, e.train_accuracy, e.seconds
        );
        if let (Some(w), None) = (log.as_mut(), log_err.as_ref()) {
            let line = format!(
                "{},{},{},{},{},{}",
                e.epoch,
                e.mean_loss,
                e.train_accuracy,
                opt(e.held_out_loss),
                opt(e.held_out_accuracy),
                e.seconds
            );
            if let Err(err) = writeln!(w, "{line}").and_then(|_| w.flush()) {
                log_err = Some(err);
            }
        }
    })?;
    if let Some(err) = log_err {
        return Err(err).context("writing training log");
    }
    if let Some(best) = report.best_epoch {
        eprintln!("stopped early; kept parameters from epoch {best}");
    }
    ensure_parent(&a.out)?;
    model.save(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!("saved model to {}", a.out.display());
    let mut outputs: Vec<(&Path, bool)> = vec![(&a.out, true)];
    if let Some(p) = &a.log {
        outputs.push((p, false));
    }
    run.finish(&outputs)
}

fn cmd_crossval(a: CrossvalArgs, mut run: Run) -> anyhow::Result<()> {
    run.input(&a.dataset);
    let dataset = load_dataset(&a.dataset)?;
    let mcfg = model_config(&dataset, a.s, a.d, &a.arch, a.optim.seed)?;
    let tcfg = train_config(&a.optim, a.folds)?;
    eprintln!("{}-fold cross-validation on {} samples", a.folds, dataset.len());
    let report = cross_validate(&dataset, &mcfg, &tcfg, |f| {
        eprintln!(
            "fold {:>2}: accuracy {:.4}  macro F1 {:.4}  ({} test samples, {:.1}s)",
            f.fold, f.report.accuracy, f.report.macro_avg.f1, f.test_size, f.seconds
        );
    })?;
    let s = &report.summary;
    println!(
        "accuracy {:.4} ± {:.4}  macro P {:.4}  R {:.4}  F1 {:.4}",
        s.accuracy.mean, s.accuracy.std, s.macro_precision.mean, s.macro_recall.mean, s.macro_f1.mean
    );
    write_json(&a.report, &report)?;
    run.finish(&[(&a.report, false)])
}

fn cmd_sweep(a: SweepArgs, mut run: Run) -> anyhow::Result<()> {
    run.input(&a.dataset);
    if a.s.is_empty() || a.d.is_empty() {
        return Err(usage("--s and --d need at least one value each"));
    }
    let dataset = load_dataset(&a.dataset)?;
    let base = model_config(&dataset, a.s[0], a.d[0], &a.arch, a.optim.seed)?;
    let tcfg = train_config(&a.optim, a.folds)?;
    let points = sweep(&dataset, &base, &tcfg, &a.s, &a.d, |p| {
        eprintln!(
            "S {:>4}  D {:>4}: accuracy {:.4}  macro F1 {:.4}  ({:.1}s)",
            p.memory_rows, p.embed_dim, p.accuracy, p.macro_f1, p.seconds
        );
    })?;
    println!("{:>6} {:>6} {:>9} {:>9}", "S", "D", "accuracy", "macro_f1");
    for p in &points {
        println!("{:>6} {:>6} {:>9.4} {:>9.4}", p.memory_rows, p.embed_dim, p.accuracy, p.macro_f1);
    }
    write_json(&a.report, &points)?;
    run.finish(&[(&a.report, false)])
}

fn cmd_eval(a: EvalArgs, mut run: Run) -> anyhow::Result<()> {
    run.input(&a.model).input(&a.dataset);
    let model = load_model(&a.model)?;
    let dataset = load_dataset(&a.dataset)?;
    if dataset.input_len() != model.config.input_len {
        bail!(
            "model expects {}-byte samples, dataset has {}",
            model.config.input_len,
            dataset.input_len()
        );
    }
    let idx: Vec<usize> = (0..dataset.len()).collect();
    let report = evaluate(&model, &dataset, &idx)?;
    println!(
        "accuracy {:.4}  macro P {:.4} R {:.4} F1 {:.4}  micro F1 {:.4}  ({} samples)",
        report.accuracy,
        report.macro_avg.precision,
        report.macro_avg.recall,
        report.macro_avg.f1,
        report.micro_avg.f1,
        report.samples
    );
    for c in &report.per_class {
        println!(
            "  {:<16} P {:.4} R {:.4} F1 {:.4} support {}{}",
            c.name,
            c.precision,
            c.recall,
            c.f1,
            c.support,
            if c.degenerate { " (degenerate)" } else { "" }
        );
    }
    write_json(&a.report, &report)?;
    let mut outputs: Vec<(&Path, bool)> = vec![(&a.report, true)];
    if let Some(p) = &a.confusion {
        ensure_parent(p)?;
        fs::write(p, report.confusion.to_csv(dataset.class_names()))?;
        outputs.push((p, true));
    }
    run.finish(&outputs)
}

fn read_label_map(path: &Path, names: &mut [String]) -> anyhow::Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .or_else(|| line.split_once(','))
            .with_context(|| format!("{} line {}: expected INDEX=NAME", path.display(), i + 1))?;
        let idx: usize = k
            .trim()
            .parse()
            .with_context(|| format!("{} line {}: bad class index", path.display(), i + 1))?;
        let slot = names
            .get_mut(idx)
            .with_context(|| format!("{} line {}: class {idx} not in model", path.display(), i + 1))?;
        *slot = v.trim().to_string();
    }
    Ok(())
}

fn cmd_infer(a: InferArgs, mut run: Run) -> anyhow::Result<()> {
    run.input(&a.model);
    let model = load_model(&a.model)?;
    let mut names = model.class_names.clone();
    if let Some(p) = &a.label_map {
        run.input(p);
        read_label_map(p, &mut names)?;
    }
    let mut out = String::new();
    let prob_cols: String = names.iter().map(|n| format!(",p_{n}")).collect();

    if let Some(csv) = &a.csv {
        run.input(csv);
        let dataset = load_dataset(csv)?;
        if dataset.input_len() != model.config.input_len {
            bail!(
                "model expects {}-byte samples, {} has {}",
                model.config.input_len,
                csv.display(),
                dataset.input_len()
            );
        }
        writeln!(out, "row,true_label,predicted{prob_cols}")?;
        for (start, chunk) in dataset.samples().chunks(256).enumerate() {
            let batch: Vec<&[u8]> = chunk.iter().map(|s| s.bytes.as_slice()).collect();
            for (j, (probs, s)) in model.predict_proba_batch(&batch)?.iter().zip(chunk).enumerate() {
                let truth = dataset.class_names().get(s.label).cloned().unwrap_or_default();
                write!(out, "{},{truth},{}", start * 256 + j, names[argmax(probs)])?;
                probs.iter().try_for_each(|p| write!(out, ",{p}"))?;
                out.push('\n');
            }
        }
    } else {
        check_input_len(model.config.input_len)?;
        writeln!(out, "file,record,predicted{prob_cols}")?;
        for path in &a.pcap {
            run.input(path);
            let (link, records) = read_pcap(path).with_context(|| format!("reading {}", path.display()))?;
            for (i, r) in records.iter().enumerate() {
                let Some(sample) = extract_sample(r, link, 0, model.config.input_len)? else {
                    continue;
                };
                let probs = model.predict_proba(&sample.bytes)?;
                write!(out, "{},{i},{}", path.display(), names[argmax(&probs)])?;
                probs.iter().try_for_each(|p| write!(out, ",{p}"))?;
                out.push('\n');
            }
        }
    }
    match &a.out {
        Some(p) => {
            ensure_parent(p)?;
            fs::write(p, out).with_context(|| format!("writing {}", p.display()))?;
            run.finish(&[(p, true)])
        }
        None => {
            io::stdout().write_all(out.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_bench(a: BenchArgs, mut run: Run) -> anyhow::Result<()> {
    run.input(&a.model).seed("seed", a.seed);
    if a.iters == 0 {
        return Err(usage("--iters must be at least 1"));
    }
    let model = load_model(&a.model)?;
    let n = model.config.input_len;
    let inputs: Vec<Vec<u8>> = match &a.dataset {
        Some(p) => {
            run.input(p);
            let d = load_dataset(p)?;
            if d.input_len() != n {
                bail!("model expects {n}-byte samples, dataset has {}", d.input_len());
            }
            d.samples().iter().take(1024).map(|s| s.bytes.clone()).collect()
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            (0..1024)
                .map(|_| {
                    let mut b: Vec<u8> = (0..n).map(|_| rng.gen()).collect();
                    b[0] = 69;
                    b
                })
                .collect()
        }
    };
    if inputs.is_empty() {
        bail!("no inputs to time");
    }
    let mut stats = bench_latency(&model, &inputs, a.iters, a.warmup)?;
    if let Some(p) = &a.pcap {
        run.input(p);
        let (link, records) = read_pcap(p).with_context(|| format!("reading {}", p.display()))?;
        stats.preprocess = Some(bench_preprocess(&records, link, n, a.iters)?);
    }
    let f = stats.forward;
    println!(
        "forward (batch 1, N={n}): mean {:.4} ms  p50 {:.4} ms  p99 {:.4} ms over {} runs after {} warmup",
        f.mean_us / 1e3,
        f.p50_us / 1e3,
        f.p99_us / 1e3,
        f.iterations,
        stats.warmup
    );
    if let Some(p) = stats.preprocess {
        println!(
            "preprocess (pcap record to sample): mean {:.4} ms  p50 {:.4} ms  p99 {:.4} ms",
            p.mean_us / 1e3,
            p.p50_us / 1e3,
            p.p99_us / 1e3
        );
    }
    match &a.report {
        Some(p) => {
            write_json(p, &stats)?;
            run.finish(&[(p, false)])
        }
        None => Ok(()),
    }
}

fn cmd_replay(a: ReplayArgs) -> anyhow::Result<()> {
    let m = RunManifest::read(&a.manifest).with_context(|| format!("reading manifest {}", a.manifest.display()))?;
    if m.schema != MANIFEST_SCHEMA_ID || m.schema_version != MANIFEST_SCHEMA_VERSION {
        bail!("{} is not a version {MANIFEST_SCHEMA_VERSION} run manifest", a.manifest.display());
    }
    if m.argv.first().map(String::as_str) == Some("replay") {
        bail!("refusing to replay a replay");
    }
    for input in &m.inputs {
        let path = m.cwd.join(&input.path);
        let (sha, _) = manifest::sha256_file(&path).with_context(|| format!("hashing input {}", path.display()))?;
        if sha != input.sha256 {
            bail!("input {} changed since the recorded run", path.display());
        }
    }
    std::env::set_current_dir(&m.cwd).with_context(|| format!("entering {}", m.cwd.display()))?;
    eprintln!("replaying: hdrclass {}", m.argv.join(" "));
    let mut argv = vec!["hdrclass".to_string()];
    argv.extend(m.argv.iter().cloned());
    super::run(argv)?;
    if a.no_verify {
        return Ok(());
    }
    let mut mismatched = Vec::new();
    for out in m.outputs.iter().filter(|o| o.deterministic) {
        let (sha, _) = manifest::sha256_file(&out.path)?;
        if sha == out.sha256 {
            eprintln!("identical: {}", out.path.display());
        } else {
            mismatched.push(out.path.display().to_string());
        }
    }
    if !mismatched.is_empty() {
        bail!("replay produced different output: {}", mismatched.join(", "));
    }
    Ok(())
}
