use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::args::{
    AblateArgs, DatasetArg, DetectorKind, EvaluateArgs, ImportArgs, ReportArgs, SimulateArgs, SplitArgs,
    SweepArgs, TrainArgs,
};
use crate::augment::{AugmentPolicy, SnrReference};
use crate::error::{Error, Result};
use crate::eval::{
    ablation, ablation_anchors, config_hash, emit_plot_data, emit_report, read_report, snr_sweep, EvalReport,
    PlotAxis, ReportFormat, Scorer, SweepConfig,
};
use crate::eval::report::{
    PUBLISHED_1DD_FLOP_BOUND, PUBLISHED_COMPARISON_SNR_DB, PUBLISHED_RESNET_2DA_AUC, PUBLISHED_VMP_AUC,
};
use crate::ingest::{
    import_recordings, make_split, read_dataset, write_dataset, CirStreamSource, DatasetManifest, ReuseFactors,
    SplitConfig,
};
use crate::neural::{
    build_network, input_shape, load_checkpoint, save_checkpoint, AdamConfig, ArchitectureVariant, CheckpointMeta,
    Network, Precision, TrainConfig, Trainer,
};
use crate::pipeline::{validation_set, AugmentedSource, EnergyScorer, FftScorer, NetworkScorer, PreparedData};
use crate::radar::{ActivityLabel, Provenance};
use crate::simulator::{synth_dataset_with, RadarConfig, SceneFile, SynthSpec};

/// Environment variable naming the default dataset.
pub const DATA_DIR_ENV: &str = "UWBOCC_DATA_DIR";

const MANIFEST_FILE: &str = "manifest.json";
const CHECKPOINT_FILE: &str = "checkpoint.uwbk";
const STATE_FILE: &str = "state.uwbk";

fn manifest_in(path: &Path) -> PathBuf {
    if path.extension().is_some_and(|e| e == "json") && !path.is_dir() {
        path.to_path_buf()
    } else {
        path.join(MANIFEST_FILE)
    }
}

fn dataset_manifest(arg: &DatasetArg) -> Result<PathBuf> {
    let path = match &arg.dataset {
        Some(p) => p.clone(),
        None => std::env::var_os(DATA_DIR_ENV)
            .map(PathBuf::from)
            .ok_or_else(|| Error::Config(format!("no dataset given; pass --dataset or set {DATA_DIR_ENV}")))?,
    };
    Ok(manifest_in(&path))
}

fn split_config(a: &SplitArgs) -> SplitConfig {
    SplitConfig {
        train_car: a.train_car.clone(),
        eval_car: a.eval_car.clone(),
        test_per_class: a.test_per_class,
        train_car_validation: [
            (ActivityLabel::Breathing, a.val_breathing),
            (ActivityLabel::Talking, a.val_talking),
            (ActivityLabel::Moving, a.val_moving),
        ]
        .into_iter()
        .collect(),
        empty_validation: a.empty_val,
        empty_test: a.empty_test,
    }
}

fn load_prepared(dataset: &DatasetArg, split: &SplitArgs) -> Result<(DatasetManifest, PreparedData)> {
    let path = dataset_manifest(dataset)?;
    let (manifest, records) = read_dataset(&path)?;
    let assignment = make_split(&manifest, &split_config(split))?;
    let data = PreparedData::new(&records, assignment)?;
    Ok((manifest, data))
}

fn require_seed(seed: Option<u64>, command: &str) -> Result<u64> {
    seed.ok_or_else(|| Error::Config(format!("{command} needs --seed")))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&a.eval_fraction) {
        return Err(Error::Config(format!("eval fraction {} outside [0, 1]", a.eval_fraction)));
    }
    let (mut radar, template) = match &a.scene {
        Some(p) => {
            let f = SceneFile::read(p)?;
            (f.radar, Some(f.scene))
        }
        None => (RadarConfig::default(), None),
    };
    if let Some(n) = a.n_fast {
        radar.n_fast = n;
    }
    if let Some(m) = a.m_slow {
        radar.m_slow = m;
    }
    radar.validate()?;
    if let Some(s) = a.noise_sigma {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::Config(format!("noise sigma {s} must be finite and non-negative")));
        }
    }
    let mut spec = SynthSpec::new(a.breathing, a.talking, a.moving, a.empty);
    spec.noise_sigma = a.noise_sigma;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut records = synth_dataset_with(&spec, &radar, template.as_ref(), &mut rng)?;

    for label in ActivityLabel::OCCUPIED {
        let n = spec.count(label);
        let n_eval = (n as f64 * a.eval_fraction).round() as usize;
        for r in records.iter_mut().filter(|r| r.label == label) {
            let i = r.provenance.segment_index;
            r.provenance.car = if i < n - n_eval { a.train_car.clone() } else { a.eval_car.clone() };
        }
    }

    create_dir(&a.out)?;
    let manifest_path = a.out.join(MANIFEST_FILE);
    let manifest = write_dataset(&records, &radar, &manifest_path)?;
    println!("wrote {} samples to {}", manifest.records.len(), manifest_path.display());
    for label in ActivityLabel::ALL {
        let cars: BTreeMap<&str, usize> = manifest
            .records
            .iter()
            .filter(|r| r.label == label)
            .fold(BTreeMap::new(), |mut m, r| {
                *m.entry(r.provenance.car.as_str()).or_default() += 1;
                m
            });
        let by_car: Vec<String> = cars.iter().map(|(c, n)| format!("car {c}: {n}")).collect();
        println!("  {:<9} {:>6}  ({})", label.as_str(), spec.count(label), by_car.join(", "));
    }
    Ok(())
}

pub fn import(a: &ImportArgs) -> Result<()> {
    let label: ActivityLabel = a.label.parse()?;
    let manifest_path = dataset_manifest(&a.dataset)?;
    if let Some(dir) = manifest_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    let n_fast = crate::ingest::cir_file::read(&a.input)?.rows();
    let radar = if manifest_path.exists() {
        let existing = DatasetManifest::read(&manifest_path)?;
        if existing.radar.t_st != a.t_st || existing.radar.t_ft != a.t_ft {
            return Err(Error::Config(format!(
                "dataset uses t_ft {} s and t_st {} s, import has {} s and {} s",
                existing.radar.t_ft, existing.radar.t_st, a.t_ft, a.t_st
            )));
        }
        existing.radar
    } else {
        RadarConfig {
            n_fast,
            t_ft: a.t_ft,
            t_st: a.t_st,
            ..RadarConfig::default()
        }
    };
    let source = CirStreamSource {
        path: a.input.clone(),
        label,
        provenance: Provenance {
            car: a.car.clone(),
            seat: a.seat.clone(),
            participant: a.participant.clone(),
            recording: a.recording.clone().unwrap_or_default(),
            segment_index: 0,
        },
        t_ft: a.t_ft,
        t_st: a.t_st,
    };
    let (manifest, added) = import_recordings(&source, a.window_s, &radar, &manifest_path)?;
    println!(
        "imported {added} {label} samples from {}; {} now holds {} samples",
        a.input.display(),
        manifest_path.display(),
        manifest.records.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct TrainMetrics {
    best_val_auc: f64,
    best_epoch: usize,
    epochs_run: usize,
    stopped_early: bool,
    reference_energy: f64,
}

fn history_csv(t: &Trainer) -> String {
    let mut s = String::from("epoch,train_loss,val_loss,val_auc\n");
    for r in &t.progress.history {
        let _ = writeln!(s, "{},{},{},{}", r.epoch, r.train_loss, r.val_loss, r.val_auc);
    }
    s
}

fn save_run(out: &Path, t: &Trainer, training: &serde_json::Value, reference: SnrReference) -> Result<()> {
    let metrics = TrainMetrics {
        best_val_auc: t.progress.best_auc,
        best_epoch: t.progress.best_epoch,
        epochs_run: t.progress.epochs_done,
        stopped_early: t.progress.stopped_early,
        reference_energy: reference.e_s,
    };
    let meta = CheckpointMeta {
        training: training.clone(),
        metrics: serde_json::to_value(&metrics).expect("metrics serialize"),
        progress: Some(t.progress.clone()),
    };
    save_checkpoint(&out.join(CHECKPOINT_FILE), &t.best, None, &meta, Precision::F32)?;
    save_checkpoint(&out.join(STATE_FILE), &t.current, Some(&t.adam), &meta, Precision::F64)?;
    write_file(&out.join("history.csv"), &history_csv(t))
}

fn check_state(header_net: &Network, variant: &ArchitectureVariant, shape: [usize; 3], seed: u64, path: &Path) -> Result<()> {
    if header_net.variant.name != variant.name || header_net.input_shape != shape || header_net.seed != seed {
        return Err(Error::Config(format!(
            "{} holds {} with input {:?} and seed {}; this run asks for {} with input {:?} and seed {}",
            path.display(),
            header_net.variant.name,
            header_net.input_shape,
            header_net.seed,
            variant.name,
            shape,
            seed
        )));
    }
    Ok(())
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let seed = require_seed(a.seed, "train")?;
    let variant = ArchitectureVariant::named(&a.variant)?;
    let config = TrainConfig {
        adam: AdamConfig {
            learning_rate: a.learning_rate,
            beta1: a.beta1,
            beta2: a.beta2,
            ..AdamConfig::default()
        },
        batch_size: a.batch_size,
        max_epochs: a.epochs,
        patience: a.patience,
    };
    config.validate()?;
    let policy = AugmentPolicy::training_range(a.snr_min, a.snr_max).with_exact_scaling(a.exact_scaling);
    policy.validate()?;
    if a.reuse_occupied == 0 && a.reuse_empty == 0 {
        return Err(Error::Config("reuse factors are both zero".into()));
    }

    let (_, data) = load_prepared(&a.dataset, &a.split)?;
    let reference = data.reference()?;
    let (n, m) = data.shape()?;
    let shape = input_shape(n, m, variant.dimensionality);
    let training = serde_json::to_value(a).expect("arguments serialize");

    create_dir(&a.out)?;
    write_file(
        &a.out.join("config.json"),
        &serde_json::to_string_pretty(&training).expect("arguments serialize"),
    )?;

    let mut trainer = if a.resume {
        let state_path = a.out.join(STATE_FILE);
        let best_path = a.out.join(CHECKPOINT_FILE);
        let state = load_checkpoint(&state_path)?;
        let best = load_checkpoint(&best_path)?;
        check_state(&state.network, &variant, shape, seed, &state_path)?;
        check_state(&best.network, &variant, shape, seed, &best_path)?;
        let adam = state
            .optimizer
            .ok_or_else(|| Error::Config(format!("{} has no optimizer state", state_path.display())))?;
        let progress = state
            .header
            .progress
            .ok_or_else(|| Error::Config(format!("{} has no training progress", state_path.display())))?;
        println!("resuming {} after epoch {}", variant.name, progress.epochs_done);
        Trainer::resume(state.network, adam, best.network, progress, config)?
    } else {
        Trainer::new(build_network(&variant, shape, seed)?, config)?
    };

    let reuse = ReuseFactors {
        occupied: a.reuse_occupied,
        empty: a.reuse_empty,
    };
    let val = validation_set(&data, reference, &policy, variant.dimensionality, seed)?;
    let mut source = AugmentedSource::new(&data, reference, policy, reuse, variant.dimensionality, a.batch_size, seed)?;
    println!(
        "training {} ({} parameters, {} FLOPs per inference) on {} validation samples, E_s {:e}",
        variant.name,
        trainer.current.param_count(),
        trainer.current.flop_count(shape),
        val.len(),
        reference.e_s
    );
    while !trainer.finished() {
        let r = trainer.step_epoch(&mut source, &val)?;
        println!(
            "epoch {:>3}/{}  train_loss {:.5}  val_loss {:.5}  val_auc {:.4}",
            r.epoch, a.epochs, r.train_loss, r.val_loss, r.val_auc
        );
        save_run(&a.out, &trainer, &training, reference)?;
    }
    save_run(&a.out, &trainer, &training, reference)?;
    let p = &trainer.progress;
    println!(
        "best validation AUC {:.4} at epoch {}{}; wrote {}",
        p.best_auc,
        p.best_epoch,
        if p.stopped_early { " (stopped early)" } else { "" },
        a.out.join(CHECKPOINT_FILE).display()
    );
    Ok(())
}

fn sweep_config(s: &SweepArgs, grid: Vec<f64>, command: &str) -> Result<SweepConfig> {
    let seed = require_seed(s.seed, command)?;
    let mut activities = Vec::new();
    for name in &s.activities {
        let label: ActivityLabel = name.parse()?;
        if !label.is_occupied() {
            return Err(Error::Config(format!("{label} is not an occupied class")));
        }
        if !activities.contains(&label) {
            activities.push(label);
        }
    }
    if activities.is_empty() {
        return Err(Error::Config("no activities selected".into()));
    }
    if s.energy_window == 0 {
        return Err(Error::Config("energy window must be positive".into()));
    }
    Ok(SweepConfig {
        grid,
        activities,
        seed,
        noise_negatives: s.noise_negatives,
        exact_scaling: s.exact_scaling,
    })
}

fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0 && start.is_finite() && stop.is_finite()) {
        return Err(Error::Config(format!("bad SNR grid {start}..{stop} step {step}")));
    }
    let count = ((start - stop).abs() / step + 1e-9).floor() as usize + 1;
    let dir = if stop < start { -1.0 } else { 1.0 };
    Ok((0..count).map(|k| start + dir * k as f64 * step).collect())
}

fn unique(kinds: &[DetectorKind]) -> Vec<DetectorKind> {
    let mut out = Vec::new();
    for k in kinds {
        if !out.contains(k) {
            out.push(*k);
        }
    }
    out
}

fn baseline(kind: DetectorKind, s: &SweepArgs, n: usize, m: usize) -> Option<Box<dyn Scorer>> {
    match kind {
        DetectorKind::Resnet => None,
        DetectorKind::Energy => Some(Box::new(EnergyScorer {
            window: s.energy_window,
            n_fast: n,
            m_slow: m,
        })),
        DetectorKind::Fft => Some(Box::new(FftScorer { n_fast: n, m_slow: m })),
    }
}

fn load_scorer(path: &Path, n: usize, m: usize) -> Result<NetworkScorer> {
    let ckpt = load_checkpoint(path)?;
    let expected = input_shape(n, m, ckpt.network.variant.dimensionality);
    if ckpt.network.input_shape != expected {
        return Err(Error::ShapeMismatch(format!(
            "{} expects input {:?}, dataset gives {:?}",
            path.display(),
            ckpt.network.input_shape,
            expected
        )));
    }
    Ok(NetworkScorer::new(ckpt.network))
}

fn write_reports(report: &EvalReport, out: &Path, stem: &str, axis: PlotAxis) -> Result<()> {
    create_dir(out)?;
    emit_report(report, ReportFormat::Csv, &out.join(format!("{stem}.csv")))?;
    emit_report(report, ReportFormat::Json, &out.join(format!("{stem}.json")))?;
    emit_plot_data(report, axis, &out.join(format!("{stem}_plot.json")))?;
    println!(
        "wrote {} rows to {}",
        report.rows.len(),
        out.join(format!("{stem}.{{csv,json}}")).display()
    );
    Ok(())
}

#[derive(Serialize)]
struct HashedConfig<'a, T> {
    command: &'a str,
    args: &'a T,
    checkpoints: Vec<String>,
}

pub fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let grid = snr_grid(a.snr_start, a.snr_stop, a.snr_step)?;
    let cfg = sweep_config(&a.sweep, grid, "evaluate")?;
    let detectors = unique(&a.detectors);
    if detectors.contains(&DetectorKind::Resnet) && a.checkpoints.is_empty() {
        return Err(Error::MissingCheckpoint("resnet detector (pass --checkpoint)".into()));
    }
    let digests = a.checkpoints.iter().map(|p| file_digest(p)).collect::<Result<Vec<_>>>();
    let digests = match digests {
        Err(Error::MissingFile(p)) => return Err(Error::MissingCheckpoint(p.display().to_string())),
        other => other?,
    };

    let (_, data) = load_prepared(&a.dataset, &a.split)?;
    let reference = data.reference()?;
    let (n, m) = data.shape()?;
    let test = data.test_set();

    let mut scorers: Vec<Box<dyn Scorer>> = Vec::new();
    for kind in &detectors {
        if *kind == DetectorKind::Resnet {
            let mut nets = a
                .checkpoints
                .iter()
                .map(|p| load_scorer(p, n, m))
                .collect::<Result<Vec<_>>>()?;
            let names: Vec<String> = nets.iter().map(|s| s.name.clone()).collect();
            for (s, p) in nets.iter_mut().zip(&a.checkpoints) {
                if names.iter().filter(|x| **x == s.name).count() > 1 {
                    s.name = format!("{}:{}", s.name, p.display());
                }
            }
            scorers.extend(nets.into_iter().map(|s| Box::new(s) as Box<dyn Scorer>));
        } else if let Some(b) = baseline(*kind, &a.sweep, n, m) {
            scorers.push(b);
        }
    }

    let mut report: Option<EvalReport> = None;
    for s in &scorers {
        let r = snr_sweep(s.as_ref(), &test, reference, &cfg)?;
        print_anchor_summary(&r);
        match report.as_mut() {
            Some(all) => all.extend(r),
            None => report = Some(r),
        }
    }
    let mut report = report.ok_or_else(|| Error::Config("no detectors selected".into()))?;
    report.provenance.config_hash = config_hash(&HashedConfig {
        command: "evaluate",
        args: a,
        checkpoints: digests,
    });
    write_reports(&report, &a.out, "sweep", PlotAxis::SnrDb)
}

fn print_anchor_summary(r: &EvalReport) {
    for row in r.rows.iter().filter(|row| row.snr_db == PUBLISHED_COMPARISON_SNR_DB) {
        println!("{:<8} {:<9} AUC at {} dB: {:.4}", row.name, row.activity.as_str(), row.snr_db, row.auc);
    }
}

pub fn ablate(a: &AblateArgs) -> Result<()> {
    let cfg = sweep_config(&a.sweep, Vec::new(), "ablate")?;
    let names: Vec<String> = if a.variants.is_empty() {
        ArchitectureVariant::names().into_iter().map(String::from).collect()
    } else {
        a.variants.clone()
    };
    let variants = names
        .iter()
        .map(|n| ArchitectureVariant::named(n))
        .collect::<Result<Vec<_>>>()?;
    let paths: Vec<PathBuf> = variants
        .iter()
        .map(|v| a.checkpoint_dir.join(&v.name).join(CHECKPOINT_FILE))
        .collect();
    for (v, p) in variants.iter().zip(&paths) {
        if !p.is_file() {
            return Err(Error::MissingCheckpoint(format!("{} ({})", v.name, p.display())));
        }
    }
    let digests = paths.iter().map(|p| file_digest(p)).collect::<Result<Vec<_>>>()?;

    let (_, data) = load_prepared(&a.dataset, &a.split)?;
    let reference = data.reference()?;
    let (n, m) = data.shape()?;
    let test = data.test_set();

    let mut scorers: Vec<Box<dyn Scorer>> = Vec::new();
    for (v, p) in variants.iter().zip(&paths) {
        let s = load_scorer(p, n, m)?;
        if s.network.variant.name != v.name {
            return Err(Error::Config(format!(
                "{} holds {}, expected {}",
                p.display(),
                s.network.variant.name,
                v.name
            )));
        }
        scorers.push(Box::new(s));
    }
    let detectors = unique(&a.detectors);
    scorers.extend(detectors.iter().filter_map(|&k| baseline(k, &a.sweep, n, m)));

    let anchors: Vec<(ActivityLabel, f64)> = ablation_anchors()
        .into_iter()
        .filter(|(l, _)| cfg.activities.contains(l))
        .collect();
    let refs: Vec<&dyn Scorer> = scorers.iter().map(|s| s.as_ref()).collect();
    let mut report = ablation(&refs, &test, reference, &anchors, &cfg)?;
    report.provenance.config_hash = config_hash(&HashedConfig {
        command: "ablate",
        args: a,
        checkpoints: digests,
    });
    for row in &report.rows {
        println!(
            "{:<8} {:<9} {:>6} dB  AUC {:.4}  FLOPs {}",
            row.name, row.activity.as_str(), row.snr_db, row.auc, row.flops
        );
    }
    write_reports(&report, &a.out, "ablation", PlotAxis::Flops)
}

/// Computed parameter and FLOP counts of every variant next to the
/// reported ones.
pub fn architecture_table(n_fast: usize, m_slow: usize) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "## Architectures (input {n_fast} x {m_slow})\n");
    let _ = writeln!(
        s,
        "| variant | channels | params | reported params | FLOPs | reported FLOPs | FLOP ratio |"
    );
    let _ = writeln!(s, "|---|---|---|---|---|---|---|");
    let mut flops_1dd = None;
    for v in ArchitectureVariant::all() {
        let shape = input_shape(n_fast, m_slow, v.dimensionality);
        let net = build_network(&v, shape, 0)?;
        let params = net.param_count();
        let flops = net.flop_count(shape);
        if v.name == "1D-D" {
            flops_1dd = Some(flops);
        }
        let plan: Vec<String> = v.channel_plan().iter().map(|c| c.to_string()).collect();
        let (rp, rf, ratio) = match v.reported() {
            Some(r) => (
                format!("{:.3e}", r.parameters),
                format!("{:.3e}", r.flops),
                format!("{:.2}", flops as f64 / r.flops),
            ),
            None => ("-".into(), "-".into(), "-".into()),
        };
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {:.3e} | {} | {} |",
            v.name,
            plan.join("-"),
            params,
            rp,
            flops as f64,
            rf,
            ratio
        );
    }
    if let Some(f) = flops_1dd {
        let _ = writeln!(
            s,
            "\n1D-D inference: {:.3e} FLOPs, bound {:.0e}: {}",
            f as f64,
            PUBLISHED_1DD_FLOP_BOUND,
            if (f as f64) < PUBLISHED_1DD_FLOP_BOUND { "below" } else { "above" }
        );
    }
    Ok(s)
}

fn report_summary(path: &Path, r: &EvalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "## {}\n\nseed {}, config {}, {} noise-only negatives, {} rows\n",
        path.display(),
        r.provenance.seed,
        if r.provenance.config_hash.is_empty() { "not recorded" } else { &r.provenance.config_hash },
        r.provenance.noise_negatives,
        r.rows.len()
    );
    let _ = writeln!(s, "| detector | activity | FLOPs | SNR range (dB) | AUC at {PUBLISHED_COMPARISON_SNR_DB} dB | min AUC | max AUC |");
    let _ = writeln!(s, "|---|---|---|---|---|---|---|");
    let mut groups: Vec<(&str, ActivityLabel)> = Vec::new();
    for row in &r.rows {
        if !groups.contains(&(row.name.as_str(), row.activity)) {
            groups.push((row.name.as_str(), row.activity));
        }
    }
    for (name, activity) in groups {
        let rows: Vec<_> = r.rows.iter().filter(|x| x.name == name && x.activity == activity).collect();
        let lo = rows.iter().map(|x| x.snr_db).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|x| x.snr_db).fold(f64::NEG_INFINITY, f64::max);
        let at = rows
            .iter()
            .find(|x| x.snr_db == PUBLISHED_COMPARISON_SNR_DB)
            .map_or("-".to_string(), |x| format!("{:.4}", x.auc));
        let min = rows.iter().map(|x| x.auc).fold(f64::INFINITY, f64::min);
        let max = rows.iter().map(|x| x.auc).fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(
            s,
            "| {name} | {activity} | {} | {lo} .. {hi} | {at} | {min:.4} | {max:.4} |",
            rows[0].flops
        );
    }
    s
}

pub fn report(a: &ReportArgs) -> Result<()> {
    let mut s = String::from("# uwbocc report\n\n");
    let _ = writeln!(
        s,
        "Published comparison at {PUBLISHED_COMPARISON_SNR_DB} dB: 2D-A ResNet AUC {PUBLISHED_RESNET_2DA_AUC}, \
         VMP baseline AUC {PUBLISHED_VMP_AUC}.\n"
    );
    s.push_str(&architecture_table(a.n_fast, a.m_slow)?);
    for p in &a.inputs {
        let r = read_report(p)?;
        r.validate()?;
        s.push('\n');
        s.push_str(&report_summary(p, &r));
    }
    match &a.out {
        Some(p) => {
            write_file(p, &s)?;
            println!("wrote {}", p.display());
        }
        None => print!("{s}"),
    }
    Ok(())
}
