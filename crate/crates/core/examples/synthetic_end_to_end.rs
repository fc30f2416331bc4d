//! Trains 1D-E on synthetic breathing/empty data and prints test AUCs.
//!
//! `cargo run --release --example synthetic_end_to_end -- [seed] [epochs] [reuse]`

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uwbocc::augment::AugmentPolicy;
use uwbocc::eval::{sweep_points, Scorer, SweepConfig};
use uwbocc::ingest::{Partition, ReuseFactors, SplitAssignment};
use uwbocc::neural::{build_network, input_shape, ArchitectureVariant, TrainConfig, Trainer};
use uwbocc::pipeline::{validation_set, AugmentedSource, EnergyScorer, NetworkScorer, PreparedData};
use uwbocc::radar::ActivityLabel;
use uwbocc::simulator::{synth_dataset, RadarConfig, SynthSpec};

fn main() -> uwbocc::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let seed = args.first().copied().unwrap_or(1);
    let epochs = args.get(1).copied().unwrap_or(15) as usize;
    let reuse = args.get(2).copied().unwrap_or(4) as usize;
    let t0 = Instant::now();

    let radar = RadarConfig::default();
    let (train, val, test) = (200, 50, 100);
    let per_class = train + val + test;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = synth_dataset(&SynthSpec::new(per_class, 0, 0, per_class), &radar, &mut rng)?;
    let partitions = records
        .iter()
        .enumerate()
        .map(|(i, _)| match i % per_class {
            k if k < train => Partition::Train,
            k if k < train + val => Partition::Validation,
            _ => Partition::Test,
        })
        .collect();
    let data = PreparedData::new(&records, SplitAssignment { partitions })?;
    let reference = data.reference()?;
    println!("data ready in {:.1?}", t0.elapsed());

    let variant = ArchitectureVariant::named("1D-E")?;
    let shape = input_shape(radar.n_fast, radar.m_slow, variant.dimensionality);
    let net = build_network(&variant, shape, seed)?;
    let policy = AugmentPolicy::training();
    let cfg = TrainConfig { max_epochs: epochs, patience: 5, ..TrainConfig::default() };
    let mut source = AugmentedSource::new(
        &data,
        reference,
        policy.clone(),
        ReuseFactors { occupied: reuse, empty: reuse },
        variant.dimensionality,
        cfg.batch_size,
        seed,
    )?;
    let val_set = validation_set(&data, reference, &policy, variant.dimensionality, seed)?;
    let mut trainer = Trainer::new(net, cfg)?;
    trainer.run(&mut source, &val_set, &mut |r| {
        println!(
            "epoch {:>3} loss {:.4} val loss {:.4} val auc {:.4} ({:.1?})",
            r.epoch, r.train_loss, r.val_loss, r.val_auc, t0.elapsed()
        )
    })?;

    let scorer = NetworkScorer::new(trainer.best.clone());
    let energy = EnergyScorer { window: 20, n_fast: radar.n_fast, m_slow: radar.m_slow };
    let test_set = data.test_set();
    let sweep = SweepConfig::new(seed);
    let points: Vec<_> = [-10.0, -20.0, -30.0, -40.0].iter().map(|&s| (ActivityLabel::Breathing, s)).collect();
    for s in [&scorer as &dyn Scorer, &energy] {
        let r = sweep_points(&s.name(), s.flops(), &test_set, reference, &points, &sweep, &|x, _| s.score(x))?;
        for row in r.rows {
            println!("{:>6} {:>6} dB auc {:.4}", row.name, row.snr_db, row.auc);
        }
    }
    println!("total {:.1?}", t0.elapsed());
    Ok(())
}
