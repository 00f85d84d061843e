//! Noisy-vs-clean comparison on synthetic data.
//!
//! cargo run --release -p trajmode --example synthetic_benchmark -- [seed] [corrupt_fraction]

use trajmode::classify::{BuiltinLearner, ClassifierKind, Learner};
use trajmode::evaluate::{compare, render_table, ClassSubsetConfig, ExperimentConfig};
use trajmode::synthgen::{corrupt, default_profiles, generate};
use trajmode::trajfeat::{featurize_samples, FeatureOptions};

fn main() -> trajmode::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let fraction: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.1);

    let t = std::time::Instant::now();
    let samples = generate(&default_profiles(), seed)?;
    let (samples, corrupted) = corrupt(samples, fraction, seed)?;
    let features = featurize_samples(&samples, FeatureOptions::default())?;
    let learners: Vec<BuiltinLearner> = ClassifierKind::ALL.iter().map(|&k| BuiltinLearner::new(k)).collect();
    let refs: Vec<&dyn Learner> = learners.iter().map(|l| l as &dyn Learner).collect();
    let subset = ClassSubsetConfig::preset("all11").expect("preset");
    let report = compare(&features, &subset, &refs, &[false, true], &ExperimentConfig::new(seed))?;
    println!("{} samples, {} corrupted", samples.len(), corrupted.len());
    print!("{}", render_table(&report));
    println!("elapsed {:.2?}", t.elapsed());
    Ok(())
}
