use clap::{Parser, Subcommand};

use trajmode_cli::{
    cmd_denoise, cmd_evaluate, cmd_featurize, cmd_ingest, cmd_predict, cmd_synth, cmd_train, render_report,
    DenoiseArgs, EvaluateArgs, FeaturizeArgs, IngestArgs, PredictArgs, SynthArgs, TrainArgs,
};

#[derive(Parser)]
#[command(
    name = "trajmode",
    version,
    about = "Transportation-mode prediction from GPS trajectories"
)]
struct Cli {
    /// Worker thread cap (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a GeoLife tree into a sample archive.
    Ingest(IngestArgs),
    /// Compute the 70 trajectory features for every archived sample.
    Featurize(FeaturizeArgs),
    /// Remove median-filter outliers from a feature CSV.
    Denoise(DenoiseArgs),
    /// Cross-validate classifiers with and without noise removal.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic sample archive.
    Synth(SynthArgs),
    /// Train one classifier on a feature CSV.
    Train(TrainArgs),
    /// Label a feature CSV with a trained model.
    Predict(PredictArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()?;
    }
    match cli.command {
        Command::Ingest(a) => {
            let s = cmd_ingest(&a)?;
            println!(
                "{} users, {} points, {} skipped records, {} samples ({} after filtering)",
                s.users, s.points_read, s.skipped_records, s.samples_assembled, s.samples_kept
            );
            let total = s.samples_kept.max(1) as f64;
            for (mode, n) in &s.per_mode {
                println!("{mode:<12} {n:>7} {:>6.2}%", *n as f64 * 100.0 / total);
            }
        }
        Command::Featurize(a) => {
            let n = cmd_featurize(&a)?;
            println!("wrote {n} feature rows to {}", a.out.display());
        }
        Command::Denoise(a) => {
            let (before, after) = cmd_denoise(&a)?;
            println!("kept {after} of {before} rows ({} removed)", before - after);
        }
        Command::Evaluate(a) => {
            let report = cmd_evaluate(&a)?;
            print!("{}", render_report(&report));
        }
        Command::Synth(a) => {
            let s = cmd_synth(&a)?;
            println!("generated {} samples ({} corrupted)", s.samples, s.corrupted.len());
            for (mode, n) in &s.per_mode {
                println!("{mode:<12} {n:>7}");
            }
        }
        Command::Train(a) => {
            let doc = cmd_train(&a)?;
            println!(
                "trained {} on classes [{}]",
                doc.model.kind(),
                doc.model.class_vocabulary.join(", ")
            );
        }
        Command::Predict(a) => {
            let n = cmd_predict(&a)?;
            println!("wrote {n} predictions to {}", a.out.display());
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
