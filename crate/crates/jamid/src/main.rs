//! Command-line driver: dataset generation, classifier training, model
//! evaluation, and the full experiment pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use jamid::harness::{
    eval_report, generate_dataset, load_manifest, run_experiment, split_dataset, train_eval_cnn,
    train_eval_svm, ExperimentConfig, ScenarioCase,
};
use jamid::tft::TfrKind;

#[derive(Parser)]
#[command(name = "jamid", about = "LTE jammer identification from time-frequency images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a PNG dataset for one scenario case and transform.
    Generate {
        /// Scenario case (C1..C6).
        #[arg(long)]
        case: String,
        /// Transform: spec, cw, or gabor.
        #[arg(long)]
        transform: String,
        /// Images per jammer class.
        #[arg(long, default_value_t = 300)]
        n: usize,
        /// Global seed.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Optional TOML config supplying grid/transform parameters.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train one classifier on a generated dataset and report test accuracy.
    Train {
        /// Dataset manifest path.
        #[arg(long)]
        manifest: PathBuf,
        /// Classifier: svm or cnn.
        #[arg(long)]
        classifier: String,
        /// TOML config (dataset split sizes, hyperparameters).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Model checkpoint output path.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Evaluate a saved model on a dataset manifest.
    Evaluate {
        /// Model checkpoint path.
        #[arg(long)]
        model: PathBuf,
        /// Dataset manifest path.
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Run the full (case × transform × classifier) experiment matrix.
    Pipeline {
        /// TOML config path (defaults used when omitted).
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>) -> jamid::Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Generate { case, transform, n, seed, out, config } => {
            let cfg = load_config(&config)?;
            let case = ScenarioCase::standard(&case)?;
            let kind = TfrKind::parse(&transform)?;
            let manifest = generate_dataset(&case, kind, n, seed, &out, &cfg.grid, &cfg.tft)?;
            println!(
                "generated {} images for {} / {} under {}",
                manifest.records.len(),
                case.id,
                kind,
                out.display()
            );
        }
        Command::Train { manifest, classifier, config, model } => {
            let cfg = load_config(&config)?;
            let m = load_manifest(&manifest)?;
            let (train, test) = split_dataset(&m, cfg.seed, cfg.n_train, cfg.n_test)?;
            let report = match classifier.as_str() {
                "svm" => train_eval_svm(&cfg, &m, &train, &test, model.as_deref())?,
                "cnn" => train_eval_cnn(&cfg, &m, &train, &test, model.as_deref())?.0,
                other => anyhow::bail!("unknown classifier {other:?} (expected svm or cnn)"),
            };
            println!(
                "{} / {} / {classifier}: test accuracy {:.4}",
                m.header.case.id, m.header.transform, report.accuracy
            );
        }
        Command::Evaluate { model, manifest } => {
            let m = load_manifest(&manifest)?;
            let recs: Vec<_> = m.records.iter().collect();
            let y_true: Vec<usize> = m
                .records
                .iter()
                .map(|r| jamid::jamming::JammerClass::parse(&r.class).map(|c| c.index()))
                .collect::<jamid::Result<_>>()?;
            let y_pred = if let Ok((pca, svm)) = jamid::model_io::load_pca_svm(&model) {
                let x = jamid::harness::load_features(&m, &recs)?;
                let z = jamid::classify::pca_transform(&pca, &x)?;
                z.rows()
                    .into_iter()
                    .map(|row| {
                        jamid::classify::svm_predict(&svm, row.as_slice().unwrap()).map(|(c, _)| c)
                    })
                    .collect::<jamid::Result<Vec<usize>>>()?
            } else {
                let net = jamid::model_io::load_cnn(&model)?;
                let x = jamid::harness::load_tensor(&m, &recs)?;
                net.predict(&x)?
            };
            let report = eval_report(&y_true, &y_pred)?;
            println!("accuracy {:.4}", report.accuracy);
            println!("confusion (rows true none/bj/ssj/rsj, columns predicted):");
            for row in report.confusion {
                println!("  {row:?}");
            }
        }
        Command::Pipeline { config } => {
            let cfg = load_config(&config)?;
            let outcomes = run_experiment(&cfg)?;
            println!("case  transform  classifier  accuracy");
            for o in &outcomes {
                println!(
                    "{:<5} {:<10} {:<11} {:.4}",
                    o.case_id, o.transform, o.classifier, o.report.accuracy
                );
            }
            println!("reports written to {}", cfg.out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
