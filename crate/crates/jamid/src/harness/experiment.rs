//! Experiment driver: train/test splitting, classifier training and
//! evaluation over the (case × transform × classifier) matrix, and report
//! writing.

use std::fs;
use std::path::Path;

use ndarray::{Array2, Array4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::dataset::{
    generate_dataset, load_manifest, manifest_path, DatasetManifest, ManifestRecord,
};
use super::seed::{split_hash, splitmix64};
use crate::classify::{pca_fit, pca_transform, svm_predict, svm_train_ovr};
use crate::cnn::{Cnn, CnnArch, TrainHistory};
use crate::error::{JamError, Result};
use crate::imaging::{load_png, IMAGE_SIZE};
use crate::jamming::JammerClass;
use crate::tft::TfrKind;

/// Number of jammer classes.
pub const N_CLASSES: usize = 4;

/// Evaluation result of one (case, transform, classifier) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Fraction of correct predictions.
    pub accuracy: f64,
    /// `confusion[i][j]` = count of samples with true class `i` predicted `j`.
    pub confusion: [[usize; N_CLASSES]; N_CLASSES],
    /// Per-class precision (0 when the class was never predicted).
    pub precision: [f64; N_CLASSES],
    /// Per-class recall (0 when the class has no test samples).
    pub recall: [f64; N_CLASSES],
}

/// Count the 4×4 confusion matrix.
pub fn confusion_matrix(
    y_true: &[usize],
    y_pred: &[usize],
) -> Result<[[usize; N_CLASSES]; N_CLASSES]> {
    if y_true.len() != y_pred.len() {
        return Err(JamError::Structural(format!(
            "label lengths differ: {} vs {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut m = [[0usize; N_CLASSES]; N_CLASSES];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= N_CLASSES || p >= N_CLASSES {
            return Err(JamError::Domain(format!("label ({t}, {p}) outside 0..{N_CLASSES}")));
        }
        m[t][p] += 1;
    }
    Ok(m)
}

/// Build the full evaluation report from label sequences.
pub fn eval_report(y_true: &[usize], y_pred: &[usize]) -> Result<EvalReport> {
    let confusion = confusion_matrix(y_true, y_pred)?;
    let total: usize = y_true.len();
    if total == 0 {
        return Err(JamError::Structural("empty test set".into()));
    }
    let trace: usize = (0..N_CLASSES).map(|i| confusion[i][i]).sum();
    let mut precision = [0.0; N_CLASSES];
    let mut recall = [0.0; N_CLASSES];
    for k in 0..N_CLASSES {
        let col: usize = (0..N_CLASSES).map(|i| confusion[i][k]).sum();
        let row: usize = confusion[k].iter().sum();
        precision[k] = if col > 0 { confusion[k][k] as f64 / col as f64 } else { 0.0 };
        recall[k] = if row > 0 { confusion[k][k] as f64 / row as f64 } else { 0.0 };
    }
    Ok(EvalReport { accuracy: trace as f64 / total as f64, confusion, precision, recall })
}

/// One cell of the experiment matrix.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    /// Scenario case id.
    pub case_id: String,
    /// Transform name.
    pub transform: String,
    /// Classifier name (`svm` or `cnn`).
    pub classifier: String,
    /// Test-set evaluation.
    pub report: EvalReport,
    /// CNN per-epoch history (empty for the SVM).
    pub history: TrainHistory,
}

/// Load the dataset for `(case, transform)`, generating it when the manifest
/// is missing or does not match the requested configuration.
pub fn ensure_dataset(
    cfg: &ExperimentConfig,
    case_id: &str,
    kind: TfrKind,
) -> Result<DatasetManifest> {
    let case = super::scenario::ScenarioCase::standard(case_id)?;
    let path = manifest_path(&cfg.data_dir, &case.id, kind);
    if path.exists() {
        if let Ok(m) = load_manifest(&path) {
            if m.header.seed == cfg.seed && m.header.n_per_class == cfg.n_per_class() {
                return Ok(m);
            }
        }
    }
    generate_dataset(&case, kind, cfg.n_per_class(), cfg.seed, &cfg.data_dir, &cfg.grid, &cfg.tft)
}

/// Split a dataset's records into train/test per class by ordering each
/// class's sample indices with a seed-derived hash. Returns
/// `(train, test)` record references; the splits are disjoint by construction.
pub fn split_dataset<'m>(
    manifest: &'m DatasetManifest,
    seed: u64,
    n_train: usize,
    n_test: usize,
) -> Result<(Vec<&'m ManifestRecord>, Vec<&'m ManifestRecord>)> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in JammerClass::ALL {
        let mut recs: Vec<&ManifestRecord> = manifest
            .records
            .iter()
            .filter(|r| r.class == class.as_str())
            .collect();
        if recs.len() < n_train + n_test {
            return Err(JamError::Structural(format!(
                "class {class} has {} samples, need {}",
                recs.len(),
                n_train + n_test
            )));
        }
        recs.sort_by_key(|r| (split_hash(seed, r.index), r.index));
        train.extend(recs[..n_train].iter().copied());
        test.extend(recs[n_train..n_train + n_test].iter().copied());
    }
    Ok((train, test))
}

fn class_label(rec: &ManifestRecord) -> Result<usize> {
    Ok(JammerClass::parse(&rec.class)?.index())
}

/// Load records as flat `[0,1]` feature rows (`n × 49152`) for the PCA+SVM.
pub fn load_features(manifest: &DatasetManifest, recs: &[&ManifestRecord]) -> Result<Array2<f32>> {
    let d = IMAGE_SIZE * IMAGE_SIZE * 3;
    let mut x = Array2::<f32>::zeros((recs.len(), d));
    for (i, rec) in recs.iter().enumerate() {
        let img = load_png(&manifest.image_path(rec))?;
        for (dst, &px) in x.row_mut(i).iter_mut().zip(&img.pixels) {
            *dst = px as f32 / 255.0;
        }
    }
    Ok(x)
}

/// Load records as a channel-first `[0,1]` tensor (`n × 3 × 128 × 128`) for
/// the CNN.
pub fn load_tensor(manifest: &DatasetManifest, recs: &[&ManifestRecord]) -> Result<Array4<f32>> {
    let mut x = Array4::<f32>::zeros((recs.len(), 3, IMAGE_SIZE, IMAGE_SIZE));
    for (i, rec) in recs.iter().enumerate() {
        let img = load_png(&manifest.image_path(rec))?;
        for y in 0..IMAGE_SIZE {
            for xx in 0..IMAGE_SIZE {
                let base = (y * IMAGE_SIZE + xx) * 3;
                for c in 0..3 {
                    x[(i, c, y, xx)] = img.pixels[base + c] as f32 / 255.0;
                }
            }
        }
    }
    Ok(x)
}

fn stage_seed(global: u64, tag: &str) -> u64 {
    let mut h = global;
    for b in tag.bytes() {
        h = splitmix64(h ^ b as u64);
    }
    h
}

/// Train the PCA+SVM pipeline on the train split and evaluate on the test
/// split; optionally saves the model checkpoint.
pub fn train_eval_svm(
    cfg: &ExperimentConfig,
    manifest: &DatasetManifest,
    train: &[&ManifestRecord],
    test: &[&ManifestRecord],
    model_path: Option<&Path>,
) -> Result<EvalReport> {
    let x_train = load_features(manifest, train)?;
    let y_train: Vec<usize> = train.iter().map(|r| class_label(r)).collect::<Result<_>>()?;
    let pca = pca_fit(&x_train, cfg.svm.pca_components)?;
    let z_train = pca_transform(&pca, &x_train)?;
    drop(x_train);
    let tag = format!("svm/{}/{}", manifest.header.case.id, manifest.header.transform);
    let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(cfg.seed, &tag));
    let svm = svm_train_ovr(&z_train, &y_train, cfg.svm.lambda, cfg.svm.epochs, &mut rng)?;
    if let Some(p) = model_path {
        crate::model_io::save_pca_svm(p, &pca, &svm)?;
    }
    let x_test = load_features(manifest, test)?;
    let y_test: Vec<usize> = test.iter().map(|r| class_label(r)).collect::<Result<_>>()?;
    let z_test = pca_transform(&pca, &x_test)?;
    let y_pred: Vec<usize> = z_test
        .rows()
        .into_iter()
        .map(|row| svm_predict(&svm, row.as_slice().unwrap()).map(|(c, _)| c))
        .collect::<Result<_>>()?;
    eval_report(&y_test, &y_pred)
}

/// Train the CNN on the train split and evaluate on the test split;
/// optionally saves the model checkpoint.
pub fn train_eval_cnn(
    cfg: &ExperimentConfig,
    manifest: &DatasetManifest,
    train: &[&ManifestRecord],
    test: &[&ManifestRecord],
    model_path: Option<&Path>,
) -> Result<(EvalReport, TrainHistory)> {
    let x_train = load_tensor(manifest, train)?;
    let y_train: Vec<usize> = train.iter().map(|r| class_label(r)).collect::<Result<_>>()?;
    let tag = format!("cnn/{}/{}", manifest.header.case.id, manifest.header.transform);
    let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(cfg.seed, &tag));
    let mut net = Cnn::<f32>::new(CnnArch::standard(), &mut rng)?;
    let history = net.train(&x_train, &y_train, &cfg.cnn.to_train_config(), &mut rng)?;
    drop(x_train);
    if let Some(p) = model_path {
        crate::model_io::save_cnn(p, &net)?;
    }
    let x_test = load_tensor(manifest, test)?;
    let y_test: Vec<usize> = test.iter().map(|r| class_label(r)).collect::<Result<_>>()?;
    let y_pred = net.predict(&x_test)?;
    Ok((eval_report(&y_test, &y_pred)?, history))
}

/// Run the configured (case × transform × classifier) matrix, writing model
/// checkpoints, a metrics CSV, per-cell confusion CSVs, and CNN training
/// histories under `cfg.out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentOutcome>> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)?;
    let model_dir = cfg.out_dir.join("models");
    fs::create_dir_all(&model_dir)?;
    let mut outcomes = Vec::new();
    for case_id in &cfg.cases {
        for transform in &cfg.transforms {
            let kind = TfrKind::parse(transform)?;
            let manifest = ensure_dataset(cfg, case_id, kind)?;
            let (train, test) = split_dataset(&manifest, cfg.seed, cfg.n_train, cfg.n_test)?;
            for classifier in &cfg.classifiers {
                let model_path = model_dir.join(format!("{case_id}_{kind}_{classifier}.bin"));
                let (report, history) = match classifier.as_str() {
                    "svm" => (
                        train_eval_svm(cfg, &manifest, &train, &test, Some(&model_path))?,
                        TrainHistory::default(),
                    ),
                    "cnn" => train_eval_cnn(cfg, &manifest, &train, &test, Some(&model_path))?,
                    other => {
                        return Err(JamError::Config(format!("unknown classifier {other:?}")))
                    }
                };
                outcomes.push(ExperimentOutcome {
                    case_id: case_id.clone(),
                    transform: kind.as_str().to_string(),
                    classifier: classifier.clone(),
                    report,
                    history,
                });
            }
        }
    }
    write_reports(cfg, &outcomes)?;
    Ok(outcomes)
}

/// Write `metrics.csv`, per-cell confusion CSVs, and CNN history CSVs.
pub fn write_reports(cfg: &ExperimentConfig, outcomes: &[ExperimentOutcome]) -> Result<()> {
    fs::create_dir_all(&cfg.out_dir)?;
    let mut w = csv::Writer::from_path(cfg.out_dir.join("metrics.csv"))
        .map_err(|e| JamError::Format(format!("metrics.csv: {e}")))?;
    w.write_record(["case", "transform", "classifier", "accuracy"])
        .map_err(|e| JamError::Format(e.to_string()))?;
    for o in outcomes {
        w.write_record([
            o.case_id.as_str(),
            o.transform.as_str(),
            o.classifier.as_str(),
            &format!("{:.6}", o.report.accuracy),
        ])
        .map_err(|e| JamError::Format(e.to_string()))?;
    }
    w.flush()?;
    for o in outcomes {
        let stem = format!("{}_{}_{}", o.case_id, o.transform, o.classifier);
        let mut w = csv::Writer::from_path(cfg.out_dir.join(format!("confusion_{stem}.csv")))
            .map_err(|e| JamError::Format(e.to_string()))?;
        let mut header = vec!["true\\pred".to_string()];
        header.extend(JammerClass::ALL.iter().map(|c| c.as_str().to_string()));
        w.write_record(&header).map_err(|e| JamError::Format(e.to_string()))?;
        for (i, row) in o.report.confusion.iter().enumerate() {
            let mut rec = vec![JammerClass::ALL[i].as_str().to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(|e| JamError::Format(e.to_string()))?;
        }
        w.flush()?;
        if !o.history.loss.is_empty() {
            let mut w = csv::Writer::from_path(cfg.out_dir.join(format!("history_{stem}.csv")))
                .map_err(|e| JamError::Format(e.to_string()))?;
            w.write_record(["epoch", "train_loss", "train_acc"])
                .map_err(|e| JamError::Format(e.to_string()))?;
            for (e, (l, a)) in o.history.loss.iter().zip(&o.history.accuracy).enumerate() {
                w.write_record([(e + 1).to_string(), format!("{l:.6}"), format!("{a:.6}")])
                    .map_err(|e| JamError::Format(e.to_string()))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
