//! Acceptance suite: nine checks covering the signal chain, the scenario
//! calibration, the EVM receiver, the three transforms, the classifiers,
//! the scaled experiment results, and end-to-end determinism.
//!
//! Criteria 6–8 share one full experiment matrix (6 cases × 3 transforms ×
//! 2 classifiers at 200 train / 100 test images per class). The matrix run
//! is expensive, so its datasets and reports persist under
//! `CARGO_TARGET_TMPDIR` and are reloaded on later runs when the
//! configuration is unchanged.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use ndarray::{Array2, Array4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jamid::channel::{calibrate_case, compute_evm, simulate_received_frame, snr_linear, sjr_linear};
use jamid::classify::{pca_fit, svm_objective, svm_train_ovr};
use jamid::cnn::{Cnn, CnnArch, ConvBlock};
use jamid::harness::{run_experiment, EvalReport, ExperimentConfig, ExperimentOutcome, ScenarioCase};
use jamid::jamming::{gen_rsj, gen_ssj, JamPower, JammerClass};
use jamid::lte_phy::{ofdm_demodulate, ofdm_modulate, zadoff_chu, BasebandSignal, GridConfig, ResourceGrid};
use jamid::tft::{choi_williams, choi_williams_reference, gabor_scalogram, stft_spectrogram, TftParams};

/// CNN epochs for the full-matrix run (criteria 6–8).
const CNN_EPOCHS: usize = 10;

fn accept_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance")
}

// ---------------------------------------------------------------------------
// Criterion 1: signal-chain correctness.
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_signal_chain() {
    let cfg = GridConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // OFDM round trip on a random grid.
    let mut grid = ResourceGrid::zeros(cfg);
    for l in 0..cfg.lframe() {
        for k in 0..cfg.k {
            *grid.at_mut(k, l) = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
    }
    let back = ofdm_demodulate(&ofdm_modulate(&grid), &cfg).unwrap();
    let mut worst = 0.0f64;
    for l in 0..cfg.lframe() {
        for k in 0..cfg.k {
            worst = worst.max((grid.at(k, l) - back.at(k, l)).norm());
        }
    }
    assert!(worst <= 1e-9, "OFDM round-trip error {worst}");

    // Zadoff-Chu unit amplitude.
    let mut zc_worst = 0.0f64;
    for u in [0u32, 10, 25, 29, 34] {
        for m in 0..62 {
            zc_worst = zc_worst.max((zadoff_chu(u, m).unwrap().norm() - 1.0).abs());
        }
    }
    assert!(zc_worst <= 1e-12, "Zadoff-Chu amplitude error {zc_worst}");

    // Smart-jammer support confinement: demodulate each jammer back onto the
    // grid and check that off-support cells carry no energy.
    let sync_support = |k: usize, l: usize| (33..=94).contains(&k) && matches!(l, 5 | 6 | 75 | 76);
    let rs_support = |k: usize, l: usize| k % 7 == 0 && l % 7 == 0;
    let p = JamPower::new(1.0).unwrap();
    let cases: [(&str, BasebandSignal, &dyn Fn(usize, usize) -> bool); 2] = [
        ("SSJ", gen_ssj(&cfg, p, &mut rng).unwrap(), &sync_support),
        ("RSJ", gen_rsj(&cfg, p, &mut rng).unwrap(), &rs_support),
    ];
    for (name, sig, support) in &cases {
        let g = ofdm_demodulate(sig, &cfg).unwrap();
        let mut off = 0.0f64;
        let mut on = 0.0f64;
        for l in 0..cfg.lframe() {
            for k in 0..cfg.k {
                let v = g.at(k, l).norm();
                if support(k, l) {
                    on = on.max(v);
                } else {
                    off = off.max(v);
                }
            }
        }
        assert!(off <= 1e-9, "{name} off-support magnitude {off}");
        assert!(on > 0.0, "{name} support carries no energy");
    }
    println!("criterion 1 PASS: OFDM round trip {worst:.2e}, ZC amplitude {zc_worst:.2e}, SSJ/RSJ support confined");
}

// ---------------------------------------------------------------------------
// Criterion 2: calibration exactness.
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_calibration() {
    let mut worst = 0.0f64;
    for case in ScenarioCase::all_standard() {
        let p = calibrate_case(&case).unwrap();
        let snr_err = (10.0 * snr_linear(&p).log10() - case.snr_db).abs();
        let sjr_err = (10.0 * sjr_linear(&p).unwrap().log10() - case.sjr_db).abs();
        worst = worst.max(snr_err).max(sjr_err);
    }
    assert!(worst <= 1e-12, "calibration dB error {worst}");
    println!("criterion 2 PASS: all six cases hit their SNR/SJR targets within {worst:.2e} dB");
}

// ---------------------------------------------------------------------------
// Criterion 3: EVM qualitative reproduction.
// ---------------------------------------------------------------------------

fn mean_evm(case: &ScenarioCase, class: JammerClass, frames: usize, rng: &mut ChaCha8Rng) -> f64 {
    let cfg = GridConfig::default();
    let p = calibrate_case(case).unwrap();
    let mut acc = 0.0;
    for _ in 0..frames {
        let (tx, rx) = simulate_received_frame(case, class, &cfg, rng).unwrap();
        acc += compute_evm(&tx, &rx, &cfg, &p).unwrap().evm_percent;
    }
    acc / frames as f64
}

#[test]
fn criterion_3_evm() {
    let frames = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut lines = Vec::new();
    for case in ScenarioCase::all_standard() {
        let means: Vec<f64> =
            JammerClass::ALL.iter().map(|&c| mean_evm(&case, c, frames, &mut rng)).collect();
        if case.id == "C1" {
            let spread = means.iter().cloned().fold(f64::MIN, f64::max)
                - means.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread <= 8.0, "C1 EVM spread {spread} (means {means:?})");
            lines.push(format!("C1 spread {spread:.2}"));
        } else {
            let base = means[0];
            for (i, &m) in means.iter().enumerate().skip(1) {
                let gap = m - base;
                assert!(
                    gap >= 20.0,
                    "{}: {} mean EVM {m:.2} vs no-jam {base:.2} (gap {gap:.2})",
                    case.id,
                    JammerClass::ALL[i]
                );
            }
            lines.push(format!("{} gaps ok", case.id));
        }
    }
    println!("criterion 3 PASS: {} over {frames} frames/case", lines.join(", "));
}

// ---------------------------------------------------------------------------
// Criterion 4: transform oracles.
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_transforms() {
    // Spectrogram: tone localization and per-column Parseval.
    let p = TftParams::default();
    let bin = 37;
    let n = p.window_len + p.hop * 10;
    let tone: Vec<Complex64> = (0..n)
        .map(|i| {
            Complex64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * bin as f64 / p.fft_len as f64 * i as f64,
            )
        })
        .collect();
    let sig = BasebandSignal::new(tone, 1.92e6);
    let t = stft_spectrogram(&sig, &p).unwrap();
    for c in 0..t.cols {
        let peak_row = (0..t.rows).max_by(|&a, &b| t.at(a, c).total_cmp(&t.at(b, c))).unwrap();
        assert_eq!(peak_row, bin, "column {c} peaks at row {peak_row}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise: Vec<Complex64> =
        (0..n).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let nsig = BasebandSignal::new(noise, 1.92e6);
    let tn = stft_spectrogram(&nsig, &p).unwrap();
    let mut parseval_worst = 0.0f64;
    for c in 0..tn.cols {
        let col_sum: f64 = (0..tn.rows).map(|row| tn.at(row, c)).sum();
        let win_energy: f64 = nsig.samples[c * p.hop..c * p.hop + p.window_len]
            .iter()
            .map(|v| v.norm_sqr())
            .sum();
        let expect = p.fft_len as f64 / (2.0 * std::f64::consts::PI) * win_energy;
        parseval_worst = parseval_worst.max((col_sum - expect).abs() / expect);
    }
    assert!(parseval_worst <= 1e-6, "Parseval relative error {parseval_worst}");

    // Choi-Williams: fast path against the literal slow form on 256 samples.
    let cw_params = TftParams { window_len: 64, fft_len: 64, hop: 32, ..TftParams::default() };
    let samples: Vec<Complex64> =
        (0..256).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let csig = BasebandSignal::new(samples, 1.92e6);
    let fast = choi_williams(&csig, &cw_params).unwrap();
    let slow = choi_williams_reference(&csig, &cw_params).unwrap();
    let peak = slow.values.iter().cloned().fold(0.0f64, f64::max);
    let mut cw_worst = 0.0f64;
    for (a, b) in fast.values.iter().zip(&slow.values) {
        cw_worst = cw_worst.max((a - b).abs());
    }
    assert!(cw_worst <= 1e-8 * peak.max(1.0), "Choi-Williams mismatch {cw_worst} (peak {peak})");

    // Gabor: impulse-response width halves when the row frequency doubles.
    let impulse_width = |f: usize| {
        let n = 40000;
        let mut samples = vec![Complex64::new(0.0, 0.0); n];
        samples[n / 2] = Complex64::new(1.0, 0.0);
        let sig = BasebandSignal::new(samples, 1.92e6);
        let t = gabor_scalogram(&sig, &p).unwrap();
        let row: Vec<f64> = (0..n).map(|c| t.at(f - 1, c)).collect();
        let peak = row.iter().cloned().fold(0.0, f64::max);
        row.iter().filter(|&&v| v >= peak / 2.0).count()
    };
    let ratio = impulse_width(32) as f64 / impulse_width(64) as f64;
    assert!((ratio - 2.0).abs() <= 0.2, "Gabor width ratio {ratio}");
    println!(
        "criterion 4 PASS: spectrogram Parseval {parseval_worst:.2e}, CW fast-vs-slow {cw_worst:.2e}, Gabor width ratio {ratio:.3}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: classifier verification.
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_classifiers() {
    // CNN: analytic gradients against central finite differences in f64 on a
    // reduced architecture (no dropout, fixed batch).
    let arch = CnnArch {
        input: (2, 10, 10),
        conv: vec![
            ConvBlock { out_channels: 3, pool: true },
            ConvBlock { out_channels: 4, pool: false },
        ],
        dense: vec![6],
        n_classes: 3,
        dropout: 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut net = Cnn::<f64>::new(arch, &mut rng).unwrap();
    let x = Array4::<f64>::from_shape_fn((4, 2, 10, 10), |_| rng.gen::<f64>() - 0.5);
    let y = vec![0usize, 1, 2, 1];
    let (_, grads) = net.loss_and_grads(&x, &y, &mut rng).unwrap();
    let eps = 1e-3;
    let mut grad_worst = 0.0f64;
    let mut check = |net: &mut Cnn<f64>, get_set: &mut dyn FnMut(&mut Cnn<f64>, Option<f64>) -> f64,
                     analytic: f64| {
        let orig = get_set(net, None);
        get_set(net, Some(orig + eps));
        let (lp, _) = net.loss_and_grads(&x, &y, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        get_set(net, Some(orig - eps));
        let (lm, _) = net.loss_and_grads(&x, &y, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        get_set(net, Some(orig));
        let numeric = (lp - lm) / (2.0 * eps);
        let rel = (analytic - numeric).abs() / numeric.abs().max(1e-4);
        grad_worst = grad_worst.max(rel);
    };
    for stage in 0..2 {
        let g = grads.conv_w[stage][(0, 0)];
        check(&mut net, &mut |n, v| {
            let p = &mut n.convs[stage].w[(0, 0)];
            if let Some(v) = v { *p = v; }
            *p
        }, g);
        let g = grads.conv_b[stage][0];
        check(&mut net, &mut |n, v| {
            let p = &mut n.convs[stage].b[0];
            if let Some(v) = v { *p = v; }
            *p
        }, g);
        let g = grads.gamma[stage][1];
        check(&mut net, &mut |n, v| {
            let p = &mut n.bns[stage].gamma[1];
            if let Some(v) = v { *p = v; }
            *p
        }, g);
        let g = grads.beta[stage][0];
        check(&mut net, &mut |n, v| {
            let p = &mut n.bns[stage].beta[0];
            if let Some(v) = v { *p = v; }
            *p
        }, g);
    }
    for layer in 0..2 {
        let g = grads.dense_w[layer][(0, 1)];
        check(&mut net, &mut |n, v| {
            let p = &mut n.denses[layer].w[(0, 1)];
            if let Some(v) = v { *p = v; }
            *p
        }, g);
        let g = grads.dense_b[layer][0];
        check(&mut net, &mut |n, v| {
            let p = &mut n.denses[layer].b[0];
            if let Some(v) = v { *p = v; }
            *p
        }, g);
    }
    assert!(grad_worst <= 1e-3, "CNN gradient check relative error {grad_worst}");

    // SVM: Pegasos objective against a reference quadratic-program solution
    // of a fixed 20-point two-class problem.
    let (x, y_signed) = svm_fixture();
    let labels: Vec<usize> = y_signed.iter().map(|&v| if v > 0.0 { 1 } else { 0 }).collect();
    let model = svm_train_ovr(&x, &labels, 1.0, 3000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let qp_objective = 0.7799417525499641;
    let obj = svm_objective(&model.weights[1], model.biases[1], &x, &y_signed, 1.0);
    let svm_rel = (obj - qp_objective).abs() / qp_objective;
    assert!(svm_rel <= 0.02, "SVM objective {obj} vs QP {qp_objective} (rel {svm_rel})");

    // PCA: component orthonormality.
    let data = Array2::<f32>::from_shape_fn((40, 30), |_| rng.gen::<f32>());
    let pca = pca_fit(&data, 10).unwrap();
    let c = &pca.components;
    let gram = c.dot(&c.t());
    let mut pca_worst = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            pca_worst = pca_worst.max((gram[(i, j)] - target).abs());
        }
    }
    assert!(pca_worst <= 1e-8, "PCA orthonormality error {pca_worst}");
    println!(
        "criterion 5 PASS: CNN gradcheck {grad_worst:.2e}, SVM objective rel {svm_rel:.4}, PCA orthonormality {pca_worst:.2e}"
    );
}

/// 20-point two-class set whose optimal soft-margin objective (λ = 1) is
/// 0.7799417525499641, solved independently by a dense quadratic program.
fn svm_fixture() -> (Array2<f64>, Vec<f64>) {
    let pts: [(f64, f64, f64); 20] = [
        (2.300000, 0.500000, 1.0),
        (-0.739155, -0.252786, -1.0),
        (2.147214, 0.970228, 1.0),
        (-1.029772, 0.147214, -1.0),
        (1.747214, 1.260845, 1.0),
        (-1.500000, 0.300000, -1.0),
        (1.252786, 1.260845, 1.0),
        (-1.970228, 0.147214, -1.0),
        (0.852786, 0.970228, 1.0),
        (-2.260845, -0.252786, -1.0),
        (0.700000, 0.500000, 1.0),
        (-2.260845, -0.747214, -1.0),
        (0.852786, 0.029772, 1.0),
        (-1.970228, -1.147214, -1.0),
        (1.252786, -0.260845, 1.0),
        (-1.500000, -1.300000, -1.0),
        (1.747214, -0.260845, 1.0),
        (-1.029772, -1.147214, -1.0),
        (2.147214, 0.029772, 1.0),
        (-0.739155, -0.747214, -1.0),
    ];
    let mut x = Array2::<f64>::zeros((20, 2));
    let mut y = Vec::with_capacity(20);
    for (i, &(a, b, c)) in pts.iter().enumerate() {
        x[(i, 0)] = a;
        x[(i, 1)] = b;
        y.push(c);
    }
    (x, y)
}

// ---------------------------------------------------------------------------
// Shared experiment matrix for criteria 6–8.
// ---------------------------------------------------------------------------

fn matrix_cfg() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.seed = 42;
    cfg.n_train = 200;
    cfg.n_test = 100;
    cfg.data_dir = accept_dir().join("data");
    cfg.out_dir = accept_dir().join("out");
    cfg.cnn.epochs = CNN_EPOCHS;
    // Plain SGD without momentum diverges at the documented default rate of
    // 0.1 on these images; 0.01 trains stably (see the training histories).
    cfg.cnn.lr = 0.01;
    cfg
}

static MATRIX: OnceLock<Vec<ExperimentOutcome>> = OnceLock::new();

fn matrix() -> &'static [ExperimentOutcome] {
    MATRIX.get_or_init(|| {
        let cfg = matrix_cfg();
        if let Some(cached) = load_cached_matrix(&cfg) {
            return cached;
        }
        let outcomes = run_experiment(&cfg).expect("experiment matrix");
        cfg.save(&cfg.out_dir.join("acceptance_config.toml")).expect("stamp");
        outcomes
    })
}

/// Reload a previous matrix run from its CSV reports when the stamped
/// configuration matches the current one exactly.
fn load_cached_matrix(cfg: &ExperimentConfig) -> Option<Vec<ExperimentOutcome>> {
    let stamp = fs::read_to_string(cfg.out_dir.join("acceptance_config.toml")).ok()?;
    let current = toml::to_string_pretty(cfg).ok()?;
    if stamp != current {
        return None;
    }
    let mut accuracies = BTreeMap::new();
    let mut reader = csv::Reader::from_path(cfg.out_dir.join("metrics.csv")).ok()?;
    for row in reader.records() {
        let row = row.ok()?;
        accuracies.insert(
            (row[0].to_string(), row[1].to_string(), row[2].to_string()),
            row[3].parse::<f64>().ok()?,
        );
    }
    let mut outcomes = Vec::new();
    for case in &cfg.cases {
        for transform in &cfg.transforms {
            for classifier in &cfg.classifiers {
                let key = (case.clone(), transform.clone(), classifier.clone());
                let stored = *accuracies.get(&key)?;
                let path = cfg.out_dir.join(format!("confusion_{case}_{transform}_{classifier}.csv"));
                let mut reader = csv::Reader::from_path(path).ok()?;
                let mut confusion = [[0usize; 4]; 4];
                for (i, row) in reader.records().enumerate() {
                    let row = row.ok()?;
                    for j in 0..4 {
                        confusion[i][j] = row[j + 1].parse().ok()?;
                    }
                }
                let report = report_from_confusion(confusion)?;
                if (report.accuracy - stored).abs() > 1e-5 {
                    return None;
                }
                outcomes.push(ExperimentOutcome {
                    case_id: case.clone(),
                    transform: transform.clone(),
                    classifier: classifier.clone(),
                    report,
                    history: Default::default(),
                });
            }
        }
    }
    Some(outcomes)
}

fn report_from_confusion(confusion: [[usize; 4]; 4]) -> Option<EvalReport> {
    let total: usize = confusion.iter().flatten().sum();
    if total == 0 {
        return None;
    }
    let trace: usize = (0..4).map(|i| confusion[i][i]).sum();
    let mut precision = [0.0; 4];
    let mut recall = [0.0; 4];
    for k in 0..4 {
        let col: usize = (0..4).map(|i| confusion[i][k]).sum();
        let row: usize = confusion[k].iter().sum();
        precision[k] = if col > 0 { confusion[k][k] as f64 / col as f64 } else { 0.0 };
        recall[k] = if row > 0 { confusion[k][k] as f64 / row as f64 } else { 0.0 };
    }
    Some(EvalReport { accuracy: trace as f64 / total as f64, confusion, precision, recall })
}

fn cell<'a>(outcomes: &'a [ExperimentOutcome], case: &str, transform: &str, classifier: &str) -> &'a ExperimentOutcome {
    outcomes
        .iter()
        .find(|o| o.case_id == case && o.transform == transform && o.classifier == classifier)
        .unwrap_or_else(|| panic!("missing cell {case}/{transform}/{classifier}"))
}

// ---------------------------------------------------------------------------
// Criterion 6: scaled headline accuracy.
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_headline_accuracy() {
    let m = matrix();
    let c6 = cell(m, "C6", "gabor", "cnn").report.accuracy;
    let c2 = cell(m, "C2", "gabor", "cnn").report.accuracy;
    assert!(c6 >= 0.90, "C6 Gabor+CNN accuracy {c6}");
    assert!(c2 >= 0.85, "C2 Gabor+CNN accuracy {c2}");
    println!("criterion 6 PASS: Gabor+CNN accuracy C6 {c6:.3} (≥0.90), C2 {c2:.3} (≥0.85)");
}

// ---------------------------------------------------------------------------
// Criterion 7: relative ordering.
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_relative_ordering() {
    let m = matrix();
    let jammed = ["C2", "C3", "C4", "C5", "C6"];
    let mean = |transform: &str| {
        jammed.iter().map(|c| cell(m, c, transform, "cnn").report.accuracy).sum::<f64>() / 5.0
    };
    let gabor_mean = mean("gabor");
    let spec_mean = mean("spec");
    assert!(
        gabor_mean >= spec_mean,
        "CNN mean over C2–C6: gabor {gabor_mean:.3} < spectrogram {spec_mean:.3}"
    );
    for transform in ["spec", "cw", "gabor"] {
        for classifier in ["svm", "cnn"] {
            let c1 = cell(m, "C1", transform, classifier).report.accuracy;
            for case in jammed {
                let a = cell(m, case, transform, classifier).report.accuracy;
                assert!(
                    c1 <= a,
                    "{transform}/{classifier}: accuracy(C1)={c1:.3} exceeds {case}={a:.3}"
                );
            }
        }
    }
    println!(
        "criterion 7 PASS: CNN mean C2–C6 gabor {gabor_mean:.3} ≥ spec {spec_mean:.3}; C1 minimal for all pairs"
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: confusion structure.
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_confusion_structure() {
    let m = matrix();
    let mut worst = 0.0f64;
    for case in ["C2", "C3", "C4", "C5", "C6"] {
        let conf = cell(m, case, "gabor", "cnn").report.confusion;
        let jam_total: usize = (1..4).map(|i| conf[i].iter().sum::<usize>()).sum();
        let cross: usize = (1..4)
            .flat_map(|i| (1..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| conf[i][j])
            .sum();
        let frac = cross as f64 / jam_total as f64;
        assert!(frac <= 0.10, "{case}: {frac:.3} of jammer samples confused between jammer types");
        worst = worst.max(frac);
    }
    println!("criterion 8 PASS: Gabor+CNN inter-jammer confusion ≤ {worst:.3} across C2–C6");
}

// ---------------------------------------------------------------------------
// Criterion 9: determinism.
// ---------------------------------------------------------------------------

fn tree_bytes(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn criterion_9_determinism() {
    let run = |root: &Path| {
        let mut cfg = ExperimentConfig::default();
        cfg.seed = 9;
        cfg.cases = vec!["C6".into()];
        cfg.transforms = vec!["spec".into()];
        cfg.n_train = 4;
        cfg.n_test = 2;
        cfg.data_dir = root.join("data");
        cfg.out_dir = root.join("out");
        cfg.svm.pca_components = 8;
        cfg.svm.epochs = 30;
        cfg.cnn.epochs = 1;
        cfg.cnn.batch = 8;
        run_experiment(&cfg).unwrap();
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(a.path());
    run(b.path());
    let ta = tree_bytes(a.path());
    let tb = tree_bytes(b.path());
    let keys_a: Vec<_> = ta.keys().collect();
    let keys_b: Vec<_> = tb.keys().collect();
    assert_eq!(keys_a, keys_b, "file sets differ");
    let mut n_png = 0;
    for (path, bytes) in &ta {
        assert_eq!(bytes, &tb[path], "file {} differs between runs", path.display());
        if path.extension().is_some_and(|e| e == "png") {
            n_png += 1;
        }
    }
    assert!(n_png > 0 && ta.keys().any(|p| p.extension().is_some_and(|e| e == "bin")));
    println!(
        "criterion 9 PASS: two pipeline runs byte-identical over {} files ({n_png} PNGs)",
        ta.len()
    );
}
