//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use leafclass::dataset::{read_manifest_csv, train_count};
use leafclass::metrics::{
    read_class_csv, read_summary_csv, summary_from_counts, CLASS_CSV_HEADER, SUMMARY_CSV_HEADER,
};
use leafclass::nn::{gradient_check, gradient_check_with_fault, GradientFault};
use leafclass::preprocess::min_max_normalize;
use leafclass::rng::SeededRng;
use leafclass::{
    class_metrics, confusion_matrix, init_parameters, micro_aggregate, one_vs_rest,
    stratified_split, BinaryCounts, ConfusionMatrix, DatasetManifest, LabeledImage, LayerSpec,
    ModelConfig, SplitSpec, Tensor,
};

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

const CLASSES: [&str; 5] = ["Jute", "Malabar", "Red", "Taro", "Water"];

/// Published per-class rows: TP, TN, FP, FN, then precision, F1,
/// sensitivity, specificity, FPR, FNR, accuracy as printed.
type PublishedRow = ([u64; 4], [&'static str; 7]);

#[rustfmt::skip]
const PER_CLASS: [(&str, [PublishedRow; 5]); 4] = [
    ("InceptionV3", [
        ([135, 607, 0, 15], ["100", "94.74", "90.00", "100", "0", "10", "98.02"]),
        ([152, 603, 2, 0], ["98.70", "99.35", "100", "99.67", "0.33", "0", "99.74"]),
        ([152, 590, 15, 0], ["91.02", "95.30", "100", "97.52", "2.48", "0", "98.02"]),
        ([154, 601, 2, 0], ["98.72", "99.35", "100", "99.67", "0.33", "0", "99.74"]),
        ([139, 602, 6, 10], ["95.86", "94.56", "93.29", "99.01", "0.99", "6.71", "97.89"]),
    ]),
    ("Xception", [
        ([150, 599, 8, 0], ["94.94", "97.40", "100", "98.68", "1.32", "0", "98.94"]),
        ([150, 603, 2, 2], ["98.68", "98.68", "98.68", "99.67", "0.33", "1.32", "99.47"]),
        ([152, 601, 4, 0], ["97.44", "98.70", "100", "99.34", "0.66", "0", "99.47"]),
        ([154, 593, 10, 0], ["93.90", "96.86", "100", "98.34", "1.66", "0", "98.68"]),
        ([127, 608, 0, 22], ["100", "92.03", "85.23", "100", "0", "14.77", "97.10"]),
    ]),
    ("VGG19", [
        ([150, 605, 2, 0], ["98.68", "99.34", "100", "99.67", "0.33", "0", "99.74"]),
        ([150, 605, 0, 2], ["100", "99.34", "98.68", "100", "0", "1.32", "99.74"]),
        ([140, 605, 0, 12], ["100", "95.89", "92.11", "100", "0", "7.89", "98.41"]),
        ([154, 591, 12, 0], ["92.77", "96.25", "100", "98.01", "1.99", "0", "98.41"]),
        ([149, 608, 0, 0], ["100", "100", "100", "100", "0", "0", "100"]),
    ]),
    ("VGG16", [
        ([150, 605, 2, 0], ["98.68", "99.34", "100", "99.67", "0.33", "0", "99.74"]),
        ([148, 605, 0, 4], ["100", "98.67", "97.37", "100", "0", "2.63", "99.47"]),
        ([152, 605, 0, 0], ["100", "100", "100", "100", "0", "0", "100"]),
        ([154, 601, 2, 0], ["98.72", "99.35", "100", "99.67", "0.33", "0", "99.74"]),
        ([149, 608, 0, 0], ["100", "100", "100", "100", "0", "0", "100"]),
    ]),
];

#[rustfmt::skip]
const SUMMARY: [(&str, PublishedRow); 4] = [
    ("InceptionV3", ([732, 3003, 25, 25], ["96.70", "96.70", "96.70", "99.17", "0.83", "3.30", "98.68"])),
    ("Xception", ([733, 3004, 24, 24], ["96.83", "96.83", "96.83", "99.21", "0.79", "3.17", "98.73"])),
    ("VGG19", ([743, 3014, 14, 14], ["98.15", "98.15", "98.15", "99.54", "0.46", "1.85", "99.26"])),
    ("VGG16", ([753, 3024, 4, 4], ["99.47", "99.47", "99.47", "99.87", "0.13", "0.53", "99.79"])),
];

/// The published cells mix `100`, `0` and `90.00`; compare at two decimals.
fn two_decimals(cell: &str) -> String {
    format!("{:.2}", cell.parse::<f64>().expect("numeric cell"))
}

fn counts(c: [u64; 4]) -> BinaryCounts {
    BinaryCounts::new(c[0], c[1], c[2], c[3])
}

fn mismatches(label: &str, got: &[String], want: &[&str; 7], out: &mut Vec<String>) {
    const COLUMNS: [&str; 7] = [
        "precision",
        "f1",
        "sensitivity",
        "specificity",
        "fpr",
        "fnr",
        "accuracy",
    ];
    for j in 0..7 {
        let want = two_decimals(want[j]);
        if got[j] != want {
            out.push(format!(
                "{label} {}: computed {} but published {want}",
                COLUMNS[j], got[j]
            ));
        }
    }
}

fn golden_metric_replay() -> Outcome {
    let mut bad = Vec::new();
    for (model, rows) in PER_CLASS {
        for (class, (c, cells)) in CLASSES.iter().zip(rows) {
            let m = class_metrics(&counts(c)).map_err(|e| e.to_string())?;
            mismatches(
                &format!("{model}/{class}"),
                &m.percent_cells(),
                &cells,
                &mut bad,
            );
        }
    }
    if bad.is_empty() {
        Ok("20 rows x 7 cells match".into())
    } else {
        Err(bad.join("; "))
    }
}

fn golden_aggregation_replay() -> Outcome {
    let mut bad = Vec::new();
    for ((model, rows), (_, (total, cells))) in PER_CLASS.iter().zip(SUMMARY) {
        let summed: BinaryCounts = rows.iter().map(|(c, _)| counts(*c)).sum();
        if summed != counts(total) {
            bad.push(format!(
                "{model}: summed counts {summed:?} differ from {total:?}"
            ));
            continue;
        }
        let s = summary_from_counts(summed).map_err(|e| e.to_string())?;
        mismatches(model, &s.metrics.percent_cells(), &cells, &mut bad);
        let p = s.metrics.percent_cells();
        if p[0] != p[1] || p[1] != p[2] {
            bad.push(format!("{model}: precision/F1/sensitivity differ: {p:?}"));
        }
    }
    if bad.is_empty() {
        Ok("4 summary rows match".into())
    } else {
        Err(bad.join("; "))
    }
}

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_leafclass")
}

fn run(args: &[&str]) -> Result<String, String> {
    let out = Command::new(binary())
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "`leafclass {}` exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn vgg16_matrix() -> ConfusionMatrix {
    ConfusionMatrix::from_rows(vec![
        vec![150, 0, 0, 0, 0],
        vec![2, 148, 0, 2, 0],
        vec![0, 0, 152, 0, 0],
        vec![0, 0, 0, 154, 0],
        vec![0, 0, 0, 0, 149],
    ])
    .unwrap()
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn confusion_reconstruction() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let m = vgg16_matrix();
    let mut pairs = String::from("truth,prediction\n");
    for t in 0..5 {
        for p in 0..5 {
            for _ in 0..m.get(t, p) {
                pairs.push_str(&format!("{t},{p}\n"));
            }
        }
    }
    let pairs_path = dir.path().join("pairs.csv");
    fs::write(&pairs_path, pairs).map_err(|e| e.to_string())?;
    let out = dir.path().join("eval");
    run(&[
        "eval",
        "--inject-predictions",
        pairs_path.to_str().unwrap(),
        "--class-names",
        &CLASSES.join(","),
        "--model-name",
        "VGG16",
        "--out",
        out.to_str().unwrap(),
    ])?;

    let mut bad = Vec::new();
    let records =
        read_class_csv(&read(&out.join("class_metrics.csv"))?).map_err(|e| e.to_string())?;
    let (_, table5) = PER_CLASS[3];
    if records.len() != 5 {
        return Err(format!("expected 5 class rows, got {}", records.len()));
    }
    for (r, (c, cells)) in records.iter().zip(table5) {
        if r.counts != counts(c) {
            bad.push(format!(
                "{}: counts {:?}, published {c:?}",
                r.category, r.counts
            ));
        }
        mismatches(&r.category, &r.cells, &cells, &mut bad);
    }
    let summary = read_summary_csv(&read(&out.join("summary.csv"))?).map_err(|e| e.to_string())?;
    let (_, (total, cells)) = SUMMARY[3];
    match &summary[..] {
        [(name, s)] if name == "VGG16" => {
            if s.counts != counts(total) {
                bad.push(format!(
                    "summary counts {:?}, published {total:?}",
                    s.counts
                ));
            }
            mismatches("summary", &s.metrics.percent_cells(), &cells, &mut bad);
        }
        other => bad.push(format!("unexpected summary rows {other:?}")),
    }
    if bad.is_empty() {
        Ok("per-class rows and the VGG16 summary rebuilt through the CLI".into())
    } else {
        Err(bad.join("; "))
    }
}

fn split_replay() -> Outcome {
    let totals = [750usize, 758, 761, 772, 744];
    let names = CLASSES.iter().map(|s| s.to_string()).collect();
    let records = totals
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| {
            (0..n).map(move |i| LabeledImage {
                path: PathBuf::from(format!("{c}/{i}.png")),
                label: c,
            })
        })
        .collect();
    let manifest = DatasetManifest::new(names, records).map_err(|e| e.to_string())?;
    let (train, test) = stratified_split(
        &manifest,
        &SplitSpec {
            train_fraction: 0.8,
            seed: 0,
        },
    )
    .map_err(|e| e.to_string())?;
    let want_train = [600, 606, 609, 618, 595];
    let want_test = [150, 152, 152, 154, 149];
    if train.per_class_counts() != want_train || test.per_class_counts() != want_test {
        return Err(format!(
            "train {:?} test {:?}",
            train.per_class_counts(),
            test.per_class_counts()
        ));
    }
    if totals
        .iter()
        .map(|&n| train_count(n, 0.8))
        .collect::<Vec<_>>()
        != want_train
    {
        return Err("train_count disagrees with the split".into());
    }
    Ok(format!("train {want_train:?}, test {want_test:?}"))
}

fn normalization_properties() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut rng = SeededRng::new(5);
    for case in 0..1000 {
        let n = 2 + rng.below(200) as usize;
        let scale = rng.uniform(0.1, 300.0);
        let x: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0) * scale).collect();
        let n_min = rng.uniform(-2.0, 1.0);
        let n_max = n_min + rng.uniform(0.1, 3.0);
        let y = min_max_normalize(&x, n_min, n_max).map_err(|e| e.to_string())?;
        let (lo, hi) = x
            .iter()
            .fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        for (&xi, &yi) in x.iter().zip(&y) {
            if xi == lo && (yi - n_min).abs() > TOL {
                return Err(format!("case {case}: min maps to {yi}, expected {n_min}"));
            }
            if xi == hi && (yi - n_max).abs() > TOL {
                return Err(format!("case {case}: max maps to {yi}, expected {n_max}"));
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        if order.windows(2).any(|w| y[w[0]] > y[w[1]]) {
            return Err(format!("case {case}: not monotone"));
        }
        let a = rng.uniform(0.01, 50.0);
        let b = rng.uniform(-100.0, 100.0);
        let shifted: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let z = min_max_normalize(&shifted, n_min, n_max).map_err(|e| e.to_string())?;
        let worst = y
            .iter()
            .zip(&z)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        if worst > TOL {
            return Err(format!("case {case}: affine image differs by {worst:e}"));
        }
        let constant = vec![x[0]; n];
        let c = min_max_normalize(&constant, n_min, n_max).map_err(|e| e.to_string())?;
        if c.iter().any(|&v| v != n_min) {
            return Err(format!("case {case}: constant input not mapped to n_min"));
        }
    }
    Ok("1000 random tensors".into())
}

fn random_layers(rng: &mut SeededRng, shape: (usize, usize, usize), k: usize) -> Vec<LayerSpec> {
    let mut layers = Vec::new();
    let (mut h, mut w) = (shape.0, shape.1);
    for _ in 0..1 + rng.below(2) {
        let kernel = [1, 3][rng.below(2) as usize];
        let stride = 1 + rng.below(2) as usize;
        let padding = if kernel == 3 {
            rng.below(2) as usize
        } else {
            0
        };
        if h + 2 * padding < kernel || w + 2 * padding < kernel {
            break;
        }
        layers.push(LayerSpec::conv(
            1 + rng.below(3) as usize,
            kernel,
            stride,
            padding,
        ));
        h = (h + 2 * padding - kernel) / stride + 1;
        w = (w + 2 * padding - kernel) / stride + 1;
        if rng.below(2) == 0 {
            layers.push(LayerSpec::Relu);
        }
        if h >= 2 && w >= 2 && rng.below(2) == 0 {
            let stride = 1 + rng.below(2) as usize;
            layers.push(LayerSpec::pool(2, stride));
            h = (h - 2) / stride + 1;
            w = (w - 2) / stride + 1;
        }
    }
    layers.push(LayerSpec::Flatten);
    if rng.below(2) == 0 {
        layers.push(LayerSpec::dense(2 + rng.below(4) as usize));
        layers.push(LayerSpec::Relu);
    }
    layers.push(LayerSpec::dense(k));
    layers.push(LayerSpec::Softmax);
    layers
}

fn gradient_verification() -> Outcome {
    const EPS: f64 = 1e-5;
    let mut rng = SeededRng::new(2024);
    let mut seen = std::collections::BTreeSet::new();
    let mut worst: f64 = 0.0;
    let configs = 24;
    for case in 0..configs {
        let shape = (
            3 + rng.below(4) as usize,
            3 + rng.below(4) as usize,
            1 + rng.below(3) as usize,
        );
        let k = 2 + rng.below(3) as usize;
        let config = ModelConfig {
            name: format!("case{case}"),
            input_shape: shape,
            layers: random_layers(&mut rng, shape, k),
            num_classes: k,
        };
        config.shapes().map_err(|e| format!("case {case}: {e}"))?;
        seen.extend(config.layers.iter().map(LayerSpec::kind));
        let mut ck = init_parameters(&config, case).map_err(|e| e.to_string())?;
        // Zero biases behind a dead ReLU put later units exactly on the kink,
        // where the one-sided derivative and central differences disagree.
        let param_shapes = config.param_shapes().map_err(|e| e.to_string())?;
        for (params, ps) in ck.parameters.iter_mut().zip(&param_shapes) {
            params[ps.weights..]
                .iter_mut()
                .for_each(|b| *b = rng.uniform(-0.5, 0.5));
        }
        let n = shape.0 * shape.1 * shape.2;
        let input = Tensor::from_vec(
            vec![shape.0, shape.1, shape.2],
            (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect(),
        )
        .unwrap();
        let target = rng.below(k as u64) as usize;
        let err = gradient_check(&ck, &input, target, EPS).map_err(|e| e.to_string())?;
        if err >= 1e-4 {
            return Err(format!(
                "case {case} ({:?}): relative error {err:e}",
                config.layers
            ));
        }
        worst = worst.max(err);
    }
    if seen.len() != 6 {
        return Err(format!("layer kinds covered: {seen:?}"));
    }

    let config = ModelConfig {
        name: "fault".into(),
        input_shape: (4, 4, 2),
        layers: vec![
            LayerSpec::conv(3, 3, 1, 1),
            LayerSpec::Relu,
            LayerSpec::pool(2, 2),
            LayerSpec::Flatten,
            LayerSpec::dense(3),
            LayerSpec::Softmax,
        ],
        num_classes: 3,
    };
    let ck = init_parameters(&config, 9).map_err(|e| e.to_string())?;
    let input = Tensor::from_vec(
        vec![4, 4, 2],
        (0..32).map(|_| rng.uniform(-1.0, 1.0)).collect(),
    )
    .unwrap();
    let faulty =
        gradient_check_with_fault(&ck, &input, 1, EPS, GradientFault::FlipSign { layer: 0 })
            .map_err(|e| e.to_string())?;
    if faulty <= 0.1 {
        return Err(format!("sign-flipped backward pass only reached {faulty}"));
    }
    Ok(format!(
        "{configs} configs, worst {worst:.2e}; fault run {faulty:.2}"
    ))
}

/// Artifacts compared byte for byte between two identical runs.
const RUN_FILES: [&str; 10] = [
    "checkpoint.lpckpt",
    "history.csv",
    "predictions.csv",
    "confusion.txt",
    "confusion.csv",
    "confusion.svg",
    "class_metrics.txt",
    "class_metrics.csv",
    "summary.txt",
    "summary.csv",
];

/// synth -> split -> train -> eval in `root`; returns the run directory.
fn desk_run(root: &Path) -> Result<PathBuf, String> {
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let corpus = root.join("corpus");
    let splits = root.join("splits");
    run(&[
        "synth",
        "--out",
        &s(&corpus),
        "--classes",
        "5",
        "--per-class",
        "200",
        "--height",
        "32",
        "--width",
        "32",
        "--seed",
        "7",
    ])?;
    run(&[
        "split",
        "--manifest",
        &s(&corpus.join("manifest.csv")),
        "--fraction",
        "0.8",
        "--seed",
        "0",
        "--out",
        &s(&splits),
    ])?;
    let config = root.join("run.conf");
    fs::write(
        &config,
        "data.train_manifest = splits/train.csv\n\
         data.test_manifest = splits/test.csv\n\
         model.preset = mini_vgg\n\
         model.name = MiniVGG\n\
         preprocess.height = 32\n\
         preprocess.width = 32\n\
         train.epochs = 15\n\
         output.dir = run\n",
    )
    .map_err(|e| e.to_string())?;
    run(&["train", "--config", &s(&config), "--seed", "42"])?;
    run(&["eval", "--config", &s(&config)])?;
    Ok(root.join("run"))
}

fn check_tables(run_dir: &Path, test_size: u64) -> Result<f64, String> {
    let class_csv = read(&run_dir.join("class_metrics.csv"))?;
    let summary_csv = read(&run_dir.join("summary.csv"))?;
    if class_csv.lines().next() != Some(&CLASS_CSV_HEADER.join(",")) {
        return Err("class_metrics.csv header".into());
    }
    if summary_csv.lines().next() != Some(&SUMMARY_CSV_HEADER.join(",")) {
        return Err("summary.csv header".into());
    }
    let classes = read_class_csv(&class_csv).map_err(|e| e.to_string())?;
    let summary = read_summary_csv(&summary_csv).map_err(|e| e.to_string())?;
    let [(_, s)] = &summary[..] else {
        return Err("summary.csv must hold one row".into());
    };
    let k = classes.len() as u64;
    if k != 5 {
        return Err(format!("{k} class rows"));
    }
    for r in &classes {
        if r.counts.total() != test_size {
            return Err(format!(
                "{}: counts sum to {}",
                r.category,
                r.counts.total()
            ));
        }
        let expect = class_metrics(&r.counts)
            .map_err(|e| e.to_string())?
            .percent_cells();
        if expect != r.cells {
            return Err(format!("{}: cells disagree with counts", r.category));
        }
    }
    let summed: BinaryCounts = classes.iter().map(|r| r.counts).sum();
    let errors = test_size - (s.multiclass_accuracy * test_size as f64).round() as u64;
    if summed != s.counts || summed.fp != summed.fn_ || summed.fp != errors {
        return Err(format!(
            "summed counts {summed:?} vs summary {:?}",
            s.counts
        ));
    }
    if summed.tn != test_size * (k - 1) - errors {
        return Err("summed tn violates N(k-1) - errors".into());
    }
    let confusion = read(&run_dir.join("confusion.csv"))?;
    let cells: u64 = confusion
        .lines()
        .skip(1)
        .flat_map(|l| {
            l.split(',')
                .skip(1)
                .map(|v| v.parse::<u64>().unwrap_or(0))
                .collect::<Vec<_>>()
        })
        .sum();
    if cells != test_size {
        return Err(format!("confusion.csv holds {cells} predictions"));
    }
    let svg = read(&run_dir.join("confusion.svg"))?;
    if svg.matches("class=\"cell\"").count() != 25 {
        return Err("confusion.svg must draw 25 cells".into());
    }
    let history = read(&run_dir.join("history.csv"))?;
    if history.lines().count() != 16 {
        return Err("history.csv must hold 15 epochs".into());
    }
    Ok(s.multiclass_accuracy)
}

fn desk_scale(first: &Path) -> Outcome {
    let start = Instant::now();
    let run_dir = desk_run(first)?;
    let test = read_manifest_csv(&first.join("splits/test.csv")).map_err(|e| e.to_string())?;
    let accuracy = check_tables(&run_dir, test.len() as u64)?;
    let elapsed = start.elapsed().as_secs_f64();
    if accuracy < 0.95 {
        return Err(format!(
            "test multiclass accuracy {:.2}% < 95%",
            accuracy * 100.0
        ));
    }
    Ok(format!(
        "test multiclass accuracy {:.2}% in {elapsed:.1}s",
        accuracy * 100.0
    ))
}

fn determinism(first: &Path, second: &Path) -> Outcome {
    let a = first.join("run");
    if !a.join("summary.csv").is_file() {
        return Err("criterion 7 did not produce a run to compare against".into());
    }
    let b = desk_run(second)?;
    for name in RUN_FILES {
        if fs::read(a.join(name)).map_err(|e| e.to_string())?
            != fs::read(b.join(name)).map_err(|e| e.to_string())?
        {
            return Err(format!("{name} differs between runs"));
        }
    }
    Ok(format!("{} files byte-identical", RUN_FILES.len()))
}

fn conservation() -> Outcome {
    let mut rng = SeededRng::new(99);
    for case in 0..1000 {
        let k = 2 + rng.below(9) as usize;
        let n = 1 + rng.below(400) as usize;
        let bias = rng.unit();
        let truths: Vec<usize> = (0..n).map(|_| rng.below(k as u64) as usize).collect();
        let preds: Vec<usize> = truths
            .iter()
            .map(|&t| {
                if rng.unit() < bias {
                    t
                } else {
                    rng.below(k as u64) as usize
                }
            })
            .collect();
        let m = confusion_matrix(&truths, &preds, k).map_err(|e| e.to_string())?;
        let (n, trace) = (n as u64, m.trace());
        let mut sum = BinaryCounts::default();
        for c in 0..k {
            let b = one_vs_rest(&m, c).map_err(|e| e.to_string())?;
            if b.total() != n {
                return Err(format!(
                    "case {case} class {c}: tp+tn+fp+fn = {}",
                    b.total()
                ));
            }
            let r = class_metrics(&b).map_err(|e| e.to_string())?;
            if b.tn + b.fp > 0 && (r.fpr + r.specificity - 1.0).abs() > 1e-12 {
                return Err(format!("case {case} class {c}: fpr + specificity != 1"));
            }
            if b.tp + b.fn_ > 0 && (r.fnr + r.sensitivity - 1.0).abs() > 1e-12 {
                return Err(format!("case {case} class {c}: fnr + sensitivity != 1"));
            }
            sum = sum + b;
        }
        let k = k as u64;
        if sum.fp != n - trace || sum.fn_ != n - trace || sum.tn != n * (k - 1) - (n - trace) {
            return Err(format!(
                "case {case}: summed counts {sum:?}, N {n}, trace {trace}"
            ));
        }
        let micro = micro_aggregate(&m).map_err(|e| e.to_string())?;
        if micro.counts != sum {
            return Err(format!("case {case}: micro_aggregate disagrees"));
        }
    }
    Ok("1000 random matrices".into())
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let (first, second) = (dir.path().join("first"), dir.path().join("second"));
    fs::create_dir_all(&first).unwrap();
    fs::create_dir_all(&second).unwrap();

    let criteria: Vec<(&str, Check)> = vec![
        ("golden metric replay", Box::new(golden_metric_replay)),
        (
            "golden aggregation replay",
            Box::new(golden_aggregation_replay),
        ),
        (
            "confusion-matrix reconstruction",
            Box::new(confusion_reconstruction),
        ),
        ("split replay", Box::new(split_replay)),
        (
            "normalization properties",
            Box::new(normalization_properties),
        ),
        ("gradient verification", Box::new(gradient_verification)),
        ("desk-scale end-to-end", Box::new(|| desk_scale(&first))),
        ("determinism", Box::new(|| determinism(&first, &second))),
        ("conservation suite", Box::new(conservation)),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome =
            panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
