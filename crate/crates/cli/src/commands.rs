use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use leafclass::dataset::{read_manifest_csv, write_manifest_csv};
use leafclass::error::ErrorKind;
use leafclass::metrics::{
    read_summary_csv, render_class_table, render_comparison, render_confusion,
    render_confusion_csv, render_confusion_svg, ClassRow,
};
use leafclass::nn::EpochStats;
use leafclass::workflow::{load_samples, predict_all};
use leafclass::{
    class_metrics, compare_models, confusion_matrix, generate_synthetic_corpus, micro_aggregate,
    one_vs_rest, scan_dataset, stratified_split, train as fit, Checkpoint, ConfusionMatrix,
    DatasetManifest, ModelConfig, PreprocessConfig, SplitSpec, SyntheticSpec,
};
use log::info;

use crate::config::{DataSource, RunConfig};
use crate::EvalArgs;

pub const EXIT_IO: u8 = 2;
pub const EXIT_INVALID: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

pub const CHECKPOINT_FILE: &str = "checkpoint.lpckpt";

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl Display) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: message.to_string(),
        }
    }

    pub(crate) fn usage(rendered: &str) -> Self {
        let text = rendered.trim();
        Failure::invalid(text.strip_prefix("error: ").unwrap_or(text))
    }
}

impl From<leafclass::Error> for Failure {
    fn from(e: leafclass::Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Io => EXIT_IO,
            ErrorKind::Validation => EXIT_INVALID,
            ErrorKind::Numeric => EXIT_NUMERIC,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| leafclass::Error::io_at(path, e).into())
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path).map_err(|e| leafclass::Error::io_at(path, e).into())
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| leafclass::Error::io_at(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    RunConfig::parse(&text, base).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn existing_manifest(path: &Path, what: &str) -> Result<DatasetManifest, Failure> {
    if !path.is_file() {
        return Err(Failure::invalid(format!(
            "{what} {} does not exist",
            path.display()
        )));
    }
    Ok(read_manifest_csv(path)?)
}

pub fn synth(spec: &SyntheticSpec, out: &Path) -> Result<(), Failure> {
    spec.validate()?;
    create_dir(out)?;
    let manifest = generate_synthetic_corpus(spec, out)?;
    let path = out.join("manifest.csv");
    write_manifest_csv(&manifest, &path)?;
    println!(
        "wrote {} images in {} classes; manifest {}",
        manifest.len(),
        manifest.num_classes(),
        path.display()
    );
    Ok(())
}

fn write_split(
    manifest: &DatasetManifest,
    spec: &SplitSpec,
    out: &Path,
) -> Result<(DatasetManifest, DatasetManifest), Failure> {
    let (train, test) = stratified_split(manifest, spec)?;
    create_dir(out)?;
    write_manifest_csv(&train, &out.join("train.csv"))?;
    write_manifest_csv(&test, &out.join("test.csv"))?;
    Ok((train, test))
}

pub fn split(
    manifest: Option<&Path>,
    root: Option<&Path>,
    spec: &SplitSpec,
    out: &Path,
) -> Result<(), Failure> {
    let source = match (manifest, root) {
        (Some(m), _) => read_manifest_csv(m)?,
        (None, Some(r)) => scan_dataset(r)?,
        (None, None) => return Err(Failure::invalid("either --manifest or --root is required")),
    };
    let (train, test) = write_split(&source, spec, out)?;
    println!(
        "{:<16} {:>6} {:>6} {:>6}",
        "class", "total", "train", "test"
    );
    for (c, name) in source.class_names().iter().enumerate() {
        println!(
            "{:<16} {:>6} {:>6} {:>6}",
            name,
            source.per_class_counts()[c],
            train.per_class_counts()[c],
            test.per_class_counts()[c]
        );
    }
    Ok(())
}

/// Training manifest, plus the test manifest path when one is known.
fn resolve_data(cfg: &RunConfig) -> Result<(DatasetManifest, Option<PathBuf>), Failure> {
    let out = &cfg.output_dir;
    match &cfg.data {
        DataSource::Manifest { train, test } => Ok((
            existing_manifest(train, "data.train_manifest")?,
            test.clone(),
        )),
        DataSource::Root(root) => {
            if !root.is_dir() {
                return Err(Failure::invalid(format!(
                    "data.root {} is not a directory",
                    root.display()
                )));
            }
            let (train, _) = write_split(&scan_dataset(root)?, &cfg.split, out)?;
            Ok((train, Some(out.join("test.csv"))))
        }
        DataSource::Synthetic(spec) => {
            let data = out.join("data");
            create_dir(&data)?;
            let corpus = generate_synthetic_corpus(spec, &data)?;
            write_manifest_csv(&corpus, &data.join("manifest.csv"))?;
            let (train, _) = write_split(&corpus, &cfg.split, out)?;
            Ok((train, Some(out.join("test.csv"))))
        }
    }
}

fn history_csv(history: &[EpochStats]) -> String {
    let mut s = String::from("epoch,loss,accuracy\n");
    for (i, e) in history.iter().enumerate() {
        s.push_str(&format!("{},{},{}\n", i + 1, e.loss, e.accuracy));
    }
    s
}

pub fn train(config: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<(), Failure> {
    let mut cfg = load_config(config)?;
    if let Some(seed) = seed {
        cfg.train.seed = seed;
    }
    if let Some(out) = out {
        cfg.output_dir = out.to_path_buf();
    }
    create_dir(&cfg.output_dir)?;
    let (manifest, test) = resolve_data(&cfg)?;
    let p = &cfg.preprocess;
    let model = ModelConfig::preset(
        &cfg.preset,
        p.target_height,
        p.target_width,
        manifest.num_classes(),
    )?;
    info!(
        "training {} ({} parameters) on {} images",
        cfg.model_name,
        model.parameter_count()?,
        manifest.len()
    );
    let samples = load_samples(&manifest, p)?;
    let mut checkpoint = fit(&model, &samples, &cfg.train)?;

    checkpoint.set_metadata("model.name", cfg.model_name.clone());
    for (c, name) in manifest.class_names().into_iter().enumerate() {
        checkpoint.set_metadata(&format!("class.{c}"), name);
    }
    checkpoint.set_metadata("preprocess.height", p.target_height.to_string());
    checkpoint.set_metadata("preprocess.width", p.target_width.to_string());
    checkpoint.set_metadata("preprocess.filter_kernel", p.filter_kernel.to_string());
    checkpoint.set_metadata("preprocess.n_min", p.n_min.to_string());
    checkpoint.set_metadata("preprocess.n_max", p.n_max.to_string());
    let path = cfg.output_dir.join(CHECKPOINT_FILE);
    checkpoint.save(&path)?;
    write(
        &cfg.output_dir.join("history.csv"),
        history_csv(&checkpoint.history),
    )?;

    let last = checkpoint.history.last().copied().unwrap_or(EpochStats {
        loss: f64::NAN,
        accuracy: 0.0,
    });
    println!(
        "trained {} epochs: loss {:.6}, train accuracy {:.4}; checkpoint {}",
        checkpoint.epoch,
        last.loss,
        last.accuracy,
        path.display()
    );
    if let Some(test) = test {
        println!("test manifest: {}", test.display());
    }
    Ok(())
}

fn preprocess_from(checkpoint: &Checkpoint) -> Result<PreprocessConfig, Failure> {
    let d = PreprocessConfig::default();
    let (h, w, _) = checkpoint.config.input_shape;
    fn field<T: std::str::FromStr>(ck: &Checkpoint, key: &str, default: T) -> Result<T, Failure> {
        match ck.metadata(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                Failure::invalid(format!("checkpoint metadata `{key}` = `{v}` is malformed"))
            }),
        }
    }
    let cfg = PreprocessConfig {
        target_height: field(checkpoint, "preprocess.height", h)?,
        target_width: field(checkpoint, "preprocess.width", w)?,
        filter_kernel: field(checkpoint, "preprocess.filter_kernel", d.filter_kernel)?,
        n_min: field(checkpoint, "preprocess.n_min", d.n_min)?,
        n_max: field(checkpoint, "preprocess.n_max", d.n_max)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn default_names(k: usize) -> Vec<String> {
    (0..k).map(|c| format!("class_{c}")).collect()
}

fn read_pairs(path: &Path) -> Result<Vec<(usize, usize)>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| leafclass::Error::io_at(path, e))?;
    let bad = |line: u64, m: &str| Failure::invalid(format!("{}:{line}: {m}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| bad(1, &e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["truth", "prediction"] {
        return Err(bad(1, "expected header `truth,prediction`"));
    }
    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let parse = |i: usize| {
            record[i]
                .parse::<usize>()
                .map_err(|_| bad(line, &format!("`{}` is not a class index", &record[i])))
        };
        pairs.push((parse(0)?, parse(1)?));
    }
    if pairs.is_empty() {
        return Err(bad(2, "no prediction rows"));
    }
    Ok(pairs)
}

/// Writes the full report set for one model and echoes the tables.
fn report(
    matrix: &ConfusionMatrix,
    names: &[String],
    model_name: &str,
    out: &Path,
) -> Result<(), Failure> {
    create_dir(out)?;
    let rows = (0..matrix.k())
        .map(|c| {
            let counts = one_vs_rest(matrix, c)?;
            Ok(ClassRow {
                name: names[c].clone(),
                counts,
                metrics: class_metrics(&counts)?,
            })
        })
        .collect::<leafclass::Result<Vec<_>>>()?;
    let classes = render_class_table(&rows);
    let summary = render_comparison(&[(model_name.to_string(), micro_aggregate(matrix)?)]);
    let confusion = render_confusion(matrix, names)?;

    write(&out.join("confusion.txt"), &confusion)?;
    write(
        &out.join("confusion.csv"),
        render_confusion_csv(matrix, names)?,
    )?;
    write(
        &out.join("confusion.svg"),
        render_confusion_svg(matrix, names)?,
    )?;
    write(&out.join("class_metrics.txt"), &classes.text)?;
    write(&out.join("class_metrics.csv"), &classes.csv)?;
    write(&out.join("summary.txt"), &summary.text)?;
    write(&out.join("summary.csv"), &summary.csv)?;
    print!("{confusion}\n{}\n{}", classes.text, summary.text);
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<(), Failure> {
    if let Some(pairs_path) = &args.inject_predictions {
        let out = args
            .out
            .as_deref()
            .ok_or_else(|| Failure::invalid("--out is required with --inject-predictions"))?;
        let pairs = read_pairs(pairs_path)?;
        let names = match &args.class_names {
            Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
            None => default_names(pairs.iter().map(|&(t, p)| t.max(p)).max().unwrap_or(0) + 1),
        };
        let (truths, preds): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let matrix = confusion_matrix(&truths, &preds, names.len())?;
        let model_name = args.model_name.as_deref().unwrap_or("model");
        return report(&matrix, &names, model_name, out);
    }

    let cfg = args.config.as_deref().map(load_config).transpose()?;
    let out = match (&args.out, &cfg) {
        (Some(o), _) => o.clone(),
        (None, Some(c)) => c.output_dir.clone(),
        (None, None) => return Err(Failure::invalid("--out or --config is required")),
    };
    let checkpoint_path = match (&args.checkpoint, &cfg) {
        (Some(p), _) => p.clone(),
        (None, Some(c)) => c.output_dir.join(CHECKPOINT_FILE),
        (None, None) => return Err(Failure::invalid("--checkpoint or --config is required")),
    };
    let manifest_path = match (&args.manifest, &cfg) {
        (Some(p), _) => p.clone(),
        (None, Some(c)) => match &c.data {
            DataSource::Manifest { test: Some(t), .. } => t.clone(),
            DataSource::Manifest { test: None, .. } => {
                return Err(Failure::invalid(
                    "data.test_manifest is not set; pass --manifest",
                ))
            }
            _ => c.output_dir.join("test.csv"),
        },
        (None, None) => return Err(Failure::invalid("--manifest or --config is required")),
    };

    let checkpoint = Checkpoint::load(&checkpoint_path)?;
    let manifest = existing_manifest(&manifest_path, "test manifest")?;
    let k = checkpoint.config.num_classes;
    if manifest.num_classes() != k {
        return Err(Failure::invalid(format!(
            "manifest has {} classes but the checkpoint predicts {k}",
            manifest.num_classes()
        )));
    }
    let names: Vec<String> = (0..k)
        .map(|c| {
            checkpoint
                .metadata(&format!("class.{c}"))
                .map(str::to_string)
                .unwrap_or_else(|| manifest.class_names()[c].clone())
        })
        .collect();
    let model_name = args
        .model_name
        .clone()
        .or_else(|| checkpoint.metadata("model.name").map(str::to_string))
        .unwrap_or_else(|| checkpoint.config.name.clone());

    let samples = load_samples(&manifest, &preprocess_from(&checkpoint)?)?;
    let predictions = predict_all(&checkpoint, &samples)?;
    let truths: Vec<usize> = samples.iter().map(|s| s.label).collect();
    let matrix = confusion_matrix(&truths, &predictions, k)?;

    let base = manifest_path.parent().unwrap_or(Path::new(""));
    let mut listing = String::from("path,truth,prediction\n");
    for (record, &pred) in manifest.records().iter().zip(&predictions) {
        let shown = record.path.strip_prefix(base).unwrap_or(&record.path);
        listing.push_str(&format!(
            "{},{},{}\n",
            shown.display(),
            names[record.label],
            names[pred]
        ));
    }
    create_dir(&out)?;
    write(&out.join("predictions.csv"), listing)?;
    report(&matrix, &names, &model_name, &out)
}

pub fn compare(summaries: &[PathBuf], out: Option<&Path>) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for path in summaries {
        let text = fs::read_to_string(path).map_err(|e| leafclass::Error::io_at(path, e))?;
        let parsed = read_summary_csv(&text)
            .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
        rows.extend(parsed);
    }
    if rows.is_empty() {
        return Err(Failure::invalid("no model rows to compare"));
    }
    let table = render_comparison(&compare_models(rows));
    print!("{}", table.text);
    if let Some(out) = out {
        create_dir(out)?;
        write(&out.join("comparison.txt"), &table.text)?;
        write(&out.join("comparison.csv"), &table.csv)?;
    }
    Ok(())
}
