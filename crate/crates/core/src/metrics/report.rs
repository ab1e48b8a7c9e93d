use std::cmp::Ordering;
use std::fmt::Write as _;

use super::{summary_from_counts, BinaryCounts, ClassMetrics, ConfusionMatrix, ModelSummary};
use crate::error::{Error, Result};

pub const CLASS_CSV_HEADER: [&str; 12] = [
    "category",
    "tp",
    "tn",
    "fp",
    "fn",
    "precision",
    "f1",
    "sensitivity",
    "specificity",
    "fpr",
    "fnr",
    "accuracy",
];

pub const SUMMARY_CSV_HEADER: [&str; 13] = [
    "model",
    "tp",
    "tn",
    "fp",
    "fn",
    "precision",
    "f1",
    "sensitivity",
    "specificity",
    "fpr",
    "fnr",
    "accuracy",
    "multiclass_accuracy",
];

const METRIC_TITLES: [&str; 7] = [
    "Precision (%)",
    "F1 (%)",
    "Sensitivity (%)",
    "Specificity (%)",
    "FPR (%)",
    "FNR (%)",
    "Accuracy (%)",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ClassRow {
    pub name: String,
    pub counts: BinaryCounts,
    pub metrics: ClassMetrics,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTable {
    pub text: String,
    pub csv: String,
}

/// A parsed row of the per-class CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTableRecord {
    pub category: String,
    pub counts: BinaryCounts,
    pub cells: [String; 7],
}

fn count_cells(c: &BinaryCounts) -> [String; 4] {
    [c.tp, c.tn, c.fp, c.fn_].map(|v| v.to_string())
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("UTF-8 input")
}

/// Left-aligned first column, right-aligned numeric columns.
fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].chars().count())
                .chain([header[c].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                write!(line, "{cell:<w$}", w = widths[0]).unwrap();
            } else {
                write!(line, "  {cell:>w$}", w = widths[c]).unwrap();
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Per-class table in the column order category, TP, TN, FP, FN, Precision,
/// F1, Sensitivity, Specificity, FPR, FNR, Accuracy.
pub fn render_class_table(rows: &[ClassRow]) -> ClassTable {
    let mut header: Vec<String> = ["Category", "TP", "TN", "FP", "FN"]
        .map(String::from)
        .to_vec();
    header.extend(METRIC_TITLES.map(String::from));
    let mut csv = csv_writer();
    csv.write_record(CLASS_CSV_HEADER).expect("in-memory write");
    let mut body = Vec::with_capacity(rows.len());
    for r in rows {
        let mut cells = vec![r.name.clone()];
        cells.extend(count_cells(&r.counts));
        cells.extend(r.metrics.percent_cells());
        csv.write_record(&cells).expect("in-memory write");
        body.push(cells);
    }
    ClassTable {
        text: aligned(&header, &body),
        csv: finish_csv(csv),
    }
}

fn parse_count(s: &str, line: u64, col: &str) -> Result<u64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Table(format!("line {line}: `{col}` value `{s}` is not a count")))
}

fn check_percent(s: &str, line: u64, col: &str) -> Result<()> {
    let ok = s.split_once('.').is_some_and(|(i, f)| {
        !i.is_empty() && f.len() == 2 && i.bytes().chain(f.bytes()).all(|b| b.is_ascii_digit())
    });
    if ok {
        Ok(())
    } else {
        Err(Error::Table(format!(
            "line {line}: `{col}` value `{s}` is not a two-decimal percentage"
        )))
    }
}

fn read_rows(text: &str, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let got = reader.headers().map_err(|e| Error::Table(e.to_string()))?;
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::Table(format!(
            "expected header `{}`",
            header.join(",")
        )));
    }
    reader
        .records()
        .map(|r| {
            let r = r.map_err(|e| Error::Table(e.to_string()))?;
            Ok((r.position().map_or(0, |p| p.line()), r))
        })
        .collect()
}

pub fn read_class_csv(text: &str) -> Result<Vec<ClassTableRecord>> {
    read_rows(text, &CLASS_CSV_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            let n = |i: usize| parse_count(&r[i], line, CLASS_CSV_HEADER[i]);
            let counts = BinaryCounts::new(n(1)?, n(2)?, n(3)?, n(4)?);
            let mut cells: [String; 7] = Default::default();
            for (j, cell) in cells.iter_mut().enumerate() {
                check_percent(&r[5 + j], line, CLASS_CSV_HEADER[5 + j])?;
                *cell = r[5 + j].to_string();
            }
            Ok(ClassTableRecord {
                category: r[0].to_string(),
                counts,
                cells,
            })
        })
        .collect()
}

/// Text grid with predicted labels across the top and true labels down the
/// side.
pub fn render_confusion(matrix: &ConfusionMatrix, names: &[String]) -> Result<String> {
    check_names(matrix, names)?;
    let mut header = vec!["truth \\ predicted".to_string()];
    header.extend(names.iter().cloned());
    let rows: Vec<Vec<String>> = (0..matrix.k())
        .map(|t| {
            std::iter::once(names[t].clone())
                .chain(matrix.row(t).iter().map(u64::to_string))
                .collect()
        })
        .collect();
    Ok(aligned(&header, &rows))
}

/// Rows are true classes, columns predicted classes.
pub fn render_confusion_csv(matrix: &ConfusionMatrix, names: &[String]) -> Result<String> {
    check_names(matrix, names)?;
    let mut w = csv_writer();
    let mut header = vec!["truth".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (t, name) in names.iter().enumerate() {
        let mut row = vec![name.clone()];
        row.extend(matrix.row(t).iter().map(u64::to_string));
        w.write_record(&row).expect("in-memory write");
    }
    Ok(finish_csv(w))
}

fn check_names(matrix: &ConfusionMatrix, names: &[String]) -> Result<()> {
    if names.len() != matrix.k() {
        return Err(Error::Table(format!(
            "{} class names for a {}-class matrix",
            names.len(),
            matrix.k()
        )));
    }
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Heatmap: one `rect` per cell (class `cell`, `data-truth`/`data-predicted`
/// attributes) shaded from white to blue by count relative to the largest
/// cell, with the count printed on top.
pub fn render_confusion_svg(matrix: &ConfusionMatrix, names: &[String]) -> Result<String> {
    check_names(matrix, names)?;
    const CELL: usize = 60;
    const MARGIN: usize = 120;
    let k = matrix.k();
    let size = MARGIN + k * CELL + 20;
    let max = (0..k)
        .flat_map(|t| matrix.row(t).iter().copied())
        .max()
        .unwrap_or(0)
        .max(1);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{size}" height="{size}" fill="white"/>"#).unwrap();
    for t in 0..k {
        for p in 0..k {
            let v = matrix.get(t, p);
            let shade = v as f64 / max as f64;
            let level = |full: f64| (255.0 - (255.0 - full) * shade).round() as u8;
            let (r, g, b) = (level(8.0), level(48.0), level(107.0));
            let (x, y) = (MARGIN + p * CELL, MARGIN + t * CELL);
            let text = if shade > 0.5 { "white" } else { "black" };
            writeln!(
                s,
                r##"<rect class="cell" data-truth="{t}" data-predicted="{p}" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="#{r:02x}{g:02x}{b:02x}" stroke="#cccccc"/>"##
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" fill="{text}">{v}</text>"#,
                x + CELL / 2,
                y + CELL / 2
            )
            .unwrap();
        }
    }
    for (i, name) in names.iter().enumerate() {
        let name = xml_escape(name);
        let c = MARGIN + i * CELL + CELL / 2;
        writeln!(
            s,
            r#"<text x="{c}" y="{}" text-anchor="middle">{name}</text>"#,
            MARGIN - 8
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{c}" text-anchor="end" dominant-baseline="middle">{name}</text>"#,
            MARGIN - 8
        )
        .unwrap();
    }
    let mid = MARGIN + k * CELL / 2;
    writeln!(
        s,
        r#"<text x="{mid}" y="20" text-anchor="middle" font-weight="bold">Predicted label</text>"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="20" y="{mid}" text-anchor="middle" font-weight="bold" transform="rotate(-90 20 {mid})">True label</text>"#
    )
    .unwrap();
    s.push_str("</svg>\n");
    Ok(s)
}

fn micro_accuracy_cmp(a: &ModelSummary, b: &ModelSummary) -> Ordering {
    let (na, da) = (
        (a.counts.tp + a.counts.tn) as u128,
        a.counts.total() as u128,
    );
    let (nb, db) = (
        (b.counts.tp + b.counts.tn) as u128,
        b.counts.total() as u128,
    );
    (na * db).cmp(&(nb * da))
}

/// Sorts by one-vs-rest micro accuracy, best first; equal accuracies are
/// ordered by name.
pub fn compare_models(mut summaries: Vec<(String, ModelSummary)>) -> Vec<(String, ModelSummary)> {
    summaries.sort_by(|(na, a), (nb, b)| micro_accuracy_cmp(b, a).then_with(|| na.cmp(nb)));
    summaries
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonTable {
    pub text: String,
    pub csv: String,
}

/// Model-level table: summed counts, the seven ratios, and multiclass
/// accuracy. Rows are printed in the given order.
pub fn render_comparison(rows: &[(String, ModelSummary)]) -> ComparisonTable {
    let mut header: Vec<String> = ["Model", "TP", "TN", "FP", "FN"].map(String::from).to_vec();
    header.extend(METRIC_TITLES.map(String::from));
    header.push("Multiclass accuracy (%)".into());
    let mut csv = csv_writer();
    csv.write_record(SUMMARY_CSV_HEADER)
        .expect("in-memory write");
    let mut body = Vec::new();
    for (name, s) in rows {
        let mut cells = vec![name.clone()];
        cells.extend(count_cells(&s.counts));
        cells.extend(s.metrics.percent_cells());
        cells.push(super::round_percent(s.multiclass_accuracy).expect("ratio in [0, 1]"));
        csv.write_record(&cells).expect("in-memory write");
        body.push(cells);
    }
    ComparisonTable {
        text: aligned(&header, &body),
        csv: finish_csv(csv),
    }
}

/// Parses summary rows and rebuilds each [`ModelSummary`] from its counts.
/// Percentage cells must agree with the recomputed values.
pub fn read_summary_csv(text: &str) -> Result<Vec<(String, ModelSummary)>> {
    read_rows(text, &SUMMARY_CSV_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            let n = |i: usize| parse_count(&r[i], line, SUMMARY_CSV_HEADER[i]);
            let counts = BinaryCounts::new(n(1)?, n(2)?, n(3)?, n(4)?);
            if counts.fp != counts.fn_ {
                return Err(Error::Table(format!(
                    "line {line}: summed fp ({}) and fn ({}) must be equal",
                    counts.fp, counts.fn_
                )));
            }
            let summary = summary_from_counts(counts)
                .map_err(|e| Error::Table(format!("line {line}: {e}")))?;
            let mut expect = summary.metrics.percent_cells().to_vec();
            expect.push(super::round_percent(summary.multiclass_accuracy)?);
            for (j, want) in expect.iter().enumerate() {
                let col = SUMMARY_CSV_HEADER[5 + j];
                check_percent(&r[5 + j], line, col)?;
                if &r[5 + j] != want {
                    return Err(Error::Table(format!(
                        "line {line}: `{col}` is {} but the counts give {want}",
                        &r[5 + j]
                    )));
                }
            }
            Ok((r[0].to_string(), summary))
        })
        .collect()
}
