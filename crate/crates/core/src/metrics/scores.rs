use super::{one_vs_rest, BinaryCounts, ConfusionMatrix};
use crate::error::{Error, Result};

/// The seven ratio columns of a per-class evaluation row, as fractions in
/// `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub f1: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub accuracy: f64,
}

impl ClassMetrics {
    /// Values in table column order.
    pub fn values(&self) -> [f64; 7] {
        [
            self.precision,
            self.f1,
            self.sensitivity,
            self.specificity,
            self.fpr,
            self.fnr,
            self.accuracy,
        ]
    }

    /// Two-decimal percentage strings in table column order.
    pub fn percent_cells(&self) -> [String; 7] {
        self.values()
            .map(|v| round_percent(v).expect("metric ratios lie in [0, 1]"))
    }
}

// 0/0 is defined as 0
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn class_metrics(c: &BinaryCounts) -> Result<ClassMetrics> {
    if c.total() == 0 {
        return Err(Error::EmptyCounts);
    }
    let precision = ratio(c.tp, c.tp + c.fp);
    let sensitivity = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + sensitivity == 0.0 {
        0.0
    } else {
        2.0 * precision * sensitivity / (precision + sensitivity)
    };
    Ok(ClassMetrics {
        precision,
        f1,
        sensitivity,
        specificity: ratio(c.tn, c.tn + c.fp),
        fpr: ratio(c.fp, c.fp + c.tn),
        fnr: ratio(c.fn_, c.fn_ + c.tp),
        accuracy: ratio(c.tp + c.tn, c.total()),
    })
}

/// Model-level row: one-vs-rest counts summed over classes, the seven ratios
/// recomputed from the sums, and plain multiclass accuracy (trace / N).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSummary {
    pub counts: BinaryCounts,
    pub metrics: ClassMetrics,
    /// Fraction of samples whose predicted class equals the true class. This
    /// is not the same number as `metrics.accuracy`, which counts true
    /// negatives over all one-vs-rest decompositions.
    pub multiclass_accuracy: f64,
    pub samples: u64,
}

pub fn micro_aggregate(matrix: &ConfusionMatrix) -> Result<ModelSummary> {
    let counts: BinaryCounts = (0..matrix.k())
        .map(|c| one_vs_rest(matrix, c))
        .sum::<Result<BinaryCounts>>()?;
    summary_from_counts(counts)
}

/// Rebuilds a summary from micro-summed counts. The sample count is
/// `tp + fn`, since every sample contributes one of the two for its true class.
pub fn summary_from_counts(counts: BinaryCounts) -> Result<ModelSummary> {
    let samples = counts.tp + counts.fn_;
    Ok(ModelSummary {
        counts,
        metrics: class_metrics(&counts)?,
        multiclass_accuracy: ratio(counts.tp, samples),
        samples,
    })
}

/// `100 * ratio` rounded half up to two decimals, e.g. `0.9` → `"90.00"`.
pub fn round_percent(ratio: f64) -> Result<String> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidRatio(ratio));
    }
    let hundredths = ratio * 10_000.0;
    // binary error on exact half-hundredths is far below 1e-9
    let rounded = (hundredths + 0.5 + 1e-9).floor() as u64;
    Ok(format!("{}.{:02}", rounded / 100, rounded % 100))
}
