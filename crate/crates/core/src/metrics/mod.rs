//! Confusion matrices, one-vs-rest decomposition, the per-class metric
//! battery, micro-aggregated model summaries and their tabular renderings.
//!
//! Matrices are stored row = truth, column = prediction, and every rendering
//! keeps that orientation: predictions across, truths down.

mod confusion;
mod report;
mod scores;

pub use self::confusion::{confusion_matrix, one_vs_rest, BinaryCounts, ConfusionMatrix};
pub use self::report::{
    compare_models, read_class_csv, read_summary_csv, render_class_table, render_comparison,
    render_confusion, render_confusion_csv, render_confusion_svg, ClassRow, ClassTable,
    ClassTableRecord, ComparisonTable, CLASS_CSV_HEADER, SUMMARY_CSV_HEADER,
};
pub use self::scores::{
    class_metrics, micro_aggregate, round_percent, summary_from_counts, ClassMetrics, ModelSummary,
};
