use crate::error::{Error, Result};

/// `k`×`k` tally, `counts[truth][prediction]`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::Table(
                "confusion matrix must be square and non-empty".into(),
            ));
        }
        Ok(ConfusionMatrix {
            k,
            counts: rows.into_iter().flatten().collect(),
        })
    }

    pub fn zeros(k: usize) -> Self {
        ConfusionMatrix {
            k,
            counts: vec![0; k * k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, truth: usize, prediction: usize) -> u64 {
        self.counts[truth * self.k + prediction]
    }

    pub fn add(&mut self, truth: usize, prediction: usize) {
        self.counts[truth * self.k + prediction] += 1;
    }

    pub fn row(&self, truth: usize) -> &[u64] {
        &self.counts[truth * self.k..(truth + 1) * self.k]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|i| self.get(i, i)).sum()
    }

    /// Samples per true class.
    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.k).map(|t| self.row(t).iter().sum()).collect()
    }

    /// Samples per predicted class.
    pub fn column_sums(&self) -> Vec<u64> {
        (0..self.k)
            .map(|p| (0..self.k).map(|t| self.get(t, p)).sum())
            .collect()
    }
}

pub fn confusion_matrix(
    truths: &[usize],
    predictions: &[usize],
    k: usize,
) -> Result<ConfusionMatrix> {
    if truths.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            truths: truths.len(),
            predictions: predictions.len(),
        });
    }
    if truths.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut m = ConfusionMatrix::zeros(k);
    for (&t, &p) in truths.iter().zip(predictions) {
        for label in [t, p] {
            if label >= k {
                return Err(Error::InvalidLabel { label, k });
            }
        }
        m.add(t, p);
    }
    Ok(m)
}

/// Binary outcome counts for one class treated as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BinaryCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl BinaryCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        BinaryCounts { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

impl std::ops::Add for BinaryCounts {
    type Output = BinaryCounts;

    fn add(self, o: BinaryCounts) -> BinaryCounts {
        BinaryCounts {
            tp: self.tp + o.tp,
            tn: self.tn + o.tn,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl std::iter::Sum for BinaryCounts {
    fn sum<I: Iterator<Item = BinaryCounts>>(iter: I) -> Self {
        iter.fold(BinaryCounts::default(), |a, b| a + b)
    }
}

/// Class `class` against all others.
pub fn one_vs_rest(matrix: &ConfusionMatrix, class: usize) -> Result<BinaryCounts> {
    let k = matrix.k();
    if class >= k {
        return Err(Error::InvalidLabel { label: class, k });
    }
    let tp = matrix.get(class, class);
    let fn_ = matrix.row(class).iter().sum::<u64>() - tp;
    let fp = (0..k).map(|t| matrix.get(t, class)).sum::<u64>() - tp;
    let tn = matrix.total() - tp - fn_ - fp;
    Ok(BinaryCounts { tp, tn, fp, fn_ })
}
