use std::ops::Add;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::simplex::Label;

/// Two-class confusion counts indexed `[actual][predicted]` by [`Label`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    counts: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    /// Builds from a table whose rows are actual classes and columns
    /// predicted classes, both listed in (Other, Simple) order.
    pub fn from_actual_rows(table: [[u64; 2]; 2]) -> Self {
        let mut m = ConfusionMatrix::default();
        let order = [Label::Other, Label::Simple];
        for (r, actual) in order.iter().enumerate() {
            for (c, predicted) in order.iter().enumerate() {
                m.counts[*actual as usize][*predicted as usize] = table[r][c];
            }
        }
        m
    }

    /// Builds from a table whose rows are predicted classes and columns
    /// actual classes, both in (Other, Simple) order.
    pub fn from_predicted_rows(table: [[u64; 2]; 2]) -> Self {
        Self::from_actual_rows([[table[0][0], table[1][0]], [table[0][1], table[1][1]]])
    }

    pub fn record(&mut self, actual: Label, predicted: Label) {
        self.counts[actual as usize][predicted as usize] += 1;
    }

    pub fn get(&self, actual: Label, predicted: Label) -> u64 {
        self.counts[actual as usize][predicted as usize]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

impl Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(mut self, rhs: Self) -> Self {
        for a in 0..2 {
            for p in 0..2 {
                self.counts[a][p] += rhs.counts[a][p];
            }
        }
        self
    }
}

/// Each field is `None` when its denominator is zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassificationStats {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub accuracy: Option<f64>,
    pub f1: Option<f64>,
    pub kappa: Option<f64>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

/// Precision, recall, accuracy and F1 (all as fractions) for `positive`,
/// plus unweighted Cohen's kappa.
pub fn classification_stats(m: &ConfusionMatrix, positive: Label) -> Result<ClassificationStats> {
    let total = m.total() as f64;
    if total == 0.0 {
        return Err(Error::Config("confusion matrix is all zeros".into()));
    }
    let negative = match positive {
        Label::Simple => Label::Other,
        Label::Other => Label::Simple,
    };
    let tp = m.get(positive, positive) as f64;
    let fp = m.get(negative, positive) as f64;
    let fnn = m.get(positive, negative) as f64;
    let tn = m.get(negative, negative) as f64;
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fnn);
    let accuracy = ratio(tp + tn, total);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) => ratio(2.0 * p * r, p + r),
        _ => None,
    };
    let p_o = (tp + tn) / total;
    let p_e = ((tp + fnn) * (tp + fp) + (tn + fp) * (tn + fnn)) / (total * total);
    let kappa = ratio(p_o - p_e, 1.0 - p_e);
    Ok(ClassificationStats { precision, recall, accuracy, f1, kappa })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_diagonal() {
        let m = ConfusionMatrix::from_actual_rows([[40, 0], [0, 60]]);
        let s = classification_stats(&m, Label::Simple).unwrap();
        for v in [s.precision, s.recall, s.accuracy, s.f1, s.kappa] {
            assert_eq!(v, Some(1.0));
        }
    }

    #[test]
    fn chance_agreement_gives_zero_kappa() {
        // Row marginals (50, 50), column marginals (50, 50), observed
        // agreement 0.5 equals the product-of-marginals expectation.
        let m = ConfusionMatrix::from_actual_rows([[25, 25], [25, 25]]);
        let s = classification_stats(&m, Label::Other).unwrap();
        assert_eq!(s.kappa, Some(0.0));
        // Skewed marginals with p_o = p_e: rows (80, 20), cols (80, 20) -> p_e = 0.68
        let m = ConfusionMatrix::from_actual_rows([[64, 16], [16, 4]]);
        let k = classification_stats(&m, Label::Other).unwrap().kappa.unwrap();
        assert!(k.abs() < 1e-12, "{k}");
    }

    #[test]
    fn undefined_metrics_are_none() {
        let m = ConfusionMatrix::from_actual_rows([[10, 0], [0, 0]]);
        let s = classification_stats(&m, Label::Simple).unwrap();
        assert_eq!(s.precision, None);
        assert_eq!(s.recall, None);
        assert_eq!(s.f1, None);
        assert_eq!(s.accuracy, Some(1.0));
        assert_eq!(s.kappa, None);
    }

    #[test]
    fn all_zero_is_an_error() {
        assert!(classification_stats(&ConfusionMatrix::default(), Label::Simple).is_err());
    }

    #[test]
    fn layouts_are_transposes() {
        let a = ConfusionMatrix::from_actual_rows([[1, 2], [3, 4]]);
        let p = ConfusionMatrix::from_predicted_rows([[1, 3], [2, 4]]);
        assert_eq!(a, p);
        assert_eq!(a.get(Label::Other, Label::Simple), 2);
    }
}
