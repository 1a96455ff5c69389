//! Automatic and manual evaluation: BLEU, TER, confusion-matrix statistics
//! and adequacy/fluency rating sheets.

mod bleu;
mod classify;
mod rating;
mod ter;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bleu::{bleu, clipped_matches, BleuReport};
pub use classify::{classification_stats, ClassificationStats, ConfusionMatrix};
pub use rating::{aggregate_ratings, make_rating_sheet, read_ratings, RaterMeans, RatingRecord, RatingSummary};
pub use ter::{corpus_ter, levenshtein, ter, TerReport, MAX_SHIFT_LEN};

pub const METRIC_NAMES: [&str; 2] = ["bleu", "ter"];

/// Per-system evaluation record; serialized as the JSON metric report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub system: String,
    pub sentences: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bleu: Option<BleuReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ter: Option<TerReport>,
    /// How the numbers were computed, so reports stay auditable.
    pub settings: Vec<String>,
}

pub fn parse_metric_list(list: &str) -> Result<Vec<&'static str>> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m = METRIC_NAMES
            .iter()
            .find(|m| m.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownMetric { name: name.into(), valid: METRIC_NAMES.join(",") })?;
        if !out.contains(m) {
            out.push(*m);
        }
    }
    if out.is_empty() {
        return Err(Error::UnknownMetric { name: list.into(), valid: METRIC_NAMES.join(",") });
    }
    Ok(out)
}

/// Scores tokenized hypotheses against aligned references.
pub fn evaluate(system: &str, references: &[Vec<String>], hypotheses: &[Vec<String>], metrics: &[&str]) -> Result<EvalReport> {
    if references.len() != hypotheses.len() {
        return Err(Error::Misaligned { left: references.len(), right: hypotheses.len() });
    }
    let mut report = EvalReport {
        system: system.into(),
        sentences: references.len(),
        bleu: None,
        ter: None,
        settings: vec![
            "tokenized input, case-sensitive".into(),
            "single reference".into(),
        ],
    };
    if metrics.contains(&"bleu") {
        report.bleu = Some(bleu(references, hypotheses, 4)?);
        report.settings.push("bleu: corpus-level, n<=4, add-one smoothing on zero match counts".into());
    }
    if metrics.contains(&"ter") {
        report.ter = Some(corpus_ter(references, hypotheses)?);
        report.settings.push(format!("ter: greedy block shifts (max block {MAX_SHIFT_LEN}), shift cost 1"));
    }
    Ok(report)
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "system,sentences,bleu,bleu_unsmoothed,ter";

    pub fn csv_row(&self) -> String {
        let f = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_default();
        format!(
            "{},{},{},{},{}",
            self.system,
            self.sentences,
            f(self.bleu.as_ref().map(|b| b.score)),
            f(self.bleu.as_ref().map(|b| b.unsmoothed_score)),
            f(self.ter.as_ref().map(|t| t.score)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_list_parsing() {
        assert_eq!(parse_metric_list("bleu,ter").unwrap(), ["bleu", "ter"]);
        assert_eq!(parse_metric_list("TER").unwrap(), ["ter"]);
        let err = parse_metric_list("bleu,meteor").unwrap_err();
        assert!(err.to_string().contains("bleu,ter"), "{err}");
    }

    #[test]
    fn identity_report() {
        let c = vec![vec!["a".to_string(), "b".to_string()]];
        let r = evaluate("x", &c, &c, &["bleu", "ter"]).unwrap();
        assert_eq!(r.bleu.as_ref().unwrap().score, 100.0);
        assert_eq!(r.ter.as_ref().unwrap().score, 0.0);
        assert_eq!(r.csv_row(), "x,1,100.00,0.00,0.00");
    }
}
