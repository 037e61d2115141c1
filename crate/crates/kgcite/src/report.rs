//! Report serialization: JSON report files with run metadata and the CSV
//! summary whose columns mirror the benchmark tables (alignment, correctness,
//! then micro and macro precision/recall/F1).

use serde::{Deserialize, Serialize};

use crate::judges::TextQualityScores;
use crate::metrics::{round1, CorpusReport};

/// Everything needed to tie a report back to the run that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub config_hash: String,
    pub judge: String,
    pub tool_version: String,
}

/// Mean text-quality grades over a corpus, when grading ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextQualitySummary {
    pub coherence: f64,
    pub consistency: f64,
    pub fluency: f64,
    pub relevance: f64,
    pub graded_answers: usize,
}

impl TextQualitySummary {
    pub fn from_scores(scores: &[TextQualityScores]) -> Option<Self> {
        if scores.is_empty() {
            return None;
        }
        let n = scores.len() as f64;
        let mean = |f: fn(&TextQualityScores) -> u8| {
            scores.iter().map(|s| f(s) as f64).sum::<f64>() / n
        };
        Some(Self {
            coherence: mean(|s| s.coherence),
            consistency: mean(|s| s.consistency),
            fluency: mean(|s| s.fluency),
            relevance: mean(|s| s.relevance),
            graded_answers: scores.len(),
        })
    }
}

/// The on-disk report: metadata plus the corpus metrics (display-rounded)
/// and optional text-quality grades.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub meta: RunMetadata,
    pub report: CorpusReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_quality: Option<TextQualitySummary>,
}

impl ReportFile {
    /// Round every corpus-level percentage to one decimal (half-up), the
    /// precision reports are rendered at. Per-answer ratios stay exact.
    pub fn rounded(mut self) -> Self {
        let r = &mut self.report;
        for field in [
            &mut r.correctness,
            &mut r.micro_p,
            &mut r.micro_r,
            &mut r.micro_f1,
            &mut r.macro_p,
            &mut r.macro_r,
            &mut r.macro_f1,
            &mut r.alignment_pct,
            &mut r.na_p,
            &mut r.na_r,
            &mut r.na_f1,
        ] {
            if let Some(v) = field {
                *v = round1(*v);
            }
        }
        self
    }
}

/// Header of the summary CSV.
pub const CSV_HEADER: &str = "condition,alignment,correctness,micro_precision,micro_recall,micro_f1,macro_precision,macro_recall,macro_f1";

fn cell(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{:.1}", round1(v)),
        None => String::new(),
    }
}

/// One CSV row per model/condition, columns as in [`CSV_HEADER`].
pub fn csv_row(condition: &str, report: &CorpusReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        condition,
        cell(report.alignment_pct),
        cell(report.correctness),
        cell(report.micro_p),
        cell(report.micro_r),
        cell(report.micro_f1),
        cell(report.macro_p),
        cell(report.macro_r),
        cell(report.macro_f1),
    )
}

/// Header of the [NA]-ablation trend CSV.
pub const NA_TREND_HEADER: &str =
    "removed,entries,skipped,correctness,micro_precision,micro_recall,micro_f1,na_precision,na_recall,na_f1";

/// Header of the retrieval-corruption trend CSV.
pub const CORRUPTION_TREND_HEADER: &str =
    "fraction,entries,correctness,micro_precision,micro_recall,micro_f1";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{aggregate, AnswerBits, EvalOptions};

    fn report() -> CorpusReport {
        let bits = AnswerBits {
            correctness: vec![true, true, false],
            precision: vec![true, false, false],
            recall: vec![true, false],
            alignment: (2, 3),
            na_precision: vec![],
            na_recall: vec![],
        };
        aggregate(&[bits], &EvalOptions::default()).unwrap()
    }

    #[test]
    fn csv_row_matches_column_order() {
        let row = csv_row("mock-run", &report());
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), CSV_HEADER.split(',').count());
        assert_eq!(fields[0], "mock-run");
        assert_eq!(fields[1], "66.7"); // alignment
        assert_eq!(fields[2], "66.7"); // correctness
        assert_eq!(fields[3], "33.3"); // micro precision
        assert_eq!(fields[4], "50.0"); // micro recall
    }

    #[test]
    fn rounding_applies_to_corpus_fields_only() {
        let file = ReportFile {
            meta: RunMetadata {
                seed: 7,
                config_hash: "deadbeef".into(),
                judge: "mock:lexical".into(),
                tool_version: "0.1.0".into(),
            },
            report: report(),
            text_quality: None,
        }
        .rounded();
        assert_eq!(file.report.micro_p, Some(33.3));
        // Per-answer ratios keep full precision.
        assert!(file.report.per_answer[0].precision.unwrap() - 1.0 / 3.0 < 1e-12);
    }

    #[test]
    fn quality_summary_averages() {
        let scores = vec![
            TextQualityScores {
                coherence: 4,
                consistency: 5,
                fluency: 4,
                relevance: 5,
            },
            TextQualityScores {
                coherence: 2,
                consistency: 3,
                fluency: 4,
                relevance: 3,
            },
        ];
        let summary = TextQualitySummary::from_scores(&scores).unwrap();
        assert_eq!(summary.coherence, 3.0);
        assert_eq!(summary.consistency, 4.0);
        assert_eq!(summary.graded_answers, 2);
        assert!(TextQualitySummary::from_scores(&[]).is_none());
    }
}
