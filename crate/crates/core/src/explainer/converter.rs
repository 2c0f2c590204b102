//! Score-to-probability converters.
//!
//! A pointwise ranker only emits scores. To train a local surrogate the way a
//! classifier explainer would, each perturbed document's score is turned into
//! P(relevant) relative to the ranked list the original document came from.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rankers::RankedList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConverterKind {
    /// 1 if the score beats the k-th document, else 0.
    #[serde(rename = "topk")]
    TopKBinary,
    /// Score relative to the top document's score.
    #[serde(rename = "score")]
    ScoreBased,
    /// 1 - rank/k where rank is the position the score would take in the list.
    #[serde(rename = "rank")]
    RankBased,
}

impl ConverterKind {
    pub const ALL: [ConverterKind; 3] = [
        ConverterKind::TopKBinary,
        ConverterKind::ScoreBased,
        ConverterKind::RankBased,
    ];

    /// Wire identifier.
    pub fn as_str(self) -> &'static str {
        match self {
            ConverterKind::TopKBinary => "topk",
            ConverterKind::ScoreBased => "score",
            ConverterKind::RankBased => "rank",
        }
    }
}

impl fmt::Display for ConverterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConverterError {
    #[error("unknown converter \"{0}\"; available converters: topk, score, rank")]
    Unknown(String),
    #[error(
        "the top score is {0}, but the score-based converter needs a positive top score; \
         shift the ranker's scores so that the top-ranked document scores above zero"
    )]
    NonPositiveTopScore(f64),
    #[error("top-k scores must be sorted in descending order")]
    Unsorted,
    #[error("the ranked list is empty")]
    EmptyList,
}

impl FromStr for ConverterKind {
    type Err = ConverterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConverterKind::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| ConverterError::Unknown(s.to_owned()))
    }
}

/// 1.0 when `score` is strictly greater than the k-th document's score.
pub fn prob_topk_binary(score: f64, threshold_score: f64) -> f64 {
    if score > threshold_score {
        1.0
    } else {
        0.0
    }
}

/// `1 - (top - score) / top`, saturating at 1 for scores at or above the top
/// and clamped at 0 from below.
pub fn prob_score_based(score: f64, top_score: f64) -> Result<f64, ConverterError> {
    if top_score <= 0.0 || top_score.is_nan() {
        return Err(ConverterError::NonPositiveTopScore(top_score));
    }
    if score >= top_score {
        return Ok(1.0);
    }
    Ok((1.0 - (top_score - score) / top_score).max(0.0))
}

/// Rank-based probability against a descending top-k score list.
///
/// Scores at or below the k-th score get 0. Otherwise the perturbed document
/// is inserted above every entry it ties with, so its rank is one plus the
/// number of strictly greater entries.
pub fn prob_rank_based(score: f64, topk_scores: &[f64]) -> Result<f64, ConverterError> {
    let Some(&kth) = topk_scores.last() else {
        return Err(ConverterError::EmptyList);
    };
    if topk_scores.windows(2).any(|w| w[0] < w[1]) {
        return Err(ConverterError::Unsorted);
    }
    if score <= kth {
        return Ok(0.0);
    }
    let rank = 1 + topk_scores.iter().filter(|&&s| s > score).count();
    Ok(1.0 - rank as f64 / topk_scores.len() as f64)
}

/// A converter bound to the anchors of one ranked list.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelRule {
    TopKBinary { threshold_score: f64 },
    ScoreBased { top_score: f64 },
    RankBased { topk_scores: Vec<f64> },
}

impl LabelRule {
    /// Reads d_1 and d_k off the list. When the list holds fewer than `k`
    /// documents the last one present acts as d_k.
    pub fn from_ranked_list(kind: ConverterKind, list: &RankedList) -> Result<Self, ConverterError> {
        let scores = list.scores();
        let (Some(&top_score), Some(&threshold_score)) = (scores.first(), scores.last()) else {
            return Err(ConverterError::EmptyList);
        };
        Ok(match kind {
            ConverterKind::TopKBinary => LabelRule::TopKBinary { threshold_score },
            ConverterKind::ScoreBased => {
                // fail early rather than on the first sample
                prob_score_based(top_score, top_score)?;
                LabelRule::ScoreBased { top_score }
            }
            ConverterKind::RankBased => {
                prob_rank_based(top_score, &scores)?;
                LabelRule::RankBased { topk_scores: scores }
            }
        })
    }

    pub fn kind(&self) -> ConverterKind {
        match self {
            LabelRule::TopKBinary { .. } => ConverterKind::TopKBinary,
            LabelRule::ScoreBased { .. } => ConverterKind::ScoreBased,
            LabelRule::RankBased { .. } => ConverterKind::RankBased,
        }
    }

    pub fn label(&self, score: f64) -> Result<f64, ConverterError> {
        match self {
            LabelRule::TopKBinary { threshold_score } => Ok(prob_topk_binary(score, *threshold_score)),
            LabelRule::ScoreBased { top_score } => prob_score_based(score, *top_score),
            LabelRule::RankBased { topk_scores } => prob_rank_based(score, topk_scores),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rankers::{rank_documents, Query};
    use proptest::prelude::*;

    #[test]
    fn topk_binary_is_strict() {
        assert_eq!(prob_topk_binary(5.0, 3.0), 1.0);
        assert_eq!(prob_topk_binary(2.0, 3.0), 0.0);
        assert_eq!(prob_topk_binary(3.0, 3.0), 0.0);
    }

    #[test]
    fn score_based_values() {
        assert_eq!(prob_score_based(10.0, 10.0), Ok(1.0));
        assert_eq!(prob_score_based(5.0, 10.0), Ok(0.5));
        assert_eq!(prob_score_based(12.0, 10.0), Ok(1.0));
        assert_eq!(prob_score_based(-2.0, 10.0), Ok(0.0));
    }

    #[test]
    fn score_based_needs_positive_top() {
        assert_eq!(prob_score_based(1.0, 0.0), Err(ConverterError::NonPositiveTopScore(0.0)));
        let err = prob_score_based(1.0, -3.0).unwrap_err();
        assert!(err.to_string().contains("shift"));
    }

    #[test]
    fn rank_based_values() {
        let scores: Vec<f64> = (0..10).map(|i| 10.0 - i as f64).collect(); // 10 .. 1
        assert_eq!(prob_rank_based(0.5, &scores), Ok(0.0));
        assert_eq!(prob_rank_based(1.0, &scores), Ok(0.0));
        assert_eq!(prob_rank_based(11.0, &scores), Ok(1.0 - 1.0 / 10.0));
        // between the 3rd (8.0) and 4th (7.0) entries
        assert_eq!(prob_rank_based(7.5, &scores), Ok(1.0 - 4.0 / 10.0));
        // ties place the sample above the equal entry
        assert_eq!(prob_rank_based(8.0, &scores), Ok(1.0 - 3.0 / 10.0));
    }

    #[test]
    fn rank_based_rejects_bad_lists() {
        assert_eq!(prob_rank_based(1.0, &[1.0, 2.0]), Err(ConverterError::Unsorted));
        assert_eq!(prob_rank_based(1.0, &[]), Err(ConverterError::EmptyList));
    }

    #[test]
    fn rank_based_single_entry_is_always_zero() {
        for s in [-1.0, 0.0, 5.0, 1e9] {
            assert_eq!(prob_rank_based(s, &[5.0]), Ok(0.0));
        }
    }

    #[test]
    fn wire_names() {
        for kind in ConverterKind::ALL {
            assert_eq!(kind.as_str().parse::<ConverterKind>(), Ok(kind));
            assert_eq!(serde_json::to_string(&kind).unwrap(), format!("\"{kind}\""));
        }
        assert!("svm".parse::<ConverterKind>().is_err());
    }

    #[test]
    fn rule_reads_list_anchors() {
        let list = rank_documents(
            Query::new("q"),
            vec![("a".into(), 4.0), ("b".into(), 2.0), ("c".into(), 1.0)],
            3,
        )
        .unwrap();
        let topk = LabelRule::from_ranked_list(ConverterKind::TopKBinary, &list).unwrap();
        assert_eq!(topk, LabelRule::TopKBinary { threshold_score: 1.0 });
        let score = LabelRule::from_ranked_list(ConverterKind::ScoreBased, &list).unwrap();
        assert_eq!(score.label(4.0), Ok(1.0));
        assert_eq!(score.label(1.0), Ok(0.25));

        let negative = rank_documents(Query::new("q"), vec![("a".into(), -1.0)], 1).unwrap();
        assert!(LabelRule::from_ranked_list(ConverterKind::ScoreBased, &negative).is_err());
    }

    proptest! {
        #[test]
        fn converters_bounded_and_monotone(
            a in -50.0f64..50.0,
            b in -50.0f64..50.0,
            threshold in -50.0f64..50.0,
            top in 0.001f64..50.0,
            mut list in proptest::collection::vec(-50.0f64..50.0, 1..12),
        ) {
            list.sort_by(|x, y| y.total_cmp(x));
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let k = list.len() as f64;

            let (t_lo, t_hi) = (prob_topk_binary(lo, threshold), prob_topk_binary(hi, threshold));
            prop_assert!((0.0..=1.0).contains(&t_lo) && t_lo <= t_hi);

            let (s_lo, s_hi) = (prob_score_based(lo, top).unwrap(), prob_score_based(hi, top).unwrap());
            prop_assert!((0.0..=1.0).contains(&s_lo) && (0.0..=1.0).contains(&s_hi) && s_lo <= s_hi);

            let (r_lo, r_hi) = (prob_rank_based(lo, &list).unwrap(), prob_rank_based(hi, &list).unwrap());
            prop_assert!(r_lo <= r_hi);
            for r in [r_lo, r_hi] {
                prop_assert!(r >= 0.0 && r <= 1.0 - 1.0 / k);
                let on_grid = r == 0.0 || (1..list.len()).any(|rank| r == 1.0 - rank as f64 / k);
                prop_assert!(on_grid);
            }
        }
    }
}
