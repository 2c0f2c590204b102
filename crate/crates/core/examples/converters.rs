//! How the three converters map a perturbed document's score to
//! P(relevant), for a ranked list with scores 9, 7, 4, 2.

use explainable_search::explainer::{prob_rank_based, prob_score_based, prob_topk_binary};

fn main() {
    let topk = [9.0, 7.0, 4.0, 2.0];
    println!("{:>6} {:>6} {:>6} {:>6}", "score", "topk", "score", "rank");
    for score in [1.0, 2.0, 3.0, 5.0, 8.0, 9.0, 12.0] {
        println!(
            "{score:>6.1} {:>6.2} {:>6.2} {:>6.2}",
            prob_topk_binary(score, topk[3]),
            prob_score_based(score, topk[0]).expect("top score is positive"),
            prob_rank_based(score, &topk).expect("scores are sorted"),
        );
    }
}
