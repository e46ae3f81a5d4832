use super::{Result, ScoreVector, SelectionBatch, StrategyError};

/// The `k` highest-scoring candidates; ties go to the lowest candidate index.
///
/// Asking for more than are available returns every candidate with
/// `truncated` set.
pub fn select_top_k(scores: &ScoreVector, k: usize) -> Result<SelectionBatch> {
    if k == 0 {
        return Err(StrategyError::InvalidArgument("k must be at least 1".into()));
    }
    let order = scores.ranking();
    let take = k.min(order.len());
    let chosen = order[..take].iter().map(|&p| scores.candidates()[p]).collect();
    let rationale = order[..take].iter().map(|&p| scores.scores()[p]).collect();
    Ok(SelectionBatch { chosen, rationale, truncated: k > order.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chosen(scores: &[f64], k: usize) -> Vec<usize> {
        select_top_k(&ScoreVector::from_scores(scores.to_vec()).unwrap(), k).unwrap().chosen
    }

    #[test]
    fn examples() {
        assert_eq!(chosen(&[3.0, 1.0, 2.0], 2), vec![0, 2]);
        assert_eq!(chosen(&[5.0, 5.0, 5.0], 2), vec![0, 1]);
        assert_eq!(chosen(&[-1.0, -2.0], 1), vec![0]);
    }

    #[test]
    fn oversized_k_is_flagged() {
        let s = ScoreVector::new(vec![10, 4], vec![0.1, 0.2]).unwrap();
        let b = select_top_k(&s, 5).unwrap();
        assert!(b.truncated);
        assert_eq!(b.chosen, vec![4, 10]);
        assert!(select_top_k(&s, 0).is_err());
    }
}
