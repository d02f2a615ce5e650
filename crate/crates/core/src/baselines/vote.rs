//! Window-level aggregation of per-row predictions.

/// Majority vote over the rows of a window.
///
/// Each element is one row's `(predicted class, probability vector)`. Vote
/// ties are broken by the higher summed probability across the window,
/// then by the lower class index. Returns class 0 for empty input only in
/// the degenerate zero-class sense — callers pass at least one row.
pub fn window_vote(per_row: &[(usize, Vec<f64>)]) -> usize {
    assert!(!per_row.is_empty(), "window_vote needs at least one row");
    let num_classes = per_row[0].1.len();
    let mut votes = vec![0u64; num_classes];
    let mut prob_sums = vec![0.0f64; num_classes];
    for (class, probs) in per_row {
        votes[*class] += 1;
        for (sum, &p) in prob_sums.iter_mut().zip(probs) {
            *sum += p;
        }
    }
    let top_votes = *votes.iter().max().unwrap();
    let mut best: Option<usize> = None;
    for k in 0..num_classes {
        if votes[k] != top_votes {
            continue;
        }
        best = match best {
            None => Some(k),
            // Strictly-greater keeps the lowest index on probability ties.
            Some(cur) if prob_sums[k] > prob_sums[cur] => Some(k),
            Some(cur) => Some(cur),
        };
    }
    best.expect("at least one class reaches the top vote count")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(class: usize, probs: &[f64]) -> (usize, Vec<f64>) {
        (class, probs.to_vec())
    }

    #[test]
    fn simple_majority_wins() {
        let rows = [
            row(0, &[0.6, 0.4]),
            row(0, &[0.7, 0.3]),
            row(1, &[0.2, 0.8]),
        ];
        assert_eq!(window_vote(&rows), 0);
    }

    #[test]
    fn vote_tie_falls_back_to_summed_probability() {
        let rows = [row(0, &[0.55, 0.45]), row(1, &[0.35, 0.65])];
        // Votes 1-1; sums are 0.9 vs 1.1, so class 1 wins.
        assert_eq!(window_vote(&rows), 1);
    }

    #[test]
    fn full_tie_takes_lowest_class_index() {
        let rows = [row(0, &[0.5, 0.5]), row(1, &[0.5, 0.5])];
        assert_eq!(window_vote(&rows), 0);
    }

    #[test]
    fn unanimous_window_returns_that_class() {
        let rows: Vec<_> = (0..16).map(|_| row(2, &[0.1, 0.2, 0.7])).collect();
        assert_eq!(window_vote(&rows), 2);
    }

    #[test]
    fn vote_is_invariant_to_row_order() {
        let mut rows = vec![
            row(0, &[0.6, 0.4]),
            row(1, &[0.3, 0.7]),
            row(1, &[0.45, 0.55]),
            row(0, &[0.8, 0.2]),
            row(1, &[0.4, 0.6]),
        ];
        let first = window_vote(&rows);
        rows.reverse();
        assert_eq!(window_vote(&rows), first);
        rows.swap(0, 2);
        rows.swap(1, 3);
        assert_eq!(window_vote(&rows), first);
    }
}
