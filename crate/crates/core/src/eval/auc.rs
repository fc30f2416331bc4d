use crate::error::{Error, Result};

/// Area under the ROC curve as the Mann–Whitney statistic
/// `P(s_pos > s_neg) + P(s_pos = s_neg) / 2`, computed by sorting.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::NonFinite(format!("detector score {s}")));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // walk tie groups in ascending order; each positive beats every negative
    // seen in earlier groups and ties with the negatives of its own group
    let mut wins = 0.0;
    let mut neg_below = 0usize;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let mut j = i;
        let (mut p, mut q) = (0usize, 0usize);
        while j < order.len() && scores[order[j]] == s {
            if labels[order[j]] {
                p += 1;
            } else {
                q += 1;
            }
            j += 1;
        }
        wins += p as f64 * neg_below as f64 + 0.5 * (p * q) as f64;
        neg_below += q;
        i = j;
    }
    Ok(wins / (n_pos as f64 * n_neg as f64))
}

/// Standard deviation of the AUC of uninformative scores (no ties).
pub fn null_auc_sd(n_pos: usize, n_neg: usize) -> f64 {
    let (p, q) = (n_pos as f64, n_neg as f64);
    ((p + q + 1.0) / (12.0 * p * q)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let auc = |pos: &[f64], neg: &[f64]| {
            let scores: Vec<f64> = pos.iter().chain(neg).copied().collect();
            let labels: Vec<bool> = (0..scores.len()).map(|i| i < pos.len()).collect();
            roc_auc(&scores, &labels).unwrap()
        };
        assert_eq!(auc(&[0.9, 0.8], &[0.7, 0.1]), 1.0);
        assert_eq!(auc(&[0.5, 0.5], &[0.5, 0.5, 0.5]), 0.5);
        assert_eq!(auc(&[0.8, 0.4], &[0.6, 0.2]), 0.75);
        assert_eq!(auc(&[0.1], &[0.9]), 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(roc_auc(&[1.0, 2.0], &[true, true]), Err(Error::SingleClass)));
        assert!(roc_auc(&[1.0], &[true, false]).is_err());
        assert!(roc_auc(&[f64::NAN, 1.0], &[true, false]).is_err());
    }
}
