//! ROC curves and AUC via the rank-sum (Mann-Whitney) identity.

use super::StatsError;

#[derive(Debug, Clone)]
pub struct RocResult {
    pub auc: f64,
    /// (false positive rate, true positive rate) at every distinct
    /// threshold, from (0,0) to (1,1).
    pub curve: Vec<(f64, f64)>,
    pub n_pos: usize,
    pub n_neg: usize,
}

/// AUC as the Mann-Whitney pair statistic (ties count one half),
/// computed through average ranks. The curve sweeps all distinct
/// thresholds from high to low.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<RocResult, StatsError> {
    if scores.len() != labels.len() {
        return Err(StatsError::LengthMismatch(scores.len(), labels.len()));
    }
    let n_pos = labels.iter().filter(|l| **l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(StatsError::SingleClass);
    }

    // average ranks over ascending scores; rank sum of positives gives U
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks are 1-based; tied block shares the average rank
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if labels[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    let auc = u / (n_pos as f64 * n_neg as f64);

    // curve: sweep thresholds descending
    let mut curve = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = order.len();
    while i > 0 {
        let mut j = i;
        while j > 1 && scores[order[j - 2]] == scores[order[i - 1]] {
            j -= 1;
        }
        for &idx in &order[j - 1..i] {
            if labels[idx] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        curve.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
        i = j - 1;
    }
    Ok(RocResult { auc, curve, n_pos, n_neg })
}
