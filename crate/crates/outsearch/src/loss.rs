//! Hamming loss over label sequences.

use crate::data::Label;
use crate::{Error, Result};

/// Number of mismatched positions (raw count).
pub fn hamming_count(a: &[Label], b: &[Label]) -> usize {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Normalized Hamming loss in [0, 1]: mismatches / length.
pub fn hamming_loss(y_pred: &[Label], y_gold: &[Label]) -> Result<f64> {
    if y_pred.len() != y_gold.len() || y_pred.is_empty() {
        return Err(Error::Usage(format!(
            "hamming_loss requires equal non-zero lengths, got {} and {}",
            y_pred.len(),
            y_gold.len()
        )));
    }
    Ok(hamming_count(y_pred, y_gold) as f64 / y_pred.len() as f64)
}
