//! Ranking metrics: AUC and relative improvement over a base model.

use std::fmt;

use crate::error::{GamaError, Result};

/// Area under the ROC curve for `(score, label)` pairs.
///
/// Equals the probability that a random positive outscores a random
/// negative, ties counting one half. Runs in `O(n log n)`; the pair count is
/// accumulated in integers so the result is the exact ratio rounded once.
pub fn auc(scores: &[(f64, bool)]) -> Result<f64> {
    if scores.iter().any(|(s, _)| s.is_nan()) {
        return Err(GamaError::NonFinite("scores"));
    }
    let mut sorted: Vec<(f64, bool)> = scores.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    let positives = sorted.iter().filter(|(_, y)| *y).count() as u128;
    let negatives = sorted.len() as u128 - positives;
    if positives == 0 || negatives == 0 {
        return Err(GamaError::SingleClass);
    }

    // twice the Mann-Whitney U statistic
    let mut doubled_wins: u128 = 0;
    let mut negatives_below: u128 = 0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u128, 0u128);
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            if sorted[j].1 {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        doubled_wins += 2 * pos * negatives_below + pos * neg;
        negatives_below += neg;
        i = j;
    }
    Ok(doubled_wins as f64 / (2 * positives * negatives) as f64)
}

/// `((auc_model − 0.5) / (auc_base − 0.5) − 1) × 100`, in percent.
pub fn relaimpr(auc_model: f64, auc_base: f64) -> Result<f64> {
    if auc_base.is_nan() || auc_base <= 0.5 {
        return Err(GamaError::BaseAuc(auc_base));
    }
    Ok(((auc_model - 0.5) / (auc_base - 0.5) - 1.0) * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    All,
    Cold,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::All => "all",
            Split::Cold => "cold",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub split: Split,
    pub auc: f64,
    /// Percentage; present when a base AUC was supplied.
    pub relaimpr_vs_base: Option<f64>,
    pub n_samples: usize,
}

impl EvalReport {
    pub fn new(split: Split, scores: &[(f64, bool)], base_auc: Option<f64>) -> Result<Self> {
        let auc = auc(scores)?;
        let relaimpr_vs_base = base_auc.map(|b| relaimpr(auc, b)).transpose()?;
        Ok(Self {
            split,
            auc,
            relaimpr_vs_base,
            n_samples: scores.len(),
        })
    }

    pub const CSV_HEADER: &'static str = "split,auc,relaimpr_pct,n_samples";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6},{},{}",
            self.split,
            self.auc,
            self.relaimpr_vs_base.map_or(String::new(), |r| format!("{r:.2}")),
            self.n_samples
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_tied() {
        assert_eq!(auc(&[(0.9, true), (0.1, false)]).unwrap(), 1.0);
        assert_eq!(auc(&[(0.1, true), (0.9, false)]).unwrap(), 0.0);
        assert_eq!(auc(&[(0.4, true), (0.4, false)]).unwrap(), 0.5);
    }

    #[test]
    fn single_class_is_error() {
        assert!(matches!(auc(&[(0.3, true), (0.2, true)]), Err(GamaError::SingleClass)));
        assert!(matches!(auc(&[]), Err(GamaError::SingleClass)));
        assert!(auc(&[(f64::NAN, true), (0.2, false)]).is_err());
    }

    #[test]
    fn relaimpr_values() {
        assert!((relaimpr(0.6324, 0.6147).unwrap() - 15.43).abs() < 0.01);
        assert!((relaimpr(0.5901, 0.5680).unwrap() - 32.5).abs() < 0.01);
        assert_eq!(relaimpr(0.61, 0.61).unwrap(), 0.0);
        assert!(matches!(relaimpr(0.7, 0.5), Err(GamaError::BaseAuc(_))));
        assert!(relaimpr(0.7, 0.4).is_err());
    }

    #[test]
    fn report_row() {
        let r = EvalReport::new(Split::Cold, &[(0.9, true), (0.1, false)], Some(0.75)).unwrap();
        assert_eq!(r.csv_row(), "cold,1.000000,100.00,2");
    }
}
