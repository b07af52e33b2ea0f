use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variance products below this are treated as degenerate.
const DEGENERATE_VARIANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisResult {
    pub dis: f64,
    /// Features left out because `varA·varB` was below 1e-12.
    pub excluded: usize,
    pub features: usize,
}

fn moments(class: &[Vec<f64>], i: usize) -> (f64, f64) {
    let n = class.len() as f64;
    let mean = class.iter().map(|v| v[i]).sum::<f64>() / n;
    let var = class.iter().map(|v| (v[i] - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Class separability: the average over features of
/// `(meanA - meanB)² / (varA·varB)`, with means and variances normalised by
/// class size.
pub fn dis_criterion(class_a: &[Vec<f64>], class_b: &[Vec<f64>]) -> Result<DisResult> {
    for class in [class_a, class_b] {
        if class.len() < 2 {
            return Err(Error::ClassTooSmall { size: class.len() });
        }
    }
    let n = class_a[0].len();
    for v in class_a.iter().chain(class_b) {
        if v.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: v.len(),
            });
        }
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    for i in 0..n {
        let (ma, va) = moments(class_a, i);
        let (mb, vb) = moments(class_b, i);
        let denom = va * vb;
        if denom < DEGENERATE_VARIANCE {
            continue;
        }
        sum += (ma - mb).powi(2) / denom;
        used += 1;
    }
    if used == 0 {
        return Err(Error::AllFeaturesDegenerate);
    }
    Ok(DisResult {
        dis: sum / used as f64,
        excluded: n - used,
        features: n,
    })
}
