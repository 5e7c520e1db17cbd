use crate::experiment::Pattern;

use super::{McError, Result};

/// Fringe contrast of a pattern, with a shot-noise error bar for counts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VisibilityEstimate {
    /// Clamped to `[0, 1]`.
    pub v: f64,
    /// Zero for analytic patterns.
    pub std_error: f64,
    pub n_events_used: u64,
}

/// "Valid" moving average: `len − window + 1` outputs, no padding.
pub fn moving_average(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window > values.len() {
        return Err(McError::BadWindow {
            window,
            len: values.len(),
        });
    }
    if window == 1 {
        return Ok(values.to_vec());
    }
    let w = window as f64;
    Ok(values.windows(window).map(|s| s.iter().sum::<f64>() / w).collect())
}

/// `(max − min)/(max + min)` over the `window`-bin moving average.
///
/// For count histograms the error propagates binomial variances of the two
/// extreme smoothed bins: a window mean `M` over `w` bins out of `N` events
/// has variance `M(1 − wM/N)/w`.
pub fn visibility(p: &Pattern, window: usize) -> Result<VisibilityEstimate> {
    if p.is_empty() {
        return Err(McError::EmptyPattern);
    }
    if p.is_all_zero() {
        return Err(McError::AllZero);
    }
    let smooth = moving_average(p.values(), window)?;
    let hi = smooth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = smooth.iter().copied().fold(f64::INFINITY, f64::min);
    let sum = hi + lo;
    let v = ((hi - lo) / sum).clamp(0.0, 1.0);

    let (std_error, n_events_used) = match p.sample_size() {
        Some(n) if n > 0 => {
            let w = window as f64;
            let var = |m: f64| (m * (1.0 - w * m / n as f64) / w).max(0.0);
            let d_hi = 2.0 * lo / (sum * sum);
            let d_lo = 2.0 * hi / (sum * sum);
            ((d_hi * d_hi * var(hi) + d_lo * d_lo * var(lo)).sqrt(), n)
        }
        _ => (0.0, 0),
    };
    Ok(VisibilityEstimate {
        v,
        std_error,
        n_events_used,
    })
}
