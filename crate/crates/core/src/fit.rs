//! Least-squares lines and exponential-decay fits on time series.

#[allow(unused_imports)]
use num_traits::Float;

/// Straight-line fit `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares. Returns `None` for fewer than two points or a
/// degenerate abscissa.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit { slope, intercept: my - slope * mx, r_squared })
}

/// Fitted exponential decay `P(t) ∝ exp(−gamma·t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub gamma: f64,
    pub r_squared: f64,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("need at least {needed} positive samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("no exponential regime: local slopes never settle to 1%")]
    NoExponentialRegime,
    #[error("fit rejected: R² = {0} below 0.999")]
    PoorFit(f64),
}

/// Fit `log p` against `t` over the last stretch where the decay rate is
/// steady.
///
/// The series is cut into `blocks` equal pieces and a slope is fitted on each.
/// Starting from the last block, earlier blocks are absorbed while their slope
/// stays within 1% of the last block's. The final fit spans the absorbed
/// blocks and must have R² ≥ 0.999.
pub fn fit_exponential_tail(t: &[f64], p: &[f64], blocks: usize) -> Result<DecayFit, FitError> {
    let n = t.len().min(p.len());
    let blocks = blocks.max(2);
    let needed = 4 * blocks;
    if n < needed || p[..n].iter().any(|&v| v <= 0.0) {
        let got = p[..n].iter().filter(|&&v| v > 0.0).count();
        return Err(FitError::TooFewSamples { needed, got });
    }
    let logp: alloc::vec::Vec<f64> = p[..n].iter().map(|&v| v.ln()).collect();
    let len = n / blocks;
    let off = n - len * blocks;
    let block_slope = |b: usize| {
        let s = off + b * len;
        linear_fit(&t[s..s + len], &logp[s..s + len]).map(|f| f.slope)
    };
    let reference = block_slope(blocks - 1).ok_or(FitError::NoExponentialRegime)?;
    if reference >= 0.0 {
        return Err(FitError::NoExponentialRegime);
    }
    let mut first = blocks - 1;
    while first > 0 {
        match block_slope(first - 1) {
            Some(s) if ((s - reference) / reference).abs() < 0.01 => first -= 1,
            _ => break,
        }
    }
    if first == blocks - 1 {
        // A single block is not a regime; require agreement with its neighbour.
        return Err(FitError::NoExponentialRegime);
    }
    let s = off + first * len;
    let fit = linear_fit(&t[s..n], &logp[s..n]).ok_or(FitError::NoExponentialRegime)?;
    if fit.r_squared < 0.999 {
        return Err(FitError::PoorFit(fit.r_squared));
    }
    Ok(DecayFit { gamma: -fit.slope, r_squared: fit.r_squared, t_start: t[s], t_end: t[n - 1] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-15);
        assert!((f.intercept - 2.0).abs() < 1e-15);
        assert!((f.r_squared - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tail_fit_skips_transient() {
        let t: Vec<f64> = (0..400).map(|i| i as f64).collect();
        let p: Vec<f64> = t
            .iter()
            .map(|&t| 0.7 * (-0.01 * t).exp() + 0.3 * (-0.2 * t).exp())
            .collect();
        let fit = fit_exponential_tail(&t, &p, 8).unwrap();
        assert!((fit.gamma - 0.01).abs() / 0.01 < 1e-3, "{fit:?}");
        assert!(fit.t_start > 40.0);
    }

    #[test]
    fn growing_series_rejected() {
        let t: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let p: Vec<f64> = t.iter().map(|&t| (0.01 * t).exp()).collect();
        assert_eq!(fit_exponential_tail(&t, &p, 5), Err(FitError::NoExponentialRegime));
    }
}
