//! Log-log slope fits used by the sweeps.

use serde::Serialize;

/// Least-squares slope of log y against log x over the points with x, y > 0.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Outcome of a slope test where values at or below a numerical floor are
/// treated as fully decayed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensoredSlope {
    pub slope: Option<f64>,
    pub resolved: usize,
    pub censored: usize,
    pub pass: bool,
}

/// Checks that y decays at least like x^max_slope. Points with y ≤ floor are
/// censored. The test passes when the resolved points (at least two) fit a
/// slope ≤ max_slope, or when at most one point is resolved and it precedes
/// every censored one, i.e. the sequence drops below the floor and stays there.
pub fn censored_slope_check(xs: &[f64], ys: &[f64], floor: f64, max_slope: f64) -> CensoredSlope {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let resolved: Vec<usize> = idx.iter().copied().filter(|&i| ys[i] > floor).collect();
    let censored = idx.len() - resolved.len();
    let rx: Vec<f64> = resolved.iter().map(|&i| xs[i]).collect();
    let ry: Vec<f64> = resolved.iter().map(|&i| ys[i]).collect();
    let slope = loglog_slope(&rx, &ry);
    let fits = resolved.len() >= 2 && slope.is_some_and(|s| s <= max_slope);
    let last_resolved = resolved.last().map(|&i| xs[i]);
    let first_censored = idx.iter().copied().find(|&i| ys[i] <= floor).map(|i| xs[i]);
    let drops_out = censored > 0
        && match (last_resolved, first_censored) {
            (None, _) => true,
            (Some(a), Some(b)) => a < b,
            _ => false,
        };
    CensoredSlope { slope, resolved: resolved.len(), censored, pass: fits || (drops_out && resolved.len() < 2) }
}
