//! Refinement trend tests: a finite-dimensional stand-in for "bounded"
//! versus "unbounded" as the mesh or the domain family is refined.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrendConfig {
    /// Largest relative change between successive levels counted as stable.
    pub stable_tol: f64,
    /// Smallest growth factor per level counted as divergence.
    pub growth: f64,
    /// Number of consecutive steps each test must hold for.
    pub steps: usize,
}

impl Default for TrendConfig {
    fn default() -> Self {
        TrendConfig {
            stable_tol: 0.10,
            growth: 1.5,
            steps: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Diverging,
    Inconclusive,
}

/// `|x_{i+1} - x_i| / max(|x_i|, |x_{i+1}|)`, zero when both vanish.
pub fn relative_changes(seq: &[f64]) -> Vec<f64> {
    seq.windows(2)
        .map(|w| {
            let s = w[0].abs().max(w[1].abs());
            if s == 0.0 {
                0.0
            } else {
                (w[1] - w[0]).abs() / s
            }
        })
        .collect()
}

/// True when the last `steps` relative changes are all within `stable_tol`.
pub fn is_stable(seq: &[f64], cfg: &TrendConfig) -> bool {
    let c = relative_changes(seq);
    c.len() >= cfg.steps && c[c.len() - cfg.steps..].iter().all(|&r| r <= cfg.stable_tol)
}

/// True when the last `steps` ratios `x_{i+1} / x_i` all reach `growth`.
pub fn is_diverging(seq: &[f64], cfg: &TrendConfig) -> bool {
    if seq.len() < cfg.steps + 1 {
        return false;
    }
    seq[seq.len() - cfg.steps - 1..]
        .windows(2)
        .all(|w| w[0] > 0.0 && w[1] >= cfg.growth * w[0])
}

pub fn verdict(seq: &[f64], cfg: &TrendConfig) -> Verdict {
    if is_diverging(seq, cfg) {
        Verdict::Diverging
    } else if is_stable(seq, cfg) {
        Verdict::Stable
    } else {
        Verdict::Inconclusive
    }
}
