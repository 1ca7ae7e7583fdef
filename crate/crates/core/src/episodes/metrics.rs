use std::fmt;

use serde::Serialize;

use super::{EpisodeResult, Outcome};

/// Outcome counts of an episode batch; rates are derived from the counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub episodes: usize,
    pub success: usize,
    pub collision: usize,
    pub timeout: usize,
    pub mean_steps: f64,
    pub mean_min_clearance: f64,
}

impl Metrics {
    pub fn from_counts(success: usize, collision: usize, timeout: usize) -> Self {
        Self {
            episodes: success + collision + timeout,
            success,
            collision,
            timeout,
            mean_steps: 0.0,
            mean_min_clearance: 0.0,
        }
    }

    pub fn from_results(results: &[EpisodeResult]) -> Self {
        let count = |o| results.iter().filter(|r| r.outcome == o).count();
        let n = results.len().max(1) as f64;
        Self {
            mean_steps: results.iter().map(|r| r.steps_taken as f64).sum::<f64>() / n,
            mean_min_clearance: results.iter().map(|r| r.min_clearance).sum::<f64>() / n,
            ..Self::from_counts(count(Outcome::Success), count(Outcome::Collision), count(Outcome::Timeout))
        }
    }

    fn pct(&self, k: usize) -> f64 {
        if self.episodes == 0 {
            0.0
        } else {
            100.0 * k as f64 / self.episodes as f64
        }
    }

    pub fn sr(&self) -> f64 {
        self.pct(self.success)
    }

    pub fn cr(&self) -> f64 {
        self.pct(self.collision)
    }

    pub fn tr(&self) -> f64 {
        self.pct(self.timeout)
    }
}

/// Formats as the "SR - CR - TR" triple.
impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = |v: f64| {
            if v.fract() == 0.0 {
                format!("{v:.0}")
            } else {
                format!("{v:.1}")
            }
        };
        write!(f, "{} - {} - {}", p(self.sr()), p(self.cr()), p(self.tr()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let m = Metrics::from_counts(60, 34, 6);
        assert_eq!((m.sr(), m.cr(), m.tr()), (60.0, 34.0, 6.0));
        assert_eq!(m.to_string(), "60 - 34 - 6");
        let m = Metrics::from_counts(100, 0, 0);
        assert_eq!((m.sr(), m.cr(), m.tr()), (100.0, 0.0, 0.0));
        let m = Metrics::from_counts(0, 1, 0);
        assert_eq!((m.sr(), m.cr(), m.tr()), (0.0, 100.0, 0.0));
    }

    proptest! {
        #[test]
        fn rates_partition_one_hundred(s in 0usize..500, c in 0usize..500, t in 0usize..500) {
            prop_assume!(s + c + t > 0);
            let m = Metrics::from_counts(s, c, t);
            prop_assert_eq!(m.success + m.collision + m.timeout, m.episodes);
            prop_assert!((m.sr() + m.cr() + m.tr() - 100.0).abs() < 1e-9);
        }
    }
}
