//! Finite-horizon capture tests for slow-flow and oscillator runs.

use std::f64::consts::PI;
use std::fmt;

use autores_core::integrate::Trajectory;
use serde::{Deserialize, Serialize};

/// A slow-flow run counts as captured when its amplitude at the horizon keeps
/// up with `sqrt(lambda tau)` and its phase never wandered beyond `4 pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaptureCriterion {
    pub horizon_tau: f64,
    pub ratio_threshold: f64,
}

impl Default for CaptureCriterion {
    fn default() -> Self {
        CaptureCriterion {
            horizon_tau: 50.0,
            ratio_threshold: 0.8,
        }
    }
}

pub const PHASE_BOUND: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptureStatus {
    Captured,
    NotCaptured,
    Failed,
}

impl fmt::Display for CaptureStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaptureStatus::Captured => "captured",
            CaptureStatus::NotCaptured => "not_captured",
            CaptureStatus::Failed => "failed",
        })
    }
}

impl CaptureCriterion {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.horizon_tau > 0.0 && self.horizon_tau.is_finite()) {
            return Err(format!("horizon must be positive, got {}", self.horizon_tau));
        }
        if !(self.ratio_threshold > 0.0 && self.ratio_threshold < 1.0) {
            return Err(format!("ratio threshold must lie in (0, 1), got {}", self.ratio_threshold));
        }
        Ok(())
    }

    /// `rho(horizon) / sqrt(lambda horizon)`.
    pub fn growth_ratio(&self, tr: &Trajectory, lambda: f64) -> f64 {
        tr.last().y[0] / (lambda * self.horizon_tau).sqrt()
    }

    pub fn evaluate(&self, tr: &Trajectory, lambda: f64) -> CaptureStatus {
        let last = tr.last();
        if (last.t - self.horizon_tau).abs() > 1e-9 * self.horizon_tau.max(1.0) {
            return CaptureStatus::Failed;
        }
        let bounded = tr.component(1).all(|psi| psi.abs() <= PHASE_BOUND);
        if bounded && self.growth_ratio(tr, lambda) >= self.ratio_threshold {
            CaptureStatus::Captured
        } else {
            CaptureStatus::NotCaptured
        }
    }
}

/// Phase locking of the oscillator: the unwrapped mismatch stays within
/// `half_width` of `target` for the whole run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLock {
    pub target: f64,
    pub half_width: f64,
}

impl PhaseLock {
    pub fn around(target: f64) -> Self {
        PhaseLock {
            target,
            half_width: PI / 2.0,
        }
    }

    pub fn max_deviation(&self, delta: &[f64]) -> f64 {
        delta
            .iter()
            .map(|d| (d - self.target).abs())
            .fold(0.0, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
    }

    pub fn holds(&self, delta: &[f64]) -> bool {
        self.max_deviation(delta) <= self.half_width
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use autores_core::integrate::{Sample, Termination, TrajectoryMeta};

    fn traj(points: &[(f64, f64, f64)]) -> Trajectory {
        Trajectory {
            samples: points
                .iter()
                .map(|&(t, r, p)| Sample { t, y: vec![r, p] })
                .collect(),
            meta: TrajectoryMeta {
                accepted_steps: 1,
                rejected_steps: 0,
                terminated_by: Termination::EndOfSpan,
            },
        }
    }

    #[test]
    fn capture_needs_growth_and_bounded_phase() {
        let c = CaptureCriterion::default();
        let grown = 0.9 * 50f64.sqrt();
        assert_eq!(c.evaluate(&traj(&[(0.0, 0.3, 0.0), (50.0, grown, 3.0)]), 1.0), CaptureStatus::Captured);
        assert_eq!(
            c.evaluate(&traj(&[(0.0, 0.3, 0.0), (25.0, 1.0, 13.0), (50.0, grown, 3.0)]), 1.0),
            CaptureStatus::NotCaptured
        );
        assert_eq!(c.evaluate(&traj(&[(0.0, 0.3, 0.0), (50.0, 1.0, 0.0)]), 1.0), CaptureStatus::NotCaptured);
        assert_eq!(c.evaluate(&traj(&[(0.0, 0.3, 0.0), (20.0, 5.0, 0.0)]), 1.0), CaptureStatus::Failed);
    }

    #[test]
    fn criterion_validation() {
        assert!(CaptureCriterion::default().validate().is_ok());
        let bad = CaptureCriterion {
            ratio_threshold: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn phase_lock_band() {
        let lock = PhaseLock::around(PI);
        assert!(lock.holds(&[PI, 2.0, 4.5]));
        assert!(!lock.holds(&[PI, 1.5]));
        assert!(!lock.holds(&[PI, f64::NAN]));
    }
}
