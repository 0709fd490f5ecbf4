//! Adaptive-step descent over the whole-building orientation.
//!
//! Starting from the current angle the search tries `+initial_step`. An
//! improving candidate is taken and the same step is tried again. A failure
//! (ties included) flips the sign and divides the magnitude by `decay`,
//! rounded to whole degrees; the search ends once the divided magnitude
//! falls below `min_step` or the evaluation budget is spent. Penalties are
//! cached per integer angle so no angle is evaluated twice.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::objective::EvalError;
use super::trace::{OperatorTrace, StepRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientDescentConfig {
    /// First step, degrees.
    pub initial_step: u32,
    /// Smallest step magnitude still tried, degrees.
    pub min_step: u32,
    /// Step-magnitude divisor applied on each failure.
    pub decay: f64,
    /// Evaluation budget per invocation, the start angle included.
    pub max_evals: usize,
    /// Restore the initial magnitude after every accepted move.
    pub reset_on_success: bool,
}

impl Default for OrientDescentConfig {
    fn default() -> Self {
        Self {
            initial_step: 30,
            min_step: 1,
            decay: 2.0,
            max_evals: 32,
            reset_on_success: false,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("initial_step must be positive")]
    InitialStep,
    #[error("min_step must be at least 1")]
    MinStep,
    #[error("decay must be greater than 1")]
    Decay,
    #[error("max_evals must be at least 2")]
    MaxEvals,
}

impl OrientDescentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.initial_step == 0 {
            return Err(ConfigError::InitialStep);
        }
        if self.min_step < 1 {
            return Err(ConfigError::MinStep);
        }
        if !(self.decay > 1.0) {
            return Err(ConfigError::Decay);
        }
        if self.max_evals < 2 {
            return Err(ConfigError::MaxEvals);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome {
    pub best_angle: u16,
    pub best_penalty: f64,
    pub trace: OperatorTrace,
}

#[derive(Debug, Error)]
#[error("orientation descent failed after {} evaluations: {source}", partial.evaluations_used)]
pub struct DescentError {
    pub source: EvalError,
    pub partial: Box<OperatorTrace>,
}

pub fn wrap_angle(angle: i64) -> u16 {
    angle.rem_euclid(360) as u16
}

/// Descends from `start` using `evaluate(angle) -> penalty`.
pub fn orient_descend<F>(start: u16, cfg: &OrientDescentConfig, mut evaluate: F) -> Result<DescentOutcome, DescentError>
where
    F: FnMut(u16) -> Result<f64, EvalError>,
{
    debug_assert!(cfg.validate().is_ok());
    let mut trace = OperatorTrace::new("orientation");
    let mut cache: BTreeMap<u16, f64> = BTreeMap::new();

    let mut current = start % 360;
    let mut current_penalty = match evaluate(current) {
        Ok(p) => p,
        Err(source) => {
            return Err(DescentError {
                source,
                partial: Box::new(trace),
            })
        }
    };
    cache.insert(current, current_penalty);
    trace.evaluations_used = 1;
    trace.penalty_before = current_penalty;

    let mut step = cfg.initial_step as i64;
    loop {
        let candidate = wrap_angle(current as i64 + step);
        let penalty = match cache.get(&candidate) {
            Some(&p) => {
                trace.cache_hits += 1;
                p
            }
            None => {
                if trace.evaluations_used >= cfg.max_evals {
                    break;
                }
                let p = match evaluate(candidate) {
                    Ok(p) => p,
                    Err(source) => {
                        trace.penalty_after = current_penalty;
                        trace.found_angle = Some(current);
                        return Err(DescentError {
                            source,
                            partial: Box::new(trace),
                        });
                    }
                };
                trace.evaluations_used += 1;
                cache.insert(candidate, p);
                p
            }
        };
        let accepted = penalty < current_penalty;
        trace.steps.push(StepRecord {
            subject: "orientation".into(),
            value: candidate as f64,
            penalty,
            accepted,
        });
        if accepted {
            current = candidate;
            current_penalty = penalty;
            trace.moves_accepted += 1;
            if cfg.reset_on_success {
                step = step.signum() * cfg.initial_step as i64;
            }
        } else {
            let next = -(step as f64) / cfg.decay;
            if next.abs() < cfg.min_step as f64 {
                break;
            }
            step = next.round() as i64;
        }
    }

    trace.penalty_after = current_penalty;
    trace.found_angle = Some(current);
    Ok(DescentOutcome {
        best_angle: current,
        best_penalty: current_penalty,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn relative_candidates(start: u16, trace: &OperatorTrace) -> Vec<i64> {
        trace
            .steps
            .iter()
            .map(|s| {
                let d = (s.value as i64 - start as i64).rem_euclid(360);
                if d > 180 {
                    d - 360
                } else {
                    d
                }
            })
            .collect()
    }

    #[test]
    fn flat_curve_walks_the_failure_ladder() {
        for start in [0u16, 90, 355] {
            let out = orient_descend(start, &OrientDescentConfig::default(), |_| Ok(42.0)).unwrap();
            assert_eq!(out.best_angle, start);
            assert_eq!(out.trace.evaluations_used, 7);
            assert_eq!(out.trace.moves_accepted, 0);
            assert_eq!(relative_candidates(start, &out.trace), vec![30, -15, 8, -4, 2, -1]);
        }
    }

    #[test]
    fn cosine_curve_reaches_the_minimum() {
        let f = |a: u16| Ok(100.0 - 50.0 * (a as f64 - 180.0).to_radians().cos());
        let out = orient_descend(90, &OrientDescentConfig::default(), f).unwrap();
        let err = (out.best_penalty - 50.0) / 100.0;
        assert!(err <= 0.02);
        assert_eq!(out.best_angle, 180);
        assert_eq!(out.trace.moves_accepted, 3);
    }

    #[test]
    fn ties_count_as_failures() {
        // plateau on one side of the start
        let f = |a: u16| Ok(if (0..=60).contains(&a) { 1.0 } else { 2.0 });
        let out = orient_descend(0, &OrientDescentConfig::default(), f).unwrap();
        assert_eq!(out.best_angle, 0);
        assert_eq!(out.trace.moves_accepted, 0);
    }

    #[test]
    fn budget_is_respected() {
        let cfg = OrientDescentConfig {
            max_evals: 3,
            ..Default::default()
        };
        // strictly decreasing clockwise: would keep walking forever
        let f = |a: u16| Ok(-(a as f64));
        let out = orient_descend(0, &cfg, f).unwrap();
        assert_eq!(out.trace.evaluations_used, 3);
        assert_eq!(out.best_angle, 60);
    }

    #[test]
    fn reset_on_success_restores_magnitude() {
        let cfg = OrientDescentConfig {
            reset_on_success: true,
            ..Default::default()
        };
        let f = |a: u16| Ok((a as f64 - 100.0).abs());
        let out = orient_descend(0, &cfg, f).unwrap();
        assert_eq!(out.best_angle, 100);
        // every candidate tried right after an accepted move is 30° away
        for pair in out.trace.steps.windows(2) {
            if pair[0].accepted {
                let d = (pair[1].value - pair[0].value).rem_euclid(360.0);
                assert!(d == 30.0 || d == 330.0, "{pair:?}");
            }
        }
    }

    #[test]
    fn evaluator_failure_carries_partial_trace() {
        let mut calls = 0;
        let err = orient_descend(0, &OrientDescentConfig::default(), |a| {
            calls += 1;
            if calls == 3 {
                Err(EvalError::Other("boom".into()))
            } else {
                Ok(a as f64)
            }
        })
        .unwrap_err();
        assert_eq!(err.partial.evaluations_used, 2);
        assert_eq!(err.partial.steps.len(), 1);
    }

    #[test]
    fn config_validation() {
        assert!(OrientDescentConfig::default().validate().is_ok());
        let bad = |f: fn(&mut OrientDescentConfig)| {
            let mut c = OrientDescentConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.initial_step = 0));
        assert!(bad(|c| c.min_step = 0));
        assert!(bad(|c| c.decay = 1.0));
        assert!(bad(|c| c.max_evals = 1));
    }

    proptest! {
        #[test]
        fn never_revisits_and_never_worsens(start in 0u16..360, coeffs in prop::collection::vec(-5.0..5.0f64, 6), max_evals in 2usize..40) {
            let cfg = OrientDescentConfig { max_evals, ..Default::default() };
            let f = |a: u16| {
                let t = (a as f64).to_radians();
                Ok(coeffs.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * t).sin() + c.abs() * (k as f64 * t).cos()).sum())
            };
            let mut seen = std::collections::HashSet::new();
            let mut dup = false;
            let out = orient_descend(start, &cfg, |a| { dup |= !seen.insert(a); f(a) }).unwrap();
            prop_assert!(!dup);
            prop_assert!(out.trace.evaluations_used <= max_evals);
            prop_assert_eq!(out.trace.evaluations_used, seen.len());
            prop_assert!(out.trace.penalty_after <= out.trace.penalty_before);
            prop_assert!(out.best_angle < 360);
        }
    }
}
