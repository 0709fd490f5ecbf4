use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::descent::OrientDescentConfig;
use super::objective::{EvalError, Objective, ThermalObjective};
use super::operators::{
    fin_op, orientation_op, overhang_op, wall_translate_op, window_dimension_op, window_translate_op, OperatorError,
};
use super::trace::OperatorTrace;
use crate::comfort::{ComfortModel, PenaltyWeights};
use crate::plan::{validate_plan, FloorPlan, Violation};
use crate::weather::WeatherSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    WindowTranslation,
    Orientation,
    WindowDimensioning,
    WallTranslation,
    Overhang,
    Fins,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::WindowTranslation => "window_translation",
            Stage::Orientation => "orientation",
            Stage::WindowDimensioning => "window_dimensioning",
            Stage::WallTranslation => "wall_translation",
            Stage::Overhang => "overhang",
            Stage::Fins => "fins",
        }
    }
}

/// Operator order. Orientation runs once after the windows are placed and
/// again after windows and walls have been resized and moved.
pub const PIPELINE: [Stage; 7] = [
    Stage::WindowTranslation,
    Stage::Orientation,
    Stage::WindowDimensioning,
    Stage::WallTranslation,
    Stage::Orientation,
    Stage::Overhang,
    Stage::Fins,
];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub descent: OrientDescentConfig,
    pub weights: PenaltyWeights,
    pub comfort: ComfortModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSummary {
    pub name: String,
    pub before: f64,
    pub after: f64,
    pub evals: usize,
    pub cache_hits: usize,
    pub contribution_pct: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub found_angle: Option<u16>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub plan_id: String,
    pub initial_penalty: f64,
    pub final_penalty: f64,
    pub operators: Vec<OperatorSummary>,
    pub total_simulations: usize,
    pub config: PipelineConfig,
    #[serde(skip)]
    pub traces: Vec<OperatorTrace>,
}

impl PipelineReport {
    fn new(plan_id: &str, config: PipelineConfig) -> Self {
        Self {
            plan_id: plan_id.to_string(),
            initial_penalty: 0.0,
            final_penalty: 0.0,
            operators: Vec::new(),
            total_simulations: 0,
            config,
            traces: Vec::new(),
        }
    }

    fn push(&mut self, trace: OperatorTrace) {
        if self.traces.is_empty() {
            self.initial_penalty = trace.penalty_before;
        }
        self.final_penalty = trace.penalty_after;
        self.total_simulations += trace.evaluations_used;
        self.operators.push(OperatorSummary {
            name: trace.operator_name.clone(),
            before: trace.penalty_before,
            after: trace.penalty_after,
            evals: trace.evaluations_used,
            cache_hits: trace.cache_hits,
            contribution_pct: 0.0,
            found_angle: trace.found_angle,
        });
        self.traces.push(trace);
    }

    /// Share of the total improvement due to each operator.
    fn settle_contributions(&mut self) {
        let total = self.initial_penalty - self.final_penalty;
        for op in &mut self.operators {
            op.contribution_pct = if total > 0.0 { 100.0 * (op.before - op.after) / total } else { 0.0 };
        }
    }

    pub fn total_improvement(&self) -> f64 {
        self.initial_penalty - self.final_penalty
    }

    /// Traces of the orientation operator, in invocation order.
    pub fn orientation_traces(&self) -> impl Iterator<Item = &OperatorTrace> {
        self.traces.iter().filter(|t| t.operator_name == Stage::Orientation.name())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub plan: FloorPlan,
    pub report: PipelineReport,
    /// The plan entering each operator, in pipeline order.
    pub stage_inputs: Vec<FloorPlan>,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid plan: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidPlan(Vec<Violation>),
    #[error("invalid descent configuration: {0}")]
    Config(#[from] super::descent::ConfigError),
    #[error("{stage} operator failed: {source}")]
    Operator {
        stage: &'static str,
        source: EvalError,
        partial: Box<PipelineReport>,
    },
}

/// Runs the full operator sequence with the thermal objective.
pub fn run_pipeline(plan: &FloorPlan, weather: &WeatherSeries, cfg: &PipelineConfig) -> Result<PipelineOutcome, PipelineError> {
    let objective = ThermalObjective::new(weather, cfg.weights, &cfg.comfort);
    run_pipeline_with(plan, &objective, cfg)
}

/// Runs the full operator sequence with any objective. The plan's
/// orientation is snapped to a whole degree first.
pub fn run_pipeline_with<O: Objective + ?Sized>(plan: &FloorPlan, objective: &O, cfg: &PipelineConfig) -> Result<PipelineOutcome, PipelineError> {
    cfg.descent.validate()?;
    let violations = validate_plan(plan);
    if !violations.is_empty() {
        return Err(PipelineError::InvalidPlan(violations));
    }
    let mut current = plan.with_orientation(plan.orientation_deg.round());
    let mut report = PipelineReport::new(&plan.id, *cfg);
    let mut stage_inputs = Vec::with_capacity(PIPELINE.len());

    for stage in PIPELINE {
        stage_inputs.push(current.clone());
        let result = match stage {
            Stage::WindowTranslation => window_translate_op(&current, objective),
            Stage::Orientation => orientation_op(&current, objective, &cfg.descent),
            Stage::WindowDimensioning => window_dimension_op(&current, objective),
            Stage::WallTranslation => wall_translate_op(&current, objective),
            Stage::Overhang => overhang_op(&current, objective),
            Stage::Fins => fin_op(&current, objective),
        };
        match result {
            Ok((next, trace)) => {
                current = next;
                report.push(trace);
            }
            Err(OperatorError { source, partial }) => {
                report.push(*partial);
                report.settle_contributions();
                return Err(PipelineError::Operator {
                    stage: stage.name(),
                    source,
                    partial: Box::new(report),
                });
            }
        }
    }
    report.settle_contributions();
    Ok(PipelineOutcome {
        plan: current,
        report,
        stage_inputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::tests::{single_room, south_window};

    #[test]
    fn sequence_and_flat_fixpoint() {
        let plan = single_room(0.0, south_window(1.37, 1.26));
        let flat = |_: &FloorPlan| Ok(5.0);
        let out = run_pipeline_with(&plan, &flat, &PipelineConfig::default()).unwrap();
        let names: Vec<&str> = out.report.operators.iter().map(|o| o.name.as_str()).collect();
        assert_eq!(names, [
            "window_translation",
            "orientation",
            "window_dimensioning",
            "wall_translation",
            "orientation",
            "overhang",
            "fins"
        ]);
        assert_eq!(out.plan, plan);
        assert_eq!(out.report.total_improvement(), 0.0);
        assert!(out.report.operators.iter().all(|o| o.contribution_pct == 0.0));
        assert_eq!(out.stage_inputs.len(), 7);
    }

    #[test]
    fn contributions_sum_to_hundred() {
        let plan = single_room(0.0, south_window(1.37, 1.26));
        let weather = WeatherSeries::coimbra_synthetic();
        let out = run_pipeline(&plan, &weather, &PipelineConfig::default()).unwrap();
        let r = &out.report;
        assert!(r.final_penalty < r.initial_penalty);
        let sum: f64 = r.operators.iter().map(|o| o.contribution_pct).sum();
        assert!((sum - 100.0).abs() < 1e-9);
        assert_eq!(r.total_simulations, r.operators.iter().map(|o| o.evals).sum::<usize>());
        for w in r.operators.windows(2) {
            assert_eq!(w[0].after, w[1].before);
        }
        let v: serde_json::Value = serde_json::from_str(&r.to_json_pretty()).unwrap();
        for key in ["plan_id", "initial_penalty", "final_penalty", "operators", "total_simulations"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        for key in ["name", "before", "after", "evals", "cache_hits", "contribution_pct"] {
            assert!(v["operators"][0].get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn invalid_plan_rejected() {
        let plan = single_room(0.0, south_window(3.5, 1.0));
        let flat = |_: &FloorPlan| Ok(5.0);
        assert!(matches!(
            run_pipeline_with(&plan, &flat, &PipelineConfig::default()),
            Err(PipelineError::InvalidPlan(_))
        ));
    }

    #[test]
    fn failure_keeps_partial_report() {
        let plan = single_room(0.0, south_window(1.37, 1.26));
        let f = |p: &FloorPlan| {
            if p.orientation_deg != 0.0 {
                Err(EvalError::Other("rotation unsupported".into()))
            } else {
                Ok(1.0)
            }
        };
        match run_pipeline_with(&plan, &f, &PipelineConfig::default()) {
            Err(PipelineError::Operator { stage, partial, .. }) => {
                assert_eq!(stage, "orientation");
                assert_eq!(partial.operators.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
