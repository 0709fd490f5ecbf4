//! Exhaustive orientation curves and the indicators that score the descent
//! against them.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optimize::{run_pipeline, EvalError, Objective, PipelineConfig, PipelineOutcome, PipelineReport, Stage, ThermalObjective, PIPELINE};
use crate::plan::FloorPlan;
use crate::weather::WeatherSeries;

/// Penalties within this distance of the minimum count as global minima.
pub const MIN_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub angle: u16,
    pub penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationCurve {
    pub resolution_deg: u16,
    pub samples: Vec<CurveSample>,
    pub min_angle: u16,
    pub min_value: f64,
    pub max_angle: u16,
    pub max_value: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MetricsError {
    #[error("resolution {0} does not divide 360")]
    Resolution(u32),
    #[error("curve has no samples")]
    EmptyCurve,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl OrientationCurve {
    /// Builds a curve from samples ordered by angle at stride `resolution_deg`.
    /// Ties for the extremes resolve to the smallest angle.
    pub fn from_samples(resolution_deg: u16, samples: Vec<CurveSample>) -> Result<Self, MetricsError> {
        let first = samples.first().ok_or(MetricsError::EmptyCurve)?;
        let (mut min, mut max) = (first.clone(), first.clone());
        for s in &samples[1..] {
            if s.penalty < min.penalty {
                min = s.clone();
            }
            if s.penalty > max.penalty {
                max = s.clone();
            }
        }
        Ok(Self {
            resolution_deg,
            min_angle: min.angle,
            min_value: min.penalty,
            max_angle: max.angle,
            max_value: max.penalty,
            amplitude: max.penalty - min.penalty,
            samples,
        })
    }

    /// Penalty at the grid point nearest to `angle`.
    pub fn value_at(&self, angle: f64) -> f64 {
        self.samples[self.grid_index(angle)].penalty
    }

    fn grid_index(&self, angle: f64) -> usize {
        let n = self.samples.len() as i64;
        ((angle / self.resolution_deg as f64).round() as i64).rem_euclid(n) as usize
    }

    /// Annotated CSV: comment header, then `angle_deg,penalty` rows.
    pub fn to_csv(&self, plan_id: &str, found_angle: Option<u16>) -> String {
        let mut out = String::new();
        writeln!(out, "# plan_id={plan_id}").unwrap();
        writeln!(out, "# min_angle={} min_value={}", self.min_angle, self.min_value).unwrap();
        writeln!(out, "# max_angle={} max_value={}", self.max_angle, self.max_value).unwrap();
        if let Some(a) = found_angle {
            writeln!(out, "# found_angle={a} found_value={}", self.value_at(a as f64)).unwrap();
        }
        out.push_str("angle_deg,penalty\n");
        for s in &self.samples {
            writeln!(out, "{},{}", s.angle, s.penalty).unwrap();
        }
        out
    }
}

/// Penalty at every `resolution`-degree rotation of `plan`, sampled in parallel.
pub fn orientation_curve<O>(plan: &FloorPlan, objective: &O, resolution: u32) -> Result<OrientationCurve, MetricsError>
where
    O: Objective + Sync + ?Sized,
{
    if resolution == 0 || 360 % resolution != 0 {
        return Err(MetricsError::Resolution(resolution));
    }
    let samples = (0..360 / resolution)
        .into_par_iter()
        .map(|k| {
            let angle = (k * resolution) as u16;
            let penalty = objective.penalty(&plan.with_orientation(angle as f64))?;
            Ok(CurveSample { angle, penalty })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    OrientationCurve::from_samples(resolution as u16, samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSet {
    pub penalty_gap: f64,
    pub angle_deviation: f64,
    pub amplitude_error_pct: f64,
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Scores `found_angle` against the curve. The angle is snapped to the grid;
/// deviation is measured to the nearest global minimum.
pub fn indicators(found_angle: f64, curve: &OrientationCurve) -> Result<IndicatorSet, MetricsError> {
    if curve.samples.is_empty() {
        return Err(MetricsError::EmptyCurve);
    }
    let found = &curve.samples[curve.grid_index(found_angle)];
    let penalty_gap = (found.penalty - curve.min_value).max(0.0);
    let angle_deviation = curve
        .samples
        .iter()
        .filter(|s| s.penalty - curve.min_value <= MIN_TIE_TOLERANCE)
        .map(|s| circular_distance(found.angle as f64, s.angle as f64))
        .fold(f64::INFINITY, f64::min);
    let amplitude_error_pct = if curve.amplitude > 0.0 {
        100.0 * penalty_gap / curve.amplitude
    } else {
        0.0
    };
    Ok(IndicatorSet {
        penalty_gap,
        angle_deviation,
        amplitude_error_pct,
    })
}

/// Rotates the curve so its first maximum sits at angle 0.
pub fn align_curve_to_max(curve: &OrientationCurve) -> OrientationCurve {
    let n = curve.samples.len();
    let Some(shift) = curve.samples.iter().position(|s| s.angle == curve.max_angle) else {
        return curve.clone();
    };
    let samples = (0..n)
        .map(|k| CurveSample {
            angle: curve.samples[k].angle,
            penalty: curve.samples[(k + shift) % n].penalty,
        })
        .collect();
    OrientationCurve::from_samples(curve.resolution_deg, samples).expect("nonempty")
}

/// Whether the aligned minimum lies within ±90° of the point opposite the maximum.
pub fn minimum_opposite_maximum(curve: &OrientationCurve) -> bool {
    let aligned = align_curve_to_max(curve);
    (90..=270).contains(&aligned.min_angle)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvocationResult {
    pub start_angle: u16,
    pub found_angle: u16,
    pub evaluations: usize,
    pub cache_hits: usize,
    pub curve_min_angle: u16,
    pub curve_amplitude: f64,
    /// Scored against the curve of the plan that entered this invocation.
    pub indicators: IndicatorSet,
    /// Scored against the curve of the fully optimized plan.
    pub final_curve_indicators: IndicatorSet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanEntry {
    pub plan_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_penalty: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_penalty: Option<f64>,
    #[serde(default)]
    pub invocations: Vec<InvocationResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_curve_min_angle: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_curve_max_angle: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aligned_min_angle: Option<u16>,
    #[serde(default)]
    pub pipeline_simulations: usize,
    #[serde(default)]
    pub orientation_simulations: usize,
    #[serde(skip)]
    pub run: Option<Box<PlanRun>>,
}

/// Full in-memory results for one plan, not serialized.
#[derive(Debug, Clone)]
pub struct PlanRun {
    pub outcome: PipelineOutcome,
    pub invocation_curves: Vec<OrientationCurve>,
    pub final_curve: OrientationCurve,
}

impl PlanEntry {
    pub fn failed(plan_id: &str, error: impl ToString) -> Self {
        Self {
            plan_id: plan_id.to_string(),
            error: Some(error.to_string()),
            initial_penalty: None,
            final_penalty: None,
            invocations: Vec::new(),
            final_curve_min_angle: None,
            final_curve_max_angle: None,
            aligned_min_angle: None,
            pipeline_simulations: 0,
            orientation_simulations: 0,
            run: None,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }

    pub fn report(&self) -> Option<&PipelineReport> {
        self.run.as_ref().map(|r| &r.outcome.report)
    }
}

/// Optimizes one plan and scores each orientation invocation against the
/// exhaustive curve of the plan that entered it, and against the curve of
/// the final plan.
pub fn benchmark_plan(plan: &FloorPlan, weather: &WeatherSeries, cfg: &PipelineConfig) -> PlanEntry {
    match try_benchmark_plan(plan, weather, cfg) {
        Ok(entry) => entry,
        Err(e) => PlanEntry::failed(&plan.id, e),
    }
}

fn try_benchmark_plan(plan: &FloorPlan, weather: &WeatherSeries, cfg: &PipelineConfig) -> Result<PlanEntry, String> {
    let outcome = run_pipeline(plan, weather, cfg).map_err(|e| e.to_string())?;
    let objective = ThermalObjective::new(weather, cfg.weights, &cfg.comfort);

    let final_curve = orientation_curve(&outcome.plan, &objective, 1).map_err(|e| e.to_string())?;
    let mut invocations = Vec::new();
    let mut invocation_curves = Vec::new();
    let orientation_stages = PIPELINE.iter().enumerate().filter(|(_, s)| **s == Stage::Orientation);
    for ((stage_idx, _), trace) in orientation_stages.zip(outcome.report.orientation_traces()) {
        let input = &outcome.stage_inputs[stage_idx];
        let curve = orientation_curve(input, &objective, 1).map_err(|e| e.to_string())?;
        let found = trace.found_angle.expect("orientation trace records its angle");
        invocations.push(InvocationResult {
            start_angle: input.orientation_deg.round() as u16 % 360,
            found_angle: found,
            evaluations: trace.evaluations_used,
            cache_hits: trace.cache_hits,
            curve_min_angle: curve.min_angle,
            curve_amplitude: curve.amplitude,
            indicators: indicators(found as f64, &curve).map_err(|e| e.to_string())?,
            final_curve_indicators: indicators(found as f64, &final_curve).map_err(|e| e.to_string())?,
        });
        invocation_curves.push(curve);
    }
    let aligned = align_curve_to_max(&final_curve);
    let report = &outcome.report;
    Ok(PlanEntry {
        plan_id: plan.id.clone(),
        error: None,
        initial_penalty: Some(report.initial_penalty),
        final_penalty: Some(report.final_penalty),
        orientation_simulations: invocations.iter().map(|i| i.evaluations).sum(),
        invocations,
        final_curve_min_angle: Some(final_curve.min_angle),
        final_curve_max_angle: Some(final_curve.max_angle),
        aligned_min_angle: Some(aligned.min_angle),
        pipeline_simulations: report.total_simulations,
        run: Some(Box::new(PlanRun {
            outcome,
            invocation_curves,
            final_curve,
        })),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Stats {
    /// Summary with linearly interpolated quartiles. `None` for empty input.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let quantile = |q: f64| {
            let pos = q * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Self {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: v[0],
            q1: quantile(0.25),
            median: quantile(0.5),
            q3: quantile(0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorAggregates {
    pub penalty_gap: Option<Stats>,
    pub angle_deviation: Option<Stats>,
    pub amplitude_error_pct: Option<Stats>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub plans: usize,
    pub succeeded: usize,
    pub failed: usize,
    /// Each invocation scored against the curve of its input plan.
    pub indicators: IndicatorAggregates,
    /// Each invocation scored against the curve of the final plan.
    pub final_curve_indicators: IndicatorAggregates,
    pub invocations: usize,
    pub orientation_simulations: usize,
    pub pipeline_simulations: usize,
    /// `plans × 360`, counted over successful plans.
    pub exhaustive_equivalent: usize,
    pub simulation_ratio: f64,
    pub mean_evaluations_per_invocation: f64,
    /// Plans whose aligned final-curve minimum lies in [90°, 270°].
    pub minimum_opposite_share: f64,
    pub improved_share: f64,
    pub config: PipelineConfig,
    pub entries: Vec<PlanEntry>,
}

impl BenchmarkReport {
    /// Aggregates entries in the order given.
    pub fn from_entries(entries: Vec<PlanEntry>, config: PipelineConfig) -> Self {
        let ok: Vec<&PlanEntry> = entries.iter().filter(|e| e.succeeded()).collect();
        let invs: Vec<&InvocationResult> = ok.iter().flat_map(|e| &e.invocations).collect();
        let aggregate = |pick: fn(&InvocationResult) -> &IndicatorSet| {
            let stats = |f: fn(&IndicatorSet) -> f64| Stats::from_values(&invs.iter().map(|i| f(pick(i))).collect::<Vec<_>>());
            IndicatorAggregates {
                penalty_gap: stats(|i| i.penalty_gap),
                angle_deviation: stats(|i| i.angle_deviation),
                amplitude_error_pct: stats(|i| i.amplitude_error_pct),
            }
        };
        let orientation_simulations: usize = ok.iter().map(|e| e.orientation_simulations).sum();
        let exhaustive_equivalent = ok.len() * 360;
        let share = |pred: &dyn Fn(&PlanEntry) -> bool| {
            if ok.is_empty() {
                0.0
            } else {
                ok.iter().filter(|e| pred(e)).count() as f64 / ok.len() as f64
            }
        };
        Self {
            plans: entries.len(),
            succeeded: ok.len(),
            failed: entries.len() - ok.len(),
            indicators: aggregate(|i| &i.indicators),
            final_curve_indicators: aggregate(|i| &i.final_curve_indicators),
            invocations: invs.len(),
            orientation_simulations,
            pipeline_simulations: ok.iter().map(|e| e.pipeline_simulations).sum(),
            exhaustive_equivalent,
            simulation_ratio: if exhaustive_equivalent > 0 {
                orientation_simulations as f64 / exhaustive_equivalent as f64
            } else {
                0.0
            },
            mean_evaluations_per_invocation: if invs.is_empty() {
                0.0
            } else {
                invs.iter().map(|i| i.evaluations).sum::<usize>() as f64 / invs.len() as f64
            },
            minimum_opposite_share: share(&|e| e.aligned_min_angle.is_some_and(|a| (90..=270).contains(&a))),
            improved_share: share(&|e| matches!((e.initial_penalty, e.final_penalty), (Some(a), Some(b)) if b < a)),
            config,
            entries,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// Benchmarks every plan concurrently. Failures are isolated per plan.
pub fn benchmark(plans: &[FloorPlan], weather: &WeatherSeries, cfg: &PipelineConfig) -> BenchmarkReport {
    let entries = plans.par_iter().map(|p| benchmark_plan(p, weather, cfg)).collect();
    BenchmarkReport::from_entries(entries, *cfg)
}
