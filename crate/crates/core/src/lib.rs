//! Floor-plan thermal discomfort evaluation and sequential design
//! optimization, with an adaptive-step orientation descent scored against
//! exhaustive orientation curves.

// `!(x >= 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comfort;
pub mod generate;
pub mod metrics;
pub mod optimize;
pub mod plan;
pub mod sim;
pub mod solar;
pub mod weather;

pub use comfort::{comfort_band, deviation_penalty, total_penalty, ComfortBand, ComfortModel, PenaltyError, PenaltyReport, PenaltyWeights};
pub use generate::{generate_plan_set, generate_synthetic_plan, DesignProgram, GenerateError, ProgramSpace};
pub use metrics::{align_curve_to_max, benchmark, indicators, orientation_curve, BenchmarkReport, IndicatorSet, OrientationCurve};
pub use optimize::{orient_descend, run_pipeline, OrientDescentConfig, PipelineConfig, PipelineReport};
pub use plan::{validate_plan, FloorPlan, Violation};
pub use sim::{simulate_plan, SimulationResult};
pub use weather::{load_weather, WeatherSeries};
