//! Sequential transformation operators, built around the adaptive-step
//! orientation descent.

pub mod descent;
pub mod objective;
pub mod operators;
pub mod pipeline;
pub mod trace;

pub use descent::{orient_descend, DescentError, DescentOutcome, OrientDescentConfig};
pub use objective::{EvalError, Objective, ThermalObjective};
pub use operators::{
    fin_op, orientation_op, overhang_op, wall_translate_op, window_dimension_op, window_translate_op, OperatorError,
};
pub use pipeline::{run_pipeline, run_pipeline_with, PipelineConfig, PipelineError, PipelineOutcome, PipelineReport, Stage, PIPELINE};
pub use trace::{OperatorTrace, StepRecord};
