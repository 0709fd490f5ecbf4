use serde::{Deserialize, Serialize};

/// One candidate tried by an operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// What was changed, e.g. `orientation` or `living room/0 offset`.
    pub subject: String,
    /// Candidate value (angle, offset, area or depth).
    pub value: f64,
    pub penalty: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorTrace {
    pub operator_name: String,
    pub penalty_before: f64,
    pub penalty_after: f64,
    /// Objective evaluations actually run, the baseline included.
    pub evaluations_used: usize,
    pub cache_hits: usize,
    pub moves_accepted: usize,
    /// Angle returned by the orientation operator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub found_angle: Option<u16>,
    pub steps: Vec<StepRecord>,
}

impl OperatorTrace {
    pub fn new(name: &str) -> Self {
        Self {
            operator_name: name.to_string(),
            penalty_before: 0.0,
            penalty_after: 0.0,
            evaluations_used: 0,
            cache_hits: 0,
            moves_accepted: 0,
            found_angle: None,
            steps: Vec::new(),
        }
    }

    pub fn improvement(&self) -> f64 {
        self.penalty_before - self.penalty_after
    }
}
