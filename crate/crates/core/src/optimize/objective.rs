use thiserror::Error;

use crate::comfort::{total_penalty, ComfortBand, ComfortModel, PenaltyError, PenaltyReport, PenaltyWeights};
use crate::plan::FloorPlan;
use crate::sim::{simulate_plan, SimError};
use crate::weather::WeatherSeries;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error("{0}")]
    Other(String),
}

/// Anything that scores a plan; lower is better.
pub trait Objective {
    fn penalty(&self, plan: &FloorPlan) -> Result<f64, EvalError>;
}

impl<F> Objective for F
where
    F: Fn(&FloorPlan) -> Result<f64, EvalError>,
{
    fn penalty(&self, plan: &FloorPlan) -> Result<f64, EvalError> {
        self(plan)
    }
}

/// Annual discomfort degree-hours from the thermal model.
#[derive(Debug, Clone)]
pub struct ThermalObjective<'w> {
    weather: &'w WeatherSeries,
    bands: Vec<ComfortBand>,
    weights: PenaltyWeights,
}

impl<'w> ThermalObjective<'w> {
    pub fn new(weather: &'w WeatherSeries, weights: PenaltyWeights, comfort: &ComfortModel) -> Self {
        Self {
            weather,
            bands: comfort.hourly_bands(weather),
            weights,
        }
    }

    pub fn weather(&self) -> &WeatherSeries {
        self.weather
    }

    pub fn weights(&self) -> PenaltyWeights {
        self.weights
    }

    pub fn report(&self, plan: &FloorPlan, orientation_override: Option<f64>) -> Result<PenaltyReport, EvalError> {
        let result = simulate_plan(plan, self.weather, orientation_override)?;
        Ok(total_penalty(&result, &self.bands, self.weights)?)
    }
}

impl Objective for ThermalObjective<'_> {
    fn penalty(&self, plan: &FloorPlan) -> Result<f64, EvalError> {
        Ok(self.report(plan, None)?.total)
    }
}
