//! Single-node lumped-capacitance thermal model, one node per space.
//!
//! Each space exchanges heat only with outdoors through its exterior walls
//! and windows and receives solar plus internal gains:
//!
//! `C·dT/dt = UA·(T_out − T) + Q_solar + Q_int`
//!
//! Forcing is held constant over each hour, so the hourly step uses the
//! exact solution `T(t+1) = T_eq + (T(t) − T_eq)·exp(−UA·Δt/C)`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Once;

use serde::Serialize;
use thiserror::Error;

use crate::plan::{normalize_deg, side_azimuth, validate_plan, FloorPlan, Violation, WallSide};
use crate::solar::FacadeSun;
use crate::weather::{WeatherSeries, HOURS_PER_YEAR};

/// Volumetric heat capacity of air, J/m³K.
pub const AIR_HEAT_CAPACITY: f64 = 1200.0;
/// Nominal loss coefficient for spaces with no exterior surface, W/K per m²
/// of floor.
pub const INTERIOR_FALLBACK_UA: f64 = 0.5;
const STEP_SECONDS: f64 = 3600.0;

static SIMULATIONS: AtomicU64 = AtomicU64::new(0);
static INTERIOR_WARNING: Once = Once::new();

/// Number of simulations run by this process so far.
pub fn simulation_count() -> u64 {
    SIMULATIONS.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperatureSeries {
    pub space_name: String,
    pub temps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    /// One series per plan space, in plan order.
    pub series: Vec<TemperatureSeries>,
    /// Value of the process-wide simulation counter after this run.
    pub evaluation_token: u64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error("invalid plan: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidPlan(Vec<Violation>),
}

/// Lumped parameters of one space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceParameters {
    /// Loss coefficient to outdoors, W/K.
    pub ua: f64,
    /// Heat capacity, J/K.
    pub capacitance: f64,
    /// Set when the space has no exterior surface and uses the nominal UA.
    pub interior: bool,
}

pub fn space_parameters(plan: &FloorPlan, idx: usize) -> SpaceParameters {
    let space = &plan.spaces[idx];
    let exterior_len: f64 = WallSide::ALL.iter().map(|&s| plan.exterior_length(idx, s)).sum();
    let wall_area = exterior_len * space.ceiling_height;
    let window_area = space.window_area();
    let opaque = (wall_area - window_area).max(0.0);
    let mut ua = plan.envelope.wall_u * opaque + plan.envelope.window_u * window_area;
    let interior = ua <= 0.0;
    if interior {
        INTERIOR_WARNING.call_once(|| {
            log::warn!(
                "space {:?} in plan {:?} has no exterior surface; using nominal {INTERIOR_FALLBACK_UA} W/K per m² to outdoors",
                space.name,
                plan.id
            );
        });
        ua = INTERIOR_FALLBACK_UA * space.floor_area();
    }
    SpaceParameters {
        ua,
        capacitance: plan.envelope.capacitance_multiplier * AIR_HEAT_CAPACITY * space.volume(),
        interior,
    }
}

/// Hourly air temperature of every space over the weather year.
/// `orientation_override` replaces the plan orientation for this run only.
pub fn simulate_plan(
    plan: &FloorPlan,
    weather: &WeatherSeries,
    orientation_override: Option<f64>,
) -> Result<SimulationResult, SimError> {
    let violations = validate_plan(plan);
    if !violations.is_empty() {
        return Err(SimError::InvalidPlan(violations));
    }
    let orientation = orientation_override.map_or(plan.orientation_deg, normalize_deg);
    let hours = weather.hours();
    let sun = weather.sun_trig();
    let shgc = plan.envelope.shgc;

    let series = plan
        .spaces
        .iter()
        .enumerate()
        .map(|(idx, space)| {
            let params = space_parameters(plan, idx);
            let decay = (-params.ua * STEP_SECONDS / params.capacitance).exp();
            let q_int = space.internal_gain * space.floor_area();
            let facades: Vec<(f64, f64)> = space
                .windows
                .iter()
                .map(|w| {
                    let f = side_azimuth(w.wall_side, orientation).to_radians();
                    (f.cos(), f.sin())
                })
                .collect();

            let mut temps = Vec::with_capacity(HOURS_PER_YEAR);
            let mut t = hours[0].dry_bulb;
            temps.push(t);
            for h in 0..HOURS_PER_YEAR - 1 {
                let wx = hours[h];
                let s = sun[h];
                let mut q_solar = 0.0;
                for (w, &(cos_f, sin_f)) in space.windows.iter().zip(&facades) {
                    let cos_g = s.cos_az * cos_f + s.sin_az * sin_f;
                    let sin_g = s.sin_az * cos_f - s.cos_az * sin_f;
                    let geo = FacadeSun::from_parts(s.up, s.cos_alt, s.tan_alt, cos_g, sin_g);
                    let irr = geo.irradiance(wx.dni, wx.dhi);
                    q_solar += shgc * w.area() * irr * (1.0 - geo.shading(w));
                }
                let t_eq = wx.dry_bulb + (q_solar + q_int) / params.ua;
                t = t_eq + (t - t_eq) * decay;
                temps.push(t);
            }
            TemperatureSeries {
                space_name: space.name.clone(),
                temps,
            }
        })
        .collect();

    let evaluation_token = SIMULATIONS.fetch_add(1, Ordering::Relaxed) + 1;
    Ok(SimulationResult {
        series,
        evaluation_token,
    })
}

/// `hour,space,temp_c` rows for every space and hour.
pub fn temperatures_csv(result: &SimulationResult) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("hour,space,temp_c\n");
    for s in &result.series {
        for (h, t) in s.temps.iter().enumerate() {
            writeln!(out, "{h},{},{t}", s.space_name).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::tests::{single_room, south_window};
    use crate::weather::WeatherHour;

    fn quiet_room() -> FloorPlan {
        let mut plan = single_room(0.0, south_window(1.37, 1.26));
        plan.spaces[0].internal_gain = 0.0;
        plan
    }

    #[test]
    fn constant_driver_is_a_fixed_point() {
        let plan = quiet_room();
        let weather = WeatherSeries::constant(40.0, 20.0, 0.0, 0.0).unwrap();
        let r = simulate_plan(&plan, &weather, None).unwrap();
        assert_eq!(r.series.len(), 1);
        assert_eq!(r.series[0].temps.len(), 8760);
        assert!(r.series[0].temps.iter().all(|&t| (t - 20.0).abs() < 1e-12));
    }

    #[test]
    fn capacitance_slows_response_but_keeps_fixed_point() {
        let mut plan = single_room(0.0, south_window(1.37, 1.26));
        let weather = WeatherSeries::constant(40.0, 10.0, 0.0, 0.0).unwrap();
        let fast = simulate_plan(&plan, &weather, None).unwrap();
        plan.envelope.capacitance_multiplier *= 2.0;
        let slow = simulate_plan(&plan, &weather, None).unwrap();
        let p = space_parameters(&plan, 0);
        let fixed = 10.0 + 4.0 * 16.0 / p.ua;
        let (a, b) = (&fast.series[0].temps, &slow.series[0].temps);
        assert!((a[8759] - fixed).abs() < 1e-9);
        assert!((b[8759] - fixed).abs() < 1e-9);
        for t in 1..100 {
            assert!((b[t] - fixed).abs() > (a[t] - fixed).abs(), "hour {t}");
        }
    }

    #[test]
    fn interior_space_uses_nominal_ua() {
        let mut plan = quiet_room();
        plan.spaces[0].windows.clear();
        plan.envelope.wall_u = 0.0;
        let p = space_parameters(&plan, 0);
        assert!(p.interior);
        assert!((p.ua - 0.5 * 16.0).abs() < 1e-12);
        let weather = WeatherSeries::coimbra_synthetic();
        assert!(simulate_plan(&plan, &weather, None).is_ok());
    }

    #[test]
    fn invalid_plan_is_rejected() {
        let plan = single_room(0.0, south_window(3.5, 1.0));
        let weather = WeatherSeries::constant(40.0, 20.0, 0.0, 0.0).unwrap();
        assert!(matches!(simulate_plan(&plan, &weather, None), Err(SimError::InvalidPlan(_))));
    }

    /// Summing the exact update over the year gives
    /// `Σ T_k = Σ T_eq,k − (T_last − T_0)/(1 − e^(−UA·Δt/C))`, with `T_eq`
    /// rebuilt here from the public solar functions.
    #[test]
    fn annual_energy_balance_matches_equilibrium_sum() {
        use crate::plan::facade_azimuth;
        use crate::solar::{incident_irradiance, shading_fraction};
        let mut window = south_window(1.37, 1.26);
        window.overhang = Some(crate::plan::Overhang { depth: 0.4 });
        let weather = WeatherSeries::coimbra_synthetic();
        let mut sums = Vec::new();
        for orientation in [0.0, 180.0] {
            let plan = single_room(orientation, window.clone());
            let r = simulate_plan(&plan, &weather, None).unwrap();
            let temps = &r.series[0].temps;
            let p = space_parameters(&plan, 0);
            let w = &plan.spaces[0].windows[0];
            let facade = facade_azimuth(w, &plan);
            let mut eq_sum = 0.0;
            for h in 0..8759 {
                let wx = weather.hours()[h];
                let sun = weather.sun()[h];
                let q_sun = plan.envelope.shgc
                    * w.area()
                    * incident_irradiance(sun, facade, wx.dni, wx.dhi)
                    * (1.0 - shading_fraction(w, sun, facade));
                eq_sum += wx.dry_bulb + (q_sun + 4.0 * 16.0) / p.ua;
            }
            let decay = (-p.ua * 3600.0 / p.capacitance).exp();
            let expected = eq_sum - (temps[8759] - temps[0]) / (1.0 - decay);
            let actual: f64 = temps[..8759].iter().sum();
            assert!((actual - expected).abs() < 1e-9 * expected.abs(), "{actual} vs {expected}");
            sums.push(actual);
        }
        assert!(sums[0] > sums[1], "south-facing glazing must run warmer");
    }

    #[test]
    fn deterministic_and_periodic() {
        let plan = single_room(0.0, south_window(1.37, 1.26));
        let weather = WeatherSeries::coimbra_synthetic();
        let a = simulate_plan(&plan, &weather, Some(37.0)).unwrap();
        let b = simulate_plan(&plan, &weather, Some(37.0)).unwrap();
        let c = simulate_plan(&plan, &weather, Some(397.0)).unwrap();
        assert_eq!(a.series, b.series);
        assert_eq!(a.series, c.series);
        assert!(b.evaluation_token > a.evaluation_token);
    }

    #[test]
    fn boundedness() {
        let plan = single_room(0.0, south_window(1.37, 1.26));
        let weather = WeatherSeries::coimbra_synthetic();
        let r = simulate_plan(&plan, &weather, None).unwrap();
        let p = space_parameters(&plan, 0);
        let hours: &[WeatherHour] = weather.hours();
        let t_min = hours.iter().map(|h| h.dry_bulb).fold(f64::INFINITY, f64::min);
        let t_max = hours.iter().map(|h| h.dry_bulb).fold(f64::NEG_INFINITY, f64::max);
        let g_max = hours
            .iter()
            .map(|h| 0.7 * plan.spaces[0].window_area() * (h.dni + 0.5 * h.dhi))
            .fold(0.0, f64::max)
            + 4.0 * 16.0;
        for &t in &r.series[0].temps {
            assert!(t >= t_min - 1e-9 && t <= t_max + g_max / p.ua + 1e-9);
        }
    }

    #[test]
    fn higher_shgc_never_cools() {
        let mut plan = single_room(0.0, south_window(1.37, 1.26));
        let weather = WeatherSeries::coimbra_synthetic();
        let low = simulate_plan(&plan, &weather, None).unwrap();
        plan.envelope.shgc = 0.9;
        let high = simulate_plan(&plan, &weather, None).unwrap();
        for (a, b) in low.series[0].temps.iter().zip(&high.series[0].temps) {
            assert!(b >= a);
        }
    }

    #[test]
    fn temperature_dump_layout() {
        let plan = quiet_room();
        let weather = WeatherSeries::constant(40.0, 20.0, 0.0, 0.0).unwrap();
        let r = simulate_plan(&plan, &weather, None).unwrap();
        let csv = temperatures_csv(&r);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("hour,space,temp_c"));
        assert_eq!(lines.next(), Some("0,room,20"));
        assert_eq!(csv.lines().count(), 8761);
    }
}
