//! Adaptive comfort band and the degree-hours discomfort penalty.
//!
//! The band follows the adaptive model for buildings without mechanical
//! cooling: comfort temperature `0.33·T_rm + 18.8` with the running mean
//! clamped to [10, 30] °C, ±3 K wide. The penalty of a plan is the sum over
//! spaces and hours of the weighted excursion outside the band.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{SimulationResult, TemperatureSeries};
use crate::weather::{WeatherSeries, DAYS_PER_YEAR};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    /// Underheating weight.
    pub w1: f64,
    /// Overheating weight.
    pub w2: f64,
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        Self { w1: 1.0, w2: 1.0 }
    }
}

impl PenaltyWeights {
    pub fn new(w1: f64, w2: f64) -> Result<Self, PenaltyError> {
        if !(w1.is_finite() && w2.is_finite() && w1 >= 0.0 && w2 >= 0.0) {
            return Err(PenaltyError::Weights(w1, w2));
        }
        Ok(Self { w1, w2 })
    }
}

/// Constants of the adaptive comfort model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComfortModel {
    pub slope: f64,
    pub intercept: f64,
    pub half_width: f64,
    /// Running-mean smoothing constant.
    pub alpha: f64,
    pub clamp_low: f64,
    pub clamp_high: f64,
}

impl Default for ComfortModel {
    fn default() -> Self {
        Self {
            slope: 0.33,
            intercept: 18.8,
            half_width: 3.0,
            alpha: 0.8,
            clamp_low: 10.0,
            clamp_high: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComfortBand {
    pub t1: f64,
    pub t2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacePenalty {
    pub name: String,
    pub under: f64,
    pub over: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyReport {
    pub total: f64,
    pub weights: PenaltyWeights,
    pub spaces: Vec<SpacePenalty>,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PenaltyError {
    #[error("space {space:?} has {found} hours but the comfort bands cover {expected}")]
    LengthMismatch { space: String, expected: usize, found: usize },
    #[error("weights must be finite and nonnegative, got w1={0}, w2={1}")]
    Weights(f64, f64),
}

impl ComfortModel {
    /// Exponentially weighted running mean of daily outdoor temperature,
    /// one value per day, seeded with the annual mean.
    pub fn running_mean_outdoor(&self, weather: &WeatherSeries) -> Vec<f64> {
        let hours = weather.hours();
        let daily: Vec<f64> = hours.chunks(24).map(|d| d.iter().map(|h| h.dry_bulb).sum::<f64>() / 24.0).collect();
        let annual = hours.iter().map(|h| h.dry_bulb).sum::<f64>() / hours.len() as f64;
        let mut out = Vec::with_capacity(DAYS_PER_YEAR);
        let mut rm = annual;
        out.push(rm);
        for d in 1..daily.len() {
            rm = self.running_mean_step(rm, daily[d - 1]);
            out.push(rm);
        }
        out
    }

    pub fn running_mean_step(&self, previous_mean: f64, previous_day: f64) -> f64 {
        (1.0 - self.alpha) * previous_day + self.alpha * previous_mean
    }

    pub fn comfort_band(&self, t_rm: f64) -> ComfortBand {
        let clamped = t_rm.max(self.clamp_low).min(self.clamp_high);
        let tc = self.slope * clamped + self.intercept;
        ComfortBand {
            t1: tc - self.half_width,
            t2: tc + self.half_width,
        }
    }

    /// Comfort band for every hour of the weather year.
    pub fn hourly_bands(&self, weather: &WeatherSeries) -> Vec<ComfortBand> {
        self.running_mean_outdoor(weather)
            .into_iter()
            .flat_map(|rm| std::iter::repeat_n(self.comfort_band(rm), 24))
            .collect()
    }
}

/// Running mean under the default comfort model.
pub fn running_mean_outdoor(weather: &WeatherSeries) -> Vec<f64> {
    ComfortModel::default().running_mean_outdoor(weather)
}

/// Comfort band under the default comfort model.
pub fn comfort_band(t_rm: f64) -> ComfortBand {
    ComfortModel::default().comfort_band(t_rm)
}

/// Weighted distance of `t` outside the band, degree-hours for one hour.
#[inline]
pub fn deviation_penalty(t: f64, band: ComfortBand, weights: PenaltyWeights) -> f64 {
    if t < band.t1 {
        weights.w1 * (band.t1 - t)
    } else if t > band.t2 {
        weights.w2 * (t - band.t2)
    } else {
        0.0
    }
}

fn space_penalty(series: &TemperatureSeries, bands: &[ComfortBand], weights: PenaltyWeights) -> Result<SpacePenalty, PenaltyError> {
    if series.temps.len() != bands.len() {
        return Err(PenaltyError::LengthMismatch {
            space: series.space_name.clone(),
            expected: bands.len(),
            found: series.temps.len(),
        });
    }
    let mut under = 0.0;
    let mut over = 0.0;
    for (&t, &band) in series.temps.iter().zip(bands) {
        if t < band.t1 {
            under += deviation_penalty(t, band, weights);
        } else if t > band.t2 {
            over += deviation_penalty(t, band, weights);
        }
    }
    Ok(SpacePenalty {
        name: series.space_name.clone(),
        under,
        over,
        total: under + over,
    })
}

/// Sum over spaces and hours of the deviation penalty.
pub fn total_penalty(result: &SimulationResult, bands: &[ComfortBand], weights: PenaltyWeights) -> Result<PenaltyReport, PenaltyError> {
    let spaces = result
        .series
        .iter()
        .map(|s| space_penalty(s, bands, weights))
        .collect::<Result<Vec<_>, _>>()?;
    let total = spaces.iter().map(|s| s.total).sum();
    Ok(PenaltyReport { total, weights, spaces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weather::{WeatherHour, HOURS_PER_YEAR};
    use proptest::prelude::*;

    fn band(t1: f64, t2: f64) -> ComfortBand {
        ComfortBand { t1, t2 }
    }

    fn result(series: Vec<(&str, Vec<f64>)>) -> SimulationResult {
        SimulationResult {
            series: series
                .into_iter()
                .map(|(n, temps)| TemperatureSeries {
                    space_name: n.to_string(),
                    temps,
                })
                .collect(),
            evaluation_token: 0,
        }
    }

    #[test]
    fn band_examples() {
        let b = comfort_band(5.0);
        assert!((b.t1 - 19.1).abs() < 1e-12 && (b.t2 - 25.1).abs() < 1e-12);
        let b = comfort_band(20.0);
        assert!((b.t1 - 22.4).abs() < 1e-12 && (b.t2 - 28.4).abs() < 1e-12);
        let b = comfort_band(35.0);
        assert!((b.t1 - 25.7).abs() < 1e-12 && (b.t2 - 31.7).abs() < 1e-12);
        assert_eq!(comfort_band(5.0), comfort_band(10.0));
        assert_eq!(comfort_band(35.0), comfort_band(30.0));
    }

    #[test]
    fn penalty_examples() {
        let w = PenaltyWeights::default();
        assert_eq!(deviation_penalty(24.0, band(22.4, 28.4), w), 0.0);
        assert!((deviation_penalty(20.4, band(22.4, 28.4), w) - 2.0).abs() < 1e-12);
        let w2 = PenaltyWeights { w1: 1.0, w2: 2.0 };
        assert!((deviation_penalty(30.4, band(22.4, 28.4), w2) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn running_mean_step_example() {
        assert!((ComfortModel::default().running_mean_step(10.0, 20.0) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn constant_weather_running_mean() {
        let w = WeatherSeries::constant(40.0, 20.0, 0.0, 0.0).unwrap();
        let rm = running_mean_outdoor(&w);
        assert_eq!(rm.len(), 365);
        assert!(rm.iter().all(|&v| (v - 20.0).abs() < 1e-12));
    }

    #[test]
    fn running_mean_is_a_lagged_low_pass() {
        // daily means follow a pure annual sinusoid
        let amp = 10.0;
        let omega = 2.0 * std::f64::consts::PI / 365.0;
        let hours: Vec<WeatherHour> = (0..HOURS_PER_YEAR)
            .map(|h| WeatherHour {
                dry_bulb: 15.0 + amp * (omega * (h / 24) as f64).sin(),
                dni: 0.0,
                dhi: 0.0,
            })
            .collect();
        let w = WeatherSeries::new(40.0, 0.0, hours).unwrap();
        let rm = running_mean_outdoor(&w);

        // steady-state response of y[d] = 0.2·x[d−1] + 0.8·y[d−1] to a sinusoid
        let a = 0.8f64;
        let (re, im) = (1.0 - a * omega.cos(), a * omega.sin());
        let (num_re, num_im) = ((1.0 - a) * omega.cos(), -(1.0 - a) * omega.sin());
        let den = re * re + im * im;
        let h_re = (num_re * re + num_im * im) / den;
        let h_im = (num_im * re - num_re * im) / den;
        let gain = (h_re * h_re + h_im * h_im).sqrt();
        let phase = h_im.atan2(h_re);
        let lag_days = -phase / omega;
        assert!(gain < 1.0);
        assert!(lag_days > 4.0 && lag_days < 6.0, "{lag_days}");
        // past the initial transient the computed series tracks the analytic one
        for (d, &got) in rm.iter().enumerate().skip(60) {
            let expected = 15.0 + amp * gain * (omega * d as f64 + phase).sin();
            assert!((got - expected).abs() < 1e-3, "day {d}: {got} vs {expected}");
        }
    }

    #[test]
    fn totals_and_errors() {
        let bands = vec![band(20.0, 26.0); 3];
        let r = result(vec![("a", vec![21.0, 22.0, 23.0])]);
        assert_eq!(total_penalty(&r, &bands, PenaltyWeights::default()).unwrap().total, 0.0);

        let r = result(vec![("a", vec![21.0, 27.0, 23.0])]);
        let rep = total_penalty(&r, &bands, PenaltyWeights::default()).unwrap();
        assert!((rep.total - 1.0).abs() < 1e-12);
        assert_eq!(rep.spaces[0].over, rep.total);

        let r = result(vec![("a", vec![21.0, 27.0])]);
        assert!(matches!(
            total_penalty(&r, &bands, PenaltyWeights::default()),
            Err(PenaltyError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn report_json_shape() {
        let bands = vec![band(20.0, 26.0); 2];
        let r = result(vec![("a", vec![19.0, 27.0])]);
        let rep = total_penalty(&r, &bands, PenaltyWeights::default()).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["total"], 2.0);
        assert_eq!(v["weights"]["w1"], 1.0);
        assert_eq!(v["spaces"][0]["name"], "a");
        assert_eq!(v["spaces"][0]["under"], 1.0);
        assert_eq!(v["spaces"][0]["over"], 1.0);
    }

    fn instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<(f64, f64)>)> {
        (1usize..4, 1usize..48).prop_flat_map(|(n, len)| {
            (
                prop::collection::vec(prop::collection::vec(5.0..40.0f64, len), n),
                prop::collection::vec((15.0..25.0f64, 0.5..8.0f64), len),
            )
        })
    }

    proptest! {
        #[test]
        fn weight_linearity((temps, bw) in instance(), k in 0.0..10.0f64) {
            let bands: Vec<_> = bw.iter().map(|&(lo, w)| band(lo, lo + w)).collect();
            let r = result(temps.iter().enumerate().map(|(i, t)| (["a", "b", "c"][i], t.clone())).collect());
            let base = total_penalty(&r, &bands, PenaltyWeights { w1: 1.0, w2: 1.5 }).unwrap().total;
            let scaled = total_penalty(&r, &bands, PenaltyWeights { w1: k, w2: 1.5 * k }).unwrap().total;
            prop_assert!((scaled - k * base).abs() <= 1e-9 * (1.0 + k * base));
            prop_assert!(base >= 0.0);
        }

        #[test]
        fn additivity_over_spaces((temps, bw) in instance()) {
            let bands: Vec<_> = bw.iter().map(|&(lo, w)| band(lo, lo + w)).collect();
            let names = ["a", "b", "c"];
            let r = result(temps.iter().enumerate().map(|(i, t)| (names[i], t.clone())).collect());
            let whole = total_penalty(&r, &bands, PenaltyWeights::default()).unwrap().total;
            let parts: f64 = temps
                .iter()
                .enumerate()
                .map(|(i, t)| total_penalty(&result(vec![(names[i], t.clone())]), &bands, PenaltyWeights::default()).unwrap().total)
                .sum();
            prop_assert!((whole - parts).abs() <= 1e-9 * (1.0 + whole));
        }

        #[test]
        fn overheating_free_when_w2_zero((temps, bw) in instance(), bump in 0.1..20.0f64) {
            let bands: Vec<_> = bw.iter().map(|&(lo, w)| band(lo, lo + w)).collect();
            let w = PenaltyWeights { w1: 1.0, w2: 0.0 };
            let r = result(vec![("a", temps[0].clone())]);
            let hot: Vec<f64> = temps[0].iter().zip(&bands).map(|(&t, b)| if t > b.t2 { t + bump } else { t }).collect();
            let a = total_penalty(&r, &bands, w).unwrap().total;
            let b = total_penalty(&result(vec![("a", hot)]), &bands, w).unwrap().total;
            prop_assert_eq!(a, b);
        }

        #[test]
        fn raising_hot_hour_increases_total((temps, bw) in instance(), bump in 0.1..5.0f64) {
            let bands: Vec<_> = bw.iter().map(|&(lo, w)| band(lo, lo + w)).collect();
            let mut t = temps[0].clone();
            t[0] = bands[0].t2 + 1.0;
            let before = total_penalty(&result(vec![("a", t.clone())]), &bands, PenaltyWeights::default()).unwrap().total;
            t[0] += bump;
            let after = total_penalty(&result(vec![("a", t)]), &bands, PenaltyWeights::default()).unwrap().total;
            prop_assert!(after > before);
        }

        #[test]
        fn zero_iff_inside((temps, bw) in instance()) {
            let bands: Vec<_> = bw.iter().map(|&(lo, w)| band(lo, lo + w)).collect();
            let inside = temps[0].iter().zip(&bands).all(|(&t, b)| t >= b.t1 && t <= b.t2);
            let total = total_penalty(&result(vec![("a", temps[0].clone())]), &bands, PenaltyWeights::default()).unwrap().total;
            prop_assert_eq!(total == 0.0, inside);
        }

        #[test]
        fn clamp_saturates(lo in -40.0..10.0f64, hi in 30.0..60.0f64) {
            prop_assert_eq!(comfort_band(lo), comfort_band(10.0));
            prop_assert_eq!(comfort_band(hi), comfort_band(30.0));
        }
    }
}
