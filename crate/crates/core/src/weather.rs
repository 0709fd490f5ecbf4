//! Hourly weather series (one non-leap year) and its CSV format.
//!
//! ```text
//! # lat=40.2,lon=-8.4
//! 0,8.1,0,0
//! 1,7.6,0,0
//! ...
//! ```
//! Rows are `hour_index,dry_bulb_c,dni_wm2,dhi_wm2` for hours 0..8759.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Read;

use thiserror::Error;

use crate::solar::{solar_position, SunPosition};

pub const HOURS_PER_YEAR: usize = 8760;
pub const DAYS_PER_YEAR: usize = 365;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherHour {
    pub dry_bulb: f64,
    /// Direct normal irradiance, W/m².
    pub dni: f64,
    /// Diffuse horizontal irradiance, W/m².
    pub dhi: f64,
}

/// Precomputed sun terms for one hour.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SunTrig {
    pub up: bool,
    pub cos_alt: f64,
    pub tan_alt: f64,
    pub cos_az: f64,
    pub sin_az: f64,
}

#[derive(Debug, Clone)]
pub struct WeatherSeries {
    latitude: f64,
    longitude: f64,
    hours: Vec<WeatherHour>,
    sun: Vec<SunPosition>,
    sun_trig: Vec<SunTrig>,
}

#[derive(Debug, Error, PartialEq)]
pub enum WeatherError {
    #[error("line {line}: expected header `# lat=<deg>,lon=<deg>`")]
    Header { line: u64 },
    #[error("line {line}: expected 4 columns, found {found}")]
    ColumnCount { line: u64, found: usize },
    #[error("line {line}: field `{field}` is not a number: {value:?}")]
    Malformed { line: u64, field: &'static str, value: String },
    #[error("line {line}: field `{field}` out of range: {value}")]
    OutOfRange { line: u64, field: &'static str, value: f64 },
    #[error("line {line}: hour_index {found} does not match row position {expected}")]
    HourIndex { line: u64, expected: usize, found: i64 },
    #[error("expected {HOURS_PER_YEAR} rows, found {0}")]
    RowCount(usize),
    #[error("invalid site coordinates lat={0}, lon={1}")]
    Site(f64, f64),
    #[error("hour {hour}: {field} out of range: {value}")]
    HourValue { hour: usize, field: &'static str, value: f64 },
    #[error("{0}")]
    Io(String),
}

impl WeatherSeries {
    pub fn new(latitude: f64, longitude: f64, hours: Vec<WeatherHour>) -> Result<Self, WeatherError> {
        if !((-90.0..=90.0).contains(&latitude) && (-180.0..=180.0).contains(&longitude)) {
            return Err(WeatherError::Site(latitude, longitude));
        }
        if hours.len() != HOURS_PER_YEAR {
            return Err(WeatherError::RowCount(hours.len()));
        }
        for (hour, h) in hours.iter().enumerate() {
            if let Some((field, value)) = first_out_of_range(h) {
                return Err(WeatherError::HourValue { hour, field, value });
            }
        }
        let sun: Vec<SunPosition> = (0..HOURS_PER_YEAR)
            .map(|h| {
                let (day, solar_hour) = hour_to_day_and_solar_hour(h);
                solar_position(day, solar_hour, latitude)
            })
            .collect();
        let sun_trig = sun
            .iter()
            .map(|s| {
                let alt = s.altitude.to_radians();
                let az = s.azimuth.to_radians();
                SunTrig {
                    up: s.is_up(),
                    cos_alt: alt.cos(),
                    tan_alt: alt.tan(),
                    cos_az: az.cos(),
                    sin_az: az.sin(),
                }
            })
            .collect();
        Ok(Self {
            latitude,
            longitude,
            hours,
            sun,
            sun_trig,
        })
    }

    pub fn latitude(&self) -> f64 {
        self.latitude
    }

    pub fn longitude(&self) -> f64 {
        self.longitude
    }

    pub fn hours(&self) -> &[WeatherHour] {
        &self.hours
    }

    /// Sun position at the middle of each hour.
    pub fn sun(&self) -> &[SunPosition] {
        &self.sun
    }

    pub(crate) fn sun_trig(&self) -> &[SunTrig] {
        &self.sun_trig
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(HOURS_PER_YEAR * 24);
        writeln!(out, "# lat={},lon={}", self.latitude, self.longitude).unwrap();
        for (i, h) in self.hours.iter().enumerate() {
            writeln!(out, "{i},{},{},{}", h.dry_bulb, h.dni, h.dhi).unwrap();
        }
        out
    }

    /// Clear-sky synthetic year with sinusoidal temperatures. Not measured
    /// data: mean 15 °C, annual amplitude 7 °C (coldest around 20 January),
    /// diurnal amplitude 5 °C (warmest at 15:00), beam capped at 900 W/m².
    pub fn synthetic(latitude: f64, longitude: f64) -> Result<Self, WeatherError> {
        let hours = (0..HOURS_PER_YEAR)
            .map(|h| {
                let (day, solar_hour) = hour_to_day_and_solar_hour(h);
                let annual = -7.0 * (2.0 * PI * (day as f64 - 20.0) / 365.0).cos();
                let diurnal = 5.0 * (2.0 * PI * (solar_hour - 15.0) / 24.0).cos();
                let dry_bulb = round3(15.0 + annual + diurnal);
                let sun = solar_position(day, solar_hour, latitude);
                let (dni, dhi) = clear_sky(sun.altitude);
                WeatherHour {
                    dry_bulb,
                    dni: round3(dni),
                    dhi: round3(dhi),
                }
            })
            .collect();
        Self::new(latitude, longitude, hours)
    }

    /// Synthetic year for Coimbra, Portugal.
    pub fn coimbra_synthetic() -> Self {
        Self::synthetic(40.2, -8.4).expect("synthetic weather is valid")
    }

    /// Year with the same conditions every hour, for equilibrium checks.
    pub fn constant(latitude: f64, dry_bulb: f64, dni: f64, dhi: f64) -> Result<Self, WeatherError> {
        Self::new(latitude, 0.0, vec![WeatherHour { dry_bulb, dni, dhi }; HOURS_PER_YEAR])
    }
}

/// 1-based day of year and mid-hour solar time for hour-of-year `h`.
pub fn hour_to_day_and_solar_hour(h: usize) -> (u32, f64) {
    ((h / 24) as u32 + 1, (h % 24) as f64 + 0.5)
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

/// Simple exponential-attenuation clear sky: DNI = 1100·exp(−0.16/sin α)
/// capped at 900 W/m², DHI = 0.12 of the uncapped beam.
fn clear_sky(altitude: f64) -> (f64, f64) {
    if altitude <= 0.0 {
        return (0.0, 0.0);
    }
    let s = altitude.to_radians().sin();
    let beam = 1100.0 * (-0.16 / s).exp();
    (beam.min(900.0), 0.12 * beam)
}

fn first_out_of_range(h: &WeatherHour) -> Option<(&'static str, f64)> {
    if !(h.dry_bulb.is_finite() && (-60.0..=60.0).contains(&h.dry_bulb)) {
        return Some(("dry_bulb_c", h.dry_bulb));
    }
    if !(h.dni.is_finite() && h.dni >= 0.0) {
        return Some(("dni_wm2", h.dni));
    }
    if !(h.dhi.is_finite() && h.dhi >= 0.0) {
        return Some(("dhi_wm2", h.dhi));
    }
    None
}

fn parse_header(line: &str) -> Option<(f64, f64)> {
    let body = line.trim().strip_prefix('#')?.trim();
    let mut lat = None;
    let mut lon = None;
    for part in body.split(',') {
        let (k, v) = part.split_once('=')?;
        let v: f64 = v.trim().parse().ok()?;
        match k.trim() {
            "lat" => lat = Some(v),
            "lon" => lon = Some(v),
            _ => {}
        }
    }
    Some((lat?, lon?))
}

/// Parses and validates the weather CSV format.
pub fn load_weather<R: Read>(mut source: R) -> Result<WeatherSeries, WeatherError> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| WeatherError::Io(e.to_string()))?;
    let (header, body) = text.split_once('\n').unwrap_or((text.as_str(), ""));
    let (lat, lon) = parse_header(header).ok_or(WeatherError::Header { line: 1 })?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let mut hours = Vec::with_capacity(HOURS_PER_YEAR);
    for record in reader.records() {
        let record = record.map_err(|e| WeatherError::Io(e.to_string()))?;
        // csv lines are relative to the body; the header is line 1
        let line = record.position().map_or(0, |p| p.line()) + 1;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 4 {
            return Err(WeatherError::ColumnCount {
                line,
                found: record.len(),
            });
        }
        let field = |k: usize, name: &'static str| -> Result<f64, WeatherError> {
            record[k].parse::<f64>().map_err(|_| WeatherError::Malformed {
                line,
                field: name,
                value: record[k].to_string(),
            })
        };
        let idx = record[0].parse::<i64>().map_err(|_| WeatherError::Malformed {
            line,
            field: "hour_index",
            value: record[0].to_string(),
        })?;
        if idx != hours.len() as i64 {
            return Err(WeatherError::HourIndex {
                line,
                expected: hours.len(),
                found: idx,
            });
        }
        let h = WeatherHour {
            dry_bulb: field(1, "dry_bulb_c")?,
            dni: field(2, "dni_wm2")?,
            dhi: field(3, "dhi_wm2")?,
        };
        if let Some((field, value)) = first_out_of_range(&h) {
            return Err(WeatherError::OutOfRange { line, field, value });
        }
        hours.push(h);
    }
    if hours.len() != HOURS_PER_YEAR {
        return Err(WeatherError::RowCount(hours.len()));
    }
    WeatherSeries::new(lat, lon, hours)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_with(rows: usize, patch: impl Fn(usize) -> Option<String>) -> String {
        let mut s = String::from("# lat=40.2,lon=-8.4\n");
        for i in 0..rows {
            match patch(i) {
                Some(line) => s.push_str(&line),
                None => s.push_str(&format!("{i},15.0,100,50")),
            }
            s.push('\n');
        }
        s
    }

    #[test]
    fn loads_full_year() {
        let w = load_weather(csv_with(8760, |_| None).as_bytes()).unwrap();
        assert_eq!(w.hours().len(), 8760);
        assert_eq!(w.latitude(), 40.2);
        assert_eq!(w.longitude(), -8.4);
    }

    #[test]
    fn short_file_is_rejected() {
        let err = load_weather(csv_with(8759, |_| None).as_bytes()).unwrap_err();
        assert_eq!(err, WeatherError::RowCount(8759));
        assert!(err.to_string().contains("expected 8760 rows"));
    }

    #[test]
    fn negative_dni_names_line_and_field() {
        let src = csv_with(8760, |i| (i == 10).then(|| "10,15.0,-5,50".to_string()));
        let err = load_weather(src.as_bytes()).unwrap_err();
        assert_eq!(err, WeatherError::OutOfRange {
            line: 12,
            field: "dni_wm2",
            value: -5.0
        });
        assert!(err.to_string().starts_with("line 12:"));
    }

    #[test]
    fn malformed_rows() {
        let src = csv_with(8760, |i| (i == 0).then(|| "0,abc,1,1".to_string()));
        assert!(matches!(load_weather(src.as_bytes()), Err(WeatherError::Malformed { line: 2, .. })));
        let src = csv_with(8760, |i| (i == 3).then(|| "3,1,1".to_string()));
        assert!(matches!(
            load_weather(src.as_bytes()),
            Err(WeatherError::ColumnCount { line: 5, found: 3 })
        ));
        let src = csv_with(8760, |i| (i == 3).then(|| "7,1,1,1".to_string()));
        assert!(matches!(load_weather(src.as_bytes()), Err(WeatherError::HourIndex { .. })));
        assert!(matches!(load_weather("0,1,1,1\n".as_bytes()), Err(WeatherError::Header { line: 1 })));
    }

    #[test]
    fn synthetic_round_trips_through_csv() {
        let w = WeatherSeries::coimbra_synthetic();
        let back = load_weather(w.to_csv().as_bytes()).unwrap();
        assert_eq!(back.hours(), w.hours());
        let max_dni = w.hours().iter().map(|h| h.dni).fold(0.0, f64::max);
        assert!(max_dni <= 900.0 && max_dni > 500.0);
        let mean: f64 = w.hours().iter().map(|h| h.dry_bulb).sum::<f64>() / 8760.0;
        assert!((mean - 15.0).abs() < 0.05, "{mean}");
        // night hours carry no irradiance
        assert_eq!(w.hours()[0].dni, 0.0);
    }

    #[test]
    fn mid_hour_convention() {
        assert_eq!(hour_to_day_and_solar_hour(0), (1, 0.5));
        assert_eq!(hour_to_day_and_solar_hour(8759), (365, 23.5));
        assert_eq!(hour_to_day_and_solar_hour(36), (2, 12.5));
    }
}
