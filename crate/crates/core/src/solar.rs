//! Sun position, facade irradiance and overhang/fin shading.
//!
//! Angles are degrees. Azimuths are measured clockwise from true north.
//! Solar time is local apparent solar time; no equation-of-time or
//! longitude correction is applied.

use serde::{Deserialize, Serialize};

use crate::plan::{normalize_deg, Window};

/// View factor of a vertical surface to an isotropic sky.
pub const SKY_VIEW_VERTICAL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SunPosition {
    /// Degrees above the horizon, in [-90, 90].
    pub altitude: f64,
    /// Degrees clockwise from north, in [0, 360).
    pub azimuth: f64,
}

impl SunPosition {
    pub fn is_up(&self) -> bool {
        self.altitude >= 0.0
    }
}

/// Cooper's declination, degrees.
pub fn declination(day_of_year: u32) -> f64 {
    23.45 * (360.0 * (284.0 + day_of_year as f64) / 365.0).to_radians().sin()
}

pub fn solar_position(day_of_year: u32, solar_hour: f64, latitude: f64) -> SunPosition {
    let decl = declination(day_of_year).to_radians();
    let hour_angle = (15.0 * (solar_hour - 12.0)).to_radians();
    let lat = latitude.to_radians();

    let sin_alt = lat.sin() * decl.sin() + lat.cos() * decl.cos() * hour_angle.cos();
    let altitude = sin_alt.clamp(-1.0, 1.0).asin().to_degrees();

    let east = -decl.cos() * hour_angle.sin();
    let north = decl.sin() * lat.cos() - decl.cos() * hour_angle.cos() * lat.sin();
    let azimuth = normalize_deg(east.atan2(north).to_degrees());
    SunPosition { altitude, azimuth }
}

/// Beam geometry of the sun relative to one vertical facade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FacadeSun {
    /// cos of the incidence angle on the facade; ≤ 0 when the beam misses it.
    pub cos_incidence: f64,
    /// tan of the profile angle (vertical shadow angle).
    pub tan_profile: f64,
    /// tan of the horizontal sun-facade azimuth difference, signed: positive
    /// when the sun is clockwise of the facade normal.
    pub tan_gamma: f64,
}

impl FacadeSun {
    /// Builds the geometry from precomputed trig terms of the sun and
    /// `cos γ`, `sin γ` of the azimuth difference `sun − facade`.
    #[inline]
    pub(crate) fn from_parts(sun_up: bool, cos_alt: f64, tan_alt: f64, cos_gamma: f64, sin_gamma: f64) -> Self {
        let cos_incidence = if sun_up { cos_alt * cos_gamma } else { 0.0 };
        if cos_incidence <= 0.0 {
            return FacadeSun {
                cos_incidence: 0.0,
                tan_profile: 0.0,
                tan_gamma: 0.0,
            };
        }
        FacadeSun {
            cos_incidence,
            tan_profile: tan_alt / cos_gamma,
            tan_gamma: sin_gamma / cos_gamma,
        }
    }

    pub(crate) fn new(sun: SunPosition, facade_azimuth: f64) -> Self {
        let gamma = (sun.azimuth - facade_azimuth).to_radians();
        let alt = sun.altitude.to_radians();
        Self::from_parts(sun.is_up(), alt.cos(), alt.tan(), gamma.cos(), gamma.sin())
    }

    #[inline]
    pub(crate) fn irradiance(&self, dni: f64, dhi: f64) -> f64 {
        self.cos_incidence.max(0.0) * dni + SKY_VIEW_VERTICAL * dhi
    }

    #[inline]
    pub(crate) fn shading(&self, window: &Window) -> f64 {
        if self.cos_incidence <= 0.0 {
            return 0.0;
        }
        let f_overhang = match window.overhang {
            Some(o) if o.depth > 0.0 => (o.depth * self.tan_profile / window.height).clamp(0.0, 1.0),
            _ => 0.0,
        };
        let f_fins = match window.fins {
            Some(f) => {
                // sun clockwise of the normal sits on the viewer's left
                let depth = if self.tan_gamma > 0.0 { f.left_depth } else { f.right_depth };
                (depth * self.tan_gamma.abs() / window.width).clamp(0.0, 1.0)
            }
            None => 0.0,
        };
        (1.0 - (1.0 - f_overhang) * (1.0 - f_fins)).clamp(0.0, 1.0)
    }
}

/// Irradiance on a vertical facade, W/m²: beam on the facade plus half the
/// diffuse horizontal. Only the diffuse term remains when the sun is below
/// the horizon or behind the facade.
pub fn incident_irradiance(sun: SunPosition, facade_azimuth: f64, dni: f64, dhi: f64) -> f64 {
    FacadeSun::new(sun, facade_azimuth).irradiance(dni, dhi)
}

/// Fraction of the window shaded by its overhang and fins, in [0, 1]. Zero
/// when the sun does not reach the facade.
pub fn shading_fraction(window: &Window, sun: SunPosition, facade_azimuth: f64) -> f64 {
    FacadeSun::new(sun, facade_azimuth).shading(window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{FinPair, Overhang, WallSide};
    use proptest::prelude::*;

    fn window(overhang: Option<f64>, fins: Option<(f64, f64)>) -> Window {
        Window {
            wall_side: WallSide::South,
            offset: 0.0,
            width: 1.0,
            height: 1.2,
            sill: 0.9,
            overhang: overhang.map(|depth| Overhang { depth }),
            fins: fins.map(|(l, r)| FinPair {
                left_depth: l,
                right_depth: r,
            }),
        }
    }

    /// Spencer's Fourier-series declination, radians.
    fn spencer_declination(day: u32, hour: f64) -> f64 {
        let g = 2.0 * std::f64::consts::PI / 365.0 * (day as f64 - 1.0 + (hour - 12.0) / 24.0);
        0.006918 - 0.399912 * g.cos() + 0.070257 * g.sin() - 0.006758 * (2.0 * g).cos()
            + 0.000907 * (2.0 * g).sin()
            - 0.002697 * (3.0 * g).cos()
            + 0.00148 * (3.0 * g).sin()
    }

    #[test]
    fn equator_equinox_noon_is_overhead() {
        // day 81: declination within a fraction of a degree of zero
        let sun = solar_position(81, 12.0, 0.0);
        assert!((sun.altitude - 90.0).abs() < 1.0, "{sun:?}");
    }

    #[test]
    fn midnight_below_horizon() {
        for day in [1, 80, 172, 266, 355] {
            assert!(solar_position(day, 0.0, 40.0).altitude < 0.0);
        }
    }

    #[test]
    fn summer_noon_matches_reference_ephemeris() {
        let decl = spencer_declination(172, 12.0).to_degrees();
        let reference = 90.0 - (40.0 - decl).abs();
        let sun = solar_position(172, 12.0, 40.0);
        assert!((sun.altitude - reference).abs() < 0.5, "{} vs {}", sun.altitude, reference);
        assert!((sun.azimuth - 180.0).abs() < 1e-9);
    }

    #[test]
    fn morning_sun_is_east() {
        let sun = solar_position(172, 8.0, 40.0);
        assert!(sun.azimuth > 0.0 && sun.azimuth < 180.0);
        let sun = solar_position(172, 16.0, 40.0);
        assert!(sun.azimuth > 180.0 && sun.azimuth < 360.0);
    }

    #[test]
    fn irradiance_examples() {
        let s = |altitude, azimuth| SunPosition { altitude, azimuth };
        assert!((incident_irradiance(s(0.0, 180.0), 180.0, 800.0, 0.0) - 800.0).abs() < 1e-9);
        assert!((incident_irradiance(s(30.0, 0.0), 180.0, 800.0, 100.0) - 50.0).abs() < 1e-9);
        assert!((incident_irradiance(s(60.0, 180.0), 180.0, 1000.0, 0.0) - 500.0).abs() < 1e-9);
        assert!((incident_irradiance(s(-5.0, 180.0), 180.0, 1000.0, 40.0) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn shading_examples() {
        let sun = SunPosition {
            altitude: 45.0,
            azimuth: 180.0,
        };
        assert_eq!(shading_fraction(&window(None, None), sun, 180.0), 0.0);
        assert_eq!(shading_fraction(&window(Some(5.0), None), sun, 180.0), 1.0);
        // 0.6 m overhang at a 45° profile angle shades 0.6 of 1.2 m
        let f = shading_fraction(&window(Some(0.6), None), sun, 180.0);
        assert!((f - 0.5).abs() < 1e-12);
        // sun behind the facade
        assert_eq!(shading_fraction(&window(Some(5.0), None), sun, 0.0), 0.0);
    }

    #[test]
    fn fins_shade_from_sun_side_only() {
        // sun 45° clockwise of a south facade (south-west)
        let sun = SunPosition {
            altitude: 0.0,
            azimuth: 225.0,
        };
        let left = shading_fraction(&window(None, Some((0.5, 0.0))), sun, 180.0);
        let right = shading_fraction(&window(None, Some((0.0, 0.5))), sun, 180.0);
        assert!((left - 0.5).abs() < 1e-12);
        assert_eq!(right, 0.0);
    }

    #[test]
    fn overhang_and_fins_combine() {
        let sun = SunPosition {
            altitude: 45.0,
            azimuth: 225.0,
        };
        let oh = shading_fraction(&window(Some(0.3), None), sun, 180.0);
        let fin = shading_fraction(&window(None, Some((0.25, 0.0))), sun, 180.0);
        let both = shading_fraction(&window(Some(0.3), Some((0.25, 0.0))), sun, 180.0);
        assert!((both - (1.0 - (1.0 - oh) * (1.0 - fin))).abs() < 1e-12);
    }

    #[test]
    fn altitude_symmetric_about_noon() {
        for day in [1, 100, 172, 300] {
            for k in 0..24 {
                let h = k as f64 * 0.5;
                let a = solar_position(day, 12.0 - h, 38.0).altitude;
                let b = solar_position(day, 12.0 + h, 38.0).altitude;
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn irradiance_nonnegative(alt in -90.0..90.0f64, az in 0.0..360.0f64, facade in 0.0..360.0f64,
                                  dni in 0.0..1200.0f64, dhi in 0.0..500.0f64) {
            let sun = SunPosition { altitude: alt, azimuth: az };
            let q = incident_irradiance(sun, facade, dni, dhi);
            prop_assert!(q >= 0.0);
            prop_assert!(q >= 0.5 * dhi - 1e-12);
        }

        #[test]
        fn joint_rotation_is_invariant(alt in -10.0..90.0f64, az in 0.0..360.0f64, facade in 0.0..360.0f64,
                                       delta in -720.0..720.0f64, oh in 0.0..2.0f64, l in 0.0..1.0f64, r in 0.0..1.0f64) {
            let w = window(Some(oh), Some((l, r)));
            let sun = SunPosition { altitude: alt, azimuth: az };
            let rotated = SunPosition { altitude: alt, azimuth: normalize_deg(az + delta) };
            let f2 = normalize_deg(facade + delta);
            prop_assert!((incident_irradiance(sun, facade, 800.0, 100.0) - incident_irradiance(rotated, f2, 800.0, 100.0)).abs() < 1e-9);
            prop_assert!((shading_fraction(&w, sun, facade) - shading_fraction(&w, rotated, f2)).abs() < 1e-9);
        }

        #[test]
        fn shading_monotone_in_depth(alt in 0.0..89.0f64, az in 91.0..269.0f64, d1 in 0.0..1.5f64, extra in 0.0..1.5f64) {
            let sun = SunPosition { altitude: alt, azimuth: az };
            let a = shading_fraction(&window(Some(d1), Some((d1, d1))), sun, 180.0);
            let b = shading_fraction(&window(Some(d1 + extra), Some((d1, d1))), sun, 180.0);
            let c = shading_fraction(&window(Some(d1), Some((d1 + extra, d1 + extra))), sun, 180.0);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(b >= a - 1e-15);
            prop_assert!(c >= a - 1e-15);
        }
    }
}
