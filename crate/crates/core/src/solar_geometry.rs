//! Sun position and angle-of-incidence on fixed tilted planes.
//!
//! Angles are in degrees. Surface and solar azimuths are measured from due
//! south, positive towards the west (so east is -90°, north is ±180°).
//! Timestamps are local-standard-time hour indices into a non-leap year and
//! are evaluated at the hour centre.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::HOURS_PER_YEAR;

/// Maximum absolute declination of Cooper's formula.
pub const MAX_DECLINATION: f64 = 23.45;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteSpec {
    pub latitude: f64,
    pub longitude: f64,
    /// Offset of local standard time from UTC, hours (EST = -5).
    pub timezone_offset: f64,
    /// Module tilt from horizontal.
    pub tilt: f64,
    /// Azimuth of the front-face normal; 0 = due south, positive west.
    pub surface_azimuth: f64,
    /// Elevation used by the monofacial tilt factor.
    #[serde(default)]
    pub monofacial_elevation: TiltFactorElevation,
}

/// Which sun elevation feeds the monofacial tilt factor
/// `sin(α + β)/sin(α)`. The factor is exact for beam light at solar noon;
/// `SolarNoon` applies the day's noon value to every daylight hour, while
/// `Hourly` uses the instantaneous elevation, which grows without bound
/// towards sunrise and sunset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiltFactorElevation {
    #[default]
    SolarNoon,
    Hourly,
}

impl Default for SiteSpec {
    /// Ludington pumped storage plant, fixed south-facing racks at 36.5°.
    fn default() -> Self {
        Self {
            latitude: 43.893648,
            longitude: -86.445,
            timezone_offset: -5.0,
            tilt: 36.5,
            surface_azimuth: 0.0,
            monofacial_elevation: TiltFactorElevation::SolarNoon,
        }
    }
}

impl SiteSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("site.latitude", self.latitude),
            ("site.longitude", self.longitude),
            ("site.timezone_offset", self.timezone_offset),
            ("site.tilt", self.tilt),
            ("site.surface_azimuth", self.surface_azimuth),
        ] {
            ensure_finite(name, v)?;
        }
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(Error::Input(format!(
                "site.latitude must be within [-90, 90], got {}",
                self.latitude
            )));
        }
        if !(0.0..=90.0).contains(&self.tilt) {
            return Err(Error::Input(format!(
                "site.tilt must be within [0, 90], got {}",
                self.tilt
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolarPosition {
    pub declination: f64,
    pub hour_angle: f64,
    pub elevation: f64,
    pub zenith: f64,
    pub azimuth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    Front,
    Rear,
}

/// Cooper's declination for day of year `n` (1 = January 1st).
pub fn declination(day_of_year: u32) -> Result<f64> {
    if !(1..=365).contains(&day_of_year) {
        return Err(Error::Input(format!(
            "day of year must be within 1..=365, got {day_of_year}"
        )));
    }
    let arg = (360.0 * (284.0 + day_of_year as f64) / 365.0).to_radians();
    Ok(MAX_DECLINATION * arg.sin())
}

/// Sun position from latitude, declination and hour angle (all degrees).
pub fn position_from_angles(latitude: f64, declination: f64, hour_angle: f64) -> SolarPosition {
    let phi = latitude.to_radians();
    let delta = declination.to_radians();
    let omega = hour_angle.to_radians();

    let sin_elev = phi.sin() * delta.sin() + phi.cos() * delta.cos() * omega.cos();
    let elevation = sin_elev.clamp(-1.0, 1.0).asin().to_degrees();
    let azimuth = omega
        .sin()
        .atan2(omega.cos() * phi.sin() - delta.tan() * phi.cos())
        .to_degrees();

    SolarPosition {
        declination,
        hour_angle,
        elevation,
        zenith: 90.0 - elevation,
        azimuth,
    }
}

/// Sun elevation at solar noon, `90° - |φ - δ|`.
pub fn noon_elevation(latitude: f64, declination: f64) -> f64 {
    90.0 - (latitude - declination).abs()
}

/// Sun position at the centre of local-standard-time hour `hour_index`.
pub fn sun_position(site: &SiteSpec, hour_index: usize) -> Result<SolarPosition> {
    if hour_index >= HOURS_PER_YEAR {
        return Err(Error::Input(format!(
            "hour index {hour_index} outside the simulated year (0..{HOURS_PER_YEAR})"
        )));
    }
    let day = (hour_index / 24) as u32 + 1;
    let clock_hour = (hour_index % 24) as f64 + 0.5;
    let solar_time = clock_hour + (site.longitude - 15.0 * site.timezone_offset) / 15.0;
    let hour_angle = 15.0 * (solar_time - 12.0);
    Ok(position_from_angles(
        site.latitude,
        declination(day)?,
        hour_angle,
    ))
}

/// Unclamped cosine of the angle between the sun direction and the normal of
/// a plane with the given tilt and azimuth.
fn plane_cosine(pos: &SolarPosition, tilt: f64, azimuth: f64) -> f64 {
    let zen = pos.zenith.to_radians();
    let beta = tilt.to_radians();
    zen.cos() * beta.cos() + zen.sin() * beta.sin() * (pos.azimuth - azimuth).to_radians().cos()
}

/// `max(0, cos AOI)` for one face of the module. The rear normal points the
/// opposite way: tilt `180° - β`, azimuth rotated by 180°.
pub fn incidence_cosine(pos: &SolarPosition, site: &SiteSpec, face: Face) -> f64 {
    let c = match face {
        Face::Front => plane_cosine(pos, site.tilt, site.surface_azimuth),
        Face::Rear => plane_cosine(pos, 180.0 - site.tilt, site.surface_azimuth + 180.0),
    };
    c.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ludington() -> SiteSpec {
        SiteSpec::default()
    }

    #[test]
    fn declination_examples() {
        assert!(declination(81).unwrap().abs() < 0.5);
        // 23.45 * sin(360 * 456 / 365 deg)
        let june = 23.45 * (360.0_f64 * 456.0 / 365.0).to_radians().sin();
        assert_abs_diff_eq!(declination(172).unwrap(), june, epsilon = 1e-12);
        assert!((declination(172).unwrap() - 23.45).abs() < 0.01);
        assert!((declination(355).unwrap() + 23.45).abs() < 0.01);
    }

    #[test]
    fn declination_rejects_out_of_range_day() {
        assert!(matches!(declination(0), Err(Error::Input(_))));
        assert!(matches!(declination(366), Err(Error::Input(_))));
    }

    #[test]
    fn solar_noon_at_equinox() {
        let delta = declination(81).unwrap();
        let pos = position_from_angles(43.893648, delta, 0.0);
        assert_abs_diff_eq!(pos.zenith, 43.893648, epsilon = 0.6);
        assert_abs_diff_eq!(pos.zenith, (43.893648 - delta).abs(), epsilon = 1e-9);

        let eq = position_from_angles(0.0, delta, 0.0);
        assert!(eq.zenith.abs() < 0.5);
    }

    #[test]
    fn midnight_sun_is_below_horizon() {
        let site = ludington();
        for day in [0usize, 80, 171, 354] {
            let pos = sun_position(&site, day * 24).unwrap();
            assert!(pos.elevation < 0.0, "day {day}: {pos:?}");
        }
    }

    #[test]
    fn sun_position_rejects_hour_past_year() {
        assert!(sun_position(&ludington(), HOURS_PER_YEAR).is_err());
    }

    #[test]
    fn azimuth_convention() {
        // Morning sun is east (negative), afternoon west (positive).
        let am = position_from_angles(43.9, 0.0, -45.0);
        let pm = position_from_angles(43.9, 0.0, 45.0);
        assert!(am.azimuth < 0.0 && pm.azimuth > 0.0);
        assert_abs_diff_eq!(am.azimuth, -pm.azimuth, epsilon = 1e-9);
    }

    #[test]
    fn incidence_along_front_normal_is_one() {
        let site = ludington();
        let pos = SolarPosition {
            declination: 0.0,
            hour_angle: 0.0,
            elevation: 90.0 - site.tilt,
            zenith: site.tilt,
            azimuth: site.surface_azimuth,
        };
        assert_abs_diff_eq!(incidence_cosine(&pos, &site, Face::Front), 1.0, epsilon = 1e-12);
        assert_eq!(incidence_cosine(&pos, &site, Face::Rear), 0.0);
    }

    #[test]
    fn sun_behind_panel_clamps_front_to_zero() {
        let site = ludington();
        let pos = SolarPosition {
            declination: 0.0,
            hour_angle: 0.0,
            elevation: 20.0,
            zenith: 70.0,
            azimuth: 180.0,
        };
        assert_eq!(incidence_cosine(&pos, &site, Face::Front), 0.0);
        assert!(incidence_cosine(&pos, &site, Face::Rear) > 0.0);
    }

    #[test]
    fn rear_beam_is_zero_on_winter_half_year_days() {
        // Between the autumn and spring equinoxes the sun never rises north
        // of east-west, so a south-facing rack never sees it from behind.
        let site = ludington();
        for day in [80usize, 1, 354, 300] {
            for h in 0..24 {
                let pos = sun_position(&site, day * 24 + h).unwrap();
                if pos.elevation > 0.0 {
                    assert_eq!(incidence_cosine(&pos, &site, Face::Rear), 0.0, "day {day} h {h}");
                }
            }
        }
    }

    #[test]
    fn year_invariants() {
        let site = ludington();
        for h in 0..HOURS_PER_YEAR {
            let pos = sun_position(&site, h).unwrap();
            assert!((pos.elevation + pos.zenith - 90.0).abs() <= 1e-9);
            assert!(pos.declination.abs() <= MAX_DECLINATION);
            let f = incidence_cosine(&pos, &site, Face::Front);
            let r = incidence_cosine(&pos, &site, Face::Rear);
            assert!((0.0..=1.0).contains(&f) && (0.0..=1.0).contains(&r));
            assert!(f == 0.0 || r == 0.0);
        }
    }

    #[test]
    fn declination_periodic_and_antisymmetric() {
        // Day 81 is near the March equinox; day 81 + 182.5 near September.
        for k in 0..90 {
            let a = declination(81 + k).unwrap();
            let b = declination((81 + k + 182) % 365).unwrap();
            assert!((a + b).abs() < 0.5, "k={k}: {a} {b}");
        }
    }

    #[test]
    fn site_validation() {
        let mut s = ludington();
        s.latitude = 91.0;
        assert!(s.validate().is_err());
        let mut s = ludington();
        s.tilt = -1.0;
        assert!(s.validate().is_err());
        assert!(ludington().validate().is_ok());
    }
}
