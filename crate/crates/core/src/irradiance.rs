//! Plane-of-array irradiance for monofacial and bifacial modules.
//!
//! Monofacial modules use the elevation-ratio transposition
//! `GHI * sin(α + β) / sin(α)`. Bifacial modules split each face into beam,
//! isotropic sky diffuse and ground-reflected parts; the rear face sees the
//! complementary sky view factor and most of the ground.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::solar_geometry::{
    incidence_cosine, noon_elevation, sun_position, Face, SiteSpec, SolarPosition, TiltFactorElevation,
};

/// Sun elevation (degrees) at or below which plane irradiance is zero.
pub const ELEVATION_FLOOR: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherRecord {
    pub hour_index: usize,
    pub dni: f64,
    pub dhi: f64,
    /// Measured GHI, when the source supplies it.
    pub ghi: Option<f64>,
    pub t_amb: f64,
}

impl WeatherRecord {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("dni", self.dni), ("dhi", self.dhi), ("t_amb", self.t_amb)] {
            ensure_finite(name, v)?;
        }
        if let Some(ghi) = self.ghi {
            ensure_finite("ghi", ghi)?;
            if ghi < 0.0 {
                return Err(Error::Input(format!("ghi must be >= 0, got {ghi}")));
            }
        }
        if self.dni < 0.0 || self.dhi < 0.0 {
            return Err(Error::Input(format!(
                "irradiance must be >= 0 (dni={}, dhi={})",
                self.dni, self.dhi
            )));
        }
        if !(-60.0..=60.0).contains(&self.t_amb) {
            return Err(Error::Input(format!(
                "t_amb must be within [-60, 60] °C, got {}",
                self.t_amb
            )));
        }
        Ok(())
    }
}

/// Irradiance on one face, W/m².
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IrradianceBreakdown {
    pub beam: f64,
    pub diffuse: f64,
    pub reflected: f64,
    pub total: f64,
}

impl IrradianceBreakdown {
    pub const ZERO: Self = Self {
        beam: 0.0,
        diffuse: 0.0,
        reflected: 0.0,
        total: 0.0,
    };

    pub fn new(beam: f64, diffuse: f64, reflected: f64) -> Self {
        Self {
            beam,
            diffuse,
            reflected,
            total: beam + diffuse + reflected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifacialParams {
    /// Ground albedo ρ_g.
    pub albedo: f64,
    /// Fraction of the ground-reflected light reaching the rear face.
    pub rear_loss: f64,
    /// Rear-to-front conversion ratio φ_b.
    pub bifaciality: f64,
}

impl Default for BifacialParams {
    fn default() -> Self {
        Self {
            albedo: 0.5,
            rear_loss: 0.789,
            bifaciality: 0.7,
        }
    }
}

impl BifacialParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bifacial.albedo", self.albedo),
            ("bifacial.rear_loss", self.rear_loss),
            ("bifacial.bifaciality", self.bifaciality),
        ] {
            ensure_finite(name, v)?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Input(format!("{name} must be within [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// Isotropic sky view factor of the front face, `(1 + cos β) / 2`.
pub fn front_sky_view(tilt: f64) -> f64 {
    (1.0 + tilt.to_radians().cos()) / 2.0
}

/// Isotropic sky view factor of the rear face, `(1 - cos β) / 2`.
pub fn rear_sky_view(tilt: f64) -> f64 {
    (1.0 - tilt.to_radians().cos()) / 2.0
}

fn sun_up(pos: &SolarPosition) -> bool {
    pos.elevation > ELEVATION_FLOOR
}

/// `GHI = DHI + DNI·cos θz`, with the cosine clamped at zero below the horizon.
pub fn ghi_from_components(rec: &WeatherRecord, pos: &SolarPosition) -> Result<f64> {
    if rec.dni < 0.0 || rec.dhi < 0.0 || !rec.dni.is_finite() || !rec.dhi.is_finite() {
        return Err(Error::Input(format!(
            "hour {}: dni and dhi must be finite and >= 0 (dni={}, dhi={})",
            rec.hour_index, rec.dni, rec.dhi
        )));
    }
    let cos_z = pos.zenith.to_radians().cos().max(0.0);
    Ok(rec.dhi + rec.dni * cos_z)
}

/// Measured GHI if present, otherwise reconstructed from DNI and DHI.
pub fn resolve_ghi(rec: &WeatherRecord, pos: &SolarPosition) -> Result<f64> {
    match rec.ghi {
        Some(ghi) => Ok(ghi),
        None => ghi_from_components(rec, pos),
    }
}

/// Monofacial tilted irradiance `GHI·sin(α + β)/sin(α)`, zero while the
/// sun is at or below the elevation floor. `α` is chosen by
/// `site.monofacial_elevation`.
pub fn transpose_monofacial(ghi: f64, pos: &SolarPosition, site: &SiteSpec) -> f64 {
    if !sun_up(pos) {
        return 0.0;
    }
    let alpha = match site.monofacial_elevation {
        TiltFactorElevation::Hourly => pos.elevation,
        TiltFactorElevation::SolarNoon => noon_elevation(site.latitude, pos.declination),
    };
    if alpha <= ELEVATION_FLOOR {
        return 0.0;
    }
    let alpha = alpha.to_radians();
    let beta = site.tilt.to_radians();
    (ghi * (alpha + beta).sin() / alpha.sin()).max(0.0)
}

pub fn bifacial_front(
    rec: &WeatherRecord,
    pos: &SolarPosition,
    site: &SiteSpec,
    p: &BifacialParams,
) -> Result<IrradianceBreakdown> {
    let ghi = resolve_ghi(rec, pos)?;
    if !sun_up(pos) {
        return Ok(IrradianceBreakdown::ZERO);
    }
    let beam = rec.dni * incidence_cosine(pos, site, Face::Front);
    let diffuse = rec.dhi * front_sky_view(site.tilt);
    let reflected = p.albedo * ghi * rear_sky_view(site.tilt);
    Ok(IrradianceBreakdown::new(beam, diffuse, reflected))
}

pub fn bifacial_rear(
    rec: &WeatherRecord,
    pos: &SolarPosition,
    site: &SiteSpec,
    p: &BifacialParams,
) -> Result<IrradianceBreakdown> {
    let ghi = resolve_ghi(rec, pos)?;
    if !sun_up(pos) {
        return Ok(IrradianceBreakdown::ZERO);
    }
    let beam = rec.dni * incidence_cosine(pos, site, Face::Rear);
    let diffuse = rec.dhi * rear_sky_view(site.tilt);
    let reflected = p.rear_loss * p.albedo * ghi * front_sky_view(site.tilt);
    Ok(IrradianceBreakdown::new(beam, diffuse, reflected))
}

/// Power-effective plane irradiance of a bifacial module, `front + φ_b·rear`.
pub fn bifacial_effective(
    front: &IrradianceBreakdown,
    rear: &IrradianceBreakdown,
    p: &BifacialParams,
) -> f64 {
    front.total + p.bifaciality * rear.total
}

/// Everything computed for one hour, kept for the plot-ready exports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrradianceSample {
    pub hour_index: usize,
    pub position: SolarPosition,
    pub ghi: f64,
    pub monofacial: f64,
    pub front: IrradianceBreakdown,
    pub rear: IrradianceBreakdown,
    pub bifacial: f64,
    pub t_amb: f64,
}

pub fn irradiance_series(
    site: &SiteSpec,
    weather: &[WeatherRecord],
    params: &BifacialParams,
) -> Result<Vec<IrradianceSample>> {
    weather
        .iter()
        .map(|rec| {
            let pos = sun_position(site, rec.hour_index)?;
            let ghi = resolve_ghi(rec, &pos)?;
            let front = bifacial_front(rec, &pos, site, params)?;
            let rear = bifacial_rear(rec, &pos, site, params)?;
            Ok(IrradianceSample {
                hour_index: rec.hour_index,
                position: pos,
                ghi,
                monofacial: transpose_monofacial(ghi, &pos, site),
                front,
                rear,
                bifacial: bifacial_effective(&front, &rear, params),
                t_amb: rec.t_amb,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solar_geometry::position_from_angles;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pos_with_elevation(elevation: f64) -> SolarPosition {
        SolarPosition {
            declination: 0.0,
            hour_angle: 0.0,
            elevation,
            zenith: 90.0 - elevation,
            azimuth: 0.0,
        }
    }

    fn rec(dni: f64, dhi: f64, ghi: Option<f64>) -> WeatherRecord {
        WeatherRecord {
            hour_index: 0,
            dni,
            dhi,
            ghi,
            t_amb: 10.0,
        }
    }

    #[test]
    fn ghi_reconstruction() {
        let g = ghi_from_components(&rec(800.0, 100.0, None), &pos_with_elevation(30.0)).unwrap();
        assert_abs_diff_eq!(g, 500.0, epsilon = 1e-9);
        let g = ghi_from_components(&rec(800.0, 100.0, None), &pos_with_elevation(0.0)).unwrap();
        assert_abs_diff_eq!(g, 100.0, epsilon = 1e-9);
        let g = ghi_from_components(&rec(800.0, 100.0, None), &pos_with_elevation(-20.0)).unwrap();
        assert_eq!(g, 100.0);
        assert_eq!(ghi_from_components(&rec(0.0, 0.0, None), &pos_with_elevation(40.0)).unwrap(), 0.0);
        assert!(ghi_from_components(&rec(-1.0, 0.0, None), &pos_with_elevation(40.0)).is_err());
    }

    #[test]
    fn measured_ghi_takes_precedence() {
        let g = resolve_ghi(&rec(800.0, 100.0, Some(321.0)), &pos_with_elevation(30.0)).unwrap();
        assert_eq!(g, 321.0);
    }

    #[test]
    fn monofacial_transposition() {
        let site = SiteSpec {
            monofacial_elevation: TiltFactorElevation::Hourly,
            ..SiteSpec::default()
        };
        // 500 * sin(66.5°) / sin(30°)
        let expected = 500.0 * 66.5_f64.to_radians().sin() / 0.5;
        assert_abs_diff_eq!(expected, 917.06, epsilon = 0.1);
        assert_abs_diff_eq!(
            transpose_monofacial(500.0, &pos_with_elevation(30.0), &site),
            expected,
            epsilon = 1e-9
        );
        let flat = SiteSpec { tilt: 0.0, ..site };
        assert_abs_diff_eq!(transpose_monofacial(500.0, &pos_with_elevation(30.0), &flat), 500.0, epsilon = 1e-9);
        assert_eq!(transpose_monofacial(500.0, &pos_with_elevation(1.0), &site), 0.0);
        assert_eq!(transpose_monofacial(500.0, &pos_with_elevation(-5.0), &site), 0.0);
    }

    #[test]
    fn front_diffuse_and_reflected_anchors() {
        let site = SiteSpec::default();
        let p = BifacialParams::default();
        let pos = pos_with_elevation(50.0);
        let f = bifacial_front(&rec(0.0, 490.0, Some(0.0)), &pos, &site, &p).unwrap();
        assert_abs_diff_eq!(f.diffuse, 441.95, epsilon = 0.05);
        let f = bifacial_front(&rec(0.0, 0.0, Some(1002.0)), &pos, &site, &p).unwrap();
        assert_abs_diff_eq!(f.reflected, 49.13, epsilon = 0.05);
        let r = bifacial_rear(&rec(0.0, 490.0, Some(0.0)), &pos, &site, &p).unwrap();
        assert_abs_diff_eq!(r.diffuse, 48.05, epsilon = 0.05);
    }

    #[test]
    fn night_is_dark() {
        let site = SiteSpec::default();
        let p = BifacialParams::default();
        let night = pos_with_elevation(-10.0);
        let r = rec(0.0, 0.0, None);
        assert_eq!(bifacial_front(&r, &night, &site, &p).unwrap(), IrradianceBreakdown::ZERO);
        assert_eq!(bifacial_rear(&r, &night, &site, &p).unwrap(), IrradianceBreakdown::ZERO);
        // Floor applies even if the file reports stray diffuse light.
        let r = rec(0.0, 20.0, None);
        assert_eq!(bifacial_front(&r, &pos_with_elevation(0.5), &site, &p).unwrap(), IrradianceBreakdown::ZERO);
    }

    #[test]
    fn rear_is_dark_without_ghi_or_dhi() {
        let site = SiteSpec::default();
        let p = BifacialParams::default();
        let noon = position_from_angles(site.latitude, 0.0, 0.0);
        let r = bifacial_rear(&rec(700.0, 0.0, Some(0.0)), &noon, &site, &p).unwrap();
        assert_eq!(r, IrradianceBreakdown::ZERO);
    }

    #[test]
    fn effective_irradiance() {
        let p = BifacialParams::default();
        let front = IrradianceBreakdown::new(175.7252, 0.0, 0.0);
        let rear = IrradianceBreakdown::new(0.0, 60.2688, 0.0);
        assert_abs_diff_eq!(bifacial_effective(&front, &rear, &p), 217.9134, epsilon = 0.001);
        assert_eq!(bifacial_effective(&front, &IrradianceBreakdown::ZERO, &p), front.total);
        let unit = BifacialParams { bifaciality: 1.0, ..p };
        assert_eq!(
            bifacial_effective(&IrradianceBreakdown::new(100.0, 0.0, 0.0), &IrradianceBreakdown::new(50.0, 0.0, 0.0), &unit),
            150.0
        );
    }

    #[test]
    fn params_validation() {
        assert!(BifacialParams::default().validate().is_ok());
        assert!(BifacialParams { albedo: 1.2, ..Default::default() }.validate().is_err());
        assert!(BifacialParams { bifaciality: f64::NAN, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn noon_tilt_factor_ignores_hour() {
        let site = SiteSpec::default();
        let alpha_noon = 90.0 - 43.893648;
        let expected = 500.0 * (alpha_noon + 36.5_f64).to_radians().sin() / alpha_noon.to_radians().sin();
        for elev in [5.0, 20.0, 46.0] {
            assert_abs_diff_eq!(transpose_monofacial(500.0, &pos_with_elevation(elev), &site), expected, epsilon = 1e-9);
        }
        assert_eq!(transpose_monofacial(500.0, &pos_with_elevation(0.5), &site), 0.0);
        // Polar night: the noon sun never clears the floor.
        let arctic = SiteSpec { latitude: 80.0, ..site };
        let pos = SolarPosition { declination: -23.0, ..pos_with_elevation(2.0) };
        assert_eq!(transpose_monofacial(500.0, &pos, &arctic), 0.0);
    }

    proptest! {
        #[test]
        fn sky_view_factors_sum_to_dhi(dhi in 0.0..1200.0f64, ghi in 0.0..1200.0f64,
                                       dni in 0.0..1100.0f64, tilt in 0.0..90.0f64,
                                       elev in 1.5..89.0f64, az in -180.0..180.0f64) {
            let site = SiteSpec { tilt, ..SiteSpec::default() };
            let p = BifacialParams::default();
            let pos = SolarPosition { azimuth: az, ..pos_with_elevation(elev) };
            let r = rec(dni, dhi, Some(ghi));
            let f = bifacial_front(&r, &pos, &site, &p).unwrap();
            let b = bifacial_rear(&r, &pos, &site, &p).unwrap();
            prop_assert!((f.diffuse + b.diffuse - dhi).abs() <= 1e-9 * dhi.max(1.0));
            for x in [f, b] {
                prop_assert!(x.beam >= 0.0 && x.diffuse >= 0.0 && x.reflected >= 0.0);
                prop_assert_eq!(x.total, x.beam + x.diffuse + x.reflected);
            }
            prop_assert!(f.beam == 0.0 || b.beam == 0.0);
            let flat = SiteSpec { tilt: 0.0, ..site };
            prop_assert!((transpose_monofacial(ghi, &pos, &flat) - ghi).abs() <= 1e-9 * ghi.max(1.0));
        }

        #[test]
        fn effective_is_monotone(front in 0.0..1500.0f64, rear in 0.0..500.0f64,
                                 phi in 0.0..1.0f64, d in 0.0..100.0f64) {
            let p = BifacialParams { bifaciality: phi, ..Default::default() };
            let f = IrradianceBreakdown::new(front, 0.0, 0.0);
            let r = IrradianceBreakdown::new(0.0, rear, 0.0);
            let base = bifacial_effective(&f, &r, &p);
            prop_assert!(bifacial_effective(&IrradianceBreakdown::new(front + d, 0.0, 0.0), &r, &p) >= base);
            prop_assert!(bifacial_effective(&f, &IrradianceBreakdown::new(0.0, rear + d, 0.0), &p) >= base);
            let p2 = BifacialParams { bifaciality: (phi + d / 100.0).min(1.0), ..p };
            prop_assert!(bifacial_effective(&f, &r, &p2) >= base);
        }
    }
}
