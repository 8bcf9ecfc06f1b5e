//! Deterministic synthetic year of weather and load for a mid-latitude
//! lakeshore site.
//!
//! This is NOT measured data. It stands in for an hourly irradiance and
//! temperature file and a utility sub-feeder load profile, and is shaped so
//! that each series hits prescribed minimum, mean and maximum values.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dispatch::LoadRecord;
use crate::error::Result;
use crate::irradiance::WeatherRecord;
use crate::solar_geometry::{sun_position, SiteSpec};
use crate::HOURS_PER_YEAR;

pub const DEFAULT_SEED: u64 = 2022;

/// Target (min, mean, max) of a generated series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremes {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Annual statistics the synthetic weather is fitted to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherTargets {
    pub dni: Extremes,
    pub dhi: Extremes,
    pub t_amb: Extremes,
}

impl Default for WeatherTargets {
    fn default() -> Self {
        Self {
            dni: Extremes { min: 0.0, mean: 163.6844, max: 998.0 },
            dhi: Extremes { min: 0.0, mean: 58.8176, max: 490.0 },
            t_amb: Extremes { min: -14.5, mean: 8.2508, max: 27.8 },
        }
    }
}

/// Residential sub-feeder load, MW.
pub const LOAD_TARGET: Extremes = Extremes {
    min: 0.0217,
    mean: 0.4686,
    max: 2.3153,
};

/// Map `values` monotonically onto `[target.min, target.max]` with a power
/// curve chosen so the mean lands on `target.mean`.
pub fn fit_extremes(values: &mut [f64], target: Extremes) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    assert!(span > 0.0, "cannot fit a constant series");
    let unit: Vec<f64> = values.iter().map(|v| (v - lo) / span).collect();
    let goal = (target.mean - target.min) / (target.max - target.min);
    let mean_at = |p: f64| unit.iter().map(|u| u.powf(p)).sum::<f64>() / unit.len() as f64;

    // mean_at is decreasing in p; bisect in log space.
    let (mut a, mut b) = (-8.0_f64, 8.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mean_at(mid.exp()) > goal {
            a = mid;
        } else {
            b = mid;
        }
    }
    let p = (0.5 * (a + b)).exp();
    for (v, u) in values.iter_mut().zip(&unit) {
        *v = target.min + (target.max - target.min) * u.powf(p);
    }
}

/// Scale a nonnegative series so its mean lands on `target.mean` and its
/// maximum on `target.max`. Values below the `tail` quantile are scaled
/// linearly; the tail above it is stretched to reach the maximum. Unlike
/// [`fit_extremes`] this keeps the shape of the low end, which matters for
/// irradiance near sunrise and sunset.
pub fn fit_scaled(values: &mut [f64], target: Extremes, tail: f64) {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let hi = sorted[n - 1];
    let mut q = tail;
    loop {
        let t = sorted[((n - 1) as f64 * q) as usize];
        assert!(hi > t && t > 0.0, "series too flat to fit");
        let map = |k: f64, v: f64| {
            if v <= t {
                k * v
            } else {
                k * t + (v - t) * (target.max - k * t) / (hi - t)
            }
        };
        let mean_at = |k: f64| values.iter().map(|&v| map(k, v)).sum::<f64>() / n as f64;
        // mean_at is increasing in k on (0, max/t); widen the tail until the
        // target mean is reachable.
        if mean_at(target.max / t) < target.mean {
            q -= 0.005;
            continue;
        }
        let (mut a, mut b) = (0.0, target.max / t);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mean_at(mid) < target.mean {
                a = mid;
            } else {
                b = mid;
            }
        }
        let k = 0.5 * (a + b);
        for v in values.iter_mut() {
            *v = map(k, *v);
        }
        return;
    }
}

/// Erbs diffuse fraction as a function of the clearness index.
fn diffuse_fraction(kt: f64) -> f64 {
    if kt <= 0.22 {
        1.0 - 0.09 * kt
    } else if kt <= 0.8 {
        0.9511 - 0.1604 * kt + 4.388 * kt.powi(2) - 16.638 * kt.powi(3) + 12.336 * kt.powi(4)
    } else {
        0.165
    }
}

fn day_of_year(hour: usize) -> f64 {
    (hour / 24) as f64 + 1.0
}

/// One year of hourly weather with measured-style GHI filled in from the
/// generated components.
pub fn synthetic_weather(site: &SiteSpec, targets: &WeatherTargets, seed: u64) -> Result<Vec<WeatherRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");

    let mut positions = Vec::with_capacity(HOURS_PER_YEAR);
    let mut dni = vec![0.0; HOURS_PER_YEAR];
    let mut dhi = vec![0.0; HOURS_PER_YEAR];
    let mut temp = vec![0.0; HOURS_PER_YEAR];

    let mut cloud_anomaly = 0.0;
    let mut day_clearness = 0.5;
    let mut temp_anomaly = 0.0;
    let mut temp_noise = 0.0;
    for h in 0..HOURS_PER_YEAR {
        let day = day_of_year(h);
        let season = (2.0 * PI * (day - 172.0) / 365.0).cos(); // +1 mid-summer
        if h % 24 == 0 {
            cloud_anomaly = 0.6 * cloud_anomaly + 0.22 * unit.sample(&mut rng);
            day_clearness = (0.48 + 0.14 * season + cloud_anomaly).clamp(0.05, 0.78);
            temp_anomaly = 0.8 * temp_anomaly + 1.8 * unit.sample(&mut rng);
        }
        temp_noise = 0.9 * temp_noise + 0.4 * unit.sample(&mut rng);

        let pos = sun_position(site, h)?;
        if pos.elevation > 0.0 {
            let zen = pos.zenith;
            let cos_z = zen.to_radians().cos();
            let air_mass = 1.0 / (cos_z + 0.50572 * (96.07995 - zen).powf(-1.6364));
            let dni_clear = 1361.0 * 0.7_f64.powf(air_mass.powf(0.678));
            let ghi_clear = dni_clear * cos_z * 1.1;
            let kt = (day_clearness + 0.06 * unit.sample(&mut rng)).clamp(0.03, 0.8);
            let ghi = kt * ghi_clear;
            let d = diffuse_fraction(kt) * ghi;
            dhi[h] = d;
            dni[h] = ((ghi - d) / cos_z.max(0.05)).clamp(0.0, dni_clear);
        }
        positions.push(pos);

        let hour = (h % 24) as f64 + 0.5;
        temp[h] = 8.0 + 12.0 * season + 4.0 * (2.0 * PI * (hour - 9.0) / 24.0).sin() + temp_anomaly + temp_noise;
    }

    fit_scaled(&mut dni, targets.dni, 0.995);
    fit_scaled(&mut dhi, targets.dhi, 0.995);
    fit_extremes(&mut temp, targets.t_amb);

    Ok((0..HOURS_PER_YEAR)
        .map(|h| {
            let cos_z = positions[h].zenith.to_radians().cos().max(0.0);
            WeatherRecord {
                hour_index: h,
                dni: dni[h],
                dhi: dhi[h],
                ghi: Some(dhi[h] + dni[h] * cos_z),
                t_amb: temp[h],
            }
        })
        .collect())
}

/// One year of hourly residential feeder load, MW.
pub fn synthetic_load(target: Extremes, seed: u64) -> Vec<LoadRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x10AD);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let mut noise = 0.0;
    let mut raw: Vec<f64> = (0..HOURS_PER_YEAR)
        .map(|h| {
            let day = day_of_year(h);
            let hour = (h % 24) as f64 + 0.5;
            let winter = 0.35 * (2.0 * PI * (day - 15.0) / 365.0).cos();
            let summer = 0.3 * (-((day - 200.0) / 30.0).powi(2)).exp();
            let daily = 0.55
                + 0.25 * (-((hour - 8.0) / 2.0).powi(2)).exp()
                + 0.6 * (-((hour - 19.0) / 2.5).powi(2)).exp()
                + 0.25 * summer * (-((hour - 16.0) / 3.0).powi(2)).exp() / 0.3
                - 0.2 * (-((hour - 3.5) / 2.0).powi(2)).exp();
            let weekend = if (h / 24) % 7 >= 5 { 1.05 } else { 1.0 };
            noise = 0.85 * noise + 0.05 * unit.sample(&mut rng);
            (1.0 + winter + summer) * daily * weekend * (1.0 + noise)
        })
        .collect();
    fit_extremes(&mut raw, target);
    raw.into_iter()
        .enumerate()
        .map(|(hour_index, p_load)| LoadRecord { hour_index, p_load })
        .collect()
}
