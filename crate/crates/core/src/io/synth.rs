//! Deterministic synthetic missions and sample years.
//!
//! Weather follows a diurnal sinusoid with clear-sky irradiance scaled by a
//! daily cloud factor; the bus alternates driving and stops with doors open,
//! and the passenger count follows morning and evening peaks.

use std::f64::consts::PI;

use chrono::{DateTime, Duration, FixedOffset, NaiveDate, TimeZone};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{IoError, DOOR_SHARE};
use crate::annual::{days_in_month, Sample};
use crate::dynamics::MissionTrace;
use crate::model::{celsius_to_kelvin, solar_altitude, Disturbance, ModelConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticProfile {
    WinterDay,
    SummerDay,
    YearRound,
}

impl std::str::FromStr for SyntheticProfile {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "winter-day" => Ok(Self::WinterDay),
            "summer-day" => Ok(Self::SummerDay),
            "year-round" => Ok(Self::YearRound),
            _ => Err(IoError::Config(format!("unknown synthetic profile `{s}`"))),
        }
    }
}

/// Service hours of a synthetic day.
const FIRST_HOUR: u32 = 5;
const LAST_HOUR: u32 = 19;

/// Monthly mean and half-range of the daytime temperature [°C], a
/// central-European climate.
const CLIMATE: [(f64, f64); 12] = [
    (0.3, 2.5),
    (1.6, 3.0),
    (5.6, 4.0),
    (9.3, 5.0),
    (13.6, 5.5),
    (17.1, 6.0),
    (19.2, 6.0),
    (18.6, 6.0),
    (14.6, 5.0),
    (10.3, 4.0),
    (5.0, 2.5),
    (1.5, 2.0),
];

/// Diurnal temperature with its maximum at 16:00.
fn diurnal(hour: f64, mean: f64, amplitude: f64) -> f64 {
    mean + amplitude * ((hour - 10.0) * 2.0 * PI / 24.0).sin()
}

/// Clear-sky direct normal and diffuse horizontal irradiance scaled by
/// `cloud` in (0, 1], one meaning clear.
fn irradiance(beta: f64, cloud: f64) -> (f64, f64) {
    let s = beta.sin();
    if s <= 0.01 {
        return (0.0, 0.0);
    }
    let air_mass = 1.0 / s;
    let dni = 1000.0 * 0.7f64.powf(air_mass.powf(0.678)) * cloud;
    let dhi = 1361.0 * s * (0.08 + 0.25 * (1.0 - cloud));
    (dni, dhi)
}

/// Expected passengers on board at local `hour`.
fn passenger_target(hour: f64) -> f64 {
    let peak = |c: f64, w: f64, h: f64| h * (-((hour - c) / w).powi(2)).exp();
    8.0 + peak(7.5, 1.0, 35.0) + peak(12.5, 2.0, 10.0) + peak(17.3, 1.3, 30.0)
}

fn utc_offset(month: u32) -> FixedOffset {
    let hours = if (4..=10).contains(&month) { 2 } else { 1 };
    FixedOffset::east_opt(hours * 3600).expect("valid offset")
}

fn local(date: NaiveDate, hour: u32) -> DateTime<FixedOffset> {
    use chrono::Datelike;
    utc_offset(date.month())
        .from_local_datetime(&date.and_hms_opt(hour, 0, 0).expect("valid time"))
        .single()
        .expect("fixed offsets are unambiguous")
}

struct DayWeather {
    mean: f64,
    amplitude: f64,
    cloud: f64,
}

/// One service day at 1 Hz.
fn day_trace(id: String, date: NaiveDate, w: DayWeather, rng: &mut ChaCha8Rng, c: &ModelConstants) -> Result<MissionTrace, IoError> {
    let start = local(date, FIRST_HOUR);
    let seconds = i64::from(LAST_HOUR - FIRST_HOUR) * 3600;
    let noise = Normal::new(0.0, 3.0).expect("valid sd");
    let mut samples = Vec::with_capacity(seconds as usize + 1);
    let mut n_pass = passenger_target(FIRST_HOUR as f64).round();
    let mut doors_open = false;
    let mut phase_left: i64 = rng.random_range(30..120);
    let mut shadow = rng.random_range(0.1..0.5);
    for s in 0..=seconds {
        let t = start + Duration::seconds(s);
        let hour = FIRST_HOUR as f64 + s as f64 / 3600.0;
        if phase_left == 0 {
            doors_open = !doors_open;
            phase_left = if doors_open {
                let target: f64 = passenger_target(hour) + noise.sample(rng);
                n_pass = target.round().clamp(0.0, 90.0);
                rng.random_range(15..35)
            } else {
                rng.random_range(60..150)
            };
        }
        phase_left -= 1;
        if s % 600 == 0 {
            shadow = rng.random_range(0.1..0.5);
        }
        let beta = solar_altitude(&t, c.site_latitude, c.site_longitude);
        let (i_dni, i_dhi) = irradiance(beta, w.cloud);
        samples.push(Disturbance {
            timestamp: t,
            t_amb: celsius_to_kelvin(diurnal(hour, w.mean, w.amplitude)),
            i_dni,
            i_dhi,
            n_pass,
            door_fraction: if doors_open { DOOR_SHARE } else { 0.0 },
            shadow_fraction: shadow,
            latitude: c.site_latitude,
            longitude: c.site_longitude,
        });
    }
    Ok(MissionTrace::new(id, samples)?)
}

/// A 14 h winter or summer service day at 1 Hz.
pub fn synth_mission(profile: SyntheticProfile, seed: u64, c: &ModelConstants) -> Result<MissionTrace, IoError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter: f64 = Normal::new(0.0, 1.0).expect("valid sd").sample(&mut rng);
    let (id, date, w) = match profile {
        SyntheticProfile::WinterDay => (
            "winter-day",
            NaiveDate::from_ymd_opt(2022, 1, 19),
            DayWeather {
                mean: -1.5 + jitter.clamp(-2.0, 2.0),
                amplitude: 3.0,
                cloud: rng.random_range(0.5..0.9),
            },
        ),
        SyntheticProfile::SummerDay => (
            "summer-day",
            NaiveDate::from_ymd_opt(2022, 7, 13),
            DayWeather {
                mean: 24.0 + jitter.clamp(-2.0, 2.0),
                amplitude: 6.0,
                cloud: rng.random_range(0.7..1.0),
            },
        ),
        SyntheticProfile::YearRound => {
            return Err(IoError::Config(
                "the year-round profile yields hourly samples, not a mission".into(),
            ))
        }
    };
    day_trace(id.to_string(), date.expect("valid date"), w, &mut rng, c)
}

/// Hourly samples of `days_per_month` service days in each month of 2022.
pub fn synth_year(seed: u64, days_per_month: usize, c: &ModelConstants) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let day_noise = Normal::new(0.0, 2.5).expect("valid sd");
    let pass_noise = Normal::new(0.0, 2.0).expect("valid sd");
    let mut out = Vec::with_capacity(12 * days_per_month * (LAST_HOUR - FIRST_HOUR) as usize);
    for month in 1..=12u32 {
        let (mean, amplitude) = CLIMATE[month as usize - 1];
        let days = days_in_month(2022, month) as f64;
        for k in 0..days_per_month {
            let day = 1 + ((k as f64 + rng.random_range(0.0..1.0)) / days_per_month as f64 * days).floor() as u32;
            let date = NaiveDate::from_ymd_opt(2022, month, day.min(days as u32)).expect("valid date");
            let w = DayWeather {
                mean: mean + day_noise.sample(&mut rng),
                amplitude,
                cloud: rng.random_range(0.3..1.0),
            };
            for hour in FIRST_HOUR..LAST_HOUR {
                let t = local(date, hour) + Duration::minutes(30);
                let h = hour as f64 + 0.5;
                let beta = solar_altitude(&t, c.site_latitude, c.site_longitude);
                let (i_dni, i_dhi) = irradiance(beta, w.cloud);
                let d = Disturbance {
                    timestamp: t,
                    t_amb: celsius_to_kelvin(diurnal(h, w.mean, w.amplitude)),
                    i_dni,
                    i_dhi,
                    n_pass: (passenger_target(h) + pass_noise.sample(&mut rng)).max(0.0),
                    door_fraction: DOOR_SHARE * rng.random_range(0.12..0.25),
                    shadow_fraction: rng.random_range(0.1..0.5),
                    latitude: c.site_latitude,
                    longitude: c.site_longitude,
                };
                out.push(Sample::new(format!("y{month:02}-{day:02}-{hour:02}"), d));
            }
        }
    }
    out
}
