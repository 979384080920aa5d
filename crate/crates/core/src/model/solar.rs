//! Solar position.

use chrono::{DateTime, TimeZone};

/// Solar altitude above the horizon [rad] at the given instant and
/// position [deg], without refraction correction. Negative below the horizon.
///
/// Uses the NOAA low-precision ephemeris (about 0.01° accuracy between
/// 1800 and 2100).
pub fn solar_altitude<Tz: TimeZone>(time: &DateTime<Tz>, latitude: f64, longitude: f64) -> f64 {
    let utc = time.timestamp() as f64 + f64::from(time.timestamp_subsec_nanos()) * 1e-9;
    // Julian day from Unix time.
    let jd = utc / 86_400.0 + 2_440_587.5;
    let jc = (jd - 2_451_545.0) / 36_525.0;

    let geom_mean_long = (280.46646 + jc * (36000.76983 + jc * 0.0003032)).rem_euclid(360.0);
    let geom_mean_anom = 357.52911 + jc * (35999.05029 - 0.0001537 * jc);
    let eccent = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc);
    let m = geom_mean_anom.to_radians();
    let eq_ctr = m.sin() * (1.914602 - jc * (0.004817 + 0.000014 * jc))
        + (2.0 * m).sin() * (0.019993 - 0.000101 * jc)
        + (3.0 * m).sin() * 0.000289;
    let true_long = geom_mean_long + eq_ctr;
    let omega = (125.04 - 1934.136 * jc).to_radians();
    let app_long = true_long - 0.00569 - 0.00478 * omega.sin();
    let mean_obliq =
        23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813))) / 60.0) / 60.0;
    let obliq = (mean_obliq + 0.00256 * omega.cos()).to_radians();
    let decl = (obliq.sin() * app_long.to_radians().sin()).asin();

    let y = (obliq / 2.0).tan().powi(2);
    let l0 = geom_mean_long.to_radians();
    let eq_time = 4.0
        * (y * (2.0 * l0).sin() - 2.0 * eccent * m.sin()
            + 4.0 * eccent * y * m.sin() * (2.0 * l0).cos()
            - 0.5 * y * y * (4.0 * l0).sin()
            - 1.25 * eccent * eccent * (2.0 * m).sin())
        .to_degrees();

    let minutes_utc = utc.rem_euclid(86_400.0) / 60.0;
    let true_solar_time = (minutes_utc + eq_time + 4.0 * longitude).rem_euclid(1440.0);
    let hour_angle = (true_solar_time / 4.0 - 180.0).to_radians();

    let lat = latitude.to_radians();
    let sin_alt = lat.sin() * decl.sin() + lat.cos() * decl.cos() * hour_angle.cos();
    sin_alt.clamp(-1.0, 1.0).asin()
}
