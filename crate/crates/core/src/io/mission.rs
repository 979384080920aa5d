//! Mission and weather CSV files.
//!
//! Headers declare units as `name[unit]`. Temperatures accept `K` or
//! `degC`, irradiance `W/m2`, coordinates `deg`; dimensionless columns take
//! `-` or no unit.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, FixedOffset, SecondsFormat};
use serde::{Deserialize, Serialize};

use super::{create, open, IoError};
use crate::dynamics::MissionTrace;
use crate::model::{celsius_to_kelvin, Disturbance, ModelConstants};

/// Share of the total door area opened when the door flag is set.
pub const DOOR_SHARE: f64 = 0.6;

/// Column names of the mission and weather files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionSchema {
    pub timestamp: String,
    pub passengers: String,
    pub door_flag: String,
    pub door_fraction: String,
    pub shadow_fraction: String,
    pub latitude: String,
    pub longitude: String,
    pub t_amb: String,
    pub i_dni: String,
    pub i_dhi: String,
}

impl Default for MissionSchema {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            passengers: "passenger_count".into(),
            door_flag: "door_open_flag".into(),
            door_fraction: "door_fraction".into(),
            shadow_fraction: "shadow_fraction".into(),
            latitude: "latitude".into(),
            longitude: "longitude".into(),
            t_amb: "t_amb".into(),
            i_dni: "i_dni".into(),
            i_dhi: "i_dhi".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissionRow {
    pub timestamp: DateTime<FixedOffset>,
    pub n_pass: f64,
    pub door_fraction: f64,
    pub shadow_fraction: f64,
    pub latitude: f64,
    pub longitude: f64,
    /// `(t_amb [K], i_dni, i_dhi)` when the file carries weather columns.
    pub weather: Option<(f64, f64, f64)>,
}

/// Mission rows before weather is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionData {
    pub id: String,
    pub rows: Vec<MissionRow>,
}

impl MissionData {
    /// Trace from the file's own weather columns.
    pub fn into_trace(self) -> Result<MissionTrace, IoError> {
        let mut samples = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            let (t_amb, i_dni, i_dhi) = r
                .weather
                .ok_or_else(|| IoError::Schema(format!("mission {} has no weather columns", self.id)))?;
            samples.push(disturbance(r, t_amb, i_dni, i_dhi));
        }
        Ok(MissionTrace::new(self.id, samples)?)
    }
}

fn disturbance(r: &MissionRow, t_amb: f64, i_dni: f64, i_dhi: f64) -> Disturbance {
    Disturbance {
        timestamp: r.timestamp,
        t_amb,
        i_dni,
        i_dhi,
        n_pass: r.n_pass,
        door_fraction: r.door_fraction,
        shadow_fraction: r.shadow_fraction,
        latitude: r.latitude,
        longitude: r.longitude,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherRecord {
    pub timestamp: DateTime<FixedOffset>,
    /// [K]
    pub t_amb: f64,
    pub i_dni: f64,
    pub i_dhi: f64,
}

/// Header cell split into name and declared unit.
fn split_header(cell: &str) -> (String, Option<String>) {
    let cell = cell.trim();
    match cell.split_once('[') {
        Some((name, rest)) if rest.ends_with(']') => {
            (name.trim().to_string(), Some(rest[..rest.len() - 1].trim().to_string()))
        }
        _ => (cell.to_string(), None),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Quantity {
    Time,
    Dimensionless,
    Angle,
    Temperature,
    Irradiance,
}

/// Column lookup with unit checks.
struct Columns {
    index: HashMap<String, (usize, Option<String>)>,
}

impl Columns {
    fn new(headers: &csv::StringRecord) -> Result<Self, IoError> {
        let mut index = HashMap::new();
        for (i, cell) in headers.iter().enumerate() {
            let (name, unit) = split_header(cell);
            if index.insert(name.clone(), (i, unit)).is_some() {
                return Err(IoError::Schema(format!("duplicate column `{name}`")));
            }
        }
        Ok(Self { index })
    }

    /// Index and Kelvin offset of `name`, validating its unit.
    fn find(&self, name: &str, q: Quantity) -> Result<Option<(usize, f64)>, IoError> {
        let Some((i, unit)) = self.index.get(name) else {
            return Ok(None);
        };
        let unit = unit.as_deref();
        let offset = match (q, unit) {
            (Quantity::Time, None) => 0.0,
            (Quantity::Dimensionless, None | Some("-")) => 0.0,
            (Quantity::Angle, Some("deg")) => 0.0,
            (Quantity::Temperature, Some("K")) => 0.0,
            (Quantity::Temperature, Some("degC")) => celsius_to_kelvin(0.0),
            (Quantity::Irradiance, Some("W/m2")) => 0.0,
            _ => {
                return Err(IoError::Schema(format!(
                    "column `{name}` has unit {unit:?}, expected {}",
                    match q {
                        Quantity::Time => "none",
                        Quantity::Dimensionless => "`-` or none",
                        Quantity::Angle => "`deg`",
                        Quantity::Temperature => "`K` or `degC`",
                        Quantity::Irradiance => "`W/m2`",
                    }
                )))
            }
        };
        Ok(Some((*i, offset)))
    }

    fn require(&self, name: &str, q: Quantity) -> Result<(usize, f64), IoError> {
        self.find(name, q)?
            .ok_or_else(|| IoError::Schema(format!("missing column `{name}`")))
    }
}

fn cell(rec: &csv::StringRecord, i: usize, line: u64) -> Result<&str, IoError> {
    rec.get(i).map(str::trim).ok_or_else(|| IoError::Row {
        line,
        message: format!("missing field {}", i + 1),
    })
}

fn number(rec: &csv::StringRecord, col: (usize, f64), line: u64) -> Result<f64, IoError> {
    let s = cell(rec, col.0, line)?;
    let v: f64 = s.parse().map_err(|_| IoError::Row {
        line,
        message: format!("`{s}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(IoError::Row {
            line,
            message: format!("non-finite value `{s}`"),
        });
    }
    Ok(v + col.1)
}

fn timestamp(rec: &csv::StringRecord, i: usize, line: u64) -> Result<DateTime<FixedOffset>, IoError> {
    let s = cell(rec, i, line)?;
    DateTime::parse_from_rfc3339(s).map_err(|e| IoError::Row {
        line,
        message: format!("timestamp `{s}`: {e} (a zone offset is required)"),
    })
}

fn check_order(prev: &mut Option<DateTime<FixedOffset>>, t: DateTime<FixedOffset>, line: u64) -> Result<(), IoError> {
    if prev.is_some_and(|p| t <= p) {
        return Err(IoError::Row {
            line,
            message: "timestamps not strictly increasing".into(),
        });
    }
    *prev = Some(t);
    Ok(())
}

/// Reads a mission CSV. Positions default to the site in `c` when the
/// file has no coordinate columns.
pub fn read_mission<R: Read>(
    reader: R,
    id: &str,
    schema: &MissionSchema,
    c: &ModelConstants,
) -> Result<MissionData, IoError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let cols = Columns::new(rdr.headers()?)?;
    let ts = cols.require(&schema.timestamp, Quantity::Time)?.0;
    let pass = cols.require(&schema.passengers, Quantity::Dimensionless)?;
    let flag = cols.find(&schema.door_flag, Quantity::Dimensionless)?;
    let frac = cols.find(&schema.door_fraction, Quantity::Dimensionless)?;
    if flag.is_some() == frac.is_some() {
        return Err(IoError::Schema(format!(
            "exactly one of `{}` and `{}` is required",
            schema.door_flag, schema.door_fraction
        )));
    }
    let shadow = cols.find(&schema.shadow_fraction, Quantity::Dimensionless)?;
    let lat = cols.find(&schema.latitude, Quantity::Angle)?;
    let lon = cols.find(&schema.longitude, Quantity::Angle)?;
    let weather = [
        cols.find(&schema.t_amb, Quantity::Temperature)?,
        cols.find(&schema.i_dni, Quantity::Irradiance)?,
        cols.find(&schema.i_dhi, Quantity::Irradiance)?,
    ];
    let weather = match weather {
        [Some(t), Some(n), Some(h)] => Some((t, n, h)),
        [None, None, None] => None,
        _ => return Err(IoError::Schema("weather columns must be all present or all absent".into())),
    };

    let mut rows = Vec::new();
    let mut prev = None;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let t = timestamp(&rec, ts, line)?;
        check_order(&mut prev, t, line)?;
        let door_fraction = match (flag, frac) {
            (Some(col), _) => match number(&rec, col, line)? {
                v if v == 0.0 => 0.0,
                v if v == 1.0 => DOOR_SHARE,
                v => {
                    return Err(IoError::Row {
                        line,
                        message: format!("door flag {v} is not 0 or 1"),
                    })
                }
            },
            (_, Some(col)) => number(&rec, col, line)?,
            _ => unreachable!(),
        };
        let row = MissionRow {
            timestamp: t,
            n_pass: number(&rec, pass, line)?,
            door_fraction,
            shadow_fraction: shadow.map(|c| number(&rec, c, line)).transpose()?.unwrap_or(0.0),
            latitude: lat.map(|c| number(&rec, c, line)).transpose()?.unwrap_or(c.site_latitude),
            longitude: lon.map(|c| number(&rec, c, line)).transpose()?.unwrap_or(c.site_longitude),
            weather: weather
                .map(|(a, b, d)| -> Result<_, IoError> {
                    Ok((number(&rec, a, line)?, number(&rec, b, line)?, number(&rec, d, line)?))
                })
                .transpose()?,
        };
        if !(row.n_pass >= 0.0
            && (0.0..=1.0).contains(&row.door_fraction)
            && (0.0..=1.0).contains(&row.shadow_fraction))
        {
            return Err(IoError::Row {
                line,
                message: "passenger count, door or shadow fraction out of range".into(),
            });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(IoError::Schema(format!("mission {id} has no rows")));
    }
    Ok(MissionData {
        id: id.to_string(),
        rows,
    })
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "mission".into(), |s| s.to_string_lossy().into_owned())
}

pub fn load_mission(path: &Path, schema: &MissionSchema, c: &ModelConstants) -> Result<MissionData, IoError> {
    read_mission(open(path)?, &stem(path), schema, c)
}

/// Loads a mission and attaches weather, from `weather` when given and from
/// the file's own columns otherwise.
pub fn load_mission_trace(
    path: &Path,
    weather: Option<&Path>,
    schema: &MissionSchema,
    c: &ModelConstants,
) -> Result<MissionTrace, IoError> {
    let data = load_mission(path, schema, c)?;
    match weather {
        Some(w) => join_weather(&data, &load_weather(w, schema)?),
        None => data.into_trace(),
    }
}

pub fn read_weather<R: Read>(reader: R, schema: &MissionSchema) -> Result<Vec<WeatherRecord>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let cols = Columns::new(rdr.headers()?)?;
    let ts = cols.require(&schema.timestamp, Quantity::Time)?.0;
    let t = cols.require(&schema.t_amb, Quantity::Temperature)?;
    let dni = cols.require(&schema.i_dni, Quantity::Irradiance)?;
    let dhi = cols.require(&schema.i_dhi, Quantity::Irradiance)?;
    let mut out = Vec::new();
    let mut prev = None;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let timestamp = timestamp(&rec, ts, line)?;
        check_order(&mut prev, timestamp, line)?;
        let w = WeatherRecord {
            timestamp,
            t_amb: number(&rec, t, line)?,
            i_dni: number(&rec, dni, line)?,
            i_dhi: number(&rec, dhi, line)?,
        };
        if w.i_dni < 0.0 || w.i_dhi < 0.0 {
            return Err(IoError::Row {
                line,
                message: "negative irradiance".into(),
            });
        }
        out.push(w);
    }
    if out.is_empty() {
        return Err(IoError::Schema("weather file has no rows".into()));
    }
    Ok(out)
}

pub fn load_weather(path: &Path, schema: &MissionSchema) -> Result<Vec<WeatherRecord>, IoError> {
    read_weather(open(path)?, schema)
}

/// Attaches weather to each mission row: ambient temperature interpolated
/// linearly, irradiance held from the preceding record. Rows outside the
/// weather range take the nearest record.
pub fn join_weather(mission: &MissionData, weather: &[WeatherRecord]) -> Result<MissionTrace, IoError> {
    let (Some(w0), Some(w1)) = (weather.first(), weather.last()) else {
        return Err(IoError::Schema("empty weather series".into()));
    };
    let m0 = mission.rows[0].timestamp;
    let m1 = mission.rows[mission.rows.len() - 1].timestamp;
    if m1 < w0.timestamp || m0 > w1.timestamp {
        return Err(IoError::Schema(format!(
            "mission {m0}..{m1} does not overlap weather {}..{}",
            w0.timestamp, w1.timestamp
        )));
    }
    let mut outside = 0usize;
    let mut k = 0usize;
    let mut samples = Vec::with_capacity(mission.rows.len());
    for r in &mission.rows {
        while k + 1 < weather.len() && weather[k + 1].timestamp <= r.timestamp {
            k += 1;
        }
        let a = &weather[k];
        let (t_amb, hold) = if r.timestamp < a.timestamp {
            outside += 1;
            (a.t_amb, a)
        } else if k + 1 < weather.len() {
            let b = &weather[k + 1];
            let span = (b.timestamp - a.timestamp).num_milliseconds() as f64;
            let x = (r.timestamp - a.timestamp).num_milliseconds() as f64 / span;
            (a.t_amb + x * (b.t_amb - a.t_amb), a)
        } else {
            if r.timestamp > a.timestamp {
                outside += 1;
            }
            (a.t_amb, a)
        };
        samples.push(disturbance(r, t_amb, hold.i_dni, hold.i_dhi));
    }
    if outside > 0 {
        log::warn!("mission {}: {outside} rows outside the weather range", mission.id);
    }
    Ok(MissionTrace::new(mission.id.clone(), samples)?)
}

fn fmt_time(t: &DateTime<FixedOffset>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, false)
}

/// Writes a trace with every disturbance column; reading it back gives the
/// identical trace.
pub fn write_trace_csv<W: Write>(trace: &MissionTrace, writer: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "timestamp",
        "passenger_count[-]",
        "door_fraction[-]",
        "shadow_fraction[-]",
        "latitude[deg]",
        "longitude[deg]",
        "t_amb[K]",
        "i_dni[W/m2]",
        "i_dhi[W/m2]",
    ])?;
    for d in &trace.samples {
        w.write_record([
            fmt_time(&d.timestamp),
            d.n_pass.to_string(),
            d.door_fraction.to_string(),
            d.shadow_fraction.to_string(),
            d.latitude.to_string(),
            d.longitude.to_string(),
            d.t_amb.to_string(),
            d.i_dni.to_string(),
            d.i_dhi.to_string(),
        ])?;
    }
    w.flush().map_err(|source| IoError::File {
        path: "trace".into(),
        source,
    })?;
    Ok(())
}

pub fn save_trace_csv(trace: &MissionTrace, path: &Path) -> Result<(), IoError> {
    write_trace_csv(trace, create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c() -> ModelConstants {
        ModelConstants::default()
    }

    const MISSION: &str = "\
timestamp,passenger_count,door_open_flag[-]
2022-01-10T08:00:00+01:00,10,0
2022-01-10T08:00:01+01:00,11,1
2022-01-10T08:00:02+01:00,11,1
";

    #[test]
    fn door_flag_scaled_by_share() {
        let m = read_mission(MISSION.as_bytes(), "m", &MissionSchema::default(), &c()).unwrap();
        assert_eq!(m.rows[0].door_fraction, 0.0);
        assert_eq!(m.rows[1].door_fraction, 0.6);
        assert_eq!(m.rows[0].shadow_fraction, 0.0);
        assert_eq!(m.rows[0].latitude, c().site_latitude);
        assert!(m.clone().into_trace().is_err());
    }

    #[test]
    fn malformed_rows_report_line() {
        let bad = MISSION.replace("11,1\n2022-01-10T08:00:02", "x,1\n2022-01-10T08:00:02");
        match read_mission(bad.as_bytes(), "m", &MissionSchema::default(), &c()) {
            Err(IoError::Row { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        let unordered = MISSION.replace("08:00:02", "08:00:00");
        assert!(matches!(
            read_mission(unordered.as_bytes(), "m", &MissionSchema::default(), &c()),
            Err(IoError::Row { line: 4, .. })
        ));
        let flag = MISSION.replace("11,1\n2022-01-10T08:00:02", "11,0.5\n2022-01-10T08:00:02");
        assert!(read_mission(flag.as_bytes(), "m", &MissionSchema::default(), &c()).is_err());
    }

    #[test]
    fn units_are_checked() {
        let s = "timestamp,passenger_count,door_fraction,t_amb[F],i_dni[W/m2],i_dhi[W/m2]\n";
        assert!(matches!(
            read_mission(s.as_bytes(), "m", &MissionSchema::default(), &c()),
            Err(IoError::Schema(_))
        ));
        let s = "timestamp,passenger_count,door_fraction,t_amb,i_dni[W/m2],i_dhi[W/m2]\n";
        assert!(read_mission(s.as_bytes(), "m", &MissionSchema::default(), &c()).is_err());
        let s = "timestamp,passenger_count,door_fraction,t_amb[degC],i_dni[W/m2],i_dhi[W/m2]\n\
                 2022-01-10T08:00:00+01:00,3,0.1,5,0,0\n";
        let m = read_mission(s.as_bytes(), "m", &MissionSchema::default(), &c()).unwrap();
        assert_eq!(m.rows[0].weather.unwrap().0, 278.15);
    }

    #[test]
    fn schema_mapping_renames_columns() {
        let s = "time,pax,doors\n2022-01-10T08:00:00+01:00,3,1\n";
        let schema = MissionSchema {
            timestamp: "time".into(),
            passengers: "pax".into(),
            door_flag: "doors".into(),
            ..MissionSchema::default()
        };
        let m = read_mission(s.as_bytes(), "m", &schema, &c()).unwrap();
        assert_eq!(m.rows[0].n_pass, 3.0);
    }

    #[test]
    fn weather_join() {
        let m = read_mission(MISSION.as_bytes(), "m", &MissionSchema::default(), &c()).unwrap();
        let w = "timestamp,t_amb[degC],i_dni[W/m2],i_dhi[W/m2]\n\
                 2022-01-10T07:59:59+01:00,0,100,50\n\
                 2022-01-10T08:00:01+01:00,2,300,60\n\
                 2022-01-10T08:00:03+01:00,2,300,60\n";
        let w = read_weather(w.as_bytes(), &MissionSchema::default()).unwrap();
        let t = join_weather(&m, &w).unwrap();
        assert!((t.samples[0].t_amb - celsius_to_kelvin(1.0)).abs() < 1e-12);
        assert_eq!(t.samples[0].i_dni, 100.0);
        assert_eq!(t.samples[1].i_dni, 300.0);
        assert!(t.samples.iter().all(|d| d.validate().is_ok()));

        let far = "timestamp,t_amb[K],i_dni[W/m2],i_dhi[W/m2]\n2023-01-10T08:00:00+01:00,270,0,0\n";
        let far = read_weather(far.as_bytes(), &MissionSchema::default()).unwrap();
        assert!(join_weather(&m, &far).is_err());
    }

    #[test]
    fn trace_round_trip_is_exact() {
        let m = read_mission(MISSION.as_bytes(), "m", &MissionSchema::default(), &c()).unwrap();
        let w = vec![WeatherRecord {
            timestamp: m.rows[0].timestamp,
            t_amb: 271.123_456_789_012_3,
            i_dni: 0.1 + 0.2,
            i_dhi: 1.0 / 3.0,
        }];
        let trace = join_weather(&m, &w).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf).unwrap();
        let back = read_mission(buf.as_slice(), "m", &MissionSchema::default(), &c())
            .unwrap()
            .into_trace()
            .unwrap();
        assert_eq!(back, trace);
    }
}
