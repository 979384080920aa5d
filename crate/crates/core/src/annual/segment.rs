use chrono::{Datelike, Duration};
use serde::{Deserialize, Serialize};

use super::AnnualError;
use crate::dynamics::MissionTrace;
use crate::model::Disturbance;

/// Segments shorter than this are dropped [s].
pub const MIN_SEGMENT: f64 = 300.0;

/// Time-averaged disturbances over one segment of a mission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Offsets from mission start [s].
    pub start: f64,
    pub end: f64,
    /// Averages of every field; the timestamp is the segment midpoint.
    pub disturbance: Disturbance,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Averaged sample used in annual evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub disturbance: Disturbance,
    pub year: i32,
    pub month: u32,
}

impl Sample {
    pub fn new(id: impl Into<String>, disturbance: Disturbance) -> Self {
        Self {
            id: id.into(),
            year: disturbance.timestamp.year(),
            month: disturbance.timestamp.month(),
            disturbance,
        }
    }
}

/// Splits the trace into consecutive segments of `length` seconds from
/// mission start and averages the held samples over each.
pub fn segment_and_average(trace: &MissionTrace, length: f64) -> Result<Vec<Segment>, AnnualError> {
    if !(length > 0.0) {
        return Err(AnnualError::InvalidInput(format!("segment length {length}")));
    }
    let total = trace.duration();
    let offsets: Vec<f64> = trace.samples.iter().map(|d| trace.offset_of(d)).collect();
    let mut segments = Vec::new();
    let mut k = 0usize;
    loop {
        let start = k as f64 * length;
        if start >= total {
            break;
        }
        let end = ((k + 1) as f64 * length).min(total);
        k += 1;
        if end - start < MIN_SEGMENT {
            log::warn!(
                "mission {}: dropping {:.0} s segment at {:.0} s",
                trace.id,
                end - start,
                start
            );
            continue;
        }
        segments.push(Segment {
            start,
            end,
            disturbance: average(trace, &offsets, start, end),
        });
    }
    if segments.is_empty() {
        return Err(AnnualError::InvalidInput(format!(
            "mission {} shorter than {MIN_SEGMENT} s",
            trace.id
        )));
    }
    Ok(segments)
}

/// Time average of the sample-and-hold signal over `[start, end]`.
fn average(trace: &MissionTrace, offsets: &[f64], start: f64, end: f64) -> Disturbance {
    let first = offsets.partition_point(|&t| t <= start) - 1;
    let mut acc = [0.0; 8];
    for i in first..trace.samples.len() {
        if offsets[i] >= end {
            break;
        }
        let lo = offsets[i].max(start);
        let hi = offsets.get(i + 1).copied().unwrap_or(end).min(end);
        let w = hi - lo;
        let d = &trace.samples[i];
        for (a, v) in acc.iter_mut().zip([
            d.t_amb,
            d.i_dni,
            d.i_dhi,
            d.n_pass,
            d.door_fraction,
            d.shadow_fraction,
            d.latitude,
            d.longitude,
        ]) {
            *a += w * v;
        }
    }
    let span = end - start;
    let mid = trace.start() + Duration::milliseconds(((start + end) * 500.0).round() as i64);
    Disturbance {
        timestamp: mid,
        t_amb: acc[0] / span,
        i_dni: acc[1] / span,
        i_dhi: acc[2] / span,
        n_pass: acc[3] / span,
        door_fraction: (acc[4] / span).clamp(0.0, 1.0),
        shadow_fraction: (acc[5] / span).clamp(0.0, 1.0),
        latitude: acc[6] / span,
        longitude: acc[7] / span,
    }
}
