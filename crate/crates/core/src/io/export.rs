use std::io::Write;
use std::path::Path;

use chrono::{Duration, SecondsFormat};
use serde::Serialize;

use super::{create, IoError};
use crate::annual::{ParetoRow, Sample};
use crate::dynamics::Trajectory;
use crate::steady::{ComfortRequirement, SteadyStateSolution};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// JSON summary attached to every command output.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub command: String,
    pub results: T,
}

impl<T: Serialize> RunSummary<T> {
    pub fn new(command: &str, config_hash: String, results: T) -> Self {
        Self {
            tool: "ebus-hvac",
            version: TOOL_VERSION,
            config_hash,
            command: command.to_string(),
            results,
        }
    }
}

fn flush<W: Write>(mut w: csv::Writer<W>) -> Result<(), IoError> {
    w.flush().map_err(|source| IoError::File {
        path: "csv output".into(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut f = std::io::BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

/// Long-format table of steady solutions: one row per design, comfort box
/// and sample. Wall times are written only when enabled.
pub struct SolutionTable<W: Write> {
    writer: csv::Writer<W>,
    timings: bool,
}

impl<W: Write> SolutionTable<W> {
    pub fn new(writer: W, timings: bool) -> Result<Self, IoError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![
            "design", "psi_min[-]", "psi_max[-]", "sample_id", "timestamp", "t_amb[K]", "n_pass[-]",
            "door_fraction[-]", "mode", "air_curtain", "radiant", "p_hc[W]", "p_rh[W]", "p_aircurt[W]",
            "p_hvac[W]", "q_hc[W]", "cop[-]", "t_rh[K]", "t_int[K]", "t_cab[K]", "t_si[K]", "t_so[K]", "psi[-]",
            "r_clo[clo]", "feasible", "residual[-]", "iterations",
        ];
        if timings {
            header.push("wall_time[ms]");
        }
        w.write_record(&header)?;
        Ok(Self { writer: w, timings })
    }

    pub fn append(
        &mut self,
        design: &str,
        req: &ComfortRequirement,
        samples: &[Sample],
        solutions: &[SteadyStateSolution],
        wall_times: Option<&[f64]>,
    ) -> Result<(), IoError> {
        for (i, (s, sol)) in samples.iter().zip(solutions).enumerate() {
            let st = &sol.state;
            let d = &s.disturbance;
            let mut row = vec![
                design.to_string(),
                req.psi_min.to_string(),
                req.psi_max.to_string(),
                s.id.clone(),
                d.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, false),
                d.t_amb.to_string(),
                d.n_pass.to_string(),
                d.door_fraction.to_string(),
                sol.inputs.mode.name().to_string(),
                (sol.inputs.air_curtain as u8).to_string(),
                (sol.inputs.radiant as u8).to_string(),
                sol.p_hc.to_string(),
                sol.p_rh.to_string(),
                sol.p_aircurt.to_string(),
                sol.p_hvac.to_string(),
                st.q_hc.to_string(),
                sol.cop.to_string(),
                st.t_rh.to_string(),
                st.t_int.to_string(),
                st.t_cab.to_string(),
                st.t_si.to_string(),
                st.t_so.to_string(),
                sol.psi.to_string(),
                sol.r_clo.to_string(),
                (sol.feasible as u8).to_string(),
                sol.residual_norm.to_string(),
                sol.iterations.to_string(),
            ];
            if self.timings {
                let t = wall_times.and_then(|t| t.get(i)).copied().unwrap_or(f64::NAN);
                row.push(format!("{t:.3}"));
            }
            self.writer.write_record(&row)?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<(), IoError> {
        flush(self.writer)
    }
}

pub fn write_pareto_csv<W: Write>(writer: W, rows: &[ParetoRow]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "design",
        "psi_min[-]",
        "psi_max[-]",
        "annual_mean_power[W]",
        "samples",
        "infeasible",
        "frac_lower_active[-]",
        "frac_upper_active[-]",
        "frac_interior[-]",
    ])?;
    for r in rows {
        w.write_record([
            r.design.clone(),
            r.psi_min.to_string(),
            r.psi_max.to_string(),
            r.annual_mean_power.to_string(),
            r.samples.to_string(),
            r.infeasible.to_string(),
            r.frac_lower_active.to_string(),
            r.frac_upper_active.to_string(),
            r.frac_interior.to_string(),
        ])?;
    }
    flush(w)
}

/// One row per recorded instant, temperatures in kelvin.
pub fn write_trajectory_csv<W: Write>(writer: W, traj: &Trajectory) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "timestamp", "t[s]", "t_amb[K]", "n_pass[-]", "door_fraction[-]", "t_rh[K]", "t_int[K]", "t_cab[K]",
        "t_si[K]", "t_so[K]", "q_hc[W]", "mode", "air_curtain", "radiant", "setpoint[K]", "p_hc[W]",
        "p_rh[W]", "p_aircurt[W]", "p_hvac[W]", "psi[-]",
    ])?;
    for p in &traj.points {
        let ts = traj.start + Duration::milliseconds((p.t * 1000.0).round() as i64);
        let s = &p.state;
        w.write_record([
            ts.to_rfc3339_opts(SecondsFormat::AutoSi, false),
            p.t.to_string(),
            p.t_amb.to_string(),
            p.n_pass.to_string(),
            p.door_fraction.to_string(),
            s.t_rh.to_string(),
            s.t_int.to_string(),
            s.t_cab.to_string(),
            s.t_si.to_string(),
            s.t_so.to_string(),
            s.q_hc.to_string(),
            p.inputs.mode.name().to_string(),
            (p.inputs.air_curtain as u8).to_string(),
            (p.inputs.radiant as u8).to_string(),
            p.setpoint.to_string(),
            p.inputs.p_hc.to_string(),
            p.inputs.p_rh.to_string(),
            p.p_aircurt.to_string(),
            p.p_hvac.to_string(),
            p.psi.to_string(),
        ])?;
    }
    flush(w)
}
