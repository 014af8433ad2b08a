//! Telemetry rows and CSV output. One row per control tick; all floats are
//! printed with 9 significant digits so identical runs produce byte-identical
//! files.

use crate::math::Vec3;
use std::io::{self, Write};

/// Fixed column order of the telemetry CSV.
pub const TELEMETRY_COLUMNS: [&str; 29] = [
    "t", "px", "py", "pz", "vx", "vy", "vz", "yaw", "pitch", "roll", "q1", "q2", "q3", "ee_x",
    "ee_y", "ee_z", "f_low_x", "f_low_y", "f_low_z", "f_high_x", "f_high_y", "f_high_z",
    "f_ext_x", "f_ext_y", "f_ext_z", "t_spec", "omega_d_x", "omega_d_y", "omega_d_z",
];

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TelemetryRow {
    pub t: f64,
    pub p: Vec3,
    pub v: Vec3,
    /// ZYX Euler angles, rad.
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub q: [f64; 3],
    pub ee_world: Vec3,
    pub f_low: Vec3,
    pub f_high: Vec3,
    pub f_ext_true: Vec3,
    pub t_spec: f64,
    pub omega_d: Vec3,
}

impl TelemetryRow {
    pub fn values(&self) -> [f64; 29] {
        [
            self.t,
            self.p.x,
            self.p.y,
            self.p.z,
            self.v.x,
            self.v.y,
            self.v.z,
            self.yaw,
            self.pitch,
            self.roll,
            self.q[0],
            self.q[1],
            self.q[2],
            self.ee_world.x,
            self.ee_world.y,
            self.ee_world.z,
            self.f_low.x,
            self.f_low.y,
            self.f_low.z,
            self.f_high.x,
            self.f_high.y,
            self.f_high.z,
            self.f_ext_true.x,
            self.f_ext_true.y,
            self.f_ext_true.z,
            self.t_spec,
            self.omega_d.x,
            self.omega_d.y,
            self.omega_d.z,
        ]
    }

    pub fn from_values(v: &[f64]) -> Option<Self> {
        if v.len() != TELEMETRY_COLUMNS.len() {
            return None;
        }
        Some(Self {
            t: v[0],
            p: Vec3::new(v[1], v[2], v[3]),
            v: Vec3::new(v[4], v[5], v[6]),
            yaw: v[7],
            pitch: v[8],
            roll: v[9],
            q: [v[10], v[11], v[12]],
            ee_world: Vec3::new(v[13], v[14], v[15]),
            f_low: Vec3::new(v[16], v[17], v[18]),
            f_high: Vec3::new(v[19], v[20], v[21]),
            f_ext_true: Vec3::new(v[22], v[23], v[24]),
            t_spec: v[25],
            omega_d: Vec3::new(v[26], v[27], v[28]),
        })
    }
}

/// Receives rows as the scenario produces them, so a numerical abort still
/// leaves the partial telemetry flushed.
pub trait TelemetrySink {
    fn record(&mut self, row: &TelemetryRow) -> io::Result<()>;
}

/// In-memory sink for tests and metric recomputation.
#[derive(Default)]
pub struct VecSink(pub Vec<TelemetryRow>);

impl TelemetrySink for VecSink {
    fn record(&mut self, row: &TelemetryRow) -> io::Result<()> {
        self.0.push(*row);
        Ok(())
    }
}

/// CSV writer with the documented header and 9-significant-digit floats.
pub struct CsvSink<W: Write> {
    w: W,
}

impl<W: Write> CsvSink<W> {
    pub fn new(mut w: W) -> io::Result<Self> {
        writeln!(w, "{}", TELEMETRY_COLUMNS.join(","))?;
        Ok(Self { w })
    }

    pub fn into_inner(self) -> W {
        self.w
    }
}

impl<W: Write> TelemetrySink for CsvSink<W> {
    fn record(&mut self, row: &TelemetryRow) -> io::Result<()> {
        let vals = row.values();
        let mut line = String::with_capacity(vals.len() * 18);
        for (i, v) in vals.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:.8e}"));
        }
        writeln!(self.w, "{line}")
    }
}

/// Parses a telemetry CSV produced by [`CsvSink`].
pub fn parse_telemetry<R: io::BufRead>(reader: R) -> io::Result<Vec<TelemetryRow>> {
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if line != TELEMETRY_COLUMNS.join(",") {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    "unrecognized telemetry header",
                ));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let vals: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let vals = vals.map_err(|e| {
            io::Error::new(
                io::ErrorKind::InvalidData,
                format!("line {}: {e}", lineno + 1),
            )
        })?;
        let row = TelemetryRow::from_values(&vals).ok_or_else(|| {
            io::Error::new(
                io::ErrorKind::InvalidData,
                format!("line {}: wrong column count", lineno + 1),
            )
        })?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let row = TelemetryRow {
            t: 0.01,
            p: Vec3::new(1.0, -2.0, 0.5),
            v: Vec3::new(0.1, 0.2, -0.3),
            yaw: 0.05,
            pitch: -0.02,
            roll: 0.005,
            q: [0.1, 0.2, 0.3],
            ee_world: Vec3::new(0.0, 0.0, -0.2),
            f_low: Vec3::new(0.4, 0.0, -3.9),
            f_high: Vec3::new(0.01, 0.0, 0.0),
            f_ext_true: Vec3::new(0.41, 0.0, -3.92),
            t_spec: 9.81,
            omega_d: Vec3::new(0.0, 0.0, 0.1),
        };
        let mut sink = CsvSink::new(Vec::new()).unwrap();
        sink.record(&row).unwrap();
        sink.record(&row).unwrap();
        let bytes = sink.into_inner();
        let parsed = parse_telemetry(io::BufReader::new(bytes.as_slice())).unwrap();
        assert_eq!(parsed.len(), 2);
        for (a, b) in row.values().iter().zip(parsed[0].values().iter()) {
            assert!((a - b).abs() <= a.abs() * 1e-8);
        }
    }

    #[test]
    fn identical_rows_serialize_identically() {
        let row = TelemetryRow {
            t: 1.0 / 3.0,
            p: Vec3::new(0.1234567891234, 0.0, 0.0),
            ..TelemetryRow::default()
        };
        let mut s1 = CsvSink::new(Vec::new()).unwrap();
        let mut s2 = CsvSink::new(Vec::new()).unwrap();
        s1.record(&row).unwrap();
        s2.record(&row).unwrap();
        assert_eq!(s1.into_inner(), s2.into_inner());
    }
}
