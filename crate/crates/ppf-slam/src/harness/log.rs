//! Time-series log of a run and its CSV form.
//!
//! One row per logging interval with a fixed column schema. Floats are
//! written in scientific notation with 17 significant digits, so a parsed
//! value is bit-identical to the one that was written.

use super::config::Backend;
use super::HarnessError;
use crate::lie::{Mat3, Pose, Rotation, Twist, Vec3};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub truth_pose: Pose,
    pub est_pose: Pose,
    pub truth_landmarks: Vec<Vec3>,
    pub est_landmarks: Vec<Vec3>,
    /// Landmark errors `eᵢ`.
    pub e: Vec<Vec3>,
    /// Transformed errors `Eᵢ`.
    pub transformed: Vec<Vec3>,
    /// Envelope bounds `δ̄ᵢₖ·ξᵢₖ(t)`, recomputed at this row's time.
    pub bound: Vec<Vec3>,
    /// Bias estimate `b̂_U`.
    pub bias_est: Twist,
    /// Bias error `b̃_U = b_U − b̂_U`.
    pub bias_err: Twist,
    pub lyapunov: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub backend: Backend,
    pub n_landmarks: usize,
    pub rows: Vec<LogRow>,
}

impl RunLog {
    pub fn new(backend: Backend, n_landmarks: usize) -> Self {
        RunLog { backend, n_landmarks, rows: Vec::new() }
    }

    /// The column names for a run with `n` landmarks.
    pub fn header(n: usize) -> Vec<String> {
        let mut cols = vec!["t".to_string()];
        for prefix in ["truth", "est"] {
            for r in 1..=3 {
                for c in 1..=3 {
                    cols.push(format!("{prefix}_r{r}{c}"));
                }
            }
            for axis in ["px", "py", "pz"] {
                cols.push(format!("{prefix}_{axis}"));
            }
        }
        for prefix in ["truth_lm", "est_lm"] {
            for i in 1..=n {
                for axis in ["x", "y", "z"] {
                    cols.push(format!("{prefix}{i}_{axis}"));
                }
            }
        }
        for prefix in ["e", "E", "bound"] {
            for i in 1..=n {
                for k in 1..=3 {
                    cols.push(format!("{prefix}_{i}_{k}"));
                }
            }
        }
        for prefix in ["bhat", "btilde"] {
            for axis in ["wx", "wy", "wz", "vx", "vy", "vz"] {
                cols.push(format!("{prefix}_{axis}"));
            }
        }
        cols.push("lyapunov".to_string());
        cols.push("backend".to_string());
        cols
    }
}

/// 17 significant digits: enough to reproduce any f64 exactly on parse.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_pose(out: &mut Vec<String>, pose: &Pose) {
    let m = pose.rotation.matrix();
    for r in 0..3 {
        for c in 0..3 {
            out.push(fmt_f64(m[(r, c)]));
        }
    }
    for k in 0..3 {
        out.push(fmt_f64(pose.position[k]));
    }
}

fn push_vecs(out: &mut Vec<String>, vs: &[Vec3]) {
    for v in vs {
        for k in 0..3 {
            out.push(fmt_f64(v[k]));
        }
    }
}

fn push_twist(out: &mut Vec<String>, tw: &Twist) {
    for v in tw.as_vector().iter() {
        out.push(fmt_f64(*v));
    }
}

/// Writes the log as CSV: one header row, then one data row per log row.
pub fn emit_csv(log: &RunLog, path: &Path) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(RunLog::header(log.n_landmarks))?;
    for row in &log.rows {
        let mut record: Vec<String> = Vec::with_capacity(39 + 15 * log.n_landmarks);
        record.push(fmt_f64(row.t));
        push_pose(&mut record, &row.truth_pose);
        push_pose(&mut record, &row.est_pose);
        push_vecs(&mut record, &row.truth_landmarks);
        push_vecs(&mut record, &row.est_landmarks);
        push_vecs(&mut record, &row.e);
        push_vecs(&mut record, &row.transformed);
        push_vecs(&mut record, &row.bound);
        push_twist(&mut record, &row.bias_est);
        push_twist(&mut record, &row.bias_err);
        record.push(fmt_f64(row.lyapunov));
        record.push(log.backend.to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

struct FieldReader<'a> {
    fields: &'a csv::StringRecord,
    pos: usize,
    line: u64,
}

impl<'a> FieldReader<'a> {
    fn f64(&mut self) -> Result<f64, HarnessError> {
        let raw = self.fields.get(self.pos).ok_or_else(|| {
            HarnessError::LogFormat(format!("row {}: missing column {}", self.line, self.pos))
        })?;
        self.pos += 1;
        raw.parse::<f64>().map_err(|e| {
            HarnessError::LogFormat(format!("row {}: bad float '{raw}': {e}", self.line))
        })
    }

    fn vec3(&mut self) -> Result<Vec3, HarnessError> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }

    fn vecs(&mut self, n: usize) -> Result<Vec<Vec3>, HarnessError> {
        (0..n).map(|_| self.vec3()).collect()
    }

    fn pose(&mut self) -> Result<Pose, HarnessError> {
        let mut m = Mat3::zeros();
        for r in 0..3 {
            for c in 0..3 {
                m[(r, c)] = self.f64()?;
            }
        }
        let rotation = Rotation::from_matrix(m).map_err(|e| {
            HarnessError::LogFormat(format!("row {}: logged pose invalid: {e}", self.line))
        })?;
        Ok(Pose::new(rotation, self.vec3()?))
    }

    fn twist(&mut self) -> Result<Twist, HarnessError> {
        Ok(Twist::new(self.vec3()?, self.vec3()?))
    }
}

/// Reads a CSV log back into memory. Inverse of [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<RunLog, HarnessError> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    // 39 fixed columns plus 15 per landmark.
    let n = (header.len().saturating_sub(39)) / 15;
    if header.len() != 39 + 15 * n || n == 0 {
        return Err(HarnessError::LogFormat(format!(
            "unexpected column count {}",
            header.len()
        )));
    }
    let expected: Vec<String> = RunLog::header(n);
    if header.iter().ne(expected.iter().map(|s| s.as_str())) {
        return Err(HarnessError::LogFormat("header does not match schema".into()));
    }

    let mut backend = None;
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let mut f = FieldReader { fields: &record, pos: 0, line: idx as u64 + 2 };
        let t = f.f64()?;
        let truth_pose = f.pose()?;
        let est_pose = f.pose()?;
        let truth_landmarks = f.vecs(n)?;
        let est_landmarks = f.vecs(n)?;
        let e = f.vecs(n)?;
        let transformed = f.vecs(n)?;
        let bound = f.vecs(n)?;
        let bias_est = f.twist()?;
        let bias_err = f.twist()?;
        let lyapunov = f.f64()?;
        let tag: Backend = record
            .get(f.pos)
            .ok_or_else(|| HarnessError::LogFormat("missing backend column".into()))?
            .parse()
            .map_err(HarnessError::LogFormat)?;
        match backend {
            None => backend = Some(tag),
            Some(b) if b == tag => {}
            Some(_) => return Err(HarnessError::LogFormat("mixed backend tags".into())),
        }
        rows.push(LogRow {
            t,
            truth_pose,
            est_pose,
            truth_landmarks,
            est_landmarks,
            e,
            transformed,
            bound,
            bias_est,
            bias_err,
            lyapunov,
        });
    }
    Ok(RunLog {
        backend: backend.unwrap_or(Backend::Matrix),
        n_landmarks: n,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_shape_for_four_landmarks() {
        let h = RunLog::header(4);
        assert_eq!(h.len(), 39 + 15 * 4);
        assert_eq!(h[0], "t");
        assert_eq!(h[1], "truth_r11");
        assert_eq!(h[13], "est_r11");
        assert_eq!(*h.last().unwrap(), "backend");
    }

    #[test]
    fn float_format_round_trips_exactly() {
        for v in [
            0.0,
            -0.0,
            1.0,
            std::f64::consts::PI,
            -2.2250738585072014e-308,
            1.7976931348623157e308,
            0.1 + 0.2,
        ] {
            let parsed: f64 = fmt_f64(v).parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits());
        }
    }
}
