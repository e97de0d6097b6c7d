//! Closed-loop records, CSV export/import and tracking metrics.

use std::io::{self, BufRead, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qpcore::QpStatus;
use crate::scalar::{real, Scalar};

use super::Bounds;

/// One closed-loop step.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord<T: Scalar> {
    pub k: usize,
    /// Time in seconds, starting at 0.
    pub t: T,
    pub r: DVector<T>,
    pub y: DVector<T>,
    pub u: DVector<T>,
    pub p: DVector<T>,
    pub status: QpStatus,
    pub solve_time_ms: f64,
    pub objective: T,
}

/// Append-only record of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog<T: Scalar> {
    sample_time: T,
    records: Vec<LogRecord<T>>,
}

fn status_str(status: QpStatus) -> &'static str {
    match status {
        QpStatus::Optimal => "optimal",
        QpStatus::Infeasible => "infeasible",
        QpStatus::MaxIterations => "max-iterations",
    }
}

fn status_from(text: &str) -> Option<QpStatus> {
    match text {
        "optimal" => Some(QpStatus::Optimal),
        "infeasible" => Some(QpStatus::Infeasible),
        "max-iterations" => Some(QpStatus::MaxIterations),
        _ => None,
    }
}

impl<T: Scalar> TrajectoryLog<T> {
    pub fn new(sample_time: T) -> Self {
        Self {
            sample_time,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: LogRecord<T>) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[LogRecord<T>] {
        &self.records
    }

    pub fn sample_time(&self) -> T {
        self.sample_time
    }

    fn channel_names(prefix: &str, dim: usize) -> Vec<String> {
        if dim == 1 {
            vec![prefix.to_string()]
        } else {
            (1..=dim).map(|i| format!("{prefix}_{i}")).collect()
        }
    }

    /// Writes `k,t,r,y,u,p...,status,solve_ms,objective`, channel columns
    /// suffixed `_i` when a signal has more than one channel.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let first = self.records.first();
        let (n_y, n_u, n_p) = first
            .map(|r| (r.y.len(), r.u.len(), r.p.len()))
            .unwrap_or((1, 1, 1));
        let mut header = vec!["k".to_string(), "t".to_string()];
        header.extend(Self::channel_names("r", n_y));
        header.extend(Self::channel_names("y", n_y));
        header.extend(Self::channel_names("u", n_u));
        header.extend((1..=n_p).map(|i| format!("p_{i}")));
        header.push("status".into());
        header.push("solve_ms".into());
        header.push("objective".into());
        writeln!(out, "{}", header.join(","))?;
        for rec in &self.records {
            write!(out, "{},{}", rec.k, rec.t)?;
            for v in rec.r.iter().chain(rec.y.iter()).chain(rec.u.iter()).chain(rec.p.iter()) {
                write!(out, ",{v}")?;
            }
            writeln!(
                out,
                ",{},{},{}",
                status_str(rec.status),
                rec.solve_time_ms,
                rec.objective
            )?;
        }
        Ok(())
    }

    /// Reads a log back; the inverse of [`TrajectoryLog::write_csv`].
    pub fn read_csv<R: BufRead>(reader: R, sample_time: T) -> Result<Self> {
        let parse_err = |line: usize, column: usize, message: String| Error::Parse {
            line,
            column,
            message,
        };
        let mut lines = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| parse_err(i + 1, 1, e.to_string()))?;
            if !line.trim().is_empty() {
                lines.push((i + 1, line));
            }
        }
        if lines.is_empty() {
            return Err(parse_err(1, 1, "empty CSV".into()));
        }
        let header: Vec<&str> = lines[0].1.split(',').collect();
        let expect = |name: &str, idx: usize| -> Result<()> {
            if header.get(idx).copied() != Some(name) {
                return Err(parse_err(
                    lines[0].0,
                    idx + 1,
                    format!("expected column '{name}'"),
                ));
            }
            Ok(())
        };
        expect("k", 0)?;
        expect("t", 1)?;
        let count = |prefix: &str, from: usize| -> usize {
            let mut n = 0;
            while from + n < header.len()
                && (header[from + n] == prefix
                    || header[from + n].starts_with(&format!("{prefix}_")))
            {
                n += 1;
            }
            n
        };
        let n_y = count("r", 2);
        let n_u = count("u", 2 + 2 * n_y);
        let n_p = count("p", 2 + 2 * n_y + n_u);
        let trailer = 2 + 2 * n_y + n_u + n_p;
        if n_y == 0 || n_u == 0 || header.len() != trailer + 3 {
            return Err(parse_err(lines[0].0, 1, "unrecognized header layout".into()));
        }

        let mut log = TrajectoryLog::new(sample_time);
        for (line_no, line) in &lines[1..] {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(parse_err(
                    *line_no,
                    fields.len().min(header.len()) + 1,
                    format!("expected {} fields, found {}", header.len(), fields.len()),
                ));
            }
            let num = |idx: usize| -> Result<f64> {
                fields[idx].trim().parse().map_err(|_| {
                    parse_err(*line_no, idx + 1, format!("invalid number '{}'", fields[idx]))
                })
            };
            let k: usize = fields[0]
                .trim()
                .parse()
                .map_err(|_| parse_err(*line_no, 1, format!("invalid step '{}'", fields[0])))?;
            let t = real::<T>(num(1)?);
            let take = |start: usize, dim: usize| -> Result<DVector<T>> {
                let mut v = DVector::<T>::zeros(dim);
                for i in 0..dim {
                    v[i] = real::<T>(num(start + i)?);
                }
                Ok(v)
            };
            let r = take(2, n_y)?;
            let y = take(2 + n_y, n_y)?;
            let u = take(2 + 2 * n_y, n_u)?;
            let p = take(2 + 2 * n_y + n_u, n_p)?;
            let status = status_from(fields[trailer].trim()).ok_or_else(|| {
                parse_err(
                    *line_no,
                    trailer + 1,
                    format!("unknown status '{}'", fields[trailer]),
                )
            })?;
            let solve_time_ms = num(trailer + 1)?;
            let objective = real::<T>(num(trailer + 2)?);
            log.push(LogRecord {
                k,
                t,
                r,
                y,
                u,
                p,
                status,
                solve_time_ms,
                objective,
            });
        }
        Ok(log)
    }
}

/// Summary metrics of a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingMetrics<T: Scalar> {
    /// Root-mean-square tracking error over the run.
    pub rmse: T,
    /// Worst input-box violation (0 when all inputs stayed inside).
    pub max_violation_u: T,
    /// Worst output-box violation of the applied outputs.
    pub max_violation_y: T,
    /// Accumulated stage cost `Σ (y−r)ᵀQ(y−r) + uᵀRu`.
    pub total_cost: T,
}

/// Computes tracking metrics with the configured weights and boxes.
pub fn tracking_metrics<T: Scalar>(
    log: &TrajectoryLog<T>,
    q: &DMatrix<T>,
    r: &DMatrix<T>,
    u_box: &Bounds<T>,
    y_box: &Bounds<T>,
) -> TrackingMetrics<T> {
    let mut sq_sum = T::zero();
    let mut cost = T::zero();
    let mut viol_u = T::zero();
    let mut viol_y = T::zero();
    for rec in log.records() {
        let err = &rec.y - &rec.r;
        sq_sum += err.norm_squared();
        cost += err.dot(&(q * &err)) + rec.u.dot(&(r * &rec.u));
        let vu = u_box.violation(rec.u.as_view());
        if vu > viol_u {
            viol_u = vu;
        }
        let vy = y_box.violation(rec.y.as_view());
        if vy > viol_y {
            viol_y = vy;
        }
    }
    let n = log.len().max(1);
    TrackingMetrics {
        rmse: num_traits::Float::sqrt(sq_sum / real::<T>(n as f64)),
        max_violation_u: viol_u,
        max_violation_y: viol_y,
        total_cost: cost,
    }
}
