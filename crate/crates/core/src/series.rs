//! Time-series output: one row per stored sample, CSV or JSON.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{AnyTrajectory, SampleDiagnostics, Trajectory};
use crate::model::{CsState, KuramotoState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesFormat {
    Csv,
    Json,
}

impl std::str::FromStr for SeriesFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(SeriesFormat::Csv),
            "json" => Ok(SeriesFormat::Json),
            _ => Err(Error::ParseError {
                line: 0,
                message: format!("unknown format `{s}`"),
            }),
        }
    }
}

/// Column names plus numeric rows, the common shape of every table we write.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

const DIAG_COLUMNS: [&str; 7] = [
    "E_kinetic",
    "E_potential",
    "E_total",
    "production",
    "min_gap",
    "pos_diam",
    "vel_diam",
];

fn diag_values(d: &SampleDiagnostics) -> [f64; 7] {
    let e = &d.energy;
    [
        e.kinetic,
        e.potential,
        e.total,
        e.production,
        d.min_gap,
        d.pos_diam,
        d.vel_diam,
    ]
}

fn build<S>(
    traj: &Trajectory<S>,
    state_columns: Vec<String>,
    state_values: impl Fn(&S, &mut Vec<f64>),
) -> Table {
    let mut columns = vec!["t".to_string()];
    columns.extend(state_columns);
    columns.extend(DIAG_COLUMNS.iter().map(|c| c.to_string()));
    let rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .zip(&traj.diagnostics)
        .map(|((&t, s), d)| {
            let mut row = Vec::with_capacity(columns.len());
            row.push(t);
            state_values(s, &mut row);
            row.extend(diag_values(d));
            row
        })
        .collect();
    Table { columns, rows }
}

fn kuramoto_table(traj: &Trajectory<KuramotoState>) -> Table {
    let n = traj.states.first().map_or(0, KuramotoState::n);
    let cols = (1..=n)
        .map(|i| format!("theta_{i}"))
        .chain((1..=n).map(|i| format!("omega_{i}")))
        .collect();
    build(traj, cols, |s, row| {
        row.extend(&s.theta);
        row.extend(&s.omega);
    })
}

fn cs_table(traj: &Trajectory<CsState>) -> Table {
    let (n, dim) = traj.states.first().map_or((0, 0), |s| (s.n(), s.dim));
    let names = |p: &str| -> Vec<String> {
        (1..=n)
            .flat_map(|i| (1..=dim).map(move |k| format!("{p}_{i}_{k}")))
            .collect()
    };
    let mut cols = names("x");
    cols.extend(names("v"));
    build(traj, cols, |s, row| {
        row.extend(&s.x);
        row.extend(&s.v);
    })
}

pub fn trajectory_table(traj: &AnyTrajectory) -> Table {
    match traj {
        AnyTrajectory::Kuramoto(t) => kuramoto_table(t),
        AnyTrajectory::Cs(t) => cs_table(t),
    }
}

fn sink_err(e: impl std::fmt::Display) -> Error {
    Error::SinkError(e.to_string())
}

/// Writes a table with every number in 17-significant-digit scientific form.
pub fn write_table(table: &Table, format: SeriesFormat, sink: &mut dyn Write) -> Result<()> {
    match format {
        SeriesFormat::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(&table.columns).map_err(sink_err)?;
            for row in &table.rows {
                w.write_record(row.iter().map(|v| format!("{v:.16e}")))
                    .map_err(sink_err)?;
            }
            w.flush().map_err(sink_err)
        }
        SeriesFormat::Json => {
            serde_json::to_writer(&mut *sink, table).map_err(sink_err)?;
            sink.write_all(b"\n").map_err(sink_err)
        }
    }
}

pub fn write_series(
    traj: &AnyTrajectory,
    format: SeriesFormat,
    sink: &mut dyn Write,
) -> Result<()> {
    if traj.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    write_table(&trajectory_table(traj), format, sink)
}

/// Reads back a CSV table written by [`write_table`].
pub fn read_csv_table(source: impl Read) -> Result<Table> {
    let mut r = csv::Reader::from_reader(source);
    let columns = r
        .headers()
        .map_err(|e| Error::ParseError {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::ParseError {
            line,
            message: e.to_string(),
        })?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::ParseError {
                    line,
                    message: format!("`{f}` is not a number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergyReport;

    fn one_sample() -> AnyTrajectory {
        let s = KuramotoState::new(0.0, vec![0.1, 0.2], vec![0.0, 0.0]).unwrap();
        let d = SampleDiagnostics {
            energy: EnergyReport::default(),
            min_gap: 0.1,
            min_pair: (0, 1),
            pos_diam: 0.1,
            vel_diam: 0.0,
        };
        AnyTrajectory::Kuramoto(Trajectory {
            times: vec![0.0],
            states: vec![s],
            diagnostics: vec![d],
        })
    }

    #[test]
    fn single_sample_csv() {
        let mut out = Vec::new();
        write_series(&one_sample(), SeriesFormat::Csv, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            "t,theta_1,theta_2,omega_1,omega_2,E_kinetic,E_potential,E_total,production,min_gap,pos_diam,vel_diam"
        );
        assert!(lines[1].starts_with("0.0000000000000000e0,1.0000000000000001e-1,"));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut out = Vec::new();
        write_series(&one_sample(), SeriesFormat::Csv, &mut out).unwrap();
        let table = read_csv_table(out.as_slice()).unwrap();
        assert_eq!(table, trajectory_table(&one_sample()));
    }

    #[test]
    fn json_has_same_table() {
        let mut out = Vec::new();
        write_series(&one_sample(), SeriesFormat::Json, &mut out).unwrap();
        let table: Table = serde_json::from_slice(&out).unwrap();
        assert_eq!(table, trajectory_table(&one_sample()));
    }

    #[test]
    fn empty_trajectory_rejected() {
        let t = AnyTrajectory::Cs(Trajectory {
            times: vec![],
            states: vec![],
            diagnostics: vec![],
        });
        assert!(write_series(&t, SeriesFormat::Csv, &mut Vec::new()).is_err());
    }

    struct Broken;
    impl Write for Broken {
        fn write(&mut self, _: &[u8]) -> std::io::Result<usize> {
            Err(std::io::Error::other("closed"))
        }
        fn flush(&mut self) -> std::io::Result<()> {
            Ok(())
        }
    }

    #[test]
    fn sink_failure_reported() {
        let r = write_series(&one_sample(), SeriesFormat::Csv, &mut Broken);
        assert!(matches!(r, Err(Error::SinkError(_))));
    }
}
