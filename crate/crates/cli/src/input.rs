use std::fs;

use propscore::forecast::{parse_forecast, parse_observation};
use propscore::{Forecast, Observation};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] propscore::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path} line {line}: {source}")]
    Record {
        path: String,
        line: usize,
        source: propscore::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) | CliError::Record { source: e, .. } if e.is_numeric() => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn read(path: &str) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_string(),
        source,
    })
}

/// Non-empty lines with their 1-based numbers. Blank lines are only allowed at the end.
fn records(path: &str) -> CliResult<Vec<(usize, String)>> {
    let text = read(path)?;
    let lines: Vec<&str> = text.lines().collect();
    let last = lines
        .iter()
        .rposition(|l| !l.trim().is_empty())
        .map_or(0, |i| i + 1);
    lines[..last]
        .iter()
        .enumerate()
        .map(|(i, l)| {
            if l.trim().is_empty() {
                Err(CliError::Record {
                    path: path.to_string(),
                    line: i + 1,
                    source: propscore::Error::Schema("blank line".into()),
                })
            } else {
                Ok((i + 1, l.to_string()))
            }
        })
        .collect()
}

fn parse_lines<T>(path: &str, parse: impl Fn(&str) -> propscore::Result<T>) -> CliResult<Vec<T>> {
    records(path)?
        .into_iter()
        .map(|(line, rec)| {
            parse(&rec).map_err(|source| CliError::Record {
                path: path.to_string(),
                line,
                source,
            })
        })
        .collect()
}

pub fn read_forecasts(path: &str) -> CliResult<Vec<Forecast>> {
    parse_lines(path, parse_forecast)
}

pub fn read_observations(path: &str) -> CliResult<Vec<Observation>> {
    parse_lines(path, parse_observation)
}

/// Numeric CSV rows; a first row without any number is taken as a header.
pub fn read_csv(path: &str, columns: usize) -> CliResult<Vec<Vec<f64>>> {
    let text = read(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
        if i == 0 && rec.iter().all(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let bad = |msg: String| CliError::Record {
            path: path.to_string(),
            line: i + 1,
            source: propscore::Error::Schema(msg),
        };
        if rec.len() != columns {
            return Err(bad(format!(
                "expected {columns} column(s), found {}",
                rec.len()
            )));
        }
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| bad(format!("not a number: {f:?}")))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
