//! Request logs to normalized per-client pattern vectors.
//!
//! A log line is `client_id,date,objects,ready_time,deadline`, with the
//! requested objects separated by `;`:
//!
//! ```text
//! 7,2010-01-15,3;12;3,100,250
//! ```
//!
//! Records are grouped into per-client sessions (half-open windows of
//! `ready_time`), counted per object, and min-max normalized per client
//! row into [0, 1].

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },
    #[error("{what} id {id} out of range (limit {limit})")]
    OutOfRange { what: &'static str, id: u64, limit: usize },
    #[error("session window must be positive, got {0}")]
    BadWindow(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestLogRecord {
    pub client_id: u32,
    pub date: NaiveDate,
    pub requested_objects: Vec<u32>,
    pub ready_time: f64,
    pub deadline: f64,
}

impl fmt::Display for RequestLogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},", self.client_id, self.date.format("%Y-%m-%d"))?;
        for (i, o) in self.requested_objects.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{o}")?;
        }
        write!(f, ",{},{}", self.ready_time, self.deadline)
    }
}

fn parse_time(field: &str, name: &str, line: usize) -> Result<f64, FeatureError> {
    let t: f64 = field
        .trim()
        .parse()
        .map_err(|_| FeatureError::Parse { line, message: format!("{name} {field:?} is not a number") })?;
    if !t.is_finite() || t < 0.0 {
        return Err(FeatureError::Validation {
            line,
            message: format!("{name} must be a finite non-negative time, got {t}"),
        });
    }
    Ok(t)
}

impl RequestLogRecord {
    /// Parses and validates one log line. `line` is only used in errors.
    pub fn parse(text: &str, line: usize, catalog: usize) -> Result<Self, FeatureError> {
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 5 {
            return Err(FeatureError::Parse {
                line,
                message: format!("expected 5 comma-separated fields, found {}", fields.len()),
            });
        }
        let client_id = fields[0].trim().parse().map_err(|_| FeatureError::Parse {
            line,
            message: format!("client id {:?} is not an unsigned integer", fields[0]),
        })?;
        let date = NaiveDate::parse_from_str(fields[1].trim(), "%Y-%m-%d")
            .map_err(|e| FeatureError::Parse { line, message: format!("date {:?}: {e}", fields[1]) })?;
        if fields[2].trim().is_empty() {
            return Err(FeatureError::Parse { line, message: "empty object list".into() });
        }
        let requested_objects = fields[2]
            .split(';')
            .map(|o| {
                o.trim().parse::<u32>().map_err(|_| FeatureError::Parse {
                    line,
                    message: format!("object id {o:?} is not an unsigned integer"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(&bad) = requested_objects.iter().find(|&&o| o as usize >= catalog) {
            return Err(FeatureError::Validation {
                line,
                message: format!("object id {bad} outside catalog of {catalog}"),
            });
        }
        let ready_time = parse_time(fields[3], "ready time", line)?;
        let deadline = parse_time(fields[4], "deadline", line)?;
        if deadline < ready_time {
            return Err(FeatureError::Validation {
                line,
                message: format!("deadline {deadline} precedes ready time {ready_time}"),
            });
        }
        Ok(Self { client_id, date, requested_objects, ready_time, deadline })
    }
}

/// Reads a whole log. Blank lines are skipped; line numbers are 1-based.
pub fn parse_log<R: BufRead>(source: R, catalog: usize) -> Result<Vec<RequestLogRecord>, FeatureError> {
    let mut records = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(RequestLogRecord::parse(&line, i + 1, catalog)?);
    }
    Ok(records)
}

pub fn write_log<W: Write>(mut out: W, records: &[RequestLogRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{r}")?;
    }
    Ok(())
}

/// Per-client, per-object request counts over one session window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceCounts {
    pub session_id: u64,
    clients: usize,
    catalog: usize,
    counts: Vec<u32>,
}

impl ReferenceCounts {
    pub fn zeros(session_id: u64, clients: usize, catalog: usize) -> Self {
        Self { session_id, clients, catalog, counts: vec![0; clients * catalog] }
    }

    pub fn clients(&self) -> usize {
        self.clients
    }

    pub fn catalog(&self) -> usize {
        self.catalog
    }

    pub fn row(&self, client: usize) -> &[u32] {
        &self.counts[client * self.catalog..(client + 1) * self.catalog]
    }

    pub fn get(&self, client: usize, object: usize) -> u32 {
        self.counts[client * self.catalog + object]
    }

    pub fn increment(&mut self, client: usize, object: usize) -> Result<(), FeatureError> {
        if client >= self.clients {
            return Err(FeatureError::OutOfRange { what: "client", id: client as u64, limit: self.clients });
        }
        if object >= self.catalog {
            return Err(FeatureError::OutOfRange { what: "object", id: object as u64, limit: self.catalog });
        }
        self.counts[client * self.catalog + object] += 1;
        Ok(())
    }

    pub fn clear(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
    }
}

/// Half-open interval `[start, end)` of ready times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionWindow {
    pub start: f64,
    pub end: f64,
}

impl SessionWindow {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }
}

/// Counts object appearances per client for the records inside `window`.
pub fn reference_counts(
    records: &[RequestLogRecord],
    clients: usize,
    catalog: usize,
    window: SessionWindow,
    session_id: u64,
) -> Result<ReferenceCounts, FeatureError> {
    if !(window.end > window.start) {
        return Err(FeatureError::BadWindow(window.end - window.start));
    }
    let mut counts = ReferenceCounts::zeros(session_id, clients, catalog);
    for r in records.iter().filter(|r| window.contains(r.ready_time)) {
        for &o in &r.requested_objects {
            counts.increment(r.client_id as usize, o as usize)?;
        }
    }
    Ok(counts)
}

/// Min-max normalization `(d - d_min) / (d_max - d_min)`; a constant row
/// maps to all zeros.
pub fn min_max_normalize(row: &[f64]) -> Vec<f64> {
    let (min, max) = row.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = max - min;
    if row.is_empty() || !(span > 0.0) {
        return vec![0.0; row.len()];
    }
    row.iter().map(|&v| ((v - min) / span).clamp(0.0, 1.0)).collect()
}

/// Normalized popularity vector of one client in one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternVector {
    pub client_id: u32,
    pub session_id: u64,
    pub values: Vec<f64>,
}

impl PatternVector {
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// One pattern per client row with at least one request.
pub fn normalize_popularity(counts: &ReferenceCounts) -> Vec<PatternVector> {
    (0..counts.clients())
        .filter_map(|c| {
            let row = counts.row(c);
            if row.iter().all(|&n| n == 0) {
                return None;
            }
            let row: Vec<f64> = row.iter().map(|&n| n as f64).collect();
            Some(PatternVector { client_id: c as u32, session_id: counts.session_id, values: min_max_normalize(&row) })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionGroup {
    pub client_id: u32,
    pub session_id: u64,
    pub records: Vec<RequestLogRecord>,
}

/// Partitions records per client into windows `[k w, (k + 1) w)` of
/// ready time. Groups come out ordered by client, then session.
pub fn build_sessions(records: &[RequestLogRecord], window: f64) -> Result<Vec<SessionGroup>, FeatureError> {
    if !(window > 0.0) || !window.is_finite() {
        return Err(FeatureError::BadWindow(window));
    }
    let mut groups: BTreeMap<(u32, u64), Vec<RequestLogRecord>> = BTreeMap::new();
    for r in records {
        let session = (r.ready_time / window).floor() as u64;
        groups.entry((r.client_id, session)).or_default().push(r.clone());
    }
    Ok(groups
        .into_iter()
        .map(|((client_id, session_id), records)| SessionGroup { client_id, session_id, records })
        .collect())
}

/// Sessionizes `records` and returns one normalized pattern per
/// (client, session) group.
pub fn session_patterns(
    records: &[RequestLogRecord],
    catalog: usize,
    window: f64,
) -> Result<Vec<PatternVector>, FeatureError> {
    build_sessions(records, window)?
        .into_iter()
        .map(|g| {
            let mut row = vec![0.0; catalog];
            for r in &g.records {
                for &o in &r.requested_objects {
                    let slot = row.get_mut(o as usize).ok_or(FeatureError::OutOfRange {
                        what: "object",
                        id: o as u64,
                        limit: catalog,
                    })?;
                    *slot += 1.0;
                }
            }
            Ok(PatternVector { client_id: g.client_id, session_id: g.session_id, values: min_max_normalize(&row) })
        })
        .collect()
}
