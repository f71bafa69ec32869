//! Synthetic request traces with planted client clusters.
//!
//! Clients are split evenly across `n_planted_clusters` groups. Every group
//! owns a disjoint slice of the object catalog with its own Zipf
//! popularity order, and a client draws each requested object from its
//! group's slice with probability `intra_cluster_overlap` (otherwise
//! uniformly from the whole catalog). The generator is a pure function of
//! the spec, the duration and the seed.

use std::io::{Read, Write};

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Zipf};
use serde::{Deserialize, Serialize};

use crate::features::RequestLogRecord;
use crate::simulator::{Request, RequestKind};

/// The seven simulation lengths of the reference experiments.
pub const REFERENCE_DURATIONS: [f64; 7] = [2000.0, 4000.0, 8000.0, 12000.0, 16000.0, 20000.0, 30000.0];

#[derive(Debug, thiserror::Error)]
pub enum WorkloadError {
    #[error("invalid workload spec: {0}")]
    InvalidSpec(String),
    #[error("workload document row {row}: {message}")]
    Document { row: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkloadSpec {
    pub n_clients: usize,
    pub n_objects: usize,
    /// Inclusive range of services per application.
    pub services_per_app_range: (u32, u32),
    /// Services one VM instance hosts; `n = ceil(services / this)`.
    pub services_per_vm: u32,
    /// Inclusive range of objects per request.
    pub objects_per_request: (u32, u32),
    /// Range of service times, in time units.
    pub service_time_range: (f64, f64),
    pub durations: Vec<f64>,
    pub replications: usize,
    pub n_planted_clusters: usize,
    pub intra_cluster_overlap: f64,
    /// Zipf exponent of popularity inside a cluster's object slice.
    pub zipf_exponent: f64,
    /// Mean arrivals per time unit, over all clients.
    pub arrival_rate: f64,
    /// Deadline is `ready_time + service_time * (1 + deadline_base_slack)`.
    pub deadline_base_slack: f64,
    pub best_effort_fraction: f64,
    pub seed: u64,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        Self {
            n_clients: 50,
            n_objects: 200,
            services_per_app_range: (10, 80),
            services_per_vm: 20,
            objects_per_request: (1, 4),
            service_time_range: (5.0, 50.0),
            durations: REFERENCE_DURATIONS.to_vec(),
            replications: 5,
            n_planted_clusters: 5,
            intra_cluster_overlap: 0.9,
            zipf_exponent: 1.0,
            arrival_rate: 0.5,
            deadline_base_slack: 4.0,
            best_effort_fraction: 0.1,
            seed: 42,
        }
    }
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let bad = |why: String| Err(WorkloadError::InvalidSpec(why));
        if self.n_clients == 0 || self.n_objects == 0 {
            return bad("n_clients and n_objects must be at least 1".into());
        }
        if self.n_planted_clusters == 0 || self.n_planted_clusters > self.n_objects {
            return bad(format!(
                "n_planted_clusters must be in 1..={} (got {})",
                self.n_objects, self.n_planted_clusters
            ));
        }
        let (lo, hi) = self.services_per_app_range;
        if lo == 0 || lo > hi {
            return bad(format!("services_per_app_range ({lo}, {hi}) must be ordered and positive"));
        }
        if self.services_per_vm == 0 {
            return bad("services_per_vm must be at least 1".into());
        }
        let (lo, hi) = self.objects_per_request;
        if lo == 0 || lo > hi {
            return bad(format!("objects_per_request ({lo}, {hi}) must be ordered and positive"));
        }
        let (lo, hi) = self.service_time_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad(format!("service_time_range ({lo}, {hi}) must be ordered and positive"));
        }
        for (name, v) in
            [("intra_cluster_overlap", self.intra_cluster_overlap), ("best_effort_fraction", self.best_effort_fraction)]
        {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} must be in [0, 1]"));
            }
        }
        if !(self.arrival_rate > 0.0 && self.arrival_rate.is_finite()) {
            return bad("arrival_rate must be positive".into());
        }
        if !(self.deadline_base_slack >= 0.0) {
            return bad("deadline_base_slack must be non-negative".into());
        }
        if !(self.zipf_exponent > 0.0) {
            return bad("zipf_exponent must be positive".into());
        }
        if self.durations.iter().any(|d| !(*d > 0.0)) {
            return bad("durations must be positive".into());
        }
        Ok(())
    }
}

/// A generated trace plus the planted cluster of every client.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub requests: Vec<Request>,
    pub labels: Vec<usize>,
    /// Services-per-application draw behind each request.
    pub services: Vec<u32>,
}

impl Workload {
    /// Object slice owned by each planted cluster, most popular first.
    pub fn cluster_objects(spec: &WorkloadSpec) -> Vec<Vec<u32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        planted_structure(spec, &mut rng).1
    }
}

fn planted_structure(spec: &WorkloadSpec, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<Vec<u32>>) {
    let k = spec.n_planted_clusters;
    let mut labels: Vec<usize> = (0..spec.n_clients).map(|c| c % k).collect();
    labels.shuffle(rng);
    let mut objects: Vec<u32> = (0..spec.n_objects as u32).collect();
    objects.shuffle(rng);
    let base = spec.n_objects / k;
    let extra = spec.n_objects % k;
    let mut slices = Vec::with_capacity(k);
    let mut start = 0;
    for j in 0..k {
        let len = base + usize::from(j < extra);
        slices.push(objects[start..start + len].to_vec());
        start += len;
    }
    (labels, slices)
}

pub fn generate(spec: &WorkloadSpec, duration: f64) -> Result<Workload, WorkloadError> {
    spec.validate()?;
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(WorkloadError::InvalidSpec(format!("duration {duration} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (labels, slices) = planted_structure(spec, &mut rng);
    let zipfs: Vec<Zipf<f64>> =
        slices.iter().map(|s| Zipf::new(s.len() as u64, spec.zipf_exponent).expect("validated exponent")).collect();
    let gap = Exp::new(spec.arrival_rate).expect("validated rate");

    let mut requests = Vec::new();
    let mut services = Vec::new();
    let mut t = gap.sample(&mut rng);
    while t < duration {
        let client = rng.gen_range(0..spec.n_clients);
        let cluster = labels[client];
        let count = rng.gen_range(spec.objects_per_request.0..=spec.objects_per_request.1);
        let objects: Vec<u32> = (0..count)
            .map(|_| {
                if rng.gen_bool(spec.intra_cluster_overlap) {
                    let rank = zipfs[cluster].sample(&mut rng) as usize;
                    slices[cluster][rank - 1]
                } else {
                    rng.gen_range(0..spec.n_objects as u32)
                }
            })
            .collect();
        let svc = rng.gen_range(spec.services_per_app_range.0..=spec.services_per_app_range.1);
        let n = svc.div_ceil(spec.services_per_vm);
        let (lo, hi) = spec.service_time_range;
        let service_time = if lo == hi { lo } else { rng.gen_range(lo..hi) };
        let kind = if rng.gen_bool(spec.best_effort_fraction) {
            RequestKind::BestEffort
        } else {
            RequestKind::DeadlineConstrained
        };
        requests.push(Request {
            id: requests.len() as u64,
            client_id: client as u32,
            n,
            ready_time: t,
            deadline: t + service_time * (1.0 + spec.deadline_base_slack),
            objects,
            service_time,
            kind,
        });
        services.push(svc);
        t += gap.sample(&mut rng);
    }
    Ok(Workload { requests, labels, services })
}

/// One cell of the experiment matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub replication: usize,
    pub duration: f64,
    pub seed: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Replications x durations, each cell with its own seed.
///
/// Seeds are `splitmix64(base ^ (replication << 32 | duration_index))`,
/// which is injective in the cell index.
pub fn experiment_matrix(spec: &WorkloadSpec) -> Vec<Cell> {
    let mut cells = Vec::with_capacity(spec.replications * spec.durations.len());
    for replication in 0..spec.replications {
        for (i, &duration) in spec.durations.iter().enumerate() {
            let key = ((replication as u64) << 32) | i as u64;
            cells.push(Cell { replication, duration, seed: splitmix64(spec.seed ^ key) });
        }
    }
    cells
}

const DATE_EPOCH: (i32, u32, u32) = (2010, 1, 1);
/// Time units per calendar day in exported logs.
pub const TIME_UNITS_PER_DAY: f64 = 1440.0;

/// Request-log view of a trace, dating each request from 2010-01-01.
pub fn to_log_records(requests: &[Request]) -> Vec<RequestLogRecord> {
    let epoch = NaiveDate::from_ymd_opt(DATE_EPOCH.0, DATE_EPOCH.1, DATE_EPOCH.2).expect("valid date");
    requests
        .iter()
        .map(|r| RequestLogRecord {
            client_id: r.client_id,
            date: epoch + Days::new((r.ready_time / TIME_UNITS_PER_DAY) as u64),
            requested_objects: r.objects.clone(),
            ready_time: r.ready_time,
            deadline: r.deadline.max(r.ready_time),
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct WorkloadRow {
    id: u64,
    client: u32,
    n: u32,
    rt: f64,
    d: f64,
    objects: String,
    service_time: f64,
    kind: RequestKind,
}

/// Writes one request per CSV row:
/// `id,client,n,rt,d,objects,service_time,kind`, objects `;`-separated.
pub fn write_requests<W: Write>(out: W, requests: &[Request]) -> Result<(), WorkloadError> {
    let mut w = csv::Writer::from_writer(out);
    for r in requests {
        let objects = r.objects.iter().map(u32::to_string).collect::<Vec<_>>().join(";");
        w.serialize(WorkloadRow {
            id: r.id,
            client: r.client_id,
            n: r.n,
            rt: r.ready_time,
            d: r.deadline,
            objects,
            service_time: r.service_time,
            kind: r.kind,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_requests<R: Read>(input: R) -> Result<Vec<Request>, WorkloadError> {
    let mut rd = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, row) in rd.deserialize::<WorkloadRow>().enumerate() {
        let row = row?;
        let objects = row
            .objects
            .split(';')
            .map(|o| {
                o.trim()
                    .parse::<u32>()
                    .map_err(|_| WorkloadError::Document { row: i + 1, message: format!("bad object id {o:?}") })
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(Request {
            id: row.id,
            client_id: row.client,
            n: row.n,
            ready_time: row.rt,
            deadline: row.d,
            objects,
            service_time: row.service_time,
            kind: row.kind,
        });
    }
    Ok(out)
}

/// Writes the `client,label` sidecar.
pub fn write_labels<W: Write>(out: W, labels: &[usize]) -> Result<(), WorkloadError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["client", "label"])?;
    for (c, l) in labels.iter().enumerate() {
        w.write_record([c.to_string(), l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels<R: Read>(input: R) -> Result<Vec<usize>, WorkloadError> {
    let mut rd = csv::Reader::from_reader(input);
    let mut labels = Vec::new();
    for (i, row) in rd.deserialize::<(usize, usize)>().enumerate() {
        let (client, label) = row?;
        if client != i {
            return Err(WorkloadError::Document {
                row: i + 1,
                message: format!("expected client {i}, found {client}"),
            });
        }
        labels.push(label);
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn small() -> WorkloadSpec {
        WorkloadSpec { arrival_rate: 0.2, ..Default::default() }
    }

    #[test]
    fn same_seed_same_trace() {
        let a = generate(&small(), 2000.0).unwrap();
        let b = generate(&small(), 2000.0).unwrap();
        assert_eq!(a, b);
        let c = generate(&WorkloadSpec { seed: 7, ..small() }, 2000.0).unwrap();
        assert_ne!(a.requests, c.requests);
    }

    #[test]
    fn services_stay_in_range_and_set_vm_count() {
        let w = generate(&small(), 4000.0).unwrap();
        assert!(!w.requests.is_empty());
        for (r, &s) in w.requests.iter().zip(&w.services) {
            assert!((10..=80).contains(&s));
            assert_eq!(r.n, s.div_ceil(20));
        }
    }

    #[test]
    fn full_overlap_keeps_objects_in_cluster() {
        let spec = WorkloadSpec { intra_cluster_overlap: 1.0, ..small() };
        let w = generate(&spec, 3000.0).unwrap();
        let slices: Vec<BTreeSet<u32>> =
            Workload::cluster_objects(&spec).into_iter().map(|s| s.into_iter().collect()).collect();
        for r in &w.requests {
            let own = &slices[w.labels[r.client_id as usize]];
            assert!(r.objects.iter().all(|o| own.contains(o)));
        }
    }

    #[test]
    fn requests_are_valid_and_sorted() {
        let w = generate(&small(), 5000.0).unwrap();
        for pair in w.requests.windows(2) {
            assert!(pair[0].ready_time <= pair[1].ready_time);
        }
        for r in &w.requests {
            r.validate(200).unwrap();
            assert!(r.ready_time < 5000.0);
        }
    }

    #[test]
    fn labels_are_balanced() {
        let w = generate(&small(), 10.0).unwrap();
        let mut counts = [0; 5];
        for &l in &w.labels {
            counts[l] += 1;
        }
        assert_eq!(counts, [10; 5]);
    }

    #[test]
    fn matrix_covers_every_duration_once_per_replication() {
        let cells = experiment_matrix(&WorkloadSpec::default());
        assert_eq!(cells.len(), 35);
        for rep in 0..5 {
            let durations: Vec<f64> = cells.iter().filter(|c| c.replication == rep).map(|c| c.duration).collect();
            assert_eq!(durations, REFERENCE_DURATIONS.to_vec());
        }
        let seeds: BTreeSet<u64> = cells.iter().map(|c| c.seed).collect();
        assert_eq!(seeds.len(), cells.len());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        for spec in [
            WorkloadSpec { n_clients: 0, ..Default::default() },
            WorkloadSpec { services_per_app_range: (80, 10), ..Default::default() },
            WorkloadSpec { intra_cluster_overlap: 1.5, ..Default::default() },
            WorkloadSpec { arrival_rate: 0.0, ..Default::default() },
            WorkloadSpec { n_planted_clusters: 0, ..Default::default() },
        ] {
            assert!(generate(&spec, 100.0).is_err());
        }
    }

    #[test]
    fn csv_documents_round_trip() {
        let w = generate(&small(), 1500.0).unwrap();
        let mut buf = Vec::new();
        write_requests(&mut buf, &w.requests).unwrap();
        assert_eq!(read_requests(buf.as_slice()).unwrap(), w.requests);
        let mut buf = Vec::new();
        write_labels(&mut buf, &w.labels).unwrap();
        assert_eq!(read_labels(buf.as_slice()).unwrap(), w.labels);
    }

    #[test]
    fn log_records_carry_dates() {
        let w = generate(&small(), 3000.0).unwrap();
        let recs = to_log_records(&w.requests);
        let last = recs.last().unwrap();
        let day = (last.ready_time / TIME_UNITS_PER_DAY) as u64;
        assert_eq!(last.date, NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + Days::new(day));
    }
}
