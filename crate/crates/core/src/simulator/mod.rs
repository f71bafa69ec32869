//! Discrete-event cloud simulator.
//!
//! Requests arrive, each asking for `n` VM instances. An instance costs a
//! flat rate per time unit from boot until termination, takes
//! `startup_delay` to boot, and must fetch every object it does not host
//! at `fetch_delay` per object. Deadline-constrained requests are rejected
//! at arrival when the earliest possible completion misses the deadline.
//!
//! The baseline policy provisions fresh instances for every request and
//! terminates them on completion. With `prefetch_enabled` an online ART2
//! network learns client session patterns; a client whose recent requests
//! classify into a known cluster gets spare instances pre-booted and
//! staged with that cluster's most popular objects, and freed instances
//! are kept warm for the cluster instead of being terminated.

mod admission;
mod engine;
mod instance;
mod metrics;
mod prefetch;

use serde::{Deserialize, Serialize};

use crate::art2::{Art2Error, Art2Params};

pub use admission::{admit, Admission, Allocation};
pub use engine::{run, run_detailed, SimOutcome};
pub use instance::{Cloud, Instance};
pub use metrics::SimMetrics;
pub use prefetch::{prefetch_decide, top_k_objects, NodeStats, PrefetchPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    DeadlineConstrained,
    BestEffort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub client_id: u32,
    /// Number of VM instances required.
    pub n: u32,
    pub ready_time: f64,
    pub deadline: f64,
    pub objects: Vec<u32>,
    pub service_time: f64,
    pub kind: RequestKind,
}

impl Request {
    pub fn validate(&self, catalog: usize) -> Result<(), SimError> {
        let bad = |why: String| Err(SimError::InvalidRequest { id: self.id, why });
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if !(self.service_time > 0.0) || !self.service_time.is_finite() {
            return bad(format!("service_time {} must be positive", self.service_time));
        }
        if !self.ready_time.is_finite() || self.ready_time < 0.0 {
            return bad(format!("ready_time {} must be finite and non-negative", self.ready_time));
        }
        if self.kind == RequestKind::DeadlineConstrained && !(self.deadline >= self.ready_time) {
            return bad(format!("deadline {} precedes ready_time {}", self.deadline, self.ready_time));
        }
        if let Some(o) = self.objects.iter().find(|&&o| o as usize >= catalog) {
            return bad(format!("object {o} outside catalog of {catalog}"));
        }
        Ok(())
    }
}

/// Deadline regime for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slack {
    Tight,
    Relaxed,
}

impl Slack {
    pub fn multiplier(self) -> f64 {
        match self {
            Slack::Tight => 1.0,
            Slack::Relaxed => 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Slack::Tight => "tight",
            Slack::Relaxed => "relaxed",
        }
    }
}

impl std::str::FromStr for Slack {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tight" => Ok(Slack::Tight),
            "relaxed" => Ok(Slack::Relaxed),
            other => Err(format!("unknown slack {other:?} (expected tight or relaxed)")),
        }
    }
}

/// Stretches every deadline window: `d <- rt + multiplier * (d - rt)`.
pub fn apply_deadline_slack(workload: &[Request], slack: Slack) -> Vec<Request> {
    let k = slack.multiplier();
    workload
        .iter()
        .map(|r| Request {
            deadline: if k == 1.0 { r.deadline } else { r.ready_time + k * (r.deadline - r.ready_time) },
            ..r.clone()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub duration: f64,
    /// Cost per instance per time unit.
    pub rate: f64,
    pub startup_delay: f64,
    /// Time to fetch one non-resident object onto an instance.
    pub fetch_delay: f64,
    pub prefetch_top_k: usize,
    pub prefetch_enabled: bool,
    pub deadline_slack: Slack,
    pub art2: Art2Params,
    pub catalog_size: usize,
    /// Length of the learning sessions and of each client's trailing
    /// classification window.
    pub session_window: f64,
    /// Idle spare instances are reclaimed after this long. Defaults to
    /// twice the startup delay.
    pub idle_timeout: Option<f64>,
    /// Spacing of the cost-per-task samples.
    pub sample_interval: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            duration: 2000.0,
            rate: 1.0,
            startup_delay: 50.0,
            fetch_delay: 10.0,
            prefetch_top_k: 3,
            prefetch_enabled: false,
            deadline_slack: Slack::Tight,
            art2: Art2Params::default(),
            catalog_size: 200,
            session_window: 1000.0,
            idle_timeout: None,
            sample_interval: 1000.0,
        }
    }
}

impl SimConfig {
    pub fn idle_timeout(&self) -> f64 {
        self.idle_timeout.unwrap_or(2.0 * self.startup_delay)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |why: &str| Err(SimError::InvalidConfig(why.to_string()));
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return bad("duration must be positive and finite");
        }
        if !(self.rate >= 0.0) || !self.rate.is_finite() {
            return bad("rate must be non-negative");
        }
        if !(self.startup_delay >= 0.0 && self.fetch_delay >= 0.0) {
            return bad("delays must be non-negative");
        }
        if !(self.session_window > 0.0) {
            return bad("session_window must be positive");
        }
        if !(self.sample_interval > 0.0) {
            return bad("sample_interval must be positive");
        }
        if !(self.idle_timeout() >= 0.0) {
            return bad("idle_timeout must be non-negative");
        }
        if self.catalog_size == 0 {
            return bad("catalog_size must be at least 1");
        }
        if self.prefetch_enabled {
            self.art2.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("request {id}: {why}")]
    InvalidRequest { id: u64, why: String },
    #[error("workload is not sorted by arrival: request {id} arrives at {at} after {previous}")]
    Unsorted { id: u64, at: f64, previous: f64 },
    #[error("event time went backwards from {from} to {to}")]
    TimeRegression { from: f64, to: f64 },
    #[error(transparent)]
    Art2(#[from] Art2Error),
}
