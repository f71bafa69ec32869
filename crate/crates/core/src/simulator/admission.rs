use std::collections::BTreeSet;

use super::{Cloud, Request, RequestKind, SimConfig};

/// Instances chosen for an accepted request.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Spare instances to claim, with the time each can start.
    pub reuse: Vec<(usize, f64)>,
    /// Instances to boot from scratch.
    pub fresh: usize,
    /// All `n` instances are ready; the task runs from here.
    pub start: f64,
    pub completion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Admission {
    Accept(Allocation),
    Reject { earliest_completion: f64 },
}

/// Earliest-completion admission test.
///
/// Every one of the `n` instances must host all of the request's objects
/// before the task starts. A fresh instance is ready after
/// `startup_delay` plus the fetch of every object; a spare one after it
/// finishes booting or staging plus the fetch of what it lacks. The
/// cheapest `n` readiness times are taken, preferring spares on ties.
///
/// Best-effort requests are always accepted and only get fresh instances,
/// leaving spares to deadline work.
pub fn admit(request: &Request, cloud: &Cloud, now: f64, config: &SimConfig) -> Admission {
    let objects: BTreeSet<u32> = request.objects.iter().copied().collect();
    let n = request.n as usize;
    let fresh_ready = now + config.startup_delay + config.fetch_delay * objects.len() as f64;

    let mut reuse: Vec<(usize, f64)> = Vec::new();
    if request.kind == RequestKind::DeadlineConstrained {
        let mut spares: Vec<(usize, f64)> = cloud
            .spares()
            .map(|i| (i.id, i.ready_for(&objects, now, config.fetch_delay)))
            .filter(|&(_, ready)| ready <= fresh_ready)
            .collect();
        spares.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        spares.truncate(n);
        reuse = spares;
    }
    let fresh = n - reuse.len();
    let start = reuse.iter().map(|&(_, t)| t).chain((fresh > 0).then_some(fresh_ready)).fold(now, f64::max);
    let completion = start + request.service_time;

    if request.kind == RequestKind::DeadlineConstrained && completion > request.deadline {
        return Admission::Reject { earliest_completion: completion };
    }
    Admission::Accept(Allocation { reuse, fresh, start, completion })
}
