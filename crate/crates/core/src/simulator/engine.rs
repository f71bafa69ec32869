use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use super::admission::{admit, Admission};
use super::prefetch::{prefetch_decide, top_k_objects, NodeStats, PrefetchPlan};
use super::{apply_deadline_slack, Cloud, Instance, Request, SimConfig, SimError, SimMetrics};
use crate::art2::Art2Network;
use crate::features::{min_max_normalize, normalize_popularity, ReferenceCounts};

/// Same-time events are handled in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    TaskComplete,
    InstanceReady,
    IdleCheck,
    SessionBoundary,
    Arrival,
    Sample,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    kind: EventKind,
    /// Request id, instance id or boundary ordinal; breaks ties within a kind.
    id: u64,
    /// Request index or instance id.
    target: usize,
    epoch: u64,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.kind.cmp(&other.kind))
            .then(self.id.cmp(&other.id))
            .then(self.target.cmp(&other.target))
            .then(self.epoch.cmp(&other.epoch))
    }
}

#[derive(Debug, Default)]
struct ClientState {
    /// Requests inside the trailing window, oldest first.
    recent: VecDeque<(f64, Vec<u32>)>,
    counts: Vec<u32>,
    plan: PrefetchPlan,
    session_n: f64,
    session_requests: u64,
}

/// Everything a run leaves behind, for inspection beyond the metrics.
#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub metrics: SimMetrics,
    pub instances: Vec<Instance>,
    pub network: Option<Art2Network>,
    /// Time of every processed event, in processing order.
    pub event_times: Vec<f64>,
}

pub fn run(config: &SimConfig, workload: &[Request]) -> Result<SimMetrics, SimError> {
    run_detailed(config, workload).map(|o| o.metrics)
}

pub fn run_detailed(config: &SimConfig, workload: &[Request]) -> Result<SimOutcome, SimError> {
    config.validate()?;
    let mut previous = f64::NEG_INFINITY;
    for r in workload {
        r.validate(config.catalog_size)?;
        if r.ready_time < previous {
            return Err(SimError::Unsorted { id: r.id, at: r.ready_time, previous });
        }
        previous = r.ready_time;
    }
    let requests = apply_deadline_slack(workload, config.deadline_slack);
    Sim::new(config, requests)?.run()
}

struct Sim<'a> {
    config: &'a SimConfig,
    requests: Vec<Request>,
    cloud: Cloud,
    queue: BinaryHeap<Reverse<Event>>,
    holders: BTreeMap<usize, Vec<usize>>,
    clients: BTreeMap<u32, ClientState>,
    session_counts: ReferenceCounts,
    network: Option<Art2Network>,
    stats: NodeStats,
    metrics: SimMetrics,
    accepted: u64,
    event_times: Vec<f64>,
}

impl<'a> Sim<'a> {
    fn new(config: &'a SimConfig, requests: Vec<Request>) -> Result<Self, SimError> {
        let n_clients = requests.iter().map(|r| r.client_id as usize + 1).max().unwrap_or(0);
        let network =
            if config.prefetch_enabled { Some(Art2Network::new(config.art2, config.catalog_size)?) } else { None };
        let mut sim = Self {
            config,
            requests,
            cloud: Cloud::new(config.rate),
            queue: BinaryHeap::new(),
            holders: BTreeMap::new(),
            clients: BTreeMap::new(),
            session_counts: ReferenceCounts::zeros(0, n_clients, config.catalog_size),
            network,
            stats: NodeStats::default(),
            metrics: SimMetrics::default(),
            accepted: 0,
            event_times: Vec::new(),
        };
        for idx in 0..sim.requests.len() {
            let r = &sim.requests[idx];
            let (time, id) = (r.ready_time, r.id);
            sim.push(time, EventKind::Arrival, id, idx, 0);
        }
        if config.prefetch_enabled {
            let mut k = 1u64;
            while k as f64 * config.session_window <= config.duration {
                sim.push(k as f64 * config.session_window, EventKind::SessionBoundary, k, 0, 0);
                k += 1;
            }
        }
        let mut k = 1u64;
        while k as f64 * config.sample_interval <= config.duration {
            sim.push(k as f64 * config.sample_interval, EventKind::Sample, k, 0, 0);
            k += 1;
        }
        Ok(sim)
    }

    fn push(&mut self, time: f64, kind: EventKind, id: u64, target: usize, epoch: u64) {
        self.queue.push(Reverse(Event { time, kind, id, target, epoch }));
    }

    fn run(mut self) -> Result<SimOutcome, SimError> {
        let duration = self.config.duration;
        let mut now = 0.0;
        while let Some(Reverse(event)) = self.queue.pop() {
            if event.time > duration {
                break;
            }
            if event.time < now {
                return Err(SimError::TimeRegression { from: now, to: event.time });
            }
            self.cloud.accrue_cost(now, event.time);
            now = event.time;
            self.event_times.push(now);
            match event.kind {
                EventKind::Arrival => self.on_arrival(event.target, now),
                EventKind::TaskComplete => self.on_complete(event.target, now),
                EventKind::InstanceReady => self.on_ready(event.target, event.epoch, now),
                EventKind::IdleCheck => self.on_idle_check(event.target, event.epoch, now),
                EventKind::SessionBoundary => self.on_session_boundary(event.id)?,
                EventKind::Sample => self.sample(now),
            }
        }
        self.cloud.accrue_cost(now, duration);
        let running: Vec<usize> = self.cloud.running().map(|i| i.id).collect();
        for id in running {
            self.cloud.terminate(id, duration);
        }
        self.cloud.accrue_cost(duration, duration);
        if self.metrics.cost_per_task_series.last().is_none_or(|&(t, _)| t < duration) {
            self.sample(duration);
        }

        let m = &mut self.metrics;
        m.in_flight_at_end = self.accepted - m.completed;
        m.total_cost = self.cloud.total_cost;
        m.total_instance_runtime = self.cloud.total_instance_runtime;
        m.cost_per_task = (m.completed > 0).then(|| m.total_cost / m.completed as f64);
        m.clusters = self.network.as_ref().map_or(0, Art2Network::committed);
        debug_assert!(m.is_conserved());
        Ok(SimOutcome {
            metrics: self.metrics,
            instances: self.cloud.instances().to_vec(),
            network: self.network,
            event_times: self.event_times,
        })
    }

    fn sample(&mut self, now: f64) {
        if self.metrics.completed > 0 {
            let value = self.cloud.total_cost / self.metrics.completed as f64;
            self.metrics.cost_per_task_series.push((now, value));
        }
    }

    fn on_arrival(&mut self, idx: usize, now: f64) {
        self.metrics.submitted += 1;
        let node = if self.network.is_some() {
            self.observe(idx, now);
            self.plan_for(idx)
        } else {
            None
        };

        let request = &self.requests[idx];
        match admit(request, &self.cloud, now, self.config) {
            Admission::Reject { .. } => self.metrics.rejected += 1,
            Admission::Accept(alloc) => {
                self.accepted += 1;
                let objects = request.objects.clone();
                let id = request.id;
                let mut held = Vec::with_capacity(request.n as usize);
                for &(inst, _) in &alloc.reuse {
                    let i = self.cloud.instance_mut(inst);
                    i.busy_until = Some(alloc.completion);
                    i.pool = node;
                    i.epoch += 1;
                    i.hosted_objects.extend(objects.iter().copied());
                    held.push(inst);
                }
                for _ in 0..alloc.fresh {
                    let inst = self.cloud.boot(now, self.config.startup_delay);
                    let i = self.cloud.instance_mut(inst);
                    i.busy_until = Some(alloc.completion);
                    i.pool = node;
                    i.hosted_objects.extend(objects.iter().copied());
                    self.metrics.instances_started += 1;
                    held.push(inst);
                }
                self.holders.insert(idx, held);
                self.push(alloc.completion, EventKind::TaskComplete, id, idx, 0);
            }
        }

        if let Some(node) = node {
            self.preboot(idx, node, now);
        }
    }

    /// Records the arrival in the client's trailing window and the current
    /// learning session, and scores the client's previous plan.
    fn observe(&mut self, idx: usize, now: f64) {
        let request = &self.requests[idx];
        let catalog = self.config.catalog_size;
        let window = self.config.session_window;
        let state = self
            .clients
            .entry(request.client_id)
            .or_insert_with(|| ClientState { counts: vec![0; catalog], ..Default::default() });

        while let Some((t, _)) = state.recent.front() {
            if *t > now - window {
                break;
            }
            let (_, objs) = state.recent.pop_front().expect("front exists");
            for o in objs {
                state.counts[o as usize] -= 1;
            }
        }
        for &o in &request.objects {
            state.counts[o as usize] += 1;
        }
        state.recent.push_back((now, request.objects.clone()));
        state.session_n += request.n as f64;
        state.session_requests += 1;

        if !state.plan.is_empty() {
            let unique: BTreeSet<u32> = request.objects.iter().copied().collect();
            for o in unique {
                if state.plan.stage.contains(&o) {
                    self.metrics.prefetch_hits += 1;
                } else {
                    self.metrics.prefetch_misses += 1;
                }
            }
        }
        for &o in &request.objects {
            self.session_counts
                .increment(request.client_id as usize, o as usize)
                .expect("ids validated against catalog and client count");
        }
    }

    /// Classifies the client's running pattern and remembers the plan.
    fn plan_for(&mut self, idx: usize) -> Option<usize> {
        let client = self.requests[idx].client_id;
        let network = self.network.as_ref().expect("prefetch enabled");
        let state = self.clients.get_mut(&client).expect("observed on arrival");
        let row: Vec<f64> = state.counts.iter().map(|&c| c as f64).collect();
        let pattern = min_max_normalize(&row);
        state.plan = prefetch_decide(network, Some(&pattern), &self.stats, self.config.prefetch_top_k);
        state.plan.node
    }

    /// Boots spares until the pool (busy members included, since they
    /// return to it) reaches the plan's size.
    fn preboot(&mut self, idx: usize, node: usize, now: f64) {
        let plan = &self.clients[&self.requests[idx].client_id].plan;
        let (target, stage) = (plan.preboot, plan.stage.clone());
        let deficit = target.saturating_sub(self.cloud.pool_size(node));
        for _ in 0..deficit {
            let inst = self.cloud.boot(now, self.config.startup_delay);
            self.metrics.instances_started += 1;
            let i = self.cloud.instance_mut(inst);
            i.pool = Some(node);
            i.hosted_objects.extend(stage.iter().copied());
            i.available_from += self.config.fetch_delay * stage.len() as f64;
            let (at, epoch) = (i.available_from, i.epoch);
            self.push(at, EventKind::InstanceReady, inst as u64, inst, epoch);
        }
    }

    fn on_complete(&mut self, idx: usize, now: f64) {
        self.metrics.completed += 1;
        let held = self.holders.remove(&idx).unwrap_or_default();
        for inst in held {
            let i = self.cloud.instance_mut(inst);
            i.busy_until = None;
            let Some(node) = i.pool else {
                self.cloud.terminate(inst, now);
                continue;
            };
            let target = self.stats.mean_n(node).map_or(0, |mean| mean.ceil() as usize);
            if self.cloud.spare_count(node) > target {
                self.cloud.terminate(inst, now);
                continue;
            }
            let stage = self
                .network
                .as_ref()
                .and_then(|net| net.prototype(node))
                .map(|row| top_k_objects(&row, self.config.prefetch_top_k))
                .unwrap_or_default();
            let fetch = self.config.fetch_delay;
            let i = self.cloud.instance_mut(inst);
            let missing = stage.iter().filter(|o| !i.hosted_objects.contains(o)).count();
            i.hosted_objects.extend(stage);
            i.available_from = now + fetch * missing as f64;
            let (at, epoch) = (i.available_from, i.epoch);
            self.push(at, EventKind::InstanceReady, inst as u64, inst, epoch);
        }
    }

    fn on_ready(&mut self, inst: usize, epoch: u64, now: f64) {
        let i = self.cloud.instance(inst);
        if i.is_spare() && i.epoch == epoch {
            let at = now + self.config.idle_timeout();
            self.push(at, EventKind::IdleCheck, inst as u64, inst, epoch);
        }
    }

    fn on_idle_check(&mut self, inst: usize, epoch: u64, now: f64) {
        let i = self.cloud.instance(inst);
        if i.is_spare() && i.epoch == epoch {
            self.cloud.terminate(inst, now);
        }
    }

    /// Trains the network on every client's pattern from the session that
    /// just ended, then starts a new session.
    fn on_session_boundary(&mut self, ordinal: u64) -> Result<(), SimError> {
        let Some(network) = self.network.as_mut() else {
            return Ok(());
        };
        self.session_counts.session_id = ordinal - 1;
        for pattern in normalize_popularity(&self.session_counts) {
            if pattern.is_zero() {
                continue;
            }
            let assignment = network.present(&pattern.values, true)?;
            if let (Some(node), Some(state)) = (assignment.node, self.clients.get(&pattern.client_id)) {
                self.stats.record(node, state.session_n, state.session_requests);
            }
        }
        self.session_counts.clear();
        for state in self.clients.values_mut() {
            state.session_n = 0.0;
            state.session_requests = 0;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{RequestKind, Slack};

    fn request(id: u64, client: u32, rt: f64, slack: f64, service: f64) -> Request {
        Request {
            id,
            client_id: client,
            n: 1,
            ready_time: rt,
            deadline: rt + slack,
            objects: vec![1, 2],
            service_time: service,
            kind: RequestKind::DeadlineConstrained,
        }
    }

    #[test]
    fn empty_workload_gives_zero_metrics() {
        let m = run(&SimConfig::default(), &[]).unwrap();
        assert_eq!(m.submitted, 0);
        assert_eq!(m.completed, 0);
        assert_eq!(m.total_cost, 0.0);
        assert_eq!(m.cost_per_task, None);
        assert!(m.cost_per_task_series.is_empty());
    }

    #[test]
    fn single_request_hand_trace() {
        let config = SimConfig { startup_delay: 0.0, fetch_delay: 0.0, rate: 3.0, ..Default::default() };
        let r = Request { n: 2, ..request(0, 0, 10.0, 100.0, 7.0) };
        let m = run(&config, &[r]).unwrap();
        assert_eq!(m.completed, 1);
        assert_eq!(m.rejected, 0);
        assert!((m.total_cost - 3.0 * 7.0 * 2.0).abs() < 1e-12);
        assert_eq!(m.cost_per_task, Some(42.0));
    }

    #[test]
    fn infeasible_request_is_rejected_and_costs_nothing() {
        let config = SimConfig::default();
        let m = run(&config, &[request(0, 0, 10.0, 30.0, 5.0)]).unwrap();
        assert_eq!(m.rejected, 1);
        assert_eq!(m.total_cost, 0.0);
        assert!(m.is_conserved());
    }

    #[test]
    fn unfinished_work_is_in_flight() {
        let config = SimConfig { duration: 100.0, ..Default::default() };
        let m = run(&config, &[request(0, 0, 90.0, 1000.0, 50.0)]).unwrap();
        assert_eq!(m.in_flight_at_end, 1);
        assert_eq!(m.completed, 0);
        assert!((m.total_cost - 10.0).abs() < 1e-12);
    }

    #[test]
    fn unsorted_workload_is_refused() {
        let w = vec![request(0, 0, 10.0, 100.0, 5.0), request(1, 0, 5.0, 100.0, 5.0)];
        assert!(matches!(run(&SimConfig::default(), &w), Err(SimError::Unsorted { id: 1, .. })));
    }

    #[test]
    fn relaxed_slack_admits_more() {
        let w = vec![request(0, 0, 10.0, 60.0, 5.0)];
        let tight = run(&SimConfig::default(), &w).unwrap();
        let relaxed = run(&SimConfig { deadline_slack: Slack::Relaxed, ..Default::default() }, &w).unwrap();
        assert_eq!(tight.rejected, 1);
        assert_eq!(relaxed.rejected, 0);
    }

    #[test]
    fn events_are_ordered_by_kind_at_equal_times() {
        let a = Event { time: 5.0, kind: EventKind::Arrival, id: 0, target: 0, epoch: 0 };
        let c = Event { time: 5.0, kind: EventKind::TaskComplete, id: 9, target: 0, epoch: 0 };
        let early = Event { time: 4.0, kind: EventKind::Sample, id: 0, target: 0, epoch: 0 };
        let mut heap: BinaryHeap<Reverse<Event>> = [a, c, early].into_iter().map(Reverse).collect();
        assert_eq!(heap.pop().unwrap().0.kind, EventKind::Sample);
        assert_eq!(heap.pop().unwrap().0.kind, EventKind::TaskComplete);
        assert_eq!(heap.pop().unwrap().0.kind, EventKind::Arrival);
    }

    #[test]
    fn repeat_client_reuses_a_warm_instance() {
        // One client keeps asking for the same objects; after the first
        // session the network knows it and keeps instances warm.
        let config = SimConfig {
            duration: 400.0,
            session_window: 100.0,
            sample_interval: 100.0,
            prefetch_enabled: true,
            catalog_size: 8,
            ..Default::default()
        };
        let w: Vec<Request> = (0..30).map(|k| request(k, 0, 5.0 + 12.0 * k as f64, 30.0, 10.0)).collect();
        let base = run(&SimConfig { prefetch_enabled: false, ..config.clone() }, &w).unwrap();
        let art2 = run(&config, &w).unwrap();
        assert_eq!(base.completed, 0);
        assert!(art2.completed > 0);
        assert!(art2.rejected < base.rejected);
        assert!(art2.prefetch_hits > 0);
        assert_eq!(art2.clusters, 1);
    }
}
