use std::collections::BTreeSet;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub id: usize,
    pub boot_started: f64,
    /// Booted and done staging from this time on.
    pub available_from: f64,
    /// Completion time of the task holding the instance, if any.
    pub busy_until: Option<f64>,
    pub hosted_objects: BTreeSet<u32>,
    pub accumulated_runtime: f64,
    pub terminated_at: Option<f64>,
    /// Cluster whose spare pool the instance belongs to while unclaimed.
    pub pool: Option<usize>,
    /// Bumped on every claim so stale idle checks can be told apart.
    pub(crate) epoch: u64,
}

impl Instance {
    pub fn is_running(&self) -> bool {
        self.terminated_at.is_none()
    }

    /// Running and not held by a task.
    pub fn is_spare(&self) -> bool {
        self.is_running() && self.busy_until.is_none()
    }

    /// Time at which the instance could start work on `objects`.
    pub fn ready_for(&self, objects: &BTreeSet<u32>, now: f64, fetch_delay: f64) -> f64 {
        let missing = objects.difference(&self.hosted_objects).count();
        now.max(self.available_from) + fetch_delay * missing as f64
    }
}

/// Instance fleet and its running bill.
#[derive(Debug, Clone, Default)]
pub struct Cloud {
    pub rate: f64,
    instances: Vec<Instance>,
    /// Ids that may still accrue cost.
    active: Vec<usize>,
    pub total_cost: f64,
    pub total_instance_runtime: f64,
}

impl Cloud {
    pub fn new(rate: f64) -> Self {
        Self { rate, ..Default::default() }
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn instance(&self, id: usize) -> &Instance {
        &self.instances[id]
    }

    pub(crate) fn instance_mut(&mut self, id: usize) -> &mut Instance {
        &mut self.instances[id]
    }

    pub fn running(&self) -> impl Iterator<Item = &Instance> {
        self.active.iter().map(|&i| &self.instances[i]).filter(|i| i.is_running())
    }

    pub fn spares(&self) -> impl Iterator<Item = &Instance> {
        self.running().filter(|i| i.busy_until.is_none())
    }

    pub fn spare_count(&self, pool: usize) -> usize {
        self.spares().filter(|i| i.pool == Some(pool)).count()
    }

    /// Running instances tagged with `pool`, busy or not.
    pub fn pool_size(&self, pool: usize) -> usize {
        self.running().filter(|i| i.pool == Some(pool)).count()
    }

    /// Starts booting a new instance at `now`.
    pub fn boot(&mut self, now: f64, startup_delay: f64) -> usize {
        let id = self.instances.len();
        self.instances.push(Instance {
            id,
            boot_started: now,
            available_from: now + startup_delay,
            busy_until: None,
            hosted_objects: BTreeSet::new(),
            accumulated_runtime: 0.0,
            terminated_at: None,
            pool: None,
            epoch: 0,
        });
        self.active.push(id);
        id
    }

    pub fn terminate(&mut self, id: usize, at: f64) {
        let inst = &mut self.instances[id];
        if inst.terminated_at.is_none() {
            inst.terminated_at = Some(at);
            inst.busy_until = None;
            inst.pool = None;
        }
    }

    /// Charges every instance for its running time inside `[from, to)`.
    ///
    /// Pre-booted idle instances are charged like busy ones. Instances
    /// terminated by `to` are dropped from the active set afterwards.
    pub fn accrue_cost(&mut self, from: f64, to: f64) {
        debug_assert!(from <= to);
        let rate = self.rate;
        let mut runtime = 0.0;
        for &id in &self.active {
            let inst = &mut self.instances[id];
            let start = from.max(inst.boot_started);
            let end = inst.terminated_at.map_or(to, |t| t.min(to));
            if end > start {
                inst.accumulated_runtime += end - start;
                runtime += end - start;
            }
        }
        self.total_instance_runtime += runtime;
        self.total_cost += runtime * rate;
        let instances = &self.instances;
        self.active.retain(|&id| instances[id].terminated_at.is_none_or(|t| t > to));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_instances_no_cost() {
        let mut c = Cloud::new(2.0);
        c.accrue_cost(0.0, 10.0);
        assert_eq!(c.total_cost, 0.0);
    }

    #[test]
    fn flat_rate_over_interval() {
        let mut c = Cloud::new(2.0);
        c.boot(0.0, 5.0);
        c.accrue_cost(0.0, 10.0);
        assert_eq!(c.total_cost, 20.0);
        assert_eq!(c.instance(0).accumulated_runtime, 10.0);
    }

    #[test]
    fn termination_stops_the_meter() {
        let mut c = Cloud::new(2.0);
        c.boot(0.0, 5.0);
        c.terminate(0, 4.0);
        c.accrue_cost(0.0, 10.0);
        assert_eq!(c.total_cost, 8.0);
        c.accrue_cost(10.0, 20.0);
        assert_eq!(c.total_cost, 8.0);
        assert_eq!(c.running().count(), 0);
    }

    #[test]
    fn late_boot_is_charged_from_boot() {
        let mut c = Cloud::new(1.0);
        c.accrue_cost(0.0, 3.0);
        c.boot(3.0, 5.0);
        c.accrue_cost(3.0, 7.5);
        assert_eq!(c.total_instance_runtime, 4.5);
    }

    #[test]
    fn ready_time_counts_missing_objects() {
        let mut c = Cloud::new(1.0);
        let id = c.boot(0.0, 50.0);
        c.instance_mut(id).hosted_objects.insert(3);
        let want: BTreeSet<u32> = [3, 4, 5].into_iter().collect();
        assert_eq!(c.instance(id).ready_for(&want, 10.0, 10.0), 70.0);
        assert_eq!(c.instance(id).ready_for(&want, 60.0, 10.0), 80.0);
    }
}
