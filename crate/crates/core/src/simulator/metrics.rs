use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub submitted: u64,
    pub completed: u64,
    pub rejected: u64,
    pub in_flight_at_end: u64,
    pub instances_started: u64,
    pub total_instance_runtime: f64,
    pub total_cost: f64,
    /// `total_cost / completed`, absent until something completes.
    pub cost_per_task: Option<f64>,
    pub prefetch_hits: u64,
    pub prefetch_misses: u64,
    /// F2 nodes committed by the end of the run.
    pub clusters: usize,
    /// `(time, cost per completed task so far)` at every sample point.
    #[serde(skip)]
    pub cost_per_task_series: Vec<(f64, f64)>,
}

impl SimMetrics {
    pub fn prefetch_hit_rate(&self) -> Option<f64> {
        let total = self.prefetch_hits + self.prefetch_misses;
        (total > 0).then(|| self.prefetch_hits as f64 / total as f64)
    }

    pub fn is_conserved(&self) -> bool {
        self.submitted == self.completed + self.rejected + self.in_flight_at_end
    }

    /// Flat `key -> value` view, in a fixed order.
    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        vec![
            ("submitted", self.submitted.to_string()),
            ("completed", self.completed.to_string()),
            ("rejected", self.rejected.to_string()),
            ("in_flight_at_end", self.in_flight_at_end.to_string()),
            ("instances_started", self.instances_started.to_string()),
            ("total_instance_runtime", self.total_instance_runtime.to_string()),
            ("total_cost", self.total_cost.to_string()),
            ("cost_per_task", opt(self.cost_per_task)),
            ("prefetch_hits", self.prefetch_hits.to_string()),
            ("prefetch_misses", self.prefetch_misses.to_string()),
            ("prefetch_hit_rate", opt(self.prefetch_hit_rate())),
            ("clusters", self.clusters.to_string()),
        ]
    }
}
