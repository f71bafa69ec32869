use crate::art2::Art2Network;

/// What to prepare for a client predicted to belong to a cluster.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrefetchPlan {
    pub node: Option<usize>,
    /// Spare instances the cluster's pool should hold.
    pub preboot: usize,
    /// Objects to stage on those instances, most popular first.
    pub stage: Vec<u32>,
}

impl PrefetchPlan {
    pub fn is_empty(&self) -> bool {
        self.preboot == 0 && self.stage.is_empty()
    }
}

/// Per-node running mean of the VM count of requests in sessions assigned
/// to that node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeStats {
    totals: Vec<(f64, u64)>,
}

impl NodeStats {
    pub fn record(&mut self, node: usize, n_sum: f64, requests: u64) {
        if self.totals.len() <= node {
            self.totals.resize(node + 1, (0.0, 0));
        }
        self.totals[node].0 += n_sum;
        self.totals[node].1 += requests;
    }

    pub fn mean_n(&self, node: usize) -> Option<f64> {
        self.totals.get(node).filter(|(_, count)| *count > 0).map(|(sum, count)| sum / *count as f64)
    }
}

/// Indices of the `k` largest positive weights, ties to the lower index.
pub fn top_k_objects(weights: &[f64], k: usize) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    idx.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.into_iter().map(|i| i as u32).collect()
}

/// Classifies a client's running pattern with the frozen network and
/// turns the winning prototype into a plan.
///
/// Anything that prevents a confident match (no nodes yet, no pattern,
/// an all-zero or otherwise unusable pattern, no vigilance match) yields
/// the empty plan.
pub fn prefetch_decide(
    network: &Art2Network,
    pattern: Option<&[f64]>,
    stats: &NodeStats,
    top_k: usize,
) -> PrefetchPlan {
    let Some(pattern) = pattern else {
        return PrefetchPlan::default();
    };
    if network.committed() == 0 {
        return PrefetchPlan::default();
    }
    let Ok(assignment) = network.classify(pattern) else {
        return PrefetchPlan::default();
    };
    let Some(node) = assignment.node else {
        return PrefetchPlan::default();
    };
    let stage = network.prototype(node).map(|row| top_k_objects(&row, top_k)).unwrap_or_default();
    let preboot = stats.mean_n(node).map_or(0, |mean| mean.ceil() as usize);
    PrefetchPlan { node: Some(node), preboot, stage }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::art2::Art2Params;

    #[test]
    fn empty_network_gives_empty_plan() {
        let net = Art2Network::new(Art2Params::default(), 4).unwrap();
        let plan = prefetch_decide(&net, Some(&[1.0, 0.0, 0.0, 0.0]), &NodeStats::default(), 3);
        assert!(plan.is_empty());
        assert_eq!(plan.node, None);
    }

    #[test]
    fn top_k_picks_largest_weights() {
        let mut row = vec![0.01; 60];
        row[4] = 0.9;
        row[17] = 0.7;
        row[52] = 0.8;
        row[30] = 0.05;
        assert_eq!(top_k_objects(&row, 3), vec![4, 52, 17]);
        assert_eq!(top_k_objects(&[0.5, 0.5, 0.0], 5), vec![0, 1]);
        assert!(top_k_objects(&row, 0).is_empty());
    }

    #[test]
    fn matching_client_gets_prototype_objects() {
        let mut net = Art2Network::new(Art2Params::default(), 60).unwrap();
        let mut pattern = vec![0.0; 60];
        pattern[4] = 1.0;
        pattern[17] = 0.8;
        pattern[52] = 0.9;
        net.present(&pattern, true).unwrap();
        let mut stats = NodeStats::default();
        stats.record(0, 5.0, 2);
        let plan = prefetch_decide(&net, Some(&pattern), &stats, 3);
        assert_eq!(plan.node, Some(0));
        let mut staged = plan.stage.clone();
        staged.sort();
        assert_eq!(staged, vec![4, 17, 52]);
        assert_eq!(plan.preboot, 3);

        let plan = prefetch_decide(&net, Some(&pattern), &stats, 0);
        assert!(plan.stage.is_empty());
        assert_eq!(plan.preboot, 3);
        assert!(!plan.is_empty());
    }

    #[test]
    fn unmatched_or_degenerate_patterns_give_empty_plans() {
        let mut net = Art2Network::new(Art2Params::default().with_rho(0.99), 6).unwrap();
        net.present(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], true).unwrap();
        let stats = NodeStats::default();
        assert!(prefetch_decide(&net, Some(&[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]), &stats, 2).is_empty());
        assert!(prefetch_decide(&net, Some(&[0.0; 6]), &stats, 2).is_empty());
        assert!(prefetch_decide(&net, Some(&[1.0; 3]), &stats, 2).is_empty());
        assert!(prefetch_decide(&net, None, &stats, 2).is_empty());
    }

    #[test]
    fn node_stats_mean() {
        let mut s = NodeStats::default();
        assert_eq!(s.mean_n(2), None);
        s.record(2, 6.0, 4);
        s.record(2, 4.0, 1);
        assert_eq!(s.mean_n(2), Some(2.0));
        assert_eq!(s.mean_n(0), None);
    }
}
