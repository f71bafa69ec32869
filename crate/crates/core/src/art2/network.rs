use serde::{Deserialize, Serialize};

use super::f1::{check_input, reset_required, stabilize_f1, vigilance_residual, F1State};
use super::{Art2Error, Art2Params};

/// Outcome of presenting one pattern to the network.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    /// Resonant F2 node, or `None` when a frozen network found no match.
    pub node: Option<usize>,
    /// A new node was committed for this pattern.
    pub created: bool,
    /// Vigilance resets fired during the search.
    pub resets: usize,
    pub f1: F1State,
}

/// Learned state of an ART2 network.
///
/// Only committed F2 nodes are stored. A node is committed lazily when an
/// input matches no existing prototype; its rows start at the initial
/// values (zero top-down, a constant bottom-up) and are immediately
/// trained on that input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Art2Network {
    m: usize,
    params: Art2Params,
    bottom_up: Vec<Vec<f64>>,
    top_down: Vec<Vec<f64>>,
}

impl Art2Network {
    pub fn new(params: Art2Params, m: usize) -> Result<Self, Art2Error> {
        params.validate()?;
        if m == 0 {
            return Err(Art2Error::InvalidParams("input dimension m >= 1 violated".into()));
        }
        Ok(Self { m, params, bottom_up: Vec::new(), top_down: Vec::new() })
    }

    pub(crate) fn from_parts(
        m: usize,
        params: Art2Params,
        bottom_up: Vec<Vec<f64>>,
        top_down: Vec<Vec<f64>>,
    ) -> Result<Self, Art2Error> {
        let mut net = Self::new(params, m)?;
        if bottom_up.len() != top_down.len() {
            return Err(Art2Error::InvalidSnapshot(format!(
                "{} bottom-up rows but {} top-down rows",
                bottom_up.len(),
                top_down.len()
            )));
        }
        if bottom_up.len() > params.max_f2_nodes {
            return Err(Art2Error::InvalidSnapshot(format!(
                "{} committed nodes exceed max_f2_nodes = {}",
                bottom_up.len(),
                params.max_f2_nodes
            )));
        }
        for row in bottom_up.iter().chain(&top_down) {
            if row.len() != m {
                return Err(Art2Error::DimensionMismatch { expected: m, got: row.len() });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Art2Error::InvalidSnapshot("non-finite weight".into()));
            }
        }
        net.bottom_up = bottom_up;
        net.top_down = top_down;
        Ok(net)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn params(&self) -> &Art2Params {
        &self.params
    }

    /// Changes the learning fraction between presentations, e.g. to anneal
    /// over epochs.
    pub fn set_learning_rate(&mut self, lambda: f64) -> Result<(), Art2Error> {
        let params = Art2Params { learning_rate: lambda, ..self.params };
        params.validate()?;
        self.params = params;
        Ok(())
    }

    pub fn committed(&self) -> usize {
        self.bottom_up.len()
    }

    pub fn bottom_up(&self) -> &[Vec<f64>] {
        &self.bottom_up
    }

    pub fn top_down(&self) -> &[Vec<f64>] {
        &self.top_down
    }

    /// Prototype of `node` rescaled to unit-weight space, `(1 - d) * z`.
    pub fn prototype(&self, node: usize) -> Option<Vec<f64>> {
        let scale = 1.0 - self.params.d;
        self.top_down.get(node).map(|row| row.iter().map(|z| z * scale).collect())
    }

    fn check_dimension(&self, input: &[f64]) -> Result<(), Art2Error> {
        if input.len() != self.m {
            return Err(Art2Error::DimensionMismatch { expected: self.m, got: input.len() });
        }
        Ok(())
    }

    /// Settles F1 on `input`, with `active` supplying top-down feedback.
    pub fn stabilize(&self, input: &[f64], active: Option<usize>) -> Result<F1State, Art2Error> {
        self.check_dimension(input)?;
        let top_down = match active {
            Some(j) => {
                Some(self.top_down.get(j).ok_or(Art2Error::NodeOutOfRange { node: j, committed: self.committed() })?)
            }
            None => None,
        };
        stabilize_f1(input, top_down.map(Vec::as_slice), &self.params)
    }

    /// F2 net input `T_j = p . bottom_up_j` for every committed node.
    pub fn f2_input(&self, f1: &F1State) -> Result<Vec<f64>, Art2Error> {
        if self.bottom_up.is_empty() {
            return Err(Art2Error::EmptyNetwork);
        }
        if f1.p.len() != self.m {
            return Err(Art2Error::DimensionMismatch { expected: self.m, got: f1.p.len() });
        }
        Ok(self.bottom_up.iter().map(|row| row.iter().zip(&f1.p).map(|(z, p)| z * p).sum()).collect())
    }

    /// Moves the winner's rows toward `u / (1 - d)` by the learning rate.
    pub fn learn(&mut self, winner: usize, f1: &F1State) -> Result<(), Art2Error> {
        if winner >= self.committed() {
            return Err(Art2Error::NodeOutOfRange { node: winner, committed: self.committed() });
        }
        if f1.u.len() != self.m {
            return Err(Art2Error::DimensionMismatch { expected: self.m, got: f1.u.len() });
        }
        let lambda = self.params.learning_rate;
        let scale = 1.0 / (1.0 - self.params.d);
        for row in [&mut self.bottom_up[winner], &mut self.top_down[winner]] {
            for (z, u) in row.iter_mut().zip(&f1.u) {
                *z += lambda * (u * scale - *z);
            }
        }
        Ok(())
    }

    fn commit(&mut self) -> Result<usize, Art2Error> {
        if self.committed() >= self.params.max_f2_nodes {
            return Err(Art2Error::CapacityExhausted { max: self.params.max_f2_nodes });
        }
        let init = self.params.initial_bottom_up(self.m);
        self.bottom_up.push(vec![init; self.m]);
        self.top_down.push(vec![0.0; self.m]);
        Ok(self.committed() - 1)
    }

    /// Classifies `input` without touching any weights.
    pub fn classify(&self, input: &[f64]) -> Result<ClusterAssignment, Art2Error> {
        let search = self.search(input)?;
        Ok(ClusterAssignment { node: search.winner, created: false, resets: search.resets, f1: search.f1 })
    }

    /// Runs a full search/resonance cycle for `input`.
    ///
    /// With `learning` the resonant node is trained, and a node is
    /// committed when every existing prototype was reset. Without it this
    /// is [`classify`](Self::classify).
    pub fn present(&mut self, input: &[f64], learning: bool) -> Result<ClusterAssignment, Art2Error> {
        if !learning {
            return self.classify(input);
        }
        let search = self.search(input)?;
        let (node, created) = match search.winner {
            Some(j) => (j, false),
            None => (self.commit()?, true),
        };
        let resonant = self.stabilize(input, Some(node))?;
        self.learn(node, &resonant)?;
        Ok(ClusterAssignment { node: Some(node), created, resets: search.resets, f1: resonant })
    }

    fn search(&self, input: &[f64]) -> Result<Search, Art2Error> {
        self.check_dimension(input)?;
        check_input(input)?;
        let bottom_up_state = self.stabilize(input, None)?;
        if self.bottom_up.is_empty() {
            return Ok(Search { winner: None, resets: 0, f1: bottom_up_state });
        }
        let t = self.f2_input(&bottom_up_state)?;
        let mut disabled = vec![false; t.len()];
        let mut resets = 0;
        while let Some(j) = compete(&t, &disabled) {
            let probe = bottom_up_state.with_top_down(&self.top_down[j], &self.params)?;
            let residual = vigilance_residual(&probe, &self.params);
            if reset_required(residual, &self.params) {
                disabled[j] = true;
                resets += 1;
                continue;
            }
            return Ok(Search { winner: Some(j), resets, f1: probe });
        }
        Ok(Search { winner: None, resets, f1: bottom_up_state })
    }
}

struct Search {
    winner: Option<usize>,
    resets: usize,
    f1: F1State,
}

/// Winner-take-all over the enabled F2 nodes; ties go to the lowest index.
pub fn compete(t: &[f64], disabled: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &tj) in t.iter().enumerate() {
        if disabled.get(j).copied().unwrap_or(false) {
            continue;
        }
        match best {
            Some((_, b)) if tj <= b => {}
            _ => best = Some((j, tj)),
        }
    }
    best.map(|(j, _)| j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(m: usize) -> Art2Network {
        Art2Network::new(Art2Params::default(), m).unwrap()
    }

    fn f1_with_p(p: Vec<f64>) -> F1State {
        let m = p.len();
        F1State {
            w: vec![0.0; m],
            x: vec![0.0; m],
            v: vec![0.0; m],
            u: p.clone(),
            q: p.clone(),
            r: vec![0.0; m],
            p,
            iterations: 0,
        }
    }

    #[test]
    fn new_network_is_empty() {
        let n = net(5);
        assert_eq!(n.committed(), 0);
        assert_eq!(n.m(), 5);
    }

    #[test]
    fn new_network_rejects_bad_params() {
        let p = Art2Params { d: 1.5, ..Default::default() };
        assert!(matches!(Art2Network::new(p, 5), Err(Art2Error::InvalidParams(_))));
        assert!(Art2Network::new(Art2Params::default(), 0).is_err());
    }

    #[test]
    fn committed_rows_start_at_initial_values() {
        let mut n = net(5);
        let j = n.commit().unwrap();
        assert!(n.top_down[j].iter().all(|&z| z == 0.0));
        let bound = n.params.bottom_up_bound(5);
        assert!(n.bottom_up[j].iter().all(|&z| z <= bound && (z - bound / 2.0).abs() < 1e-12));
    }

    #[test]
    fn f2_input_is_dot_product() {
        let mut n = net(2);
        n.bottom_up = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        n.top_down = vec![vec![0.0; 2]; 2];
        let t = n.f2_input(&f1_with_p(vec![0.9, 0.1])).unwrap();
        assert_eq!(t, vec![0.9, 0.1]);
        let t0 = n.f2_input(&f1_with_p(vec![0.0, 0.0])).unwrap();
        assert_eq!(t0, vec![0.0, 0.0]);
    }

    #[test]
    fn f2_input_of_inverse_row_is_one() {
        let p = vec![0.6, 0.8, 0.5];
        let p2: f64 = p.iter().map(|x| x * x).sum();
        let mut n = net(3);
        n.bottom_up = vec![p.iter().map(|x| x / p2).collect()];
        n.top_down = vec![vec![0.0; 3]];
        let t = n.f2_input(&f1_with_p(p)).unwrap();
        assert!((t[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn f2_input_on_empty_network_errors() {
        assert!(matches!(net(2).f2_input(&f1_with_p(vec![0.5, 0.5])), Err(Art2Error::EmptyNetwork)));
    }

    #[test]
    fn compete_examples() {
        assert_eq!(compete(&[0.9, 0.1], &[false, false]), Some(0));
        assert_eq!(compete(&[0.9, 0.1], &[true, false]), Some(1));
        assert_eq!(compete(&[0.5, 0.5], &[false, false]), Some(0));
        assert_eq!(compete(&[0.5, 0.5], &[true, true]), None);
        assert_eq!(compete(&[], &[]), None);
    }

    #[test]
    fn learn_assigns_scaled_u() {
        let mut n = net(5);
        n.commit().unwrap();
        n.learn(0, &f1_with_p(vec![1.0, 0.0, 0.0, 0.0, 0.0])).unwrap();
        for row in [&n.bottom_up[0], &n.top_down[0]] {
            assert!((row[0] - 10.0).abs() < 1e-12);
            assert!(row[1..].iter().all(|&z| z == 0.0));
        }
        let before = n.clone();
        n.learn(0, &f1_with_p(vec![1.0, 0.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(n, before);
    }

    #[test]
    fn zero_learning_rate_leaves_rows() {
        let p = Art2Params { learning_rate: 0.0, ..Default::default() };
        let mut n = Art2Network::new(p, 3).unwrap();
        n.commit().unwrap();
        let before = n.clone();
        n.learn(0, &f1_with_p(vec![0.6, 0.8, 0.0])).unwrap();
        assert_eq!(n, before);
    }

    #[test]
    fn learn_rejects_unknown_winner() {
        let mut n = net(2);
        assert!(matches!(
            n.learn(0, &f1_with_p(vec![1.0, 0.0])),
            Err(Art2Error::NodeOutOfRange { node: 0, committed: 0 })
        ));
    }

    #[test]
    fn first_presentation_commits_node_zero() {
        let mut n = net(5);
        let a = n.present(&[0.8, 0.2, 0.2, 0.1, 0.3], true).unwrap();
        assert_eq!(a.node, Some(0));
        assert!(a.created);
        assert_eq!(a.resets, 0);
        assert_eq!(n.committed(), 1);
    }

    #[test]
    fn repeated_input_resonates_with_its_node() {
        let mut n = net(5);
        let input = [0.8, 0.2, 0.2, 0.1, 0.3];
        n.present(&input, true).unwrap();
        let again = n.present(&input, true).unwrap();
        assert_eq!(again.node, Some(0));
        assert!(!again.created);
        assert_eq!(n.committed(), 1);
    }

    #[test]
    fn orthogonal_inputs_split_under_high_vigilance() {
        let mut n = Art2Network::new(Art2Params::default().with_rho(0.99), 5).unwrap();
        let a = n.present(&[1.0, 0.0, 0.0, 0.0, 0.0], true).unwrap();
        let b = n.present(&[0.0, 0.0, 0.0, 0.0, 1.0], true).unwrap();
        assert_eq!(a.node, Some(0));
        assert_eq!(b.node, Some(1));
        assert!(b.created);
        assert_eq!(b.resets, 1);
    }

    #[test]
    fn frozen_network_leaves_unmatched_inputs_unclassified() {
        let mut n = Art2Network::new(Art2Params::default().with_rho(0.99), 5).unwrap();
        n.present(&[1.0, 0.0, 0.0, 0.0, 0.0], true).unwrap();
        let before = n.clone();
        let a = n.present(&[0.0, 0.0, 0.0, 0.0, 1.0], false).unwrap();
        assert_eq!(a.node, None);
        assert_eq!(n, before);
        assert_eq!(n.classify(&[0.0; 5]).unwrap_err(), Art2Error::ZeroVector { stage: "input" });
    }

    #[test]
    fn capacity_is_enforced() {
        let p = Art2Params { max_f2_nodes: 1, ..Art2Params::default().with_rho(0.99) };
        let mut n = Art2Network::new(p, 3).unwrap();
        n.present(&[1.0, 0.0, 0.0], true).unwrap();
        assert_eq!(n.present(&[0.0, 0.0, 1.0], true).unwrap_err(), Art2Error::CapacityExhausted { max: 1 });
        assert_eq!(n.committed(), 1);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut n = net(3);
        assert!(matches!(n.present(&[0.5, 0.5], true), Err(Art2Error::DimensionMismatch { expected: 3, got: 2 })));
    }
}
