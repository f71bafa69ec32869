use serde::{Deserialize, Serialize};

use super::{Art2Error, Art2Network, Art2Params};

/// Self-describing serialized form of an [`Art2Network`].
///
/// Weights are written in shortest round-trip decimal form, so a
/// save/load cycle reproduces the network bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub m: usize,
    pub params: Art2Params,
    pub committed: usize,
    pub bottom_up: Vec<Vec<f64>>,
    pub top_down: Vec<Vec<f64>>,
}

impl From<&Art2Network> for NetworkSnapshot {
    fn from(net: &Art2Network) -> Self {
        Self {
            m: net.m(),
            params: *net.params(),
            committed: net.committed(),
            bottom_up: net.bottom_up().to_vec(),
            top_down: net.top_down().to_vec(),
        }
    }
}

impl TryFrom<NetworkSnapshot> for Art2Network {
    type Error = Art2Error;

    fn try_from(s: NetworkSnapshot) -> Result<Self, Art2Error> {
        if s.committed != s.bottom_up.len() {
            return Err(Art2Error::InvalidSnapshot(format!(
                "committed = {} but {} rows present",
                s.committed,
                s.bottom_up.len()
            )));
        }
        Art2Network::from_parts(s.m, s.params, s.bottom_up, s.top_down)
    }
}

impl Art2Network {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetworkSnapshot::from(self))
            .expect("snapshot of finite weights always serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, Art2Error> {
        let snapshot: NetworkSnapshot =
            serde_json::from_str(text).map_err(|e| Art2Error::InvalidSnapshot(e.to_string()))?;
        snapshot.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut net = Art2Network::new(Art2Params::default().with_rho(0.97), 6).unwrap();
        for input in
            [[0.8, 0.2, 0.2, 0.1, 0.3, 0.4], [0.0, 0.1, 0.9, 1.0, 0.0, 0.0], [1.0 / 3.0, 0.0, 0.0, 0.0, 0.7, 0.7]]
        {
            net.present(&input, true).unwrap();
        }
        let back = Art2Network::from_json(&net.to_json()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn inconsistent_snapshot_is_rejected() {
        let net = Art2Network::new(Art2Params::default(), 2).unwrap();
        let mut s = NetworkSnapshot::from(&net);
        s.committed = 1;
        assert!(Art2Network::try_from(s).is_err());

        let mut s = NetworkSnapshot::from(&net);
        s.committed = 1;
        s.bottom_up = vec![vec![1.0, 2.0]];
        s.top_down = vec![vec![1.0]];
        assert!(matches!(Art2Network::try_from(s), Err(Art2Error::DimensionMismatch { expected: 2, got: 1 })));
        assert!(Art2Network::from_json("{").is_err());
    }
}
