use serde::{Deserialize, Serialize};

use super::Art2Error;

/// Scalar constants of an ART2 network.
///
/// The defaults are the published configuration (`a = b = 10`, `c = 0.1`,
/// `d = 0.9`, `e = 0`, `theta = 0.2`) plus the values this crate picks for
/// the constants that were left open (`rho`, `etp`, the node cap and the
/// F1 iteration cap).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Art2Params {
    /// Gain of the U feedback into the W sublayer.
    pub a: f64,
    /// Gain of the Q feedback into the V sublayer.
    pub b: f64,
    /// Mixing weight of P in the R sublayer.
    pub c: f64,
    /// F2 activation scale, strictly inside (0, 1).
    pub d: f64,
    /// Offset added to every norm denominator.
    pub e: f64,
    /// Noise suppression threshold.
    pub theta: f64,
    /// Vigilance.
    pub rho: f64,
    /// F1 stabilization tolerance on `max |u - u_prev|`.
    pub etp: f64,
    /// Fraction of the way each weight row moves toward `u / (1 - d)` on
    /// resonance. `1.0` is direct assignment.
    pub learning_rate: f64,
    pub max_f2_nodes: usize,
    pub f1_max_iters: usize,
}

impl Default for Art2Params {
    fn default() -> Self {
        Self {
            a: 10.0,
            b: 10.0,
            c: 0.1,
            d: 0.9,
            e: 0.0,
            theta: 0.2,
            rho: 0.85,
            etp: 1e-4,
            learning_rate: 1.0,
            max_f2_nodes: 128,
            f1_max_iters: 1000,
        }
    }
}

fn unit_interval(name: &str, value: f64) -> Result<(), Art2Error> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Art2Error::InvalidParams(format!("0 <= {name} <= 1 violated ({name} = {value})")))
    }
}

impl Art2Params {
    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_etp(mut self, etp: f64) -> Self {
        self.etp = etp;
        self
    }

    /// Checks every inequality the network relies on and names the first
    /// one that fails.
    pub fn validate(&self) -> Result<(), Art2Error> {
        let scalars = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("e", self.e),
            ("theta", self.theta),
            ("rho", self.rho),
            ("etp", self.etp),
            ("learning_rate", self.learning_rate),
        ];
        if let Some((name, _)) = scalars.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Art2Error::InvalidParams(format!("{name} must be finite")));
        }
        unit_interval("theta", self.theta)?;
        unit_interval("rho", self.rho)?;
        unit_interval("etp", self.etp)?;
        unit_interval("learning_rate", self.learning_rate)?;
        if !(self.d > 0.0 && self.d < 1.0) {
            return Err(Art2Error::InvalidParams(format!("0 < d < 1 violated (d = {})", self.d)));
        }
        if self.e < 0.0 {
            return Err(Art2Error::InvalidParams(format!("e >= 0 violated (e = {})", self.e)));
        }
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if v <= 0.0 {
                return Err(Art2Error::InvalidParams(format!("{name} > 0 violated ({name} = {v})")));
            }
        }
        let consistency = self.c * self.d / (1.0 - self.d);
        if consistency > 1.0 {
            return Err(Art2Error::InvalidParams(format!("c*d/(1-d) <= 1 violated (c*d/(1-d) = {consistency})")));
        }
        if self.max_f2_nodes == 0 {
            return Err(Art2Error::InvalidParams("max_f2_nodes >= 1 violated".into()));
        }
        if self.f1_max_iters == 0 {
            return Err(Art2Error::InvalidParams("f1_max_iters >= 1 violated".into()));
        }
        Ok(())
    }

    /// Upper bound on initial bottom-up weights: `1 / ((1 - d) * sqrt(m))`.
    pub fn bottom_up_bound(&self, m: usize) -> f64 {
        1.0 / ((1.0 - self.d) * (m as f64).sqrt())
    }

    /// Initial bottom-up weight of an uncommitted node, half the bound.
    pub fn initial_bottom_up(&self, m: usize) -> f64 {
        0.5 * self.bottom_up_bound(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Art2Params::default().validate().unwrap();
    }

    #[test]
    fn consistency_condition_holds_for_defaults() {
        let p = Art2Params::default();
        let v = p.c * p.d / (1.0 - p.d);
        assert!((v - 0.9).abs() < 1e-12);
    }

    #[test]
    fn rejects_d_outside_open_interval() {
        for d in [0.0, 1.0, 1.5, -0.1] {
            let p = Art2Params { d, ..Default::default() };
            let err = p.validate().unwrap_err().to_string();
            assert!(err.contains("0 < d < 1"), "{err}");
        }
    }

    #[test]
    fn rejects_inconsistent_c() {
        let p = Art2Params { c: 0.2, ..Default::default() };
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("c*d/(1-d)"), "{err}");
    }

    #[test]
    fn rejects_out_of_range_thresholds() {
        for p in [
            Art2Params { theta: 1.2, ..Default::default() },
            Art2Params { rho: -0.1, ..Default::default() },
            Art2Params { etp: 2.0, ..Default::default() },
            Art2Params { e: -1.0, ..Default::default() },
            Art2Params { a: 0.0, ..Default::default() },
            Art2Params { max_f2_nodes: 0, ..Default::default() },
        ] {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn bottom_up_bound_for_five_inputs() {
        let p = Art2Params::default();
        // 1 / (0.1 * sqrt(5))
        assert!((p.bottom_up_bound(5) - 4.472_135_954_999_579).abs() < 1e-9);
        assert!((p.initial_bottom_up(5) - 2.236_067_977_499_79).abs() < 1e-9);
    }
}
