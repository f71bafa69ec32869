//! The F1 (attentional) layer: the W, X, V, U, P, Q and R sublayers.

use serde::{Deserialize, Serialize};

use super::{Art2Error, Art2Params};

/// Sublayer activities after F1 has settled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1State {
    pub w: Vec<f64>,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    /// Update cycles run before the stopping test passed.
    pub iterations: usize,
}

impl F1State {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Recomputes P, Q and R from the current U with `top_down` as the
    /// active F2 node's feedback, leaving W, X, V and U untouched.
    ///
    /// This is the single match pass run when a candidate F2 node is first
    /// activated, before the vigilance test.
    pub fn with_top_down(&self, top_down: &[f64], params: &Art2Params) -> Result<Self, Art2Error> {
        if top_down.len() != self.u.len() {
            return Err(Art2Error::DimensionMismatch { expected: self.u.len(), got: top_down.len() });
        }
        let p: Vec<f64> = self.u.iter().zip(top_down).map(|(u, z)| u + params.d * z).collect();
        let q = normalize(&p, params.e, "q")?;
        let r = r_layer(&self.u, &p, params);
        Ok(Self { p, q, r, ..self.clone() })
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &[f64], e: f64, stage: &'static str) -> Result<Vec<f64>, Art2Error> {
    let denom = e + norm(v);
    if denom == 0.0 {
        return Err(Art2Error::ZeroVector { stage });
    }
    Ok(v.iter().map(|x| x / denom).collect())
}

/// Noise suppression nonlinearity.
///
/// Identity at and above `theta`; below it the continuous form
/// `2 theta x^2 / (x^2 + theta^2)`, which meets the identity at `x = theta`.
pub fn activation(x: f64, theta: f64) -> Result<f64, Art2Error> {
    if x < 0.0 || x.is_nan() {
        return Err(Art2Error::Domain(x));
    }
    Ok(suppress(x, theta))
}

#[inline]
fn suppress(x: f64, theta: f64) -> f64 {
    if x >= theta {
        x
    } else {
        let x2 = x * x;
        let denom = x2 + theta * theta;
        if denom == 0.0 {
            0.0
        } else {
            2.0 * theta * x2 / denom
        }
    }
}

fn r_layer(u: &[f64], p: &[f64], params: &Art2Params) -> Vec<f64> {
    let c = params.c;
    let denom = params.e + norm(u) + c * norm(p);
    u.iter().zip(p).map(|(u, p)| (u + c * p) / denom).collect()
}

/// Runs the F1 update cycle on `input` until U settles.
///
/// `top_down` is the feedback row of the active F2 node, or `None` when F2
/// is inactive (then P = U). The loop starts from U = Q = 0 and stops once
/// `max_i |u_i - u_prev_i| <= etp`.
pub fn stabilize_f1(input: &[f64], top_down: Option<&[f64]>, params: &Art2Params) -> Result<F1State, Art2Error> {
    let m = input.len();
    if let Some(z) = top_down {
        if z.len() != m {
            return Err(Art2Error::DimensionMismatch { expected: m, got: z.len() });
        }
    }
    check_input(input)?;

    let mut u = vec![0.0; m];
    let mut q = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mut v = vec![0.0; m];
    let mut p = vec![0.0; m];
    let mut x;
    let mut change = f64::INFINITY;

    for iteration in 1..=params.f1_max_iters {
        for i in 0..m {
            w[i] = input[i] + params.a * u[i];
        }
        x = normalize(&w, params.e, "x")?;
        for i in 0..m {
            v[i] = suppress(x[i], params.theta) + params.b * suppress(q[i], params.theta);
        }
        let next_u = normalize(&v, params.e, "u")?;
        change = next_u.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        u = next_u;
        match top_down {
            Some(z) => {
                for i in 0..m {
                    p[i] = u[i] + params.d * z[i];
                }
            }
            None => p.copy_from_slice(&u),
        }
        q = normalize(&p, params.e, "q")?;

        // The first cycle compares against the zero start, not a previous U.
        if iteration > 1 && change <= params.etp {
            let r = r_layer(&u, &p, params);
            return Ok(F1State { w, x, v, u, p, q, r, iterations: iteration });
        }
    }
    Err(Art2Error::NotConverged { iterations: params.f1_max_iters, residual: change })
}

pub(crate) fn check_input(input: &[f64]) -> Result<(), Art2Error> {
    if input.is_empty() {
        return Err(Art2Error::DimensionMismatch { expected: 1, got: 0 });
    }
    if let Some((index, &value)) = input.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Art2Error::InputOutOfRange { index, value });
    }
    if input.iter().all(|&v| v == 0.0) {
        return Err(Art2Error::ZeroVector { stage: "input" });
    }
    Ok(())
}

/// Norm of the R sublayer, `|| (u + c p) / (e + ||u|| + ||c p||) ||`.
pub fn vigilance_residual(f1: &F1State, params: &Art2Params) -> f64 {
    norm(&r_layer(&f1.u, &f1.p, params))
}

/// Orienting-subsystem test: reset iff `rho / (e + residual) > 1`.
pub fn reset_required(residual: f64, params: &Art2Params) -> bool {
    params.rho / (params.e + residual) > 1.0
}
