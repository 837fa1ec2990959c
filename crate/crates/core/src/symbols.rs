//! Per-frequency scalar symbols. Every function takes `β = 2π|k|/L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Freq {
    pub beta: f64,
    pub omega: f64,
}

impl Freq {
    pub fn new(beta: f64) -> Self {
        debug_assert!(beta >= 0.0);
        Freq {
            beta,
            omega: beta.hypot(1.0),
        }
    }
}

pub fn omega(beta: f64) -> f64 {
    beta.hypot(1.0)
}

pub fn m1(beta: f64) -> f64 {
    let w = omega(beta);
    let bw = beta * w;
    let b2 = beta * beta;
    (1.0 + b2 + bw) / (1.0 + 2.0 * b2 + bw)
}

pub fn m2(beta: f64) -> f64 {
    m1(beta) / omega(beta)
}

/// Symbol of the boundary kernel `K_{x₀}`: `-ω e^{-ω x₀}`.
pub fn k_hat(beta: f64, x0: f64) -> f64 {
    let w = omega(beta);
    -w * (-w * x0).exp()
}

pub fn poisson_mode(beta: f64, x0: f64) -> f64 {
    (-beta * x0).exp()
}

/// Dirichlet Green's kernel for `-∂² + β²` on the half line.
pub fn green_dirichlet_mode(beta: f64, x0: f64, y0: f64) -> f64 {
    let lo = x0.min(y0);
    let hi = x0.max(y0);
    if beta * hi < 1e-8 {
        return lo;
    }
    // (e^{-β(hi-lo)} - e^{-β(hi+lo)}) / 2β = e^{-β hi} sinh(β lo) / β
    (-beta * hi).exp() * (-(-2.0 * beta * lo).exp_m1()) * (beta * lo).exp() / (2.0 * beta)
}

/// Neumann Green's kernel for `-∂² + β²` on the half line.
pub fn green_neumann_mode(beta: f64, x0: f64, y0: f64) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::ZeroModeSingular);
    }
    let near = (-beta * (x0 - y0).abs()).exp();
    let far = (-beta * (x0 + y0)).exp();
    Ok((near + far) / (2.0 * beta))
}

/// Dirichlet Green's operator applied to `e^{-ω y}`: `e^{-βx₀} - e^{-ωx₀}`.
pub fn green_of_khat(beta: f64, x0: f64) -> f64 {
    let w = omega(beta);
    // e^{-βx}(1 - e^{-(ω-β)x}), with ω - β = 1/(ω + β)
    -(-beta * x0).exp() * (-x0 / (w + beta)).exp_m1()
}
