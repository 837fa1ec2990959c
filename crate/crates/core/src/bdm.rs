//! Boutet de Monvel bookkeeping: orders and classes of the boundary operators
//! in the Hodge system, and a numerical solvability check of its model
//! boundary-symbol system.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{fd_mode_solve_full, Closure, OracleConfig};
use crate::solvers::ProblemKind;
use crate::symbols::omega;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    InteriorPdo,
    Poisson,
    Trace,
    SingularGreen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryOperatorDesc {
    pub kind: OperatorKind,
    pub order: f64,
    /// Present exactly for traces and singular Green operators.
    pub class: Option<u32>,
}

impl BoundaryOperatorDesc {
    pub fn new(kind: OperatorKind, order: f64, class: Option<u32>) -> Result<Self> {
        let needs_class = matches!(kind, OperatorKind::Trace | OperatorKind::SingularGreen);
        if needs_class != class.is_some() {
            return Err(Error::PrereqViolated(format!(
                "{kind:?} operators {} a class",
                if needs_class { "need" } else { "carry no" }
            )));
        }
        Ok(BoundaryOperatorDesc { kind, order, class })
    }
}

/// `S γ_ℓ` for a tangential operator `S` of order `s_order`.
pub fn compose_trace(s_order: f64, gamma_ell: u32) -> BoundaryOperatorDesc {
    BoundaryOperatorDesc {
        kind: OperatorKind::Trace,
        order: s_order + gamma_ell as f64,
        class: Some(gamma_ell + 1),
    }
}

/// `K γ_ℓ` for a Poisson operator `K` of order `poisson_order`.
pub fn compose_green(poisson_order: f64, gamma_ell: u32) -> BoundaryOperatorDesc {
    BoundaryOperatorDesc {
        kind: OperatorKind::SingularGreen,
        order: poisson_order + gamma_ell as f64,
        class: Some(gamma_ell + 1),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedOperator {
    pub name: String,
    pub role: String,
    pub desc: BoundaryOperatorDesc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemClassification {
    pub system: String,
    /// Number of boundary-data outputs and of Poisson inputs.
    pub m: usize,
    pub m_prime: usize,
    pub operators: Vec<NamedOperator>,
    /// `|ξ|² ≠ 0` for `ξ ≠ 0`.
    pub interior_symbol_invertible: bool,
    pub boundary_symbol_invertible: bool,
}

/// The scalar Hodge system `𝒜 = (-Δ + G; T)` with `G = 𝒦̃ γ₁` and
/// `T = (I - Δ′)^{-1/2} γ₂`.
pub fn classify_problem() -> ProblemClassification {
    let ktilde = BoundaryOperatorDesc {
        kind: OperatorKind::Poisson,
        order: 1.0,
        class: None,
    };
    let named = |name: &str, role: &str, desc| NamedOperator {
        name: name.into(),
        role: role.into(),
        desc,
    };
    ProblemClassification {
        system: "A = (-Δ + G ; T)".into(),
        m: 0,
        m_prime: 1,
        operators: vec![
            named(
                "-Δ",
                "interior operator",
                BoundaryOperatorDesc {
                    kind: OperatorKind::InteriorPdo,
                    order: 2.0,
                    class: None,
                },
            ),
            named("K̃", "Poisson operator", ktilde),
            named("G", "singular Green operator K̃ γ₁", compose_green(ktilde.order, 1)),
            named("T", "trace operator (I - Δ′)^{-1/2} γ₂", compose_trace(-1.0, 2)),
        ],
        interior_symbol_invertible: true,
        boundary_symbol_invertible: model_symbol_check(&[1.0, 10.0, 100.0]).is_ok(),
    }
}

/// `X = 20` and 4097 nodes: fine enough for residuals at rounding level and
/// long enough for the slowest admissible decay `e^{-β x₀}`, `β ≥ 1/2`.
pub fn model_config() -> OracleConfig {
    OracleConfig {
        nodes: 4097,
        depth: 20.0,
        closure: Closure::Robin { rate: None },
        tol: 1e-8,
    }
}

#[derive(Debug, Clone)]
pub struct ModelSolution {
    pub profile: Vec<C64>,
    /// Hager estimate of the 1-norm condition number.
    pub condition: f64,
    pub residual: f64,
}

/// Solves `v″ + ω e^{-ωx₀} v′(0) - β² v = ψ`, `v″(0)/ω = a` on the oracle grid.
/// This is the second-derivative-type mode problem with `f = -ψ`, `h = ω a`.
pub fn model_system_solve(beta: f64, psi: &[C64], a: C64, cfg: &OracleConfig) -> Result<ModelSolution> {
    if !(beta >= 0.5) {
        return Err(Error::PrereqViolated(format!("model system needs β ≥ 0.5, got {beta}")));
    }
    let f: Vec<C64> = psi.iter().map(|v| -v).collect();
    let sol = fd_mode_solve_full(beta, &f, a * omega(beta), ProblemKind::DirichletType, cfg)?;
    let condition = sol.lu.condition_estimate();
    if !condition.is_finite() || condition * f64::EPSILON >= 1.0 {
        return Err(Error::SingularSystem(format!("condition estimate {condition:.3e}")));
    }
    Ok(ModelSolution {
        profile: sol.values,
        condition,
        residual: sol.solve_residual,
    })
}

/// Largest condition estimate of the model system over `betas`, with a
/// decaying test datum `ψ = e^{-x₀}`, `a = 1`.
pub fn model_symbol_check(betas: &[f64]) -> Result<f64> {
    let cfg = model_config();
    let xs = cfg.grid()?.coords();
    let psi: Vec<C64> = xs.iter().map(|x| C64::new((-x).exp(), 0.0)).collect();
    let mut worst: f64 = 0.0;
    for &b in betas {
        worst = worst.max(model_system_solve(b, &psi, C64::new(1.0, 0.0), &cfg)?.condition);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonBound {
    pub ell: u32,
    pub ell_prime: u32,
    pub alpha: u32,
    /// `d - 1/2 - ℓ + ℓ′ - |α|`.
    pub exponent: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// `x₀^ℓ ∂_{x₀}^{ℓ′}` of the profile `-ω e^{-ω x₀}`: `(-1)^{ℓ′+1} ω^{ℓ′+1} x₀^ℓ e^{-ω x₀}`.
fn poisson_profile(beta: f64, x: f64, ell: u32, ell_prime: u32) -> f64 {
    let w = omega(beta);
    let sign = if ell_prime % 2 == 0 { -1.0 } else { 1.0 };
    sign * w.powi(ell_prime as i32 + 1) * x.powi(ell as i32) * (-w * x).exp()
}

/// `‖x₀^ℓ ∂^{ℓ′} ∂_β^α k̃(·, β)‖_{L²(ℝ₊)}`: Simpson on `[0, 60/ω]`, central
/// differences in `β`.
fn poisson_seminorm(beta: f64, ell: u32, ell_prime: u32, alpha: u32) -> f64 {
    let w = omega(beta);
    let n = 4000;
    let len = 60.0 / w;
    let h = len / n as f64;
    let db = 1e-3 * beta.max(1.0);
    let value = |x: f64| -> f64 {
        let p = |b: f64| poisson_profile(b, x, ell, ell_prime);
        match alpha {
            0 => p(beta),
            1 => (p(beta + db) - p(beta - db)) / (2.0 * db),
            2 => (p(beta + db) - 2.0 * p(beta) + p(beta - db)) / (db * db),
            _ => unreachable!("at most two tangential derivatives"),
        }
    };
    let sum: f64 = (0..=n)
        .map(|i| {
            let c = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * value(i as f64 * h).powi(2)
        })
        .sum();
    (sum * h / 3.0).sqrt()
}

/// Samples the Poisson symbol estimate for `𝒦̃` (order 1) over `(ℓ, ℓ′, α)`
/// up to order 2: the ratio of the seminorm to `⟨ξ′⟩^{exponent}` over a
/// logarithmic `β` grid stays within fixed bounds iff the estimate holds.
pub fn poisson_symbol_bounds(betas: &[f64]) -> Vec<PoissonBound> {
    let order = 1.0;
    let mut out = Vec::new();
    for ell in 0..=2u32 {
        for ell_prime in 0..=2u32 {
            for alpha in 0..=2u32 {
                let exponent = order - 0.5 - ell as f64 + ell_prime as f64 - alpha as f64;
                let ratios: Vec<f64> = betas
                    .iter()
                    .filter(|&&b| alpha == 0 || b > 0.0)
                    .map(|&b| poisson_seminorm(b, ell, ell_prime, alpha) / omega(b).powf(exponent))
                    .collect();
                out.push(PoissonBound {
                    ell,
                    ell_prime,
                    alpha,
                    exponent,
                    min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
                    max_ratio: ratios.iter().copied().fold(0.0, f64::max),
                });
            }
        }
    }
    out
}
