//! Second-order finite-difference reference solver for the per-mode problems,
//! written independently of the closed forms in `solvers::mode`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BandMatrix, BorderedLu, BorderedSystem};
use crate::solvers::ProblemKind;
use crate::strip::NormalGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Closure {
    /// `u′(X) + r u(X) = 0`; `None` means `r = max(β, 1)`.
    Robin { rate: Option<f64> },
    /// `u(X) = 0`.
    DirichletAtInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    #[serde(rename = "P_oracle")]
    pub nodes: usize,
    #[serde(rename = "X_max")]
    pub depth: f64,
    pub closure: Closure,
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            nodes: 2049,
            depth: 12.0,
            closure: Closure::Robin { rate: None },
            tol: 1e-4,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 65 {
            return Err(Error::InvalidGrid(format!("oracle needs at least 65 nodes, got {}", self.nodes)));
        }
        if let Closure::Robin { rate: Some(r) } = self.closure {
            if !(r >= 0.0) {
                return Err(Error::InvalidGrid(format!("Robin rate must be nonnegative, got {r}")));
            }
        }
        if !(self.depth > 0.0) {
            return Err(Error::InvalidGrid("X_max must be positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<NormalGrid> {
        self.validate()?;
        NormalGrid::new(self.depth, self.nodes)
    }
}

/// Assembles `B + g sᵀ`: rows `1..P-1` carry `-u″ + β²u` plus the nonlocal
/// column `g` times the boundary functional `s`; row 0 is the boundary
/// condition, the last row the far-field closure.
pub fn fd_mode_system(beta: f64, kind: ProblemKind, cfg: &OracleConfig) -> Result<BorderedSystem> {
    let grid = cfg.grid()?;
    let p = grid.nodes;
    let h = grid.spacing();
    let w = beta.hypot(1.0);
    let mut band = BandMatrix::zeros(p, 2, 3);
    let mut s = vec![0.0; p];
    match kind {
        ProblemKind::DirichletType => {
            for (j, c) in [2.0, -5.0, 4.0, -1.0].iter().enumerate() {
                band.set(0, j, c / (h * h));
            }
            for (j, c) in [-3.0, 4.0, -1.0].iter().enumerate() {
                s[j] = c / (2.0 * h);
            }
            // Linear functions are in the kernel of the band part alone at
            // β = 0; shifting `-sᵀ` into row 0 (and `+1` into g₀) leaves B + g sᵀ
            // unchanged but keeps the band factor nonsingular.
            for (j, sj) in s.iter().take(3).enumerate() {
                band.set(0, j, band.get(0, j) - sj);
            }
        }
        ProblemKind::NeumannType => {
            for (j, c) in [-3.0, 4.0, -1.0].iter().enumerate() {
                band.set(0, j, c / (2.0 * h));
            }
            s[0] = 1.0;
        }
    }
    let mut g = vec![0.0; p];
    for i in 1..p - 1 {
        band.set(i, i - 1, -1.0 / (h * h));
        band.set(i, i, 2.0 / (h * h) + beta * beta);
        band.set(i, i + 1, -1.0 / (h * h));
        let x = grid.coord(i);
        g[i] = match kind {
            ProblemKind::DirichletType => -w * (-w * x).exp(),
            ProblemKind::NeumannType => w * w * (-w * x).exp(),
        };
    }
    if kind == ProblemKind::DirichletType {
        g[0] = 1.0;
    }
    match cfg.closure {
        Closure::Robin { rate } => {
            let r = rate.unwrap_or(beta.max(1.0));
            band.set(p - 1, p - 3, 1.0 / (2.0 * h));
            band.set(p - 1, p - 2, -4.0 / (2.0 * h));
            band.set(p - 1, p - 1, 3.0 / (2.0 * h) + r);
        }
        Closure::DirichletAtInfinity => band.set(p - 1, p - 1, 1.0),
    }
    Ok(BorderedSystem { band, g, s })
}

pub fn fd_rhs(f: &[C64], h: C64) -> Vec<C64> {
    let mut b = f.to_vec();
    b[0] = h;
    let n = b.len();
    b[n - 1] = C64::new(0.0, 0.0);
    b
}

#[derive(Debug, Clone)]
pub struct FdSolution {
    pub values: Vec<C64>,
    /// Relative residual of the linear solve in its own discrete operator.
    pub solve_residual: f64,
    pub lu: BorderedLu,
}

/// Solves one mode on the oracle grid; `f` is sampled on that grid.
pub fn fd_mode_solve_full(beta: f64, f: &[C64], h: C64, kind: ProblemKind, cfg: &OracleConfig) -> Result<FdSolution> {
    if f.len() != cfg.nodes {
        return Err(Error::GridMismatch);
    }
    let lu = fd_mode_system(beta, kind, cfg)?.factor()?;
    let b = fd_rhs(f, h);
    let values = lu.solve(&b);
    let solve_residual = lu.relative_residual(&values, &b);
    Ok(FdSolution {
        values,
        solve_residual,
        lu,
    })
}

pub fn fd_mode_solve(beta: f64, f: &[C64], h: C64, kind: ProblemKind, cfg: &OracleConfig) -> Result<Vec<C64>> {
    Ok(fd_mode_solve_full(beta, f, h, kind, cfg)?.values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: usize) -> OracleConfig {
        OracleConfig {
            nodes: p,
            ..OracleConfig::default()
        }
    }

    fn max_err(a: &[C64], xs: &[f64], exact: impl Fn(f64) -> f64) -> f64 {
        a.iter().zip(xs).map(|(v, x)| (v - exact(*x)).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_data_gives_zero() {
        for kind in [ProblemKind::DirichletType, ProblemKind::NeumannType] {
            let u = fd_mode_solve(1.0, &vec![C64::new(0.0, 0.0); 129], C64::new(0.0, 0.0), kind, &cfg(129)).unwrap();
            assert!(u.iter().all(|v| *v == C64::new(0.0, 0.0)));
        }
    }

    #[test]
    fn manufactured_exponential_converges_second_order() {
        for (kind, hv) in [(ProblemKind::DirichletType, 2.0), (ProblemKind::NeumannType, -(2f64.sqrt()))] {
            let beta = 1.0;
            let w = 2f64.sqrt();
            let err = |p: usize| {
                let c = cfg(p);
                let xs = c.grid().unwrap().coords();
                let f: Vec<C64> = xs.iter().map(|x| C64::new(beta * beta * (-w * x).exp(), 0.0)).collect();
                let sol = fd_mode_solve_full(beta, &f, C64::new(hv, 0.0), kind, &c).unwrap();
                assert!(sol.solve_residual < 1e-12);
                max_err(&sol.values, &xs, |x| (-w * x).exp())
            };
            let (a, b) = (err(257), err(513));
            assert!(a < 1e-2, "{kind:?}: {a}");
            assert!(a / b > 3.5, "{kind:?}: ratio {}", a / b);
        }
    }

    #[test]
    fn zero_mode_matches_exact_profile() {
        // u = e^{-x} - e^{-2x}/4 has u″(0) = 0 and u′(0) = -1/2; f = -u″ - e^{-x} u′(0)
        let err = |p: usize| {
            let c = cfg(p);
            let xs = c.grid().unwrap().coords();
            let f: Vec<C64> = xs
                .iter()
                .map(|x| C64::new(-((-x).exp() - (-2.0 * x).exp()) + 0.5 * (-x).exp(), 0.0))
                .collect();
            let u = fd_mode_solve(0.0, &f, C64::new(0.0, 0.0), ProblemKind::DirichletType, &c).unwrap();
            max_err(&u, &xs, |x| (-x).exp() - 0.25 * (-2.0 * x).exp())
        };
        let (a, b) = (err(1025), err(2049));
        assert!(b < 1e-3 && a / b > 3.5, "{a} {b}");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(cfg(33).validate().is_err());
        let bad = OracleConfig {
            closure: Closure::Robin { rate: Some(-1.0) },
            ..OracleConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
