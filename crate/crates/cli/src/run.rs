use std::fs::File;
use std::io::BufReader;
use std::sync::Arc;

use anyhow::{Context, Result};
use hodge_core::exterior::FormField;
use hodge_core::oracle::boundary_order;
use hodge_core::oracle::data::{generate, Generated};
use hodge_core::solvers::{solve_qform_with, solve_scalar, ProblemKind, ScalarBVPData, SolveReport, SolverOptions};
use hodge_core::strip::{boundary_norm, dump, norm_sobolev_form, BoundaryField, StripGrid};
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, DataSource, RunConfig};

/// Interior data, optional boundary data and the exact solution if known.
pub struct Assembled {
    pub grid: Arc<StripGrid>,
    pub alpha: FormField,
    pub boundary: Option<BoundaryField>,
    pub exact: Option<FormField>,
}

pub fn assemble(cfg: &RunConfig) -> Result<Assembled> {
    let grid = cfg.grid();
    let p = &cfg.problem;
    match &p.data {
        DataSource::Builtin(spec) => {
            let Generated {
                alpha,
                boundary,
                exact,
            } = generate(spec, &grid, p.degree, p.kind, cfg.seed).map_err(|e| ConfigError(e.to_string()))?;
            Ok(Assembled {
                grid,
                alpha,
                boundary,
                exact,
            })
        }
        DataSource::Dump { dump: path, boundary } => {
            let mut r = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
            let alpha = dump::read_form(&mut r).with_context(|| format!("reading {}", path.display()))?;
            if **alpha.grid() != *grid || alpha.degree() != p.degree {
                return Err(ConfigError(format!("{} does not match the configured grid and degree", path.display())).into());
            }
            let boundary = match (boundary, p.kind) {
                (Some(b), Some(_)) => {
                    let mut r = BufReader::new(File::open(b).with_context(|| format!("opening {}", b.display()))?);
                    Some(dump::read_boundary(&mut r, &grid).with_context(|| format!("reading {}", b.display()))?)
                }
                (Some(_), None) => {
                    return Err(ConfigError("boundary dumps need a scalar problem kind".into()).into());
                }
                (None, Some(_)) => Some(BoundaryField::zeros(&grid)),
                (None, None) => None,
            };
            Ok(Assembled {
                grid: alpha.grid().clone(),
                alpha,
                boundary,
                exact: None,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub grid: StripGrid,
    pub degree: usize,
    pub kind: Option<ProblemKind>,
    pub seed: u64,
    #[serde(flatten)]
    pub report: SolveReport,
    /// `max |φ - φ*| / max |φ*|` when the exact solution is known.
    pub relative_error: Option<f64>,
    /// `‖φ‖₂ / (‖α‖₀ + ‖h‖ + ‖φ‖₁)`.
    pub estimate_ratio: Option<f64>,
}

pub fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        rule: cfg.quadrature,
        zero_mode_rel_tol: cfg.tolerances.zero_mode,
    }
}

pub fn solve(cfg: &RunConfig) -> Result<(FormField, RunReport)> {
    let a = assemble(cfg)?;
    let opts = solver_options(cfg);
    let (phi, report, bnorm) = match (cfg.problem.kind, &a.boundary) {
        (Some(kind), Some(h)) => {
            let data = ScalarBVPData::new(a.alpha.components()[0].clone(), h.clone(), kind)?;
            let (u, r) = solve_scalar(&data, &opts)?;
            (FormField::scalar(u), r, boundary_norm(h, boundary_order(kind)))
        }
        _ => {
            let (phi, r) = solve_qform_with(&a.alpha, &opts)?;
            (phi, r, 0.0)
        }
    };
    let relative_error = a.exact.as_ref().map(|e| {
        let scale = e.max_abs();
        let diff = phi.sub(e).map(|d| d.max_abs()).unwrap_or(f64::NAN);
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    });
    let den = norm_sobolev_form(&a.alpha, 0) + bnorm + norm_sobolev_form(&phi, 1);
    let estimate_ratio = (den > 0.0).then(|| norm_sobolev_form(&phi, 2) / den);
    let rep = RunReport {
        grid: (*a.grid).clone(),
        degree: cfg.problem.degree,
        kind: cfg.problem.kind,
        seed: cfg.seed,
        report,
        relative_error,
        estimate_ratio,
    };
    Ok((phi, rep))
}
