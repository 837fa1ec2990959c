//! Full-field solvers: tangential DFT, one closed-form solve per mode, inverse
//! DFT, plus a residual/boundary report.

pub mod mode;
mod moments;

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::FormField;
use crate::ops::{apply_g_scalar, apply_gprime, apply_laplacian};
use crate::strip::{
    norm_sobolev, tangential_dft, trace, BoundaryField, ModeSet, NormalRule, ScalarField, StripGrid,
};
use crate::symbols::omega;

pub use mode::{forward_exp, solve_mode_exp, solve_mode_sampled, ExpSum, ProblemKind, ZeroModeCheck};
pub use moments::{check_moments, check_moments_with, MomentCondition};

#[derive(Debug, Clone)]
pub struct ScalarBVPData {
    pub f: ScalarField,
    pub h: BoundaryField,
    pub kind: ProblemKind,
}

impl ScalarBVPData {
    pub fn new(f: ScalarField, h: BoundaryField, kind: ProblemKind) -> Result<Self> {
        if **f.grid() != **h.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarBVPData { f, h, kind })
    }

    pub fn homogeneous(f: ScalarField, kind: ProblemKind) -> Self {
        let h = BoundaryField::zeros(f.grid());
        ScalarBVPData { f, h, kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Quadrature behind the per-mode integrals.
    pub rule: NormalRule,
    /// Zero-mode solvability threshold relative to `‖f‖₀`.
    pub zero_mode_rel_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rule: NormalRule::Gregory,
            zero_mode_rel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// `‖(-Δ + G)u - f‖₀`, with `G′` for the Neumann type.
    pub residual_l2: f64,
    pub relative_residual: f64,
    /// Sup norm of the boundary-condition mismatch.
    pub bc_violation: f64,
    pub moment_diagnostics: Vec<MomentCondition>,
    /// Largest per-mode solution-operator scale: `1/β²` for `β > 0`, `X²/2`
    /// for the zero mode.
    pub per_mode_condition: f64,
    /// `max_k |û_k(X)| / max |û|`: how far the solution is from decayed at the
    /// far end of the strip.
    pub truncation_estimate: f64,
}

impl SolveReport {
    fn merge(reports: &[SolveReport], labels: &[String], f_norm: f64) -> SolveReport {
        let residual_l2 = reports.iter().map(|r| r.residual_l2.powi(2)).sum::<f64>().sqrt();
        let max = |sel: fn(&SolveReport) -> f64| reports.iter().map(sel).fold(0.0, f64::max);
        let moment_diagnostics = reports
            .iter()
            .zip(labels)
            .flat_map(|(r, l)| {
                r.moment_diagnostics.iter().map(move |m| MomentCondition {
                    name: format!("{l} {}", m.name),
                    ..m.clone()
                })
            })
            .collect();
        SolveReport {
            residual_l2,
            relative_residual: if f_norm > 0.0 { residual_l2 / f_norm } else { residual_l2 },
            bc_violation: max(|r| r.bc_violation),
            moment_diagnostics,
            per_mode_condition: max(|r| r.per_mode_condition),
            truncation_estimate: max(|r| r.truncation_estimate),
        }
    }
}

/// `‖f‖₀` from tangential coefficients with the given normal rule.
fn l2_from_modes(modes: &ModeSet, rule: NormalRule) -> f64 {
    let g = modes.grid();
    let w = g.normal().weights(rule);
    let s: f64 = modes
        .profiles()
        .map(|p| p.iter().zip(&w).map(|(v, w)| v.norm_sqr() * w).sum::<f64>())
        .sum();
    (g.torus_volume() * s).sqrt()
}

/// Interior operator of the given problem kind: `-Δu + Gu` or `-Δu + G′u`.
pub fn apply_scalar_operator(kind: ProblemKind, u: &ScalarField) -> Result<ScalarField> {
    let minus_lap = apply_laplacian(u).scaled(C64::new(-1.0, 0.0));
    let nonlocal = match kind {
        ProblemKind::DirichletType => apply_g_scalar(u)?,
        ProblemKind::NeumannType => apply_gprime(u),
    };
    minus_lap.add(&nonlocal)
}

fn boundary_order(kind: ProblemKind) -> usize {
    match kind {
        ProblemKind::DirichletType => 2,
        ProblemKind::NeumannType => 1,
    }
}

pub fn solve_scalar(data: &ScalarBVPData, opts: &SolverOptions) -> Result<(ScalarField, SolveReport)> {
    if !data.f.is_finite() {
        return Err(Error::NonFiniteInput("interior datum"));
    }
    if data.h.values().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFiniteInput("boundary datum"));
    }
    let grid = data.f.grid().clone();
    let normal = grid.normal();
    let f_modes = tangential_dft(&data.f);
    let h_coef = data.h.coefficients();
    let f_norm = l2_from_modes(&f_modes, opts.rule);

    let solved: Vec<(Vec<C64>, Option<ZeroModeCheck>)> = (0..grid.layer_len())
        .into_par_iter()
        .map(|t| solve_mode_sampled(data.kind, grid.beta(t), f_modes.profile(t), h_coef[t], &normal, opts.rule))
        .collect();

    for (_, check) in &solved {
        if let Some(check) = check {
            let value = grid.torus_volume() * check.value.norm();
            let tol = opts.zero_mode_rel_tol * f_norm;
            if value > tol {
                return Err(Error::ZeroModeIncompatible {
                    condition: check.condition,
                    value,
                    tol,
                });
            }
        }
    }

    let mut u_modes = ModeSet::zeros(&grid);
    for (t, (profile, _)) in solved.iter().enumerate() {
        u_modes.profile_mut(t).copy_from_slice(profile);
    }
    let u = u_modes.to_field();
    let report = build_report(data, &u, &u_modes, f_norm)?;
    Ok((u, report))
}

fn build_report(data: &ScalarBVPData, u: &ScalarField, u_modes: &ModeSet, f_norm: f64) -> Result<SolveReport> {
    let grid = u.grid();
    let residual = apply_scalar_operator(data.kind, u)?.sub(&data.f)?;
    let residual_l2 = norm_sobolev(&residual, 0);
    let bc_violation = trace(u, boundary_order(data.kind))?.sub(&data.h)?.max_abs();
    let per_mode_condition = (0..grid.layer_len())
        .map(|t| {
            let b = grid.beta(t);
            if b == 0.0 {
                0.5 * grid.depth * grid.depth
            } else {
                1.0 / (b * b)
            }
        })
        .fold(0.0, f64::max);
    let peak = u_modes
        .profiles()
        .flat_map(|p| p.iter())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let far = u_modes.profiles().map(|p| p[p.len() - 1].norm()).fold(0.0, f64::max);
    Ok(SolveReport {
        residual_l2,
        relative_residual: if f_norm > 0.0 { residual_l2 / f_norm } else { residual_l2 },
        bc_violation,
        moment_diagnostics: check_moments(&data.f, grid.dim),
        per_mode_condition,
        truncation_estimate: if peak > 0.0 { far / peak } else { 0.0 },
    })
}

fn solve_kind(data: &ScalarBVPData, kind: ProblemKind) -> Result<(ScalarField, SolveReport)> {
    if data.kind != kind {
        return Err(Error::PrereqViolated(format!("expected {kind:?} data, got {:?}", data.kind)));
    }
    solve_scalar(data, &SolverOptions::default())
}

/// `-Δu + Gu = f`, `∂₀²u|₀ = h`.
pub fn solve_scalar_dirichlet_type(data: &ScalarBVPData) -> Result<(ScalarField, SolveReport)> {
    solve_kind(data, ProblemKind::DirichletType)
}

/// `-Δu + G′u = f`, `∂₀u|₀ = h`.
pub fn solve_scalar_neumann_type(data: &ScalarBVPData) -> Result<(ScalarField, SolveReport)> {
    solve_kind(data, ProblemKind::NeumannType)
}

/// Problem kind governing component `K` of the q-form problem.
pub fn component_kind(index: &crate::exterior::MultiIndex) -> ProblemKind {
    if index.contains_normal() {
        ProblemKind::NeumannType
    } else {
        ProblemKind::DirichletType
    }
}

/// `(-Δ + G)φ = α`: components containing axis 0 carry the Neumann-type
/// problem, the rest the Dirichlet-type problem, both with zero boundary data.
pub fn solve_qform(alpha: &FormField) -> Result<(FormField, SolveReport)> {
    solve_qform_with(alpha, &SolverOptions::default())
}

pub fn solve_qform_with(alpha: &FormField, opts: &SolverOptions) -> Result<(FormField, SolveReport)> {
    let indices = alpha.indices();
    let mut comps = Vec::with_capacity(indices.len());
    let mut reports = Vec::with_capacity(indices.len());
    for (index, f) in indices.iter().zip(alpha.components()) {
        let data = ScalarBVPData::homogeneous(f.clone(), component_kind(index));
        let (u, r) = solve_scalar(&data, opts).map_err(|e| Error::Component {
            index: index.clone(),
            source: Box::new(e),
        })?;
        comps.push(u);
        reports.push(r);
    }
    let phi = FormField::new(alpha.degree(), alpha.grid(), comps)?;
    let labels: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
    let f_norm = alpha
        .components()
        .iter()
        .map(|c| norm_sobolev(c, 0).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((phi, SolveReport::merge(&reports, &labels, f_norm)))
}

/// Removes the zero-mode solvability defect of `f` for the given problem kind
/// by subtracting a multiple of a fixed decaying profile from its `k = 0`
/// mode. The functional is evaluated with `rule`, matching the solver.
pub fn project_zero_mode(f: &ScalarField, kind: ProblemKind, rule: NormalRule) -> ScalarField {
    let grid: &Arc<StripGrid> = f.grid();
    let normal = grid.normal();
    let xs = normal.coords();
    let w = normal.weights(rule);
    let k = match kind {
        ProblemKind::DirichletType => 0,
        ProblemKind::NeumannType => 1,
    };
    let functional = |v: &[C64]| -> C64 {
        v.iter()
            .zip(&xs)
            .zip(&w)
            .map(|((v, x), w)| v * (x.powi(k) * w))
            .sum()
    };
    let profile: Vec<C64> = xs.iter().map(|x| C64::new((-x).exp(), 0.0)).collect();
    let unit = functional(&profile);
    let mut modes = tangential_dft(f);
    let zero = grid.slot(&vec![0; grid.dim]).expect("zero mode exists");
    let p = modes.profile_mut(zero);
    let defect = functional(p);
    p.iter_mut().zip(&profile).for_each(|(v, b)| *v -= defect / unit * b);
    modes.to_field()
}

/// Exact per-mode data `(f̂, ĥ)` for the solution `û = e^{-ωx}` on every mode.
pub fn manufactured_mode_data(kind: ProblemKind, beta: f64) -> (ExpSum, C64) {
    let w = omega(beta);
    let f = ExpSum::single(C64::new(beta * beta, 0.0), w);
    let h = match kind {
        ProblemKind::DirichletType => w * w,
        ProblemKind::NeumannType => -w,
    };
    (f, C64::new(h, 0.0))
}
