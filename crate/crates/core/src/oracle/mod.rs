//! Independent verifiers: a finite-difference per-mode solver, the `W¹`
//! adjointness gap, and a-priori-estimate ratio ensembles.

pub mod data;
pub mod fd;

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{d, FormField};
use crate::ops::{d_star_with_tol, default_dom_tol, in_dom_dstar, project_into_dom_dstar};
use crate::solvers::{project_zero_mode, solve_mode_sampled, solve_scalar, ProblemKind, ScalarBVPData, SolverOptions};
use crate::strip::{boundary_norm, inner_sobolev_form, norm_sobolev, NormalGrid, NormalRule, StripGrid};

pub use fd::{fd_mode_solve, fd_mode_solve_full, fd_mode_system, Closure, FdSolution, OracleConfig};

/// `|⟨du, ψ⟩₁ - ⟨u, d*ψ⟩₁|`.
pub fn adjoint_gap(u: &FormField, psi: &FormField) -> Result<f64> {
    adjoint_gap_with_tol(u, psi, default_dom_tol(psi))
}

pub fn adjoint_gap_with_tol(u: &FormField, psi: &FormField, tol: f64) -> Result<f64> {
    if psi.degree() != u.degree() + 1 {
        return Err(Error::DegreeMismatch {
            left: u.degree() + 1,
            right: psi.degree(),
        });
    }
    let m = in_dom_dstar(psi, 1, tol)?;
    if !m.member {
        return Err(Error::NotInDomain(m));
    }
    let lhs = inner_sobolev_form(&d(u)?, psi, 1)?;
    let rhs = inner_sobolev_form(u, &d_star_with_tol(psi, tol)?, 1)?;
    Ok((lhs - rhs).norm())
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Smooth decaying random form: every tangential mode with `|k_j| ≤ band`
/// carries `c (1 + x₀)^p e^{-a x₀}` with random `c`, `p ∈ {0, 1, 2}` and
/// `a ∈ [1, 2]`.
pub fn random_smooth_form(grid: &Arc<StripGrid>, degree: usize, band: usize, rng: &mut ChaCha8Rng) -> FormField {
    let comps = (0..crate::exterior::MultiIndex::count(grid.dim, degree))
        .map(|_| {
            let params: Vec<Option<(C64, i32, f64)>> = (0..grid.layer_len())
                .map(|t| {
                    let inside = grid.frequency(t).iter().all(|k| k.unsigned_abs() as usize <= band);
                    inside.then(|| {
                        let k2: i64 = grid.frequency(t).iter().map(|k| k * k).sum();
                        let c = C64::new(gaussian(rng), gaussian(rng)) / (1.0 + k2 as f64);
                        (c, rng.gen_range(0..3), rng.gen_range(1.0..2.0))
                    })
                })
                .collect();
            crate::strip::ModeSet::from_modes(grid, |t, _, out| {
                if let Some((c, p, a)) = params[t] {
                    let normal = grid.normal();
                    for (i, o) in out.iter_mut().enumerate() {
                        let x = normal.coord(i);
                        *o = c * ((1.0 + x).powi(p) * (-a * x).exp());
                    }
                }
            })
            .to_field()
        })
        .collect();
    FormField::new(degree, grid, comps).expect("component count matches")
}

/// Random `(u, ψ)` with `ψ ∈ dom d*`, for adjointness checks.
pub fn random_adjoint_pair(grid: &Arc<StripGrid>, degree: usize, seed: u64) -> Result<(FormField, FormField)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let band = (grid.points / 4).max(1);
    let u = random_smooth_form(grid, degree, band, &mut rng);
    let raw = random_smooth_form(grid, degree + 1, band, &mut rng);
    Ok((u, project_into_dom_dstar(&raw, 1)?))
}

/// Relative `L²` gap between the closed-form and finite-difference solutions
/// of one mode, both on the oracle grid.
pub fn closed_form_gap(beta: f64, f: &[C64], h: C64, kind: ProblemKind, cfg: &OracleConfig) -> Result<f64> {
    let grid = cfg.grid()?;
    let fd = fd_mode_solve(beta, f, h, kind, cfg)?;
    let (cf, _) = solve_mode_sampled(kind, beta, f, h, &grid, NormalRule::Gregory);
    let w = grid.weights(NormalRule::Trapezoid);
    let l2 = |v: &mut dyn Iterator<Item = f64>| v.zip(&w).map(|(a, w)| a * a * w).sum::<f64>().sqrt();
    let num = l2(&mut fd.iter().zip(&cf).map(|(a, b)| (a - b).norm()));
    let den = l2(&mut cf.iter().map(|v| v.norm()));
    Ok(if den > 0.0 { num / den } else { num })
}

/// Random smooth mode datum: three Gaussian bumps plus a random boundary
/// value. At `β = 0` the datum is made compatible with the zero-mode
/// condition of `kind`.
pub fn random_mode_datum(grid: &NormalGrid, beta: f64, kind: ProblemKind, rng: &mut ChaCha8Rng) -> (Vec<C64>, C64) {
    let bumps: Vec<(C64, f64, f64)> = (0..3)
        .map(|_| {
            (
                C64::new(gaussian(rng), gaussian(rng)),
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.4..1.0),
            )
        })
        .collect();
    let xs = grid.coords();
    let mut f: Vec<C64> = xs
        .iter()
        .map(|x| bumps.iter().map(|(c, m, s)| c * (-((x - m) / s).powi(2)).exp()).sum())
        .collect();
    let h = C64::new(gaussian(rng), gaussian(rng));
    if beta == 0.0 {
        let w = grid.weights(NormalRule::Gregory);
        let p = match kind {
            ProblemKind::DirichletType => 0,
            ProblemKind::NeumannType => 1,
        };
        let func = |v: &[C64]| -> C64 { v.iter().zip(&xs).zip(&w).map(|((v, x), w)| v * (x.powi(p) * w)).sum() };
        let profile: Vec<C64> = xs.iter().map(|x| C64::new((-x).exp(), 0.0)).collect();
        let c = func(&f) / func(&profile);
        f.iter_mut().zip(&profile).for_each(|(v, b)| *v -= c * b);
    }
    (f, h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub instances: usize,
    pub seed: u64,
    pub kind: ProblemKind,
    /// Largest `|k_j|`; `M/4` when absent.
    pub band: Option<usize>,
    pub amplitude: f64,
    /// Draw nonzero boundary data.
    pub boundary: bool,
}

impl EnsembleConfig {
    pub fn new(instances: usize, seed: u64, kind: ProblemKind) -> Self {
        EnsembleConfig {
            instances,
            seed,
            kind,
            band: None,
            amplitude: 1.0,
            boundary: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub max: f64,
    pub median: f64,
    /// Per instance; `None` for skipped or failed instances.
    pub ratios: Vec<Option<f64>>,
    pub skipped: usize,
    pub failures: Vec<String>,
}

/// Sobolev order of the boundary datum in the estimate: `-1/2` for the
/// second-derivative condition, `+1/2` for the first-derivative one.
pub fn boundary_order(kind: ProblemKind) -> f64 {
    match kind {
        ProblemKind::DirichletType => -0.5,
        ProblemKind::NeumannType => 0.5,
    }
}

fn instance_ratio(grid: &Arc<StripGrid>, cfg: &EnsembleConfig, index: usize) -> Result<Option<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let band = cfg.band.unwrap_or(grid.points / 4);
    let raw = data::band_limited_field(grid, band, cfg.amplitude, &mut rng);
    let f = project_zero_mode(&raw, cfg.kind, NormalRule::Gregory);
    let h = if cfg.boundary {
        data::band_limited_boundary(grid, band, cfg.amplitude, &mut rng)
    } else {
        crate::strip::BoundaryField::zeros(grid)
    };
    let bn = boundary_norm(&h, boundary_order(cfg.kind));
    let problem = ScalarBVPData::new(f, h, cfg.kind)?;
    let (u, _) = solve_scalar(&problem, &SolverOptions::default())?;
    let num = norm_sobolev(&u, 2);
    let den = norm_sobolev(&problem.f, 0) + bn + norm_sobolev(&u, 1);
    if den == 0.0 {
        return Ok(None);
    }
    Ok(Some(num / den))
}

/// Ratios `‖u‖₂ / (‖f‖₀ + ‖h‖_{∓1/2} + ‖u‖₁)` over random band-limited,
/// zero-mode-compatible data. Instance `i` draws from stream `i` of the
/// seeded generator, so the report does not depend on scheduling.
pub fn estimate_ratio_ensemble(grid: &Arc<StripGrid>, cfg: &EnsembleConfig) -> Result<EnsembleReport> {
    if cfg.instances == 0 {
        return Err(Error::PrereqViolated("ensemble needs at least one instance".into()));
    }
    let results: Vec<Result<Option<f64>>> = (0..cfg.instances)
        .into_par_iter()
        .map(|i| instance_ratio(grid, cfg, i))
        .collect();
    let mut ratios = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    let mut skipped = 0;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(Some(v)) => ratios.push(Some(v)),
            Ok(None) => {
                skipped += 1;
                ratios.push(None);
            }
            Err(e) => {
                failures.push(format!("instance {i}: {e}"));
                ratios.push(None);
            }
        }
    }
    let mut vals: Vec<f64> = ratios.iter().flatten().copied().collect();
    vals.sort_by(f64::total_cmp);
    let max = vals.last().copied().unwrap_or(f64::NAN);
    let median = match vals.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => vals[n / 2],
        n => 0.5 * (vals[n / 2 - 1] + vals[n / 2]),
    };
    Ok(EnsembleReport {
        max,
        median,
        ratios,
        skipped,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::MultiIndex;
    use crate::strip::ScalarField;
    use std::f64::consts::PI;

    #[test]
    fn adjoint_gap_is_small_and_linear() {
        let g = StripGrid::new(1, 2.0 * PI, 8, 16.0, 801).unwrap();
        let (u, psi) = random_adjoint_pair(&g, 0, 3).unwrap();
        let gap = adjoint_gap(&u, &psi).unwrap();
        let scale = crate::strip::norm_sobolev_form(&u, 2) * crate::strip::norm_sobolev_form(&psi, 2);
        assert!(gap < 5e-5 * scale, "{gap:.3e} vs {scale:.3e}");
        let gap2 = adjoint_gap(&u.scaled(C64::new(2.0, 0.0)), &psi).unwrap();
        assert!((gap2 - 2.0 * gap).abs() <= 1e-9 * gap.max(1e-300), "{gap2} {gap}");
    }

    #[test]
    fn adjoint_gap_for_constant_u() {
        let g = StripGrid::new(1, 2.0 * PI, 8, 16.0, 801).unwrap();
        let u = FormField::scalar(ScalarField::from_fn(&g, |_, _| C64::new(1.0, 0.0)));
        let (_, psi) = random_adjoint_pair(&g, 0, 5).unwrap();
        let gap = adjoint_gap(&u, &psi).unwrap();
        assert!(gap < 1e-4 * crate::strip::norm_sobolev_form(&psi, 2), "{gap:.3e}");
    }

    #[test]
    fn adjoint_gap_rejects_forms_outside_the_domain() {
        let g = StripGrid::new(1, 2.0 * PI, 8, 12.0, 257).unwrap();
        let u = FormField::zeros(&g, 0);
        let psi = FormField::single(
            &MultiIndex::new(vec![0], 1).unwrap(),
            ScalarField::from_fn(&g, |x, _| C64::new((-x).exp(), 0.0)),
        )
        .unwrap();
        assert!(matches!(adjoint_gap(&u, &psi), Err(Error::NotInDomain(_))));
    }

    #[test]
    fn fd_agrees_with_closed_form_at_second_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [ProblemKind::DirichletType, ProblemKind::NeumannType] {
            for beta in [0.0, 1.0, 2.0] {
                let fine = OracleConfig {
                    nodes: 1025,
                    ..OracleConfig::default()
                };
                let (f, h) = random_mode_datum(&fine.grid().unwrap(), beta, kind, &mut rng);
                let coarse = OracleConfig {
                    nodes: 513,
                    ..fine
                };
                let fc: Vec<C64> = f.iter().step_by(2).copied().collect();
                let a = closed_form_gap(beta, &fc, h, kind, &coarse).unwrap();
                let b = closed_form_gap(beta, &f, h, kind, &fine).unwrap();
                assert!(b < 1e-2, "{kind:?} β={beta}: {b}");
                assert!(a / b > 3.5, "{kind:?} β={beta}: {a} {b}");
            }
        }
    }

    #[test]
    fn ensemble_is_deterministic_and_finite() {
        let g = StripGrid::new(1, 2.0 * PI, 16, 12.0, 257).unwrap();
        for kind in [ProblemKind::DirichletType, ProblemKind::NeumannType] {
            let cfg = EnsembleConfig::new(6, 7, kind);
            let a = estimate_ratio_ensemble(&g, &cfg).unwrap();
            let b = estimate_ratio_ensemble(&g, &cfg).unwrap();
            assert_eq!(a, b);
            assert!(a.failures.is_empty(), "{:?}", a.failures);
            assert!(a.max.is_finite() && a.max > 0.0 && a.median <= a.max);
        }
    }

    #[test]
    fn zero_data_instance_is_skipped() {
        let g = StripGrid::new(1, 2.0 * PI, 8, 12.0, 129).unwrap();
        let cfg = EnsembleConfig {
            amplitude: 0.0,
            ..EnsembleConfig::new(1, 1, ProblemKind::DirichletType)
        };
        let r = estimate_ratio_ensemble(&g, &cfg).unwrap();
        assert_eq!(r.skipped, 1);
        assert_eq!(r.ratios, vec![None]);
        assert!(r.max.is_nan());
    }
}
