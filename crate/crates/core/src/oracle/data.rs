//! Builtin data generators: zero data, a single Gaussian bump, band-limited
//! random data, and manufactured q-forms with known solutions.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{FormField, MultiIndex};
use crate::solvers::{component_kind, forward_exp, project_zero_mode, ExpSum, ProblemKind};
use crate::strip::{BoundaryField, ModeSet, NormalRule, ScalarField, StripGrid};

fn default_true() -> bool {
    true
}

fn default_center() -> f64 {
    1.5
}

fn default_width() -> f64 {
    0.5
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case")]
pub enum DataSpec {
    Zero,
    GaussianBump {
        #[serde(default = "default_center")]
        center: f64,
        #[serde(default = "default_width")]
        width: f64,
        #[serde(default = "default_one")]
        amplitude: f64,
        /// Tangential frequency; the zero vector when absent.
        #[serde(default)]
        mode: Option<Vec<i64>>,
        /// Remove the zero-mode solvability defect before solving.
        #[serde(default = "default_true")]
        project: bool,
    },
    BandLimitedRandom {
        /// Largest `|k_j|`; `M/4` when absent.
        #[serde(default)]
        band: Option<usize>,
        #[serde(default = "default_one")]
        amplitude: f64,
        /// Also draw random boundary data for the scalar problems.
        #[serde(default)]
        boundary: bool,
        #[serde(default = "default_true")]
        project: bool,
    },
    Manufactured {
        /// Number of random nonzero modes per component.
        #[serde(default = "default_modes")]
        modes: usize,
    },
}

fn default_modes() -> usize {
    3
}

/// Interior data per component, boundary data for the scalar problems, and the
/// exact solution when known.
#[derive(Debug, Clone)]
pub struct Generated {
    pub alpha: FormField,
    pub boundary: Option<BoundaryField>,
    pub exact: Option<FormField>,
}

fn bump(x: f64, center: f64, width: f64) -> f64 {
    (-((x - center) / width).powi(2)).exp()
}

fn plane_wave(grid: &StripGrid, k: &[i64], y: &[f64]) -> C64 {
    let phase: f64 = k
        .iter()
        .zip(y)
        .map(|(k, y)| 2.0 * std::f64::consts::PI * *k as f64 / grid.period * y)
        .sum();
    C64::from_polar(1.0, phase)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller keeps the stream independent of distribution crates
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn band_modes(grid: &StripGrid, band: usize) -> Vec<usize> {
    (0..grid.layer_len())
        .filter(|&t| grid.frequency(t).iter().all(|k| k.unsigned_abs() as usize <= band))
        .collect()
}

/// Random band-limited interior field: Gaussian bumps in `x₀` with random
/// centers and widths, coefficients decaying like `1/(1 + |k|²)`.
pub fn band_limited_field(grid: &Arc<StripGrid>, band: usize, amplitude: f64, rng: &mut ChaCha8Rng) -> ScalarField {
    let xs = grid.normal().coords();
    let active = band_modes(grid, band);
    let mut params = vec![None; grid.layer_len()];
    for &t in &active {
        let k2: i64 = grid.frequency(t).iter().map(|k| k * k).sum();
        let c = C64::new(gaussian(rng), gaussian(rng)) * (amplitude / (1.0 + k2 as f64));
        let center = rng.gen_range(1.0..3.0);
        let width = rng.gen_range(0.4..1.0);
        params[t] = Some((c, center, width));
    }
    ModeSet::from_modes(grid, |t, _, out| {
        if let Some((c, center, width)) = params[t] {
            for (o, x) in out.iter_mut().zip(&xs) {
                *o = c * bump(*x, center, width);
            }
        }
    })
    .to_field()
}

pub fn band_limited_boundary(grid: &Arc<StripGrid>, band: usize, amplitude: f64, rng: &mut ChaCha8Rng) -> BoundaryField {
    let mut coeffs = vec![C64::new(0.0, 0.0); grid.layer_len()];
    for t in band_modes(grid, band) {
        let k2: i64 = grid.frequency(t).iter().map(|k| k * k).sum();
        coeffs[t] = C64::new(gaussian(rng), gaussian(rng)) * (amplitude / (1.0 + k2 as f64));
    }
    BoundaryField::from_coefficients(grid, coeffs)
}

/// Manufactured component profile satisfying the component's boundary
/// condition: `p″(0) = 0` for `K ∌ 0`, `p′(0) = 0` for `K ∋ 0`.
pub fn manufactured_profile(kind: ProblemKind, a: f64, b: f64) -> ExpSum {
    let second = match kind {
        ProblemKind::DirichletType => -(a * a) / (b * b),
        ProblemKind::NeumannType => -a / b,
    };
    ExpSum::new(vec![(C64::new(1.0, 0.0), a), (C64::new(second, 0.0), b)])
}

/// Builds `(α, φ*)` with `φ*_K = Σ_k c_k p_k(x₀) e^{iκ·x'}` over `modes` random
/// nonzero frequencies with `|k_j| ≤ M/4`, and `α` sampled from the exact
/// forward image.
pub fn manufactured_form(grid: &Arc<StripGrid>, degree: usize, modes: usize, rng: &mut ChaCha8Rng) -> (FormField, FormField) {
    let xs = grid.normal().coords();
    let band = (grid.points / 4).max(1);
    let candidates: Vec<usize> = band_modes(grid, band)
        .into_iter()
        .filter(|&t| grid.beta(t) > 0.0)
        .collect();
    let mut alpha = Vec::new();
    let mut exact = Vec::new();
    for index in MultiIndex::all(grid.dim, degree) {
        let kind = component_kind(&index);
        let mut picks: Vec<(usize, C64, ExpSum)> = Vec::new();
        for _ in 0..modes {
            let t = candidates[rng.gen_range(0..candidates.len())];
            let c = C64::new(gaussian(rng), gaussian(rng));
            let a = rng.gen_range(1.5..3.0);
            picks.push((t, c, manufactured_profile(kind, a, a + 1.0)));
        }
        let sum_modes = |forward: bool| {
            let mut set = ModeSet::zeros(grid);
            for (t, c, p) in &picks {
                let beta = grid.beta(*t);
                let profile = if forward { forward_exp(kind, beta, p).0 } else { p.clone() };
                for (o, x) in set.profile_mut(*t).iter_mut().zip(&xs) {
                    *o += c * profile.eval(*x);
                }
            }
            set.to_field()
        };
        alpha.push(sum_modes(true));
        exact.push(sum_modes(false));
    }
    (
        FormField::new(degree, grid, alpha).expect("component count matches"),
        FormField::new(degree, grid, exact).expect("component count matches"),
    )
}

/// Kind of each component's scalar problem, or the override for degree-0
/// scalar runs.
fn kind_for(index: &MultiIndex, scalar_kind: Option<ProblemKind>) -> ProblemKind {
    scalar_kind.unwrap_or_else(|| component_kind(index))
}

pub fn generate(
    spec: &DataSpec,
    grid: &Arc<StripGrid>,
    degree: usize,
    scalar_kind: Option<ProblemKind>,
    seed: u64,
) -> Result<Generated> {
    if degree > grid.dim + 1 {
        return Err(Error::DegreeOverflow {
            degree,
            max: grid.dim + 1,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = MultiIndex::all(grid.dim, degree);
    let project = |f: ScalarField, index: &MultiIndex, on: bool| {
        if on {
            project_zero_mode(&f, kind_for(index, scalar_kind), NormalRule::Gregory)
        } else {
            f
        }
    };
    match spec {
        DataSpec::Zero => Ok(Generated {
            alpha: FormField::zeros(grid, degree),
            boundary: scalar_kind.map(|_| BoundaryField::zeros(grid)),
            exact: Some(FormField::zeros(grid, degree)),
        }),
        DataSpec::GaussianBump {
            center,
            width,
            amplitude,
            mode,
            project: on,
        } => {
            let k = mode.clone().unwrap_or_else(|| vec![0; grid.dim]);
            if k.len() != grid.dim || grid.slot(&k).is_none() {
                return Err(Error::InvalidGrid(format!("mode {k:?} is not resolved by the grid")));
            }
            let comps = indices
                .iter()
                .map(|index| {
                    let f = ScalarField::from_fn(grid, |x, y| plane_wave(grid, &k, y) * (amplitude * bump(x, *center, *width)));
                    project(f, index, *on)
                })
                .collect();
            Ok(Generated {
                alpha: FormField::new(degree, grid, comps)?,
                boundary: scalar_kind.map(|_| BoundaryField::zeros(grid)),
                exact: None,
            })
        }
        DataSpec::BandLimitedRandom {
            band,
            amplitude,
            boundary,
            project: on,
        } => {
            let band = band.unwrap_or(grid.points / 4);
            let comps = indices
                .iter()
                .map(|index| project(band_limited_field(grid, band, *amplitude, &mut rng), index, *on))
                .collect();
            let h = scalar_kind.map(|_| {
                if *boundary {
                    band_limited_boundary(grid, band, *amplitude, &mut rng)
                } else {
                    BoundaryField::zeros(grid)
                }
            });
            Ok(Generated {
                alpha: FormField::new(degree, grid, comps)?,
                boundary: h,
                exact: None,
            })
        }
        DataSpec::Manufactured { modes } => {
            let (alpha, exact) = manufactured_form(grid, degree, *modes, &mut rng);
            Ok(Generated {
                alpha,
                boundary: scalar_kind.map(|_| BoundaryField::zeros(grid)),
                exact: Some(exact),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn manufactured_profiles_meet_their_boundary_conditions() {
        let p = manufactured_profile(ProblemKind::DirichletType, 2.0, 3.0);
        let d2: C64 = p.terms.iter().map(|(c, a)| c * (a * a)).sum();
        assert!(d2.norm() < 1e-15);
        let p = manufactured_profile(ProblemKind::NeumannType, 2.0, 3.0);
        let d1: C64 = p.terms.iter().map(|(c, a)| -c * *a).sum();
        assert!(d1.norm() < 1e-15);
    }

    #[test]
    fn generators_are_deterministic_and_band_limited() {
        let g = StripGrid::new(2, 2.0 * PI, 16, 12.0, 129).unwrap();
        let spec = DataSpec::BandLimitedRandom {
            band: None,
            amplitude: 1.0,
            boundary: true,
            project: true,
        };
        let a = generate(&spec, &g, 1, None, 7).unwrap();
        let b = generate(&spec, &g, 1, None, 7).unwrap();
        assert_eq!(a.alpha, b.alpha);
        let c = generate(&spec, &g, 1, None, 8).unwrap();
        assert_ne!(a.alpha, c.alpha);
        let modes = crate::strip::tangential_dft(&a.alpha.components()[0]);
        for t in 0..g.layer_len() {
            if g.frequency(t).iter().any(|k| k.abs() > 4) {
                assert!(modes.profile(t).iter().all(|v| v.norm() < 1e-12));
            }
        }
    }

    #[test]
    fn json_spec_round_trip() {
        let s = r#"{"generator":"gaussian-bump","center":2.0,"mode":[1]}"#;
        let spec: DataSpec = serde_json::from_str(s).unwrap();
        assert_eq!(
            spec,
            DataSpec::GaussianBump {
                center: 2.0,
                width: 0.5,
                amplitude: 1.0,
                mode: Some(vec![1]),
                project: true
            }
        );
        let z: DataSpec = serde_json::from_str(r#"{"generator":"zero"}"#).unwrap();
        assert_eq!(z, DataSpec::Zero);
    }
}
