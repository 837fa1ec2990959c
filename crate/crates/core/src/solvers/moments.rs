//! Moment conditions the continuum half-space problem imposes on its datum in
//! low tangential dimension. They are diagnostics only: the strip solvers
//! enforce just their own zero-mode condition.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::strip::{NormalRule, ScalarField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCondition {
    pub name: String,
    /// `|∫ w f|` for the condition's weight `w`.
    pub value: f64,
    pub tol: f64,
    /// Whether the continuum problem needs this condition for the given `N`.
    pub required: bool,
    pub satisfied: bool,
}

/// Relative threshold: `|∫ w f| ≤ REL_TOL ∫ |w f|`.
pub const REL_TOL: f64 = 1e-8;

/// Evaluates `∫f` and the first moments `∫x_i f`, marking which ones the
/// continuum theory requires in tangential dimension `n_continuum`: none for
/// `N ≥ 4`, `∫f = 0` for `N = 2, 3`, and additionally `∫x₀f = ∫x₁f = 0` for
/// `N = 1`. Tangential coordinates are taken in `[-L/2, L/2]`.
pub fn check_moments(f: &ScalarField, n_continuum: usize) -> Vec<MomentCondition> {
    check_moments_with(f, n_continuum, NormalRule::Gregory)
}

pub fn check_moments_with(f: &ScalarField, n_continuum: usize, rule: NormalRule) -> Vec<MomentCondition> {
    let g = f.grid();
    let normal = g.normal();
    let wn = normal.weights(rule);
    let cell = (g.period / g.points as f64).powi(g.dim as i32);
    let layer = g.layer_len();
    let wrapped: Vec<Vec<f64>> = (0..layer)
        .map(|t| {
            g.tangential_coords(t)
                .into_iter()
                .map(|x| {
                    // the node at L/2 ≡ -L/2 is split evenly between both ends
                    let half = 0.5 * g.period;
                    if (x - half).abs() < 1e-12 * g.period {
                        0.0
                    } else if x > half {
                        x - g.period
                    } else {
                        x
                    }
                })
                .collect()
        })
        .collect();

    let integrate = |weight: &dyn Fn(usize, usize) -> f64| -> (C64, f64) {
        let mut signed = C64::new(0.0, 0.0);
        let mut abs = 0.0;
        for i in 0..g.nodes {
            for t in 0..layer {
                let w = weight(i, t) * wn[i] * cell;
                let v = f.at(i, t);
                signed += v * w;
                abs += v.norm() * w.abs();
            }
        }
        (signed, abs)
    };

    let mut out = Vec::new();
    let mut push = |name: String, (signed, abs): (C64, f64), required: bool| {
        let tol = REL_TOL * abs;
        let value = signed.norm();
        out.push(MomentCondition {
            name,
            value,
            tol,
            required,
            satisfied: !required || value <= tol,
        });
    };
    let need_mass = n_continuum <= 3;
    let need_first = n_continuum <= 1;
    push("integral".into(), integrate(&|_, _| 1.0), need_mass);
    push("moment x0".into(), integrate(&|i, _| normal.coord(i)), need_first);
    for axis in 1..=g.dim {
        push(
            format!("moment x{axis}"),
            integrate(&|_, t| wrapped[t][axis - 1]),
            need_first && axis == 1,
        );
    }
    out
}
