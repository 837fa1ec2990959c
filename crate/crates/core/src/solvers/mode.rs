//! Closed-form solutions of the per-mode problems
//!
//! ```text
//! Dirichlet type:  -u″ + β²u - ω e^{-ωx} u′(0) = f,   u″(0) = h
//! Neumann type:    -u″ + β²u + ω² e^{-ωx} u(0) = f,   u′(0) = h
//! ```
//!
//! with decay as `x → ∞`. Data are either sampled on the normal grid (and
//! taken to vanish beyond it) or given as exponential sums, for which every
//! integral is exact.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::strip::quadrature::{left_convolution, right_convolution};
use crate::strip::{NormalGrid, NormalRule};
use crate::symbols::{green_of_khat, m1, m2, omega};


#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// Boundary condition on `u″(0)`; the operator carries `G`.
    DirichletType,
    /// Boundary condition on `u′(0)`; the operator carries `G′`.
    NeumannType,
}

/// Zero-mode solvability integral: `∫f` for the Dirichlet type, `∫y f` for
/// the Neumann type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroModeCheck {
    pub condition: &'static str,
    pub value: C64,
}

/// `Σ_j c_j e^{-a_j x}` with every `a_j > 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpSum {
    pub terms: Vec<(C64, f64)>,
}

impl ExpSum {
    pub fn new(terms: Vec<(C64, f64)>) -> Self {
        assert!(terms.iter().all(|(_, a)| *a > 0.0), "decay rates must be positive");
        ExpSum { terms }
    }

    pub fn single(c: C64, rate: f64) -> Self {
        Self::new(vec![(c, rate)])
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.terms.iter().map(|(c, a)| c * (-a * x).exp()).sum()
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<C64> {
        xs.iter().map(|x| self.eval(*x)).collect()
    }

    /// `∫_0^∞ e^{-βy} f(y) dy`.
    fn laplace(&self, beta: f64) -> C64 {
        self.terms.iter().map(|(c, a)| c / (beta + a)).sum()
    }

    fn moment(&self, k: i32) -> C64 {
        self.terms.iter().map(|(c, a)| c / a.powi(k + 1)).sum()
    }
}

fn e(x: f64) -> f64 {
    x.exp()
}

/// `Σ c_j G_D[e^{-a_j ·}](x)` where `G_D` is the Dirichlet Green's operator of
/// `-∂² + β²`, or the Neumann Green's operator `J` when `neumann` is set.
fn green_exp(f: &ExpSum, beta: f64, x: f64, neumann: bool) -> C64 {
    f.terms
        .iter()
        .map(|(c, a)| {
            let d = beta - a;
            // (e^{-ax} - e^{-βx}) / (β² - a²), written to survive d → 0
            let dx = d * x;
            let phi = if dx.abs() < 1e-300 { 1.0 } else { dx.exp_m1() / dx };
            let mut v = e(-beta * x) * x * phi / (beta + a);
            if neumann {
                v += e(-beta * x) / (beta * (beta + a));
            }
            c * v
        })
        .sum()
}

/// Mode data reduced to the functionals every closed form needs.
trait ModeDatum {
    fn at_zero(&self) -> C64;
    /// `∫ e^{-βy} f`, `β > 0`.
    fn laplace(&self, beta: f64) -> C64;
    /// Dirichlet (`neumann = false`) or Neumann Green's operator applied at
    /// every output node.
    fn green(&self, beta: f64, neumann: bool) -> Vec<C64>;
    /// `∫ y^k f`, `k ∈ {0, 1}`.
    fn moment(&self, k: i32) -> C64;
    /// `∫_x^∞ (t - x) f(t) dt` at every output node.
    fn tail(&self) -> Vec<C64>;
    fn nodes(&self) -> &[f64];
}

struct Sampled<'a> {
    f: &'a [C64],
    xs: Vec<f64>,
    h: f64,
    rule: NormalRule,
}

impl ModeDatum for Sampled<'_> {
    fn at_zero(&self) -> C64 {
        self.f[0]
    }

    fn laplace(&self, beta: f64) -> C64 {
        right_convolution(self.f, beta, self.h, self.rule)[0]
    }

    fn green(&self, beta: f64, neumann: bool) -> Vec<C64> {
        let l = left_convolution(self.f, beta, self.h, self.rule);
        let r = right_convolution(self.f, beta, self.h, self.rule);
        let image = if neumann { 1.0 } else { -1.0 };
        let i0 = r[0];
        self.xs
            .iter()
            .enumerate()
            .map(|(i, x)| (l[i] + r[i] + i0 * (image * e(-beta * x))) / (2.0 * beta))
            .collect()
    }

    fn moment(&self, k: i32) -> C64 {
        let w = self.rule.weights(self.f.len(), self.h);
        self.f
            .iter()
            .zip(&self.xs)
            .zip(&w)
            .map(|((f, x), w)| f * (x.powi(k) * w))
            .sum()
    }

    fn tail(&self) -> Vec<C64> {
        let yf: Vec<C64> = self.f.iter().zip(&self.xs).map(|(f, x)| f * *x).collect();
        let a = right_convolution(&yf, 0.0, self.h, self.rule);
        let b = right_convolution(self.f, 0.0, self.h, self.rule);
        self.xs.iter().enumerate().map(|(i, x)| a[i] - b[i] * *x).collect()
    }

    fn nodes(&self) -> &[f64] {
        &self.xs
    }
}

struct Analytic<'a> {
    f: &'a ExpSum,
    xs: &'a [f64],
}

impl ModeDatum for Analytic<'_> {
    fn at_zero(&self) -> C64 {
        self.f.eval(0.0)
    }

    fn laplace(&self, beta: f64) -> C64 {
        self.f.laplace(beta)
    }

    fn green(&self, beta: f64, neumann: bool) -> Vec<C64> {
        self.xs.iter().map(|x| green_exp(self.f, beta, *x, neumann)).collect()
    }

    fn moment(&self, k: i32) -> C64 {
        self.f.moment(k)
    }

    fn tail(&self) -> Vec<C64> {
        self.xs
            .iter()
            .map(|x| self.f.terms.iter().map(|(c, a)| c * (e(-a * x) / (a * a))).sum())
            .collect()
    }

    fn nodes(&self) -> &[f64] {
        self.xs
    }
}

/// Solvability functional of the zero mode.
fn zero_mode_check(kind: ProblemKind, f: &dyn ModeDatum) -> ZeroModeCheck {
    match kind {
        ProblemKind::DirichletType => ZeroModeCheck {
            condition: "integral of the zero mode",
            value: f.moment(0),
        },
        ProblemKind::NeumannType => ZeroModeCheck {
            condition: "first normal moment of the zero mode",
            value: f.moment(1),
        },
    }
}

fn solve(kind: ProblemKind, beta: f64, f: &dyn ModeDatum, h: C64) -> Vec<C64> {
    let xs = f.nodes();
    if beta == 0.0 {
        // Double integration with decay; solvability is checked by the caller.
        let tail = f.tail();
        return match kind {
            ProblemKind::DirichletType => {
                // u′(0) = c = -(f(0) + h), u = -c e^{-x} - ∫_x^∞ (t - x) f
                let c = -(f.at_zero() + h);
                xs.iter().zip(tail).map(|(x, t)| -c * e(-x) - t).collect()
            }
            ProblemKind::NeumannType => {
                // u(0) = ∫f - h, u = u(0) e^{-x} - ∫_x^∞ (t - x) f
                let a = f.moment(0) - h;
                xs.iter().zip(tail).map(|(x, t)| a * e(-x) - t).collect()
            }
        };
    }
    let w = omega(beta);
    let b2 = beta * beta;
    let lap = f.laplace(beta);
    match kind {
        ProblemKind::DirichletType => {
            let f0 = f.at_zero();
            let c = (lap * beta - h - f0) * m2(beta);
            let a = (h + f0) / (1.0 + 2.0 * b2 + beta * w) + lap * (m1(beta) / beta);
            let gd = f.green(beta, false);
            xs.iter()
                .zip(gd)
                .map(|(x, g)| g + c * (w * green_of_khat(beta, *x)) + a * e(-beta * x))
                .collect()
        }
        ProblemKind::NeumannType => {
            // Lift u = v - (h/ω) e^{-ωx}; v solves the h = 0 problem with datum
            // f + (β²/ω) h e^{-ωx}.
            let lift = h * (b2 / w);
            let lap_v = lap + lift / (beta + w);
            let a_v = lap_v * m2(beta);
            let coef = lift - a_v * (w * w);
            let jf = f.green(beta, true);
            xs.iter()
                .zip(jf)
                .map(|(x, j)| {
                    let je = (w / beta) * e(-beta * x) - e(-w * x);
                    j + coef * je - h * (e(-w * x) / w)
                })
                .collect()
        }
    }
}

/// Solves one mode from samples on the normal grid. The returned check is the
/// zero-mode solvability functional when `β = 0`.
pub fn solve_mode_sampled(
    kind: ProblemKind,
    beta: f64,
    f: &[C64],
    h: C64,
    grid: &NormalGrid,
    rule: NormalRule,
) -> (Vec<C64>, Option<ZeroModeCheck>) {
    let datum = Sampled {
        f,
        xs: grid.coords(),
        h: grid.spacing(),
        rule,
    };
    let check = (beta == 0.0).then(|| zero_mode_check(kind, &datum));
    (solve(kind, beta, &datum, h), check)
}

/// Solves one mode for exponential-sum data, exactly up to rounding.
pub fn solve_mode_exp(
    kind: ProblemKind,
    beta: f64,
    f: &ExpSum,
    h: C64,
    xs: &[f64],
) -> (Vec<C64>, Option<ZeroModeCheck>) {
    let datum = Analytic { f, xs };
    let check = (beta == 0.0).then(|| zero_mode_check(kind, &datum));
    (solve(kind, beta, &datum, h), check)
}

/// Applies the per-mode operator to an exponential sum, returning the
/// interior datum (again an exponential sum) and the boundary datum.
pub fn forward_exp(kind: ProblemKind, beta: f64, u: &ExpSum) -> (ExpSum, C64) {
    let w = omega(beta);
    let mut terms: Vec<(C64, f64)> = u.terms.iter().map(|(c, a)| (c * (beta * beta - a * a), *a)).collect();
    let u0 = u.eval(0.0);
    let du0: C64 = u.terms.iter().map(|(c, a)| -c * *a).sum();
    let d2u0: C64 = u.terms.iter().map(|(c, a)| c * (a * a)).sum();
    let (extra, h) = match kind {
        ProblemKind::DirichletType => (-du0 * w, d2u0),
        ProblemKind::NeumannType => (u0 * (w * w), du0),
    };
    terms.push((extra, w));
    (ExpSum::new(terms), h)
}
