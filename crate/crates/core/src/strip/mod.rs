//! Discretization of the periodized half space `T^N_L × [0, X]`.
//!
//! Tangential directions are periodic with period `L` and `M` points per
//! axis; the normal axis is uniform with `P` nodes and spacing
//! `h = X / (P - 1)`. Field values are stored C-ordered with the normal index
//! outermost. Tangential derivatives are spectral, normal derivatives use
//! fourth-order finite differences.
//!
//! The tangential transform uses coefficient normalization:
//! `f̂(x₀, k) = M^{-N} Σ_{x'} f(x₀, x') e^{-2πi k·x'/L}`, so norms carry an
//! explicit factor `L^N`.

pub mod dump;
mod fft;
pub mod quadrature;
pub mod stencil;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::FormField;
use fft::TorusFft;
pub use quadrature::NormalRule;
use stencil::{boundary_weights, NormalStencil};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Uniform normal axis `[0, depth]` with `nodes` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalGrid {
    pub depth: f64,
    pub nodes: usize,
}

impl NormalGrid {
    pub fn new(depth: f64, nodes: usize) -> Result<Self> {
        if !(depth > 0.0 && depth.is_finite()) {
            return Err(Error::InvalidGrid(format!("X_max must be positive, got {depth}")));
        }
        if nodes < 9 {
            return Err(Error::InvalidGrid(format!("P must be >= 9, got {nodes}")));
        }
        Ok(NormalGrid { depth, nodes })
    }

    pub fn spacing(&self) -> f64 {
        self.depth / (self.nodes - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.coord(i)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> C64) -> Vec<C64> {
        (0..self.nodes).map(|i| f(self.coord(i))).collect()
    }

    pub fn weights(&self, rule: NormalRule) -> Vec<f64> {
        rule.weights(self.nodes, self.spacing())
    }

    /// Fourth-order derivative of a profile.
    pub fn derivative(&self, v: &[C64], order: usize) -> Vec<C64> {
        let st = NormalStencil::fourth_order(order, self.nodes, self.spacing());
        apply_stencil(&st, v)
    }

    /// `order`-th derivative of a profile at `x₀ = 0`.
    pub fn boundary_derivative(&self, v: &[C64], order: usize) -> Result<C64> {
        let w = boundary_weights(order, self.spacing());
        if w.len() > self.nodes {
            return Err(Error::GridTooCoarse {
                needed: w.len(),
                available: self.nodes,
            });
        }
        Ok(w.iter().zip(v).map(|(w, v)| v * *w).sum())
    }
}

pub(crate) fn apply_stencil(st: &NormalStencil, v: &[C64]) -> Vec<C64> {
    st.start
        .iter()
        .zip(&st.weights)
        .map(|(&s, w)| w.iter().zip(&v[s..]).map(|(w, v)| v * *w).sum())
        .collect()
}

/// Grid of the strip model. Equality compares parameters only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripGrid {
    /// Tangential dimension `N`.
    #[serde(rename = "N")]
    pub dim: usize,
    /// Tangential period `L`.
    #[serde(rename = "L")]
    pub period: f64,
    /// Points per tangential axis `M`.
    #[serde(rename = "M")]
    pub points: usize,
    /// Normal truncation `X_max`.
    #[serde(rename = "X_max")]
    pub depth: f64,
    /// Normal nodes `P`.
    #[serde(rename = "P")]
    pub nodes: usize,
}

impl StripGrid {
    pub fn new(dim: usize, period: f64, points: usize, depth: f64, nodes: usize) -> Result<Arc<Self>> {
        let g = StripGrid {
            dim,
            period,
            points,
            depth,
            nodes,
        };
        g.validate()?;
        Ok(Arc::new(g))
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::InvalidGrid("N must be >= 1".into()));
        }
        if self.points < 4 || self.points % 2 != 0 {
            return Err(Error::InvalidGrid(format!("M must be even and >= 4, got {}", self.points)));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidGrid(format!("L must be positive, got {}", self.period)));
        }
        NormalGrid::new(self.depth, self.nodes)?;
        Ok(())
    }

    pub fn normal(&self) -> NormalGrid {
        NormalGrid {
            depth: self.depth,
            nodes: self.nodes,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.normal().spacing()
    }

    /// Number of points in one tangential layer, `M^N`.
    pub fn layer_len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn len(&self) -> usize {
        self.layer_len() * self.nodes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis grid indices of flat tangential index `t`.
    pub fn tangential_index(&self, t: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        let mut rem = t;
        for a in (0..self.dim).rev() {
            idx[a] = rem % self.points;
            rem /= self.points;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Integer frequency vector in `{-M/2, …, M/2 - 1}^N` of spectral slot `t`.
    pub fn frequency(&self, t: usize) -> Vec<i64> {
        let half = self.points / 2;
        self.tangential_index(t)
            .into_iter()
            .map(|m| if m < half { m as i64 } else { m as i64 - self.points as i64 })
            .collect()
    }

    /// Spectral slot of an integer frequency vector, if representable.
    pub fn slot(&self, k: &[i64]) -> Option<usize> {
        let half = (self.points / 2) as i64;
        if k.len() != self.dim || k.iter().any(|&v| v < -half || v >= half) {
            return None;
        }
        let idx: Vec<usize> = k
            .iter()
            .map(|&v| if v >= 0 { v as usize } else { (v + self.points as i64) as usize })
            .collect();
        Some(self.flat_index(&idx))
    }

    /// Wave vector `2πk/L`.
    pub fn wavevector(&self, t: usize) -> Vec<f64> {
        self.frequency(t)
            .into_iter()
            .map(|k| 2.0 * PI * k as f64 / self.period)
            .collect()
    }

    /// Frequency magnitude `β = 2π|k|/L`.
    pub fn beta(&self, t: usize) -> f64 {
        self.wavevector(t).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Tangential coordinates `x'_j = m_j L / M`.
    pub fn tangential_coords(&self, t: usize) -> Vec<f64> {
        let dx = self.period / self.points as f64;
        self.tangential_index(t).into_iter().map(|m| m as f64 * dx).collect()
    }

    /// `L^N`, the torus volume.
    pub fn torus_volume(&self) -> f64 {
        self.period.powi(self.dim as i32)
    }

    pub(crate) fn fft(&self) -> TorusFft {
        TorusFft::new(self.points, self.dim)
    }
}

fn check_same(a: &StripGrid, b: &StripGrid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Complex field sampled on the whole strip.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<StripGrid>,
    values: Vec<C64>,
}

impl ScalarField {
    pub fn new(grid: Arc<StripGrid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFiniteInput("scalar field"));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: &Arc<StripGrid>) -> Self {
        ScalarField {
            values: vec![ZERO; grid.len()],
            grid: grid.clone(),
        }
    }

    /// Samples `f(x₀, x')`.
    pub fn from_fn(grid: &Arc<StripGrid>, f: impl Fn(f64, &[f64]) -> C64) -> Self {
        let layer = grid.layer_len();
        let coords: Vec<Vec<f64>> = (0..layer).map(|t| grid.tangential_coords(t)).collect();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nodes {
            let x0 = grid.normal().coord(i);
            values.extend(coords.iter().map(|xt| f(x0, xt)));
        }
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<StripGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn at(&self, node: usize, t: usize) -> C64 {
        self.values[node * self.grid.layer_len() + t]
    }

    pub fn layer(&self, node: usize) -> &[C64] {
        let n = self.grid.layer_len();
        &self.values[node * n..(node + 1) * n]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scaled(&self, a: C64) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * a).collect(),
        }
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: C64, other: &ScalarField) -> Result<Self> {
        check_same(&self.grid, &other.grid)?;
        Ok(ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect(),
        })
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == ZERO)
    }
}

/// Complex field on the boundary torus.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    grid: Arc<StripGrid>,
    values: Vec<C64>,
}

impl BoundaryField {
    pub fn new(grid: Arc<StripGrid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.layer_len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} boundary values, got {}",
                grid.layer_len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFiniteInput("boundary field"));
        }
        Ok(BoundaryField { grid, values })
    }

    pub fn zeros(grid: &Arc<StripGrid>) -> Self {
        BoundaryField {
            values: vec![ZERO; grid.layer_len()],
            grid: grid.clone(),
        }
    }

    pub fn from_fn(grid: &Arc<StripGrid>, f: impl Fn(&[f64]) -> C64) -> Self {
        BoundaryField {
            values: (0..grid.layer_len()).map(|t| f(&grid.tangential_coords(t))).collect(),
            grid: grid.clone(),
        }
    }

    /// Builds the field from Fourier coefficients indexed by spectral slot.
    pub fn from_coefficients(grid: &Arc<StripGrid>, mut coeffs: Vec<C64>) -> Self {
        assert_eq!(coeffs.len(), grid.layer_len());
        grid.fft().inverse(&mut coeffs);
        BoundaryField {
            grid: grid.clone(),
            values: coeffs,
        }
    }

    pub fn grid(&self) -> &Arc<StripGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Fourier coefficients `v̂(k)` indexed by spectral slot.
    pub fn coefficients(&self) -> Vec<C64> {
        let mut c = self.values.clone();
        self.grid.fft().forward(&mut c);
        c
    }

    pub fn scaled(&self, a: C64) -> Self {
        BoundaryField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * a).collect(),
        }
    }

    pub fn sub(&self, other: &BoundaryField) -> Result<Self> {
        check_same(&self.grid, &other.grid)?;
        Ok(BoundaryField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// One tangential frequency's profile along the normal axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    pub k: Vec<i64>,
    pub values: Vec<C64>,
}

/// Tangential spectrum of a strip field, stored mode-major so that each
/// normal profile is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    grid: Arc<StripGrid>,
    data: Vec<C64>,
}

impl ModeSet {
    pub fn zeros(grid: &Arc<StripGrid>) -> Self {
        ModeSet {
            data: vec![ZERO; grid.len()],
            grid: grid.clone(),
        }
    }

    pub fn grid(&self) -> &Arc<StripGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.layer_len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn profile(&self, t: usize) -> &[C64] {
        let p = self.grid.nodes;
        &self.data[t * p..(t + 1) * p]
    }

    pub fn profile_mut(&mut self, t: usize) -> &mut [C64] {
        let p = self.grid.nodes;
        &mut self.data[t * p..(t + 1) * p]
    }

    pub fn profiles(&self) -> impl Iterator<Item = &[C64]> {
        self.data.chunks(self.grid.nodes)
    }

    pub fn profiles_mut(&mut self) -> impl Iterator<Item = &mut [C64]> {
        self.data.chunks_mut(self.grid.nodes)
    }

    pub fn mode(&self, t: usize) -> ModeProfile {
        ModeProfile {
            k: self.grid.frequency(t),
            values: self.profile(t).to_vec(),
        }
    }

    /// Profile at an integer frequency, if it lies in the grid's set.
    pub fn mode_at(&self, k: &[i64]) -> Option<ModeProfile> {
        self.grid.slot(k).map(|t| self.mode(t))
    }

    /// Values of every mode at one normal node.
    pub fn node_coefficients(&self, node: usize) -> Vec<C64> {
        self.profiles().map(|p| p[node]).collect()
    }

    /// Inverse tangential transform.
    pub fn to_field(&self) -> ScalarField {
        let g = &self.grid;
        let (p, n) = (g.nodes, g.layer_len());
        let fft = g.fft();
        let mut values = vec![ZERO; g.len()];
        let mut layer = vec![ZERO; n];
        for i in 0..p {
            for (t, v) in layer.iter_mut().enumerate() {
                *v = self.data[t * p + i];
            }
            fft.inverse(&mut layer);
            values[i * n..(i + 1) * n].copy_from_slice(&layer);
        }
        ScalarField {
            grid: g.clone(),
            values,
        }
    }

    /// Builds a mode set from a per-mode constructor `f(t, beta, profile)`.
    pub fn from_modes(grid: &Arc<StripGrid>, mut f: impl FnMut(usize, f64, &mut [C64])) -> Self {
        let mut set = ModeSet::zeros(grid);
        for t in 0..grid.layer_len() {
            let beta = grid.beta(t);
            f(t, beta, set.profile_mut(t));
        }
        set
    }
}

/// Forward tangential transform of every normal layer.
pub fn tangential_dft(f: &ScalarField) -> ModeSet {
    let g = &f.grid;
    let (p, n) = (g.nodes, g.layer_len());
    let fft = g.fft();
    let mut data = vec![ZERO; g.len()];
    let mut layer = vec![ZERO; n];
    for i in 0..p {
        layer.copy_from_slice(f.layer(i));
        fft.forward(&mut layer);
        for (t, v) in layer.iter().enumerate() {
            data[t * p + i] = *v;
        }
    }
    ModeSet {
        grid: g.clone(),
        data,
    }
}

/// Inverse of [`tangential_dft`].
pub fn tangential_idft(modes: &ModeSet) -> ScalarField {
    modes.to_field()
}

/// First derivative along `axis` (0 = normal, finite differences;
/// `1..=N` = tangential, spectral).
pub fn derivative(f: &ScalarField, axis: usize) -> ScalarField {
    let g = f.grid();
    assert!(axis <= g.dim, "axis {axis} out of range");
    if axis == 0 {
        let st = NormalStencil::fourth_order(1, g.nodes, g.spacing());
        return apply_normal(f, &st);
    }
    let mut modes = tangential_dft(f);
    for t in 0..g.layer_len() {
        let factor = C64::new(0.0, g.wavevector(t)[axis - 1]);
        modes.profile_mut(t).iter_mut().for_each(|v| *v *= factor);
    }
    modes.to_field()
}

fn apply_normal(f: &ScalarField, st: &NormalStencil) -> ScalarField {
    let g = f.grid();
    let n = g.layer_len();
    let mut out = vec![ZERO; g.len()];
    for i in 0..g.nodes {
        let row = &mut out[i * n..(i + 1) * n];
        for (j, w) in st.weights[i].iter().enumerate() {
            let src = f.layer(st.start[i] + j);
            row.iter_mut().zip(src).for_each(|(o, s)| *o += s * *w);
        }
    }
    ScalarField {
        grid: g.clone(),
        values: out,
    }
}

/// Second normal derivative, fourth-order accurate.
pub fn normal_second_derivative(f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let st = NormalStencil::fourth_order(2, g.nodes, g.spacing());
    apply_normal(f, &st)
}

/// `order`-th normal derivative at `x₀ = 0` with a one-sided stencil of
/// accuracy order 4 (`order + 4` nodes).
pub fn trace(f: &ScalarField, order: usize) -> Result<BoundaryField> {
    let g = f.grid();
    if order == 0 {
        return Ok(BoundaryField {
            grid: g.clone(),
            values: f.layer(0).to_vec(),
        });
    }
    let w = boundary_weights(order, g.spacing());
    if w.len() > g.nodes {
        return Err(Error::GridTooCoarse {
            needed: w.len(),
            available: g.nodes,
        });
    }
    let mut values = vec![ZERO; g.layer_len()];
    for (j, wj) in w.iter().enumerate() {
        values.iter_mut().zip(f.layer(j)).for_each(|(o, s)| *o += s * *wj);
    }
    Ok(BoundaryField {
        grid: g.clone(),
        values,
    })
}

/// Complete homogeneous symmetric polynomial of degree `r` in the `κ_j²`:
/// the tangential weight `Σ_{|α'| = r} Π κ_j^{2α_j}`.
fn tangential_weight(kappa: &[f64], r: usize) -> f64 {
    let s1: f64 = kappa.iter().map(|k| k * k).sum();
    match r {
        0 => 1.0,
        1 => s1,
        2 => {
            let s2: f64 = kappa.iter().map(|k| k.powi(4)).sum();
            0.5 * (s1 * s1 + s2)
        }
        _ => unreachable!("interior Sobolev order is at most 2"),
    }
}

/// `⟨f, g⟩_s = Σ_{|α| ≤ s} ∫ D^α f · conj(D^α g)` with the trapezoid rule
/// along the normal axis.
pub fn inner_sobolev(f: &ScalarField, g: &ScalarField, s: usize) -> Result<C64> {
    inner_sobolev_with(f, g, s, NormalRule::Trapezoid)
}

pub fn inner_sobolev_with(f: &ScalarField, g: &ScalarField, s: usize, rule: NormalRule) -> Result<C64> {
    check_same(&f.grid, &g.grid)?;
    assert!(s <= 2, "interior Sobolev order must be 0, 1 or 2");
    inner_sobolev_modes(&tangential_dft(f), &tangential_dft(g), s, rule)
}

/// Sobolev inner product evaluated from tangential spectra (exact torus rule
/// via Parseval).
pub fn inner_sobolev_modes(f: &ModeSet, g: &ModeSet, s: usize, rule: NormalRule) -> Result<C64> {
    check_same(&f.grid, &g.grid)?;
    let grid = &f.grid;
    let normal = grid.normal();
    let w = normal.weights(rule);
    let h = normal.spacing();
    let st1 = NormalStencil::fourth_order(1, grid.nodes, h);
    let st2 = NormalStencil::fourth_order(2, grid.nodes, h);
    let pair = |a: &[C64], b: &[C64]| -> C64 {
        a.iter().zip(b).zip(&w).map(|((x, y), w)| x * y.conj() * *w).sum()
    };
    let mut total = ZERO;
    for t in 0..grid.layer_len() {
        let kappa = grid.wavevector(t);
        let (a, b) = (f.profile(t), g.profile(t));
        let mut acc = ZERO;
        let w0: f64 = (0..=s).map(|r| tangential_weight(&kappa, r)).sum();
        acc += pair(a, b) * w0;
        if s >= 1 {
            let w1: f64 = (0..s).map(|r| tangential_weight(&kappa, r)).sum();
            acc += pair(&apply_stencil(&st1, a), &apply_stencil(&st1, b)) * w1;
        }
        if s >= 2 {
            acc += pair(&apply_stencil(&st2, a), &apply_stencil(&st2, b));
        }
        total += acc;
    }
    Ok(total * grid.torus_volume())
}

pub fn norm_sobolev(f: &ScalarField, s: usize) -> f64 {
    inner_sobolev(f, f, s).map(|v| v.re.max(0.0).sqrt()).unwrap_or(f64::NAN)
}

/// `Σ_I ⟨φ_I, ψ_I⟩_s`.
pub fn inner_sobolev_form(phi: &FormField, psi: &FormField, s: usize) -> Result<C64> {
    inner_sobolev_form_with(phi, psi, s, NormalRule::Trapezoid)
}

pub fn inner_sobolev_form_with(phi: &FormField, psi: &FormField, s: usize, rule: NormalRule) -> Result<C64> {
    if phi.degree() != psi.degree() {
        return Err(Error::DegreeMismatch {
            left: phi.degree(),
            right: psi.degree(),
        });
    }
    check_same(phi.grid(), psi.grid())?;
    let mut total = ZERO;
    for (a, b) in phi.components().iter().zip(psi.components()) {
        total += inner_sobolev_with(a, b, s, rule)?;
    }
    Ok(total)
}

pub fn norm_sobolev_form(phi: &FormField, s: usize) -> f64 {
    inner_sobolev_form(phi, phi, s).map(|v| v.re.max(0.0).sqrt()).unwrap_or(f64::NAN)
}

/// Fractional boundary norm `(L^N Σ_k (1 + |2πk/L|²)^s |v̂(k)|²)^{1/2}`.
pub fn boundary_norm(v: &BoundaryField, s: f64) -> f64 {
    let g = v.grid();
    let c = v.coefficients();
    let sum: f64 = c
        .iter()
        .enumerate()
        .map(|(t, c)| {
            let b = g.beta(t);
            (1.0 + b * b).powf(s) * c.norm_sqr()
        })
        .sum();
    (g.torus_volume() * sum).sqrt()
}
