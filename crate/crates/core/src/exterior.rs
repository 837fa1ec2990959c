//! Exterior algebra of q-forms on the strip in the flat half-space frame
//! `dx⁰, …, dx^N`, where axis 0 is the normal direction.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strip::{derivative, ScalarField, StripGrid};

/// Strictly increasing tuple of axis labels in `[0, N]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(indices: Vec<usize>, dim: usize) -> Result<Self> {
        let increasing = indices.windows(2).all(|w| w[0] < w[1]);
        if !increasing || indices.iter().any(|&i| i > dim) {
            return Err(Error::InvalidMultiIndex { indices, dim });
        }
        Ok(MultiIndex(indices))
    }

    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, axis: usize) -> bool {
        self.0.binary_search(&axis).is_ok()
    }

    pub fn contains_normal(&self) -> bool {
        self.0.first() == Some(&0)
    }

    /// `{axis} ∪ self`, or `None` if `axis` is already present.
    pub fn with(&self, axis: usize) -> Option<MultiIndex> {
        match self.0.binary_search(&axis) {
            Ok(_) => None,
            Err(pos) => {
                let mut v = self.0.clone();
                v.insert(pos, axis);
                Some(MultiIndex(v))
            }
        }
    }

    pub fn without(&self, axis: usize) -> Option<MultiIndex> {
        self.0.binary_search(&axis).ok().map(|pos| {
            let mut v = self.0.clone();
            v.remove(pos);
            MultiIndex(v)
        })
    }

    /// Number of degree-`q` indices over axes `0..=dim`: `C(dim + 1, q)`.
    pub fn count(dim: usize, q: usize) -> usize {
        if q > dim + 1 {
            return 0;
        }
        (0..q).fold(1, |acc, i| acc * (dim + 1 - i) / (i + 1))
    }

    /// Every degree-`q` index in lexicographic order.
    pub fn all(dim: usize, q: usize) -> Vec<MultiIndex> {
        fn rec(start: usize, dim: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if left == 0 {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for a in start..=dim {
                if dim + 1 - a < left {
                    break;
                }
                cur.push(a);
                rec(a + 1, dim, left - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::with_capacity(Self::count(dim, q));
        if q <= dim + 1 {
            rec(0, dim, q, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, ")")
    }
}

/// `ε^K_{jI}`: zero unless `j ∉ I` and `{j} ∪ I = K` as sets, otherwise the
/// sign of the permutation sorting `(j, i₁, …, i_q)`.
pub fn eps(k: &MultiIndex, j: usize, i: &MultiIndex) -> i8 {
    match i.with(j) {
        Some(joined) if &joined == k => {
            let smaller = i.0.iter().filter(|&&a| a < j).count();
            if smaller % 2 == 0 {
                1
            } else {
                -1
            }
        }
        _ => 0,
    }
}

/// A q-form `Σ_I φ_I dx^I` with every component stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct FormField {
    degree: usize,
    grid: Arc<StripGrid>,
    components: Vec<ScalarField>,
}

impl FormField {
    pub fn new(degree: usize, grid: &Arc<StripGrid>, components: Vec<ScalarField>) -> Result<Self> {
        let expected = MultiIndex::count(grid.dim, degree);
        if degree > grid.dim + 1 || components.len() != expected {
            return Err(Error::InvalidGrid(format!(
                "degree {degree} form needs {expected} components, got {}",
                components.len()
            )));
        }
        if components.iter().any(|c| **c.grid() != **grid) {
            return Err(Error::GridMismatch);
        }
        Ok(FormField {
            degree,
            grid: grid.clone(),
            components,
        })
    }

    pub fn zeros(grid: &Arc<StripGrid>, degree: usize) -> Self {
        let n = MultiIndex::count(grid.dim, degree);
        FormField {
            degree,
            grid: grid.clone(),
            components: vec![ScalarField::zeros(grid); n],
        }
    }

    pub fn scalar(f: ScalarField) -> Self {
        FormField {
            degree: 0,
            grid: f.grid().clone(),
            components: vec![f],
        }
    }

    /// Form whose only nonzero component is `index`.
    pub fn single(index: &MultiIndex, f: ScalarField) -> Result<Self> {
        let grid = f.grid().clone();
        let mut form = FormField::zeros(&grid, index.degree());
        *form.component_mut(index)? = f;
        Ok(form)
    }

    /// Samples `f(component position, x₀, x')` for every component.
    pub fn from_fn(grid: &Arc<StripGrid>, degree: usize, f: impl Fn(usize, f64, &[f64]) -> C64) -> Self {
        let components = (0..MultiIndex::count(grid.dim, degree))
            .map(|c| ScalarField::from_fn(grid, |x0, x| f(c, x0, x)))
            .collect();
        FormField {
            degree,
            grid: grid.clone(),
            components,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn grid(&self) -> &Arc<StripGrid> {
        &self.grid
    }

    pub fn indices(&self) -> Vec<MultiIndex> {
        MultiIndex::all(self.grid.dim, self.degree)
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    fn position(&self, index: &MultiIndex) -> Result<usize> {
        if index.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: index.degree(),
            });
        }
        self.indices()
            .binary_search(index)
            .map_err(|_| Error::InvalidMultiIndex {
                indices: index.0.clone(),
                dim: self.grid.dim,
            })
    }

    pub fn component(&self, index: &MultiIndex) -> Result<&ScalarField> {
        Ok(&self.components[self.position(index)?])
    }

    pub fn component_mut(&mut self, index: &MultiIndex) -> Result<&mut ScalarField> {
        let p = self.position(index)?;
        Ok(&mut self.components[p])
    }

    pub fn scaled(&self, a: C64) -> Self {
        FormField {
            degree: self.degree,
            grid: self.grid.clone(),
            components: self.components.iter().map(|c| c.scaled(a)).collect(),
        }
    }

    pub fn axpy(&self, a: C64, other: &FormField) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(x, y)| x.axpy(a, y))
            .collect::<Result<Vec<_>>>()?;
        Ok(FormField {
            degree: self.degree,
            grid: self.grid.clone(),
            components,
        })
    }

    pub fn sub(&self, other: &FormField) -> Result<Self> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    pub fn add(&self, other: &FormField) -> Result<Self> {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Indices of components that are not identically zero.
    pub fn support(&self) -> Vec<MultiIndex> {
        self.indices()
            .into_iter()
            .zip(&self.components)
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Exterior derivative `(dφ)_K = Σ_{j,I} ε^K_{jI} D_j φ_I`.
pub fn d(phi: &FormField) -> Result<FormField> {
    let dim = phi.grid.dim;
    if phi.degree > dim {
        return Err(Error::DegreeOverflow {
            degree: phi.degree,
            max: dim + 1,
        });
    }
    let mut out = FormField::zeros(&phi.grid, phi.degree + 1);
    for (index, comp) in phi.indices().iter().zip(&phi.components) {
        if comp.is_zero() {
            continue;
        }
        for j in 0..=dim {
            let Some(k) = index.with(j) else { continue };
            let sign = eps(&k, j, index) as f64;
            let dj = derivative(comp, j);
            let target = out.component_mut(&k)?;
            *target = target.axpy(C64::new(sign, 0.0), &dj)?;
        }
    }
    Ok(out)
}

/// Formal adjoint `(d′ψ)_I = -Σ_{K,j} ε^K_{jI} D_j ψ_K`; on 1-forms this is
/// `-div`.
pub fn d_formal(psi: &FormField) -> Result<FormField> {
    if psi.degree == 0 {
        return Err(Error::DegreeUnderflow);
    }
    let dim = psi.grid.dim;
    let mut out = FormField::zeros(&psi.grid, psi.degree - 1);
    for (k, comp) in psi.indices().iter().zip(&psi.components) {
        if comp.is_zero() {
            continue;
        }
        for &j in k.indices() {
            let i = k.without(j).expect("j is in K");
            let sign = -(eps(k, j, &i) as f64);
            let dj = derivative(comp, j);
            let target = out.component_mut(&i)?;
            *target = target.axpy(C64::new(sign, 0.0), &dj)?;
        }
    }
    debug_assert!(dim + 1 >= psi.degree);
    Ok(out)
}

/// Contraction with `∂/∂x₀`: `(ψ⌊∂₀)_I = ψ_{0I}` for `0 ∉ I`, else 0.
pub fn contract_normal(psi: &FormField) -> Result<FormField> {
    if psi.degree == 0 {
        return Err(Error::DegreeUnderflow);
    }
    let mut out = FormField::zeros(&psi.grid, psi.degree - 1);
    for i in out.indices() {
        if let Some(k) = i.with(0) {
            *out.component_mut(&i)? = psi.component(&k)?.clone();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    #[test]
    fn eps_examples() {
        assert_eq!(eps(&mi(&[0, 1]), 0, &mi(&[1])), 1);
        assert_eq!(eps(&mi(&[0, 1]), 1, &mi(&[0])), -1);
        assert_eq!(eps(&mi(&[0, 2]), 1, &mi(&[0])), 0);
        assert_eq!(eps(&mi(&[0, 1, 2]), 1, &mi(&[0, 2])), -1);
        assert_eq!(eps(&mi(&[0, 1]), 0, &mi(&[0])), 0);
    }

    fn brute_sign(seq: &[usize]) -> i8 {
        let mut inversions = 0;
        for a in 0..seq.len() {
            for b in a + 1..seq.len() {
                if seq[a] > seq[b] {
                    inversions += 1;
                }
            }
        }
        if inversions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn eps_matches_brute_force_permutation_sign() {
        for dim in 0..=4 {
            for q in 0..=dim {
                for i in MultiIndex::all(dim, q) {
                    for k in MultiIndex::all(dim, q + 1) {
                        for j in 0..=dim {
                            let mut seq = vec![j];
                            seq.extend(i.indices());
                            let mut sorted = seq.clone();
                            sorted.sort();
                            sorted.dedup();
                            let expect = if sorted.len() == seq.len() && sorted == k.indices() {
                                brute_sign(&seq)
                            } else {
                                0
                            };
                            assert_eq!(eps(&k, j, &i), expect, "K={k} j={j} I={i}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        for dim in 0..=4 {
            for q in 0..=dim + 1 {
                let all = MultiIndex::all(dim, q);
                assert_eq!(all.len(), MultiIndex::count(dim, q));
                assert!(all.windows(2).all(|w| w[0] < w[1]));
            }
        }
        assert!(MultiIndex::new(vec![1, 1], 2).is_err());
        assert!(MultiIndex::new(vec![0, 3], 2).is_err());
    }

    fn grid() -> Arc<StripGrid> {
        StripGrid::new(2, 2.0 * PI, 8, 12.0, 65).unwrap()
    }

    #[test]
    fn d_of_linear_and_constant_scalars() {
        let g = grid();
        let x0 = FormField::scalar(ScalarField::from_fn(&g, |x, _| C64::new(x, 0.0)));
        let dx = d(&x0).unwrap();
        assert!(dx.components()[0].values().iter().all(|v| (v.re - 1.0).abs() < 1e-12));
        assert!(dx.components()[1].max_abs() < 1e-12 && dx.components()[2].max_abs() < 1e-12);
        let c = FormField::scalar(ScalarField::from_fn(&g, |_, _| C64::new(3.0, 1.0)));
        assert!(d(&c).unwrap().max_abs() < 1e-12);
        assert!(matches!(d(&FormField::zeros(&g, 3)), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn d_formal_examples() {
        let g = grid();
        let e = ScalarField::from_fn(&g, |x, _| C64::new((-x).exp(), 0.0));
        let psi = FormField::single(&mi(&[0]), e.clone()).unwrap();
        let out = d_formal(&psi).unwrap();
        // fourth-order FD with h = 12/64
        let err = out.components()[0].sub(&e).unwrap().max_abs();
        assert!(err < 2e-3, "{err}");
        let consts = FormField::from_fn(&g, 1, |c, _, _| C64::new(c as f64 + 1.0, 0.0));
        assert!(d_formal(&consts).unwrap().max_abs() < 1e-12);
        assert!(matches!(d_formal(&FormField::zeros(&g, 0)), Err(Error::DegreeUnderflow)));
    }

    #[test]
    fn contraction_examples() {
        let g = StripGrid::new(1, 1.0, 4, 1.0, 9).unwrap();
        let a = ScalarField::from_fn(&g, |x, _| C64::new(x, 0.0));
        let b = ScalarField::from_fn(&g, |_, y| C64::new(y[0], 2.0));
        let psi = FormField::new(1, &g, vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(contract_normal(&psi).unwrap().components()[0], a);
        let only_b = FormField::single(&mi(&[1]), b.clone()).unwrap();
        assert!(contract_normal(&only_b).unwrap().components()[0].is_zero());
        let top = FormField::single(&mi(&[0, 1]), b.clone()).unwrap();
        let c = contract_normal(&top).unwrap();
        assert!(c.components()[0].is_zero());
        assert_eq!(c.component(&mi(&[1])).unwrap(), &b);
        let twice = contract_normal(&contract_normal(&top).unwrap()).unwrap();
        assert!(twice.components()[0].is_zero());
    }
}
