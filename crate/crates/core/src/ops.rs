//! Boundary-coupled operators on the strip: `𝒦̃`, `𝒦`, `G`, `G′`, `𝒬`, the
//! Laplacian, the Hodge operator `-Δ + G` and the adjoint `d* = d′ + 𝒦`.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{d_formal, FormField, MultiIndex};
use crate::strip::stencil::NormalStencil;
use crate::strip::{
    apply_stencil, norm_sobolev_form, tangential_dft, trace, BoundaryField, ModeSet, ScalarField, StripGrid,
};
use crate::symbols::omega;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomMembership {
    pub member: bool,
    pub max_violation: f64,
    pub tol: f64,
    pub offending_components: Vec<MultiIndex>,
}

impl DomMembership {
    fn from_violations(violations: Vec<(MultiIndex, f64)>, tol: f64) -> Self {
        let max_violation = violations.iter().map(|(_, v)| *v).fold(0.0, f64::max);
        let offending_components: Vec<_> = violations
            .into_iter()
            .filter(|(_, v)| *v > tol)
            .map(|(i, _)| i)
            .collect();
        DomMembership {
            member: offending_components.is_empty(),
            max_violation,
            tol,
            offending_components,
        }
    }
}

/// Builds `Σ_k profile(β_k, x₀) c_k e^{iκ·x'}`.
fn lift(grid: &Arc<StripGrid>, coeffs: &[C64], profile: impl Fn(f64, f64) -> f64) -> ScalarField {
    let xs = grid.normal().coords();
    ModeSet::from_modes(grid, |t, beta, out| {
        let c = coeffs[t];
        if c == C64::new(0.0, 0.0) {
            return;
        }
        for (o, x) in out.iter_mut().zip(&xs) {
            *o = c * profile(beta, *x);
        }
    })
    .to_field()
}

/// `𝒦̃v`: per mode `-ω e^{-ωx₀} v̂(k)`.
pub fn apply_ktilde(v: &BoundaryField) -> ScalarField {
    lift(v.grid(), &v.coefficients(), |b, x| {
        let w = omega(b);
        -w * (-w * x).exp()
    })
}

/// `Gu = 𝒦̃(∂₀u|₀)`.
pub fn apply_g_scalar(u: &ScalarField) -> Result<ScalarField> {
    Ok(apply_ktilde(&trace(u, 1)?))
}

/// `G′u`: per mode `ω² e^{-ωx₀} û(0, k)`.
pub fn apply_gprime(u: &ScalarField) -> ScalarField {
    let v = trace(u, 0).expect("order-0 trace never fails");
    lift(u.grid(), &v.coefficients(), |b, x| {
        let w = omega(b);
        w * w * (-w * x).exp()
    })
}

/// `(𝒦ψ)_I = 𝒦̃(ψ_{0I}|₀)` for `0 ∉ I`, zero otherwise.
pub fn apply_k_form(psi: &FormField) -> Result<FormField> {
    if psi.degree() == 0 {
        return Err(Error::DegreeUnderflow);
    }
    let mut out = FormField::zeros(psi.grid(), psi.degree() - 1);
    for i in out.indices() {
        let Some(k) = i.with(0) else { continue };
        let src = psi.component(&k)?;
        if src.is_zero() {
            continue;
        }
        *out.component_mut(&i)? = apply_ktilde(&trace(src, 0)?);
    }
    Ok(out)
}

/// Diagonal form version of `G`: `G′` on components containing axis 0 and
/// `G` on the rest.
pub fn apply_g_form(psi: &FormField) -> Result<FormField> {
    let mut out = FormField::zeros(psi.grid(), psi.degree());
    for (k, comp) in psi.indices().iter().zip(psi.components()) {
        if comp.is_zero() {
            continue;
        }
        let v = if k.contains_normal() {
            apply_gprime(comp)
        } else {
            apply_g_scalar(comp)?
        };
        *out.component_mut(k)? = v;
    }
    Ok(out)
}

/// Neumann lift `𝒬g`: per mode `-(1/ω) e^{-ωx₀} ĝ(k)`.
pub fn apply_q(g: &BoundaryField) -> ScalarField {
    lift(g.grid(), &g.coefficients(), |b, x| {
        let w = omega(b);
        -(-w * x).exp() / w
    })
}

/// `Δu`: spectral in the tangential directions, fourth-order FD in `x₀`.
pub fn apply_laplacian(u: &ScalarField) -> ScalarField {
    let g = u.grid();
    let st = NormalStencil::fourth_order(2, g.nodes, g.spacing());
    let mut modes = tangential_dft(u);
    for t in 0..g.layer_len() {
        let b2 = g.beta(t).powi(2);
        let p = modes.profile_mut(t);
        let d2 = apply_stencil(&st, p);
        p.iter_mut().zip(d2).for_each(|(v, d)| *v = d - *v * b2);
    }
    modes.to_field()
}

/// `(-Δ + G)φ` componentwise.
pub fn apply_hodge(phi: &FormField) -> Result<FormField> {
    let comps = phi
        .components()
        .iter()
        .map(|c| apply_laplacian(c).scaled(C64::new(-1.0, 0.0)))
        .collect();
    let lap = FormField::new(phi.degree(), phi.grid(), comps)?;
    lap.add(&apply_g_form(phi)?)
}

/// Default membership tolerance `1e-8 ‖ψ‖₂`.
pub fn default_dom_tol(psi: &FormField) -> f64 {
    1e-8 * norm_sobolev_form(psi, 2)
}

/// `ψ ∈ dom d*` in the `W^s` sense: `∂₀^s ψ_{0J}|₀ = 0` for every `J`.
pub fn in_dom_dstar(psi: &FormField, s: usize, tol: f64) -> Result<DomMembership> {
    if psi.degree() == 0 {
        return Err(Error::DegreeUnderflow);
    }
    assert!((1..=3).contains(&s), "derivative order must be 1, 2 or 3");
    let mut violations = Vec::new();
    for (k, comp) in psi.indices().iter().zip(psi.components()) {
        if k.contains_normal() {
            violations.push((k.clone(), trace(comp, s)?.max_abs()));
        }
    }
    Ok(DomMembership::from_violations(violations, tol))
}

/// `dφ ∈ dom d*` for `φ ∈ dom d*`: `∂₀²φ_K|₀ = 0` for every `K ∌ 0`.
pub fn in_dom_dstar_of_d(phi: &FormField, tol: f64) -> Result<DomMembership> {
    if phi.degree() > 0 {
        let pre = in_dom_dstar(phi, 1, tol)?;
        if !pre.member {
            return Err(Error::PrereqViolated(format!(
                "form is not in dom d* (violation {:.3e})",
                pre.max_violation
            )));
        }
    }
    let mut violations = Vec::new();
    for (k, comp) in phi.indices().iter().zip(phi.components()) {
        if !k.contains_normal() {
            violations.push((k.clone(), trace(comp, 2)?.max_abs()));
        }
    }
    Ok(DomMembership::from_violations(violations, tol))
}

/// `d*ψ = d′ψ + 𝒦ψ`, defined on `dom d*`.
pub fn d_star(psi: &FormField) -> Result<FormField> {
    d_star_with_tol(psi, default_dom_tol(psi))
}

pub fn d_star_with_tol(psi: &FormField, tol: f64) -> Result<FormField> {
    let m = in_dom_dstar(psi, 1, tol)?;
    if !m.member {
        return Err(Error::NotInDomain(m));
    }
    d_formal(psi)?.add(&apply_k_form(psi)?)
}

/// Removes the discrete `∂₀^s` trace of every `ψ_{0J}` by subtracting a
/// multiple of a fixed boundary-layer profile, so the result passes
/// [`in_dom_dstar`] to rounding.
pub fn project_into_dom_dstar(psi: &FormField, s: usize) -> Result<FormField> {
    let grid = psi.grid();
    let bump = ScalarField::from_fn(grid, |x, _| C64::new(x.powi(s as i32) * (-x * x).exp(), 0.0));
    let unit = trace(&bump, s)?.values()[0];
    let n = grid.layer_len();
    let mut out = psi.clone();
    for k in psi.indices() {
        if !k.contains_normal() {
            continue;
        }
        let tr = trace(psi.component(&k)?, s)?;
        let comp = out.component_mut(&k)?;
        let bv = bump.values();
        for (idx, v) in comp.values_mut().iter_mut().enumerate() {
            *v -= tr.values()[idx % n] * (bv[idx] / unit);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::d;
    use crate::strip::{boundary_norm, inner_sobolev_form, norm_sobolev, norm_sobolev_form, StripGrid};
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn grid1() -> Arc<StripGrid> {
        StripGrid::new(1, 2.0 * PI, 8, 20.0, 801).unwrap()
    }

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec(), 3).unwrap()
    }

    fn close(a: &ScalarField, b: &ScalarField, tol: f64) {
        let e = a.sub(b).unwrap().max_abs();
        assert!(e < tol, "max error {e:.3e} > {tol:.1e}");
    }

    #[test]
    fn ktilde_of_constant_and_single_mode() {
        let g = grid1();
        let one = BoundaryField::from_fn(&g, |_| c(1.0));
        close(&apply_ktilde(&one), &ScalarField::from_fn(&g, |x, _| c(-(-x).exp())), 1e-13);
        let wave = BoundaryField::from_fn(&g, |y| C64::from_polar(1.0, 2.0 * y[0]));
        let w = 5f64.sqrt();
        let expect = ScalarField::from_fn(&g, |x, y| C64::from_polar(-w * (-w * x).exp(), 2.0 * y[0]));
        close(&apply_ktilde(&wave), &expect, 1e-13);
    }

    #[test]
    fn g_scalar_examples() {
        let g = grid1();
        let u = ScalarField::from_fn(&g, |x, _| c((-x).exp()));
        // one-sided trace error is O(h⁴)
        close(&apply_g_scalar(&u).unwrap(), &u, 2e-7);
        let even = ScalarField::from_fn(&g, |x, y| c((x * x).cos() * y[0].sin()));
        assert!(apply_g_scalar(&even).unwrap().max_abs() < 1e-8);
        let away = ScalarField::from_fn(&g, |x, _| c((-(x - 10.0).powi(2)).exp()));
        assert!(apply_g_scalar(&away).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn gprime_examples() {
        let g = grid1();
        let one = ScalarField::from_fn(&g, |_, _| c(1.0));
        close(&apply_gprime(&one), &ScalarField::from_fn(&g, |x, _| c((-x).exp())), 1e-13);
        let vanish = ScalarField::from_fn(&g, |x, y| c(x * y[0].cos()));
        assert!(apply_gprime(&vanish).max_abs() < 1e-15);
        let wave = ScalarField::from_fn(&g, |x, y| C64::from_polar(1.0 + x, 3.0 * y[0]));
        let w2: f64 = 10.0;
        let expect = ScalarField::from_fn(&g, |x, y| C64::from_polar(w2 * (-w2.sqrt() * x).exp(), 3.0 * y[0]));
        close(&apply_gprime(&wave), &expect, 1e-12);
    }

    #[test]
    fn k_form_is_supported_off_the_normal_axis() {
        let g = StripGrid::new(2, 2.0 * PI, 8, 10.0, 201).unwrap();
        let psi = FormField::from_fn(&g, 2, |i, x, y| C64::new((i + 1) as f64 * (1.0 + y[0].sin()), x + y[1].cos()));
        let k = apply_k_form(&psi).unwrap();
        for (idx, comp) in k.indices().iter().zip(k.components()) {
            if idx.contains_normal() {
                assert!(comp.is_zero(), "component {idx}");
            }
        }
        // 1-form ψ₀ dx⁰ gives a scalar
        let g1 = grid1();
        let psi0 = ScalarField::from_fn(&g1, |x, _| c(2.0 + x));
        let one = FormField::single(&MultiIndex::new(vec![0], 1).unwrap(), psi0).unwrap();
        let expect = ScalarField::from_fn(&g1, |x, _| c(-2.0 * (-x).exp()));
        close(&apply_k_form(&one).unwrap().components()[0], &expect, 1e-13);
        // vanishing boundary values
        let zero_at_0 = FormField::from_fn(&g, 2, |_, x, y| c(x * y[0].cos()));
        assert!(apply_k_form(&zero_at_0).unwrap().max_abs() < 1e-15);
        assert!(matches!(apply_k_form(&FormField::zeros(&g, 0)), Err(Error::DegreeUnderflow)));
    }

    #[test]
    fn g_form_is_diagonal_and_reduces_to_scalar_g() {
        let g = StripGrid::new(2, 2.0 * PI, 8, 20.0, 801).unwrap();
        let f = ScalarField::from_fn(&g, |x, y| c((-x).exp() * (1.0 + 0.5 * y[1].sin())));
        for index in MultiIndex::all(2, 1) {
            let out = apply_g_form(&FormField::single(&index, f.clone()).unwrap()).unwrap();
            assert_eq!(out.support(), vec![index.clone()]);
        }
        let scalar = FormField::scalar(f.clone());
        close(&apply_g_form(&scalar).unwrap().components()[0], &apply_g_scalar(&f).unwrap(), 1e-15);
        let e = ScalarField::from_fn(&g, |x, _| c((-x).exp()));
        let out = apply_g_form(&FormField::single(&mi(&[1]), e.clone()).unwrap()).unwrap();
        close(out.component(&mi(&[1])).unwrap(), &e, 2e-7);
    }

    #[test]
    fn q_lifts_neumann_data() {
        let g = grid1();
        let one = BoundaryField::from_fn(&g, |_| c(1.0));
        let q = apply_q(&one);
        close(&q, &ScalarField::from_fn(&g, |x, _| c(-(-x).exp())), 1e-13);
        assert!((trace(&q, 1).unwrap().values()[0].re - 1.0).abs() < 2e-7);
        let rough = BoundaryField::from_fn(&g, |y| C64::new(y[0].cos() + 0.3 * (2.0 * y[0]).sin(), 0.1));
        close(&apply_q(&rough.scaled(c(2.0))), &apply_q(&rough).scaled(c(2.0)), 1e-14);
        let back = trace(&apply_q(&rough), 1).unwrap();
        assert!(back.sub(&rough).unwrap().max_abs() < 1e-5);
    }

    #[test]
    fn q_trace_error_decreases_with_h() {
        let err = |p| {
            let g = StripGrid::new(1, 2.0 * PI, 8, 10.0, p).unwrap();
            let gb = BoundaryField::from_fn(&g, |y| c((3.0 * y[0]).cos()));
            trace(&apply_q(&gb), 1).unwrap().sub(&gb).unwrap().max_abs()
        };
        let (a, b) = (err(101), err(201));
        assert!(a / b > 4.0, "ratio {}", a / b);
    }

    #[test]
    fn laplacian_examples() {
        let g = StripGrid::new(1, 3.0, 8, 4.0, 81).unwrap();
        let k = 2.0 * PI / 3.0;
        let wave = ScalarField::from_fn(&g, |_, y| C64::from_polar(1.0, k * y[0]));
        close(&apply_laplacian(&wave), &wave.scaled(c(-k * k)), 1e-10);
        let quad = ScalarField::from_fn(&g, |x, _| c(x * x));
        let lap = apply_laplacian(&quad);
        assert!(lap.values().iter().all(|v| (v.re - 2.0).abs() < 1e-9));
        let u = ScalarField::from_fn(&g, |x, y| c((-x).exp() * y[0].cos()));
        let h = apply_hodge(&FormField::scalar(u.clone())).unwrap();
        let expect = apply_laplacian(&u).scaled(c(-1.0)).add(&apply_g_scalar(&u).unwrap()).unwrap();
        close(&h.components()[0], &expect, 1e-14);
    }

    #[test]
    fn dom_dstar_membership() {
        let g = StripGrid::new(1, 2.0 * PI, 8, 4.0, 41).unwrap();
        let e0 = MultiIndex::new(vec![0], 1).unwrap();
        let one = |f: fn(f64, f64) -> f64| {
            FormField::single(&e0, ScalarField::from_fn(&g, move |x, y| c(f(x, y[0])))).unwrap()
        };
        let sq = one(|x, y| x * x * (1.0 + y.sin()));
        let lin = one(|x, y| x * (1.0 + y.sin()));
        assert!(in_dom_dstar(&sq, 1, 1e-8).unwrap().member);
        let m = in_dom_dstar(&lin, 1, 1e-8).unwrap();
        assert!(!m.member && m.offending_components == vec![e0.clone()]);
        assert!(!in_dom_dstar(&sq, 2, 1e-8).unwrap().member);
        let tangential = FormField::single(
            &MultiIndex::new(vec![1], 1).unwrap(),
            ScalarField::from_fn(&g, |x, _| c(x)),
        )
        .unwrap();
        assert!(in_dom_dstar(&tangential, 1, 1e-8).unwrap().member);
    }

    #[test]
    fn dom_of_d_examples() {
        let g = StripGrid::new(1, 2.0 * PI, 8, 4.0, 41).unwrap();
        let e = FormField::scalar(ScalarField::from_fn(&g, |x, _| c((-x).exp())));
        let m = in_dom_dstar_of_d(&e, 1e-8).unwrap();
        assert!(!m.member && (m.max_violation - 1.0).abs() < 1e-4);
        let cube = FormField::scalar(ScalarField::from_fn(&g, |x, y| c(x.powi(3) * y[0].cos())));
        assert!(in_dom_dstar_of_d(&cube, 1e-8).unwrap().member);
        let flat = FormField::from_fn(&g, 1, |i, _, y| c(i as f64 + y[0].sin()));
        assert!(in_dom_dstar_of_d(&flat, 1e-8).unwrap().member);
        let bad = FormField::single(&MultiIndex::new(vec![0], 1).unwrap(), ScalarField::from_fn(&g, |x, _| c(x))).unwrap();
        assert!(matches!(in_dom_dstar_of_d(&bad, 1e-8), Err(Error::PrereqViolated(_))));
    }

    #[test]
    fn dstar_examples() {
        let g = StripGrid::new(2, 2.0 * PI, 8, 20.0, 401).unwrap();
        let away = FormField::from_fn(&g, 1, |i, x, y| c((-(x - 10.0).powi(2)).exp() * (i as f64 + y[0].cos())));
        let ds = d_star(&away).unwrap();
        assert!(ds.sub(&d_formal(&away).unwrap()).unwrap().max_abs() < 1e-15);
        let raw = FormField::from_fn(&g, 1, |i, x, y| C64::new((-x).exp() * (1.0 + i as f64), y[1].sin() * (-x).exp()));
        assert!(matches!(d_star(&raw), Err(Error::NotInDomain(_))));
        let psi = project_into_dom_dstar(&raw, 1).unwrap();
        assert!(in_dom_dstar(&psi, 1, 1e-12 * norm_sobolev_form(&psi, 2)).unwrap().member);
        let a = C64::new(0.5, -2.0);
        let lhs = d_star(&psi.scaled(a)).unwrap();
        let rhs = d_star(&psi).unwrap().scaled(a);
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12 * rhs.max_abs());
    }

    #[test]
    fn dstar_is_the_w1_adjoint_of_d() {
        let g = StripGrid::new(1, 2.0 * PI, 8, 20.0, 1601).unwrap();
        let u = FormField::scalar(ScalarField::from_fn(&g, |x, y| {
            C64::new((-x).exp() * (1.0 + y[0].cos()), (-2.0 * x).exp() * (2.0 * y[0]).sin())
        }));
        let raw = FormField::from_fn(&g, 1, |i, x, y| {
            C64::new((-(1.0 + i as f64) * x).exp() * (y[0].sin() + 0.5), x * (-x).exp() * y[0].cos())
        });
        let psi = project_into_dom_dstar(&raw, 1).unwrap();
        let lhs = inner_sobolev_form(&d(&u).unwrap(), &psi, 1).unwrap();
        let rhs = inner_sobolev_form(&u, &d_star(&psi).unwrap(), 1).unwrap();
        let scale = norm_sobolev(&u.components()[0], 2) * norm_sobolev_form(&psi, 2);
        assert!((lhs - rhs).norm() < 1e-4 * scale, "gap {:.3e} scale {scale:.3e}", (lhs - rhs).norm());
    }

    #[test]
    fn ktilde_w1_bound_is_finite() {
        let g = StripGrid::new(1, 2.0 * PI, 16, 20.0, 801).unwrap();
        let mut sup: f64 = 0.0;
        for seed in 0..50u64 {
            let v = BoundaryField::from_fn(&g, |y| {
                let mut s = C64::new(0.0, 0.0);
                for k in 1..6 {
                    let ph = ((seed * 31 + k) as f64 * 1.618).fract() * 2.0 * PI;
                    s += C64::from_polar(1.0 / k as f64, ph + k as f64 * y[0]);
                }
                s
            });
            let r = norm_sobolev(&apply_ktilde(&v), 1) / boundary_norm(&v, 1.5);
            sup = sup.max(r);
        }
        assert!(sup.is_finite() && sup < 2.0, "sup {sup}");
    }
}
