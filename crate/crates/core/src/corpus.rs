//! Concrete algebras, covers and systems used by tests, the suite and the
//! command line.

use std::sync::Arc;

use crate::algebra::Ambient;
use crate::covers::{join, CstarCover, OperatorAlgebra};
use crate::dynamics::{DynamicalSystem, FiniteGroup};
use crate::error::Result;
use crate::linalg::{block_diag, c, r, real_mat, unit, Mat, ZERO};
use crate::tol::Config;

fn named_units(n: usize, entries: &[(usize, usize)]) -> Vec<(String, Mat)> {
    entries.iter().map(|&(i, j)| (format!("E{}{}", i + 1, j + 1), unit(n, i, j))).collect()
}

/// `span{E11, E22, E33, E44, E13, E14, E23, E24}` in `M4`.
pub fn a4() -> Arc<OperatorAlgebra> {
    let gens = named_units(4, &[(0, 0), (1, 1), (2, 2), (3, 3), (0, 2), (0, 3), (1, 2), (1, 3)]);
    Arc::new(OperatorAlgebra::new("A4", &Ambient::full(4), gens).expect("A4"))
}

/// Upper triangular 2x2 matrices.
pub fn t2() -> Arc<OperatorAlgebra> {
    let gens = named_units(2, &[(0, 0), (1, 1), (0, 1)]);
    Arc::new(OperatorAlgebra::new("T2", &Ambient::full(2), gens).expect("T2"))
}

/// `I4 + E14 + E41`.
pub fn schur_p() -> Mat {
    Mat::identity(4, 4) + unit(4, 0, 3) + unit(4, 3, 0)
}

/// Entrywise (Schur) product with `p`.
pub fn schur(p: &Mat, a: &Mat) -> Mat {
    a.component_mul(p)
}

/// `[[0, 1], [1, 0]]`.
pub fn swap_u() -> Mat {
    real_mat(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn u_plus_u() -> Mat {
    block_diag(&[swap_u(), swap_u()])
}

/// `j(a) = a ⊕ S_p(a)` on `A4`.
pub fn schur_cover(cfg: &Config) -> Result<CstarCover> {
    let a = a4();
    let p = schur_p();
    let images: Vec<Mat> = a.generators.iter().map(|g| block_diag(&[g.clone(), schur(&p, g)])).collect();
    CstarCover::make("schur", &a, &Ambient::new(vec![4, 4])?, &images, cfg)
}

/// `A4 ⊆ M4`, which is also the envelope.
pub fn a4_identity_cover(cfg: &Config) -> Result<CstarCover> {
    Ok(a4().identity_cover(cfg)?.renamed("A4⊆M4"))
}

/// The Schur cover twisted by the swap: `a ↦ j(α(a))`.
pub fn schur_cover_twisted(cfg: &Config) -> Result<CstarCover> {
    let base = schur_cover(cfg)?;
    let a = base.algebra.clone();
    let u = u_plus_u();
    let p = schur_p();
    let images: Vec<Mat> = a
        .generators
        .iter()
        .map(|g| {
            let m = &u * g * u.adjoint();
            block_diag(&[m.clone(), schur(&p, &m)])
        })
        .collect();
    CstarCover::make("schur∘α", &a, &Ambient::new(vec![4, 4])?, &images, cfg)
}

/// Join of the Schur cover with its swap-twist, on which the swap lifts.
pub fn schur_orbit_cover(cfg: &Config) -> Result<CstarCover> {
    let a = schur_cover(cfg)?;
    let b = schur_cover_twisted_on(&a, cfg)?;
    Ok(join(&[&a, &b], cfg)?.renamed("schur∨schur∘α"))
}

fn schur_cover_twisted_on(base: &CstarCover, cfg: &Config) -> Result<CstarCover> {
    let u = u_plus_u();
    let p = schur_p();
    let images: Vec<Mat> = base
        .algebra
        .generators
        .iter()
        .map(|g| {
            let m = &u * g * u.adjoint();
            block_diag(&[m.clone(), schur(&p, &m)])
        })
        .collect();
    CstarCover::make("schur∘α", &base.algebra, &Ambient::new(vec![4, 4])?, &images, cfg)
}

fn t2_cover(a: &Arc<OperatorAlgebra>, name: &str, blocks: Vec<usize>, f: &dyn Fn(&Mat) -> Mat, cfg: &Config) -> Result<CstarCover> {
    let images: Vec<Mat> = a.generators.iter().map(f).collect();
    CstarCover::make(name, a, &Ambient::new(blocks)?, &images, cfg)
}

fn scalar(x: crate::linalg::C64) -> Mat {
    Mat::from_element(1, 1, x)
}

/// `j(a) = a ⊕ a11 ⊕ a22` on `T2`.
pub fn diag_cover(a: &Arc<OperatorAlgebra>, cfg: &Config) -> Result<CstarCover> {
    t2_cover(a, "T2⊕diag", vec![2, 1, 1], &|m| block_diag(&[m.clone(), scalar(m[(0, 0)]), scalar(m[(1, 1)])]), cfg)
}

/// `a ⊕ a11`.
pub fn first_char_cover(a: &Arc<OperatorAlgebra>, cfg: &Config) -> Result<CstarCover> {
    t2_cover(a, "T2⊕χ1", vec![2, 1], &|m| block_diag(&[m.clone(), scalar(m[(0, 0)])]), cfg)
}

/// `a ⊕ a22`.
pub fn second_char_cover(a: &Arc<OperatorAlgebra>, cfg: &Config) -> Result<CstarCover> {
    t2_cover(a, "T2⊕χ2", vec![2, 1], &|m| block_diag(&[m.clone(), scalar(m[(1, 1)])]), cfg)
}

/// `a ⊕ ρ(a)` where `ρ` shrinks the corner entry by one half.
pub fn shrunk_cover(a: &Arc<OperatorAlgebra>, cfg: &Config) -> Result<CstarCover> {
    t2_cover(
        a,
        "T2⊕ρ½",
        vec![2, 2],
        &|m| {
            let mut s = m.clone();
            s[(0, 1)] *= 0.5;
            block_diag(&[m.clone(), s])
        },
        cfg,
    )
}

pub fn z2() -> FiniteGroup {
    FiniteGroup::cyclic(2)
}

/// `(A4, Z/2, ad(u ⊕ u))`.
pub fn swap_system(cfg: &Config) -> Result<DynamicalSystem> {
    let a = a4();
    DynamicalSystem::conjugation(&a, z2(), &[Mat::identity(4, 4), u_plus_u()], cfg)
}

pub fn swap_system_on(a: &Arc<OperatorAlgebra>, cfg: &Config) -> Result<DynamicalSystem> {
    DynamicalSystem::conjugation(a, z2(), &[Mat::identity(4, 4), u_plus_u()], cfg)
}

/// Trivial action of `Z/2`.
pub fn trivial_system_on(a: &Arc<OperatorAlgebra>, group: FiniteGroup, cfg: &Config) -> Result<DynamicalSystem> {
    let n = a.ambient.dim();
    let us = vec![Mat::identity(n, n); group.order()];
    DynamicalSystem::conjugation(a, group, &us, cfg)
}

/// `(T2, Z/2, ad(diag(1, -1)))`.
pub fn t2_sign_system(a: &Arc<OperatorAlgebra>, cfg: &Config) -> Result<DynamicalSystem> {
    let d = real_mat(&[&[1.0, 0.0], &[0.0, -1.0]]);
    DynamicalSystem::conjugation(a, z2(), &[Mat::identity(2, 2), d], cfg)
}

/// `(T2, Z/3, ad(diag(1, ω)))`.
pub fn t2_rotation_system(a: &Arc<OperatorAlgebra>, cfg: &Config) -> Result<DynamicalSystem> {
    let w = c((2.0 * std::f64::consts::PI / 3.0).cos(), (2.0 * std::f64::consts::PI / 3.0).sin());
    let diag = |z: crate::linalg::C64| Mat::from_fn(2, 2, |i, j| if i != j { ZERO } else if i == 0 { r(1.0) } else { z });
    DynamicalSystem::conjugation(a, FiniteGroup::cyclic(3), &[Mat::identity(2, 2), diag(w), diag(w * w)], cfg)
}
