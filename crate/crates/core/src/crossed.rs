//! Crossed products by finite groups in the regular covariant model on
//! `ℂ^{|G|} ⊗ ℂ^N`: `ĉ = diag_t(β_{t⁻¹}(c))` and `λ_s = L_s ⊗ 1`.

use std::sync::Arc;

use crate::algebra::{diagonal, generate_algebra, orthonormal_span, AlgebraSpan, Ambient};
use crate::cb::{ci_check, CbReport, LinearMap, Verdict};
use crate::closure::graph_closure;
use crate::covers::{envelope, CstarCover};
use crate::dynamics::{admissible, inner_in_itself, DynamicalSystem, FiniteGroup, GroupLaw};
use crate::error::{Error, Result};
use crate::linalg::{frob, kron, Mat, ONE};
use crate::tol::{Config, VERIFY_TOL};

/// Regular covariant representation of `(C, G, β)` for `C` in `amb`.
#[derive(Debug, Clone)]
pub struct RegularModel {
    pub group: FiniteGroup,
    pub amb: Ambient,
    pub model: Ambient,
}

impl RegularModel {
    pub fn new(group: &FiniteGroup, amb: &Ambient) -> Self {
        let g = group.order();
        let model = Ambient::new(amb.blocks().iter().map(|b| b * g).collect()).expect("positive blocks");
        RegularModel { group: group.clone(), amb: amb.clone(), model }
    }

    /// Model index of `e_t ⊗ e_i`.
    fn index(&self, t: usize, i: usize) -> usize {
        let g = self.group.order();
        let mut o = 0;
        for (b, &n) in self.amb.blocks().iter().enumerate() {
            let r = self.amb.block_range(b);
            if r.contains(&i) {
                return o + t * n + (i - r.start);
            }
            o += n * g;
        }
        unreachable!("index inside the ambient")
    }

    /// `ĉ` given the maps `β_s`.
    pub fn hat(&self, beta: &[LinearMap], c: &Mat) -> Result<Mat> {
        let n = self.model.dim();
        let mut out = Mat::zeros(n, n);
        for t in 0..self.group.order() {
            let bc = beta[self.group.inverse[t]].apply(c)?;
            for b in 0..self.amb.blocks().len() {
                let r = self.amb.block_range(b);
                for i in r.clone() {
                    for j in r.clone() {
                        out[(self.index(t, i), self.index(t, j))] = bc[(i, j)];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn lambda(&self, s: usize) -> Mat {
        let n = self.model.dim();
        let mut out = Mat::zeros(n, n);
        for t in 0..self.group.order() {
            let st = self.group.mul(s, t);
            for i in 0..self.amb.dim() {
                out[(self.index(st, i), self.index(t, i))] = ONE;
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct CrossedProduct {
    pub label: String,
    pub model: RegularModel,
    /// `span{x̂ λ_s}`.
    pub span: AlgebraSpan,
    /// `x̂_g λ_s` for each generator `g` and group element `s`, in that
    /// order (`g` major).
    pub generators: Vec<Mat>,
    pub beta: Vec<LinearMap>,
}

impl CrossedProduct {
    pub fn dim(&self) -> usize {
        self.span.dim()
    }

    pub fn diagonal(&self) -> AlgebraSpan {
        diagonal(&self.span)
    }

    pub fn diagonal_dims(&self) -> Result<Vec<usize>> {
        Ok(self.diagonal().structure()?.dims())
    }

    /// `max ‖λ_s ĉ λ_s* - β_s(c)^‖` over a basis of the coefficient algebra.
    pub fn covariance_residual(&self) -> Result<f64> {
        covariance_residual(&self.model, &self.beta)
    }

    /// C*-algebra generated by the crossed product.
    pub fn cstar(&self) -> Result<AlgebraSpan> {
        generate_algebra(&self.model.model, self.span.basis(), true, false)
    }
}

fn covariance_residual(model: &RegularModel, beta: &[LinearMap]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (s, b) in beta.iter().enumerate() {
        let lam = model.lambda(s);
        for c in b.domain().basis() {
            let lhs = &lam * model.hat(beta, c)? * lam.adjoint();
            let rhs = model.hat(beta, &b.apply(c)?)?;
            worst = worst.max(frob(&(lhs - rhs)));
        }
    }
    Ok(worst)
}

fn build(label: &str, group: &FiniteGroup, amb: &Ambient, beta: Vec<LinearMap>, elems: &[Mat], gens: &[Mat]) -> Result<CrossedProduct> {
    let model = RegularModel::new(group, amb);
    if covariance_residual(&model, &beta)? > VERIFY_TOL {
        return Err(Error::BadAction("regular model is not covariant".into()));
    }
    let mut prods = Vec::new();
    for x in elems {
        let xh = model.hat(&beta, x)?;
        for s in 0..group.order() {
            prods.push(&xh * model.lambda(s));
        }
    }
    let span = orthonormal_span(&model.model, &prods)?;
    if span.dim() != elems.len() * group.order() {
        return Err(Error::Dimension(format!("crossed product has dimension {} not {}", span.dim(), elems.len() * group.order())));
    }
    if !span.is_algebra() {
        return Err(Error::NotAlgebra);
    }
    let mut generators = Vec::new();
    for g in gens {
        let gh = model.hat(&beta, g)?;
        for s in 0..group.order() {
            generators.push(&gh * model.lambda(s));
        }
    }
    let span = span.with_flags(false, true);
    Ok(CrossedProduct { label: label.into(), model, span, generators, beta })
}

/// `C ⋊_β G` for a C*-algebra `c` and an action by *-automorphisms.
pub fn cstar_crossed(c: &AlgebraSpan, group: &FiniteGroup, beta: Vec<LinearMap>) -> Result<CrossedProduct> {
    let cp = build("C ⋊ G", group, c.ambient(), beta, c.basis(), c.basis())?;
    if !cp.span.is_star_closed() {
        return Err(Error::NotCstar("crossed product is not self-adjoint".into()));
    }
    Ok(CrossedProduct { span: cp.span.with_flags(true, true), ..cp })
}

/// `A ⋊_{(C,j)} G = span{ĵ(a) λ_s}` inside `C ⋊_β G`.
pub fn relative_crossed(ds: &DynamicalSystem, cover: &CstarCover, cfg: &Config) -> Result<CrossedProduct> {
    let rep = admissible(ds, cover, cfg)?;
    let beta = rep.beta.ok_or(Error::NotAdmissible)?;
    let elems: Vec<Mat> = ds.algebra.span.basis().iter().map(|a| cover.j.apply(a)).collect::<Result<_>>()?;
    let gens = cover.gen_images();
    build(&format!("{} ⋊ {} over {}", ds.algebra.name, ds.group.name, cover.name), &ds.group, cover.ambient(), beta, &elems, &gens)
}

/// Relative crossed product over the envelope of the defining cover.
pub fn full_crossed(ds: &DynamicalSystem, cfg: &Config) -> Result<(CstarCover, CrossedProduct)> {
    let base = ds.algebra.identity_cover(cfg)?;
    let env = envelope(&base, cfg)?;
    let cp = relative_crossed(ds, &env, cfg)?;
    Ok((env, cp))
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub dims: (usize, usize),
    pub diagonal_dims: (Vec<usize>, Vec<usize>),
    /// Graph closure of the canonical generator pairs is a graph.
    pub generator_map: bool,
    pub ci: Option<Verdict>,
}

/// Are two crossed products of the same algebra and group completely
/// isometrically isomorphic via `x̂_g λ_s ↦ x̂'_g λ'_s`? The diagonal
/// Wedderburn type is compared first since any such isomorphism restricts
/// to a *-isomorphism of diagonals.
pub fn crossed_equivalent(a: &CrossedProduct, b: &CrossedProduct, cfg: &Config) -> Result<EquivalenceReport> {
    let da = a.diagonal_dims()?;
    let db = b.diagonal_dims()?;
    let mut rep = EquivalenceReport {
        equivalent: false,
        dims: (a.dim(), b.dim()),
        diagonal_dims: (da.clone(), db.clone()),
        generator_map: false,
        ci: None,
    };
    if a.generators.len() != b.generators.len() {
        return Ok(rep);
    }
    let pairs: Vec<(Mat, Mat)> = a.generators.iter().cloned().zip(b.generators.iter().cloned()).collect();
    let fwd = graph_closure(&a.model.model, &b.model.model, &pairs, false, true, cfg.max_words)?;
    let rev_pairs: Vec<(Mat, Mat)> = pairs.iter().map(|(x, y)| (y.clone(), x.clone())).collect();
    let back = graph_closure(&b.model.model, &a.model.model, &rev_pairs, false, true, cfg.max_words)?;
    rep.generator_map = fwd.is_graph() && back.is_graph();
    if rep.dims.0 != rep.dims.1 || da != db || !rep.generator_map {
        return Ok(rep);
    }
    let phi = fwd.graph_map()?.restrict(&a.span)?;
    let ci = ci_check(&phi, cfg);
    rep.ci = Some(ci.verdict);
    rep.equivalent = ci.verdict == Verdict::CompletelyIsometric;
    Ok(rep)
}

#[derive(Debug, Clone)]
pub struct TrivializationReport {
    pub unitaries: Vec<Mat>,
    pub twisted: CrossedProduct,
    pub trivial: CrossedProduct,
    pub multiplicative_defect: f64,
    pub ci: CbReport,
    /// Dimension and diagonal type of `A ⊗ C*_r(G)`.
    pub tensor_dim: usize,
    pub tensor_diagonal: Vec<usize>,
    pub tensor_defect: f64,
    pub tensor_ci: Verdict,
}

impl TrivializationReport {
    pub fn passed(&self) -> bool {
        self.ci.verdict == Verdict::CompletelyIsometric
            && self.multiplicative_defect < VERIFY_TOL
            && self.tensor_ci == Verdict::CompletelyIsometric
            && self.tensor_defect < VERIFY_TOL
            && self.tensor_dim == self.trivial.dim()
    }
}

/// For an action inner in `A ∩ A*`, the isomorphism
/// `ĵ(a) λ_s ↦ (j(a) j(U_s))^ λ_s` onto the crossed product by the trivial
/// action, and the identification of the latter with `A ⊗ C*_r(G)`.
pub fn trivialization_iso(ds: &DynamicalSystem, cover: &CstarCover, cfg: &Config) -> Result<TrivializationReport> {
    let inner = inner_in_itself(ds, cfg)?;
    let us = match (inner.unitaries, inner.group_law) {
        (Some(us), Some(GroupLaw::Exact)) => us,
        _ => return Err(Error::BadAction("action is not inner with an exact group law".into())),
    };
    let twisted = relative_crossed(ds, cover, cfg)?;
    let triv_sys = crate::corpus::trivial_system_on(&ds.algebra, ds.group.clone(), cfg)?;
    let trivial = relative_crossed(&triv_sys, cover, cfg)?;
    let g = &ds.group;
    let a_basis = ds.algebra.span.basis();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for a in a_basis {
        let ja = cover.j.apply(a)?;
        let xh = twisted.model.hat(&twisted.beta, &ja)?;
        for s in 0..g.order() {
            xs.push(&xh * twisted.model.lambda(s));
            let jau = &ja * cover.j.apply(&us[s])?;
            ys.push(trivial.model.hat(&trivial.beta, &jau)? * trivial.model.lambda(s));
        }
    }
    let phi = LinearMap::from_pairs(&twisted.model.model, &xs, &ys, &trivial.model.model)?;
    let multiplicative_defect = phi.multiplicative_defect()?;
    let ci = ci_check(&phi, cfg);

    // A ⊗ C*_r(G) inside M_n ⊗ M_|G|.
    let n = ds.algebra.ambient.dim();
    let reg = RegularModel::new(g, &Ambient::full(1));
    let tensor_amb = Ambient::full(n * g.order());
    let (mut txs, mut tys) = (Vec::new(), Vec::new());
    for a in a_basis {
        let ja = cover.j.apply(a)?;
        let xh = trivial.model.hat(&trivial.beta, &ja)?;
        for s in 0..g.order() {
            txs.push(&xh * trivial.model.lambda(s));
            tys.push(kron(a, &reg.lambda(s)));
        }
    }
    let psi = LinearMap::from_pairs(&trivial.model.model, &txs, &tys, &tensor_amb)?;
    let tensor_span = orthonormal_span(&tensor_amb, &tys)?;
    let tensor_diagonal = diagonal(&tensor_span).structure()?.dims();
    let tensor_defect = psi.multiplicative_defect()?;
    let tensor_ci = ci_check(&psi, cfg).verdict;
    Ok(TrivializationReport {
        unitaries: us,
        tensor_dim: tensor_span.dim(),
        twisted,
        trivial,
        multiplicative_defect,
        ci,
        tensor_diagonal,
        tensor_defect,
        tensor_ci,
    })
}

pub fn system_arc(ds: &DynamicalSystem) -> Arc<crate::covers::OperatorAlgebra> {
    ds.algebra.clone()
}
