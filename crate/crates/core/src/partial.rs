//! Splitting a cover at its Shilov ideal and recovering the full crossed
//! product from a partial action on the cover algebra.

use crate::algebra::{intersect, orthonormal_span, AlgebraSpan, Ambient};
use crate::cb::{cc_check, ci_check, CbReport, LinearMap, Verdict};
use crate::covers::{shilov, CstarCover, Validation};
use crate::crossed::{full_crossed, RegularModel};
use crate::dynamics::{admissible, DynamicalSystem, FiniteGroup};
use crate::error::{Error, Result};
use crate::linalg::{block_diag, frob, Mat};
use crate::structure::is_essential;
use crate::tol::{Config, VERIFY_TOL};

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub cover: CstarCover,
    pub shilov: Vec<usize>,
    /// Blocks of the envelope part.
    pub kept: Vec<usize>,
    /// Central projection onto the envelope part.
    pub p: Mat,
    pub j1: LinearMap,
    pub j2: LinearMap,
    pub maximal: bool,
    pub essential: bool,
    pub j1_ci: CbReport,
    pub j2_cc: CbReport,
    pub j2_ci: CbReport,
}

/// `j = j1 ⊕ j2` with `j1 = p j` completely isometric and `j2 = (1-p) j`
/// completely contractive. Requires the Shilov ideal to be maximal unless
/// `waive_maximality` is set.
pub fn decompose(cover: &CstarCover, waive_maximality: bool, cfg: &Config) -> Result<Decomposition> {
    let sh = shilov(cover, cfg)?;
    if !sh.is_decisive() {
        return Err(Error::Inconclusive("Shilov boundary".into()));
    }
    let st = cover.c.structure()?;
    let kept = st.complement(&sh.set);
    let maximal = kept.len() == 1;
    if !maximal && !waive_maximality {
        return Err(Error::ShilovNotMaximal(kept.len()));
    }
    let p = st.projection(&kept);
    let e = st.unit.clone();
    if frob(&(&p * &p - &p)) > VERIFY_TOL || frob(&(p.adjoint() - &p)) > VERIFY_TOL {
        return Err(Error::Structure("p is not a projection".into()));
    }
    if cover.c.basis().iter().any(|b| frob(&(&p * b - b * &p)) > VERIFY_TOL) {
        return Err(Error::Structure("p is not central".into()));
    }
    let q = &e - &p;
    let amb = cover.ambient();
    let j1 = LinearMap::from_fn(&cover.algebra.span, amb, |a| &p * cover.j.apply(a).expect("a in A"))?;
    let j2 = LinearMap::from_fn(&cover.algebra.span, amb, |a| &q * cover.j.apply(a).expect("a in A"))?;
    for m in [&j1, &j2] {
        let d = m.multiplicative_defect()?;
        if d > VERIFY_TOL {
            return Err(Error::NotHomomorphism(d));
        }
    }
    let j1_ci = ci_check(&j1, cfg);
    let j2_cc = cc_check(&j2, cfg);
    let j2_ci = ci_check(&j2, cfg);
    let essential = is_essential(&cover.c, &sh.set)?;
    Ok(Decomposition { cover: cover.clone(), shilov: sh.set, kept, p, j1, j2, maximal, essential, j1_ci, j2_cc, j2_ci })
}

/// Partial action `θ` of `G` on the cover algebra `C` with `D_e = C`,
/// `D_s = pC` and `θ_s = β_s` on `pC` for `s ≠ e`.
#[derive(Debug, Clone)]
pub struct PartialActionSpec {
    pub group: FiniteGroup,
    pub c: AlgebraSpan,
    pub pc: AlgebraSpan,
    pub p: Mat,
    pub ideals: Vec<AlgebraSpan>,
    /// `θ_s: D_{s⁻¹} → D_s`.
    pub theta: Vec<LinearMap>,
    /// Action on `pC` lifted from `A` through `j1`.
    pub beta: Vec<LinearMap>,
    pub envelope: CstarCover,
}

pub fn build_partial_action(ds: &DynamicalSystem, dec: &Decomposition, cfg: &Config) -> Result<PartialActionSpec> {
    let env = CstarCover::from_map("pC", &dec.cover.algebra, dec.j1.clone(), Validation::Structural, cfg)?;
    let rep = admissible(ds, &env, cfg)?;
    let beta = rep.beta.ok_or(Error::NotAdmissible)?;
    let c = dec.cover.c.clone();
    let pc = env.c.clone();
    let g = &ds.group;
    let amb = dec.cover.ambient();
    let mut ideals = Vec::new();
    let mut theta = Vec::new();
    for s in 0..g.order() {
        if s == g.identity {
            ideals.push(c.clone());
            theta.push(LinearMap::from_fn(&c, amb, |x| x.clone())?);
        } else {
            ideals.push(pc.clone());
            theta.push(beta[s].clone());
        }
    }
    let spec = PartialActionSpec { group: g.clone(), c, pc, p: dec.p.clone(), ideals, theta, beta, envelope: env };
    spec.verify_axioms()?;
    Ok(spec)
}

impl PartialActionSpec {
    pub fn verify_axioms(&self) -> Result<()> {
        let g = &self.group;
        for (s, d) in self.ideals.iter().enumerate() {
            for x in self.c.basis() {
                for y in d.basis() {
                    if !d.contains(&(x * y)) || !d.contains(&(y * x)) {
                        return Err(Error::PartialAxiom(format!("D_{s} is not an ideal")));
                    }
                }
            }
            let th = &self.theta[s];
            if !th.domain().same_span(&self.ideals[g.inverse[s]]) {
                return Err(Error::PartialAxiom(format!("θ_{s} has the wrong domain")));
            }
            if !th.image_span().same_span(d) {
                return Err(Error::PartialAxiom(format!("θ_{s} is not onto D_{s}")));
            }
            if th.multiplicative_defect()? > VERIFY_TOL || th.star_defect()? > VERIFY_TOL {
                return Err(Error::PartialAxiom(format!("θ_{s} is not a *-isomorphism")));
            }
        }
        // θ_s ∘ θ_t ⊆ θ_st on θ_t⁻¹(D_t ∩ D_{s⁻¹}).
        for s in 0..g.order() {
            for t in 0..g.order() {
                let meet = intersect(&self.ideals[t], &self.ideals[g.inverse[s]]);
                let inv = self.theta[t].inverse()?;
                for y in meet.basis() {
                    let x = inv.apply(y)?;
                    let lhs = self.theta[s].apply(y)?;
                    let rhs = self.theta[g.mul(s, t)].apply(&x)?;
                    if frob(&(lhs - rhs)) > VERIFY_TOL {
                        return Err(Error::PartialAxiom(format!("θ_{s} θ_{t} ⊄ θ_st")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Faithful model of `C ⋊_θ G`:
/// `Γ(x δ_e) = (px)^ λ_e ⊕ (1-p)x`, `Γ(x δ_s) = x̂ λ_s ⊕ 0`.
#[derive(Debug, Clone)]
pub struct PartialCrossed {
    pub ambient: Ambient,
    pub span: AlgebraSpan,
    pub p_blocks: Vec<usize>,
    pub q_blocks: Vec<usize>,
    pub model: RegularModel,
    pub multiplicative_defect: f64,
    p: Mat,
    q: Mat,
    c_ambient: Ambient,
    beta: Vec<LinearMap>,
    group: FiniteGroup,
}

impl PartialCrossed {
    pub fn dim(&self) -> usize {
        self.span.dim()
    }

    pub fn block_dims(&self) -> Result<Vec<usize>> {
        Ok(self.span.structure()?.dims())
    }

    /// `Γ(x δ_s)`; for `s ≠ e` the element must lie in `pC`.
    pub fn gamma(&self, x: &Mat, s: usize) -> Result<Mat> {
        let amb = &self.c_ambient;
        let px = amb.restrict(&(&self.p * x), &self.p_blocks);
        let top = self.model.hat(&self.beta, &px)? * self.model.lambda(s);
        let qn: usize = self.q_blocks.iter().map(|&b| amb.blocks()[b]).sum();
        let bottom = if s == self.group.identity && !self.q_blocks.is_empty() {
            amb.restrict(&(&self.q * x), &self.q_blocks)
        } else {
            Mat::zeros(qn, qn)
        };
        Ok(if qn == 0 { top } else { block_diag(&[top, bottom]) })
    }
}

fn compress_span(s: &AlgebraSpan, amb: &Ambient, blocks: &[usize]) -> AlgebraSpan {
    let sub = amb.sub(blocks).expect("nonempty blocks");
    let elems: Vec<Mat> = s.basis().iter().map(|m| amb.restrict(m, blocks)).collect();
    orthonormal_span(&sub, &elems).expect("compressed elements")
}

pub fn partial_crossed(spec: &PartialActionSpec) -> Result<PartialCrossed> {
    let amb = spec.c.ambient().clone();
    let st = spec.c.structure()?;
    let q = &st.unit - &spec.p;
    let p_blocks = amb.support_blocks(&spec.p, 1e-9);
    let q_blocks = amb.support_blocks(&q, 1e-9);
    let sub_p = amb.sub(&p_blocks)?;
    let model = RegularModel::new(&spec.group, &sub_p);
    let ambient = if q_blocks.is_empty() { model.model.clone() } else { model.model.direct_sum(&amb.sub(&q_blocks)?) };
    // β compressed to the support of p.
    let beta = spec
        .beta
        .iter()
        .map(|b| LinearMap::from_fn(&compress_span(b.domain(), &amb, &p_blocks), &model.amb, |m| amb.restrict(&b.apply(&amb.embed(m, &p_blocks)).expect("in pC"), &p_blocks)))
        .collect::<Result<Vec<_>>>()?;
    let mut pc = PartialCrossed {
        ambient: ambient.clone(),
        span: AlgebraSpan::zero(&ambient),
        p_blocks,
        q_blocks,
        model,
        multiplicative_defect: 0.0,
        p: spec.p.clone(),
        q,
        c_ambient: amb,
        beta,
        group: spec.group.clone(),
    };
    let g = &spec.group;
    // Basis of C ⋊_θ G as pairs (element, group index).
    let mut terms: Vec<(Mat, usize)> = spec.c.basis().iter().map(|x| (x.clone(), g.identity)).collect();
    for s in (0..g.order()).filter(|&s| s != g.identity) {
        terms.extend(spec.pc.basis().iter().map(|x| (x.clone(), s)));
    }
    let images: Vec<Mat> = terms.iter().map(|(x, s)| pc.gamma(x, *s)).collect::<Result<_>>()?;
    let span = orthonormal_span(&ambient, &images)?;
    let expect = spec.c.dim() + spec.pc.dim() * (g.order() - 1);
    if span.dim() != expect {
        return Err(Error::Dimension(format!("Γ has rank {} not {expect}", span.dim())));
    }
    // (x δ_s)(y δ_t) = θ_s(θ_{s⁻¹}(x) y) δ_st.
    let mut defect: f64 = 0.0;
    for (i, (x, s)) in terms.iter().enumerate() {
        let back = spec.theta[g.inverse[*s]].apply(x)?;
        for (k, (y, t)) in terms.iter().enumerate() {
            let z = spec.theta[*s].apply(&(&back * y))?;
            let lhs = pc.gamma(&z, g.mul(*s, *t))?;
            defect = defect.max(frob(&(lhs - &images[i] * &images[k])));
        }
    }
    pc.multiplicative_defect = defect;
    if defect > VERIFY_TOL {
        return Err(Error::NotHomomorphism(defect));
    }
    pc.span = span.with_flags(true, true);
    if !pc.span.is_star_closed() {
        return Err(Error::NotCstar("partial crossed product model".into()));
    }
    Ok(pc)
}

#[derive(Debug, Clone)]
pub struct RecoveryReport {
    pub b_dim: usize,
    pub full_dim: usize,
    /// `‖ψ∘φ - id‖` and `‖φ∘ψ - id‖` on bases.
    pub inverse_residuals: (f64, f64),
    pub multiplicative_defects: (f64, f64),
    pub forward_ci: Verdict,
    pub backward_ci: Verdict,
}

impl RecoveryReport {
    pub fn passed(&self) -> bool {
        self.b_dim == self.full_dim
            && self.inverse_residuals.0 < VERIFY_TOL
            && self.inverse_residuals.1 < VERIFY_TOL
            && self.multiplicative_defects.0 < VERIFY_TOL
            && self.multiplicative_defects.1 < VERIFY_TOL
            && self.forward_ci == Verdict::CompletelyIsometric
            && self.backward_ci == Verdict::CompletelyIsometric
    }
}

/// `A ⋊ G ≅ span{Γ(j1(a) δ_s)}` with mutually inverse maps checked
/// numerically and by cb-check.
pub fn verify_partial_recovery(ds: &DynamicalSystem, dec: &Decomposition, spec: &PartialActionSpec, pc: &PartialCrossed, cfg: &Config) -> Result<RecoveryReport> {
    let (env, full) = full_crossed(ds, cfg)?;
    let g = &ds.group;
    let (mut fx, mut by) = (Vec::new(), Vec::new());
    for a in ds.algebra.span.basis() {
        let je = env.j.apply(a)?;
        let xh = full.model.hat(&full.beta, &je)?;
        let j1a = dec.j1.apply(a)?;
        for s in 0..g.order() {
            fx.push(&xh * full.model.lambda(s));
            by.push(pc.gamma(&j1a, s)?);
        }
    }
    let _ = spec;
    let phi = LinearMap::from_pairs(&full.model.model, &fx, &by, &pc.ambient)?;
    let psi = LinearMap::from_pairs(&pc.ambient, &by, &fx, &full.model.model)?;
    let id_full = LinearMap::from_fn(phi.domain(), &full.model.model, |m| m.clone())?;
    let id_b = LinearMap::from_fn(psi.domain(), &pc.ambient, |m| m.clone())?;
    let r1 = phi.then(&psi)?.distance(&id_full)?;
    let r2 = psi.then(&phi)?.distance(&id_b)?;
    Ok(RecoveryReport {
        b_dim: psi.domain().dim(),
        full_dim: full.dim(),
        inverse_residuals: (r1, r2),
        multiplicative_defects: (phi.multiplicative_defect()?, psi.multiplicative_defect()?),
        forward_ci: ci_check(&phi, cfg).verdict,
        backward_ci: ci_check(&psi, cfg).verdict,
    })
}
