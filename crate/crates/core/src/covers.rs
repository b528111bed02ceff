//! C*-covers of a finite-dimensional operator algebra and their lattice.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{diagonal, generate_algebra, orthonormal_span, AlgebraSpan, Ambient};
use crate::cb::{ci_check, CbReport, LinearMap, Verdict};
use crate::closure::{graph_closure, Witness};
use crate::error::{Error, Result};
use crate::linalg::{frob, Mat};
use crate::structure::corner_quotient;
use crate::tol::{Config, VERIFY_TOL};

/// Unital operator algebra generated by named matrices.
#[derive(Debug, Clone)]
pub struct OperatorAlgebra {
    pub name: String,
    pub ambient: Ambient,
    pub gen_names: Vec<String>,
    pub generators: Vec<Mat>,
    pub span: AlgebraSpan,
}

impl OperatorAlgebra {
    pub fn new(name: &str, ambient: &Ambient, gens: Vec<(String, Mat)>) -> Result<Self> {
        let (gen_names, generators): (Vec<String>, Vec<Mat>) = gens.into_iter().unzip();
        let span = generate_algebra(ambient, &generators, false, true)?;
        Ok(OperatorAlgebra { name: name.into(), ambient: ambient.clone(), gen_names, generators, span })
    }

    pub fn dim(&self) -> usize {
        self.span.dim()
    }

    pub fn diagonal(&self) -> AlgebraSpan {
        diagonal(&self.span)
    }

    /// Generator indices, those outside `A ∩ A*` first.
    pub fn probe_order(&self) -> Vec<usize> {
        let d = self.diagonal();
        let (mut off, mut on): (Vec<usize>, Vec<usize>) = (0..self.generators.len()).partition(|&g| !d.contains(&self.generators[g]));
        off.append(&mut on);
        off
    }

    /// The cover `A ⊆ C*(A)` inside the defining ambient.
    pub fn identity_cover(self: &Arc<Self>, cfg: &Config) -> Result<CstarCover> {
        let j = LinearMap::from_fn(&self.span, &self.ambient, |m| m.clone())?;
        CstarCover::from_map("identity", self, j, Validation::Structural, cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validation {
    /// Homomorphism, generation and a cb-check of complete isometry.
    Full,
    /// Homomorphism and generation; complete isometry holds by construction.
    Structural,
}

#[derive(Clone)]
pub struct CstarCover {
    pub name: String,
    pub algebra: Arc<OperatorAlgebra>,
    pub c: AlgebraSpan,
    pub j: LinearMap,
    pub ci_report: Option<CbReport>,
}

impl fmt::Debug for CstarCover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CstarCover({}: {} -> dim {} in {})", self.name, self.algebra.name, self.c.dim(), self.ambient())
    }
}

impl CstarCover {
    /// Cover given by the images of the generators of `algebra`. The map is
    /// extended multiplicatively; the extension must be well defined.
    pub fn make(name: &str, algebra: &Arc<OperatorAlgebra>, ambient: &Ambient, images: &[Mat], cfg: &Config) -> Result<Self> {
        Self::make_with(name, algebra, ambient, images, Validation::Full, cfg)
    }

    pub fn make_with(name: &str, algebra: &Arc<OperatorAlgebra>, ambient: &Ambient, images: &[Mat], validation: Validation, cfg: &Config) -> Result<Self> {
        if images.len() != algebra.generators.len() {
            return Err(Error::Dimension(format!("{} images for {} generators", images.len(), algebra.generators.len())));
        }
        let pairs: Vec<(Mat, Mat)> = algebra.generators.iter().cloned().zip(images.iter().cloned()).collect();
        let gc = graph_closure(&algebra.ambient, ambient, &pairs, false, false, cfg.max_words)?;
        // Unit of A goes to the unit of the generated algebra.
        let unit = gc.y_span().unit().unwrap_or_else(|| ambient.identity());
        let mut pairs = pairs;
        pairs.push((algebra.ambient.identity(), unit));
        let gc = graph_closure(&algebra.ambient, ambient, &pairs, false, false, cfg.max_words)?;
        if !gc.is_graph() {
            let defect = gc.conflict_space().basis().first().map(frob).unwrap_or(1.0);
            return Err(Error::NotHomomorphism(defect));
        }
        let j = gc.graph_map()?.restrict(&algebra.span)?;
        CstarCover::from_map(name, algebra, j, validation, cfg)
    }

    pub fn from_map(name: &str, algebra: &Arc<OperatorAlgebra>, j: LinearMap, validation: Validation, cfg: &Config) -> Result<Self> {
        let defect = j.multiplicative_defect()?;
        if defect > VERIFY_TOL {
            return Err(Error::NotHomomorphism(defect));
        }
        let c = generate_algebra(j.codomain(), j.images(), true, false)?;
        let mut cover = CstarCover { name: name.into(), algebra: algebra.clone(), c, j, ci_report: None };
        if validation == Validation::Full {
            let rep = ci_check(&cover.j, cfg);
            match rep.verdict {
                Verdict::CompletelyIsometric => {}
                Verdict::Inconclusive => return Err(Error::Inconclusive("complete isometry of j".into())),
                v => return Err(Error::NotCompletelyIsometric(format!("{v:?}"))),
            }
            cover.ci_report = Some(rep);
        }
        Ok(cover)
    }

    /// Checks that `c` is exactly the C*-algebra generated by `j(A)`.
    pub fn check_generates(&self, declared: &AlgebraSpan) -> Result<()> {
        if !declared.contains_span(&self.c) || declared.dim() != self.c.dim() {
            return Err(Error::DoesNotGenerate { got: self.c.dim(), want: declared.dim() });
        }
        Ok(())
    }

    pub fn ambient(&self) -> &Ambient {
        self.j.codomain()
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    pub fn block_dims(&self) -> Result<Vec<usize>> {
        Ok(self.c.structure()?.dims())
    }

    /// `j` evaluated on the generators of `A`.
    pub fn gen_images(&self) -> Vec<Mat> {
        self.algebra.generators.iter().map(|g| self.j.apply(g).expect("generator in A")).collect()
    }

    pub fn unit_image(&self) -> Mat {
        self.j.apply(&self.algebra.ambient.identity()).expect("unit in A")
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }
}

/// Surjective *-homomorphism `π: C_up → C_low` with `π ∘ j_up = j_low`.
#[derive(Debug, Clone)]
pub struct CoverMorphism {
    pub pi: LinearMap,
    /// Blocks of the upper C*-algebra killed by `π`.
    pub kernel: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum Induced {
    Morphism(CoverMorphism),
    Absent(Witness),
}

impl Induced {
    pub fn morphism(self) -> Option<CoverMorphism> {
        match self {
            Induced::Morphism(m) => Some(m),
            Induced::Absent(_) => None,
        }
    }

    pub fn exists(&self) -> bool {
        matches!(self, Induced::Morphism(_))
    }
}

fn same_algebra(a: &CstarCover, b: &CstarCover) -> Result<()> {
    if !Arc::ptr_eq(&a.algebra, &b.algebra) && !a.algebra.span.same_span(&b.algebra.span) {
        return Err(Error::Input(format!("covers {} and {} are of different algebras", a.name, b.name)));
    }
    Ok(())
}

/// Graph closure of `{(j_up(g), j_low(g))}`; a graph yields the morphism.
pub fn induced_morphism(upper: &CstarCover, lower: &CstarCover, cfg: &Config) -> Result<Induced> {
    same_algebra(upper, lower)?;
    let mut pairs: Vec<(Mat, Mat)> = upper.gen_images().into_iter().zip(lower.gen_images()).collect();
    pairs.push((upper.unit_image(), lower.unit_image()));
    let gc = graph_closure(upper.ambient(), lower.ambient(), &pairs, true, false, cfg.max_words)?;
    if !gc.is_graph() {
        let gl = lower.gen_images();
        let probes: Vec<Mat> = upper.algebra.probe_order().into_iter().map(|g| gl[g].clone()).collect();
        return Ok(Induced::Absent(gc.witness(&probes).expect("conflict space is nonzero")));
    }
    let pi = gc.graph_map()?.restrict(&upper.c)?;
    let st = upper.c.structure()?;
    let kernel: Vec<usize> = (0..st.len()).filter(|&i| frob(&pi.apply(&st.blocks[i].z).expect("z in C")) < 1e-6).collect();
    Ok(Induced::Morphism(CoverMorphism { pi, kernel }))
}

/// `lower ≼ upper`: a morphism from the upper cover onto the lower one.
pub fn below(lower: &CstarCover, upper: &CstarCover, cfg: &Config) -> Result<bool> {
    Ok(induced_morphism(upper, lower, cfg)?.exists())
}

pub fn equivalent(a: &CstarCover, b: &CstarCover, cfg: &Config) -> Result<bool> {
    let (Some(f), Some(g)) = (induced_morphism(a, b, cfg)?.morphism(), induced_morphism(b, a, cfg)?.morphism()) else {
        return Ok(false);
    };
    let round = f.pi.then(&g.pi)?;
    let id = LinearMap::from_fn(&a.c, a.ambient(), |m| m.clone())?;
    Ok(round.distance(&id)? < VERIFY_TOL)
}

/// Direct-sum cover `⊕ j_λ` generating `C*(⊕ j_λ(A))`.
pub fn join(covers: &[&CstarCover], cfg: &Config) -> Result<CstarCover> {
    let first = covers.first().ok_or_else(|| Error::Input("join of nothing".into()))?;
    for c in covers {
        same_algebra(first, c)?;
    }
    let mut amb = first.ambient().clone();
    for c in &covers[1..] {
        amb = amb.direct_sum(c.ambient());
    }
    let j = LinearMap::from_fn(&first.algebra.span, &amb, |a| {
        let parts: Vec<Mat> = covers.iter().map(|c| c.j.apply(a).expect("a in A")).collect();
        crate::linalg::block_diag(&parts)
    })?;
    let names: Vec<&str> = covers.iter().map(|c| c.name.as_str()).collect();
    // A direct sum containing a completely isometric summand is one.
    let out = CstarCover::from_map(&format!("({})", names.join(" ∨ ")), &first.algebra, j, Validation::Structural, cfg)?;
    for c in covers {
        if !below(c, &out, cfg)? {
            return Err(Error::NoMorphism(format!("{} is not below the join", c.name)));
        }
    }
    Ok(out)
}

/// Restrict a cover to the ambient blocks where `p` lives, applying `x ↦ p x`.
fn corner_cover(name: &str, cover: &CstarCover, p: &Mat, validation: Validation, cfg: &Config) -> Result<CstarCover> {
    let amb = cover.ambient();
    let blocks = amb.support_blocks(p, 1e-9);
    let sub = amb.sub(&blocks)?;
    let j = LinearMap::from_fn(&cover.algebra.span, &sub, |a| amb.restrict(&(p * cover.j.apply(a).expect("a in A")), &blocks))?;
    CstarCover::from_map(name, &cover.algebra, j, validation, cfg)
}

/// Quotient of the join by the union of the kernels onto the two inputs.
pub fn meet(a: &CstarCover, b: &CstarCover, cfg: &Config) -> Result<CstarCover> {
    let v = join(&[a, b], cfg)?;
    let ka = induced_morphism(&v, a, cfg)?.morphism().ok_or_else(|| Error::NoMorphism("join onto first".into()))?.kernel;
    let kb = induced_morphism(&v, b, cfg)?.morphism().ok_or_else(|| Error::NoMorphism("join onto second".into()))?.kernel;
    let mut union = ka;
    for k in kb {
        if !union.contains(&k) {
            union.push(k);
        }
    }
    union.sort();
    let q = corner_quotient(&v.c, &union)?;
    corner_cover(&format!("({} ∧ {})", a.name, b.name), &v, &q.projection, Validation::Full, cfg)
}

/// Is the ideal of the listed blocks a boundary ideal? Runs the CI check of
/// the quotient map restricted to `j(A)`.
pub fn is_boundary(cover: &CstarCover, set: &[usize], cfg: &Config) -> Result<CbReport> {
    let q = corner_quotient(&cover.c, set)?;
    let amb = cover.ambient();
    let blocks = amb.support_blocks(&q.projection, 1e-9);
    let ja = cover.j.image_span();
    if blocks.is_empty() {
        // Quotient by everything: the zero map on a nonzero space.
        let zero = Ambient::full(1);
        let phi = LinearMap::from_fn(&ja, &zero, |_| Mat::zeros(1, 1))?;
        return Ok(ci_check(&phi, cfg));
    }
    let sub = amb.sub(&blocks)?;
    let phi = LinearMap::from_fn(&ja, &sub, |x| amb.restrict(&q.apply(x), &blocks))?;
    Ok(ci_check(&phi, cfg))
}

#[derive(Debug, Clone)]
pub struct ShilovReport {
    pub set: Vec<usize>,
    pub singletons: Vec<Verdict>,
    pub union: Verdict,
}

impl ShilovReport {
    pub fn is_decisive(&self) -> bool {
        self.singletons.iter().all(|v| v.is_decisive()) && self.union.is_decisive()
    }
}

/// Largest boundary ideal, as a set of blocks.
pub fn shilov(cover: &CstarCover, cfg: &Config) -> Result<ShilovReport> {
    let st = cover.c.structure()?;
    let singletons: Vec<Verdict> = (0..st.len())
        .into_par_iter()
        .map(|i| is_boundary(cover, &[i], cfg).map(|r| r.verdict))
        .collect::<Result<Vec<_>>>()?;
    let set: Vec<usize> = (0..st.len()).filter(|&i| singletons[i] == Verdict::CompletelyIsometric).collect();
    let union = if set.is_empty() { Verdict::CompletelyIsometric } else { is_boundary(cover, &set, cfg)?.verdict };
    Ok(ShilovReport { set, singletons, union })
}

/// The C*-envelope: the cover modulo its Shilov ideal.
pub fn envelope(cover: &CstarCover, cfg: &Config) -> Result<CstarCover> {
    let rep = shilov(cover, cfg)?;
    envelope_from(cover, &rep, cfg)
}

pub fn envelope_from(cover: &CstarCover, rep: &ShilovReport, cfg: &Config) -> Result<CstarCover> {
    if !rep.is_decisive() {
        return Err(Error::Inconclusive("Shilov boundary".into()));
    }
    if rep.union != Verdict::CompletelyIsometric {
        return Err(Error::NotCompletelyIsometric("union of boundary blocks".into()));
    }
    let q = corner_quotient(&cover.c, &rep.set)?;
    corner_cover(&format!("env({})", cover.name), cover, &q.projection, Validation::Structural, cfg)
}

/// Span of `j(A)` as an operator space (for reports).
pub fn image_of_a(cover: &CstarCover) -> AlgebraSpan {
    orthonormal_span(cover.ambient(), cover.j.images()).expect("images in ambient")
}
