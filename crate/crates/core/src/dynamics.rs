//! Finite group actions on operator algebras and their lifts to covers.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::AlgebraSpan;
use crate::cb::{ci_check, LinearMap, Verdict};
use crate::closure::{graph_closure, Witness};
use crate::covers::{CoverMorphism, CstarCover, OperatorAlgebra, Validation};
use crate::error::{Error, Result};
use crate::linalg::{eigh, frob, null_space, random_complex, Mat, C64};
use crate::structure::block_of_projection;
use crate::tol::{Config, VERIFY_TOL};

const INNER_RETRIES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteGroup {
    pub name: String,
    /// `table[s][t]` is the index of `st`.
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
    pub inverse: Vec<usize>,
}

impl FiniteGroup {
    pub fn from_table(name: &str, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 || table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(Error::BadGroup("table must be square with entries below the order".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|s| table[e][s] == s && table[s][e] == s))
            .ok_or_else(|| Error::BadGroup("no identity".into()))?;
        let mut inverse = vec![0; n];
        for s in 0..n {
            inverse[s] = (0..n)
                .find(|&t| table[s][t] == identity && table[t][s] == identity)
                .ok_or_else(|| Error::BadGroup(format!("element {s} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::BadGroup(format!("not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(FiniteGroup { name: name.into(), table, identity, inverse })
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|s| (0..n).map(|t| (s + t) % n).collect()).collect();
        FiniteGroup::from_table(&format!("Z/{n}"), table).expect("cyclic table")
    }

    pub fn klein() -> Self {
        let table = (0..4).map(|s| (0..4).map(|t| s ^ t).collect()).collect();
        FiniteGroup::from_table("Z/2xZ/2", table).expect("klein table")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, s: usize, t: usize) -> usize {
        self.table[s][t]
    }

    pub fn element_order(&self, s: usize) -> usize {
        let mut k = 1;
        let mut x = s;
        while x != self.identity {
            x = self.mul(x, s);
            k += 1;
        }
        k
    }
}

/// `(A, G, α)` with each `α_s` a completely isometric automorphism of `A`.
#[derive(Debug, Clone)]
pub struct DynamicalSystem {
    pub algebra: Arc<OperatorAlgebra>,
    pub group: FiniteGroup,
    pub alpha: Vec<LinearMap>,
}

/// Automorphism of `A` from generator images, extended multiplicatively.
fn extend_on_generators(algebra: &OperatorAlgebra, images: &[Mat], cfg: &Config) -> Result<LinearMap> {
    if images.len() != algebra.generators.len() {
        return Err(Error::BadAction(format!("{} images for {} generators", images.len(), algebra.generators.len())));
    }
    let mut pairs: Vec<(Mat, Mat)> = algebra.generators.iter().cloned().zip(images.iter().cloned()).collect();
    pairs.push((algebra.ambient.identity(), algebra.ambient.identity()));
    let gc = graph_closure(&algebra.ambient, &algebra.ambient, &pairs, false, false, cfg.max_words)?;
    if !gc.is_graph() {
        return Err(Error::BadAction("generator images do not extend to a homomorphism".into()));
    }
    gc.graph_map()?.restrict(&algebra.span)
}

impl DynamicalSystem {
    /// Validates the action given by generator images for each group element.
    pub fn make(algebra: &Arc<OperatorAlgebra>, group: FiniteGroup, images: Vec<Vec<Mat>>, validation: Validation, cfg: &Config) -> Result<Self> {
        if images.len() != group.order() {
            return Err(Error::BadAction(format!("{} maps for a group of order {}", images.len(), group.order())));
        }
        let alpha = images.iter().map(|im| extend_on_generators(algebra, im, cfg)).collect::<Result<Vec<_>>>()?;
        let ds = DynamicalSystem { algebra: algebra.clone(), group, alpha };
        ds.validate(validation, cfg)?;
        Ok(ds)
    }

    /// `α_s = ad(U_s)` for unitaries `U_s` in the defining ambient.
    pub fn conjugation(algebra: &Arc<OperatorAlgebra>, group: FiniteGroup, unitaries: &[Mat], cfg: &Config) -> Result<Self> {
        for u in unitaries {
            let n = u.nrows();
            if frob(&(u * u.adjoint() - Mat::identity(n, n))) > VERIFY_TOL {
                return Err(Error::BadAction("conjugating matrix is not unitary".into()));
            }
        }
        let images = unitaries
            .iter()
            .map(|u| algebra.generators.iter().map(|g| u * g * u.adjoint()).collect())
            .collect();
        // Unitary conjugation is a complete isometry.
        DynamicalSystem::make(algebra, group, images, Validation::Structural, cfg)
    }

    fn validate(&self, validation: Validation, cfg: &Config) -> Result<()> {
        let a = &self.algebra.span;
        let g = &self.group;
        for (s, al) in self.alpha.iter().enumerate() {
            for im in al.images() {
                if !a.contains(im) {
                    return Err(Error::BadAction(format!("α_{s} leaves A")));
                }
            }
            if !al.is_injective() {
                return Err(Error::BadAction(format!("α_{s} is not bijective")));
            }
            if al.multiplicative_defect()? > VERIFY_TOL {
                return Err(Error::BadAction(format!("α_{s} is not multiplicative")));
            }
            if validation == Validation::Full {
                let rep = ci_check(al, cfg);
                if rep.verdict != Verdict::CompletelyIsometric {
                    return Err(Error::BadAction(format!("α_{s} is not completely isometric ({:?})", rep.verdict)));
                }
            }
        }
        let id = LinearMap::from_fn(a, &self.algebra.ambient, |m| m.clone())?;
        if self.alpha[g.identity].distance(&id)? > VERIFY_TOL {
            return Err(Error::BadAction("α_e is not the identity".into()));
        }
        for s in 0..g.order() {
            for t in 0..g.order() {
                let comp = self.alpha[t].then(&self.alpha[s])?;
                if comp.distance(&self.alpha[g.mul(s, t)])? > VERIFY_TOL {
                    return Err(Error::BadAction(format!("α_{s} α_{t} ≠ α_{}", g.mul(s, t))));
                }
            }
        }
        Ok(())
    }

    pub fn act(&self, s: usize, a: &Mat) -> Result<Mat> {
        self.alpha[s].apply(a)
    }
}

#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// `β_s` on the cover algebra, one per group element, when admissible.
    pub beta: Option<Vec<LinearMap>>,
    /// First group element whose closure is not a graph, with the witness.
    pub witness: Option<(usize, Witness)>,
    pub closure_dims: Vec<usize>,
}

/// Does the action lift to the cover? Graph closure of `(j(a), j(α_s(a)))`.
pub fn admissible(ds: &DynamicalSystem, cover: &CstarCover, cfg: &Config) -> Result<AdmissibilityReport> {
    let gens = cover.gen_images();
    let unit = cover.unit_image();
    let probes: Vec<Mat> = ds.algebra.probe_order().into_iter().map(|g| gens[g].clone()).collect();
    let mut betas = Vec::new();
    let mut dims = Vec::new();
    for s in 0..ds.group.order() {
        let moved: Vec<Mat> = ds
            .algebra
            .generators
            .iter()
            .map(|g| cover.j.apply(&ds.act(s, g)?))
            .collect::<Result<Vec<_>>>()?;
        let mut pairs: Vec<(Mat, Mat)> = gens.iter().cloned().zip(moved).collect();
        pairs.push((unit.clone(), unit.clone()));
        let gc = graph_closure(cover.ambient(), cover.ambient(), &pairs, true, false, cfg.max_words)?;
        dims.push(gc.dim());
        if !gc.is_graph() {
            let w = gc.witness(&probes).expect("conflict space is nonzero");
            return Ok(AdmissibilityReport { admissible: false, beta: None, witness: Some((s, w)), closure_dims: dims });
        }
        betas.push(gc.graph_map()?.restrict(&cover.c)?);
    }
    check_lift(ds, cover, &betas)?;
    Ok(AdmissibilityReport { admissible: true, beta: Some(betas), witness: None, closure_dims: dims })
}

/// Verifies that `β` is an action by *-automorphisms covering `α`.
pub fn check_lift(ds: &DynamicalSystem, cover: &CstarCover, beta: &[LinearMap]) -> Result<()> {
    let g = &ds.group;
    for (s, b) in beta.iter().enumerate() {
        if b.multiplicative_defect()? > VERIFY_TOL || b.star_defect()? > VERIFY_TOL || !b.is_injective() {
            return Err(Error::BadAction(format!("β_{s} is not a *-automorphism")));
        }
        for a in ds.algebra.span.basis() {
            let lhs = b.apply(&cover.j.apply(a)?)?;
            let rhs = cover.j.apply(&ds.act(s, a)?)?;
            if frob(&(lhs - rhs)) > VERIFY_TOL {
                return Err(Error::BadAction(format!("β_{s} ∘ j ≠ j ∘ α_{s}")));
            }
        }
    }
    for s in 0..g.order() {
        for t in 0..g.order() {
            if beta[t].then(&beta[s])?.distance(&beta[g.mul(s, t)])? > VERIFY_TOL {
                return Err(Error::BadAction(format!("β_{s} β_{t} ≠ β_st")));
            }
        }
    }
    Ok(())
}

/// Permutation of the blocks of `c` induced by a *-automorphism.
pub fn block_permutation(c: &AlgebraSpan, beta: &LinearMap) -> Result<Vec<usize>> {
    let st = c.structure()?;
    st.blocks
        .iter()
        .map(|b| {
            let img = beta.apply(&b.z)?;
            block_of_projection(st, &img).ok_or_else(|| Error::Structure("automorphism does not permute blocks".into()))
        })
        .collect()
}

/// Is `ker π` invariant under the lifted action on the upper cover?
pub fn invariant_kernel_check(upper: &CstarCover, beta: &[LinearMap], pi: &CoverMorphism) -> Result<bool> {
    for b in beta {
        let perm = block_permutation(&upper.c, b)?;
        if pi.kernel.iter().any(|&k| !pi.kernel.contains(&perm[k])) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GroupLaw {
    Exact,
    Projective { defect: f64 },
}

#[derive(Debug, Clone)]
pub struct InnerReport {
    /// Unitaries of `c` implementing each `α_s`, if all exist.
    pub unitaries: Option<Vec<Mat>>,
    /// Dimension of the intertwiner space for each group element.
    pub solution_dims: Vec<usize>,
    pub group_law: Option<GroupLaw>,
    /// First element with no implementing unitary.
    pub missing: Option<usize>,
}

/// Unitaries `U` of the C*-algebra `c` with `U x U* = y` for the pairs.
fn implementing_unitary(c: &AlgebraSpan, unit: &Mat, pairs: &[(Mat, Mat)], rng: &mut ChaCha8Rng) -> (usize, Option<Mat>) {
    let amb = c.ambient();
    let d = c.dim();
    let len = amb.vec_len();
    let rows = 2 * pairs.len() * len;
    let mut sys = Mat::zeros(rows.max(1), d);
    for (p, (x, y)) in pairs.iter().enumerate() {
        for (k, b) in c.basis().iter().enumerate() {
            let r1 = amb.vectorize(&(b * x - y * b));
            let r2 = amb.vectorize(&(b * x.adjoint() - y.adjoint() * b));
            for t in 0..len {
                sys[(2 * p * len + t, k)] = r1[t];
                sys[((2 * p + 1) * len + t, k)] = r2[t];
            }
        }
    }
    let ns = null_space(&sys, 1e-8);
    let sol_dim = ns.ncols();
    if sol_dim == 0 {
        return (0, None);
    }
    for _ in 0..INNER_RETRIES {
        let mut coeffs = vec![C64::new(0.0, 0.0); d];
        for j in 0..sol_dim {
            let w = random_complex(rng);
            for k in 0..d {
                coeffs[k] += ns[(k, j)] * w;
            }
        }
        let x = c.combine(&coeffs);
        // Polar part on the range of the unit.
        let (vals, vecs) = eigh(&(x.adjoint() * &x));
        let n = x.nrows();
        let mut inv_sqrt = Mat::zeros(n, n);
        let mut rank = 0;
        for (i, &l) in vals.iter().enumerate() {
            if l > 1e-10 {
                let v = vecs.column(i);
                inv_sqrt += (v * v.adjoint()).scale(1.0 / l.sqrt());
                rank += 1;
            }
        }
        let unit_rank = (0..n).map(|i| unit[(i, i)].re).sum::<f64>().round() as usize;
        if rank != unit_rank {
            continue;
        }
        let u = &x * inv_sqrt;
        let ok = c.contains(&u)
            && frob(&(u.adjoint() * &u - unit)) < VERIFY_TOL
            && pairs.iter().all(|(x, y)| frob(&(&u * x * u.adjoint() - y)) < VERIFY_TOL);
        if ok {
            return (sol_dim, Some(u));
        }
    }
    (sol_dim, None)
}

/// Rescale by central unitaries so that `U_s^{ord(s)} = 1`, then fix the
/// residual root of unity by the phase of the first nonzero entry.
fn normalize_power(c: &AlgebraSpan, u: &Mat, ord: usize) -> Result<Mat> {
    let st = c.structure()?;
    let mut p = st.unit.clone();
    for _ in 0..ord {
        p = &p * u;
    }
    let n = u.nrows();
    let mut corr = Mat::zeros(n, n);
    for b in &st.blocks {
        let tr = |m: &Mat| (0..n).map(|i| m[(i, i)]).sum::<C64>();
        let lambda = tr(&(&b.z * &p)) / tr(&b.z);
        let root = lambda.powf(-1.0 / ord as f64);
        corr += &b.z * root;
    }
    let v = u * corr;
    let first = v.iter().find(|z| z.norm() > 1e-9).cloned().unwrap_or(C64::new(1.0, 0.0));
    let mut best = (f64::INFINITY, C64::new(1.0, 0.0));
    for k in 0..ord {
        let zeta = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / ord as f64);
        let arg = (zeta * first).arg().abs();
        if arg < best.0 - 1e-9 {
            best = (arg, zeta);
        }
    }
    Ok(v * best.1)
}

fn inner_in(c: &AlgebraSpan, ds: &DynamicalSystem, x_of: &dyn Fn(&Mat) -> Result<Mat>, cfg: &Config) -> Result<InnerReport> {
    let st = c.structure()?;
    let unit = st.unit.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x1a2b);
    let g = &ds.group;
    let mut us = Vec::new();
    let mut dims = Vec::new();
    for s in 0..g.order() {
        if s == g.identity {
            us.push(unit.clone());
            dims.push(0);
            continue;
        }
        let mut pairs = Vec::new();
        for gen in &ds.algebra.generators {
            pairs.push((x_of(gen)?, x_of(&ds.act(s, gen)?)?));
        }
        let (dim, u) = implementing_unitary(c, &unit, &pairs, &mut rng);
        dims.push(dim);
        match u {
            Some(u) => us.push(normalize_power(c, &u, g.element_order(s))?),
            None => return Ok(InnerReport { unitaries: None, solution_dims: dims, group_law: None, missing: Some(s) }),
        }
    }
    let mut defect: f64 = 0.0;
    for s in 0..g.order() {
        for t in 0..g.order() {
            defect = defect.max(frob(&(&us[s] * &us[t] - &us[g.mul(s, t)])));
        }
    }
    let law = if defect < VERIFY_TOL { GroupLaw::Exact } else { GroupLaw::Projective { defect } };
    Ok(InnerReport { unitaries: Some(us), solution_dims: dims, group_law: Some(law), missing: None })
}

/// Unitaries `U_s ∈ C` with `ad(U_s) ∘ j = j ∘ α_s`.
pub fn locally_inner(ds: &DynamicalSystem, cover: &CstarCover, cfg: &Config) -> Result<InnerReport> {
    inner_in(&cover.c, ds, &|a| cover.j.apply(a), cfg)
}

/// Unitaries in `A ∩ A*` implementing the action on `A` itself.
pub fn inner_in_itself(ds: &DynamicalSystem, cfg: &Config) -> Result<InnerReport> {
    let d = ds.algebra.diagonal();
    inner_in(&d, ds, &|a| Ok(a.clone()), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_tables() {
        let z3 = FiniteGroup::cyclic(3);
        assert_eq!(z3.inverse, vec![0, 2, 1]);
        assert_eq!(z3.element_order(1), 3);
        let k = FiniteGroup::klein();
        assert!((0..4).all(|s| k.inverse[s] == s));
        assert!(FiniteGroup::from_table("bad", vec![vec![0, 1], vec![1, 1]]).is_err());
    }
}
