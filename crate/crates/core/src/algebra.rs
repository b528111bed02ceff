//! Ambient block-diagonal matrix algebras and orthonormal spans inside them.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{block_diag, frob, null_space, CVec, Mat, OrthoBasis, C64, ONE};
use crate::structure::BlockStructure;
use crate::tol::{MEMBER_TOL, RANK_TOL};

/// `M_{n_1} ⊕ ... ⊕ M_{n_k}` realized block-diagonally in `M_N`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ambient {
    blocks: Arc<Vec<usize>>,
}

impl Ambient {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::Input(format!("bad ambient blocks {blocks:?}")));
        }
        Ok(Ambient { blocks: Arc::new(blocks) })
    }

    pub fn full(n: usize) -> Self {
        Ambient::new(vec![n]).expect("positive size")
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut o = 0;
        for b in self.blocks.iter() {
            out.push(o);
            o += b;
        }
        out
    }

    pub fn block_range(&self, b: usize) -> std::ops::Range<usize> {
        let o: usize = self.blocks[..b].iter().sum();
        o..o + self.blocks[b]
    }

    /// Number of block-diagonal entries, the real dimension of the ambient.
    pub fn vec_len(&self) -> usize {
        self.blocks.iter().map(|b| b * b).sum()
    }

    pub fn vectorize(&self, m: &Mat) -> CVec {
        let mut v = Vec::with_capacity(self.vec_len());
        let mut o = 0;
        for &b in self.blocks.iter() {
            for i in 0..b {
                for j in 0..b {
                    v.push(m[(o + i, o + j)]);
                }
            }
            o += b;
        }
        CVec::from_vec(v)
    }

    pub fn devectorize(&self, v: &CVec) -> Mat {
        let n = self.dim();
        let mut m = Mat::zeros(n, n);
        let (mut o, mut k) = (0, 0);
        for &b in self.blocks.iter() {
            for i in 0..b {
                for j in 0..b {
                    m[(o + i, o + j)] = v[k];
                    k += 1;
                }
            }
            o += b;
        }
        m
    }

    /// Frobenius norm of the part of `m` outside the diagonal blocks.
    pub fn off_block_norm(&self, m: &Mat) -> f64 {
        let mut block = vec![0usize; self.dim()];
        for (b, r) in (0..self.blocks.len()).map(|b| (b, self.block_range(b))) {
            for i in r {
                block[i] = b;
            }
        }
        let mut s = 0.0;
        for i in 0..m.nrows().min(block.len()) {
            for j in 0..m.ncols().min(block.len()) {
                if block[i] != block[j] {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    pub fn check(&self, m: &Mat) -> Result<()> {
        let n = self.dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::AmbientMismatch(format!(
                "{self}: got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let off = self.off_block_norm(m);
        if off > MEMBER_TOL {
            return Err(Error::AmbientMismatch(format!("{self}: off-block mass {off:.3e}")));
        }
        Ok(())
    }

    pub fn identity(&self) -> Mat {
        Mat::identity(self.dim(), self.dim())
    }

    pub fn direct_sum(&self, other: &Ambient) -> Ambient {
        let mut b = (*self.blocks).clone();
        b.extend(other.blocks.iter());
        Ambient { blocks: Arc::new(b) }
    }

    /// Ambient made of the listed blocks, in the given order.
    pub fn sub(&self, blocks: &[usize]) -> Result<Ambient> {
        Ambient::new(blocks.iter().map(|&b| self.blocks[b]).collect())
    }

    /// Compress `m` to the listed blocks.
    pub fn restrict(&self, m: &Mat, blocks: &[usize]) -> Mat {
        let parts: Vec<Mat> = blocks
            .iter()
            .map(|&b| {
                let r = self.block_range(b);
                m.view((r.start, r.start), (r.len(), r.len())).into_owned()
            })
            .collect();
        block_diag(&parts)
    }

    /// Inverse of [`Ambient::restrict`]: place a matrix on the listed blocks.
    pub fn embed(&self, m: &Mat, blocks: &[usize]) -> Mat {
        let n = self.dim();
        let mut out = Mat::zeros(n, n);
        let mut o = 0;
        for &b in blocks {
            let r = self.block_range(b);
            out.view_mut((r.start, r.start), (r.len(), r.len()))
                .copy_from(&m.view((o, o), (r.len(), r.len())));
            o += r.len();
        }
        out
    }

    /// Blocks of the ambient on which `m` is nonzero.
    pub fn support_blocks(&self, m: &Mat, tol: f64) -> Vec<usize> {
        (0..self.blocks.len())
            .filter(|&b| {
                let r = self.block_range(b);
                frob(&m.view((r.start, r.start), (r.len(), r.len())).into_owned()) > tol
            })
            .collect()
    }
}

impl fmt::Display for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| format!("M{b}")).collect();
        write!(f, "{}", parts.join("⊕"))
    }
}

impl fmt::Debug for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ambient({:?})", self.blocks)
    }
}

impl Serialize for Ambient {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            blocks: &'a [usize],
        }
        Repr { blocks: &self.blocks }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ambient {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            blocks: Vec<usize>,
        }
        let r = Repr::deserialize(d)?;
        Ambient::new(r.blocks).map_err(serde::de::Error::custom)
    }
}

/// A matrix tagged with the ambient it lives in.
#[derive(Clone, Debug, PartialEq)]
pub struct MatElem {
    pub ambient: Ambient,
    pub m: Mat,
}

impl MatElem {
    pub fn new(ambient: &Ambient, m: Mat) -> Result<Self> {
        ambient.check(&m)?;
        Ok(MatElem { ambient: ambient.clone(), m })
    }

    pub fn adjoint(&self) -> MatElem {
        MatElem { ambient: self.ambient.clone(), m: self.m.adjoint() }
    }

    pub fn mul(&self, other: &MatElem) -> Result<MatElem> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch(format!("{} vs {}", self.ambient, other.ambient)));
        }
        Ok(MatElem { ambient: self.ambient.clone(), m: &self.m * &other.m })
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::op_norm(&self.m)
    }
}

/// Orthonormal (Hilbert-Schmidt) basis of a subspace of an ambient.
pub struct AlgebraSpan {
    ambient: Ambient,
    basis: Vec<Mat>,
    frame: OrthoBasis,
    pub self_adjoint: bool,
    pub unital: bool,
    pub(crate) structure: OnceLock<Result<BlockStructure>>,
}

impl Clone for AlgebraSpan {
    fn clone(&self) -> Self {
        AlgebraSpan {
            ambient: self.ambient.clone(),
            basis: self.basis.clone(),
            frame: self.frame.clone(),
            self_adjoint: self.self_adjoint,
            unital: self.unital,
            structure: self.structure.clone(),
        }
    }
}

impl fmt::Debug for AlgebraSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "AlgebraSpan(dim {} in {}, sa={}, unital={})",
            self.dim(),
            self.ambient,
            self.self_adjoint,
            self.unital
        )
    }
}

impl AlgebraSpan {
    fn from_frame(ambient: &Ambient, frame: OrthoBasis) -> Self {
        let basis = frame.cols().iter().map(|v| ambient.devectorize(v)).collect();
        AlgebraSpan {
            ambient: ambient.clone(),
            basis,
            frame,
            self_adjoint: false,
            unital: false,
            structure: OnceLock::new(),
        }
    }

    pub fn zero(ambient: &Ambient) -> Self {
        Self::from_frame(ambient, OrthoBasis::new(ambient.vec_len()))
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    pub fn element(&self, i: usize) -> MatElem {
        MatElem { ambient: self.ambient.clone(), m: self.basis[i].clone() }
    }

    pub fn frame(&self) -> &OrthoBasis {
        &self.frame
    }

    /// Frobenius distance from `m` to the span.
    pub fn residual(&self, m: &Mat) -> f64 {
        self.frame.distance(&self.ambient.vectorize(m)) + self.ambient.off_block_norm(m)
    }

    pub fn contains(&self, m: &Mat) -> bool {
        self.residual(m) < MEMBER_TOL * (1.0 + frob(m))
    }

    pub fn coeffs(&self, m: &Mat) -> Vec<C64> {
        self.frame.coeffs(&self.ambient.vectorize(m))
    }

    pub fn combine(&self, coeffs: &[C64]) -> Mat {
        let n = self.ambient.dim();
        let mut out = Mat::zeros(n, n);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            out += b * *c;
        }
        out
    }

    pub fn project(&self, m: &Mat) -> Mat {
        self.ambient.devectorize(&self.frame.project(&self.ambient.vectorize(m)))
    }

    /// Largest Frobenius residual of pairwise products.
    pub fn closure_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.basis {
            for b in &self.basis {
                worst = worst.max(self.frame.distance(&self.ambient.vectorize(&(a * b))));
            }
        }
        worst
    }

    pub fn is_algebra(&self) -> bool {
        self.closure_defect() < MEMBER_TOL
    }

    pub fn is_star_closed(&self) -> bool {
        self.basis.iter().all(|b| self.contains(&b.adjoint()))
    }

    /// Subspace equality by mutual containment.
    pub fn same_span(&self, other: &AlgebraSpan) -> bool {
        self.ambient == other.ambient
            && self.dim() == other.dim()
            && other.basis.iter().all(|b| self.contains(b))
    }

    pub fn contains_span(&self, other: &AlgebraSpan) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    /// Multiplicative unit of the span if it has one.
    pub fn unit(&self) -> Option<Mat> {
        if self.dim() == 0 {
            return None;
        }
        // e = sum c_k b_k with e b_l = b_l and b_l e = b_l for all l.
        let len = self.ambient.vec_len();
        let d = self.dim();
        let rows = 2 * d * len;
        let mut sys = Mat::zeros(rows, d);
        let mut rhs = CVec::zeros(rows);
        for l in 0..d {
            let bl = &self.basis[l];
            let target = self.ambient.vectorize(bl);
            for k in 0..d {
                let left = self.ambient.vectorize(&(&self.basis[k] * bl));
                let right = self.ambient.vectorize(&(bl * &self.basis[k]));
                for t in 0..len {
                    sys[(2 * l * len + t, k)] = left[t];
                    sys[((2 * l + 1) * len + t, k)] = right[t];
                }
            }
            for t in 0..len {
                rhs[2 * l * len + t] = target[t];
                rhs[(2 * l + 1) * len + t] = target[t];
            }
        }
        let coeffs = crate::linalg::lstsq(&sys, &rhs);
        let e = self.combine(coeffs.as_slice());
        let ok = self
            .basis
            .iter()
            .all(|b| frob(&(&e * b - b)) < 1e-7 && frob(&(b * &e - b)) < 1e-7);
        ok.then_some(e)
    }

    pub fn structure(&self) -> Result<&BlockStructure> {
        self.structure
            .get_or_init(|| crate::structure::compute_structure(self))
            .as_ref()
            .map_err(|e| e.clone())
    }

    pub(crate) fn with_flags(mut self, self_adjoint: bool, unital: bool) -> Self {
        self.self_adjoint = self_adjoint;
        self.unital = unital;
        self
    }
}

/// Orthonormal basis of the span of `elems`, in input order.
pub fn orthonormal_span(ambient: &Ambient, elems: &[Mat]) -> Result<AlgebraSpan> {
    let mut frame = OrthoBasis::new(ambient.vec_len());
    for m in elems {
        ambient.check(m)?;
        frame.push(&ambient.vectorize(m), RANK_TOL);
    }
    Ok(AlgebraSpan::from_frame(ambient, frame))
}

/// Smallest subalgebra containing `gens`, optionally *-closed and with the
/// ambient identity adjoined.
pub fn generate_algebra(
    ambient: &Ambient,
    gens: &[Mat],
    self_adjoint: bool,
    unital: bool,
) -> Result<AlgebraSpan> {
    let mut frame = OrthoBasis::new(ambient.vec_len());
    let mut elems: Vec<Mat> = Vec::new();
    let push = |m: Mat, frame: &mut OrthoBasis, elems: &mut Vec<Mat>, tol: f64| {
        let v = ambient.vectorize(&m);
        if frame.push(&v, tol) {
            elems.push(ambient.devectorize(frame.cols().last().unwrap()));
        }
    };
    if unital {
        push(ambient.identity(), &mut frame, &mut elems, RANK_TOL);
    }
    for g in gens {
        ambient.check(g)?;
        push(g.clone(), &mut frame, &mut elems, RANK_TOL);
        if self_adjoint {
            push(g.adjoint(), &mut frame, &mut elems, RANK_TOL);
        }
    }
    let cap = ambient.vec_len().pow(2).max(1);
    let mut old = 0;
    let mut rounds = 0;
    while old < elems.len() {
        rounds += 1;
        if rounds > cap {
            return Err(Error::NotAlgebra);
        }
        let fresh = elems.len();
        let mut cands = Vec::new();
        for i in 0..fresh {
            for j in 0..fresh {
                if i >= old || j >= old {
                    cands.push(&elems[i] * &elems[j]);
                }
            }
        }
        if self_adjoint {
            for e in &elems[old..fresh] {
                cands.push(e.adjoint());
            }
        }
        old = fresh;
        for cand in cands {
            push(cand, &mut frame, &mut elems, MEMBER_TOL);
        }
    }
    Ok(AlgebraSpan::from_frame(ambient, frame).with_flags(self_adjoint, unital))
}

/// Two-sided ideal of `alg` generated by `gens` (which must lie in `alg`).
pub fn generate_ideal(alg: &AlgebraSpan, gens: &[Mat]) -> Result<AlgebraSpan> {
    let amb = alg.ambient();
    let mut frame = OrthoBasis::new(amb.vec_len());
    for g in gens {
        let res = alg.residual(g);
        if res > MEMBER_TOL * (1.0 + frob(g)) {
            return Err(Error::NotMember(res));
        }
        frame.push(&amb.vectorize(g), RANK_TOL);
        for a in alg.basis() {
            let ag = a * g;
            frame.push(&amb.vectorize(&ag), MEMBER_TOL);
            frame.push(&amb.vectorize(&(g * a)), MEMBER_TOL);
            for b in alg.basis() {
                frame.push(&amb.vectorize(&(&ag * b)), MEMBER_TOL);
            }
        }
    }
    let star = alg.self_adjoint;
    Ok(AlgebraSpan::from_frame(amb, frame).with_flags(star, false))
}

/// `A ∩ A*`, the largest self-adjoint subalgebra.
pub fn diagonal(alg: &AlgebraSpan) -> AlgebraSpan {
    let amb = alg.ambient();
    let d = alg.dim();
    let len = amb.vec_len();
    let mut sys = Mat::zeros(len, 2 * d);
    for (k, b) in alg.basis().iter().enumerate() {
        sys.set_column(k, &amb.vectorize(b));
        sys.set_column(d + k, &(-amb.vectorize(&b.adjoint())));
    }
    let ns = null_space(&sys, RANK_TOL.max(1e-10) * 10.0);
    let mut elems = Vec::new();
    for j in 0..ns.ncols() {
        let coeffs: Vec<C64> = (0..d).map(|k| ns[(k, j)]).collect();
        elems.push(alg.combine(&coeffs));
    }
    // Hermitian parts give a basis that is stable under conjugation.
    let mut herm = Vec::new();
    for e in &elems {
        herm.push((e + e.adjoint()).scale(0.5));
        herm.push((e - e.adjoint()) * C64::new(0.0, -0.5));
    }
    let span = orthonormal_span(amb, &herm).expect("elements of the ambient");
    span.with_flags(true, alg.unital)
}

/// Intersection of two subspaces of the same ambient.
pub fn intersect(a: &AlgebraSpan, b: &AlgebraSpan) -> AlgebraSpan {
    let amb = a.ambient();
    let (da, db) = (a.dim(), b.dim());
    let len = amb.vec_len();
    let mut sys = Mat::zeros(len, da + db);
    for (k, x) in a.basis().iter().enumerate() {
        sys.set_column(k, &amb.vectorize(x));
    }
    for (k, x) in b.basis().iter().enumerate() {
        sys.set_column(da + k, &(-amb.vectorize(x)));
    }
    let ns = null_space(&sys, 1e-8);
    let elems: Vec<Mat> = (0..ns.ncols())
        .map(|j| {
            let coeffs: Vec<C64> = (0..da).map(|k| ns[(k, j)]).collect();
            a.combine(&coeffs)
        })
        .collect();
    orthonormal_span(amb, &elems).expect("elements of the ambient")
}

/// Direct-sum ambient holding pairs `(x, y)` as `x ⊕ y`.
pub fn pair_ambient(a: &Ambient, b: &Ambient) -> Ambient {
    a.direct_sum(b)
}

pub fn pair(x: &Mat, y: &Mat) -> Mat {
    block_diag(&[x.clone(), y.clone()])
}

pub fn identity_like(m: &Mat) -> Mat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| if i == j { ONE } else { C64::new(0.0, 0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit;

    fn t2_gens() -> Vec<Mat> {
        vec![unit(2, 0, 0), unit(2, 1, 1), unit(2, 0, 1)]
    }

    #[test]
    fn vectorize_roundtrip() {
        let amb = Ambient::new(vec![2, 1]).unwrap();
        let m = block_diag(&[unit(2, 0, 1), unit(1, 0, 0)]);
        assert_eq!(amb.devectorize(&amb.vectorize(&m)), m);
        assert_eq!(amb.vec_len(), 5);
    }

    #[test]
    fn ambient_rejects_off_block() {
        let amb = Ambient::new(vec![1, 1]).unwrap();
        assert!(amb.check(&unit(2, 0, 1)).is_err());
    }

    #[test]
    fn t2_generation() {
        let amb = Ambient::full(2);
        let t2 = generate_algebra(&amb, &t2_gens(), false, true).unwrap();
        assert_eq!(t2.dim(), 3);
        let m2 = generate_algebra(&amb, &t2_gens(), true, true).unwrap();
        assert_eq!(m2.dim(), 4);
        assert_eq!(diagonal(&t2).dim(), 2);
    }

    #[test]
    fn single_nilpotent() {
        let amb = Ambient::full(3);
        let a = generate_algebra(&amb, &[unit(3, 0, 1) + unit(3, 1, 2)], false, false).unwrap();
        assert_eq!(a.dim(), 2);
        assert!(a.unit().is_none());
    }

    #[test]
    fn ideal_of_upper_triangular() {
        let amb = Ambient::full(2);
        let t2 = generate_algebra(&amb, &t2_gens(), false, true).unwrap();
        let i = generate_ideal(&t2, &[unit(2, 0, 1)]).unwrap();
        assert_eq!(i.dim(), 1);
    }

    #[test]
    fn unit_of_corner() {
        let amb = Ambient::full(3);
        let a = generate_algebra(&amb, &[unit(3, 0, 1), unit(3, 1, 0)], true, false).unwrap();
        let e = a.unit().unwrap();
        assert!(frob(&(e - unit(3, 0, 0) - unit(3, 1, 1))) < 1e-9);
    }
}
