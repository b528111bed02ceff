//! Wedderburn decomposition of finite-dimensional C*-algebras.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{orthonormal_span, AlgebraSpan};
use crate::error::{Error, Result};
use crate::linalg::{eigh, frob, hermitian_part, null_space, random_real, Mat, C64};
use crate::tol::{GAP_AMBIGUOUS, GAP_TOL, MEMBER_TOL};

const STRUCTURE_SEED: u64 = 0x00c0_ffee;
const SPECTRUM_RETRIES: usize = 5;

/// One simple summand `M_m` appearing with multiplicity `r`.
#[derive(Debug, Clone)]
pub struct Block {
    pub dim: usize,
    pub mult: usize,
    /// Minimal central projection.
    pub z: Mat,
    /// First diagonal index where `z` is switched on.
    pub first_index: usize,
}

#[derive(Debug, Clone)]
pub struct BlockStructure {
    pub blocks: Vec<Block>,
    pub unit: Mat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockShape {
    pub dim: usize,
    pub mult: usize,
}

impl BlockStructure {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// The simple summand sizes `m_i`, in canonical order.
    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }

    pub fn shape(&self) -> Vec<BlockShape> {
        self.blocks.iter().map(|b| BlockShape { dim: b.dim, mult: b.mult }).collect()
    }

    /// `M4⊕M2⊕ℂ²` style rendering; multiplicities are not shown.
    pub fn render(&self) -> String {
        render_dims(&self.dims())
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    /// Sum of the central projections of the listed blocks.
    pub fn projection(&self, set: &[usize]) -> Mat {
        let n = self.unit.nrows();
        let mut p = Mat::zeros(n, n);
        for &i in set {
            p += &self.blocks[i].z;
        }
        p
    }

    pub fn complement(&self, set: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|i| !set.contains(i)).collect()
    }
}

pub(crate) fn compute_structure(c: &AlgebraSpan) -> Result<BlockStructure> {
    if c.dim() == 0 {
        return Ok(BlockStructure { blocks: vec![], unit: Mat::zeros(c.ambient().dim(), c.ambient().dim()) });
    }
    if !c.is_star_closed() {
        return Err(Error::NotCstar("span is not closed under adjoints".into()));
    }
    let unit = c.unit().ok_or_else(|| Error::NotCstar("no unit".into()))?;
    let zc = center(c);
    let herm: Vec<Mat> = zc.basis().iter().map(hermitian_part).collect();
    let mut sa = Vec::new();
    for h in &herm {
        sa.push(h.clone());
    }
    for b in zc.basis() {
        sa.push((b - b.adjoint()) * C64::new(0.0, -0.5));
    }
    let sa_span = orthonormal_span(c.ambient(), &sa)?;
    // Hermitian combinations of a Hermitian spanning set.
    let sa_basis: Vec<Mat> = sa_span.basis().iter().map(hermitian_part).collect();
    let center_dim = zc.dim();

    let mut rng = ChaCha8Rng::seed_from_u64(STRUCTURE_SEED);
    for _ in 0..=SPECTRUM_RETRIES {
        let n = c.ambient().dim();
        let mut h = Mat::zeros(n, n);
        for b in &sa_basis {
            h += b.scale(random_real(&mut rng));
        }
        let h = &unit * &h * &unit;
        let (vals, vecs) = eigh(&h);
        let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
        let mut ambiguous = false;
        for k in 1..vals.len() {
            let gap = vals[k] - vals[k - 1];
            if gap < GAP_TOL {
                clusters.last_mut().unwrap().push(k);
            } else {
                if gap < GAP_AMBIGUOUS {
                    ambiguous = true;
                }
                clusters.push(vec![k]);
            }
        }
        if ambiguous {
            continue;
        }
        let mut zs = Vec::new();
        for cl in &clusters {
            let mut p = Mat::zeros(n, n);
            for &k in cl {
                let v = vecs.column(k);
                p += v * v.adjoint();
            }
            let z = &unit * p;
            let z = hermitian_part(&z);
            if frob(&z) > 1e-6 {
                zs.push(z);
            }
        }
        if zs.len() != center_dim {
            continue;
        }
        let mut blocks = Vec::new();
        for z in zs {
            let corner: Vec<Mat> = c.basis().iter().map(|b| &z * b).collect();
            let corner = orthonormal_span(c.ambient(), &corner)?;
            let d = corner.dim();
            let m = (d as f64).sqrt().round() as usize;
            if m * m != d {
                return Err(Error::Structure(format!("corner of dimension {d} is not a square")));
            }
            if center(&corner).dim() != 1 {
                return Err(Error::Structure("corner is not simple".into()));
            }
            let tr: f64 = (0..n).map(|i| z[(i, i)].re).sum();
            let mult = (tr / m as f64).round() as usize;
            let first_index = (0..n).find(|&i| z[(i, i)].re > 0.5).unwrap_or(n);
            blocks.push(Block { dim: m, mult, z, first_index });
        }
        blocks.sort_by(|a, b| b.dim.cmp(&a.dim).then(a.first_index.cmp(&b.first_index)));
        return Ok(BlockStructure { blocks, unit });
    }
    Err(Error::AmbiguousSpectrum)
}

/// Center of a span: elements commuting with every basis element.
pub fn center(c: &AlgebraSpan) -> AlgebraSpan {
    let amb = c.ambient();
    let d = c.dim();
    let len = amb.vec_len();
    let mut sys = Mat::zeros(len * d, d);
    for (l, bl) in c.basis().iter().enumerate() {
        for (k, bk) in c.basis().iter().enumerate() {
            let comm = amb.vectorize(&(bk * bl - bl * bk));
            for t in 0..len {
                sys[(l * len + t, k)] = comm[t];
            }
        }
    }
    let ns = null_space(&sys, 1e-8);
    let elems: Vec<Mat> = (0..ns.ncols())
        .map(|j| {
            let coeffs: Vec<C64> = (0..d).map(|k| ns[(k, j)]).collect();
            c.combine(&coeffs)
        })
        .collect();
    orthonormal_span(amb, &elems).expect("ambient elements").with_flags(c.self_adjoint, c.unital)
}

pub fn minimal_central_projections(c: &AlgebraSpan) -> Result<Vec<Mat>> {
    Ok(c.structure()?.blocks.iter().map(|b| b.z.clone()).collect())
}

/// Blocks whose central projections lie in the ideal `ideal`.
pub fn ideal_blocks(c: &AlgebraSpan, ideal: &AlgebraSpan) -> Result<Vec<usize>> {
    let st = c.structure()?;
    let set: Vec<usize> = (0..st.len()).filter(|&i| ideal.contains(&st.blocks[i].z)).collect();
    let expect: usize = set.iter().map(|&i| st.blocks[i].dim.pow(2)).sum();
    if expect != ideal.dim() {
        return Err(Error::Structure(format!(
            "span of dimension {} is not a sum of blocks ({expect})",
            ideal.dim()
        )));
    }
    Ok(set)
}

/// The ideal `z_S C`.
pub fn blocks_of_ideal(c: &AlgebraSpan, set: &[usize]) -> Result<AlgebraSpan> {
    let z = c.structure()?.projection(set);
    let elems: Vec<Mat> = c.basis().iter().map(|b| &z * b).collect();
    Ok(orthonormal_span(c.ambient(), &elems)?.with_flags(true, false))
}

/// The quotient `C / z_S C` realized as the corner `(e - z_S) C`.
#[derive(Debug, Clone)]
pub struct CornerQuotient {
    pub algebra: AlgebraSpan,
    pub projection: Mat,
    pub kept: Vec<usize>,
}

impl CornerQuotient {
    pub fn apply(&self, x: &Mat) -> Mat {
        &self.projection * x
    }
}

pub fn corner_quotient(c: &AlgebraSpan, set: &[usize]) -> Result<CornerQuotient> {
    let st = c.structure()?;
    let kept = st.complement(set);
    let p = st.projection(&kept);
    let elems: Vec<Mat> = c.basis().iter().map(|b| &p * b).collect();
    let algebra = orthonormal_span(c.ambient(), &elems)?.with_flags(true, !kept.is_empty());
    Ok(CornerQuotient { algebra, projection: p, kept })
}

/// Block set of the annihilator of the ideal `z_S C`.
pub fn annihilator(c: &AlgebraSpan, set: &[usize]) -> Result<Vec<usize>> {
    Ok(c.structure()?.complement(set))
}

pub fn is_essential(c: &AlgebraSpan, set: &[usize]) -> Result<bool> {
    Ok(annihilator(c, set)?.is_empty())
}

pub fn is_maximal_ideal(c: &AlgebraSpan, set: &[usize]) -> Result<bool> {
    Ok(annihilator(c, set)?.len() == 1)
}

/// Index of the block whose central projection matches `p`.
pub fn block_of_projection(st: &BlockStructure, p: &Mat) -> Option<usize> {
    st.blocks.iter().position(|b| frob(&(&b.z - p)) < MEMBER_TOL.sqrt())
}

/// `M4⊕M2⊕ℂ²`-style type of a list of block sizes; runs of equal
/// scalar blocks collapse to a power.
pub fn render_dims(dims: &[usize]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < dims.len() {
        let d = dims[i];
        let run = dims[i..].iter().take_while(|&&x| x == d).count();
        let base = if d == 1 { "ℂ".to_string() } else { format!("M{d}") };
        let sup = |n: usize| n.to_string().chars().map(|c| "⁰¹²³⁴⁵⁶⁷⁸⁹".chars().nth(c as usize - '0' as usize).expect("digit")).collect::<String>();
        match (d, run) {
            (_, 1) => parts.push(base),
            (1, n) => parts.push(format!("ℂ{}", sup(n))),
            (_, n) => parts.extend(std::iter::repeat_n(base, n)),
        }
        i += run;
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join("⊕")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{generate_algebra, Ambient};
    use crate::linalg::{block_diag, unit};

    #[test]
    fn full_matrix_algebra_is_simple() {
        let amb = Ambient::full(3);
        let gens = vec![unit(3, 0, 1), unit(3, 1, 2)];
        let c = generate_algebra(&amb, &gens, true, true).unwrap();
        let st = c.structure().unwrap();
        assert_eq!(st.dims(), vec![3]);
        assert_eq!(st.blocks[0].mult, 1);
    }

    #[test]
    fn multiplicity_detected() {
        // x ↦ x ⊕ x for x in M2, plus a scalar corner.
        let amb = Ambient::new(vec![4, 1]).unwrap();
        let lift = |m: Mat| block_diag(&[m.clone(), m, Mat::zeros(1, 1)]);
        let gens = vec![lift(unit(2, 0, 1)), lift(unit(2, 1, 0)), block_diag(&[Mat::zeros(4, 4), unit(1, 0, 0)])];
        let c = generate_algebra(&amb, &gens, true, false).unwrap();
        let st = c.structure().unwrap();
        assert_eq!(st.shape(), vec![BlockShape { dim: 2, mult: 2 }, BlockShape { dim: 1, mult: 1 }]);
        assert!(frob(&(st.projection(&[0, 1]) - &st.unit)) < 1e-8);
    }

    #[test]
    fn quotient_and_annihilator() {
        let amb = Ambient::new(vec![2, 1, 1]).unwrap();
        let mut gens = vec![block_diag(&[unit(2, 0, 1), Mat::zeros(2, 2)])];
        gens.push(block_diag(&[Mat::zeros(2, 2), unit(2, 0, 0)]));
        gens.push(block_diag(&[Mat::zeros(2, 2), unit(2, 1, 1)]));
        let c = generate_algebra(&amb, &gens, true, true).unwrap();
        let st = c.structure().unwrap();
        assert_eq!(st.dims(), vec![2, 1, 1]);
        let q = corner_quotient(&c, &[1, 2]).unwrap();
        assert_eq!(q.algebra.dim(), 4);
        assert!(!is_essential(&c, &[1, 2]).unwrap());
        assert!(is_maximal_ideal(&c, &[1, 2]).unwrap());
        let ideal = blocks_of_ideal(&c, &[0, 2]).unwrap();
        assert_eq!(ideal_blocks(&c, &ideal).unwrap(), vec![0, 2]);
    }

    #[test]
    fn rendering() {
        assert_eq!(render_dims(&[4, 2, 1, 1]), "M4⊕M2⊕ℂ²");
        assert_eq!(render_dims(&[1; 8]), "ℂ⁸");
        assert_eq!(render_dims(&[2, 2]), "M2⊕M2");
        assert_eq!(render_dims(&[]), "0");
    }
}
