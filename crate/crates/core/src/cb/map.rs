use std::fmt;

use crate::algebra::{orthonormal_span, Ambient, AlgebraSpan};
use crate::error::{Error, Result};
use crate::linalg::{frob, null_space, singular_values, Mat, C64};
use crate::tol::{MEMBER_TOL, RANK_TOL};

/// Linear map from a span into an ambient, stored by its values on the
/// orthonormal basis of the domain.
#[derive(Clone)]
pub struct LinearMap {
    domain: AlgebraSpan,
    codomain: Ambient,
    images: Vec<Mat>,
}

impl fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearMap({:?} -> {})", self.domain, self.codomain)
    }
}

impl LinearMap {
    pub fn new(domain: AlgebraSpan, codomain: &Ambient, images: Vec<Mat>) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::Dimension(format!(
                "{} images for a domain of dimension {}",
                images.len(),
                domain.dim()
            )));
        }
        for m in &images {
            codomain.check(m)?;
        }
        Ok(LinearMap { domain, codomain: codomain.clone(), images })
    }

    /// Map given by evaluating `f` on the basis of `domain`.
    pub fn from_fn<F: Fn(&Mat) -> Mat>(domain: &AlgebraSpan, codomain: &Ambient, f: F) -> Result<Self> {
        let images = domain.basis().iter().map(&f).collect();
        LinearMap::new(domain.clone(), codomain, images)
    }

    /// Map determined by its values on a (possibly redundant) spanning set;
    /// the values must be consistent with linear relations among the `xs`.
    pub fn from_pairs(dom_ambient: &Ambient, xs: &[Mat], ys: &[Mat], codomain: &Ambient) -> Result<Self> {
        let dom = orthonormal_span(dom_ambient, xs)?;
        let mut xm = Mat::zeros(dom_ambient.vec_len(), xs.len());
        for (k, x) in xs.iter().enumerate() {
            xm.set_column(k, &dom_ambient.vectorize(x));
        }
        let n = codomain.dim();
        let images = dom
            .basis()
            .iter()
            .map(|b| {
                let c = crate::linalg::lstsq(&xm, &dom_ambient.vectorize(b));
                let mut y = Mat::zeros(n, n);
                for (k, yk) in ys.iter().enumerate() {
                    y += yk * c[k];
                }
                y
            })
            .collect();
        let map = LinearMap::new(dom, codomain, images)?;
        for (x, y) in xs.iter().zip(ys) {
            let d = frob(&(map.apply(x)? - y));
            if d > crate::tol::VERIFY_TOL * (1.0 + frob(y)) {
                return Err(Error::Dimension(format!("values are not linear on the spanning set ({d:.3e})")));
            }
        }
        Ok(map)
    }

    pub fn domain(&self) -> &AlgebraSpan {
        &self.domain
    }

    pub fn codomain(&self) -> &Ambient {
        &self.codomain
    }

    pub fn images(&self) -> &[Mat] {
        &self.images
    }

    pub fn apply(&self, x: &Mat) -> Result<Mat> {
        let res = self.domain.residual(x);
        if res > MEMBER_TOL * (1.0 + frob(x)) {
            return Err(Error::NotMember(res));
        }
        Ok(self.apply_coeffs(&self.domain.coeffs(x)))
    }

    pub fn apply_coeffs(&self, coeffs: &[C64]) -> Mat {
        let n = self.codomain.dim();
        let mut out = Mat::zeros(n, n);
        for (c, im) in coeffs.iter().zip(&self.images) {
            out += im * *c;
        }
        out
    }

    /// Coordinates of the images against the codomain entries, one column
    /// per domain basis element.
    pub fn matrix(&self) -> Mat {
        let len = self.codomain.vec_len();
        let mut m = Mat::zeros(len, self.images.len());
        for (k, im) in self.images.iter().enumerate() {
            m.set_column(k, &self.codomain.vectorize(im));
        }
        m
    }

    pub fn image_span(&self) -> AlgebraSpan {
        orthonormal_span(&self.codomain, &self.images).expect("images live in the codomain")
    }

    /// Orthonormal basis of the kernel, as elements of the domain.
    pub fn kernel(&self) -> Vec<Mat> {
        let ns = null_space(&self.matrix(), RANK_TOL * 10.0);
        (0..ns.ncols())
            .map(|j| {
                let coeffs: Vec<C64> = (0..ns.nrows()).map(|k| ns[(k, j)]).collect();
                self.domain.combine(&coeffs)
            })
            .collect()
    }

    pub fn min_singular_value(&self) -> f64 {
        singular_values(&self.matrix()).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn is_injective(&self) -> bool {
        self.images.is_empty() || self.kernel().is_empty()
    }

    /// Inverse on the image; fails when the map has a kernel.
    pub fn inverse(&self) -> Result<LinearMap> {
        if !self.is_injective() {
            return Err(Error::NotInjective);
        }
        let img = self.image_span();
        // Solve for the domain element hitting each orthonormal image vector.
        let mat = self.matrix();
        let images: Vec<Mat> = img
            .basis()
            .iter()
            .map(|b| {
                let coeffs = crate::linalg::lstsq(&mat, &self.codomain.vectorize(b));
                self.domain.combine(coeffs.as_slice())
            })
            .collect();
        LinearMap::new(img, self.domain.ambient(), images)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &LinearMap) -> Result<LinearMap> {
        let images = self.images.iter().map(|m| other.apply(m)).collect::<Result<Vec<_>>>()?;
        LinearMap::new(self.domain.clone(), &other.codomain, images)
    }

    /// Restriction to a subspace of the domain.
    pub fn restrict(&self, sub: &AlgebraSpan) -> Result<LinearMap> {
        let images = sub.basis().iter().map(|m| self.apply(m)).collect::<Result<Vec<_>>>()?;
        LinearMap::new(sub.clone(), &self.codomain, images)
    }

    /// Largest multiplicativity defect over pairs of basis elements.
    pub fn multiplicative_defect(&self) -> Result<f64> {
        let b = self.domain.basis();
        let mut worst: f64 = 0.0;
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let xy = self.apply(&(x * y))?;
                worst = worst.max(frob(&(xy - &self.images[i] * &self.images[j])));
            }
        }
        Ok(worst)
    }

    /// Largest defect of `φ(x*) = φ(x)*` over basis elements.
    pub fn star_defect(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, x) in self.domain.basis().iter().enumerate() {
            let lhs = self.apply(&x.adjoint())?;
            worst = worst.max(frob(&(lhs - self.images[i].adjoint())));
        }
        Ok(worst)
    }

    /// Largest distance `‖ψ(b) - φ(b)‖` over the basis of the domain.
    pub fn distance(&self, other: &LinearMap) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, b) in self.domain.basis().iter().enumerate() {
            worst = worst.max(frob(&(other.apply(b)? - &self.images[i])));
        }
        Ok(worst)
    }
}
