//! Feasibility of the Paulsen-Choi problem on its reduced face.
//!
//! A map `φ: S → M_n` with `S ⊆ M_N` is completely contractive iff the
//! unital extension `Ψ` of the Paulsen system `P(S) ⊆ M_2N` is completely
//! positive, iff some Choi matrix of a map on `M_2N` is positive and agrees
//! with `Ψ` on `P(S)`. Positivity forces the Choi matrix onto the indices
//! `(I, a)` with `I < N` exactly when `a < n`, so the variable is a Hermitian
//! matrix of size `2Nn` with blocks `C11`, `C12`, `C22`.

use nalgebra::SymmetricEigen;

use crate::linalg::{CVec, Mat, C64, ONE, ZERO};

#[derive(Debug, Clone)]
pub struct Reduced {
    pub big_n: usize,
    pub n: usize,
    basis: Vec<Mat>,
    rhs: Vec<CVec>,
}

#[derive(Debug, Clone)]
pub struct DrOutcome {
    pub certificate: Option<Mat>,
    pub iterations: usize,
    pub min_eig: f64,
    pub residual: f64,
}

impl Reduced {
    /// `basis` must be Hilbert-Schmidt orthonormal in `M_N`; `images` in `M_n`.
    pub fn new(basis: Vec<Mat>, images: &[Mat]) -> Self {
        let big_n = basis.first().map(|b| b.nrows()).unwrap_or(0);
        let n = images.first().map(|m| m.nrows()).unwrap_or(0);
        let rhs = (0..n * n)
            .map(|ab| CVec::from_iterator(images.len(), images.iter().map(|m| m[(ab / n, ab % n)])))
            .collect();
        Reduced { big_n, n, basis, rhs }
    }

    pub fn size(&self) -> usize {
        2 * self.big_n * self.n
    }

    fn i1(&self, i: usize, a: usize) -> usize {
        i * self.n + a
    }

    fn i2(&self, j: usize, b: usize) -> usize {
        self.big_n * self.n + j * self.n + b
    }

    /// Orthogonal projection onto the affine constraint set (Hermitian input).
    pub fn project_affine(&self, x: &mut Mat) {
        let (nn, n) = (self.big_n, self.n);
        let inv = 1.0 / nn as f64;
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { ONE } else { ZERO };
                for second in [false, true] {
                    let idx = |i: usize, a: usize| if second { self.i2(i, a) } else { self.i1(i, a) };
                    let s: C64 = (0..nn).map(|i| x[(idx(i, a), idx(i, b))]).sum();
                    let d = (s - target) * inv;
                    for i in 0..nn {
                        x[(idx(i, a), idx(i, b))] -= d;
                    }
                }
                // Off-diagonal block: sum_ij s_m[i,j] w_ij = φ(s_m)[a,b].
                let rhs = &self.rhs[a * n + b];
                for (m, s) in self.basis.iter().enumerate() {
                    let mut kw = ZERO;
                    for i in 0..nn {
                        for j in 0..nn {
                            kw += s[(i, j)] * x[(self.i1(i, a), self.i2(j, b))];
                        }
                    }
                    let r = kw - rhs[m];
                    if r == ZERO {
                        continue;
                    }
                    for i in 0..nn {
                        for j in 0..nn {
                            x[(self.i1(i, a), self.i2(j, b))] -= s[(i, j)].conj() * r;
                        }
                    }
                }
                for i in 0..nn {
                    for j in 0..nn {
                        let w = x[(self.i1(i, a), self.i2(j, b))];
                        x[(self.i2(j, b), self.i1(i, a))] = w.conj();
                    }
                }
            }
        }
    }

    /// Largest absolute violation of the affine constraints.
    pub fn residual(&self, x: &Mat) -> f64 {
        let mut y = x.clone();
        self.project_affine(&mut y);
        (x - y).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Douglas-Rachford splitting between the positive cone and the affine
    /// set. Success means the affine iterate has `λ_min ≥ -tol`.
    pub fn solve(&self, max_iter: usize, tol: f64) -> DrOutcome {
        let d = self.size();
        let mut z = Mat::zeros(d, d);
        let mut last_step = f64::NAN;
        let mut min_eig = f64::NEG_INFINITY;
        let window = 400;
        for it in 0..max_iter {
            let mut a = z.clone();
            self.project_affine(&mut a);
            let refl = a.scale(2.0) - &z;
            let e = SymmetricEigen::new(hermitian(&refl));
            let c = psd_part(&e);
            // `a` is positive when its eigenvalues clear -tol; checked cheaply
            // through the reflected iterate first.
            if it % 5 == 0 {
                let la = crate::linalg::min_eig(&a);
                min_eig = la;
                if la >= -tol {
                    let residual = self.residual(&a);
                    return DrOutcome { certificate: Some(a), iterations: it + 1, min_eig: la, residual };
                }
            }
            let step = &c - &a;
            if it > 0 && it % window == 0 {
                let s = crate::linalg::frob(&step);
                if it >= 4 * window && s > 1e-5 && (s - last_step).abs() < 1e-5 * s {
                    return DrOutcome { certificate: None, iterations: it + 1, min_eig, residual: f64::NAN };
                }
                last_step = s;
            }
            z += step;
        }
        DrOutcome { certificate: None, iterations: max_iter, min_eig, residual: f64::NAN }
    }
}

fn hermitian(m: &Mat) -> Mat {
    (m + m.adjoint()).scale(0.5)
}

fn psd_part(e: &SymmetricEigen<C64, nalgebra::Dyn>) -> Mat {
    let d = e.eigenvalues.len();
    let keep: Vec<usize> = (0..d).filter(|&i| e.eigenvalues[i] > 0.0).collect();
    let mut v = Mat::zeros(d, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        let col = e.eigenvectors.column(i) * C64::new(e.eigenvalues[i].sqrt(), 0.0);
        v.set_column(j, &col);
    }
    &v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{min_eig, unit};

    fn m2_basis() -> Vec<Mat> {
        (0..4).map(|k| unit(2, k / 2, k % 2)).collect()
    }

    #[test]
    fn identity_on_m2_is_feasible() {
        let b = m2_basis();
        let red = Reduced::new(b.clone(), &b);
        let out = red.solve(5000, 1e-7);
        let cert = out.certificate.expect("identity is completely contractive");
        assert!(min_eig(&cert) >= -1e-7);
        assert!(red.residual(&cert) < 1e-9);
    }

    #[test]
    fn transpose_on_m2_is_infeasible() {
        let b = m2_basis();
        let t: Vec<Mat> = b.iter().map(|m| m.transpose()).collect();
        let red = Reduced::new(b, &t);
        assert!(red.solve(4000, 1e-7).certificate.is_none());
    }
}
