//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Matrix from real rows.
pub fn real_mat(rows: &[&[f64]]) -> Mat {
    let n = rows.len();
    let m = if n == 0 { 0 } else { rows[0].len() };
    Mat::from_fn(n, m, |i, j| r(rows[i][j]))
}

pub fn unit(n: usize, i: usize, j: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn frob(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hilbert-Schmidt inner product, conjugate-linear in the first slot.
pub fn hs(a: &Mat, b: &Mat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Largest singular value, from the top eigenvalue of the smaller Gram
/// matrix.
pub fn op_norm(m: &Mat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let g = if m.nrows() < m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
    let top = SymmetricEigen::new(hermitian_part(&g)).eigenvalues.iter().cloned().fold(0.0, f64::max);
    top.max(0.0).sqrt()
}

/// Top singular triple (sigma, u, v) with `m v = sigma u`.
pub fn top_singular(m: &Mat) -> (f64, CVec, CVec) {
    let (vals, vecs) = eigh(&(m.adjoint() * m));
    let k = vals.len() - 1;
    let sigma = vals[k].max(0.0).sqrt();
    let v = vecs.column(k).into_owned();
    let mv = m * &v;
    let n = mv.norm();
    let u = if n > 0.0 { mv.unscale(n) } else { CVec::from_fn(m.nrows(), |i, _| if i == 0 { ONE } else { ZERO }) };
    (sigma, u, v)
}

pub fn hermitian_part(m: &Mat) -> Mat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of the Hermitian part, eigenvalues ascending.
pub fn eigh(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], Mat::zeros(0, 0));
    }
    let e = SymmetricEigen::new(hermitian_part(m));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].partial_cmp(&e.eigenvalues[b]).unwrap());
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| e.eigenvectors[(i, idx[j])]);
    (vals, vecs)
}

pub fn min_eig(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// `m = u diag(s) v*` with `s` descending. For an `r x n` input `u` is
/// `r x n'` and `v` is `n x n'` where `n' = n` when `r >= n`, so `v` is a
/// full unitary in that case.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

const JACOBI_EPS: f64 = 1e-15;
const JACOBI_SWEEPS: usize = 80;

/// One-sided Jacobi on the columns of a square matrix; returns the rotated
/// matrix (orthogonal columns) and the accumulated unitary.
fn jacobi_columns(mut a: Mat) -> (Mat, Mat) {
    let n = a.ncols();
    let mut v = Mat::identity(n, n);
    // columns below this are treated as zero; rotating them in the
    // subnormal range breaks unitarity of v
    let floor = a.iter().map(|z| z.norm_sqr()).sum::<f64>() * 1e-60;
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (ap, aq) = (a.column(p), a.column(q));
                let alpha: f64 = ap.iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = aq.iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = ap.dotc(&aq);
                let g = gamma.norm();
                if alpha <= floor || beta <= floor || g <= JACOBI_EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Make the inner product real, then rotate in the plane.
                let ph = gamma.conj() / g;
                let ph = ph / ph.norm();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 { 1.0 } else { -1.0 } / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for m in [&mut a, &mut v] {
                    for i in 0..m.nrows() {
                        let xp = m[(i, p)];
                        let xq = m[(i, q)] * ph;
                        m[(i, p)] = xp * cs - xq * sn;
                        m[(i, q)] = xp * sn + xq * cs;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (a, v)
}

/// Householder QR to a square factor, then one-sided Jacobi.
pub fn svd(m: &Mat) -> Svd {
    let (rows, cols) = (m.nrows(), m.ncols());
    if cols == 0 || rows == 0 {
        return Svd { u: Mat::zeros(rows, 0), s: vec![], v: Mat::identity(cols, cols) };
    }
    let mut padded = m.clone();
    if rows < cols {
        padded = Mat::zeros(cols, cols);
        padded.view_mut((0, 0), (rows, cols)).copy_from(m);
    }
    let qr = padded.qr();
    let (q, r) = (qr.q(), qr.r());
    let (ar, v) = jacobi_columns(r);
    let n = ar.ncols();
    let norms: Vec<f64> = (0..n).map(|j| ar.column(j).norm()).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).expect("finite norms"));
    let s: Vec<f64> = idx.iter().map(|&j| norms[j]).collect();
    let vs = Mat::from_fn(cols, n, |i, k| v[(i, idx[k])]);
    let ur = Mat::from_fn(n, n, |i, k| if norms[idx[k]] > 0.0 { ar[(i, idx[k])] / norms[idx[k]] } else { ZERO });
    let u = (q * ur).rows(0, rows).into_owned();
    Svd { u, s, v: vs }
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn null_space(m: &Mat, tol: f64) -> Mat {
    let cols = m.ncols();
    if cols == 0 {
        return Mat::zeros(0, 0);
    }
    let d = svd(m);
    let keep: Vec<usize> = (0..d.s.len()).filter(|&i| d.s[i] <= tol).collect();
    let mut out = Mat::zeros(cols, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &d.v.column(i));
    }
    out
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return vec![];
    }
    let mut s = svd(m).s;
    s.truncate(m.nrows().min(m.ncols()));
    s
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn block_diag(parts: &[Mat]) -> Mat {
    let n: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = Mat::zeros(n, n);
    let mut o = 0;
    for p in parts {
        out.view_mut((o, o), (p.nrows(), p.ncols())).copy_from(p);
        o += p.nrows();
    }
    out
}

/// Multiply by a unimodular scalar so the first entry with modulus above
/// `tol` (row-major) is real and positive.
pub fn fix_phase(m: &Mat, tol: f64) -> Mat {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z.norm() > tol {
                return m * (z.conj() / z.norm());
            }
        }
    }
    m.clone()
}

/// Unit Frobenius norm with the phase convention of [`fix_phase`].
pub fn normalize_direction(m: &Mat) -> Mat {
    let n = frob(m);
    if n == 0.0 {
        return m.clone();
    }
    let scaled = m.unscale(n);
    fix_phase(&scaled, 1e-9)
}

pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_real<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(-1.0..1.0)
}

/// Growing orthonormal family of vectors with twice-iterated Gram-Schmidt.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    len: usize,
    cols: Vec<CVec>,
}

impl OrthoBasis {
    pub fn new(len: usize) -> Self {
        OrthoBasis { len, cols: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn vector_len(&self) -> usize {
        self.len
    }

    pub fn cols(&self) -> &[CVec] {
        &self.cols
    }

    pub fn coeffs(&self, v: &CVec) -> Vec<C64> {
        self.cols.iter().map(|q| q.dotc(v)).collect()
    }

    /// Component of `v` orthogonal to the span.
    pub fn residual(&self, v: &CVec) -> CVec {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &self.cols {
                let a = q.dotc(&r);
                r.axpy(-a, q, ONE);
            }
        }
        r
    }

    pub fn distance(&self, v: &CVec) -> f64 {
        self.residual(v).norm()
    }

    /// Adds the normalized residual when its norm exceeds `tol`.
    pub fn push(&mut self, v: &CVec, tol: f64) -> bool {
        assert_eq!(v.len(), self.len);
        let r = self.residual(v);
        let n = r.norm();
        if n > tol {
            self.cols.push(r.unscale(n));
            true
        } else {
            false
        }
    }

    pub fn project(&self, v: &CVec) -> CVec {
        v - self.residual(v)
    }

    pub fn to_matrix(&self) -> Mat {
        let mut m = Mat::zeros(self.len, self.cols.len());
        for (j, q) in self.cols.iter().enumerate() {
            m.set_column(j, q);
        }
        m
    }
}

/// Minimum-norm least-squares coefficients of `v` against the columns of
/// `a`.
pub fn lstsq(a: &Mat, v: &CVec) -> CVec {
    if a.ncols() == 0 {
        return CVec::zeros(0);
    }
    let d = svd(a);
    let cut = 1e-12 * d.s.first().copied().unwrap_or(0.0).max(1.0);
    let mut out = CVec::zeros(a.ncols());
    for (k, &sk) in d.s.iter().enumerate() {
        if sk > cut {
            let w = d.u.column(k).dotc(v) / sk;
            out.axpy(w, &d.v.column(k), ONE);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix() {
        let m = real_mat(&[&[1.0, 1.0, 0.0]]);
        let ns = null_space(&m, 1e-9);
        assert_eq!(ns.ncols(), 2);
        assert!(frob(&(&m * &ns)) < 1e-12);
    }

    #[test]
    fn eigh_sorted() {
        let m = real_mat(&[&[2.0, 0.0], &[0.0, -1.0]]);
        let (vals, vecs) = eigh(&m);
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 2.0).abs() < 1e-12);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn op_norm_of_unit() {
        assert!((op_norm(&unit(3, 0, 2)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ortho_basis_rejects_dependent() {
        let mut b = OrthoBasis::new(3);
        let v = CVec::from_vec(vec![r(1.0), r(1.0), ZERO]);
        assert!(b.push(&v, 1e-9));
        assert!(!b.push(&(v.scale(3.0)), 1e-9));
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn phase_convention() {
        let m = Mat::from_fn(1, 2, |_, j| if j == 0 { ZERO } else { c(0.0, -2.0) });
        let d = normalize_direction(&m);
        assert!((d[(0, 1)] - ONE).norm() < 1e-12);
    }

    fn random_unitary(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Mat {
        let m = Mat::from_fn(n, n, |_, _| random_complex(rng));
        m.qr().q()
    }

    #[test]
    fn svd_reconstructs_with_repeated_values() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (rows, sv) in [(32, vec![2f64.sqrt(); 5].into_iter().chain([1.0; 3]).collect::<Vec<_>>()), (6, vec![3.0, 1.0, 1.0, 0.0]), (3, vec![1.0, 1.0, 1.0])] {
            let n = sv.len();
            let u = random_unitary(rows.max(n), &mut rng).columns(0, n).into_owned();
            let v = random_unitary(n, &mut rng);
            let d = Mat::from_diagonal(&CVec::from_iterator(n, sv.iter().map(|&x| r(x))));
            let a = (&u * d * v.adjoint()).rows(0, rows).into_owned();
            let f = svd(&a);
            let k = f.s.len();
            let rec = &f.u * Mat::from_diagonal(&CVec::from_iterator(k, f.s.iter().map(|&x| r(x)))) * f.v.adjoint();
            assert!(frob(&(rec - &a)) < 1e-12, "rows {rows}");
            assert!(frob(&(f.v.adjoint() * &f.v - Mat::identity(k, k))) < 1e-12);
            let mut want = sv.clone();
            want.sort_by(|x, y| y.partial_cmp(x).unwrap());
            for (x, y) in singular_values(&a).iter().zip(&want) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sparse_tall_matrix_solves_exactly() {
        // Columns with repeated norms on disjoint and shared supports.
        let mut a = Mat::zeros(12, 4);
        a[(0, 0)] = r(0.5);
        a[(5, 0)] = r(0.5);
        a[(0, 1)] = r(0.5);
        a[(7, 1)] = r(-0.5);
        a[(3, 2)] = ONE;
        a[(9, 2)] = ONE;
        a[(4, 3)] = ONE;
        let x = CVec::from_vec(vec![c(1.0, 2.0), c(-1.0, 0.5), c(0.3, 0.0), c(0.0, -2.0)]);
        let b = &a * &x;
        assert!((lstsq(&a, &b) - &x).norm() < 1e-12);
        assert_eq!(null_space(&a, 1e-9).ncols(), 0);
        let (s, u, v) = top_singular(&a);
        assert!(((&a * v) - u.scale(s)).norm() < 1e-12);
        assert!((op_norm(&a) - s).abs() < 1e-12);
    }

    #[test]
    fn eigh_with_repeated_eigenvalues() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let q = random_unitary(7, &mut rng);
        let vals = [-1.0, 0.0, 0.0, 0.0, 2.0, 2.0, 5.0];
        let d = Mat::from_diagonal(&CVec::from_iterator(7, vals.iter().map(|&x| r(x))));
        let h = &q * d * q.adjoint();
        let (ev, vecs) = eigh(&h);
        for (x, y) in ev.iter().zip(vals) {
            assert!((x - y).abs() < 1e-12);
        }
        let rec = &vecs * Mat::from_diagonal(&CVec::from_iterator(7, ev.iter().map(|&x| r(x)))) * vecs.adjoint();
        assert!(frob(&(rec - h)) < 1e-12);
    }
}
