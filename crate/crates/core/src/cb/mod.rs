//! Complete contractivity and complete isometry of maps between finite
//! dimensional operator spaces.
//!
//! Two independent oracles: a positive Choi certificate for the Paulsen
//! extension (proves CC) and an ascent search for an element of some
//! `M_k(S)` that `φ_k` expands (disproves CC). When neither succeeds the
//! verdict is `Inconclusive`.

pub mod choi;
pub mod falsifier;
mod map;

pub use map::LinearMap;

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{frob, min_eig, op_norm, Mat};
use crate::tol::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    CompletelyContractive,
    NotCC,
    CompletelyIsometric,
    NotCI,
    Inconclusive,
}

impl Verdict {
    pub fn is_decisive(self) -> bool {
        self != Verdict::Inconclusive
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Verdict::CompletelyContractive | Verdict::CompletelyIsometric)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FalsifierKind {
    /// `‖φ_k(x)‖ > ‖x‖`.
    Expands,
    /// `‖φ_k(x)‖ < ‖x‖`; the inverse expands `φ_k(x)`.
    Contracts,
    /// `x ≠ 0` with `φ(x) = 0`.
    Kernel,
}

/// Element of `M_k(S)` (as a `kN x kN` matrix) whose norm `φ_k` changes.
#[derive(Debug, Clone)]
pub struct Falsifier {
    pub level: usize,
    pub kind: FalsifierKind,
    pub x: Mat,
    pub norm_in: f64,
    pub norm_out: f64,
}

impl Falsifier {
    pub fn ratio(&self) -> f64 {
        if self.norm_in > 0.0 {
            self.norm_out / self.norm_in
        } else {
            f64::INFINITY
        }
    }

    /// Recomputes both norms from `x` and checks the claimed gap.
    pub fn verify(&self, phi: &LinearMap, margin: f64) -> Result<bool> {
        let y = amplify(phi, &self.x, self.level)?;
        let (nx, ny) = (op_norm(&self.x), op_norm(&y));
        Ok(match self.kind {
            FalsifierKind::Expands => ny > nx * (1.0 + margin),
            FalsifierKind::Contracts => ny * (1.0 + margin) < nx,
            FalsifierKind::Kernel => nx > 0.5 && ny < 1e-6,
        })
    }
}

/// `φ_k` applied blockwise to a `kN x kN` matrix.
pub fn amplify(phi: &LinearMap, x: &Mat, k: usize) -> Result<Mat> {
    let big_n = phi.domain().ambient().dim();
    let n = phi.codomain().dim();
    let mut out = Mat::zeros(k * n, k * n);
    for p in 0..k {
        for q in 0..k {
            let blk = x.view((p * big_n, q * big_n), (big_n, big_n)).into_owned();
            let img = phi.apply(&blk)?;
            out.view_mut((p * n, q * n), (n, n)).copy_from(&img);
        }
    }
    Ok(out)
}

/// Positive Choi matrix on the reduced face for one codomain component.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub domain_support: Vec<usize>,
    pub component: Vec<usize>,
    pub choi: Mat,
    pub min_eig: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct CbReport {
    pub verdict: Verdict,
    pub certificates: Vec<Certificate>,
    pub inverse_certificates: Vec<Certificate>,
    pub falsifier: Option<Falsifier>,
    pub iterations: usize,
    pub residual: f64,
    pub best_ratio: f64,
    /// Both oracles claimed success; always reported with `Inconclusive`.
    pub conflict: bool,
}

impl CbReport {
    fn new(verdict: Verdict) -> Self {
        CbReport {
            verdict,
            certificates: vec![],
            inverse_certificates: vec![],
            falsifier: None,
            iterations: 0,
            residual: 0.0,
            best_ratio: 0.0,
            conflict: false,
        }
    }
}

pub fn operator_norm(x: &Mat) -> f64 {
    op_norm(x)
}

/// The map compressed to the support of its domain and split along the
/// connected components of its codomain support.
struct Prepared {
    support: Vec<usize>,
    basis: Vec<Mat>,
    full_basis: Vec<Mat>,
    full_images: Vec<Mat>,
    components: Vec<(Vec<usize>, Vec<Mat>)>,
}

fn compress(m: &Mat, idx: &[usize]) -> Mat {
    Mat::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

const SUPPORT_TOL: f64 = 1e-12;

impl Prepared {
    fn new(phi: &LinearMap) -> Self {
        let full_basis = phi.domain().basis().to_vec();
        let big = phi.domain().ambient().dim();
        let support: Vec<usize> = (0..big)
            .filter(|&i| {
                full_basis.iter().any(|b| (0..big).any(|j| b[(i, j)].norm() > SUPPORT_TOL || b[(j, i)].norm() > SUPPORT_TOL))
            })
            .collect();
        let basis = full_basis.iter().map(|b| compress(b, &support)).collect();
        let n = phi.codomain().dim();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        let mut used = vec![false; n];
        for m in phi.images() {
            for a in 0..n {
                for b in 0..n {
                    if m[(a, b)].norm() > SUPPORT_TOL {
                        used[a] = true;
                        used[b] = true;
                        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                        if ra != rb {
                            parent[ra.max(rb)] = ra.min(rb);
                        }
                    }
                }
            }
        }
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for a in (0..n).filter(|&a| used[a]) {
            let r = find(&mut parent, a);
            match groups.iter_mut().find(|g| g.0 == r) {
                Some(g) => g.1.push(a),
                None => groups.push((r, vec![a])),
            }
        }
        let components = groups
            .into_iter()
            .map(|(_, idx)| {
                let imgs = phi.images().iter().map(|m| compress(m, &idx)).collect();
                (idx, imgs)
            })
            .collect();
        Prepared { support, basis, full_basis, full_images: phi.images().to_vec(), components }
    }

    /// Falsifier search over every component at level 1 and at the
    /// component size.
    fn falsify(&self, cfg: &Config, restarts: usize, iters: usize) -> (Option<Falsifier>, f64) {
        let target = 1.0 + cfg.margin;
        let mut best: f64 = 0.0;
        for (ci, (idx, imgs)) in self.components.iter().enumerate() {
            let mut levels = vec![1];
            if idx.len() > 1 {
                levels.push(idx.len());
            }
            for k in levels {
                let seed = cfg.seed ^ ((ci as u64) << 32) ^ (k as u64);
                if let Some(hit) = falsifier::search(&self.basis, imgs, k, restarts, iters, seed, target) {
                    best = best.max(hit.ratio);
                    if hit.ratio > target {
                        let x = falsifier::lift(&hit.coeffs, &self.full_basis);
                        let y = falsifier::lift(&hit.coeffs, &self.full_images);
                        let (nx, ny) = (op_norm(&x), op_norm(&y));
                        if ny > nx * target {
                            let s = 1.0 / nx;
                            let f = Falsifier { level: k, kind: FalsifierKind::Expands, x: x.scale(s), norm_in: 1.0, norm_out: ny * s };
                            return (Some(f), best);
                        }
                    }
                }
            }
        }
        (None, best)
    }

    fn certify(&self, cfg: &Config) -> (Vec<Certificate>, bool, usize, f64) {
        let mut certs = Vec::new();
        let (mut iters, mut worst) = (0, 0.0f64);
        for (idx, imgs) in &self.components {
            let red = choi::Reduced::new(self.basis.clone(), imgs);
            let out = red.solve(cfg.max_iter, cfg.feas_tol);
            iters += out.iterations;
            match out.certificate {
                Some(choi) => {
                    worst = worst.max(out.residual);
                    certs.push(Certificate {
                        domain_support: self.support.clone(),
                        component: idx.clone(),
                        choi,
                        min_eig: out.min_eig,
                        residual: out.residual,
                        iterations: out.iterations,
                    });
                }
                None => return (certs, false, iters, f64::NAN),
            }
        }
        (certs, true, iters, worst)
    }
}

/// Re-verifies a certificate against the map it claims to certify.
pub fn verify_certificate(phi: &LinearMap, cert: &Certificate, tol: f64) -> bool {
    let basis: Vec<Mat> = phi.domain().basis().iter().map(|b| compress(b, &cert.domain_support)).collect();
    let imgs: Vec<Mat> = phi.images().iter().map(|m| compress(m, &cert.component)).collect();
    let red = choi::Reduced::new(basis, &imgs);
    red.size() == cert.choi.nrows() && min_eig(&cert.choi) >= -tol && red.residual(&cert.choi) < 1e-6
}

/// Is `φ` completely contractive?
pub fn cc_check(phi: &LinearMap, cfg: &Config) -> CbReport {
    let prep = Prepared::new(phi);
    if prep.components.is_empty() || prep.basis.is_empty() {
        return CbReport::new(Verdict::CompletelyContractive);
    }
    let (quick, mut best) = prep.falsify(cfg, 4, 40);
    let mut report = CbReport::new(Verdict::Inconclusive);
    if quick.is_some() && !cfg.cross_check {
        report.verdict = Verdict::NotCC;
        report.best_ratio = best;
        report.falsifier = quick;
        return report;
    }
    let (certs, ok, iters, residual) = prep.certify(cfg);
    report.iterations = iters;
    report.residual = residual;
    let mut fals = quick;
    if fals.is_none() && (!ok || cfg.cross_check) {
        let (f, b) = prep.falsify(cfg, cfg.restarts, 150);
        best = best.max(b);
        fals = f;
    }
    report.best_ratio = best;
    report.verdict = match (ok, fals.is_some()) {
        (true, false) => Verdict::CompletelyContractive,
        (false, true) => Verdict::NotCC,
        (false, false) => Verdict::Inconclusive,
        (true, true) => {
            report.conflict = true;
            Verdict::Inconclusive
        }
    };
    if ok {
        report.certificates = certs;
    }
    report.falsifier = fals;
    report
}

/// Is `φ` a complete isometry onto its image?
pub fn ci_check(phi: &LinearMap, cfg: &Config) -> CbReport {
    let kernel = phi.kernel();
    if let Some(k) = kernel.first() {
        let s = 1.0 / op_norm(k);
        let mut r = CbReport::new(Verdict::NotCI);
        r.falsifier = Some(Falsifier {
            level: 1,
            kind: FalsifierKind::Kernel,
            x: k.scale(s),
            norm_in: 1.0,
            norm_out: op_norm(&phi.apply_coeffs(&phi.domain().coeffs(&k.scale(s)))),
        });
        return r;
    }
    let fwd = cc_check(phi, cfg);
    match fwd.verdict {
        Verdict::NotCC => {
            let mut r = fwd;
            r.verdict = Verdict::NotCI;
            return r;
        }
        Verdict::Inconclusive => return fwd,
        _ => {}
    }
    let inv = match phi.inverse() {
        Ok(inv) => inv,
        Err(_) => return CbReport::new(Verdict::Inconclusive),
    };
    let back = cc_check(&inv, cfg);
    let mut r = CbReport::new(Verdict::Inconclusive);
    r.certificates = fwd.certificates;
    r.iterations = fwd.iterations + back.iterations;
    r.residual = fwd.residual.max(back.residual);
    r.best_ratio = back.best_ratio;
    r.conflict = fwd.conflict || back.conflict;
    match back.verdict {
        Verdict::CompletelyContractive => {
            r.verdict = Verdict::CompletelyIsometric;
            r.inverse_certificates = back.certificates;
        }
        Verdict::NotCC => {
            r.verdict = Verdict::NotCI;
            if let Some(f) = back.falsifier {
                // Express the witness in the domain of φ.
                if let Ok(x) = amplify(&inv, &f.x, f.level) {
                    let nx = op_norm(&x);
                    r.falsifier = Some(Falsifier {
                        level: f.level,
                        kind: FalsifierKind::Contracts,
                        x: x.unscale(nx),
                        norm_in: 1.0,
                        norm_out: f.norm_in / nx,
                    });
                }
            }
        }
        _ => {}
    }
    r
}

/// Largest multiplicativity defect of `φ` on its (algebra) domain.
pub fn homomorphism_check(phi: &LinearMap) -> Result<f64> {
    phi.multiplicative_defect()
}

/// Largest distance between `φ` and `ψ` on the common domain basis.
pub fn map_distance(phi: &LinearMap, psi: &LinearMap) -> Result<f64> {
    phi.distance(psi)
}

pub fn frobenius(x: &Mat) -> f64 {
    frob(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{generate_algebra, orthonormal_span, Ambient};
    use crate::linalg::{r, unit};

    fn m2() -> crate::algebra::AlgebraSpan {
        let amb = Ambient::full(2);
        generate_algebra(&amb, &[unit(2, 0, 1), unit(2, 1, 0)], true, true).unwrap()
    }

    #[test]
    fn identity_is_ci() {
        let a = m2();
        let phi = LinearMap::from_fn(&a, &Ambient::full(2), |m| m.clone()).unwrap();
        let rep = ci_check(&phi, &Config::default());
        assert_eq!(rep.verdict, Verdict::CompletelyIsometric);
        assert!(rep.certificates.iter().all(|c| verify_certificate(&phi, c, 1e-7)));
    }

    #[test]
    fn transpose_is_not_cc() {
        let a = m2();
        let phi = LinearMap::from_fn(&a, &Ambient::full(2), |m| m.transpose()).unwrap();
        let rep = cc_check(&phi, &Config::default());
        assert_eq!(rep.verdict, Verdict::NotCC);
        let f = rep.falsifier.unwrap();
        assert!(f.verify(&phi, 1e-6).unwrap());
        assert_eq!(f.level, 2);
    }

    #[test]
    fn kernel_gives_not_ci() {
        let amb = Ambient::full(2);
        let s = orthonormal_span(&amb, &[unit(2, 0, 0), unit(2, 0, 1)]).unwrap();
        let phi = LinearMap::from_fn(&s, &amb, |m| Mat::from_fn(2, 2, |i, j| if i == j { m[(i, j)] } else { r(0.0) })).unwrap();
        let rep = ci_check(&phi, &Config::default());
        assert_eq!(rep.verdict, Verdict::NotCI);
        let f = rep.falsifier.unwrap();
        assert_eq!(f.kind, FalsifierKind::Kernel);
        assert!(f.verify(&phi, 1e-6).unwrap());
    }

    #[test]
    fn half_scaled_is_cc_but_not_ci() {
        let a = m2();
        let phi = LinearMap::from_fn(&a, &Ambient::full(2), |m| m.scale(0.5)).unwrap();
        assert_eq!(cc_check(&phi, &Config::default()).verdict, Verdict::CompletelyContractive);
        let rep = ci_check(&phi, &Config::default());
        assert_eq!(rep.verdict, Verdict::NotCI);
        assert!(rep.falsifier.unwrap().verify(&phi, 1e-6).unwrap());
    }
}
