//! Randomized ascent for `‖φ_k(X)‖ / ‖X‖` over `X ∈ M_k(S)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linalg::{kron, random_complex, top_singular, CVec, Mat, C64};

/// Best ratio found and the coefficient matrices achieving it.
#[derive(Debug, Clone)]
pub struct Ascent {
    pub ratio: f64,
    pub coeffs: Vec<Mat>,
}

pub fn lift(coeffs: &[Mat], elems: &[Mat]) -> Mat {
    let k = coeffs[0].nrows();
    let n = elems[0].nrows();
    let mut out = Mat::zeros(k * n, k * n);
    for (a, e) in coeffs.iter().zip(elems) {
        out += kron(a, e);
    }
    out
}

fn block_grad(u: &CVec, v: &CVec, e: &Mat, k: usize) -> Mat {
    let n = e.nrows();
    Mat::from_fn(k, k, |p, q| {
        let up = u.rows(p * n, n);
        let vq = v.rows(q * n, n);
        (up.adjoint() * e * vq)[(0, 0)].conj()
    })
}

fn ratio(coeffs: &[Mat], dom: &[Mat], img: &[Mat]) -> (f64, f64, f64) {
    let x = crate::linalg::op_norm(&lift(coeffs, dom));
    let y = crate::linalg::op_norm(&lift(coeffs, img));
    (if x > 0.0 { y / x } else { 0.0 }, x, y)
}

fn climb(dom: &[Mat], img: &[Mat], k: usize, iters: usize, rng: &mut ChaCha8Rng, target: f64) -> Ascent {
    let mut coeffs: Vec<Mat> = dom.iter().map(|_| Mat::from_fn(k, k, |_, _| random_complex(rng))).collect();
    let (mut best, _, _) = ratio(&coeffs, dom, img);
    let mut step = 0.5;
    for _ in 0..iters {
        if best > target {
            break;
        }
        let x = lift(&coeffs, dom);
        let y = lift(&coeffs, img);
        let (sx, ux, vx) = top_singular(&x);
        let (sy, uy, vy) = top_singular(&y);
        if sx <= 0.0 {
            break;
        }
        let grads: Vec<Mat> = dom
            .iter()
            .zip(img)
            .map(|(d, e)| (block_grad(&uy, &vy, e, k) * C64::new(sx, 0.0) - block_grad(&ux, &vx, d, k) * C64::new(sy, 0.0)).unscale(sx * sx))
            .collect();
        let gnorm: f64 = grads.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt();
        if gnorm < 1e-12 {
            break;
        }
        let scale: f64 = coeffs.iter().map(|c| c.norm_squared()).sum::<f64>().sqrt();
        let mut improved = false;
        for _ in 0..12 {
            let trial: Vec<Mat> = coeffs
                .iter()
                .zip(&grads)
                .map(|(c, g)| c + g.scale(step * scale / gnorm))
                .collect();
            let (r, _, _) = ratio(&trial, dom, img);
            if r > best {
                best = r;
                coeffs = trial;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved && step < 1e-9 {
            break;
        }
    }
    Ascent { ratio: best, coeffs }
}

/// Runs `restarts` independent ascents in parallel and returns the one with
/// the smallest index exceeding `target`, or the best overall.
pub fn search(dom: &[Mat], img: &[Mat], k: usize, restarts: usize, iters: usize, seed: u64, target: f64) -> Option<Ascent> {
    if dom.is_empty() {
        return None;
    }
    let runs: Vec<Ascent> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64 * 0x9e37_79b9));
            climb(dom, img, k, iters, &mut rng, target)
        })
        .collect();
    if let Some(hit) = runs.iter().find(|a| a.ratio > target) {
        return Some(hit.clone());
    }
    runs.into_iter().max_by(|a, b| a.ratio.partial_cmp(&b.ratio).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit;

    #[test]
    fn transpose_expands_at_level_two() {
        let dom: Vec<Mat> = (0..4).map(|k| unit(2, k / 2, k % 2)).collect();
        let img: Vec<Mat> = dom.iter().map(|m| m.transpose()).collect();
        // The completely bounded norm of the transpose on M2 is 2.
        let hit = search(&dom, &img, 2, 8, 300, 1, 1.99).unwrap();
        assert!(hit.ratio > 1.99 && hit.ratio <= 2.0 + 1e-9);
    }

    #[test]
    fn identity_never_expands() {
        let dom: Vec<Mat> = (0..4).map(|k| unit(2, k / 2, k % 2)).collect();
        let hit = search(&dom, &dom, 2, 4, 50, 1, 1.0 + 1e-6).unwrap();
        assert!(hit.ratio <= 1.0 + 1e-9);
    }
}
