use std::sync::OnceLock;

use opcover::algebra::{generate_algebra, Ambient};
use opcover::cb::{cc_check, verify_certificate, LinearMap, Verdict};
use opcover::corpus::t2;
use opcover::covers::{below, equivalent, join, meet, CstarCover};
use opcover::linalg::*;
use opcover::report;
use opcover::scenario::run_scenario;
use opcover::suite;
use opcover::tol::Config;
use proptest::prelude::*;

fn cplx() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b))
}

fn matrix(r: usize, cols: usize) -> impl Strategy<Value = Mat> {
    proptest::collection::vec(cplx(), r * cols).prop_map(move |v| Mat::from_fn(r, cols, |i, j| v[i * cols + j]))
}

fn any_matrix() -> impl Strategy<Value = Mat> {
    (1usize..9, 1usize..9).prop_flat_map(|(r, c)| matrix(r, c))
}

/// Unitary from the QR of a random square matrix.
fn unitary(n: usize) -> impl Strategy<Value = Mat> {
    matrix(n, n).prop_map(move |m| (m + Mat::identity(n, n) * c(0.1, 0.0)).qr().q())
}

fn unitary_err(u: &Mat) -> f64 {
    frob(&(u.adjoint() * u - Mat::identity(u.ncols(), u.ncols())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn svd_reconstructs(m in any_matrix()) {
        let s = svd(&m);
        let k = s.s.len();
        prop_assert!(s.s.windows(2).all(|w| w[0] >= w[1] - 1e-12));
        prop_assert!(s.s.iter().all(|&x| x >= 0.0));
        let sig = Mat::from_fn(k, k, |i, j| if i == j { r(s.s[i]) } else { ZERO });
        let back = s.u.columns(0, k) * sig * s.v.columns(0, k).adjoint();
        prop_assert!(frob(&(back - &m)) < 1e-10 * (1.0 + frob(&m)));
        prop_assert!(unitary_err(&s.v) < 1e-10);
    }

    /// Repeated singular values in a tall, sparse frame were the failure
    /// mode of the stock solver.
    #[test]
    fn svd_with_repeated_values(u in unitary(8), v in unitary(4), a in 0.2..2.0f64, zeros in 0usize..3) {
        let mut d = vec![a, a, a, a];
        for x in d.iter_mut().take(zeros) {
            *x = 0.0;
        }
        let sig = Mat::from_fn(8, 4, |i, j| if i == j { r(d[j]) } else { ZERO });
        let m = &u * sig * v.adjoint();
        let s = svd(&m);
        let mut want = d.clone();
        want.sort_by(|x, y| y.total_cmp(x));
        for (got, w) in s.s.iter().zip(&want) {
            prop_assert!((got - w).abs() < 1e-10);
        }
        prop_assert!((op_norm(&m) - want[0]).abs() < 1e-9);
    }

    #[test]
    fn op_norm_dominates_bilinear_form(m in matrix(5, 3), x in matrix(5, 1), y in matrix(3, 1)) {
        let n = op_norm(&m);
        let (nx, ny) = (frob(&x), frob(&y));
        prop_assume!(nx > 1e-6 && ny > 1e-6);
        let val = (x.adjoint() * &m * &y)[(0, 0)].norm() / (nx * ny);
        prop_assert!(val <= n + 1e-10);
        prop_assert!((n - singular_values(&m)[0]).abs() < 1e-9);
        prop_assert!(n <= frob(&m) + 1e-12);
    }

    #[test]
    fn lstsq_solves_consistent_systems(a in matrix(7, 4), x0 in matrix(4, 1)) {
        let b = &a * &x0;
        let x = lstsq(&a, &b.column(0).into_owned());
        prop_assert!(frob(&(&a * Mat::from_column_slice(4, 1, x.as_slice()) - &b)) < 1e-9 * (1.0 + frob(&b)));
    }

    #[test]
    fn eigh_diagonalizes(m in matrix(6, 6)) {
        let h = hermitian_part(&m);
        let (w, v) = eigh(&h);
        let d = Mat::from_fn(6, 6, |i, j| if i == j { r(w[i]) } else { ZERO });
        prop_assert!(frob(&(&v * d * v.adjoint() - &h)) < 1e-10);
        prop_assert!(unitary_err(&v) < 1e-10);
    }

    #[test]
    fn report_matrices_round_trip(m in any_matrix()) {
        let back = report::parse_mat(&report::mat(&m)).unwrap();
        prop_assert_eq!(&back, &m);
        let b64 = report::decode_mat_b64(&report::mat_b64(&m)).unwrap();
        prop_assert_eq!(&b64, &m);
        prop_assert_eq!(report::hash_mat(&m), report::hash_mat(&m.clone()));
        prop_assert!(report::matches(&report::mat(&m), &report::mat(&m), 1e-12));
    }
}

/// Dimension of the span of all words in the generators and their
/// adjoints: grow `S ← S + S·letters` until it stops growing.
fn word_span(n: usize, gens: &[Mat]) -> usize {
    let mut letters: Vec<Mat> = gens.to_vec();
    letters.extend(gens.iter().map(|g| g.adjoint()));
    let mut basis: Vec<Mat> = vec![];
    let add = |m: Mat, basis: &mut Vec<Mat>| {
        let mut v = m.clone() / c(frob(&m), 0.0);
        for b in basis.iter() {
            let p = hs(b, &v);
            v -= b * p;
        }
        let nv = frob(&v);
        if nv > 1e-9 {
            basis.push(v / c(nv, 0.0));
            true
        } else {
            false
        }
    };
    add(Mat::identity(n, n), &mut basis);
    let mut grew = true;
    while grew {
        grew = false;
        let snapshot = basis.clone();
        for w in &snapshot {
            for l in &letters {
                grew |= add(w * l, &mut basis);
            }
        }
    }
    basis.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// `U (M_a ⊕ M_b ⊕ ...) U*` from two random generators is recovered
    /// with its Wedderburn type, and matches brute-force word closure.
    #[test]
    fn structure_of_conjugated_direct_sums(
        dims in proptest::collection::vec(1usize..3, 1..4),
        seed in any::<u64>(),
    ) {
        use rand::SeedableRng;
        let n: usize = dims.iter().sum();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let q = Mat::from_fn(n, n, |_, _| random_complex(&mut rng)).qr().q();
        // distinct scalar blocks get distinct weights so they stay separate
        let parts: Vec<Mat> = dims.iter().enumerate().map(|(i, &d)| Mat::from_fn(d, d, |_, _| random_complex(&mut rng)) + Mat::identity(d, d) * r(3.0 * i as f64)).collect();
        let parts2: Vec<Mat> = dims.iter().map(|&d| Mat::from_fn(d, d, |_, _| random_complex(&mut rng))).collect();
        let g1 = &q * block_diag(&parts) * q.adjoint();
        let g2 = &q * block_diag(&parts2) * q.adjoint();
        let amb = Ambient::full(n);
        let alg = generate_algebra(&amb, &[g1.clone(), g2.clone()], true, true).unwrap();
        let mut want: Vec<usize> = dims.clone();
        want.sort_by(|a, b| b.cmp(a));
        let mut got = alg.structure().unwrap().dims();
        got.sort_by(|a, b| b.cmp(a));
        prop_assert_eq!(&got, &want);
        prop_assert_eq!(alg.dim(), dims.iter().map(|d| d * d).sum::<usize>());
        prop_assert_eq!(word_span(n, &[g1, g2]), alg.dim());
    }
}

fn amplify_by_blocks(phi: &LinearMap, x: &Mat, k: usize) -> Mat {
    let n = x.nrows() / k;
    let m = phi.codomain().dim();
    let mut out = Mat::zeros(k * m, k * m);
    for i in 0..k {
        for j in 0..k {
            let blk = x.view((i * n, j * n), (n, n)).into_owned();
            out.view_mut((i * m, j * m), (m, m)).copy_from(&phi.apply(&blk).unwrap());
        }
    }
    out
}

fn m2_basis() -> Vec<Mat> {
    (0..4).map(|k| unit(2, k / 2, k % 2)).collect()
}

fn scaled(t: f64, transpose: bool) -> LinearMap {
    let amb = Ambient::full(2);
    let xs = m2_basis();
    let ys: Vec<Mat> = xs.iter().map(|x| if transpose { x.transpose() * r(t / 2.0) } else { x * r(t) }).collect();
    LinearMap::from_pairs(&amb, &xs, &ys, &amb).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// `t·id` and `t·transpose/2` on `M2` both have cb-norm `t`.
    #[test]
    fn cb_verdicts_on_known_norms(t in prop_oneof![0.3..0.97f64, 1.03..1.6f64], transpose in any::<bool>()) {
        let cfg = Config::default().with_cross_check(true);
        let phi = scaled(t, transpose);
        let rep = cc_check(&phi, &cfg);
        prop_assert!(!rep.conflict);
        if t < 1.0 {
            prop_assert_eq!(rep.verdict, Verdict::CompletelyContractive);
            prop_assert!(rep.certificates.iter().all(|c| verify_certificate(&phi, c, 1e-6)));
        } else {
            prop_assert_eq!(rep.verdict, Verdict::NotCC);
            let f = rep.falsifier.unwrap();
            let y = amplify_by_blocks(&phi, &f.x, f.level);
            prop_assert!(op_norm(&y) > op_norm(&f.x) * (1.0 + cfg.margin));
            prop_assert!(f.verify(&phi, cfg.margin).unwrap());
        }
    }
}

#[test]
fn random_map_falsifiers_verify_independently() {
    let cfg = Config::default();
    for (label, phi) in suite::random_maps(10, 7).unwrap() {
        let rep = cc_check(&phi, &cfg);
        if let Some(f) = &rep.falsifier {
            let y = amplify_by_blocks(&phi, &f.x, f.level);
            assert!(op_norm(&y) > op_norm(&f.x), "{label}: falsifier does not expand");
        }
        if rep.verdict == Verdict::CompletelyContractive {
            assert!(rep.certificates.iter().all(|c| verify_certificate(&phi, c, 1e-6)), "{label}");
        }
    }
}

fn t2_covers() -> &'static Vec<CstarCover> {
    static COVERS: OnceLock<Vec<CstarCover>> = OnceLock::new();
    COVERS.get_or_init(|| suite::t2_covers(&Config::default()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn join_and_meet_bound_their_arguments(i in 0usize..5, j in 0usize..5) {
        let cfg = Config::default();
        let cs = t2_covers();
        let (a, b) = (&cs[i], &cs[j]);
        let jn = join(&[a, b], &cfg).unwrap();
        let mt = meet(a, b, &cfg).unwrap();
        prop_assert!(below(a, &jn, &cfg).unwrap() && below(b, &jn, &cfg).unwrap());
        prop_assert!(below(&mt, a, &cfg).unwrap() && below(&mt, b, &cfg).unwrap());
        prop_assert!(equivalent(&jn, &join(&[b, a], &cfg).unwrap(), &cfg).unwrap());
        let id = t2().identity_cover(&cfg).unwrap();
        prop_assert!(below(&id, a, &cfg).unwrap());
    }

    /// Seeds change certificates, not verdicts.
    #[test]
    fn verdicts_are_seed_stable(seed in any::<u64>()) {
        let sc = suite::scenario("t2_covers").unwrap();
        let base = run_scenario(&sc, &Config::default()).unwrap();
        let other = run_scenario(&sc, &Config::default().with_seed(seed)).unwrap();
        let v = |r: &opcover::scenario::Report| r.checks.iter().map(|c| (c.id.clone(), c.verdict.clone(), c.status)).collect::<Vec<_>>();
        prop_assert_eq!(v(&base), v(&other));
    }
}
