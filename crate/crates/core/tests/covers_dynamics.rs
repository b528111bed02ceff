use opcover::cb::Verdict;
use opcover::closure::Polynomial;
use opcover::corpus::*;
use opcover::covers::*;
use opcover::dynamics::*;
use opcover::linalg::*;
use opcover::tol::Config;

#[test]
fn schur_cover_structure_and_shilov() {
    let cfg = Config::default();
    let cov = schur_cover(&cfg).unwrap();
    assert_eq!(cov.dim(), 22);
    assert_eq!(cov.block_dims().unwrap(), vec![4, 2, 1, 1]);
    let sh = shilov(&cov, &cfg).unwrap();
    println!("{:?}", sh);
    assert_eq!(sh.set, vec![1, 2, 3]);
    let env = envelope_from(&cov, &sh, &cfg).unwrap();
    assert_eq!(env.block_dims().unwrap(), vec![4]);
    let base = a4_identity_cover(&cfg).unwrap();
    assert!(equivalent(&env, &base, &cfg).unwrap());
}

#[test]
fn schur_cover_not_admissible() {
    let cfg = Config::default();
    let cov = schur_cover(&cfg).unwrap();
    let ds = swap_system_on(&cov.algebra, &cfg).unwrap();
    let rep = admissible(&ds, &cov, &cfg).unwrap();
    assert!(!rep.admissible);
    let (s, w) = rep.witness.unwrap();
    assert_eq!(s, 1);
    let mut expect = Mat::zeros(8, 8);
    expect[(4, 7)] = r(1.0);
    println!("{:.3}", w.y.map(|z| z.re));
    assert!(frob(&(&w.y - &expect)) < 1e-6);
    let _ = Polynomial::default();
}

#[test]
fn t2_covers_lattice() {
    let cfg = Config::default();
    let a = t2();
    let id = a.identity_cover(&cfg).unwrap();
    let d = diag_cover(&a, &cfg).unwrap();
    assert_eq!(d.block_dims().unwrap(), vec![2, 1, 1]);
    let sh = shilov(&d, &cfg).unwrap();
    assert_eq!(sh.set, vec![1, 2]);
    let c1 = first_char_cover(&a, &cfg).unwrap();
    let c2 = second_char_cover(&a, &cfg).unwrap();
    let m = meet(&c1, &c2, &cfg).unwrap();
    assert!(equivalent(&m, &id, &cfg).unwrap());
    let j = join(&[&c1, &c2], &cfg).unwrap();
    assert!(equivalent(&j, &d, &cfg).unwrap());
    let sr = shrunk_cover(&a, &cfg).unwrap();
    assert_eq!(sr.block_dims().unwrap(), vec![2, 2]);
    assert_eq!(shilov(&sr, &cfg).unwrap().set.len(), 1);
    let ds = t2_sign_system(&a, &cfg).unwrap();
    for c in [&id, &d, &c1, &sr] {
        assert!(admissible(&ds, c, &cfg).unwrap().admissible, "{}", c.name);
    }
    let inner = inner_in_itself(&ds, &cfg).unwrap();
    assert_eq!(inner.group_law, Some(GroupLaw::Exact));
    let _ = Verdict::NotCI;
}

#[test]
fn envelope_locally_inner() {
    let cfg = Config::default();
    let env = a4_identity_cover(&cfg).unwrap();
    let ds = swap_system_on(&env.algebra, &cfg).unwrap();
    let rep = locally_inner(&ds, &env, &cfg).unwrap();
    let us = rep.unitaries.unwrap();
    assert!(frob(&(&us[1] - u_plus_u())) < 1e-6);
    assert!(inner_in_itself(&ds, &cfg).unwrap().unitaries.is_none());
}

#[test]
fn crossed_products_of_a4() {
    use opcover::crossed::*;
    let cfg = Config::default();
    let env = a4_identity_cover(&cfg).unwrap();
    let ds = swap_system_on(&env.algebra, &cfg).unwrap();
    let tw = relative_crossed(&ds, &env, &cfg).unwrap();
    assert_eq!(tw.dim(), 16);
    assert_eq!(tw.diagonal_dims().unwrap(), vec![2, 2]);
    let triv = trivial_system_on(&env.algebra, z2(), &cfg).unwrap();
    let tr = relative_crossed(&triv, &env, &cfg).unwrap();
    assert_eq!(tr.dim(), 16);
    assert_eq!(tr.diagonal_dims().unwrap(), vec![1; 8]);
    let rep = crossed_equivalent(&tw, &tr, &cfg).unwrap();
    assert!(!rep.equivalent);
    let cs = tw.cstar().unwrap();
    assert_eq!(cs.structure().unwrap().dims(), vec![4, 4]);
}

#[test]
fn trivialization_on_t2() {
    use opcover::crossed::*;
    let cfg = Config::default();
    let a = t2();
    let ds = t2_sign_system(&a, &cfg).unwrap();
    for cover in [a.identity_cover(&cfg).unwrap(), diag_cover(&a, &cfg).unwrap()] {
        let t = std::time::Instant::now();
        let rep = trivialization_iso(&ds, &cover, &cfg).unwrap();
        println!("{} {:?} {:?} {:?}", cover.name, rep.ci.verdict, rep.tensor_diagonal, t.elapsed());
        assert!(rep.passed());
        assert_eq!(rep.tensor_dim, 6);
        assert_eq!(rep.tensor_diagonal, vec![1, 1, 1, 1]);
        assert_eq!(rep.trivial.diagonal_dims().unwrap(), vec![1, 1, 1, 1]);
    }
}

#[test]
fn partial_recovery_for_schur_cover() {
    use opcover::partial::*;
    let cfg = Config::default();
    let cov = schur_cover(&cfg).unwrap();
    let ds = swap_system_on(&cov.algebra, &cfg).unwrap();
    let t = std::time::Instant::now();
    let dec = decompose(&cov, false, &cfg).unwrap();
    assert_eq!(dec.j1_ci.verdict, Verdict::CompletelyIsometric);
    assert_eq!(dec.j2_cc.verdict, Verdict::CompletelyContractive);
    assert_eq!(dec.j2_ci.verdict, Verdict::NotCI);
    assert!(!dec.essential);
    let spec = build_partial_action(&ds, &dec, &cfg).unwrap();
    let pc = partial_crossed(&spec).unwrap();
    assert_eq!(pc.dim(), 38);
    assert_eq!(pc.block_dims().unwrap(), vec![4, 4, 2, 1, 1]);
    let rec = verify_partial_recovery(&ds, &dec, &spec, &pc, &cfg).unwrap();
    println!("{:?} {:?}", rec, t.elapsed());
    assert!(rec.passed());
}

#[test]
fn twisted_schur_cover_and_orbit_join() {
    let cfg = Config::default();
    let tw = schur_cover_twisted(&cfg).unwrap();
    assert_eq!(tw.ci_report.as_ref().unwrap().verdict, Verdict::CompletelyIsometric);
    let orbit = schur_orbit_cover(&cfg).unwrap();
    let ds = swap_system_on(&orbit.algebra, &cfg).unwrap();
    assert!(admissible(&ds, &orbit, &cfg).unwrap().admissible);
    let schur = schur_cover(&cfg).unwrap();
    assert!(!admissible(&ds, &schur, &cfg).unwrap().admissible);
    assert!(below(&schur, &orbit, &cfg).unwrap());
}
