//! The golden corpus: embedded scenarios plus property checks over the
//! corpus covers and systems.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::algebra::{orthonormal_span, Ambient};
use crate::cb::{cc_check, CbReport, LinearMap};
use crate::corpus;
use crate::covers::{self, below, equivalent, join, meet, CstarCover};
use crate::dynamics::{admissible, invariant_kernel_check, DynamicalSystem};
use crate::error::Result;
use crate::linalg::{op_norm, random_complex, Mat};
use crate::scenario::{run_scenario, CheckOutcome, Report, Scenario, Status};
use crate::tol::Config;

pub const SCENARIOS: [(&str, &str); 5] = [
    ("a4_schur", include_str!("../scenarios/a4_schur.json")),
    ("a4_crossed", include_str!("../scenarios/a4_crossed.json")),
    ("a4_partial", include_str!("../scenarios/a4_partial.json")),
    ("t2_covers", include_str!("../scenarios/t2_covers.json")),
    ("t2_trivialize", include_str!("../scenarios/t2_trivialize.json")),
];

pub fn scenario(name: &str) -> Option<Scenario> {
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, text)| Scenario::from_json(text).expect("embedded scenario parses"))
}

/// One instance of the lifting correspondence: `lower ≼ upper`, the action
/// lifts to `upper`, and the question is whether it lifts to `lower`.
#[derive(Debug, Clone)]
pub struct Correspondence {
    pub label: String,
    pub lower_admissible: bool,
    pub kernel_invariant: bool,
}

impl Correspondence {
    pub fn agrees(&self) -> bool {
        self.lower_admissible == self.kernel_invariant
    }
}

pub fn correspondence(ds: &DynamicalSystem, upper: &CstarCover, lower: &CstarCover, cfg: &Config) -> Result<Correspondence> {
    let up = admissible(ds, upper, cfg)?;
    let beta = up.beta.ok_or(crate::Error::NotAdmissible)?;
    let pi = covers::induced_morphism(upper, lower, cfg)?
        .morphism()
        .ok_or_else(|| crate::Error::NoMorphism(format!("{} onto {}", upper.name, lower.name)))?;
    Ok(Correspondence {
        label: format!("{}/{}: {} ≼ {}", ds.algebra.name, ds.group.name, lower.name, upper.name),
        lower_admissible: admissible(ds, lower, cfg)?.admissible,
        kernel_invariant: invariant_kernel_check(upper, &beta, &pi)?,
    })
}

/// Instances over `A4` and `T2`.
pub fn correspondence_corpus(cfg: &Config) -> Result<Vec<Correspondence>> {
    let schur = corpus::schur_cover(cfg)?;
    let a = schur.algebra.clone();
    let twisted = covers::CstarCover::make("schur∘α", &a, schur.ambient(), &corpus::schur_cover_twisted(cfg)?.gen_images(), cfg)?;
    let orbit = join(&[&schur, &twisted], cfg)?.renamed("orbit");
    let env = a.identity_cover(cfg)?.renamed("env");
    let swap = corpus::swap_system_on(&a, cfg)?;
    let t = corpus::t2();
    let id = t.identity_cover(cfg)?.renamed("id");
    let diag = corpus::diag_cover(&t, cfg)?;
    let c1 = corpus::first_char_cover(&t, cfg)?;
    let c2 = corpus::second_char_cover(&t, cfg)?;
    let sr = corpus::shrunk_cover(&t, cfg)?;
    let big = join(&[&diag, &sr], cfg)?.renamed("diag∨ρ½");
    let sign = corpus::t2_sign_system(&t, cfg)?;
    let rot = corpus::t2_rotation_system(&t, cfg)?;
    let mut jobs: Vec<(&DynamicalSystem, &CstarCover, &CstarCover)> = vec![];
    for lo in [&schur, &twisted, &env, &orbit] {
        jobs.push((&swap, &orbit, lo));
    }
    for lo in [&id, &c1, &c2, &diag] {
        jobs.push((&sign, &diag, lo));
    }
    for lo in [&sr, &diag, &id] {
        jobs.push((&rot, &big, lo));
    }
    jobs.par_iter().map(|(ds, up, lo)| correspondence(ds, up, lo, cfg)).collect()
}

/// A failed lattice law, as text.
pub type LawFailure = String;

/// Idempotence, commutativity and absorption on all pairs, associativity
/// on all triples, up to equivalence.
pub fn lattice_laws(cs: &[CstarCover], cfg: &Config) -> Result<Vec<LawFailure>> {
    let n = cs.len();
    let mut fails = Vec::new();
    let mut check = |ok: bool, what: String| {
        if !ok {
            fails.push(what);
        }
    };
    for a in cs {
        check(equivalent(&join(&[a, a], cfg)?, a, cfg)?, format!("{} ∨ itself", a.name));
        check(equivalent(&meet(a, a, cfg)?, a, cfg)?, format!("{} ∧ itself", a.name));
    }
    for i in 0..n {
        for k in i + 1..n {
            let (a, b) = (&cs[i], &cs[k]);
            let ab = join(&[a, b], cfg)?;
            let ba = join(&[b, a], cfg)?;
            check(equivalent(&ab, &ba, cfg)?, format!("{} ∨ {} commutes", a.name, b.name));
            let mab = meet(a, b, cfg)?;
            let mba = meet(b, a, cfg)?;
            check(equivalent(&mab, &mba, cfg)?, format!("{} ∧ {} commutes", a.name, b.name));
            check(equivalent(&join(&[a, &mab], cfg)?, a, cfg)?, format!("{} ∨ ({} ∧ {})", a.name, a.name, b.name));
            check(equivalent(&meet(a, &ab, cfg)?, a, cfg)?, format!("{} ∧ ({} ∨ {})", a.name, a.name, b.name));
            check(below(a, &ab, cfg)? && below(&mab, a, cfg)?, format!("order of {} and {}", a.name, b.name));
        }
    }
    for i in 0..n {
        for k in i + 1..n {
            for l in k + 1..n {
                let (a, b, c) = (&cs[i], &cs[k], &cs[l]);
                let left = join(&[&join(&[a, b], cfg)?, c], cfg)?;
                let right = join(&[a, &join(&[b, c], cfg)?], cfg)?;
                check(equivalent(&left, &right, cfg)?, format!("∨ associates on {}, {}, {}", a.name, b.name, c.name));
                let left = meet(&meet(a, b, cfg)?, c, cfg)?;
                let right = meet(a, &meet(b, c, cfg)?, cfg)?;
                check(equivalent(&left, &right, cfg)?, format!("∧ associates on {}, {}, {}", a.name, b.name, c.name));
            }
        }
    }
    Ok(fails)
}

/// The envelope lies below every cover.
pub fn envelope_least(cs: &[CstarCover], cfg: &Config) -> Result<Vec<LawFailure>> {
    let mut fails = Vec::new();
    for c in cs {
        let env = covers::envelope(c, cfg)?;
        for d in cs {
            if !below(&env, d, cfg)? {
                fails.push(format!("env({}) is not below {}", c.name, d.name));
            }
        }
    }
    Ok(fails)
}

/// Joins and meets of admissible covers are admissible.
pub fn admissible_sublattice(ds: &DynamicalSystem, cs: &[CstarCover], cfg: &Config) -> Result<Vec<LawFailure>> {
    let adm: Vec<&CstarCover> = cs.iter().filter(|c| admissible(ds, c, cfg).map(|r| r.admissible).unwrap_or(false)).collect();
    let mut fails = Vec::new();
    for i in 0..adm.len() {
        for k in i..adm.len() {
            let (a, b) = (adm[i], adm[k]);
            if !admissible(ds, &join(&[a, b], cfg)?, cfg)?.admissible {
                fails.push(format!("{} ∨ {} is not admissible", a.name, b.name));
            }
            if !admissible(ds, &meet(a, b, cfg)?, cfg)?.admissible {
                fails.push(format!("{} ∧ {} is not admissible", a.name, b.name));
            }
        }
    }
    Ok(fails)
}

pub fn t2_covers(cfg: &Config) -> Result<Vec<CstarCover>> {
    let t = corpus::t2();
    Ok(vec![
        t.identity_cover(cfg)?.renamed("id"),
        corpus::diag_cover(&t, cfg)?,
        corpus::first_char_cover(&t, cfg)?,
        corpus::second_char_cover(&t, cfg)?,
        corpus::shrunk_cover(&t, cfg)?,
    ])
}

pub fn a4_covers(cfg: &Config) -> Result<Vec<CstarCover>> {
    let schur = corpus::schur_cover(cfg)?;
    let a = schur.algebra.clone();
    let twisted = CstarCover::make("schur∘α", &a, schur.ambient(), &corpus::schur_cover_twisted(cfg)?.gen_images(), cfg)?;
    Ok(vec![a.identity_cover(cfg)?.renamed("env"), schur, twisted])
}

/// A random linear map from a subspace of `M4` into `M_m`, scaled so that
/// both contractive and expanding instances occur.
pub fn random_map(rng: &mut ChaCha8Rng) -> Result<LinearMap> {
    let d = rng.random_range(1..=4usize);
    let m = rng.random_range(2..=4usize);
    let mut rand_mat = |r: usize, c: usize| Mat::from_fn(r, c, |_, _| random_complex(rng));
    let xs: Vec<Mat> = (0..d).map(|_| rand_mat(4, 4)).collect();
    let v = rand_mat(m, 4);
    let w = rand_mat(4, m);
    let v2 = rand_mat(m, 4);
    let w2 = rand_mat(4, m);
    let mix: f64 = rng.random_range(0.0..1.0);
    let raw: Vec<Mat> = xs.iter().map(|x| (&v * x * &w).scale(1.0 - mix) + (&v2 * x.transpose() * &w2).scale(mix)).collect();
    // Scale by the largest level-one ratio on the given spanning set.
    let ratio = xs.iter().zip(&raw).map(|(x, y)| op_norm(y) / op_norm(x)).fold(0.0, f64::max);
    let scale: f64 = rng.random_range(0.6..1.1) / ratio;
    let ys: Vec<Mat> = raw.iter().map(|y| y.scale(scale)).collect();
    LinearMap::from_pairs(&Ambient::full(4), &xs, &ys, &Ambient::full(m))
}

/// Maps near the contractive boundary where a loose feasibility tolerance
/// produces a false certificate.
pub fn boundary_maps() -> Result<Vec<(String, LinearMap)>> {
    let m2 = Ambient::full(2);
    let basis: Vec<Mat> = (0..4).map(|k| crate::linalg::unit(2, k / 2, k % 2)).collect();
    let span = orthonormal_span(&m2, &basis)?;
    let mut out = Vec::new();
    for t in [0.5, 0.99, 1.02, 1.05] {
        out.push((format!("{t}·id"), LinearMap::from_fn(&span, &m2, |x| x.scale(t))?));
        out.push((format!("{t}·transpose/2"), LinearMap::from_fn(&span, &m2, |x| x.transpose().scale(t / 2.0))?));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CrossOracle {
    pub label: String,
    pub report: CbReport,
}

/// Runs both oracles on every map.
pub fn cross_oracle(maps: &[(String, LinearMap)], cfg: &Config) -> Vec<CrossOracle> {
    let cfg = cfg.with_cross_check(true);
    maps.par_iter().map(|(label, phi)| CrossOracle { label: label.clone(), report: cc_check(phi, &cfg) }).collect()
}

pub fn random_maps(n: usize, seed: u64) -> Result<Vec<(String, LinearMap)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| Ok((format!("random#{i}"), random_map(&mut rng)?))).collect()
}

fn property(id: &str, ok: bool, verdict: &str, details: Value, t: Instant) -> CheckOutcome {
    CheckOutcome {
        id: id.into(),
        op: "property".into(),
        verdict: verdict.into(),
        status: if ok { Status::Pass } else { Status::Fail },
        details,
        hash: None,
        millis: t.elapsed().as_millis(),
    }
}

fn laws_outcome(id: &str, r: Result<Vec<LawFailure>>, t: Instant) -> CheckOutcome {
    match r {
        Ok(f) => property(id, f.is_empty(), if f.is_empty() { "Holds" } else { "Violated" }, json!({"failures": f}), t),
        Err(e) => property(id, false, "Error", json!({"error": e.to_string()}), t),
    }
}

fn properties(cfg: &Config) -> Vec<CheckOutcome> {
    let mut out = Vec::new();

    let t = Instant::now();
    out.push(match correspondence_corpus(cfg) {
        Ok(cs) => {
            let bad: Vec<&Correspondence> = cs.iter().filter(|c| !c.agrees()).collect();
            let rows: Vec<Value> = cs.iter().map(|c| json!({"instance": c.label, "admissible": c.lower_admissible, "invariant": c.kernel_invariant})).collect();
            property("lifting-correspondence", bad.is_empty() && cs.len() >= 6, if bad.is_empty() { "Agree" } else { "Disagree" }, json!({"instances": rows}), t)
        }
        Err(e) => property("lifting-correspondence", false, "Error", json!({"error": e.to_string()}), t),
    });

    let t = Instant::now();
    let t2 = t2_covers(cfg);
    let a4 = a4_covers(cfg);
    let (t2, a4) = match (t2, a4) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => {
            out.push(property("lattice", false, "Error", json!({"error": e.to_string()}), t));
            return out;
        }
    };
    out.push(laws_outcome("lattice-laws-t2", lattice_laws(&t2, cfg), t));
    let t = Instant::now();
    out.push(laws_outcome("lattice-laws-a4", lattice_laws(&a4, cfg), t));
    let t = Instant::now();
    let mut least = envelope_least(&t2, cfg);
    if let (Ok(f), Ok(g)) = (&mut least, envelope_least(&a4, cfg)) {
        f.extend(g);
    }
    out.push(laws_outcome("envelope-least", least, t));
    let t = Instant::now();
    let sub = corpus::t2_sign_system(&t2[0].algebra, cfg).and_then(|ds| admissible_sublattice(&ds, &t2, cfg)).and_then(|mut f| {
        let ds = corpus::swap_system_on(&a4[0].algebra, cfg)?;
        let orbit = join(&[&a4[1], &a4[2]], cfg)?.renamed("orbit");
        let mut cs = a4.clone();
        cs.push(orbit);
        f.extend(admissible_sublattice(&ds, &cs, cfg)?);
        Ok(f)
    });
    out.push(laws_outcome("admissible-sublattice", sub, t));

    let t = Instant::now();
    let quotients = [&a4[1], &a4[2], &t2[1], &t2[4]]
        .par_iter()
        .map(|c| covers::shilov(c, cfg).map(|r| (c.name.clone(), r.is_decisive(), r.singletons)))
        .collect::<Result<Vec<_>>>();
    out.push(match quotients {
        Ok(q) => {
            let ok = q.iter().all(|x| x.1);
            let rows: Vec<Value> = q.iter().map(|(n, _, s)| json!({"cover": n, "singletons": s})).collect();
            property("quotient-verdicts-decisive", ok, if ok { "Decisive" } else { "Inconclusive" }, json!({"covers": rows}), t)
        }
        Err(e) => property("quotient-verdicts-decisive", false, "Error", json!({"error": e.to_string()}), t),
    });

    let t = Instant::now();
    let maps = boundary_maps().and_then(|mut m| {
        m.extend(random_maps(12, cfg.seed)?);
        Ok(m)
    });
    out.push(match maps {
        Ok(maps) => {
            let res = cross_oracle(&maps, cfg);
            let conflicts: Vec<&str> = res.iter().filter(|r| r.report.conflict).map(|r| r.label.as_str()).collect();
            let ok = conflicts.is_empty();
            property("cross-oracle", ok, if ok { "Consistent" } else { "Conflict" }, json!({"maps": maps.len(), "conflicts": conflicts}), t)
        }
        Err(e) => property("cross-oracle", false, "Error", json!({"error": e.to_string()}), t),
    });
    out
}

/// Runs every embedded scenario and the property checks.
pub fn paper_suite(cfg: &Config) -> Result<Report> {
    let scenarios: Vec<Scenario> = SCENARIOS.iter().map(|(_, text)| Scenario::from_json(text)).collect::<Result<_>>()?;
    let reports = scenarios.par_iter().map(|sc| run_scenario(sc, cfg)).collect::<Result<Vec<_>>>()?;
    let mut merged = Report::merge("paper-suite", cfg, reports);
    merged.checks.extend(properties(cfg).into_iter().map(|mut c| {
        c.id = format!("properties/{}", c.id);
        c
    }));
    Ok(merged)
}
