//! Scenario files and the reports produced by running them.
//!
//! A scenario names algebras, covers, groups and systems and lists checks.
//! Checks run in order; `join`, `meet` and `envelope` may register their
//! result under a new cover name with `"as"`.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::algebra::Ambient;
use crate::cb::{ci_check, Verdict};
use crate::covers::{self, CstarCover, Induced, OperatorAlgebra, Validation};
use crate::crossed::{crossed_equivalent, relative_crossed, trivialization_iso};
use crate::dynamics::{self, block_permutation, DynamicalSystem, FiniteGroup, GroupLaw};
use crate::error::{Error, Result};
use crate::partial;
use crate::report::{self, num};
use crate::structure::{annihilator, is_essential, render_dims};
use crate::tol::Config;

pub const TOOL: &str = "opcover";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerance for numeric fields in `expect`.
pub const EXPECT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub algebras: Vec<AlgebraDef>,
    #[serde(default)]
    pub covers: Vec<CoverDef>,
    #[serde(default)]
    pub groups: Vec<GroupDef>,
    #[serde(default)]
    pub systems: Vec<SystemDef>,
    #[serde(default)]
    pub checks: Vec<CheckDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDef {
    pub name: String,
    pub ambient: Vec<usize>,
    pub generators: Vec<GenDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenDef {
    pub name: String,
    pub matrix: Value,
}

/// Either explicit generator images in `ambient`, or `identity`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverDef {
    pub name: String,
    pub algebra: String,
    #[serde(default)]
    pub ambient: Option<Vec<usize>>,
    #[serde(default)]
    pub images: Vec<Value>,
    #[serde(default)]
    pub identity: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDef {
    pub name: String,
    #[serde(default)]
    pub table: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub cyclic: Option<usize>,
}

/// `conjugation` lists one unitary per group element; `images` lists, per
/// group element, the images of the generators.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDef {
    pub name: String,
    pub algebra: String,
    pub group: String,
    #[serde(default)]
    pub conjugation: Option<Vec<Value>>,
    #[serde(default)]
    pub images: Option<Vec<Vec<Value>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Op {
    CheckCover,
    Structure,
    Shilov,
    Essential,
    Envelope,
    Order,
    Equivalent,
    Join,
    Meet,
    Admissible,
    Inner,
    Crossed,
    Trivialize,
    Partial,
}

impl Op {
    pub fn name(self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDef {
    #[serde(default)]
    pub id: Option<String>,
    pub op: Op,
    #[serde(default)]
    pub cover: Option<String>,
    #[serde(default)]
    pub covers: Vec<String>,
    #[serde(default)]
    pub lower: Option<String>,
    #[serde(default)]
    pub upper: Option<String>,
    #[serde(default)]
    pub system: Option<String>,
    /// Second system for `crossed` comparisons.
    #[serde(default)]
    pub against: Option<String>,
    #[serde(default, rename = "as")]
    pub as_name: Option<String>,
    #[serde(default)]
    pub waive_maximality: bool,
    /// A verdict string, or an object matched against the details.
    #[serde(default)]
    pub expect: Option<Value>,
}

impl CheckDef {
    pub fn new(op: Op) -> Self {
        CheckDef {
            id: None,
            op,
            cover: None,
            covers: vec![],
            lower: None,
            upper: None,
            system: None,
            against: None,
            as_name: None,
            waive_maximality: false,
            expect: None,
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("scenario: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Scenario flags override the configuration.
    pub fn config(&self, base: &Config) -> Config {
        let mut cfg = *base;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.tol {
            cfg.feas_tol = t;
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub id: String,
    pub op: String,
    pub verdict: String,
    pub status: Status,
    pub details: Value,
    pub hash: Option<String>,
    pub millis: u128,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub tol: f64,
    pub checks: Vec<CheckOutcome>,
}

impl Report {
    pub fn status(&self) -> Status {
        self.checks.iter().map(|c| c.status).max().unwrap_or(Status::Pass)
    }

    pub fn exit_code(&self) -> i32 {
        self.status().exit_code()
    }

    /// The part of the report that must not depend on timing.
    pub fn verdicts(&self) -> Value {
        Value::Array(self.checks.iter().map(|c| json!({"id": c.id, "op": c.op, "verdict": c.verdict, "status": c.status})).collect())
    }

    pub fn verdict_text(&self) -> String {
        serde_json::to_string(&self.verdicts()).expect("json")
    }

    pub fn hashes(&self) -> Value {
        Value::Array(self.checks.iter().filter_map(|c| c.hash.as_ref().map(|h| json!({"id": c.id, "hash": h}))).collect())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tool": TOOL,
            "version": VERSION,
            "scenario": self.scenario,
            "seed": self.seed,
            "tol": num(self.tol),
            "status": self.status(),
            "verdicts": self.verdicts(),
            "hashes": self.hashes(),
            "results": self.checks.iter().map(|c| json!({"id": c.id, "op": c.op, "details": c.details})).collect::<Vec<_>>(),
            "timing": self.checks.iter().map(|c| json!({"id": c.id, "ms": c.millis as u64})).collect::<Vec<_>>(),
        })
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("{} (seed {:#x}, tol {:e})\n", self.scenario, self.seed, self.tol);
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Inconclusive => "INCONCLUSIVE",
            };
            out.push_str(&format!("  {tag:<12} {:<24} {:<14} {}  [{} ms]\n", c.id, c.op, c.verdict, c.millis));
        }
        out.push_str(&format!("status: {:?}\n", self.status()));
        out
    }

    /// Merges reports; check ids are prefixed with the scenario name.
    pub fn merge(name: &str, cfg: &Config, parts: Vec<Report>) -> Report {
        let mut checks = Vec::new();
        for p in parts {
            for mut c in p.checks {
                c.id = format!("{}/{}", p.scenario, c.id);
                checks.push(c);
            }
        }
        Report { scenario: name.into(), seed: cfg.seed, tol: cfg.feas_tol, checks }
    }
}

struct CoverSlot {
    cover: std::result::Result<CstarCover, String>,
    ci: Option<Verdict>,
    ci_json: Option<Value>,
}

/// Named objects of a scenario.
pub struct Workspace {
    pub cfg: Config,
    algebras: HashMap<String, Arc<OperatorAlgebra>>,
    groups: HashMap<String, FiniteGroup>,
    systems: HashMap<String, DynamicalSystem>,
    covers: HashMap<String, CoverSlot>,
    /// Names whose registering check failed.
    failed: Vec<String>,
}

fn missing(kind: &str, name: &str) -> Error {
    Error::Input(format!("unknown {kind} '{name}'"))
}

fn mats(vs: &[Value]) -> Result<Vec<Mat>> {
    vs.iter()
        .map(|v| {
            let m = report::parse_mat(v)?;
            if m.nrows() != m.ncols() {
                return Err(Error::Input(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
            }
            Ok(m)
        })
        .collect()
}

use crate::linalg::Mat;

impl Workspace {
    pub fn new(sc: &Scenario, cfg: &Config) -> Result<Self> {
        let mut ws = Workspace { cfg: *cfg, algebras: HashMap::new(), groups: HashMap::new(), systems: HashMap::new(), covers: HashMap::new(), failed: Vec::new() };
        for a in &sc.algebras {
            let amb = Ambient::new(a.ambient.clone()).map_err(|e| Error::Input(format!("algebra {}: {e}", a.name)))?;
            let gens = a
                .generators
                .iter()
                .map(|g| Ok((g.name.clone(), report::parse_mat(&g.matrix)?)))
                .collect::<Result<Vec<_>>>()?;
            for (n, m) in &gens {
                amb.check(m).map_err(|e| Error::Input(format!("generator {n} of {}: {e}", a.name)))?;
            }
            let alg = OperatorAlgebra::new(&a.name, &amb, gens).map_err(|e| Error::Input(format!("algebra {}: {e}", a.name)))?;
            ws.algebras.insert(a.name.clone(), Arc::new(alg));
        }
        for g in &sc.groups {
            let grp = match (&g.table, g.cyclic) {
                (Some(t), None) => FiniteGroup::from_table(&g.name, t.clone()),
                (None, Some(n)) if n > 0 => Ok(FiniteGroup::cyclic(n)),
                _ => Err(Error::Input(format!("group {} needs exactly one of table, cyclic", g.name))),
            }
            .map_err(|e| Error::Input(format!("group {}: {e}", g.name)))?;
            ws.groups.insert(g.name.clone(), grp);
        }
        for c in &sc.covers {
            let alg = ws.algebra(&c.algebra)?;
            let cover = if c.identity {
                if c.ambient.is_some() || !c.images.is_empty() {
                    return Err(Error::Input(format!("cover {}: identity takes no images", c.name)));
                }
                alg.identity_cover(cfg).map(|cv| cv.renamed(&c.name))
            } else {
                let blocks = c.ambient.clone().ok_or_else(|| Error::Input(format!("cover {}: missing ambient", c.name)))?;
                let amb = Ambient::new(blocks).map_err(|e| Error::Input(format!("cover {}: {e}", c.name)))?;
                let images = mats(&c.images)?;
                for m in &images {
                    amb.check(m).map_err(|e| Error::Input(format!("cover {}: {e}", c.name)))?;
                }
                CstarCover::make_with(&c.name, &alg, &amb, &images, Validation::Structural, cfg)
            };
            let ci = if c.identity { Some(Verdict::CompletelyIsometric) } else { None };
            ws.covers.insert(c.name.clone(), CoverSlot { cover: cover.map_err(|e| e.to_string()), ci, ci_json: None });
        }
        for s in &sc.systems {
            let alg = ws.algebra(&s.algebra)?;
            let grp = ws.groups.get(&s.group).cloned().ok_or_else(|| missing("group", &s.group))?;
            let ds = match (&s.conjugation, &s.images) {
                (Some(us), None) => DynamicalSystem::conjugation(&alg, grp, &mats(us)?, cfg),
                (None, Some(ims)) => {
                    let ims = ims.iter().map(|v| mats(v)).collect::<Result<Vec<_>>>()?;
                    DynamicalSystem::make(&alg, grp, ims, Validation::Full, cfg)
                }
                _ => Err(Error::Input("needs exactly one of conjugation, images".into())),
            }
            .map_err(|e| Error::Input(format!("system {}: {e}", s.name)))?;
            ws.systems.insert(s.name.clone(), ds);
        }
        Ok(ws)
    }

    fn algebra(&self, name: &str) -> Result<Arc<OperatorAlgebra>> {
        self.algebras.get(name).cloned().ok_or_else(|| missing("algebra", name))
    }

    fn system(&self, name: Option<&String>) -> Result<&DynamicalSystem> {
        let name = name.ok_or_else(|| Error::Input("check needs a system".into()))?;
        self.systems.get(name).ok_or_else(|| missing("system", name))
    }

    fn ensure_ci(&mut self, name: &str) -> Result<()> {
        let cfg = self.cfg;
        if !self.covers.contains_key(name) && self.failed.iter().any(|f| f == name) {
            let why = format!("the check defining '{name}' failed");
            self.covers.insert(name.into(), CoverSlot { cover: Err(why), ci: None, ci_json: None });
        }
        let slot = self.covers.get_mut(name).ok_or_else(|| missing("cover", name))?;
        if slot.ci.is_none() {
            if let Ok(c) = &slot.cover {
                let rep = ci_check(&c.j, &cfg);
                slot.ci = Some(rep.verdict);
                slot.ci_json = Some(report::cb_report(&rep));
            }
        }
        Ok(())
    }

    /// A validated cover, or the reason it is not one.
    fn cover(&mut self, name: &str) -> Result<std::result::Result<CstarCover, String>> {
        self.ensure_ci(name)?;
        let slot = &self.covers[name];
        Ok(match (&slot.cover, slot.ci) {
            (Err(e), _) => Err(e.clone()),
            (Ok(c), Some(Verdict::CompletelyIsometric)) => Ok(c.clone()),
            (Ok(_), v) => Err(format!("j is not completely isometric ({v:?})")),
        })
    }

    fn register(&mut self, name: &str, cover: CstarCover) {
        let cover = cover.renamed(name);
        self.covers.insert(name.into(), CoverSlot { cover: Ok(cover), ci: Some(Verdict::CompletelyIsometric), ci_json: None });
    }
}

/// Outcome of one check before expectations are applied.
struct Raw {
    verdict: String,
    positive: bool,
    details: Map<String, Value>,
    hash: Option<String>,
}

impl Raw {
    fn new(verdict: &str, positive: bool) -> Self {
        Raw { verdict: verdict.into(), positive, details: Map::new(), hash: None }
    }

    fn with(mut self, k: &str, v: Value) -> Self {
        self.details.insert(k.into(), v);
        self
    }
}

fn shape_json(c: &CstarCover) -> Result<Value> {
    let st = c.c.structure()?;
    Ok(json!({"dim": c.dim(), "ambient": report::ambient(c.ambient()), "blocks": st.shape(), "type": st.render()}))
}

fn group_law(g: &Option<GroupLaw>) -> Value {
    match g {
        None => Value::Null,
        Some(GroupLaw::Exact) => json!("exact"),
        Some(GroupLaw::Projective { defect }) => json!({"projective": num(*defect)}),
    }
}

macro_rules! need_cover {
    ($ws:expr, $name:expr) => {
        match $ws.cover($name)? {
            Ok(c) => c,
            Err(why) => return Ok(Raw::new("InvalidCover", false).with("cover", json!($name)).with("reason", json!(why))),
        }
    };
}

fn one<'a>(name: &'a Option<String>, what: &str) -> Result<&'a str> {
    name.as_deref().ok_or_else(|| Error::Input(format!("check needs '{what}'")))
}

fn run_op(ws: &mut Workspace, chk: &CheckDef) -> Result<Raw> {
    let cfg = ws.cfg;
    match chk.op {
        Op::CheckCover => {
            let name = one(&chk.cover, "cover")?;
            ws.ensure_ci(name)?;
            let slot = &ws.covers[name];
            let c = match &slot.cover {
                Err(e) => return Ok(Raw::new("NotHomomorphism", false).with("reason", json!(e))),
                Ok(c) => c.clone(),
            };
            let v = slot.ci.unwrap_or(Verdict::Inconclusive);
            let mut raw = Raw::new(&format!("{v:?}"), v == Verdict::CompletelyIsometric).with("cover", shape_json(&c)?);
            if let Some(j) = &slot.ci_json {
                raw.hash = j.get("falsifier").and_then(|f| f["hash"].as_str()).map(String::from);
                raw = raw.with("cb", j.clone());
            }
            Ok(raw)
        }
        Op::Structure => {
            let c = need_cover!(ws, one(&chk.cover, "cover")?);
            Ok(Raw::new("Ok", true).with("cover", shape_json(&c)?))
        }
        Op::Shilov | Op::Essential | Op::Envelope => {
            let c = need_cover!(ws, one(&chk.cover, "cover")?);
            let sh = covers::shilov(&c, &cfg)?;
            let st = c.c.structure()?;
            let set_dims: Vec<usize> = sh.set.iter().map(|&i| st.blocks[i].dim).collect();
            let base = |v: &str, pos: bool| {
                Raw::new(v, pos)
                    .with("shilov", json!(sh.set))
                    .with("shilov_type", json!(render_dims(&set_dims)))
                    .with("singletons", json!(sh.singletons))
                    .with("union", json!(sh.union))
                    .with("cover", shape_json(&c).unwrap_or(Value::Null))
            };
            if !sh.is_decisive() {
                return Ok(base("Inconclusive", false));
            }
            match chk.op {
                Op::Shilov => Ok(base("Ok", true)),
                Op::Essential => {
                    let ess = is_essential(&c.c, &sh.set)?;
                    let ann = annihilator(&c.c, &sh.set)?;
                    let ann_dims: Vec<usize> = ann.iter().map(|&i| st.blocks[i].dim).collect();
                    Ok(base(if ess { "Essential" } else { "NotEssential" }, ess)
                        .with("essential", json!(ess))
                        .with("annihilator", json!(ann))
                        .with("annihilator_type", json!(render_dims(&ann_dims))))
                }
                _ => {
                    let env = covers::envelope_from(&c, &sh, &cfg)?;
                    let raw = base("Ok", true).with("envelope", shape_json(&env)?);
                    if let Some(n) = &chk.as_name {
                        ws.register(n, env);
                    }
                    Ok(raw)
                }
            }
        }
        Op::Order => {
            let lo = need_cover!(ws, one(&chk.lower, "lower")?);
            let up = need_cover!(ws, one(&chk.upper, "upper")?);
            match covers::induced_morphism(&up, &lo, &cfg)? {
                Induced::Morphism(m) => Ok(Raw::new("Below", true).with("kernel", json!(m.kernel))),
                Induced::Absent(w) => {
                    let mut raw = Raw::new("NotBelow", false).with("witness", report::witness(&w, &up.algebra.gen_names));
                    raw.hash = Some(report::hash_mat(&w.y));
                    Ok(raw)
                }
            }
        }
        Op::Equivalent => {
            let [a, b] = chk.covers.as_slice() else {
                return Err(Error::Input("equivalent needs two covers".into()));
            };
            let a = need_cover!(ws, a);
            let b = need_cover!(ws, b);
            let eq = covers::equivalent(&a, &b, &cfg)?;
            Ok(Raw::new(if eq { "Equivalent" } else { "NotEquivalent" }, eq))
        }
        Op::Join | Op::Meet => {
            if chk.covers.is_empty() {
                return Err(Error::Input("join and meet need covers".into()));
            }
            let mut cs = Vec::new();
            for n in &chk.covers {
                cs.push(need_cover!(ws, n));
            }
            let out = if chk.op == Op::Join {
                covers::join(&cs.iter().collect::<Vec<_>>(), &cfg)?
            } else {
                let mut acc = cs[0].clone();
                for c in &cs[1..] {
                    acc = covers::meet(&acc, c, &cfg)?;
                }
                acc
            };
            let raw = Raw::new("Ok", true).with("cover", shape_json(&out)?);
            if let Some(n) = &chk.as_name {
                ws.register(n, out);
            }
            Ok(raw)
        }
        Op::Admissible => {
            let c = need_cover!(ws, one(&chk.cover, "cover")?);
            let ds = ws.system(chk.system.as_ref())?;
            let rep = dynamics::admissible(ds, &c, &cfg)?;
            let mut raw = Raw::new(if rep.admissible { "Admissible" } else { "NotAdmissible" }, rep.admissible).with("closure_dims", json!(rep.closure_dims));
            if let Some((s, w)) = &rep.witness {
                raw = raw.with("witness", report::witness(w, &c.algebra.gen_names)).with("element", json!(s));
                raw.hash = Some(report::hash_mat(&w.y));
            }
            if let Some(beta) = &rep.beta {
                let perms = beta.iter().map(|b| block_permutation(&c.c, b)).collect::<Result<Vec<_>>>()?;
                raw = raw.with("block_permutations", json!(perms));
            }
            Ok(raw)
        }
        Op::Inner => {
            let ds = ws.system(chk.system.as_ref())?.clone();
            let rep = match &chk.cover {
                Some(n) => {
                    let c = need_cover!(ws, n);
                    dynamics::locally_inner(&ds, &c, &cfg)?
                }
                None => dynamics::inner_in_itself(&ds, &cfg)?,
            };
            let ok = rep.unitaries.is_some();
            let mut raw = Raw::new(if ok { "Inner" } else { "NotInner" }, ok)
                .with("solution_dims", json!(rep.solution_dims))
                .with("group_law", group_law(&rep.group_law))
                .with("missing", json!(rep.missing));
            if let Some(us) = &rep.unitaries {
                raw = raw.with("unitaries", Value::Array(us.iter().map(report::mat).collect()));
            }
            Ok(raw)
        }
        Op::Crossed => {
            let ds = ws.system(chk.system.as_ref())?.clone();
            let c = match &chk.cover {
                Some(n) => need_cover!(ws, n),
                None => ds.algebra.identity_cover(&cfg)?,
            };
            let describe = |cp: &crate::crossed::CrossedProduct| -> Result<Value> {
                let diag = cp.diagonal().structure()?.clone();
                let cs = cp.cstar()?;
                let cst = cs.structure()?;
                Ok(json!({
                    "dim": cp.dim(),
                    "diagonal": {"dim": cp.diagonal().dim(), "blocks": diag.shape(), "type": diag.render()},
                    "cstar": {"dim": cs.dim(), "blocks": cst.shape(), "type": cst.render()},
                    "covariance_residual": num(cp.covariance_residual()?),
                }))
            };
            let cp = relative_crossed(&ds, &c, &cfg)?;
            let mut raw = Raw::new("Ok", true).with("crossed", describe(&cp)?);
            if let Some(other) = &chk.against {
                let ds2 = ws.system(Some(other))?.clone();
                let cp2 = relative_crossed(&ds2, &c, &cfg)?;
                let eq = crossed_equivalent(&cp, &cp2, &cfg)?;
                raw.verdict = if eq.equivalent { "Equivalent" } else { "NotEquivalent" }.into();
                raw.positive = eq.equivalent;
                raw = raw.with("against", describe(&cp2)?).with("generator_map", json!(eq.generator_map)).with("ci", json!(eq.ci));
            }
            Ok(raw)
        }
        Op::Trivialize => {
            let ds = ws.system(chk.system.as_ref())?.clone();
            let c = need_cover!(ws, one(&chk.cover, "cover")?);
            let rep = trivialization_iso(&ds, &c, &cfg)?;
            let ok = rep.passed();
            let mut raw = Raw::new(if ok { "Trivialized" } else { "NotTrivialized" }, ok)
                .with("ci", report::cb_report(&rep.ci))
                .with("multiplicative_defect", num(rep.multiplicative_defect))
                .with("trivial_dim", json!(rep.trivial.dim()))
                .with("trivial_diagonal", json!(rep.trivial.diagonal_dims()?))
                .with("tensor_dim", json!(rep.tensor_dim))
                .with("tensor_diagonal", json!(rep.tensor_diagonal))
                .with("tensor_defect", num(rep.tensor_defect))
                .with("tensor_ci", json!(rep.tensor_ci));
            raw.hash = rep.ci.falsifier.as_ref().map(|f| report::hash_mat(&f.x));
            Ok(raw)
        }
        Op::Partial => {
            let ds = ws.system(chk.system.as_ref())?.clone();
            let c = need_cover!(ws, one(&chk.cover, "cover")?);
            let dec = partial::decompose(&c, chk.waive_maximality, &cfg)?;
            let st = c.c.structure()?;
            let comp_dims: Vec<usize> = dec.shilov.iter().map(|&i| st.blocks[i].dim).collect();
            let spec = partial::build_partial_action(&ds, &dec, &cfg)?;
            let pc = partial::partial_crossed(&spec)?;
            let rec = partial::verify_partial_recovery(&ds, &dec, &spec, &pc, &cfg)?;
            let ok = rec.passed();
            let pst = pc.span.structure()?;
            Ok(Raw::new(if ok { "Recovered" } else { "NotRecovered" }, ok)
                .with("shilov", json!(dec.shilov))
                .with("complement", json!({"blocks": comp_dims, "type": render_dims(&comp_dims)}))
                .with("maximal", json!(dec.maximal))
                .with("essential", json!(dec.essential))
                .with("j1", json!(dec.j1_ci.verdict))
                .with("j2_cc", json!(dec.j2_cc.verdict))
                .with("j2_ci", json!(dec.j2_ci.verdict))
                .with("dim", json!(pc.dim()))
                .with("blocks", json!(pst.dims()))
                .with("type", json!(pst.render()))
                .with("multiplicative_defect", num(pc.multiplicative_defect))
                .with("b_dim", json!(rec.b_dim))
                .with("full_dim", json!(rec.full_dim))
                .with("inverse_residuals", json!([num(rec.inverse_residuals.0), num(rec.inverse_residuals.1)]))
                .with("homomorphism_defects", json!([num(rec.multiplicative_defects.0), num(rec.multiplicative_defects.1)]))
                .with("forward_ci", json!(rec.forward_ci))
                .with("backward_ci", json!(rec.backward_ci)))
        }
    }
}

fn finish(chk: &CheckDef, id: String, raw: Raw, millis: u128) -> CheckOutcome {
    let mut details = raw.details;
    details.insert("verdict".into(), json!(raw.verdict));
    let details = Value::Object(details);
    let status = if raw.verdict == "Inconclusive" {
        Status::Inconclusive
    } else {
        let ok = match &chk.expect {
            None => raw.positive,
            Some(Value::String(v)) => *v == raw.verdict,
            Some(e) => report::matches(e, &details, EXPECT_TOL),
        };
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    };
    CheckOutcome { id, op: chk.op.name(), verdict: raw.verdict, status, details, hash: raw.hash, millis }
}

/// Runs one check; numerical failures become failing outcomes, input
/// errors are returned.
pub fn run_check(ws: &mut Workspace, chk: &CheckDef, index: usize) -> Result<CheckOutcome> {
    let id = chk.id.clone().unwrap_or_else(|| format!("{}#{index}", chk.op.name()));
    let t = Instant::now();
    let raw = match run_op(ws, chk) {
        Ok(r) => r,
        Err(e @ Error::Input(_)) => return Err(e),
        Err(Error::Inconclusive(why)) => Raw::new("Inconclusive", false).with("reason", json!(why)),
        Err(e) => Raw::new("Error", false).with("error", json!(e.to_string())),
    };
    if let Some(n) = &chk.as_name {
        if !ws.covers.contains_key(n) {
            ws.failed.push(n.clone());
        }
    }
    Ok(finish(chk, id, raw, t.elapsed().as_millis()))
}

pub fn run_scenario(sc: &Scenario, base: &Config) -> Result<Report> {
    let cfg = sc.config(base);
    let mut ws = Workspace::new(sc, &cfg)?;
    let mut checks = Vec::new();
    for (i, chk) in sc.checks.iter().enumerate() {
        checks.push(run_check(&mut ws, chk, i)?);
    }
    Ok(Report { scenario: sc.name.clone(), seed: cfg.seed, tol: cfg.feas_tol, checks })
}

pub fn run_file(path: &std::path::Path, base: &Config) -> Result<Report> {
    run_scenario(&Scenario::load(path)?, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    const T2: &str = r#"{
        "name": "t2",
        "algebras": [{"name": "T2", "ambient": [2], "generators": [
            {"name": "E11", "matrix": [[1, 0], [0, 0]]},
            {"name": "E22", "matrix": [[0, 0], [0, 1]]},
            {"name": "E12", "matrix": [[0, 1], [0, 0]]}]}],
        "covers": [
            {"name": "id", "algebra": "T2", "identity": true},
            {"name": "diag", "algebra": "T2", "ambient": [2, 1, 1], "images": [
                [[1,0,0,0],[0,0,0,0],[0,0,1,0],[0,0,0,0]],
                [[0,0,0,0],[0,1,0,0],[0,0,0,0],[0,0,0,1]],
                [[0,1,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]]},
            {"name": "bad", "algebra": "T2", "ambient": [1], "images": [[[1]], [[0]], [[0]]]}
        ],
        "groups": [{"name": "Z2", "cyclic": 2}],
        "systems": [{"name": "sign", "algebra": "T2", "group": "Z2",
                     "conjugation": [[[1, 0], [0, 1]], [[1, 0], [0, -1]]]}],
        "checks": []
    }"#;

    fn with_checks(checks: &str) -> Scenario {
        let mut v: Value = serde_json::from_str(T2).unwrap();
        v["checks"] = serde_json::from_str(checks).unwrap();
        serde_json::from_value(v).unwrap()
    }

    #[test]
    fn empty_checks_pass() {
        let rep = run_scenario(&with_checks("[]"), &Config::default()).unwrap();
        assert!(rep.checks.is_empty());
        assert_eq!(rep.exit_code(), 0);
    }

    #[test]
    fn unresolved_names_are_input_errors() {
        let sc = with_checks(r#"[{"op": "structure", "cover": "nope"}]"#);
        assert!(matches!(run_scenario(&sc, &Config::default()), Err(Error::Input(_))));
        assert!(Scenario::from_json(r#"{"name": "x", "bogus": 1}"#).is_err());
    }

    #[test]
    fn non_isometric_cover_fails_check() {
        let sc = with_checks(r#"[{"op": "check-cover", "cover": "bad"}, {"op": "structure", "cover": "bad"}]"#);
        let rep = run_scenario(&sc, &Config::default()).unwrap();
        assert_eq!(rep.checks[0].verdict, "NotCI");
        assert_eq!(rep.checks[1].verdict, "InvalidCover");
        assert_eq!(rep.exit_code(), 1);
    }

    #[test]
    fn expectations_and_registration() {
        let sc = with_checks(
            r#"[
            {"id": "ess", "op": "essential", "cover": "diag",
             "expect": {"verdict": "NotEssential", "shilov": [1, 2], "annihilator_type": "M2"}},
            {"op": "envelope", "cover": "diag", "as": "env"},
            {"op": "equivalent", "covers": ["env", "id"]},
            {"op": "order", "lower": "diag", "upper": "id", "expect": "NotBelow"},
            {"op": "admissible", "system": "sign", "cover": "diag"}
        ]"#,
        );
        let rep = run_scenario(&sc, &Config::default()).unwrap();
        for c in &rep.checks {
            assert_eq!(c.status, Status::Pass, "{} {}", c.id, c.details);
        }
        assert!(rep.checks[3].hash.is_some());
    }
}
