//! Graph closures: the algebra generated by pairs `(x_g, y_g)` inside
//! `X ⊕ Y`, tracked by words in the generator symbols.
//!
//! When no pair `(0, y)` with `y ≠ 0` is generated, the closure is the graph
//! of a homomorphism `x_g ↦ y_g` on the algebra generated by the `x_g`.

use std::fmt;

use serde::Serialize;

use crate::algebra::{orthonormal_span, AlgebraSpan, Ambient};
use crate::cb::LinearMap;
use crate::error::{Error, Result};
use crate::linalg::{frob, lstsq, normalize_direction, null_space, CVec, Mat, OrthoBasis, C64};
use crate::tol::MEMBER_TOL;

/// Product of generator symbols; `(g, true)` stands for `x_g*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Word(pub Vec<(usize, bool)>);

impl Word {
    pub fn eval(&self, gens: &[Mat], n: usize) -> Mat {
        let mut out = Mat::identity(n, n);
        for &(g, star) in &self.0 {
            if star {
                out *= gens[g].adjoint();
            } else {
                out *= &gens[g];
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.0
            .iter()
            .map(|&(g, s)| format!("{}{}", names.get(g).cloned().unwrap_or_else(|| format!("g{g}")), if s { "*" } else { "" }))
            .collect::<Vec<_>>()
            .join("·")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = vec![];
        write!(f, "{}", self.render(&names))
    }
}

/// Linear combination of words.
#[derive(Debug, Clone, Default)]
pub struct Polynomial(pub Vec<(C64, Word)>);

impl Polynomial {
    pub fn eval(&self, gens: &[Mat], n: usize) -> Mat {
        let mut out = Mat::zeros(n, n);
        for (c, w) in &self.0 {
            out += w.eval(gens, n) * *c;
        }
        out
    }
}

/// A relation that vanishes on the `x` side and equals `y` on the `y` side.
#[derive(Debug, Clone)]
pub struct Witness {
    pub y: Mat,
    pub poly: Polynomial,
}

impl Witness {
    /// Residuals `(‖P(x)‖, ‖P(y) - y‖)`.
    pub fn residuals(&self, xs: &[Mat], ys: &[Mat]) -> (f64, f64) {
        let nx = xs.first().map(|m| m.nrows()).unwrap_or(0);
        let ny = ys.first().map(|m| m.nrows()).unwrap_or(self.y.nrows());
        let px = self.poly.eval(xs, nx);
        let py = self.poly.eval(ys, ny);
        (frob(&px), frob(&(py - &self.y)))
    }
}

#[derive(Debug, Clone)]
pub struct GraphClosure {
    x_amb: Ambient,
    y_amb: Ambient,
    gens_x: Vec<Mat>,
    gens_y: Vec<Mat>,
    pub words: Vec<Word>,
    pub xs: Vec<Mat>,
    pub ys: Vec<Mat>,
    frame: OrthoBasis,
    pub evaluated: usize,
}

pub fn graph_closure(
    x_amb: &Ambient,
    y_amb: &Ambient,
    gens: &[(Mat, Mat)],
    self_adjoint: bool,
    unital: bool,
    max_words: usize,
) -> Result<GraphClosure> {
    for (x, y) in gens {
        x_amb.check(x)?;
        y_amb.check(y)?;
    }
    let (lx, ly) = (x_amb.vec_len(), y_amb.vec_len());
    let mut gc = GraphClosure {
        x_amb: x_amb.clone(),
        y_amb: y_amb.clone(),
        gens_x: gens.iter().map(|p| p.0.clone()).collect(),
        gens_y: gens.iter().map(|p| p.1.clone()).collect(),
        words: vec![],
        xs: vec![],
        ys: vec![],
        frame: OrthoBasis::new(lx + ly),
        evaluated: 0,
    };
    let mut symbols = Vec::new();
    for g in 0..gens.len() {
        symbols.push((g, false));
        if self_adjoint {
            symbols.push((g, true));
        }
    }
    if unital {
        gc.offer(Word(vec![]), x_amb.identity(), y_amb.identity());
    }
    for &s in &symbols {
        let (x, y) = gc.symbol(s);
        gc.offer(Word(vec![s]), x, y);
    }
    let mut next = 0;
    while next < gc.words.len() {
        for &s in &symbols {
            gc.evaluated += 1;
            if gc.evaluated > max_words {
                return Err(Error::WordBudget);
            }
            let (sx, sy) = gc.symbol(s);
            let x = &gc.xs[next] * sx;
            let y = &gc.ys[next] * sy;
            let mut w = gc.words[next].clone();
            w.0.push(s);
            gc.offer(w, x, y);
        }
        next += 1;
    }
    Ok(gc)
}

impl GraphClosure {
    fn symbol(&self, (g, star): (usize, bool)) -> (Mat, Mat) {
        if star {
            (self.gens_x[g].adjoint(), self.gens_y[g].adjoint())
        } else {
            (self.gens_x[g].clone(), self.gens_y[g].clone())
        }
    }

    fn pair_vec(&self, x: &Mat, y: &Mat) -> CVec {
        let vx = self.x_amb.vectorize(x);
        let vy = self.y_amb.vectorize(y);
        CVec::from_iterator(vx.len() + vy.len(), vx.iter().chain(vy.iter()).cloned())
    }

    fn offer(&mut self, w: Word, x: Mat, y: Mat) {
        let v = self.pair_vec(&x, &y);
        if self.frame.push(&v, MEMBER_TOL) {
            self.words.push(w);
            self.xs.push(x);
            self.ys.push(y);
        }
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    fn split_frame(&self) -> (Mat, Mat) {
        let q = self.frame.to_matrix();
        let lx = self.x_amb.vec_len();
        let ly = self.y_amb.vec_len();
        (q.rows(0, lx).into_owned(), q.rows(lx, ly).into_owned())
    }

    fn side_space(&self, zero_x: bool) -> AlgebraSpan {
        let (qx, qy) = self.split_frame();
        let (zero, other, amb) = if zero_x { (&qx, &qy, &self.y_amb) } else { (&qy, &qx, &self.x_amb) };
        let ns = null_space(zero, 1e-7);
        let elems: Vec<Mat> = (0..ns.ncols()).map(|j| amb.devectorize(&(other * ns.column(j)))).collect();
        let span = orthonormal_span(amb, &elems).expect("devectorized elements");
        let keep: Vec<Mat> = span.basis().iter().filter(|m| frob(m) > 1e-6).cloned().collect();
        orthonormal_span(amb, &keep).expect("devectorized elements")
    }

    /// `{y : (0, y) ∈ closure}`.
    pub fn conflict_space(&self) -> AlgebraSpan {
        self.side_space(true)
    }

    /// `{x : (x, 0) ∈ closure}`.
    pub fn kernel_space(&self) -> AlgebraSpan {
        self.side_space(false)
    }

    pub fn is_graph(&self) -> bool {
        self.conflict_space().dim() == 0
    }

    /// Span of the first coordinates.
    pub fn x_span(&self) -> AlgebraSpan {
        orthonormal_span(&self.x_amb, &self.xs).expect("closure elements")
    }

    pub fn y_span(&self) -> AlgebraSpan {
        orthonormal_span(&self.y_amb, &self.ys).expect("closure elements")
    }

    /// The map `x ↦ y` whose graph is the closure.
    pub fn graph_map(&self) -> Result<LinearMap> {
        if !self.is_graph() {
            return Err(Error::NoMorphism("closure is not a graph".into()));
        }
        let dom = self.x_span();
        let mut xm = Mat::zeros(self.x_amb.vec_len(), self.dim());
        for (k, x) in self.xs.iter().enumerate() {
            xm.set_column(k, &self.x_amb.vectorize(x));
        }
        let n = self.y_amb.dim();
        let images = dom
            .basis()
            .iter()
            .map(|b| {
                let c = lstsq(&xm, &self.x_amb.vectorize(b));
                let mut y = Mat::zeros(n, n);
                for (k, yk) in self.ys.iter().enumerate() {
                    y += yk * c[k];
                }
                y
            })
            .collect();
        LinearMap::new(dom, &self.y_amb, images)
    }

    /// Chooses a witness `(0, y)`: the first probe with a nonzero component in
    /// the conflict space, else the first basis element of that space. The
    /// witness is normalized and comes with a word relation producing it.
    pub fn witness(&self, probes: &[Mat]) -> Option<Witness> {
        let conf = self.conflict_space();
        if conf.dim() == 0 {
            return None;
        }
        let raw = probes
            .iter()
            .map(|p| conf.project(p))
            .find(|p| frob(p) > 1e-6)
            .unwrap_or_else(|| conf.basis()[0].clone());
        let y = normalize_direction(&raw);
        let (lx, ly) = (self.x_amb.vec_len(), self.y_amb.vec_len());
        let mut pm = Mat::zeros(lx + ly, self.dim());
        for k in 0..self.dim() {
            pm.set_column(k, &self.pair_vec(&self.xs[k], &self.ys[k]));
        }
        let zero = Mat::zeros(self.x_amb.dim(), self.x_amb.dim());
        let c = lstsq(&pm, &self.pair_vec(&zero, &y));
        let poly = Polynomial(
            self.words
                .iter()
                .enumerate()
                .filter(|(k, _)| c[*k].norm() > 1e-12)
                .map(|(k, w)| (c[k], w.clone()))
                .collect(),
        );
        Some(Witness { y, poly })
    }

    pub fn gens_x(&self) -> &[Mat] {
        &self.gens_x
    }

    pub fn gens_y(&self) -> &[Mat] {
        &self.gens_y
    }
}
