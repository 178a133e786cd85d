//! V-representation polytopes.
//!
//! Vertex lists may contain redundant points (repeated or non-extreme); every
//! query is correct for such lists. Simplices and axis-aligned boxes are
//! recognized at construction time so that containment tests on them skip the
//! LP.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::lp::{lp_feasible_point, LinearProgram};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Shape {
    /// Vertex set is exactly the standard basis.
    Simplex,
    /// Vertex set is exactly the corners of `[lo, hi]`.
    Box {
        lo: Vector,
        hi: Vector,
    },
    General,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawPolytope", into = "RawPolytope")]
pub struct Polytope {
    ambient_dim: usize,
    vertices: Vec<Vector>,
    shape: Shape,
}

#[derive(Serialize, Deserialize)]
struct RawPolytope {
    vertices: Vec<Vector>,
}

impl TryFrom<RawPolytope> for Polytope {
    type Error = Error;
    fn try_from(raw: RawPolytope) -> Result<Self> {
        Polytope::new(raw.vertices)
    }
}

impl From<Polytope> for RawPolytope {
    fn from(p: Polytope) -> Self {
        RawPolytope {
            vertices: p.vertices,
        }
    }
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }
}

impl Eq for Polytope {}

impl Polytope {
    pub fn new(vertices: Vec<Vector>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::Malformed(
                "polytope needs at least one vertex".into(),
            ));
        };
        let ambient_dim = first.len();
        if ambient_dim == 0 {
            return Err(Error::Malformed(
                "polytope ambient dimension must be positive".into(),
            ));
        }
        for v in &vertices {
            ensure_dim("polytope vertex", ambient_dim, v.len())?;
        }
        let shape = detect_shape(ambient_dim, &vertices);
        Ok(Polytope {
            ambient_dim,
            vertices,
            shape,
        })
    }

    /// The probability simplex in `R^n`, vertices `e_1, ..., e_n`.
    pub fn simplex(n: usize) -> Self {
        Self::new((0..n).map(|i| Vector::unit(n, i)).collect()).expect("n >= 1")
    }

    /// `[lo, hi]^n` with corners listed in binary counting order (first
    /// coordinate most significant).
    pub fn cube(n: usize, lo: Rational, hi: Rational) -> Self {
        Self::boxed(&Vector::filled(n, lo), &Vector::filled(n, hi)).expect("consistent bounds")
    }

    pub fn boxed(lo: &Vector, hi: &Vector) -> Result<Self> {
        ensure_dim("box bounds", lo.len(), hi.len())?;
        let n = lo.len();
        let free: Vec<usize> = (0..n).filter(|&i| lo[i] != hi[i]).collect();
        let mut vertices = Vec::with_capacity(1 << free.len());
        for mask in 0..(1usize << free.len()) {
            let mut v = lo.clone();
            for (k, &i) in free.iter().enumerate() {
                if mask & (1 << (free.len() - 1 - k)) != 0 {
                    v[i] = hi[i].clone();
                }
            }
            vertices.push(v);
        }
        Self::new(vertices)
    }

    pub fn point(p: Vector) -> Result<Self> {
        Self::new(vec![p])
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_standard_simplex(&self) -> bool {
        self.shape == Shape::Simplex
    }

    /// Convex coefficients `lambda` over the vertex list with
    /// `sum lambda_k v_k = q`, or `None` if `q` is outside.
    pub fn membership(&self, q: &Vector) -> Result<Option<Vector>> {
        ensure_dim("membership query", self.ambient_dim, q.len())?;
        if self.shape == Shape::Simplex {
            if !simplex_contains(q) {
                return Ok(None);
            }
            let mut lambda = Vector::zeros(self.vertices.len());
            let mut seen = vec![false; self.ambient_dim];
            for (k, v) in self.vertices.iter().enumerate() {
                let i = v.iter().position(Rational::is_one).expect("simplex vertex");
                if !seen[i] {
                    seen[i] = true;
                    lambda[k] = q[i].clone();
                }
            }
            return Ok(Some(lambda));
        }
        let n = self.vertices.len();
        let mut lp = LinearProgram::new(n);
        for i in 0..self.ambient_dim {
            let row: Vector = self.vertices.iter().map(|v| v[i].clone()).collect();
            lp.add_eq(row, q[i].clone());
        }
        lp.add_eq(Vector::filled(n, Rational::one()), Rational::one());
        for k in 0..n {
            lp.add_nonneg(k);
        }
        lp_feasible_point(&lp)
    }

    pub fn contains(&self, q: &Vector) -> Result<bool> {
        ensure_dim("membership query", self.ambient_dim, q.len())?;
        match &self.shape {
            Shape::Simplex => Ok(simplex_contains(q)),
            Shape::Box { lo, hi } => Ok((0..q.len()).all(|i| lo[i] <= q[i] && q[i] <= hi[i])),
            Shape::General => Ok(self.membership(q)?.is_some()),
        }
    }

    /// Base point `v_0` and a basis of `span{v_i - v_0}`.
    pub fn affine_span(&self) -> (Vector, Vec<Vector>) {
        let base = self.vertices[0].clone();
        let mut directions: Vec<Vector> = Vec::new();
        for v in &self.vertices[1..] {
            let diff = v.sub(&base).expect("shared dimension");
            if diff.is_zero() {
                continue;
            }
            let mut trial = directions.clone();
            trial.push(diff.clone());
            let m = Matrix::from_row_vectors(&trial, self.ambient_dim).expect("shared dimension");
            if m.rank() == trial.len() {
                directions.push(diff);
                if directions.len() == self.ambient_dim {
                    break;
                }
            }
        }
        (base, directions)
    }

    pub fn affine_dim(&self) -> usize {
        self.affine_span().1.len()
    }

    /// `max_{v in P} <dir, v>`.
    pub fn support(&self, dir: &Vector) -> Result<Rational> {
        ensure_dim("support direction", self.ambient_dim, dir.len())?;
        let mut best: Option<Rational> = None;
        for v in &self.vertices {
            let x = dir.dot(v)?;
            if best.as_ref().is_none_or(|b| x > *b) {
                best = Some(x);
            }
        }
        Ok(best.expect("non-empty vertex list"))
    }

    /// Index of a vertex maximizing `<dir, v>`, lowest index on ties.
    pub fn argmax(&self, dir: &Vector) -> Result<usize> {
        ensure_dim("support direction", self.ambient_dim, dir.len())?;
        let mut best: Option<(usize, Rational)> = None;
        for (k, v) in self.vertices.iter().enumerate() {
            let x = dir.dot(v)?;
            if best.as_ref().is_none_or(|(_, b)| x > *b) {
                best = Some((k, x));
            }
        }
        Ok(best.expect("non-empty vertex list").0)
    }

    pub fn scale(&self, k: &Rational) -> Polytope {
        Polytope::new(self.vertices.iter().map(|v| v.scale(k)).collect()).expect("same shape")
    }

    /// Image under `x -> m x`.
    pub fn linear_image(&self, m: &Matrix) -> Result<Polytope> {
        let vs = self
            .vertices
            .iter()
            .map(|v| m.mul_vec(v))
            .collect::<Result<Vec<_>>>()?;
        Polytope::new(vs)
    }

    /// Minkowski sum, vertices `a_i + b_j` in row-major order.
    pub fn minkowski_sum(&self, other: &Polytope) -> Result<Polytope> {
        ensure_dim("Minkowski sum", self.ambient_dim, other.ambient_dim)?;
        let mut vs = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for a in &self.vertices {
            for b in &other.vertices {
                vs.push(a.add(b)?);
            }
        }
        Polytope::new(vs)
    }

    /// Whether vertex `idx` lies outside the hull of the listed vertices that
    /// differ from it.
    pub fn is_extreme_vertex(&self, idx: usize) -> Result<bool> {
        let x = &self.vertices[idx];
        let others: Vec<Vector> = self.vertices.iter().filter(|v| *v != x).cloned().collect();
        if others.is_empty() {
            return Ok(true);
        }
        Ok(Polytope::new(others)?.membership(x)?.is_none())
    }
}

/// Vertices are the flattened outer products `c1 c2^T`, outer loop over
/// `c1`'s vertices.
pub fn tensor_product(c1: &Polytope, c2: &Polytope) -> Polytope {
    let mut vs = Vec::with_capacity(c1.vertices.len() * c2.vertices.len());
    for a in &c1.vertices {
        for b in &c2.vertices {
            vs.push(a.outer(b));
        }
    }
    Polytope::new(vs).expect("positive dimensions")
}

pub fn polytope_membership(q: &Vector, p: &Polytope) -> Result<Option<Vector>> {
    p.membership(q)
}

pub fn affine_span(p: &Polytope) -> (Vector, Vec<Vector>) {
    p.affine_span()
}

fn simplex_contains(q: &Vector) -> bool {
    q.iter().all(|x| !x.is_negative()) && q.sum().is_one()
}

fn detect_shape(d: usize, vertices: &[Vector]) -> Shape {
    let is_unit = |v: &Vector| {
        let mut ones = 0;
        for x in v.iter() {
            if x.is_one() {
                ones += 1;
            } else if !x.is_zero() {
                return false;
            }
        }
        ones == 1
    };
    if vertices.iter().all(is_unit) {
        let mut seen = vec![false; d];
        for v in vertices {
            seen[v.iter().position(Rational::is_one).expect("unit vector")] = true;
        }
        if seen.iter().all(|&s| s) {
            return Shape::Simplex;
        }
    }

    let mut lo = vertices[0].clone();
    let mut hi = vertices[0].clone();
    for v in vertices {
        for i in 0..d {
            if v[i] < lo[i] {
                lo[i] = v[i].clone();
            }
            if v[i] > hi[i] {
                hi[i] = v[i].clone();
            }
        }
    }
    let free: Vec<usize> = (0..d).filter(|&i| lo[i] != hi[i]).collect();
    if free.len() >= usize::BITS as usize - 1 {
        return Shape::General;
    }
    let mut corners = std::collections::BTreeSet::new();
    for v in vertices {
        let mut mask = 0usize;
        for (k, &i) in free.iter().enumerate() {
            if v[i] == hi[i] {
                mask |= 1 << k;
            } else if v[i] != lo[i] {
                return Shape::General;
            }
        }
        corners.insert(mask);
    }
    if corners.len() == 1 << free.len() {
        Shape::Box { lo, hi }
    } else {
        Shape::General
    }
}
