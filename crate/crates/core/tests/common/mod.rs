//! Random rational data shared by the integration tests.

#![allow(dead_code)]

use approachlab::{AffineMapGen, Matrix, Polytope, Rational, RegretInstance, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform over `{lo, lo + 1/den, .., hi}`.
pub fn rat(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Rational {
    Rational::new(rng.gen_range(lo * den..=hi * den), den)
}

/// Random point of `Delta_n` with small denominators.
pub fn simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=4)).collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.iter().map(|&x| Rational::new(x, total)).collect();
        }
    }
}

/// Random convex combination of the vertices of `p`.
pub fn point_in(rng: &mut ChaCha8Rng, p: &Polytope) -> Vector {
    let lambda = simplex_point(rng, p.num_vertices());
    let mut x = Vector::zeros(p.ambient_dim());
    for (c, v) in lambda.iter().zip(p.vertices()) {
        x = x.axpy(c, v).unwrap();
    }
    x
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut [Vec<Rational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip().unwrap();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&row) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn random_proper(
    rng: &mut ChaCha8Rng,
    idx: usize,
) -> Result<RegretInstance, Box<dyn std::error::Error>> {
    let d = rng.gen_range(2..=4);
    let on_simplex = rng.gen_bool(0.6);
    let p = if on_simplex {
        Polytope::simplex(d)
    } else {
        Polytope::cube(d, Rational::zero(), Rational::one())
    };
    let l = Polytope::cube(d, Rational::integer(rng.gen_range(-1..=0)), Rational::one());
    let phi = (0..rng.gen_range(1..=4))
        .map(|k| {
            let label = format!("phi{k}");
            if on_simplex {
                if rng.gen_bool(0.3) {
                    return Ok(AffineMapGen::constant(label, simplex_point(rng, d)));
                }
                let cols: Vec<Vector> = (0..d).map(|_| simplex_point(rng, d)).collect();
                Ok(AffineMapGen::linear_map(
                    label,
                    Matrix::from_columns(&cols, d)?,
                )?)
            } else {
                let a: Vec<Rational> = (0..d).map(|_| rat(rng, 0, 1, 4)).collect();
                let c: Vec<Rational> = (0..d).map(|_| rat(rng, 0, 1, 3)).collect();
                let off: Vector = a
                    .iter()
                    .zip(&c)
                    .map(|(ai, ci)| (Rational::one() - ai) * ci)
                    .collect();
                Ok(AffineMapGen::new(label, Matrix::diag(&a), off)?)
            }
        })
        .collect::<Result<Vec<_>, Box<dyn std::error::Error>>>()?;
    Ok(RegretInstance::new(format!("proper-{idx}"), p, l, phi)?)
}
