//! Reductions between regret and approachability instances.

mod classical;
mod orthant;
mod tight;
mod weighted;

pub use classical::{classical_reduce, halfspace_action, ClassicalReduction};
pub use orthant::orthant_reduce;
pub use tight::{tight_improper_reduce, TightImproperReduction};
pub use weighted::{weighted_to_improper, weighted_to_proper};

use crate::instances::BilinearGen;
use crate::linalg::{Matrix, Vector};
use crate::polytope::Polytope;
use crate::rational::Rational;

/// `[[M, l_offset], [p_offset^T, c]]`, so that
/// `u(p, l) = (p, 1)^T hat(u) (l, 1)`.
pub(crate) fn lifted_matrix(u: &BilinearGen) -> Matrix {
    let (dp, dl) = (u.dim_p(), u.dim_l());
    let mut m = Matrix::zeros(dp + 1, dl + 1);
    for i in 0..dp {
        for j in 0..dl {
            m[(i, j)] = u.m[(i, j)].clone();
        }
        m[(i, dl)] = u.l_offset[i].clone();
    }
    for j in 0..dl {
        m[(dp, j)] = u.p_offset[j].clone();
    }
    m[(dp, dl)] = u.c.clone();
    m
}

pub(crate) fn lift(v: &Vector) -> Vector {
    v.extended(Rational::one())
}

/// Vertex list with repeats removed, first occurrences kept in order.
pub(crate) fn dedup_polytope(vs: Vec<Vector>) -> crate::error::Result<Polytope> {
    let mut seen = std::collections::HashSet::new();
    let kept = vs.into_iter().filter(|v| seen.insert(v.clone())).collect();
    Polytope::new(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifted_matrix_reproduces_eval() {
        let u = BilinearGen::new(
            "u",
            Matrix::from_ints(&[&[1, 2], &[3, 4], &[5, 6]]),
            Vector::from_ints(&[7, 8]),
            Vector::from_ints(&[9, 10, 11]),
            Rational::integer(12),
        )
        .unwrap();
        let p = Vector::from_ints(&[1, -2, 3]);
        let l = Vector::from_ints(&[-1, 4]);
        let hat = lifted_matrix(&u);
        let direct = lift(&p).dot(&hat.mul_vec(&lift(&l)).unwrap()).unwrap();
        assert_eq!(direct, u.eval(&p, &l).unwrap());
    }
}
