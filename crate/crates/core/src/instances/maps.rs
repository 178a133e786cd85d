use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::rational::Rational;

/// Affine map `p -> linear * p + offset` on `R^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineMapGen {
    pub label: String,
    pub linear: Matrix,
    pub offset: Vector,
}

impl AffineMapGen {
    pub fn new(label: impl Into<String>, linear: Matrix, offset: Vector) -> Result<Self> {
        let g = AffineMapGen {
            label: label.into(),
            linear,
            offset,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn linear_map(label: impl Into<String>, linear: Matrix) -> Result<Self> {
        let d = linear.rows();
        Self::new(label, linear, Vector::zeros(d))
    }

    pub fn identity(label: impl Into<String>, d: usize) -> Self {
        Self::linear_map(label, Matrix::identity(d)).expect("square")
    }

    pub fn constant(label: impl Into<String>, value: Vector) -> Self {
        let d = value.len();
        Self::new(label, Matrix::zeros(d, d), value).expect("square")
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !self.linear.is_square() {
            return Err(Error::dim(
                "generator linear part must be square",
                self.linear.rows(),
                self.linear.cols(),
            ));
        }
        ensure_dim("generator offset", self.linear.rows(), self.offset.len())
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn is_linear(&self) -> bool {
        self.offset.is_zero()
    }

    pub fn apply(&self, p: &Vector) -> Result<Vector> {
        self.linear.mul_vec(p)?.add(&self.offset)
    }

    /// `phi(p) - p`.
    pub fn displacement(&self, p: &Vector) -> Result<Vector> {
        self.apply(p)?.sub(p)
    }

    /// `M_phi = Id - linear`, paired with the offset `-offset`, so that
    /// `p - phi(p) = M_phi p - offset`.
    pub fn m_phi(&self) -> (Matrix, Vector) {
        let m = Matrix::identity(self.dim())
            .sub(&self.linear)
            .expect("square");
        (m, self.offset.neg())
    }

    /// `<p - phi(p), l>`.
    pub fn regret_term(&self, p: &Vector, l: &Vector) -> Result<Rational> {
        p.sub(&self.apply(p)?)?.dot(l)
    }
}

/// Bi-affine constraint `u(p, l) = p^T M l + <p_offset, l> + <l_offset, p> + c`.
///
/// `p_offset` pairs with the loss and `l_offset` with the action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilinearGen {
    pub label: String,
    #[serde(rename = "M")]
    pub m: Matrix,
    pub p_offset: Vector,
    pub l_offset: Vector,
    pub c: Rational,
}

impl BilinearGen {
    pub fn new(
        label: impl Into<String>,
        m: Matrix,
        p_offset: Vector,
        l_offset: Vector,
        c: Rational,
    ) -> Result<Self> {
        let g = BilinearGen {
            label: label.into(),
            m,
            p_offset,
            l_offset,
            c,
        };
        ensure_dim("constraint p_offset", g.m.cols(), g.p_offset.len())?;
        ensure_dim("constraint l_offset", g.m.rows(), g.l_offset.len())?;
        Ok(g)
    }

    pub fn bilinear(label: impl Into<String>, m: Matrix) -> Self {
        let (r, c) = (m.rows(), m.cols());
        Self::new(
            label,
            m,
            Vector::zeros(c),
            Vector::zeros(r),
            Rational::zero(),
        )
        .expect("shapes")
    }

    pub fn zero(label: impl Into<String>, dp: usize, dl: usize) -> Self {
        Self::bilinear(label, Matrix::zeros(dp, dl))
    }

    pub fn dim_p(&self) -> usize {
        self.m.rows()
    }

    pub fn dim_l(&self) -> usize {
        self.m.cols()
    }

    pub fn is_bilinear(&self) -> bool {
        self.p_offset.is_zero() && self.l_offset.is_zero() && self.c.is_zero()
    }

    pub fn eval(&self, p: &Vector, l: &Vector) -> Result<Rational> {
        ensure_dim("constraint action", self.dim_p(), p.len())?;
        ensure_dim("constraint loss", self.dim_l(), l.len())?;
        // Row sums against `l` first, so each `p_i` is multiplied once.
        let mut acc = self.c.clone() + self.p_offset.dot(l)?;
        for (i, pi) in p.iter().enumerate() {
            if pi.is_zero() {
                continue;
            }
            let mut s = self.l_offset[i].clone();
            for (a, lj) in self.m.row(i).iter().zip(l.iter()) {
                if !a.is_zero() && !lj.is_zero() {
                    s += a * lj;
                }
            }
            if !s.is_zero() {
                acc += pi * &s;
            }
        }
        Ok(acc)
    }

    /// For fixed `p`, `u(p, l) = <g, l> + k`; returns `(g, k)`.
    pub fn affine_in_loss(&self, p: &Vector) -> Result<(Vector, Rational)> {
        let g = self.m.vec_mul(p)?.add(&self.p_offset)?;
        let k = self.l_offset.dot(p)? + &self.c;
        Ok((g, k))
    }

    /// For fixed `l`, `u(p, l) = <h, p> + k`; returns `(h, k)`.
    pub fn affine_in_action(&self, l: &Vector) -> Result<(Vector, Rational)> {
        let h = self.m.mul_vec(l)?.add(&self.l_offset)?;
        let k = self.p_offset.dot(l)? + &self.c;
        Ok((h, k))
    }

    /// Pointwise `sum_k w_k u_k`, labelled `label`.
    pub fn combination(
        label: impl Into<String>,
        gens: &[BilinearGen],
        w: &[Rational],
    ) -> Result<Self> {
        ensure_dim("constraint combination", gens.len(), w.len())?;
        let first = gens
            .first()
            .ok_or_else(|| Error::Malformed("empty constraint combination".into()))?;
        let (dp, dl) = (first.dim_p(), first.dim_l());
        let mut m = Matrix::zeros(dp, dl);
        let mut po = Vector::zeros(dl);
        let mut lo = Vector::zeros(dp);
        let mut c = Rational::zero();
        for (g, wk) in gens.iter().zip(w) {
            if wk.is_zero() {
                continue;
            }
            m = m.add(&g.m.scale(wk))?;
            po = po.axpy(wk, &g.p_offset)?;
            lo = lo.axpy(wk, &g.l_offset)?;
            c += wk * &g.c;
        }
        Self::new(label, m, po, lo, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vector {
        Vector::from_ints(xs)
    }

    #[test]
    fn affine_apply_and_m_phi() {
        // p -> (1, -p2, -2 p3)
        let g = AffineMapGen::new(
            "phi1",
            Matrix::from_ints(&[&[0, 0, 0], &[0, -1, 0], &[0, 0, -2]]),
            v(&[1, 0, 0]),
        )
        .unwrap();
        assert_eq!(g.apply(&v(&[1, 0, 0])).unwrap(), v(&[1, 0, 0]));
        assert_eq!(g.apply(&v(&[0, 1, 0])).unwrap(), v(&[1, -1, 0]));
        let (m, o) = g.m_phi();
        let p = v(&[0, 0, 1]);
        let lhs = p.sub(&g.apply(&p).unwrap()).unwrap();
        assert_eq!(lhs, m.mul_vec(&p).unwrap().add(&o).unwrap());
    }

    #[test]
    fn shapes_are_checked() {
        assert!(AffineMapGen::new("x", Matrix::zeros(2, 3), v(&[0, 0])).is_err());
        assert!(AffineMapGen::new("x", Matrix::zeros(2, 2), v(&[0])).is_err());
        assert!(
            BilinearGen::new("u", Matrix::zeros(2, 3), v(&[0, 0]), v(&[0, 0]), 0.into()).is_err()
        );
    }

    #[test]
    fn bilinear_eval_matches_parts() {
        let u = BilinearGen::new(
            "u",
            Matrix::from_ints(&[&[1, 2], &[3, 4], &[5, 6]]),
            v(&[1, -1]),
            v(&[2, 0, 1]),
            (-3).into(),
        )
        .unwrap();
        let p = v(&[1, 0, 2]);
        let l = v(&[3, -1]);
        // p^T M l = (1*1 + 2*5, 1*2 + 2*6) . (3,-1) = (11,14).(3,-1) = 19
        let expected = Rational::integer(19 + 4 + 4 - 3);
        assert_eq!(u.eval(&p, &l).unwrap(), expected);
        let (h, k) = u.affine_in_action(&l).unwrap();
        assert_eq!(h.dot(&p).unwrap() + k, expected);
    }
}
