use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AffineMapGen, RegretInstance};
use crate::error::{ensure_dim, Result};
use crate::linalg::Vector;
use crate::lp::{lp_feasible_point, lp_solve, LinearProgram, LpOutcome};
use crate::polytope::Polytope;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassKind {
    External,
    Proper,
    ImproperValid,
    Invalid,
}

impl ClassKind {
    /// External instances are proper too.
    pub fn is_proper(self) -> bool {
        matches!(self, ClassKind::External | ClassKind::Proper)
    }

    pub fn is_valid(self) -> bool {
        self != ClassKind::Invalid
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    /// `<p - phi(p), direction> > 0` for every vertex `p`.
    pub direction: Vector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: ClassKind,
    pub fixed_points: BTreeMap<String, Vector>,
    pub witness: Option<Witness>,
}

/// A point `p` of `P` with `phi(p) = p`, found as convex coefficients over the
/// vertex list.
pub fn find_fixed_point(phi: &AffineMapGen, p: &Polytope) -> Result<Option<Vector>> {
    ensure_dim("fixed point search", p.ambient_dim(), phi.dim())?;
    let disp = displacements(phi, p)?;
    let n = disp.len();
    let mut lp = LinearProgram::new(n);
    for i in 0..phi.dim() {
        lp.add_eq(
            disp.iter().map(|w| w[i].clone()).collect(),
            Rational::zero(),
        );
    }
    lp.add_eq(Vector::filled(n, Rational::one()), Rational::one());
    for k in 0..n {
        lp.add_nonneg(k);
    }
    let Some(lambda) = lp_feasible_point(&lp)? else {
        return Ok(None);
    };
    let mut x = Vector::zeros(p.ambient_dim());
    for (l, v) in lambda.iter().zip(p.vertices()) {
        if !l.is_zero() {
            x = x.axpy(l, v)?;
        }
    }
    debug_assert_eq!(phi.apply(&x)?, x);
    Ok(Some(x))
}

/// A direction `w` with `||w||_inf <= 1` and `<p - phi(p), w> > 0` on every
/// vertex of `P`, or `None` when `phi` has a fixed point in `P`.
pub fn separating_direction(phi: &AffineMapGen, p: &Polytope) -> Result<Option<Vector>> {
    ensure_dim("separating direction", p.ambient_dim(), phi.dim())?;
    let d = phi.dim();
    let disp = displacements(phi, p)?;
    // Variables (w_1..w_d, t); maximize t subject to <v - phi(v), w> >= t.
    let mut lp = LinearProgram::new(d + 1);
    let mut obj = Vector::zeros(d + 1);
    obj[d] = Rational::one();
    lp.objective = obj;
    for w in &disp {
        // -(v - phi(v)) = phi(v) - v = w
        lp.add_le(w.extended(Rational::one()), Rational::zero());
    }
    for i in 0..=d {
        lp.add_le(Vector::unit(d + 1, i), Rational::one());
        if i < d {
            lp.add_ge(Vector::unit(d + 1, i), -Rational::one());
        }
    }
    match lp_solve(&lp)? {
        LpOutcome::Optimal { x, value } if value.is_positive() => {
            Ok(Some(Vector::new(x.as_slice()[..d].to_vec())))
        }
        _ => Ok(None),
    }
}

fn displacements(phi: &AffineMapGen, p: &Polytope) -> Result<Vec<Vector>> {
    p.vertices().iter().map(|v| phi.displacement(v)).collect()
}

/// Decided on generators and vertices only.
pub fn classify(inst: &RegretInstance) -> Result<Classification> {
    inst.validate()?;
    let mut fixed_points = BTreeMap::new();
    let mut witness = None;
    for g in &inst.phi {
        match find_fixed_point(g, &inst.p)? {
            Some(x) => {
                fixed_points.insert(g.label.clone(), x);
            }
            None if witness.is_none() => {
                let direction = separating_direction(g, &inst.p)?
                    .expect("a fixed-point-free map has a separating direction");
                witness = Some(Witness {
                    label: g.label.clone(),
                    direction,
                });
            }
            None => {}
        }
    }
    if witness.is_some() {
        return Ok(Classification {
            kind: ClassKind::Invalid,
            fixed_points,
            witness,
        });
    }

    let (_, dirs) = inst.p.affine_span();
    let mut external = true;
    'gens: for g in &inst.phi {
        for dvec in &dirs {
            if !g.linear.mul_vec(dvec)?.is_zero() {
                external = false;
                break 'gens;
            }
        }
    }
    let kind = if external {
        ClassKind::External
    } else if is_proper(inst)? {
        ClassKind::Proper
    } else {
        ClassKind::ImproperValid
    };
    Ok(Classification {
        kind,
        fixed_points,
        witness: None,
    })
}

fn is_proper(inst: &RegretInstance) -> Result<bool> {
    for g in &inst.phi {
        for v in inst.p.vertices() {
            if !inst.p.contains(&g.apply(v)?)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn v(xs: &[i64]) -> Vector {
        Vector::from_ints(xs)
    }

    fn translation(offset: &[i64]) -> AffineMapGen {
        AffineMapGen::new("shift", Matrix::identity(offset.len()), v(offset)).unwrap()
    }

    #[test]
    fn fixed_point_examples() {
        let d3 = Polytope::simplex(3);
        let phi1 = AffineMapGen::new(
            "phi1",
            Matrix::from_ints(&[&[0, 0, 0], &[0, -1, 0], &[0, 0, -2]]),
            v(&[1, 0, 0]),
        )
        .unwrap();
        assert_eq!(find_fixed_point(&phi1, &d3).unwrap(), Some(v(&[1, 0, 0])));
        let id = AffineMapGen::identity("id", 3);
        let x = find_fixed_point(&id, &d3).unwrap().unwrap();
        assert!(d3.contains(&x).unwrap());
        assert_eq!(
            find_fixed_point(&translation(&[1, 0, 0]), &d3).unwrap(),
            None
        );
        assert!(separating_direction(&phi1, &d3).unwrap().is_none());
    }

    #[test]
    fn separating_direction_examples() {
        let d3 = Polytope::simplex(3);
        let t = translation(&[0, 0, -1]);
        let w = separating_direction(&t, &d3).unwrap().unwrap();
        assert!(w[2].is_positive());
        let double =
            AffineMapGen::linear_map("double", Matrix::identity(3).scale(&2.into())).unwrap();
        let w = separating_direction(&double, &d3).unwrap().unwrap();
        for vert in d3.vertices() {
            let margin = vert
                .sub(&double.apply(vert).unwrap())
                .unwrap()
                .dot(&w)
                .unwrap();
            assert!(margin.is_positive());
        }
    }

    #[test]
    fn translation_instance_is_invalid() {
        let inst = RegretInstance::new(
            "t",
            Polytope::simplex(3),
            Polytope::cube(3, (-1).into(), 1.into()),
            vec![translation(&[0, 0, -1])],
        )
        .unwrap();
        let c = classify(&inst).unwrap();
        assert_eq!(c.kind, ClassKind::Invalid);
        assert_eq!(c.witness.unwrap().label, "shift");
    }
}
