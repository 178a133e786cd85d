use super::{dedup_polytope, lift, lifted_matrix};
use crate::error::{ensure_dim, Result};
use crate::instances::{AffineMapGen, ApproachabilityInstance, RegretInstance};
use crate::linalg::{Matrix, Vector};
use crate::polytope::{tensor_product, Polytope};
use crate::rational::Rational;

/// Approachability as improper phi-regret with matching value.
///
/// Actions are `x = q (x) p_hat` with `q in Delta_K`, losses are
/// `M_B l_hat` where block `k` of `M_B` is `-hat(u_k)`, and each
/// `phi_k(x) = x + e_k (x) (sum_j x_j)` shifts mass onto block `k`.
/// For any play, the target regret against `phi_k` equals the source
/// cumulative value of `u_k`. Hats denote the `(., 1)` lift, applied only
/// when some constraint has affine terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TightImproperReduction {
    pub source: ApproachabilityInstance,
    pub target: RegretInstance,
    pub augmented: bool,
    /// `(source label, target label)` pairs.
    pub bijection: Vec<(String, String)>,
    pub m_b: Matrix,
}

impl TightImproperReduction {
    fn block(&self) -> usize {
        self.source.dim_p() + usize::from(self.augmented)
    }

    fn hat(&self, v: &Vector) -> Vector {
        if self.augmented {
            lift(v)
        } else {
            v.clone()
        }
    }

    /// `q (x) p_hat`.
    pub fn map_play(&self, q: &Vector, p: &Vector) -> Result<Vector> {
        ensure_dim("constraint weights", self.source.u.len(), q.len())?;
        ensure_dim("source play", self.source.dim_p(), p.len())?;
        Ok(q.outer(&self.hat(p)))
    }

    pub fn map_loss(&self, l: &Vector) -> Result<Vector> {
        ensure_dim("source loss", self.source.dim_l(), l.len())?;
        self.m_b.mul_vec(&self.hat(l))
    }

    /// Sums the blocks of `x` and drops the lift coordinate.
    pub fn recover_play(&self, x: &Vector) -> Result<Vector> {
        let b = self.block();
        ensure_dim("target play", self.target.dim(), x.len())?;
        let mut p = Vector::zeros(b);
        for (i, xi) in x.iter().enumerate() {
            p[i % b] += xi;
        }
        Ok(if self.augmented { p.truncated() } else { p })
    }
}

pub fn tight_improper_reduce(inst: &ApproachabilityInstance) -> Result<TightImproperReduction> {
    inst.validate()?;
    let k = inst.u.len();
    let augmented = inst.u.iter().any(|u| !u.is_bilinear());
    let blocks: Vec<Matrix> = if augmented {
        inst.u.iter().map(lifted_matrix).collect()
    } else {
        inst.u.iter().map(|u| u.m.clone()).collect()
    };
    let (bp, bl) = (blocks[0].rows(), blocks[0].cols());
    let d = k * bp;

    let mut m_b = Matrix::zeros(d, bl);
    for (kk, blk) in blocks.iter().enumerate() {
        for i in 0..bp {
            for j in 0..bl {
                m_b[(kk * bp + i, j)] = -blk[(i, j)].clone();
            }
        }
    }

    let hat = |v: &Vector| if augmented { lift(v) } else { v.clone() };
    let p_hat = Polytope::new(inst.p.vertices().iter().map(hat).collect())?;
    let p_target = tensor_product(&Polytope::simplex(k), &p_hat);
    let l_target = dedup_polytope(
        inst.l
            .vertices()
            .iter()
            .map(|w| m_b.mul_vec(&hat(w)))
            .collect::<Result<Vec<_>>>()?,
    )?;

    let mut phi = Vec::with_capacity(k);
    let mut bijection = Vec::with_capacity(k);
    for (kk, u) in inst.u.iter().enumerate() {
        let mut lin = Matrix::identity(d);
        for j in 0..k {
            for i in 0..bp {
                lin[(kk * bp + i, j * bp + i)] += Rational::one();
            }
        }
        let label = format!("shift:{}", u.label);
        bijection.push((u.label.clone(), label.clone()));
        phi.push(AffineMapGen::linear_map(label, lin)?);
    }
    let target = RegretInstance::new(format!("{}/tight", inst.name), p_target, l_target, phi)?;
    Ok(TightImproperReduction {
        source: inst.clone(),
        target,
        augmented,
        bijection,
        m_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::gap_instance;
    use crate::instances::{apploss_of_play, regret_of_play, regret_per_generator, BilinearGen};
    use crate::rational::ratio;

    fn check_identity(inst: &ApproachabilityInstance, rounds: &[(Vector, Vector, Vector)]) {
        let red = tight_improper_reduce(inst).unwrap();
        let xs: Vec<Vector> = rounds
            .iter()
            .map(|(q, p, _)| red.map_play(q, p).unwrap())
            .collect();
        let ls: Vec<Vector> = rounds
            .iter()
            .map(|(_, _, l)| red.map_loss(l).unwrap())
            .collect();
        let ps: Vec<Vector> = rounds.iter().map(|(_, p, _)| p.clone()).collect();
        let src_l: Vec<Vector> = rounds.iter().map(|(_, _, l)| l.clone()).collect();
        for (x, (_, p, _)) in xs.iter().zip(rounds) {
            assert_eq!(&red.recover_play(x).unwrap(), p);
        }
        let per = regret_per_generator(&red.target, &xs, &ls).unwrap();
        for (u, r) in inst.u.iter().zip(&per) {
            let direct: Rational = ps
                .iter()
                .zip(&src_l)
                .map(|(p, l)| u.eval(p, l).unwrap())
                .sum();
            assert_eq!(&direct, r);
        }
        assert_eq!(
            regret_of_play(&red.target, &xs, &ls).unwrap(),
            apploss_of_play(inst, &ps, &src_l).unwrap()
        );
    }

    #[test]
    fn gap_instance_identity() {
        let inst = gap_instance(2).unwrap();
        let red = tight_improper_reduce(&inst).unwrap();
        assert!(!red.augmented);
        assert_eq!(red.target.dim(), 6);
        assert_eq!(red.bijection[0], ("u1".to_string(), "shift:u1".to_string()));
        let q = Vector::new(vec![ratio(1, 3), ratio(2, 3)]);
        check_identity(
            &inst,
            &[
                (
                    q.clone(),
                    Vector::new(vec![ratio(1, 2), ratio(1, 2), 0.into()]),
                    Vector::from_ints(&[1, 0, 1]),
                ),
                (
                    Vector::from_ints(&[1, 0]),
                    Vector::from_ints(&[0, 0, 1]),
                    Vector::from_ints(&[0, 1, 1]),
                ),
                (
                    q,
                    Vector::from_ints(&[1, 0, 0]),
                    Vector::from_ints(&[0, 1, 0]),
                ),
            ],
        );
    }

    #[test]
    fn affine_constraints_are_lifted() {
        let inst = ApproachabilityInstance::new(
            "affine",
            Polytope::simplex(2),
            Polytope::cube(2, 0.into(), 1.into()),
            vec![
                BilinearGen::new(
                    "a",
                    Matrix::from_ints(&[&[1, -1], &[0, 2]]),
                    Vector::from_ints(&[1, 0]),
                    Vector::from_ints(&[0, -1]),
                    ratio(-1, 2),
                )
                .unwrap(),
                BilinearGen::bilinear("b", Matrix::from_ints(&[&[0, 1], &[-1, 0]])),
            ],
        )
        .unwrap();
        let red = tight_improper_reduce(&inst).unwrap();
        assert!(red.augmented);
        assert_eq!(red.target.dim(), 6);
        check_identity(
            &inst,
            &[
                (
                    Vector::from_ints(&[0, 1]),
                    Vector::from_ints(&[1, 0]),
                    Vector::from_ints(&[1, 1]),
                ),
                (
                    Vector::new(vec![ratio(1, 5), ratio(4, 5)]),
                    Vector::new(vec![ratio(1, 3), ratio(2, 3)]),
                    Vector::from_ints(&[0, 1]),
                ),
            ],
        );
    }

    #[test]
    fn zero_constraint_gives_zero_regret() {
        let inst = ApproachabilityInstance::new(
            "zero",
            Polytope::simplex(2),
            Polytope::cube(2, 0.into(), 1.into()),
            vec![BilinearGen::zero("z", 2, 2)],
        )
        .unwrap();
        let red = tight_improper_reduce(&inst).unwrap();
        let x = red
            .map_play(&Vector::from_ints(&[1]), &Vector::from_ints(&[0, 1]))
            .unwrap();
        let l = red.map_loss(&Vector::from_ints(&[1, 1])).unwrap();
        assert!(l.is_zero());
        assert!(regret_of_play(&red.target, &[x], &[l]).unwrap().is_zero());
    }
}
