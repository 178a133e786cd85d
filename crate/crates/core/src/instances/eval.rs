use super::{ApproachabilityInstance, BilinearGen, RegretInstance};
use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::polytope::Polytope;
use crate::rational::Rational;

fn check_sequences(p: &Polytope, l: &Polytope, plays: &[Vector], losses: &[Vector]) -> Result<()> {
    ensure_dim("play and loss sequence lengths", plays.len(), losses.len())?;
    for (t, (pt, lt)) in plays.iter().zip(losses).enumerate() {
        if !p.contains(pt)? {
            return Err(Error::InvalidPlay {
                round: t + 1,
                what: "play",
            });
        }
        if !l.contains(lt)? {
            return Err(Error::InvalidPlay {
                round: t + 1,
                what: "loss",
            });
        }
    }
    Ok(())
}

/// Per-generator cumulative regret `sum_t <p_t - phi(p_t), l_t>`.
pub fn regret_per_generator(
    inst: &RegretInstance,
    plays: &[Vector],
    losses: &[Vector],
) -> Result<Vec<Rational>> {
    check_sequences(&inst.p, &inst.l, plays, losses)?;
    inst.phi
        .iter()
        .map(|g| {
            plays
                .iter()
                .zip(losses)
                .map(|(p, l)| g.regret_term(p, l))
                .sum::<Result<Rational>>()
        })
        .collect()
}

/// `max_phi sum_t <p_t - phi(p_t), l_t>`; zero for empty sequences.
pub fn regret_of_play(
    inst: &RegretInstance,
    plays: &[Vector],
    losses: &[Vector],
) -> Result<Rational> {
    if plays.is_empty() && losses.is_empty() {
        return Ok(Rational::zero());
    }
    let per = regret_per_generator(inst, plays, losses)?;
    Ok(per.into_iter().max().expect("non-empty generator list"))
}

/// `max_u sum_t u(p_t, l_t)`; zero for empty sequences.
pub fn apploss_of_play(
    inst: &ApproachabilityInstance,
    plays: &[Vector],
    losses: &[Vector],
) -> Result<Rational> {
    check_sequences(&inst.p, &inst.l, plays, losses)?;
    if plays.is_empty() {
        return Ok(Rational::zero());
    }
    let mut best: Option<Rational> = None;
    for u in &inst.u {
        let mut acc = Rational::zero();
        for (p, l) in plays.iter().zip(losses) {
            acc += u.eval(p, l)?;
        }
        if best.as_ref().is_none_or(|b| acc > *b) {
            best = Some(acc);
        }
    }
    Ok(best.expect("non-empty constraint list"))
}

/// `max_i w_i * sum_t <p_t - phi_i(p_t), l_t>` for a proper instance.
pub fn weighted_regret(
    inst: &RegretInstance,
    weights: &[Rational],
    plays: &[Vector],
    losses: &[Vector],
) -> Result<Rational> {
    check_weights(inst, weights)?;
    let kind = super::classify(inst)?.kind;
    if !kind.is_proper() {
        return Err(Error::NotProper(format!("{kind:?}")));
    }
    if plays.is_empty() && losses.is_empty() {
        return Ok(Rational::zero());
    }
    let per = regret_per_generator(inst, plays, losses)?;
    Ok(per
        .into_iter()
        .zip(weights)
        .map(|(r, w)| r * w)
        .max()
        .expect("non-empty generator list"))
}

pub(crate) fn check_weights(inst: &RegretInstance, weights: &[Rational]) -> Result<()> {
    ensure_dim("weight count", inst.phi.len(), weights.len())?;
    for (index, w) in weights.iter().enumerate() {
        if !w.is_positive() {
            return Err(Error::NonPositiveWeight {
                index,
                value: w.clone(),
            });
        }
    }
    Ok(())
}

/// `u_phi(p, l) = <p - phi(p), l> = p^T (Id - A)^T l - <b, l>` for
/// `phi(p) = A p + b`.
pub fn regret_as_approachability(inst: &RegretInstance) -> ApproachabilityInstance {
    let d = inst.dim();
    let u = inst
        .phi
        .iter()
        .map(|g| {
            let (m, off) = g.m_phi();
            BilinearGen::new(
                g.label.clone(),
                m.transpose(),
                off,
                Vector::zeros(d),
                Rational::zero(),
            )
            .expect("square generator")
        })
        .collect();
    ApproachabilityInstance {
        name: inst.name.clone(),
        p: inst.p.clone(),
        l: inst.l.clone(),
        u,
    }
}

/// Sufficient statistics of a play/loss sequence for evaluating every
/// bi-affine constraint: `sum_t p_t l_t^T`, `sum_t p_t`, `sum_t l_t`, `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PayoffAccumulator {
    outer: Matrix,
    sum_p: Vector,
    sum_l: Vector,
    rounds: usize,
}

impl PayoffAccumulator {
    pub fn new(dim_p: usize, dim_l: usize) -> Self {
        PayoffAccumulator {
            outer: Matrix::zeros(dim_p, dim_l),
            sum_p: Vector::zeros(dim_p),
            sum_l: Vector::zeros(dim_l),
            rounds: 0,
        }
    }

    pub fn push(&mut self, p: &Vector, l: &Vector) -> Result<()> {
        ensure_dim("accumulated play", self.sum_p.len(), p.len())?;
        ensure_dim("accumulated loss", self.sum_l.len(), l.len())?;
        for (i, pi) in p.iter().enumerate() {
            if pi.is_zero() {
                continue;
            }
            self.sum_p[i] += pi;
            for (j, lj) in l.iter().enumerate() {
                if !lj.is_zero() {
                    self.outer[(i, j)] += pi * lj;
                }
            }
        }
        for (j, lj) in l.iter().enumerate() {
            self.sum_l[j] += lj;
        }
        self.rounds += 1;
        Ok(())
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// `sum_t u(p_t, l_t)`.
    pub fn value(&self, u: &BilinearGen) -> Result<Rational> {
        ensure_dim("constraint action dimension", self.sum_p.len(), u.dim_p())?;
        ensure_dim("constraint loss dimension", self.sum_l.len(), u.dim_l())?;
        let mut acc = self.outer.frobenius(&u.m)?;
        acc += u.p_offset.dot(&self.sum_l)?;
        acc += u.l_offset.dot(&self.sum_p)?;
        if !u.c.is_zero() {
            acc += &u.c * Rational::from(self.rounds);
        }
        Ok(acc)
    }

    pub fn values(&self, us: &[BilinearGen]) -> Result<Vec<Rational>> {
        us.iter().map(|u| self.value(u)).collect()
    }

    /// Max over `us`, or zero before the first round.
    pub fn max_value(&self, us: &[BilinearGen]) -> Result<Rational> {
        if self.rounds == 0 {
            return Ok(Rational::zero());
        }
        Ok(self
            .values(us)?
            .into_iter()
            .max()
            .expect("non-empty constraint list"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::AffineMapGen;

    fn v(xs: &[i64]) -> Vector {
        Vector::from_ints(xs)
    }

    fn external(n: usize, lo: i64) -> RegretInstance {
        RegretInstance::new(
            "experts",
            Polytope::simplex(n),
            Polytope::cube(n, lo.into(), 1.into()),
            (0..n)
                .map(|i| AffineMapGen::constant(format!("e{}", i + 1), Vector::unit(n, i)))
                .collect(),
        )
        .unwrap()
    }

    /// phi_i(p) = w_i e_i - (w_i - 1) p, w = (1, 2, 3).
    fn weighted_experts() -> RegretInstance {
        let phi = (0..3)
            .map(|i| {
                let w = Rational::integer(i as i64 + 1);
                AffineMapGen::new(
                    format!("phi{}", i + 1),
                    Matrix::identity(3).scale(&(Rational::one() - &w)),
                    Vector::unit(3, i).scale(&w),
                )
                .unwrap()
            })
            .collect();
        RegretInstance::new(
            "b",
            Polytope::simplex(3),
            Polytope::cube(3, (-1).into(), 1.into()),
            phi,
        )
        .unwrap()
    }

    #[test]
    fn regret_examples() {
        let inst = external(3, -1);
        assert_eq!(
            regret_of_play(&inst, &[v(&[1, 0, 0])], &[v(&[0, 0, 0])]).unwrap(),
            Rational::zero()
        );
        assert_eq!(regret_of_play(&inst, &[], &[]).unwrap(), Rational::zero());

        let b = weighted_experts();
        assert_eq!(
            regret_of_play(&b, &[v(&[0, 0, 1])], &[v(&[0, 0, 1])]).unwrap(),
            Rational::integer(2)
        );

        let e2 = external(2, 0);
        let plays = vec![v(&[1, 0]), v(&[1, 0])];
        let losses = vec![v(&[1, 0]), v(&[1, 0])];
        assert_eq!(
            regret_of_play(&e2, &plays, &losses).unwrap(),
            Rational::integer(2)
        );
    }

    #[test]
    fn invalid_plays_are_reported_by_round() {
        let inst = external(2, 0);
        let err = regret_of_play(&inst, &[v(&[1, 0]), v(&[1, 1])], &[v(&[0, 0]), v(&[0, 0])])
            .unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidPlay {
                round: 2,
                what: "play"
            }
        ));
        let err = regret_of_play(&inst, &[v(&[1, 0])], &[v(&[2, 0])]).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidPlay {
                round: 1,
                what: "loss"
            }
        ));
        assert!(regret_of_play(&inst, &[v(&[1, 0])], &[]).is_err());
    }

    #[test]
    fn weighted_examples() {
        let inst = external(3, -1);
        let plays = vec![v(&[0, 0, 1])];
        let losses = vec![v(&[0, 0, 1])];
        let w = [1.into(), 2.into(), 3.into()];
        assert_eq!(
            weighted_regret(&inst, &w, &plays, &losses).unwrap(),
            Rational::integer(2)
        );
        let ones = [1.into(), 1.into(), 1.into()];
        assert_eq!(
            weighted_regret(&inst, &ones, &plays, &losses).unwrap(),
            regret_of_play(&inst, &plays, &losses).unwrap()
        );
        assert_eq!(
            weighted_regret(&inst, &w, &[], &[]).unwrap(),
            Rational::zero()
        );
        let bad = [1.into(), 0.into(), 3.into()];
        assert!(matches!(
            weighted_regret(&inst, &bad, &plays, &losses),
            Err(Error::NonPositiveWeight { index: 1, .. })
        ));
        assert!(matches!(
            weighted_regret(&weighted_experts(), &w, &plays, &losses),
            Err(Error::NotProper(_))
        ));
    }

    #[test]
    fn constraint_form_examples() {
        let inst = external(2, 0);
        let app = regret_as_approachability(&inst);
        // u(p, l) = <p - e1, l>
        let p = v(&[0, 1]);
        let l = v(&[1, 1]);
        assert_eq!(app.u[0].eval(&p, &l).unwrap(), Rational::zero());
        assert_eq!(app.u[0].eval(&p, &v(&[0, 1])).unwrap(), Rational::one());

        let id = RegretInstance::new(
            "id",
            Polytope::simplex(3),
            Polytope::cube(3, 0.into(), 1.into()),
            vec![AffineMapGen::identity("id", 3)],
        )
        .unwrap();
        let u = &regret_as_approachability(&id).u[0];
        assert!(u.m.is_zero() && u.is_bilinear());
    }

    #[test]
    fn accumulator_matches_direct_sum() {
        let app = regret_as_approachability(&weighted_experts());
        let plays = vec![v(&[1, 0, 0]), v(&[0, 0, 1]), v(&[0, 1, 0])];
        let losses = vec![v(&[1, -1, 0]), v(&[0, 0, 1]), v(&[-1, 1, 1])];
        let mut acc = PayoffAccumulator::new(3, 3);
        assert_eq!(acc.max_value(&app.u).unwrap(), Rational::zero());
        for (p, l) in plays.iter().zip(&losses) {
            acc.push(p, l).unwrap();
        }
        assert_eq!(
            acc.max_value(&app.u).unwrap(),
            apploss_of_play(&app, &plays, &losses).unwrap()
        );
    }
}
