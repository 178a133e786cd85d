use super::{dedup_polytope, lift, lifted_matrix};
use crate::error::{ensure_dim, Error, Result};
use crate::instances::{AffineMapGen, ApproachabilityInstance, BilinearGen, RegretInstance};
use crate::linalg::{Matrix, Vector};
use crate::lp::{lp_feasible_point, LinearProgram};
use crate::polytope::Polytope;
use crate::rational::Rational;

/// Approachability as external regret over the constraint simplex.
///
/// The target plays `q in Delta_K` against losses
/// `l' = -(u_k(p, l))_k = -G ((p, 1) (x) (l, 1))`, where row `k` of the
/// pairing `G` is the flattened lifted matrix of `u_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalReduction {
    pub source: ApproachabilityInstance,
    pub target: RegretInstance,
    pub pairing: Matrix,
}

impl ClassicalReduction {
    /// Target loss for source round `(p, l)`.
    pub fn map_loss(&self, p: &Vector, l: &Vector) -> Result<Vector> {
        ensure_dim("source play", self.source.dim_p(), p.len())?;
        ensure_dim("source loss", self.source.dim_l(), l.len())?;
        let x = lift(p).outer(&lift(l));
        Ok(self.pairing.mul_vec(&x)?.neg())
    }

    /// A source action satisfying the `q`-combined constraint.
    pub fn action_oracle(&self, q: &Vector) -> Result<Vector> {
        halfspace_action(&self.source, q)
    }
}

pub fn classical_reduce(inst: &ApproachabilityInstance) -> Result<ClassicalReduction> {
    inst.validate()?;
    let k = inst.u.len();
    let rows: Vec<Vector> = inst.u.iter().map(|u| lifted_matrix(u).flatten()).collect();
    let width = (inst.dim_p() + 1) * (inst.dim_l() + 1);
    let pairing = Matrix::from_row_vectors(&rows, width)?;
    let mut losses = Vec::with_capacity(inst.p.num_vertices() * inst.l.num_vertices());
    for v in inst.p.vertices() {
        let pv = lift(v);
        for w in inst.l.vertices() {
            losses.push(pairing.mul_vec(&pv.outer(&lift(w)))?.neg());
        }
    }
    let phi = inst
        .u
        .iter()
        .enumerate()
        .map(|(i, u)| AffineMapGen::constant(u.label.clone(), Vector::unit(k, i)))
        .collect();
    let target = RegretInstance::new(
        format!("{}/classical", inst.name),
        Polytope::simplex(k),
        dedup_polytope(losses)?,
        phi,
    )?;
    Ok(ClassicalReduction {
        source: inst.clone(),
        target,
        pairing,
    })
}

/// `p in P` with `sum_k q_k u_k(p, l) <= 0` for every `l in L`.
///
/// Solved as an LP over convex coefficients of `P`'s vertices, with one row
/// per vertex of `L`; `NotApproachable` when no such `p` exists.
pub fn halfspace_action(inst: &ApproachabilityInstance, q: &Vector) -> Result<Vector> {
    ensure_dim("constraint coefficients", inst.u.len(), q.len())?;
    if q.iter().any(Rational::is_negative) || q.sum() != Rational::one() {
        return Err(Error::Malformed(
            "constraint coefficients must be a probability vector".into(),
        ));
    }
    let uq = BilinearGen::combination("q", &inst.u, q.as_slice())?;
    let verts = inst.p.vertices();
    let n = verts.len();
    let pieces = verts
        .iter()
        .map(|v| uq.affine_in_loss(v))
        .collect::<Result<Vec<_>>>()?;
    let mut lp = LinearProgram::new(n);
    for w in inst.l.vertices() {
        let row = pieces
            .iter()
            .map(|(g, k)| Ok(g.dot(w)? + k))
            .collect::<Result<Vector>>()?;
        lp.add_le(row, Rational::zero());
    }
    lp.add_eq(Vector::filled(n, Rational::one()), Rational::one());
    for j in 0..n {
        lp.add_nonneg(j);
    }
    let lambda = lp_feasible_point(&lp)?.ok_or_else(|| Error::NotApproachable {
        coeffs: q.as_slice().to_vec(),
    })?;
    let mut p = Vector::zeros(inst.dim_p());
    for (l, v) in lambda.iter().zip(verts) {
        if !l.is_zero() {
            p = p.axpy(l, v)?;
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::gap_instance;
    use crate::instances::{classify, regret_of_play, ClassKind};
    use crate::rational::ratio;

    #[test]
    fn gap_instance_reduction() {
        let inst = gap_instance(2).unwrap();
        let red = classical_reduce(&inst).unwrap();
        assert_eq!(red.target.dim(), 2);
        assert_eq!(classify(&red.target).unwrap().kind, ClassKind::External);
        let p = Vector::from_ints(&[1, 0, 0]);
        let l = Vector::from_ints(&[0, 1, 1]);
        let mapped = red.map_loss(&p, &l).unwrap();
        for (k, u) in inst.u.iter().enumerate() {
            assert_eq!(mapped[k], -u.eval(&p, &l).unwrap());
        }
        assert!(red.target.l.contains(&mapped).unwrap());

        let q = Vector::new(vec![ratio(1, 3), ratio(2, 3)]);
        let a = red.action_oracle(&q).unwrap();
        assert!(inst.p.contains(&a).unwrap());
        for w in inst.l.vertices() {
            let val: Rational = inst
                .u
                .iter()
                .zip(q.iter())
                .map(|(u, qk)| u.eval(&a, w).unwrap() * qk)
                .sum();
            assert!(!val.is_positive());
        }
    }

    #[test]
    fn target_regret_dominates_apploss() {
        let inst = gap_instance(2).unwrap();
        let red = classical_reduce(&inst).unwrap();
        let qs = [ratio(1, 2), ratio(1, 4), Rational::one()];
        let losses = [[0, 1, 0], [1, 0, 1], [1, 1, 0]];
        let mut plays = Vec::new();
        let mut src_plays = Vec::new();
        let mut tl = Vec::new();
        let mut sl = Vec::new();
        for (q0, lt) in qs.iter().zip(losses) {
            let q = Vector::new(vec![q0.clone(), Rational::one() - q0]);
            let p = red.action_oracle(&q).unwrap();
            let l = Vector::from_ints(&lt);
            tl.push(red.map_loss(&p, &l).unwrap());
            plays.push(q);
            src_plays.push(p);
            sl.push(l);
        }
        let reg = regret_of_play(&red.target, &plays, &tl).unwrap();
        let app = crate::instances::apploss_of_play(&inst, &src_plays, &sl).unwrap();
        assert!(reg >= app);
    }

    #[test]
    fn infeasible_halfspace_reported() {
        let inst = ApproachabilityInstance::new(
            "pos",
            Polytope::simplex(2),
            Polytope::cube(2, 0.into(), 1.into()),
            vec![BilinearGen::new(
                "one",
                Matrix::zeros(2, 2),
                Vector::zeros(2),
                Vector::zeros(2),
                Rational::one(),
            )
            .unwrap()],
        )
        .unwrap();
        let err = halfspace_action(&inst, &Vector::from_ints(&[1])).unwrap_err();
        assert!(matches!(err, Error::NotApproachable { .. }));
        assert!(halfspace_action(&inst, &Vector::from_ints(&[2])).is_err());
    }
}
