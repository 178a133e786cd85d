//! Online learners, adversaries and the simulation harness.

mod adversary;
mod hedge;
mod sim;

pub use adversary::{Adversary, BestResponse, IidVertex, Replay, RoundView};
pub use hedge::{Hedge, SNAP_BITS};
pub use sim::{
    build_adversary, build_learner, rate_sweep, run, simulate, sweep_csv, AdversarySpec,
    LearnerSpec, StaticPoint, SweepRow, SweepSetup, Trace, TraceMeta,
};

use crate::error::{ensure_dim, Error, Result};
use crate::instances::{
    classify, find_fixed_point, AffineMapGen, ApproachabilityInstance, RegretInstance,
};
use crate::linalg::{Matrix, Vector};
use crate::polytope::Polytope;
use crate::rational::Rational;
use crate::reductions::halfspace_action;

pub trait Learner {
    fn describe(&self) -> String;
    fn next_play(&mut self) -> Result<Vector>;
    fn observe(&mut self, play: &Vector, loss: &Vector) -> Result<()>;
    /// Exact cumulative regret of an inner external-regret learner, if any.
    fn inner_regret(&self) -> Option<Rational> {
        None
    }
}

fn mix(q: &[Rational], points: &[Vector], dim: usize) -> Result<Vector> {
    let mut p = Vector::zeros(dim);
    for (qk, v) in q.iter().zip(points) {
        if qk.is_zero() {
            continue;
        }
        ensure_dim("mixed point", dim, v.len())?;
        for (i, vi) in v.iter().enumerate() {
            if vi.is_one() {
                p[i] += qk;
            } else if !vi.is_zero() {
                p[i] += qk * vi;
            }
        }
    }
    Ok(p)
}

/// Hedge over (a subset of) the vertices of `P`; vertex `v` suffers
/// `<v, l>`.
pub struct HedgeLearner {
    hedge: Hedge,
    experts: Vec<Vector>,
    dim: usize,
    current: Option<Vec<Rational>>,
}

impl HedgeLearner {
    pub fn new(
        p: &Polytope,
        dim_l: usize,
        support: Option<&[usize]>,
        horizon: usize,
    ) -> Result<Self> {
        ensure_dim("Hedge loss dimension", p.ambient_dim(), dim_l)?;
        let experts: Vec<Vector> = match support {
            None => p.vertices().to_vec(),
            Some(idx) => {
                idx.iter()
                    .map(|&i| {
                        p.vertices().get(i).cloned().ok_or_else(|| {
                            Error::Malformed(format!("vertex index {i} out of range"))
                        })
                    })
                    .collect::<Result<_>>()?
            }
        };
        Ok(HedgeLearner {
            hedge: Hedge::new(experts.len(), horizon)?,
            experts,
            dim: p.ambient_dim(),
            current: None,
        })
    }
}

impl Learner for HedgeLearner {
    fn describe(&self) -> String {
        format!("hedge(experts={})", self.experts.len())
    }

    fn next_play(&mut self) -> Result<Vector> {
        let q = self.hedge.weights();
        let p = mix(&q, &self.experts, self.dim)?;
        self.current = Some(q);
        Ok(p)
    }

    fn observe(&mut self, _play: &Vector, loss: &Vector) -> Result<()> {
        let q = self
            .current
            .take()
            .ok_or_else(|| Error::Precondition("observe before play".into()))?;
        let losses = self
            .experts
            .iter()
            .map(|v| v.dot(loss))
            .collect::<Result<Vec<_>>>()?;
        self.hedge.update(&q, &losses);
        Ok(())
    }

    fn inner_regret(&self) -> Option<Rational> {
        Some(self.hedge.regret())
    }
}

/// Hedge over the generators; plays the fixed point of `sum_j q_j phi_j`,
/// and generator `j` suffers `<phi_j(p), l>`.
pub struct GgmLearner {
    hedge: Hedge,
    inst: RegretInstance,
    current: Option<Vec<Rational>>,
}

impl GgmLearner {
    pub fn new(inst: &RegretInstance, horizon: usize) -> Result<Self> {
        let kind = classify(inst)?.kind;
        if !kind.is_proper() {
            return Err(Error::NotProper(format!("{kind:?}")));
        }
        Ok(GgmLearner {
            hedge: Hedge::new(inst.phi.len(), horizon)?,
            inst: inst.clone(),
            current: None,
        })
    }
}

impl Learner for GgmLearner {
    fn describe(&self) -> String {
        format!("ggm(generators={})", self.inst.phi.len())
    }

    fn next_play(&mut self) -> Result<Vector> {
        let q = self.hedge.weights();
        let d = self.inst.dim();
        let mut lin = Matrix::zeros(d, d);
        let mut off = Vector::zeros(d);
        for (qj, g) in q.iter().zip(&self.inst.phi) {
            if !qj.is_zero() {
                lin = lin.add(&g.linear.scale(qj))?;
                off = off.axpy(qj, &g.offset)?;
            }
        }
        let avg = AffineMapGen::new("mixture", lin, off)?;
        let p = find_fixed_point(&avg, &self.inst.p)?
            .ok_or_else(|| Error::NotProper("mixture of generators has no fixed point".into()))?;
        self.current = Some(q);
        Ok(p)
    }

    fn observe(&mut self, play: &Vector, loss: &Vector) -> Result<()> {
        let q = self
            .current
            .take()
            .ok_or_else(|| Error::Precondition("observe before play".into()))?;
        let losses = self
            .inst
            .phi
            .iter()
            .map(|g| g.apply(play)?.dot(loss))
            .collect::<Result<Vec<_>>>()?;
        self.hedge.update(&q, &losses);
        Ok(())
    }

    fn inner_regret(&self) -> Option<Rational> {
        Some(self.hedge.regret())
    }
}

/// Hedge over the constraints with losses `-u_k(p, l)`; plays an action
/// satisfying the current combined constraint.
pub struct BlackwellLearner {
    hedge: Hedge,
    inst: ApproachabilityInstance,
    current: Option<Vec<Rational>>,
}

impl BlackwellLearner {
    pub fn new(inst: &ApproachabilityInstance, horizon: usize) -> Result<Self> {
        inst.validate()?;
        Ok(BlackwellLearner {
            hedge: Hedge::new(inst.u.len(), horizon)?,
            inst: inst.clone(),
            current: None,
        })
    }
}

impl Learner for BlackwellLearner {
    fn describe(&self) -> String {
        format!("blackwell(constraints={})", self.inst.u.len())
    }

    fn next_play(&mut self) -> Result<Vector> {
        let q = self.hedge.weights();
        let p = halfspace_action(&self.inst, &Vector::new(q.clone()))?;
        self.current = Some(q);
        Ok(p)
    }

    fn observe(&mut self, play: &Vector, loss: &Vector) -> Result<()> {
        let q = self
            .current
            .take()
            .ok_or_else(|| Error::Precondition("observe before play".into()))?;
        let losses = self
            .inst
            .u
            .iter()
            .map(|u| Ok(-u.eval(play, loss)?))
            .collect::<Result<Vec<_>>>()?;
        self.hedge.update(&q, &losses);
        Ok(())
    }

    fn inner_regret(&self) -> Option<Rational> {
        Some(self.hedge.regret())
    }
}

/// Always plays the same point.
pub struct StaticLearner {
    point: Vector,
}

impl StaticLearner {
    pub fn new(point: Vector) -> Self {
        StaticLearner { point }
    }
}

impl Learner for StaticLearner {
    fn describe(&self) -> String {
        format!("static{}", self.point)
    }

    fn next_play(&mut self) -> Result<Vector> {
        Ok(self.point.clone())
    }

    fn observe(&mut self, _play: &Vector, _loss: &Vector) -> Result<()> {
        Ok(())
    }
}
