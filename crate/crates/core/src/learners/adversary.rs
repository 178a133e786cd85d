use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instances::ApproachabilityInstance;
use crate::linalg::Vector;
use crate::rational::Rational;

/// What an adversary sees when choosing the loss of round `round`.
pub struct RoundView<'a> {
    /// 1-based.
    pub round: usize,
    pub play: &'a Vector,
    pub instance: &'a ApproachabilityInstance,
    /// `sum_s u_k(p_s, l_s)` over completed rounds, per constraint.
    pub cumulative: &'a [Rational],
}

pub trait Adversary {
    fn describe(&self) -> String;
    fn next_loss(&mut self, view: &RoundView<'_>) -> Result<Vector>;
}

/// Uniform i.i.d. draws from a fixed list of losses.
pub struct IidVertex {
    family: Vec<Vector>,
    seed: u64,
    rng: ChaCha8Rng,
}

impl IidVertex {
    pub fn new(family: Vec<Vector>, seed: u64) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::Malformed(
                "i.i.d. adversary needs at least one loss".into(),
            ));
        }
        Ok(IidVertex {
            family,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }
}

impl Adversary for IidVertex {
    fn describe(&self) -> String {
        format!("iid(seed={}, family={})", self.seed, self.family.len())
    }

    fn next_loss(&mut self, _view: &RoundView<'_>) -> Result<Vector> {
        let k = self.rng.gen_range(0..self.family.len());
        Ok(self.family[k].clone())
    }
}

/// Greedy adaptive adversary.
///
/// Among the constraints with the largest cumulative value, picks the pair
/// (constraint, vertex of `L`) with the largest instantaneous value at the
/// current play; ties go to the lower constraint index, then the lower
/// vertex index.
#[derive(Default)]
pub struct BestResponse;

impl Adversary for BestResponse {
    fn describe(&self) -> String {
        "best-response".into()
    }

    fn next_loss(&mut self, view: &RoundView<'_>) -> Result<Vector> {
        let top = Rational::max_of(view.cumulative)
            .ok_or_else(|| Error::Malformed("no constraints".into()))?;
        let verts = view.instance.l.vertices();
        let mut best: Option<(Rational, usize)> = None;
        for (k, u) in view.instance.u.iter().enumerate() {
            if view.cumulative[k] != top {
                continue;
            }
            let (g, c) = u.affine_in_loss(view.play)?;
            // Float prescreen, then exact comparison among near-maximal vertices.
            let gf: Vec<f64> = g.iter().map(Rational::to_f64).collect();
            let scores: Vec<f64> = verts
                .iter()
                .map(|w| w.iter().zip(&gf).map(|(a, b)| a.to_f64() * b).sum())
                .collect();
            let hi = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let slack = 1e-6 * (1.0 + hi.abs());
            for (j, w) in verts.iter().enumerate() {
                if scores[j] < hi - slack {
                    continue;
                }
                let val = g.dot(w)? + &c;
                if best.as_ref().is_none_or(|(b, _)| val > *b) {
                    best = Some((val, j));
                }
            }
        }
        let (_, j) = best.expect("some constraint attains the maximum");
        Ok(verts[j].clone())
    }
}

/// Replays a fixed sequence.
pub struct Replay {
    losses: Vec<Vector>,
    next: usize,
}

impl Replay {
    pub fn new(losses: Vec<Vector>) -> Self {
        Replay { losses, next: 0 }
    }
}

impl Adversary for Replay {
    fn describe(&self) -> String {
        format!("replay(len={})", self.losses.len())
    }

    fn next_loss(&mut self, view: &RoundView<'_>) -> Result<Vector> {
        let l = self.losses.get(self.next).cloned().ok_or_else(|| {
            Error::Malformed(format!("replay sequence exhausted at round {}", view.round))
        })?;
        self.next += 1;
        Ok(l)
    }
}
