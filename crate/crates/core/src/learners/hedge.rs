use crate::error::{Error, Result};
use crate::rational::Rational;

/// Bits kept when snapping float weights to rationals.
pub const SNAP_BITS: u32 = 52;

/// Multiplicative weights over `n` experts with `eta = sqrt(8 ln n / T)`.
///
/// Weights are computed in floating point and snapped down to multiples of
/// `2^-52`, with the rounding remainder assigned to the heaviest expert, so
/// plays are exact probability vectors. Cumulative losses and the learner's
/// own loss are tracked exactly, so `regret` is exact for the emitted plays.
#[derive(Clone, Debug)]
pub struct Hedge {
    eta: f64,
    cum_f64: Vec<f64>,
    cum: Vec<Rational>,
    own: Rational,
}

impl Hedge {
    pub fn new(n: usize, horizon: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition(
                "Hedge needs at least one expert".into(),
            ));
        }
        if horizon == 0 {
            return Err(Error::Precondition("Hedge needs a positive horizon".into()));
        }
        Ok(Hedge {
            eta: (8.0 * (n as f64).ln() / horizon as f64).sqrt(),
            cum_f64: vec![0.0; n],
            cum: vec![Rational::zero(); n],
            own: Rational::zero(),
        })
    }

    pub fn num_experts(&self) -> usize {
        self.cum.len()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Current play as an exact probability vector.
    pub fn weights(&self) -> Vec<Rational> {
        let lo = self.cum_f64.iter().cloned().fold(f64::INFINITY, f64::min);
        let raw: Vec<f64> = self
            .cum_f64
            .iter()
            .map(|c| (-self.eta * (c - lo)).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        let mut q: Vec<Rational> = raw
            .iter()
            .map(|w| Rational::floor_dyadic(w / total, SNAP_BITS))
            .collect();
        let heaviest = raw
            .iter()
            .enumerate()
            .fold(0, |best, (k, w)| if *w > raw[best] { k } else { best });
        let rest = Rational::one() - q.iter().cloned().sum::<Rational>();
        q[heaviest] += &rest;
        q
    }

    /// Records one round in which `q` was played against `losses`.
    pub fn update(&mut self, q: &[Rational], losses: &[Rational]) {
        debug_assert_eq!(q.len(), losses.len());
        for (k, l) in losses.iter().enumerate() {
            self.cum_f64[k] += l.to_f64();
            self.cum[k] += l;
            if !q[k].is_zero() {
                self.own += &q[k] * l;
            }
        }
    }

    /// `sum_t <q_t, l_t> - min_k sum_t l_{t,k}`, exactly.
    pub fn regret(&self) -> Rational {
        let best =
            Rational::max_of(&self.cum.iter().map(|c| -c).collect::<Vec<_>>()).expect("non-empty");
        &self.own + best
    }
}
