use std::collections::HashSet;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    Adversary, BestResponse, BlackwellLearner, GgmLearner, HedgeLearner, IidVertex, Learner,
    Replay, RoundView, StaticLearner,
};
use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::linalg::Vector;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StaticPoint {
    /// 0-based index into the vertex list of `P`.
    Vertex(usize),
    Point(Vector),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LearnerSpec {
    /// Optional 0-based subset of `P`'s vertices to run over.
    Hedge {
        support: Option<Vec<usize>>,
    },
    Ggm,
    Blackwell,
    Static(StaticPoint),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AdversarySpec {
    /// Uniform over the vertices of `L`; `None` uses the run seed.
    Iid {
        seed: Option<u64>,
    },
    /// Uniform over an explicit loss list.
    IidFamily {
        seed: Option<u64>,
        family: Vec<Vector>,
    },
    BestResponse,
    Replay {
        losses: Vec<Vector>,
    },
}

fn parse_index(s: &str) -> Result<usize> {
    let i: usize = s
        .trim()
        .parse()
        .map_err(|_| Error::Malformed(format!("expected a 1-based index, got {s:?}")))?;
    i.checked_sub(1)
        .ok_or_else(|| Error::Malformed("indices are 1-based".into()))
}

/// `hedge`, `hedge:1,3` (1-based vertex subset), `ggm`, `blackwell`,
/// `static:<k>` (1-based vertex) or `static:<x1>,<x2>,..` (a point).
impl FromStr for LearnerSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        match (head, arg) {
            ("hedge", None) => Ok(LearnerSpec::Hedge { support: None }),
            ("hedge", Some(a)) => Ok(LearnerSpec::Hedge {
                support: Some(a.split(',').map(parse_index).collect::<Result<_>>()?),
            }),
            ("ggm", None) => Ok(LearnerSpec::Ggm),
            ("blackwell", None) => Ok(LearnerSpec::Blackwell),
            ("static", Some(a)) if a.contains(',') => Ok(LearnerSpec::Static(StaticPoint::Point(
                a.split(',')
                    .map(|x| x.trim().parse())
                    .collect::<Result<Vector>>()?,
            ))),
            ("static", Some(a)) => Ok(LearnerSpec::Static(StaticPoint::Vertex(parse_index(a)?))),
            _ => Err(Error::Malformed(format!(
                "unknown learner {s:?}; expected hedge[:i,j,..], ggm, blackwell or static:<vertex>"
            ))),
        }
    }
}

/// `iid`, `iid:<seed>` or `best-response`; replays are built from files by
/// the caller.
impl FromStr for AdversarySpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "iid" => Ok(AdversarySpec::Iid { seed: None }),
            None if s == "best-response" => Ok(AdversarySpec::BestResponse),
            Some(("iid", seed)) => Ok(AdversarySpec::Iid {
                seed: Some(
                    seed.trim()
                        .parse()
                        .map_err(|_| Error::Malformed(format!("bad adversary seed {seed:?}")))?,
                ),
            }),
            _ => Err(Error::Malformed(format!(
                "unknown adversary {s:?}; expected iid[:<seed>], best-response or replay:<file>"
            ))),
        }
    }
}

pub fn build_learner(
    spec: &LearnerSpec,
    inst: &Instance,
    horizon: usize,
) -> Result<Box<dyn Learner>> {
    let app = inst.to_approachability();
    Ok(match spec {
        LearnerSpec::Hedge { support } => Box::new(HedgeLearner::new(
            &app.p,
            app.dim_l(),
            support.as_deref(),
            horizon,
        )?),
        LearnerSpec::Ggm => {
            let r = inst.as_regret().ok_or_else(|| {
                Error::Malformed("the ggm learner needs a regret instance".into())
            })?;
            Box::new(GgmLearner::new(r, horizon)?)
        }
        LearnerSpec::Blackwell => Box::new(BlackwellLearner::new(&app, horizon)?),
        LearnerSpec::Static(StaticPoint::Vertex(i)) => {
            Box::new(StaticLearner::new(
                app.p.vertices().get(*i).cloned().ok_or_else(|| {
                    Error::Malformed(format!("vertex index {} out of range", i + 1))
                })?,
            ))
        }
        LearnerSpec::Static(StaticPoint::Point(p)) => Box::new(StaticLearner::new(p.clone())),
    })
}

pub fn build_adversary(
    spec: &AdversarySpec,
    inst: &Instance,
    seed: u64,
) -> Result<Box<dyn Adversary>> {
    Ok(match spec {
        AdversarySpec::Iid { seed: s } => {
            let l = match inst {
                Instance::Regret(r) => &r.l,
                Instance::Approachability(a) => &a.l,
            };
            Box::new(IidVertex::new(l.vertices().to_vec(), s.unwrap_or(seed))?)
        }
        AdversarySpec::IidFamily { seed: s, family } => {
            Box::new(IidVertex::new(family.clone(), s.unwrap_or(seed))?)
        }
        AdversarySpec::BestResponse => Box::new(BestResponse),
        AdversarySpec::Replay { losses } => Box::new(Replay::new(losses.clone())),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub instance: String,
    pub kind: String,
    pub learner: String,
    pub adversary: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub seed: u64,
}

/// One simulated interaction. `cumulative[t]` is the loss after round
/// `t + 1`: AppLoss, which equals phi-regret for regret instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub metadata: TraceMeta,
    pub plays: Vec<Vector>,
    pub losses: Vec<Vector>,
    pub cumulative: Vec<Rational>,
    pub inner_cumulative: Option<Vec<Rational>>,
    pub final_loss: f64,
    pub final_loss_over_sqrt_t: f64,
}

impl Trace {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("trace serializes");
        s.push('\n');
        s
    }
}

/// Runs `horizon` rounds, checking every play against `P` and every loss
/// against `L`.
pub fn simulate(
    learner: &mut dyn Learner,
    adversary: &mut dyn Adversary,
    inst: &Instance,
    horizon: usize,
    seed: u64,
) -> Result<Trace> {
    let app = inst.to_approachability();
    let mut cum = vec![Rational::zero(); app.u.len()];
    let mut known_losses: HashSet<Vector> = HashSet::new();
    let mut plays = Vec::with_capacity(horizon);
    let mut losses = Vec::with_capacity(horizon);
    let mut cumulative = Vec::with_capacity(horizon);
    let mut inner: Option<Vec<Rational>> = Some(Vec::with_capacity(horizon));
    for round in 1..=horizon {
        let p = learner.next_play()?;
        if p.len() != app.dim_p() || !app.p.contains(&p)? {
            return Err(Error::InvalidPlay {
                round,
                what: "play",
            });
        }
        let l = adversary.next_loss(&RoundView {
            round,
            play: &p,
            instance: &app,
            cumulative: &cum,
        })?;
        if !known_losses.contains(&l) {
            if l.len() != app.dim_l() || !app.l.contains(&l)? {
                return Err(Error::InvalidPlay {
                    round,
                    what: "loss",
                });
            }
            known_losses.insert(l.clone());
        }
        for (c, u) in cum.iter_mut().zip(&app.u) {
            *c += u.eval(&p, &l)?;
        }
        cumulative.push(Rational::max_of(&cum).expect("non-empty constraints"));
        learner.observe(&p, &l)?;
        match (learner.inner_regret(), inner.as_mut()) {
            (Some(r), Some(v)) => v.push(r),
            _ => inner = None,
        }
        plays.push(p);
        losses.push(l);
    }
    let final_loss = cumulative.last().map_or(0.0, Rational::to_f64);
    let final_loss_over_sqrt_t = if horizon == 0 {
        0.0
    } else {
        final_loss / (horizon as f64).sqrt()
    };
    Ok(Trace {
        metadata: TraceMeta {
            instance: inst.name().to_string(),
            kind: inst.kind().to_string(),
            learner: learner.describe(),
            adversary: adversary.describe(),
            horizon,
            seed,
        },
        plays,
        losses,
        cumulative,
        inner_cumulative: if horizon == 0 { None } else { inner },
        final_loss,
        final_loss_over_sqrt_t,
    })
}

pub fn run(
    inst: &Instance,
    learner: &LearnerSpec,
    adversary: &AdversarySpec,
    horizon: usize,
    seed: u64,
) -> Result<Trace> {
    let mut l = build_learner(learner, inst, horizon.max(1))?;
    let mut a = build_adversary(adversary, inst, seed)?;
    simulate(l.as_mut(), a.as_mut(), inst, horizon, seed)
}

#[derive(Clone, Debug)]
pub struct SweepSetup {
    pub instance: Instance,
    pub learner: LearnerSpec,
    pub adversary: AdversarySpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub horizon: usize,
    pub mean: f64,
    pub max: f64,
    pub min: f64,
}

/// Final loss over `sqrt(T)` summarized across seeds, per horizon. This is an
/// empirical estimate for the given learner and adversary, not the rate.
pub fn rate_sweep(setup: &SweepSetup, horizons: &[usize], seeds: &[u64]) -> Result<Vec<SweepRow>> {
    if horizons.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Precondition("horizons must be ascending".into()));
    }
    if seeds.is_empty() {
        return Err(Error::Precondition(
            "a sweep needs at least one seed".into(),
        ));
    }
    horizons
        .iter()
        .map(|&t| {
            let vals = seeds
                .par_iter()
                .map(|&s| {
                    Ok(
                        run(&setup.instance, &setup.learner, &setup.adversary, t, s)?
                            .final_loss_over_sqrt_t,
                    )
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(SweepRow {
                horizon: t,
                mean: vals.iter().sum::<f64>() / vals.len() as f64,
                max: vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                min: vals.iter().cloned().fold(f64::INFINITY, f64::min),
            })
        })
        .collect()
}

fn sig12(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("T,mean,max,min\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.horizon,
            sig12(r.mean),
            sig12(r.max),
            sig12(r.min)
        ));
    }
    out
}
