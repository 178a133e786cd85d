//! Linear equivalence between regret instances.
//!
//! Equivalences are searched in the single-matrix form
//! `phi'(p) = p + S (phi(p) - p)` with losses mapped by `(S^T)^{-1}`, which
//! preserves every regret term: `<M_phi p, l> = <S M_phi p, (S^T)^{-1} l>`.

mod external;
mod proper;

use serde::{Serialize, Serializer};

use crate::error::{ensure_dim, Error, Result};
use crate::instances::{AffineMapGen, Instance, RegretInstance};
use crate::linalg::{Matrix, Vector};
use crate::polytope::Polytope;
use crate::rational::Rational;

pub use external::{check_external, construct_external_S};
pub use proper::{
    cone_span_basis, decide_proper, opposed_displacement, proper_cone_lp, shared_left_kernel,
    ProperCone,
};

/// How offsets were removed from the generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Linearization {
    /// Generators were already linear on a hull missing the origin.
    Identity,
    /// `aff(P)` misses the origin, so `<h, p> = 1` on `P` and each offset `o`
    /// becomes the rank-one linear term `o h^T`.
    Folded { h: Vector },
    /// Plays become `(p, 1)`, losses `(l, 0)`, and `phi` becomes
    /// `[[A, b], [0, 1]]`.
    Augmented,
}

/// A regret instance with purely linear generators, and the instance it came
/// from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearizedInstance {
    pub original: RegretInstance,
    pub base: RegretInstance,
    pub linearization: Linearization,
}

impl LinearizedInstance {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn lift_play(&self, p: &Vector) -> Vector {
        match self.linearization {
            Linearization::Augmented => p.extended(Rational::one()),
            _ => p.clone(),
        }
    }

    pub fn lift_loss(&self, l: &Vector) -> Vector {
        match self.linearization {
            Linearization::Augmented => l.extended(Rational::zero()),
            _ => l.clone(),
        }
    }
}

/// `h` with `<h, p> = 1` on `aff(P)`, if the hull misses the origin.
fn unit_functional(p: &Polytope) -> Result<Option<Vector>> {
    let (base, dirs) = p.affine_span();
    let d = p.ambient_dim();
    let mut rows = vec![base];
    rows.extend(dirs);
    let m = Matrix::from_row_vectors(&rows, d)?;
    let rhs = Vector::unit(rows.len(), 0);
    m.solve(&rhs)
}

pub fn canonicalize(inst: &RegretInstance) -> Result<LinearizedInstance> {
    inst.validate()?;
    let h = unit_functional(&inst.p)?;
    let all_linear = inst.phi.iter().all(AffineMapGen::is_linear);
    let (base, linearization) = match h {
        Some(_) if all_linear => (inst.clone(), Linearization::Identity),
        Some(h) => {
            let phi = inst
                .phi
                .iter()
                .map(|g| {
                    let fold = Matrix::from_rows(
                        g.offset.iter().map(|o| h.scale(o).into_inner()).collect(),
                    )?;
                    AffineMapGen::linear_map(g.label.clone(), g.linear.add(&fold)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let base = RegretInstance::new(inst.name.clone(), inst.p.clone(), inst.l.clone(), phi)?;
            (base, Linearization::Folded { h })
        }
        None => {
            let d = inst.dim();
            let p = Polytope::new(
                inst.p
                    .vertices()
                    .iter()
                    .map(|v| v.extended(Rational::one()))
                    .collect(),
            )?;
            let l = Polytope::new(
                inst.l
                    .vertices()
                    .iter()
                    .map(|w| w.extended(Rational::zero()))
                    .collect(),
            )?;
            let phi = inst
                .phi
                .iter()
                .map(|g| {
                    let mut lin = Matrix::zeros(d + 1, d + 1);
                    for i in 0..d {
                        for j in 0..d {
                            lin[(i, j)] = g.linear[(i, j)].clone();
                        }
                        lin[(i, d)] = g.offset[i].clone();
                    }
                    lin[(d, d)] = Rational::one();
                    AffineMapGen::linear_map(g.label.clone(), lin)
                })
                .collect::<Result<Vec<_>>>()?;
            let base = RegretInstance::new(inst.name.clone(), p, l, phi)?;
            (base, Linearization::Augmented)
        }
    };
    Ok(LinearizedInstance {
        original: inst.clone(),
        base,
        linearization,
    })
}

/// `phi'(p) = p + S (phi(p) - p)` and `L'' = (S^T)^{-1} L`.
#[allow(non_snake_case)]
pub fn apply_S(inst: &LinearizedInstance, s: &Matrix) -> Result<RegretInstance> {
    let d = inst.dim();
    if !s.is_square() {
        return Err(Error::dim("transformation rows", s.cols(), s.rows()));
    }
    ensure_dim("transformation", d, s.rows())?;
    let inv_t = s.inverse()?.transpose();
    let id = Matrix::identity(d);
    let phi = inst
        .base
        .phi
        .iter()
        .map(|g| {
            let lin = id.add(&s.mul(&g.linear.sub(&id)?)?)?;
            AffineMapGen::new(g.label.clone(), lin, s.mul_vec(&g.offset)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let l = inst.base.l.linear_image(&inv_t)?;
    RegretInstance::new(format!("{}/S", inst.base.name), inst.base.p.clone(), l, phi)
}

/// Checks `<p - phi(p), l> = <p' - phi'(p'), l'>` for every original vertex
/// pair and generator, with `p', l'` the lifted and transformed vertices.
pub fn verify_certificate(
    inst: &LinearizedInstance,
    s: &Matrix,
    target: &RegretInstance,
) -> Result<bool> {
    let inv_t = s.inverse()?.transpose();
    if target.phi.len() != inst.original.phi.len() {
        return Ok(false);
    }
    for (g, gt) in inst.original.phi.iter().zip(&target.phi) {
        for p in inst.original.p.vertices() {
            let pl = inst.lift_play(p);
            if !target.p.contains(&pl)? {
                return Ok(false);
            }
            for l in inst.original.l.vertices() {
                let lt = inv_t.mul_vec(&inst.lift_loss(l))?;
                if g.regret_term(p, l)? != gt.regret_term(&pl, &lt)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EquivStatus {
    ExternalEquivalent,
    ProperEquivalent,
    Obstructed,
    NoInvertibleFound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type")]
pub enum Obstruction {
    /// The stacked left kernels of all `M_phi` (restricted to `span(P)`)
    /// intersect trivially: `rank == dim`.
    LeftKernelEmpty { rank: usize, dim: usize },
    /// `phi_2(x) - x = -alpha (phi_1(x) - x) != 0` at an extreme point `x`.
    OpposedDisplacement {
        x: Vector,
        phi1: String,
        phi2: String,
        alpha: Rational,
    },
    /// `M_phi` restricted to the affine span has a kernel direction.
    NonUniqueFixedPoint { phi: String, direction: Vector },
    /// `(phi_1 - phi_2)` changes along a direction of the affine span.
    NonConstantDifference {
        phi1: String,
        phi2: String,
        direction: Vector,
    },
}

impl Obstruction {
    /// Recomputes the witness from scratch.
    pub fn verify(&self, inst: &LinearizedInstance) -> Result<bool> {
        let gen = |label: &str| {
            inst.base
                .generator(label)
                .ok_or_else(|| Error::Malformed(format!("unknown generator {label:?}")))
        };
        match self {
            Obstruction::LeftKernelEmpty { rank, dim } => {
                Ok(*dim == inst.dim() && rank == dim && proper::stacked_left_rank(inst)? == *dim)
            }
            Obstruction::OpposedDisplacement {
                x,
                phi1,
                phi2,
                alpha,
            } => {
                let x_hat = inst.lift_play(x);
                let d1 = gen(phi1)?.displacement(&x_hat)?;
                let d2 = gen(phi2)?.displacement(&x_hat)?;
                let idx = inst.original.p.vertices().iter().position(|v| v == x);
                let extreme = match idx {
                    Some(i) => inst.original.p.is_extreme_vertex(i)?,
                    None => false,
                };
                Ok(extreme && alpha.is_positive() && !d1.is_zero() && d2 == d1.scale(alpha).neg())
            }
            Obstruction::NonUniqueFixedPoint { phi, direction } => {
                let (mphi, _) = gen(phi)?.m_phi();
                let (_, dirs) = inst.base.p.affine_span();
                let in_span = crate::linalg::rank_of(
                    &[dirs.clone(), vec![direction.clone()]].concat(),
                    inst.dim(),
                )? == dirs.len();
                Ok(!direction.is_zero() && in_span && mphi.mul_vec(direction)?.is_zero())
            }
            Obstruction::NonConstantDifference {
                phi1,
                phi2,
                direction,
            } => {
                let diff = gen(phi1)?.linear.sub(&gen(phi2)?.linear)?;
                Ok(!diff.mul_vec(direction)?.is_zero())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceVerdict {
    pub status: EquivStatus,
    #[serde(rename = "S")]
    pub s: Option<Matrix>,
    #[serde(serialize_with = "serialize_target")]
    pub target: Option<RegretInstance>,
    pub obstruction: Option<Obstruction>,
    pub trials: usize,
    /// Upper bound on the probability that `NoInvertibleFound` is wrong.
    pub error_bound: Option<Rational>,
    pub linearization: Linearization,
}

fn serialize_target<S: Serializer>(
    t: &Option<RegretInstance>,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    match t {
        None => ser.serialize_none(),
        Some(t) => {
            let value: serde_json::Value =
                serde_json::from_str(&Instance::from(t.clone()).to_json())
                    .map_err(serde::ser::Error::custom)?;
            value.serialize(ser)
        }
    }
}

impl EquivalenceVerdict {
    fn obstructed(inst: &LinearizedInstance, obstruction: Obstruction) -> Self {
        EquivalenceVerdict {
            status: EquivStatus::Obstructed,
            s: None,
            target: None,
            obstruction: Some(obstruction),
            trials: 0,
            error_bound: None,
            linearization: inst.linearization.clone(),
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("verdict serializes");
        s.push('\n');
        s
    }
}
