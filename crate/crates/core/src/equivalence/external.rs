use super::{
    apply_S, verify_certificate, EquivStatus, EquivalenceVerdict, LinearizedInstance, Obstruction,
};
use crate::error::{Error, Result};
use crate::instances::{classify, find_fixed_point, AffineMapGen, ClassKind};
use crate::linalg::{rank_of, Matrix, Vector};
use crate::polytope::Polytope;

pub(super) fn require_valid(inst: &LinearizedInstance) -> Result<()> {
    let c = classify(&inst.base)?;
    if !c.kind.is_valid() {
        let label = c.witness.map(|w| w.label).unwrap_or_default();
        return Err(Error::InvalidInstance(format!(
            "generator {label:?} has no fixed point in P"
        )));
    }
    Ok(())
}

/// Columns `M_phi d` for each affine-span direction `d`.
fn restricted(phi: &AffineMapGen, dirs: &[Vector]) -> Result<Matrix> {
    let (m, _) = phi.m_phi();
    let cols = dirs
        .iter()
        .map(|d| m.mul_vec(d))
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_columns(&cols, phi.dim())
}

/// External equivalence holds iff the generators differ pairwise by constants
/// on `P` and each has a single fixed point in `aff(P)`.
pub fn check_external(inst: &LinearizedInstance) -> Result<EquivalenceVerdict> {
    require_valid(inst)?;
    let (_, dirs) = inst.base.p.affine_span();
    let phi = &inst.base.phi;

    for (i, a) in phi.iter().enumerate() {
        for b in &phi[i + 1..] {
            let diff = a.linear.sub(&b.linear)?;
            for d in &dirs {
                if !diff.mul_vec(d)?.is_zero() {
                    return Ok(EquivalenceVerdict::obstructed(
                        inst,
                        Obstruction::NonConstantDifference {
                            phi1: a.label.clone(),
                            phi2: b.label.clone(),
                            direction: d.clone(),
                        },
                    ));
                }
            }
        }
    }
    if !dirs.is_empty() {
        for g in phi {
            let r = restricted(g, &dirs)?;
            if let Some(c) = r.kernel_basis().into_iter().next() {
                let mut direction = Vector::zeros(inst.dim());
                for (ci, d) in c.iter().zip(&dirs) {
                    direction = direction.axpy(ci, d)?;
                }
                return Ok(EquivalenceVerdict::obstructed(
                    inst,
                    Obstruction::NonUniqueFixedPoint {
                        phi: g.label.clone(),
                        direction,
                    },
                ));
            }
        }
    }

    let s = construct_external_S(&phi[0], &inst.base.p)?;
    let target = apply_S(inst, &s)?;
    let kind = classify(&target)?.kind;
    if kind != ClassKind::External || !verify_certificate(inst, &s, &target)? {
        return Err(Error::Precondition(format!(
            "constructed transformation yields {kind:?}, not an external instance"
        )));
    }
    Ok(EquivalenceVerdict {
        status: EquivStatus::ExternalEquivalent,
        s: Some(s),
        target: Some(target),
        obstruction: None,
        trials: 0,
        error_bound: None,
        linearization: inst.linearization.clone(),
    })
}

/// Invertible `S` with `S (phi(v) - v) = p_phi - v` on the vertices of `P`,
/// making `p + S (phi(p) - p)` the constant `p_phi`.
///
/// Both `{phi(v_i) - v_i}` and `{p_phi - v_i}` are completed to bases with
/// standard basis vectors in index order, appended vectors mapped in order.
#[allow(non_snake_case)]
pub fn construct_external_S(phi: &AffineMapGen, p: &Polytope) -> Result<Matrix> {
    let d = phi.dim();
    let p_phi = find_fixed_point(phi, p)?.ok_or_else(|| {
        Error::Precondition(format!("generator {:?} has no fixed point in P", phi.label))
    })?;
    let (_, dirs) = p.affine_span();
    if !dirs.is_empty() && restricted(phi, &dirs)?.rank() < dirs.len() {
        return Err(Error::Precondition(format!(
            "generator {:?} has more than one fixed point in the affine span",
            phi.label
        )));
    }

    let mut sources: Vec<Vector> = Vec::new();
    let mut images: Vec<Vector> = Vec::new();
    let mut chosen: Vec<Vector> = Vec::new();
    for v in p.vertices() {
        if chosen.len() == dirs.len() {
            break;
        }
        let t = p_phi.sub(v)?;
        let mut trial = chosen.clone();
        trial.push(t.clone());
        if rank_of(&trial, d)? == trial.len() {
            chosen = trial;
            sources.push(phi.displacement(v)?);
            images.push(t);
        }
    }
    debug_assert_eq!(rank_of(&sources, d)?, sources.len());
    let complete = |mut vs: Vec<Vector>| -> Result<Vec<Vector>> {
        for i in 0..d {
            if vs.len() == d {
                break;
            }
            let mut trial = vs.clone();
            trial.push(Vector::unit(d, i));
            if rank_of(&trial, d)? == trial.len() {
                vs = trial;
            }
        }
        Ok(vs)
    };
    let w = Matrix::from_columns(&complete(sources)?, d)?;
    let t = Matrix::from_columns(&complete(images)?, d)?;
    t.mul(&w.inverse()?)
}
