use crate::error::{Error, Result};
use crate::instances::{classify, AffineMapGen, RegretInstance};
use crate::linalg::Matrix;
use crate::rational::Rational;

fn require_proper(inst: &RegretInstance, weights: &[Rational]) -> Result<()> {
    crate::instances::check_weights(inst, weights)?;
    let kind = classify(inst)?.kind;
    if !kind.is_proper() {
        return Err(Error::NotProper(format!("{kind:?}")));
    }
    Ok(())
}

/// `phi_i' = w_i phi_i - (w_i - 1) Id`, so that regret against `phi_i'` is
/// `w_i` times regret against `phi_i`.
pub fn weighted_to_improper(inst: &RegretInstance, weights: &[Rational]) -> Result<RegretInstance> {
    require_proper(inst, weights)?;
    let d = inst.dim();
    let phi = inst
        .phi
        .iter()
        .zip(weights)
        .map(|(g, w)| {
            let lin = g
                .linear
                .scale(w)
                .sub(&Matrix::identity(d).scale(&(w - Rational::one())))?;
            AffineMapGen::new(g.label.clone(), lin, g.offset.scale(w))
        })
        .collect::<Result<Vec<_>>>()?;
    RegretInstance::new(
        format!("{}/weighted-improper", inst.name),
        inst.p.clone(),
        inst.l.clone(),
        phi,
    )
}

/// `phi_i' = (w_i / W) phi_i + (1 - w_i / W) Id` with `W = max_i w_i` and
/// losses scaled by `W`. Returns the new instance and `W`.
pub fn weighted_to_proper(
    inst: &RegretInstance,
    weights: &[Rational],
) -> Result<(RegretInstance, Rational)> {
    require_proper(inst, weights)?;
    let d = inst.dim();
    let big_w = Rational::max_of(weights).expect("non-empty weights");
    let phi = inst
        .phi
        .iter()
        .zip(weights)
        .map(|(g, w)| {
            let a = w / &big_w;
            let lin = g
                .linear
                .scale(&a)
                .add(&Matrix::identity(d).scale(&(Rational::one() - &a)))?;
            AffineMapGen::new(g.label.clone(), lin, g.offset.scale(&a))
        })
        .collect::<Result<Vec<_>>>()?;
    let out = RegretInstance::new(
        format!("{}/weighted-proper", inst.name),
        inst.p.clone(),
        inst.l.scale(&big_w),
        phi,
    )?;
    Ok((out, big_w))
}
