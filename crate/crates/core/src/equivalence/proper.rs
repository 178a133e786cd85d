use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::external::require_valid;
use super::{
    apply_S, verify_certificate, EquivStatus, EquivalenceVerdict, LinearizedInstance, Obstruction,
};
use crate::error::{Error, Result};
use crate::instances::{classify, RegretInstance};
use crate::linalg::{Matrix, Vector};
use crate::lp::{lp_solve, LinearProgram, LpOutcome};
use crate::rational::Rational;

/// Rows `(M_phi v)^T` for every generator and vertex; `v^T M_phi = 0` on
/// `span(P)` for all generators iff `v` is in this matrix's kernel.
fn stacked_images(inst: &LinearizedInstance) -> Result<Matrix> {
    let mut rows = Vec::new();
    for g in &inst.base.phi {
        let (m, _) = g.m_phi();
        for v in inst.base.p.vertices() {
            rows.push(m.mul_vec(v)?);
        }
    }
    Matrix::from_row_vectors(&rows, inst.dim())
}

pub(super) fn stacked_left_rank(inst: &LinearizedInstance) -> Result<usize> {
    Ok(stacked_images(inst)?.rank())
}

/// A nonzero `v` with `<phi(p), v> = <p, v>` on `P` for every generator.
///
/// Computed as the common left kernel of the `M_phi` restricted to
/// `span(P)`, which is the plain left kernel when `P` spans the space.
pub fn shared_left_kernel(inst: &LinearizedInstance) -> Result<Option<Vector>> {
    if inst.base.p.affine_dim() == inst.dim() {
        return Err(Error::KernelTestInapplicable);
    }
    Ok(stacked_images(inst)?.kernel_basis().into_iter().next())
}

/// An extreme vertex `x` and generators with
/// `phi_j(x) - x = -alpha (phi_i(x) - x) != 0`, `alpha > 0`.
pub fn opposed_displacement(inst: &LinearizedInstance) -> Result<Option<Obstruction>> {
    let verts = inst.original.p.vertices();
    for (idx, x) in verts.iter().enumerate() {
        if verts[..idx].contains(x) {
            continue;
        }
        let x_hat = inst.lift_play(x);
        let disp = inst
            .base
            .phi
            .iter()
            .map(|g| g.displacement(&x_hat))
            .collect::<Result<Vec<_>>>()?;
        let mut extreme: Option<bool> = None;
        for i in 0..disp.len() {
            let Some(k) = disp[i].iter().position(|c| !c.is_zero()) else {
                continue;
            };
            for j in i + 1..disp.len() {
                let alpha = -(&disp[j][k] / &disp[i][k]);
                if !alpha.is_positive() || disp[j] != disp[i].scale(&alpha).neg() {
                    continue;
                }
                let is_extreme = match extreme {
                    Some(e) => e,
                    None => *extreme.insert(inst.original.p.is_extreme_vertex(idx)?),
                };
                if !is_extreme {
                    break;
                }
                return Ok(Some(Obstruction::OpposedDisplacement {
                    x: x.clone(),
                    phi1: inst.base.phi[i].label.clone(),
                    phi2: inst.base.phi[j].label.clone(),
                    alpha,
                }));
            }
        }
    }
    Ok(None)
}

/// The set of `S` with `p_j + S (phi_i(p_j) - p_j) = sum_k lambda_ijk p_k`,
/// `lambda_ij` a probability vector, over all generators `i` and vertices `j`.
///
/// Variables: the `d^2` entries of `S` (row-major), then `lambda_ijk` at
/// `d^2 + (i N + j) N + k`.
#[derive(Clone, Debug)]
pub struct ProperCone {
    pub dim: usize,
    pub lp: LinearProgram,
    base: RegretInstance,
}

impl ProperCone {
    pub fn num_vars(&self) -> usize {
        self.lp.num_vars
    }

    pub fn contains(&self, s: &Matrix) -> Result<bool> {
        for g in &self.base.phi {
            for v in self.base.p.vertices() {
                let image = v.add(&s.mul_vec(&g.displacement(v)?)?)?;
                if !self.base.p.contains(&image)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

pub fn proper_cone_lp(inst: &LinearizedInstance) -> Result<ProperCone> {
    let d = inst.dim();
    let verts = inst.base.p.vertices();
    let n = verts.len();
    let m = inst.base.phi.len();
    let num_vars = d * d + m * n * n;
    let mut lp = LinearProgram::new(num_vars);
    for (i, g) in inst.base.phi.iter().enumerate() {
        for (j, pj) in verts.iter().enumerate() {
            let w = g.displacement(pj)?;
            let lam = d * d + (i * n + j) * n;
            for a in 0..d {
                let mut row = Vector::zeros(num_vars);
                for b in 0..d {
                    row[a * d + b] = w[b].clone();
                }
                for (k, pk) in verts.iter().enumerate() {
                    row[lam + k] = -pk[a].clone();
                }
                lp.add_eq(row, -pj[a].clone());
            }
            let mut sum = Vector::zeros(num_vars);
            for k in 0..n {
                sum[lam + k] = Rational::one();
                lp.add_nonneg(lam + k);
            }
            lp.add_eq(sum, Rational::one());
        }
    }
    Ok(ProperCone {
        dim: d,
        lp,
        base: inst.base.clone(),
    })
}

/// A basis of the linear span of the cone, each element inside the cone.
///
/// Repeatedly maximizes and minimizes `<c, S>` over the cone intersected with
/// `|S_ab| <= 1`, for `c` ranging over a basis of the orthogonal complement
/// of the current span.
pub fn cone_span_basis(cone: &ProperCone) -> Result<Vec<Matrix>> {
    let d = cone.dim;
    let d2 = d * d;
    let mut boxed = cone.lp.clone();
    for a in 0..d2 {
        boxed.add_le(Vector::unit(cone.num_vars(), a), Rational::one());
        boxed.add_ge(Vector::unit(cone.num_vars(), a), -Rational::one());
    }
    let mut basis: Vec<Vector> = Vec::new();
    'grow: loop {
        let complement: Vec<Vector> = if basis.is_empty() {
            (0..d2).map(|a| Vector::unit(d2, a)).collect()
        } else {
            Matrix::from_row_vectors(&basis, d2)?.kernel_basis()
        };
        for c in complement {
            for sign in [Rational::one(), -Rational::one()] {
                let mut obj = Vector::zeros(cone.num_vars());
                for a in 0..d2 {
                    obj[a] = &c[a] * &sign;
                }
                boxed.objective = obj;
                if let LpOutcome::Optimal { x, value } = lp_solve(&boxed)? {
                    if value.is_positive() {
                        basis.push(Vector::new(x.as_slice()[..d2].to_vec()));
                        continue 'grow;
                    }
                }
            }
        }
        break;
    }
    basis.iter().map(|b| Matrix::from_flat(d, d, b)).collect()
}

/// Randomized search for an invertible `S` in the cone.
///
/// Runs the deterministic obstructions first. Each trial `t` draws integer
/// weights `c_i in [1, K]`, `K = 2 * dim(span) * trials`, from a generator
/// seeded with `seed` on stream `t`, and tests `sum c_i B_i / sum c_i`, a
/// convex combination of cone elements. If some invertible matrix lies in the
/// span, a trial fails with probability at most `d / K`.
pub fn decide_proper(
    inst: &LinearizedInstance,
    trials: usize,
    seed: u64,
) -> Result<EquivalenceVerdict> {
    if trials == 0 {
        return Err(Error::Precondition(
            "decide_proper needs at least one trial".into(),
        ));
    }
    require_valid(inst)?;
    let d = inst.dim();
    if inst.base.p.affine_dim() < d && shared_left_kernel(inst)?.is_none() {
        let rank = stacked_left_rank(inst)?;
        return Ok(EquivalenceVerdict::obstructed(
            inst,
            Obstruction::LeftKernelEmpty { rank, dim: d },
        ));
    }
    if let Some(ob) = opposed_displacement(inst)? {
        return Ok(EquivalenceVerdict::obstructed(inst, ob));
    }

    let cone = proper_cone_lp(inst)?;
    let basis = cone_span_basis(&cone)?;
    let not_found = |error_bound: Rational| EquivalenceVerdict {
        status: EquivStatus::NoInvertibleFound,
        s: None,
        target: None,
        obstruction: None,
        trials,
        error_bound: Some(error_bound),
        linearization: inst.linearization.clone(),
    };
    if basis.is_empty() {
        return Ok(not_found(Rational::zero()));
    }

    let k = 2 * basis.len() * trials;
    let hit = (0..trials).into_par_iter().find_map_first(|t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let coeffs: Vec<Rational> = basis
            .iter()
            .map(|_| Rational::from(rng.gen_range(1..=k)))
            .collect();
        let total: Rational = coeffs.iter().cloned().sum();
        let mut s = Matrix::zeros(d, d);
        for (c, b) in coeffs.iter().zip(&basis) {
            s = s.add(&b.scale(c)).expect("square");
        }
        let s = s.scale(&total.recip().expect("positive weights"));
        match s.det() {
            Ok(x) if !x.is_zero() => Some((t, s)),
            _ => None,
        }
    });
    let Some((t, s)) = hit else {
        let per_trial = Rational::from(d) / Rational::from(k);
        let bound = (0..trials).fold(Rational::one(), |acc, _| acc * &per_trial);
        return Ok(not_found(bound));
    };
    if !cone.contains(&s)? {
        return Err(Error::Precondition(
            "combined transformation left the cone".into(),
        ));
    }
    let target = apply_S(inst, &s)?;
    let kind = classify(&target)?.kind;
    if !kind.is_proper() || !verify_certificate(inst, &s, &target)? {
        return Err(Error::Precondition(format!(
            "transformed instance is {kind:?}"
        )));
    }
    Ok(EquivalenceVerdict {
        status: EquivStatus::ProperEquivalent,
        s: Some(s),
        target: Some(target),
        obstruction: None,
        trials: t + 1,
        error_bound: None,
        linearization: inst.linearization.clone(),
    })
}
