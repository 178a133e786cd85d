use crate::error::{ensure_dim, Error, Result};
use crate::instances::{ApproachabilityInstance, BilinearGen};
use crate::linalg::Vector;
use crate::polytope::Polytope;

/// Distance to a convex target as a max of scalar constraints.
///
/// For a vector payoff `u = (u_1, .., u_k)` and each direction `v`, emits
/// `u_v = (<v, u> - h_S(v)) / h_B(v)`, where `h` is the support function. With
/// `B` the unit ball of a norm and `directions` containing every facet normal
/// of `S + rB`, `max(0, max_v u_v(x))` is the `B`-distance from `x` to `S`.
#[allow(clippy::too_many_arguments)]
pub fn orthant_reduce(
    name: &str,
    p: &Polytope,
    l: &Polytope,
    u: &[BilinearGen],
    target: &Polytope,
    ball: &Polytope,
    directions: &[Vector],
) -> Result<ApproachabilityInstance> {
    let k = u.len();
    if k == 0 || directions.is_empty() {
        return Err(Error::Malformed(
            "orthant reduction needs payoffs and directions".into(),
        ));
    }
    ensure_dim("target set dimension", k, target.ambient_dim())?;
    ensure_dim("ball dimension", k, ball.ambient_dim())?;
    let mut out = Vec::with_capacity(directions.len());
    for (index, v) in directions.iter().enumerate() {
        ensure_dim("direction", k, v.len())?;
        let b = ball.support(v)?;
        if !b.is_positive() {
            return Err(Error::DegenerateBall { index });
        }
        let a = target.support(v)?;
        let mut g = BilinearGen::combination(format!("dir{}", index + 1), u, v.as_slice())?;
        g.c -= &a;
        let inv = b.recip()?;
        g.m = g.m.scale(&inv);
        g.p_offset = g.p_offset.scale(&inv);
        g.l_offset = g.l_offset.scale(&inv);
        g.c *= &inv;
        out.push(g);
    }
    ApproachabilityInstance::new(format!("{name}/orthant"), p.clone(), l.clone(), out)
}
