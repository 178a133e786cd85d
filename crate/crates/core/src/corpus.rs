//! Bundled example instances.
//!
//! Every builder is deterministic, and the default-parameter outputs are
//! checked in under `corpus/` as golden JSON.

use crate::error::{Error, Result};
use crate::instances::{
    AffineMapGen, ApproachabilityInstance, BilinearGen, Instance, RegretInstance,
};
use crate::linalg::{Matrix, Vector};
use crate::polytope::Polytope;
use crate::rational::{ratio, Rational};

pub const CORPUS_NAMES: &[&str] = &[
    "figure2a",
    "figure2b",
    "figure2c",
    "gap-instance",
    "appendix-b",
    "ab-counterexample",
    "experts",
    "swap-regret",
    "phi-alpha",
    "translation-instance",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusParams {
    pub dprime: usize,
    pub eps: Rational,
    pub d1: usize,
    pub d2: usize,
    pub n: usize,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            dprime: 2,
            eps: ratio(1, 100),
            d1: 2,
            d2: 2,
            n: 3,
        }
    }
}

pub fn corpus_instance(name: &str, params: &CorpusParams) -> Result<Instance> {
    Ok(match name {
        "figure2a" => figure2a().into(),
        "figure2b" => figure2b().into(),
        "figure2c" => figure2c().into(),
        "gap-instance" => gap_instance(params.dprime)?.into(),
        "appendix-b" => appendix_b(&params.eps, params.d1, params.d2)?.into(),
        "ab-counterexample" => ab_counterexample().into(),
        "experts" => experts(params.n)?.into(),
        "swap-regret" => swap_regret(params.n)?.into(),
        "phi-alpha" => phi_alpha().into(),
        "translation-instance" => translation_instance().into(),
        _ => {
            return Err(Error::Malformed(format!(
                "unknown example {name:?}; available: {}",
                CORPUS_NAMES.join(", ")
            )))
        }
    })
}

fn m(rows: &[&[i64]]) -> Matrix {
    Matrix::from_ints(rows)
}

fn v(xs: &[i64]) -> Vector {
    Vector::from_ints(xs)
}

fn gen(label: &str, linear: Matrix, offset: Vector) -> AffineMapGen {
    AffineMapGen::new(label, linear, offset).expect("well-formed literal")
}

fn figure2(name: &str, phi: Vec<AffineMapGen>) -> RegretInstance {
    RegretInstance::new(
        name,
        Polytope::simplex(3),
        Polytope::cube(3, (-1).into(), 1.into()),
        phi,
    )
    .expect("well-formed literal")
}

/// `phi_1(p) = (1, -p2, -2p3)`, `phi_2(p) = (0, 2 - p2, -2p3)`,
/// `phi_3(p) = (0, -p2, 3 - 2p3)`.
pub fn figure2a() -> RegretInstance {
    let lin = || m(&[&[0, 0, 0], &[0, -1, 0], &[0, 0, -2]]);
    figure2(
        "figure2a",
        vec![
            gen("phi1", lin(), v(&[1, 0, 0])),
            gen("phi2", lin(), v(&[0, 2, 0])),
            gen("phi3", lin(), v(&[0, 0, 3])),
        ],
    )
}

/// `phi_1(p) = (1, 0, 0)`, `phi_2(p) = (-p1, 2 - p2, -p3)`,
/// `phi_3(p) = (-2p1, -2p2, 3 - 2p3)`.
pub fn figure2b() -> RegretInstance {
    figure2(
        "figure2b",
        vec![
            gen("phi1", Matrix::zeros(3, 3), v(&[1, 0, 0])),
            gen(
                "phi2",
                Matrix::identity(3).scale(&(-1).into()),
                v(&[0, 2, 0]),
            ),
            gen(
                "phi3",
                Matrix::identity(3).scale(&(-2).into()),
                v(&[0, 0, 3]),
            ),
        ],
    )
}

/// Each `Id - phi_i` is skew-symmetric.
pub fn figure2c() -> RegretInstance {
    figure2(
        "figure2c",
        vec![
            gen(
                "phi1",
                m(&[&[1, -1, 0], &[1, 1, 0], &[0, 0, 1]]),
                Vector::zeros(3),
            ),
            gen(
                "phi2",
                m(&[&[1, 0, 1], &[0, 1, 0], &[-1, 0, 1]]),
                Vector::zeros(3),
            ),
            gen(
                "phi3",
                m(&[&[1, 0, 0], &[0, 1, -1], &[0, 1, 1]]),
                Vector::zeros(3),
            ),
        ],
    )
}

/// `M` with `p^T M l = scale * sum_{j in block} p_j (l_j - l_i)`.
fn block_regret_matrix(
    d: usize,
    block: std::ops::Range<usize>,
    i: usize,
    scale: &Rational,
) -> Matrix {
    let mut mat = Matrix::zeros(d, d);
    for j in block {
        mat[(j, j)] += scale;
        mat[(j, i)] -= scale;
    }
    mat
}

/// `P = Delta_{d'+1}`, `L = [0,1]^{d'+1}`,
/// `u_i(p, l) = sum_{j <= d'} p_j (l_j - l_i)` for `i <= d'`.
pub fn gap_instance(dprime: usize) -> Result<ApproachabilityInstance> {
    if dprime < 2 {
        return Err(Error::Malformed("gap instance needs d' >= 2".into()));
    }
    let d = dprime + 1;
    let u = (0..dprime)
        .map(|i| {
            BilinearGen::bilinear(
                format!("u{}", i + 1),
                block_regret_matrix(d, 0..dprime, i, &Rational::one()),
            )
        })
        .collect();
    ApproachabilityInstance::new(
        format!("gap-instance-d{dprime}"),
        Polytope::simplex(d),
        Polytope::cube(d, 0.into(), 1.into()),
        u,
    )
}

/// Two regret blocks on `Delta_{d1+d2}`, the first scaled by `eps`.
pub fn appendix_b(eps: &Rational, d1: usize, d2: usize) -> Result<ApproachabilityInstance> {
    if d1 < 2 || d2 < 2 || !eps.is_positive() {
        return Err(Error::Malformed(
            "appendix-b needs d1, d2 >= 2 and eps > 0".into(),
        ));
    }
    let d = d1 + d2;
    let mut u = Vec::with_capacity(d);
    for i in 0..d1 {
        u.push(BilinearGen::bilinear(
            format!("u{}", i + 1),
            block_regret_matrix(d, 0..d1, i, eps),
        ));
    }
    for i in d1..d {
        u.push(BilinearGen::bilinear(
            format!("u{}", i + 1),
            block_regret_matrix(d, d1..d, i, &Rational::one()),
        ));
    }
    ApproachabilityInstance::new(
        format!("appendix-b-eps{eps}-d{d1}-{d2}").replace('/', "_"),
        Polytope::simplex(d),
        Polytope::cube(d, 0.into(), 1.into()),
        u,
    )
}

pub fn matrix_a() -> Matrix {
    m(&[&[-6, 8, -9], &[2, -1, -9], &[4, -7, 18]])
}

pub fn matrix_b() -> Matrix {
    m(&[&[10, -3, -7], &[6, -6, 10], &[-16, 9, -3]])
}

/// `Phi = {Id + ga A + gb B : ga, gb in [-1, 1]}`, represented by the square's
/// corners together with `Id +- A` and `Id +- B`.
pub fn ab_counterexample() -> RegretInstance {
    let (a, b) = (matrix_a(), matrix_b());
    let id = Matrix::identity(3);
    let combos: [(&str, i64, i64); 8] = [
        ("Id+A", 1, 0),
        ("Id-A", -1, 0),
        ("Id+B", 0, 1),
        ("Id-B", 0, -1),
        ("Id+A+B", 1, 1),
        ("Id-A-B", -1, -1),
        ("Id+A-B", 1, -1),
        ("Id-A+B", -1, 1),
    ];
    let phi = combos
        .iter()
        .map(|&(label, ga, gb)| {
            let lin = id
                .add(&a.scale(&ga.into()))
                .and_then(|x| x.add(&b.scale(&gb.into())))
                .expect("3x3");
            gen(label, lin, Vector::zeros(3))
        })
        .collect();
    RegretInstance::new(
        "ab-counterexample",
        Polytope::simplex(3),
        Polytope::cube(3, 0.into(), 1.into()),
        phi,
    )
    .expect("well-formed literal")
}

/// Learning with experts: constant maps onto each vertex of `Delta_n`.
pub fn experts(n: usize) -> Result<RegretInstance> {
    if n == 0 {
        return Err(Error::Malformed("experts needs n >= 1".into()));
    }
    RegretInstance::new(
        format!("experts-n{n}"),
        Polytope::simplex(n),
        Polytope::cube(n, 0.into(), 1.into()),
        (0..n)
            .map(|i| AffineMapGen::constant(format!("e{}", i + 1), Vector::unit(n, i)))
            .collect(),
    )
}

/// All `n^n` swap maps `phi_pi(p) = sum_i p_i e_{pi(i)}`.
pub fn swap_regret(n: usize) -> Result<RegretInstance> {
    if n == 0 || n > 5 {
        return Err(Error::Malformed("swap-regret supports 1 <= n <= 5".into()));
    }
    let count = n.pow(n as u32);
    let mut phi = Vec::with_capacity(count);
    for code in 0..count {
        let mut pi = vec![0; n];
        let mut c = code;
        for slot in pi.iter_mut().rev() {
            *slot = c % n;
            c /= n;
        }
        let mut lin = Matrix::zeros(n, n);
        for (i, &target) in pi.iter().enumerate() {
            lin[(target, i)] = Rational::one();
        }
        let label = format!(
            "swap[{}]",
            pi.iter()
                .map(|x| (x + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        phi.push(AffineMapGen::linear_map(label, lin)?);
    }
    RegretInstance::new(
        format!("swap-regret-n{n}"),
        Polytope::simplex(n),
        Polytope::cube(n, 0.into(), 1.into()),
        phi,
    )
}

/// `phi_alpha(x, y) = (x, (2 - alpha) y - alpha x)` for `alpha in {0, 1}`.
pub fn phi_alpha() -> RegretInstance {
    RegretInstance::new(
        "phi-alpha",
        Polytope::simplex(2),
        Polytope::cube(2, 0.into(), 1.into()),
        vec![
            gen("alpha0", m(&[&[1, 0], &[0, 2]]), Vector::zeros(2)),
            gen("alpha1", m(&[&[1, 0], &[-1, 1]]), Vector::zeros(2)),
        ],
    )
    .expect("well-formed literal")
}

/// `phi(p) = p + (0, 0, -1)` has no fixed point.
pub fn translation_instance() -> RegretInstance {
    figure2(
        "translation-instance",
        vec![gen("shift", Matrix::identity(3), v(&[0, 0, -1]))],
    )
}
