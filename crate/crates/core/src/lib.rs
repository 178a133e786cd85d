//! Exact tooling for Blackwell approachability and (improper) φ-regret
//! minimization: rational polytopes and LPs, instance classification,
//! reductions between instances, linear-equivalence decisions, and an online
//! learning simulation harness.

pub mod corpus;
pub mod equivalence;
pub mod error;
pub mod instances;
pub mod learners;
pub mod linalg;
pub mod lp;
pub mod polytope;
pub mod rational;
pub mod reductions;

pub use equivalence::{
    apply_S, canonicalize, check_external, decide_proper, EquivStatus, EquivalenceVerdict,
    LinearizedInstance, Obstruction,
};
pub use error::{Error, Result};
pub use instances::{
    apploss_of_play, classify, regret_of_play, weighted_regret, AffineMapGen,
    ApproachabilityInstance, BilinearGen, ClassKind, Classification, Instance, RegretInstance,
};
pub use learners::{simulate, Learner, Trace};
pub use linalg::{det_exact, left_kernel_basis, Matrix, Vector};
pub use lp::{lp_solve, LinearProgram, LpOutcome};
pub use polytope::{affine_span, polytope_membership, tensor_product, Polytope};
pub use rational::{ratio, Rational};
pub use reductions::{classical_reduce, tight_improper_reduce};
