//! Exact symbolic calculus for the Lie algebras of polynomial differential
//! operators on ℝⁿ: normally ordered composition, symbols, the classified
//! derivations of the operator, first-order and symbol algebras, and the
//! one-parameter automorphism groups those derivations integrate to.

pub mod derivation;
pub mod error;
pub mod flow;
pub mod lemma1;
pub mod linalg;
pub mod poly;
pub mod sample;
pub mod quadrature;
pub mod scalar;
pub mod symbol;
pub mod weyl;

pub use derivation::{
    d_action, induced_classical, read_off_d, read_off_d1, read_off_s, s_action, D1Derivation,
    DDerivation, SDerivation,
};
pub use error::{Error, Result};
pub use flow::{
    div_of_flow, jacobian, one_param_group_d, one_param_group_d1, one_param_group_s,
    pushforward_operator, pushforward_vector, AffineMap, D1Automorphism, DAutomorphism,
    FlowField, Jacobian, PhaseAffine, SAutomorphism,
};
pub use lemma1::{lemma1_bruteforce, Lemma1Report, Lemma1Variant};
pub use linalg::Mat;
pub use poly::{MultiIndex, SymbolPoly, Var};
pub use sample::Sampler;
pub use scalar::{Scalar, ScalarMode};
pub use symbol::{
    deg_derivation, exact_differential, poisson_bracket, ClosedOneForm, Divergence,
};
pub use weyl::WeylOp;
