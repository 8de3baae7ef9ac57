//! Property testers for sparse structure of real-valued functions on R^n
//! under approximate (η-bounded) query access: k-linearity, k-sparse
//! low-degree polynomials, and k-juntas.
//!
//! All testers take a [`oracle::Queryable`] and a seeded random stream and
//! return a [`TesterVerdict`]. Tunable constants live in [`Config`].

pub mod config;
pub mod error;
pub mod hankel;
pub mod harness;
pub mod oracle;
pub mod reference;
pub mod selfcorrect;
pub mod testers;
pub mod verdict;

pub use config::{Config, DeterminantMode};
pub use error::{Error, Result};
pub use oracle::{
    FunctionInstance, JuntaInstance, NoiseModel, OracleHandle, Point, Queryable, SparsePolynomial,
};
pub use verdict::{Decision, TesterVerdict, Witness};
