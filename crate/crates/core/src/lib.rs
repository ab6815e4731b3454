//! Tools for probing (non)automaticity of arithmetic sequences.
//!
//! The crate generates arithmetic-function tables, profiles the growth of
//! their k-kernels (distinct counts and exact rational ranks), builds and
//! evaluates linear representations of automatic sequences, continues their
//! Dirichlet series through the base-k recursion, evaluates the Riemann zeta
//! function and counts its zeros, and explores Cartier-section orbits of
//! power series over F_p.

pub mod error;
pub mod exact;
pub mod kernel;
pub mod automaton;
pub mod zeta;
pub mod dirichlet;
pub mod christol;
pub mod seqgen;

pub use error::{Error, Result};
pub use seqgen::{build_factor_table, generate, generate_table, reduce_mod, FactorTable, FunctionId, ValueTable};
pub use kernel::{KernelElement, KernelProfile, RankProfile, Verdict};
pub use automaton::{LatticePoint, LinearRepresentation, PoleLattice, RepresentationMode};
pub use dirichlet::{EvalFlags, EvalResult, IdentityId, Method, ScanRect};
pub use christol::{AlgebraicityVerdict, FpSeries, OrbitOutcome, OrbitReport};
pub use num_complex::Complex64;
