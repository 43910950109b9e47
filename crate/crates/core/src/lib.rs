//! Rational Krylov methods built on structured matrix factorizations.
//!
//! The crate covers core transformations and their manipulation
//! ([`structured`]), Hessenberg and tridiagonal pencils ([`pencil`]), the
//! rational Arnoldi iteration ([`arnoldi`]), a dense oblique-projection
//! oracle ([`oracle`]), the short-recurrence rational Lanczos iteration
//! ([`lanczos`]) and experiment tooling ([`diagnostics`], [`selftest`]).

// `!(x < tol)` rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arnoldi;
pub mod dense;
pub mod diagnostics;
pub mod error;
pub mod lanczos;
pub mod oracle;
pub mod pencil;
pub mod selftest;
pub mod shifted;
pub mod structured;

pub use arnoldi::{rational_arnoldi, KrylovDecomposition};
pub use dense::{ComplexMatrix, ComplexVector, C64};
pub use error::{Error, Result};
pub use lanczos::{rat_lan, recover_poles_sub, recover_poles_super, LanczosConfig, LanczosState, RatLanOutput};
pub use oracle::{biorthogonalize, lr_decompose, oblique_pencil, BiorthogonalPair};
pub use pencil::{ContinuationPair, HessenbergPencil, ProjectivePole, TridiagonalPencil};
pub use shifted::ShiftedSolver;
pub use structured::{CorePattern, CoreTransformation, StructureDescriptor};
