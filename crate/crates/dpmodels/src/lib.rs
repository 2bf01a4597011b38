//! Symbolic kernel for integral models of Del Pezzo surfaces over a discrete
//! valuation ring O with parameter t and residue field k (Q or F_p, p >= 5):
//! exact polynomial arithmetic, elementary transformations of (weighted)
//! projective space with discrepancy bookkeeping, special-fiber analysis,
//! Du Val / compound Du Val classification by explicit blow-up resolution,
//! the model-improvement programs for cubic and degree-2 surfaces, and the
//! local-rigidity detectors with anticanonical member sweeps.

pub mod ambient;
pub mod duval;
pub mod error;
pub mod fibergeom;
pub mod flowchart;
pub mod polyring;
pub mod rigidity;
pub mod solve;
pub mod transform;

pub use ambient::{Ambient, AmbientKind, AmbientSpace};
pub use error::KernelError;
pub use polyring::{DvrPolynomial, Field, Monomial, Scalar};
