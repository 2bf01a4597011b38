//! Exact sparse polynomial arithmetic over O = k[t] localized at (t), with
//! k = Q or F_p (p >= 5), plus t-adic and order/tangent-cone utilities, the
//! coefficient fields (with algebraic extensions), and the bounded
//! factorization kernel the geometry relies on.

pub mod factor;
pub mod field;
pub mod linalg;
pub mod poly;
pub mod uni;

pub use factor::{analyze_quadratic_form, divide_exact, factor_over_k, form_sqrt, FormFactors};
pub use field::{Base, Field, Scalar};
pub use poly::{DvrPolynomial, Monomial};

/// Default t-truncation order where normal forms need one.
pub const DEFAULT_TRUNCATION: u32 = 12;
