//! Formal center-manifold expansions of planar saddle-nodes
//! `x²y' = −(1 + ax)y + f(x, y)`.
//!
//! The crate computes the coefficients `φₙ` of the formal center manifold,
//! estimates `S∞ = lim (−1)ⁿφₙ/Γ(n + a)`, brings systems into the normal form
//! `x²y' = −(1 + ax)y + x²f₀(x) + x²y²f₂(x, y)` with `a ≥ 2`, and provides
//! Borel-plane diagnostics and the Riccati-family parameter atlas.

pub mod error;
pub mod quadrature;
pub mod riccati;
pub mod scalar;
pub mod series;
pub mod special;
pub mod system;
pub mod asymptotics;
pub mod borel;
pub mod contour;

pub use asymptotics::{DecayDiagnostics, Expansion, SinfEstimate, SinfMethod};
pub use borel::{DiscFunction, NormParams, Pade, SamplerKind, SamplerParams, SamplerReport, SingularityProfile, YeqnResidual};
pub use contour::{BranchFit, Contours, Polyline};
pub use error::{Error, Result};
pub use riccati::{QProbe, SignMap};
pub use scalar::{Scalar, SignedLog};
pub use series::{BSeries, USeries};
pub use special::InequalityKind;
pub use system::{NormalizedSystem, RawSystem, System, TransformRecord};
