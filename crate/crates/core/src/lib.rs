//! Certificate engine and region classifier for Liouville theorems of the
//! elliptic equation `-Δv = v^p |∇v|^q` in `ℝⁿ`.
//!
//! The crate evaluates the polynomial nonexistence conditions `𝔾` and `ℍ`,
//! builds and validates the algebraic certificates behind the constancy
//! results, verifies the pointwise differential identities on third-order
//! jets, and verifies the explicit radial solution family on the existence
//! boundary.

pub mod certify;
pub mod coeffs;
pub mod error;
pub mod jets;
pub mod radial;
pub mod ratpoly;
pub mod regions;
pub mod verify;
pub mod young;

pub use certify::Certificate;
pub use coeffs::{CoefficientSet, ParamChoice};
pub use error::Error;
pub use jets::{FramedJet, Jet3};
pub use radial::RadialProfile;
pub use regions::{ProblemPoint, RegionLabel};
pub use young::YoungExponents;
