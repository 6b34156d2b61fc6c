//! Concircular tensors, their metric-Jordan classification and the orthogonal
//! separable webs of three-dimensional Minkowski space.

pub mod catalog;
pub mod concircular;
pub mod cubic;
pub mod dd;
pub mod dual;
pub mod elliptic;
pub mod error;
pub mod expr;
pub mod ict;
pub mod jordan;
pub mod killing;
pub mod minkowski;
pub mod scalar;
pub mod verify;
pub mod warped;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Vec3 = minkowski::Vec3M<f64>;
pub type Operator = minkowski::Operator3<f64>;
pub type Bilinear = minkowski::SymBilinear<f64>;
pub type Dual3 = dual::Dual<f64>;
/// Double-double scalar for ill-conditioned certificates.
pub type Wide = dd::Dd;
