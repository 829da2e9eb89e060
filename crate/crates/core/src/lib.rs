//! Variable-exponent Lebesgue and Lorentz norms of radial functions on
//! balls, rearrangements, a compactness classifier for the Sobolev
//! embedding into variable Lorentz spaces, and numerical estimates of the
//! associated extremal quotient.

pub mod compactness;
pub mod domain;
pub mod error;
pub mod extremal;
pub mod nelder_mead;
pub mod norms;
pub mod par;
pub mod quadrature;
pub mod rearrangement;
pub mod system;

pub use domain::{unit_ball_volume, BallDomain, ExponentField, LogSingular, RadialProfile};
pub use error::{Error, Result};
pub use norms::{
    holder_conjugate_field, indicator_norm, lorentz_norm, lorentz_norm_pow, luxemburg_norm, modular,
    rearranged_lorentz_norm_pow, NormSpec,
};
