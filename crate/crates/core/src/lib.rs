//! Principal eigenvalues, spreading speeds and front simulations for the
//! periodic KPP equation with q-diffusion
//!
//! ```text
//! u_t = (D^{1-q} (D^q u)_x)_x + u (r - u),   r, D periodic, D > 0.
//! ```
//!
//! The core numerics are generic over [`scalar::Real`] (`f32`/`f64`); the
//! aliases below fix the scalar to `f64`.

pub mod anneal;
pub mod eigen;
pub mod fields;
pub mod identities;
pub mod linalg;
pub mod pdesim;
pub mod quadrature;
pub mod scalar;
pub mod speed;
pub mod sweeps;

pub use fields::{
    build_periodic_spline, find_extrema, power_harmonic_mean, sqrt_harmonic_mean, FieldError, FieldSpec, PeriodicField,
};
pub use scalar::Real;

pub type Field = fields::PeriodicField<f64>;
pub type KValue = eigen::KValue<f64>;
pub type SpeedResult = speed::SpeedResult<f64>;
pub type SimConfig = pdesim::SimConfig<f64>;
pub type FrontTrace = pdesim::FrontTrace<f64>;
pub type AnnealConfig = anneal::AnnealConfig<f64>;
pub type AnnealResult = anneal::AnnealResult<f64>;
