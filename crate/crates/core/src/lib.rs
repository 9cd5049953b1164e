//! Heavy-tailed claim totals split into the largest claims, the next largest and the rest.

pub mod error;
pub mod finite_t;
pub mod limit;
pub mod mixing;
pub mod moments;
pub mod montecarlo;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod tail;

pub use error::{Error, Result};

/// Double-precision tail model.
pub type Tail = tail::TailModel<f64>;
/// Double-precision mixing law.
pub type Mixing = mixing::MixingLaw<f64>;
pub type Regime = limit::Regime<f64>;
pub type Counting = finite_t::CountingSpec<f64>;
/// Exact rational scalar for the ratio moments.
pub type Ratio = num_rational::BigRational;
