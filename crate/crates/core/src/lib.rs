//! Spectral tools for heat and wave equations driven by space-time white
//! noise, where the spatial operator is the generator of a Lévy process.
//!
//! Fourier transforms use `f̂(ξ) = ∫ e^{iξx} f(x) dx` and the characteristic
//! exponent satisfies `E exp(iξX_t) = exp(-tΨ(ξ))`.

pub mod functionals;
pub mod markov;
pub mod moments;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod semilinear;
pub mod symbols;
pub mod testfn;

mod error;

pub use error::{Error, Result};
pub use functionals::{GaugeSpec, Outcome};
pub use moments::{InequalityReport, MomentReport};
pub use quadrature::QuadratureSpec;
pub use symbols::{LevyTriplet, Symbol, SymbolKind};
pub use testfn::TestFunction;
