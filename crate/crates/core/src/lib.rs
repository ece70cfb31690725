//! Optimal transport on the real line for general convex costs `g(x - y)`.
//!
//! Everything reduces to quantile functions: the transportation cost is
//! `∫₀¹ g(F⁻¹_μ - F⁻¹_ν)`, the optimal plan is the monotone rearrangement,
//! and Fréchet barycenters are computed one quantile level at a time.

pub mod barycenter;
pub mod checks;
pub mod cost;
mod error;
pub mod lln;
pub mod measure;
mod numeric;
pub mod sampling;
pub mod transport;

pub use error::{Error, Result};
pub use numeric::{compensated_sum, CompensatedSum};

// Book chapters, run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/costs.md")]
    mod costs {}
    #[doc = include_str!("../../../book/src/transport.md")]
    mod transport {}
    #[doc = include_str!("../../../book/src/barycenters.md")]
    mod barycenters {}
    #[doc = include_str!("../../../book/src/lln.md")]
    mod lln {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
