//! Partition functions from Trotterized evolutions: product formulas,
//! Fourier/GQSP Boltzmann oracles, trace estimation and Chebyshev
//! extrapolation of the step size to zero.
//!
//! The guide in `book/` walks through each stage; its code blocks run as
//! doctests of this crate.

pub mod cheb;
pub mod error;
pub mod gqsp;
pub mod hamiltonian;
pub mod linalg;
pub mod lwf;
pub mod pauli;
pub mod pipeline;
mod precise;
pub mod seed;
pub mod stats;
pub mod syk;
pub mod thermal;
pub mod trotter;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/pauli-and-syk.md")]
    mod pauli_and_syk {}
    #[doc = include_str!("../../../book/src/product-formulas.md")]
    mod product_formulas {}
    #[doc = include_str!("../../../book/src/fourier-approximation.md")]
    mod fourier_approximation {}
    #[doc = include_str!("../../../book/src/gqsp.md")]
    mod gqsp {}
    #[doc = include_str!("../../../book/src/thermal-oracle.md")]
    mod thermal_oracle {}
    #[doc = include_str!("../../../book/src/chebyshev-extrapolation.md")]
    mod chebyshev_extrapolation {}
    #[doc = include_str!("../../../book/src/pipeline-and-cli.md")]
    mod pipeline_and_cli {}
}
