pub mod analysis;
pub mod ansatz;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod lattice;
pub mod sim;
pub mod vqe;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/statevector.md")]
    mod statevector {}
    #[doc = include_str!("../../../book/src/ansatze.md")]
    mod ansatze {}
    #[doc = include_str!("../../../book/src/hamiltonians.md")]
    mod hamiltonians {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/entropy.md")]
    mod entropy {}
    #[doc = include_str!("../../../book/src/expressibility.md")]
    mod expressibility {}
    #[doc = include_str!("../../../book/src/gradient-variance.md")]
    mod gradient_variance {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
