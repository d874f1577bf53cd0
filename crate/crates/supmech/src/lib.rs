//! Derivation-based noncommutative differential calculus and symplectic
//! mechanics on finite-dimensional matrix algebras and commutative
//! polynomial algebras.
//!
//! The crate builds the calculus bottom-up: *-algebras and their elements
//! ([`algebra`]), derivations and their Lie structure ([`derivation`]),
//! differential forms with the full Cartan calculus ([`forms`]), symplectic
//! structures and Poisson brackets ([`symplectic`]), tensor-product
//! structures and the universality analysis of the product bracket
//! ([`tensor_product`]), and states with Hamiltonian dynamics ([`states`],
//! [`dynamics`]). Machine-readable verification suites live in [`suites`].

pub mod algebra;
pub mod derivation;
pub mod dynamics;
pub mod error;
pub mod forms;
pub mod morphism;
pub mod report;
pub mod rng;
pub mod states;
pub mod suites;
pub mod symplectic;
pub mod sysspec;
pub mod tensor_product;

pub use algebra::{AlgebraDescriptor, AlgebraElement, CenterDescription, DEFAULT_TOLERANCE};
pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
