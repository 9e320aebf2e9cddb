//! Pseudo-projections, pseudo-probability schemes and weak values for small
//! quantum systems.
//!
//! A *pseudo-projection* is the Hermitian part of an ordered product of
//! projectors. Its expectation in a state is a *pseudo-probability*: a
//! quasi-probability for a joint event over observables that need not
//! commute, which can be negative. This crate builds these operators,
//! tabulates them over joint outcomes ([`scheme`]), relates them to weak
//! values ([`weak`]), and runs a battery of nonclassicality tests on them
//! ([`nonclassicality`]): coherence, Boolean-logic violation, CHSH,
//! two-qubit entanglement inequalities and a discord condition. It also
//! includes a weak-measurement pointer simulator ([`pointer`]) and a
//! single-qubit "quantum game" built on the transition matrix of a
//! two-observable scheme ([`game`]).
//!
//! ```
//! use pplab::geometry::{qubit_projector, UnitVector3, Outcome};
//! use pplab::pseudo::{unit_pp, min_eigen_certificate};
//!
//! let pz = qubit_projector(UnitVector3::Z, Outcome::Plus);
//! let px = qubit_projector(UnitVector3::X, Outcome::Plus);
//! let pp = unit_pp(&[pz, px]).unwrap();
//! let cert = min_eigen_certificate(&pp).unwrap();
//! assert!((cert.min_eigenvalue - (1.0 - 2f64.sqrt()) / 4.0).abs() < 1e-12);
//! ```

pub mod error;
pub mod game;
pub mod geometry;
pub mod nonclassicality;
pub mod operator;
pub mod pointer;
pub mod pseudo;
pub mod random;
pub mod scheme;
pub mod weak;

pub use error::{Error, Result};
pub use operator::{ComplexMatrix, DensityMatrix, Projector, C64};
