//! Exact-arithmetic martingales and betting games on the space of
//! length-preserving permutations of binary strings.
//!
//! The space carries the uniform product measure: independently at each
//! length n, each of the (2^n)! block permutations is equally likely.
//! Strategies bet on permutation function values one string at a time;
//! capital functions satisfy an averaging condition over the free images
//! at the current betting length. Everything is exact big-rational
//! arithmetic and everything is verifiable by brute force at small string
//! lengths: length ≤ 2 has only 48 tables.
//!
//! Module map:
//! - [`strings`]: binary strings and the standard enumeration λ, 0, 1, 00, …
//! - [`permspace`]: prefixes, free sets, the cylinder measure, tables, and
//!   the exhaustive enumeration oracle.
//! - [`martingale`]: the martingale trait, runners, covers, the Kraft
//!   check, and every constructed strategy.
//! - [`betting`]: adaptive-order betting games, honesty audits, and the
//!   half-range subgames.
//! - [`diagonal`]: permutations constructed to defeat a given strategy.
//! - [`transfer`]: the bridges between permutation space and Cantor space
//!   through the derived language of a permutation.
//! - [`testlang`]: half-range test languages and exact event
//!   probabilities.
//! - [`verify`]: the brute-force audit suite behind `permlab verify`.

pub mod betting;
pub mod diagonal;
pub mod error;
pub mod export;
pub mod martingale;
pub mod permspace;
pub mod rational;
pub mod strings;
pub mod testlang;
pub mod transfer;
pub mod verify;

pub use error::{PermLabError, Result};
pub use permspace::{
    cylinder_measure, enumerate_permutations, FinitePermutation, PrefixPartialPermutation,
};
pub use rational::ExactRational;
pub use strings::{BinaryString, StringIndex};
