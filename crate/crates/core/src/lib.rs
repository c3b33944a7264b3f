//! Definability, implicit definability and algebraicity on finite
//! first-order structures.

pub mod aut;
pub mod caps;
pub mod cli;
pub mod definability;
pub mod eval;
pub mod formula;
pub mod hierarchy;
pub mod structure;
pub mod subset;

pub use subset::Subset;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/structures.md")]
    mod structures {}
    #[doc = include_str!("../../../book/src/formulas.md")]
    mod formulas {}
    #[doc = include_str!("../../../book/src/types.md")]
    mod types {}
    #[doc = include_str!("../../../book/src/automorphisms.md")]
    mod automorphisms {}
    #[doc = include_str!("../../../book/src/definability.md")]
    mod definability {}
    #[doc = include_str!("../../../book/src/convert.md")]
    mod convert {}
    #[doc = include_str!("../../../book/src/hierarchy.md")]
    mod hierarchy {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/finite-scale.md")]
    mod finite_scale {}
}
