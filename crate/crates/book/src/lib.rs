//! Runs the guide's code blocks as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/folding.md")]
pub mod folding {}
#[doc = include_str!("../../../book/src/design.md")]
pub mod design {}
#[doc = include_str!("../../../book/src/nets.md")]
pub mod nets {}
#[doc = include_str!("../../../book/src/locomotion.md")]
pub mod locomotion {}
#[doc = include_str!("../../../book/src/sensing.md")]
pub mod sensing {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
