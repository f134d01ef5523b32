//! Compiles every code listing of the guide in `book/src` as a doctest, so
//! the book cannot drift from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}
#[doc = include_str!("../../../book/src/filtering.md")]
pub mod filtering {}
#[doc = include_str!("../../../book/src/anchors.md")]
pub mod anchors {}
#[doc = include_str!("../../../book/src/similarity.md")]
pub mod similarity {}
#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
