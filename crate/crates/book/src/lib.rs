//! The mdbook guide under `book/`, compiled as doc-tests so its snippets stay
//! in sync with the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/rules.md")]
pub mod rules {}

#[doc = include_str!("../../../book/src/permutivity.md")]
pub mod permutivity {}

#[doc = include_str!("../../../book/src/tde.md")]
pub mod tde {}

#[doc = include_str!("../../../book/src/mtde.md")]
pub mod mtde {}

#[doc = include_str!("../../../book/src/measures.md")]
pub mod measures {}

#[doc = include_str!("../../../book/src/estimator.md")]
pub mod estimator {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
