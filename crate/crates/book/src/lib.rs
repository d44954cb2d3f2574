//! The guide under `book/src` compiled as documentation, so that every Rust
//! snippet in it runs under `cargo test`. Each chapter gets its own module,
//! which keeps failures traceable to a chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/datasets.md")]
pub mod datasets {}

#[doc = include_str!("../../../book/src/distances.md")]
pub mod distances {}

#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}

#[doc = include_str!("../../../book/src/solvers.md")]
pub mod solvers {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
