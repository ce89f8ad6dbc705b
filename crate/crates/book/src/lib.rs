// mdbook cannot run listings that depend on an external crate, so each
// chapter is included here as the docs of an empty module and `cargo test`
// runs its code blocks as doc-tests. One module per chapter keeps failures
// traceable to a file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/percolation.md")]
pub mod percolation {}
#[doc = include_str!("../../../book/src/theory.md")]
pub mod theory {}
#[doc = include_str!("../../../book/src/transpositions.md")]
pub mod transpositions {}
#[doc = include_str!("../../../book/src/reversals.md")]
pub mod reversals {}
#[doc = include_str!("../../../book/src/branching.md")]
pub mod branching {}
#[doc = include_str!("../../../book/src/estimation.md")]
pub mod estimation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
