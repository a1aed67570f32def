//! Assemble ordered, chaptered books from a linked document corpus.
//!
//! The pipeline runs in four stages over a [`corpus::Corpus`]:
//! seed extraction and candidate generation ([`datasets`]), article
//! selection ([`selection`]), chaptering ([`chaptering`]) and ordering
//! ([`ordering`]). [`pipeline`] wires the stages together and [`metrics`]
//! scores the output against gold books.

pub mod chaptering;
pub mod corpus;
pub mod datasets;
pub mod error;
pub mod graphnet;
pub mod learners;
pub mod metrics;
pub mod ordering;
pub mod pipeline;
pub mod selection;
pub mod stats;
pub mod textfeat;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/candidates.md")]
    mod candidates {}
    #[doc = include_str!("../../../book/src/selection.md")]
    mod selection {}
    #[doc = include_str!("../../../book/src/chaptering.md")]
    mod chaptering {}
    #[doc = include_str!("../../../book/src/ordering.md")]
    mod ordering {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
