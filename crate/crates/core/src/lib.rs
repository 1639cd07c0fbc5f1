//! Method summarization for event-driven programs.
//!
//! A sequence-to-sequence summarizer with additive attention turns a
//! tokenized method into a one-line comment. A dynamic call graph, ranked
//! with PageRank, supplies each method's most important caller; that caller's
//! own summary is appended as a second line of context.
//!
//! The modules follow the pipeline:
//!
//! - [`tokenizer`]: Java-aware tokenization of code and comments
//! - [`corpus`]: pair filtering, vocabularies, id encoding, dataset splits
//! - [`embeddings`]: pretrained word vectors in the GloVe text format
//! - [`model`]: the encoder/attention/decoder network, training and decoding
//! - [`callgraph`]: call graph parsing, PageRank and context selection
//! - [`metrics`]: BLEU4, METEOR and perplexity
//! - [`pipeline`]: end-to-end summarization, evaluation and run configuration

pub mod callgraph;
pub mod corpus;
pub mod embeddings;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod tokenizer;
