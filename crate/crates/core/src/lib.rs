pub mod corpus;
pub mod evalkit;
pub mod index;
pub mod study_fixture;
pub mod pipeline;
pub mod query;
pub mod recommender;
pub mod report;
pub mod rerank;
pub mod run;
pub mod service;
pub mod synthetic;
pub mod text;
