//! Oracles and generators shared by the property tests and the acceptance run.
#![allow(dead_code)]

pub mod corpus;
pub mod graph;
pub mod harness;
pub mod ingest;
pub mod semantic;
pub mod stats;
