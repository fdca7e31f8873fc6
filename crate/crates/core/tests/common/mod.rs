//! Shared test support: random programs, the hand corpus, and independent
//! oracles.
#![allow(dead_code)]

pub mod corpus;
pub mod gen;
pub mod oracle;
pub mod props;
