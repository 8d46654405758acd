//! Command line and HTTP front-ends over the `quantforge` library. Both print
//! the same canonical structured documents.

pub mod app;
pub mod cli;
pub mod human;
pub mod service;
