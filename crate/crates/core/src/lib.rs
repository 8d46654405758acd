//! Design-space exploration for quantized neural network inference
//! accelerators on FPGAs.
//!
//! The crate is organised as a small compiler: [`frontend`] parsers produce a
//! quantization-aware [`ir::Network`], [`passes`] transform it and lower it to
//! hardware blocks, [`cost`] prices those blocks, [`dse`] folds them onto a
//! platform budget and predicts performance, and [`refexec`] executes the
//! network functionally to check that transforms preserve its output.

pub mod cost;
pub mod dse;
pub mod frontend;
pub mod ir;
pub mod passes;
pub mod refexec;
pub mod report;
