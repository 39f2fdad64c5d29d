pub mod config;
pub mod diagnostics;
pub mod distributions;
pub mod engine;
pub mod error;
pub mod exec;
pub mod models;
pub mod quadrature;
pub mod stats;
pub mod study;
pub mod svg;
pub mod tail_index;
pub mod vsrv;
