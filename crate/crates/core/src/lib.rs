pub mod logic;
pub mod semantics;
pub mod realization;
pub mod dataset;
pub mod taskgen;
pub mod baseline;
