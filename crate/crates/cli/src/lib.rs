//! Experiment drivers: cohort construction, the capweight / RVTR / budget
//! studies, result records, CSV and SVG emission.

pub mod emit;
pub mod metrics;
pub mod records;
pub mod sweeps;
pub mod verify;
