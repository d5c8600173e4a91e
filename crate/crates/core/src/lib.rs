//! Qualitative relational mapping.

pub mod edc;
pub mod measurement;
pub mod nav;
pub mod operators;
pub mod qfeas;
pub mod qmap;
pub mod sim;
