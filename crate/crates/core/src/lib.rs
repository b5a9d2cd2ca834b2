//! Curvature analysis for semi-Riemannian coordinate metrics given in closed
//! form: builds the standard curvature tensors symbolically, samples them on a
//! numeric grid, and detects pseudosymmetric-type structure.

pub mod catalog;
pub mod claims;
pub mod classify;
pub mod curvature;
pub mod expr;
mod golden;
pub mod metric;
pub mod metric_file;
pub mod numeric;
pub mod ops;
pub mod report;
pub mod tensor;
pub mod textfmt;
