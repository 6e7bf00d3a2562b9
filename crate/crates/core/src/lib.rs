//! Exceptional points of parameter-dependent non-Hermitian matrix families.

pub mod finder;
pub mod linalg;
pub mod models;
pub mod monodromy;
pub mod response;
pub mod twolevel;
