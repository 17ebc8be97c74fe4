pub mod quadrature;
pub mod special;
pub mod stats;
